"""Run configuration for the command-line front-end.

Physics parameters are stored in dB where they are usually quoted in dB and
converted to linear units once, in :meth:`RunConfig.link_config`.
"""

from __future__ import annotations

import copy
import dataclasses
import hashlib
import json
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .analytic import ModulationSpec
from .errors import ConfigError
from .impairments import HpaKind, HpaModel, IqImbalance
from .mcsim import SimSpec
from .sndr import LinkConfig
from .units import db_to_linear

METRICS = ("outage", "ber", "capacity", "capacity_approx", "capacity_bound",
           "capacity_ceiling", "montecarlo")


@dataclass
class RunConfig:
    n_relays: int = 7
    rank: int = 7
    rho: float = 0.9
    rytov: Optional[float] = 0.16
    alpha: Optional[float] = None
    beta: Optional[float] = None
    hpa: str = "ideal"
    ibo_db: Optional[float] = None
    phi0: float = 0.0
    ilr_db: Optional[float] = None
    zeta_db: Optional[float] = None
    theta_deg: Optional[float] = None
    gamma_th_db: float = 10.0
    modulation: str = "BPSK"
    mod_p: float = 0.5
    mod_q: float = 1.0
    snr_start: float = 0.0
    snr_stop: float = 60.0
    snr_step: float = 5.0
    samples: int = 10 ** 7
    seed: int = 0
    chunks: int = 16
    confidence: float = 0.95
    metrics: list = field(default_factory=lambda: ["outage"])

    # ------------------------------------------------------------------
    def validate(self) -> "RunConfig":
        def finite(name):
            v = getattr(self, name)
            if v is not None and not (isinstance(v, (int, float)) and math.isfinite(v)):
                raise ConfigError(name, f"must be a finite number, got {v!r}")

        for name in ("rho", "rytov", "alpha", "beta", "ibo_db", "phi0", "ilr_db", "zeta_db",
                     "theta_deg", "gamma_th_db", "mod_p", "mod_q", "snr_start", "snr_stop",
                     "snr_step", "confidence"):
            finite(name)
        for name in ("n_relays", "rank", "samples", "seed", "chunks"):
            v = getattr(self, name)
            if isinstance(v, bool) or not isinstance(v, (int, np.integer)):
                raise ConfigError(name, f"must be an integer, got {v!r}")
        if self.n_relays < 1:
            raise ConfigError("n_relays", "must be at least 1")
        if not 1 <= self.rank <= self.n_relays:
            raise ConfigError("rank", f"must lie in [1, {self.n_relays}]")
        if not 0.0 <= self.rho <= 1.0:
            raise ConfigError("rho", "must lie in [0, 1]")
        if (self.alpha is None) != (self.beta is None):
            raise ConfigError("alpha" if self.alpha is None else "beta",
                              "alpha and beta must be given together")
        if self.alpha is None:
            if self.rytov is None or not self.rytov > 0:
                raise ConfigError("rytov", "must be positive when alpha/beta are not given")
        elif not (self.alpha > 0 and self.beta > 0):
            raise ConfigError("alpha", "alpha and beta must be positive")
        try:
            kind = HpaKind(self.hpa)
        except ValueError:
            raise ConfigError("hpa", f"must be one of {[k.value for k in HpaKind]}, got {self.hpa!r}")
        if kind is not HpaKind.IDEAL and self.ibo_db is None:
            raise ConfigError("ibo_db", f"required for hpa={kind.value}")
        if self.ilr_db is not None and (self.zeta_db is not None or self.theta_deg is not None):
            raise ConfigError("ilr_db", "give either ilr_db or zeta_db/theta_deg, not both")
        if not (self.mod_p > 0 and self.mod_q > 0):
            raise ConfigError("mod_p", "modulation parameters must be positive")
        if self.snr_start > self.snr_stop:
            raise ConfigError("snr_start", "must not exceed snr_stop")
        if self.snr_start < self.snr_stop and not self.snr_step > 0:
            raise ConfigError("snr_step", "must be positive")
        try:
            self.sim_spec()
        except ValueError as exc:
            raise ConfigError("samples", str(exc))
        bad = [m for m in self.metrics if m not in METRICS]
        if bad or not self.metrics:
            raise ConfigError("metrics", f"unknown or empty metric list {self.metrics!r}; "
                                         f"choose from {', '.join(METRICS)}")
        return self

    # ------------------------------------------------------------------
    def snr_grid(self) -> list[float]:
        if self.snr_start == self.snr_stop:
            return [float(self.snr_start)]
        n = int(math.floor((self.snr_stop - self.snr_start) / self.snr_step + 1e-9)) + 1
        return [float(self.snr_start + i * self.snr_step) for i in range(n)]

    @property
    def gamma_th(self) -> float:
        return db_to_linear(self.gamma_th_db)

    def modulation_spec(self) -> ModulationSpec:
        return ModulationSpec(self.mod_p, self.mod_q, self.modulation)

    def sim_spec(self) -> SimSpec:
        return SimSpec(self.samples, self.seed, self.chunks, self.confidence)

    def hpa_model(self) -> HpaModel:
        return HpaModel.from_db(self.hpa, self.ibo_db, self.phi0)

    def link_config(self, snr_db: float) -> LinkConfig:
        iq = None
        if self.zeta_db is not None or self.theta_deg is not None:
            iq = IqImbalance.from_db_deg(self.zeta_db or 0.0, self.theta_deg or 0.0)
        return LinkConfig.from_average_snr(
            snr_db, n_relays=self.n_relays, rank=self.rank, rho=self.rho, rytov=self.rytov,
            alpha=self.alpha, beta=self.beta, hpa=self.hpa_model(), ilr_db=self.ilr_db, iq=iq)

    # ------------------------------------------------------------------
    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)

    def digest(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]

    def save(self, path):
        with open(path, "w") as fh:
            fh.write(self.to_json() + "\n")

    @classmethod
    def from_dict(cls, data: dict, base: Optional["RunConfig"] = None) -> "RunConfig":
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(data) - names)
        if unknown:
            raise ConfigError(unknown[0], "unknown configuration key")
        cfg = copy.deepcopy(base) if base is not None else cls()
        for k, v in data.items():
            setattr(cfg, k, list(v) if k == "metrics" else v)
        return cfg

    @classmethod
    def load(cls, path, base: Optional["RunConfig"] = None) -> "RunConfig":
        try:
            with open(path) as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError("config", f"cannot read {path}: {exc}")
        if not isinstance(data, dict):
            raise ConfigError("config", "top level must be an object")
        return cls.from_dict(data, base)


PRESETS = {
    "table1": RunConfig(),
}


def preset(name: str) -> RunConfig:
    try:
        return copy.deepcopy(PRESETS[name])
    except KeyError:
        raise ConfigError("preset", f"unknown preset {name!r}; available: {', '.join(PRESETS)}")
