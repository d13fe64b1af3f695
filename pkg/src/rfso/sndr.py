"""End-to-end SNDR of the fixed-gain AF link and its high-SNR limits."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Optional

import numpy as np

from .errors import DomainError, NoFiniteCeilingError
from .fading import OpticalConfig, PrsConfig, prs_snr_mean
from .impairments import BussgangTriple, HpaKind, HpaModel, IqImbalance, bussgang_coeffs, iq_coeffs
from .units import db_to_linear


def kappa(bussgang: BussgangTriple, mean_snr_1: float) -> float:
    """Distortion factor ``1 + (sigma_d^2/sigma^2) (1 + mean_snr_1) / delta^2``.

    Follows from the fixed relay gain ``G^2 = sigma^2 / (gamma_1 sigma_0^2 +
    sigma_0^2)``, so the relay output power drops out.
    """
    return 1.0 + bussgang.dist_var_ratio * (1.0 + mean_snr_1) / bussgang.delta ** 2


@dataclass(frozen=True)
class LinkConfig:
    rf: PrsConfig
    optical: OpticalConfig
    hpa: HpaModel = HpaModel(HpaKind.IDEAL)
    iq: Optional[IqImbalance] = None
    ilr_override: Optional[float] = None

    def __post_init__(self):
        if self.ilr_override is not None and not (self.ilr_override >= 0 and math.isfinite(self.ilr_override)):
            raise DomainError(f"ILR must be a finite non-negative number, got {self.ilr_override!r}")

    @cached_property
    def bussgang(self) -> BussgangTriple:
        return bussgang_coeffs(self.hpa)

    @cached_property
    def ilr(self) -> float:
        if self.ilr_override is not None:
            return float(self.ilr_override)
        if self.iq is None:
            return 0.0
        return iq_coeffs(self.iq)[2]

    @cached_property
    def kappa(self) -> float:
        return kappa(self.bussgang, self.rf.mean_snr)

    @cached_property
    def mean_selected_snr(self) -> float:
        return prs_snr_mean(self.rf)

    @classmethod
    def from_average_snr(cls, snr_db, *, n_relays=7, rank=7, rho=0.9, rytov=0.16,
                         alpha=None, beta=None, hpa=None, ilr_db=None, iq=None):
        """Both hops at the same average SNR (dB), optical mu_2 back-derived."""
        g = db_to_linear(snr_db)
        rf = PrsConfig(n_relays, rank, rho, g)
        if alpha is not None and beta is not None:
            optical = OpticalConfig.from_mean_snr(alpha, beta, g)
        else:
            optical = OpticalConfig.from_rytov(rytov, g)
        ilr = None if ilr_db is None else db_to_linear(ilr_db)
        return cls(rf, optical, hpa or HpaModel(HpaKind.IDEAL), iq, ilr)


def e2e_sndr(gamma1, gamma2, cfg: LinkConfig):
    """Instantaneous end-to-end SNDR; accepts scalars or arrays."""
    g1 = np.asarray(gamma1, dtype=float)
    g2 = np.asarray(gamma2, dtype=float)
    ilr = cfg.ilr
    k = cfg.kappa
    num = g1 * g2
    den = ilr * num + (1.0 + ilr) * k * g2 + (1.0 + ilr) * (cfg.mean_selected_snr + k)
    out = num / den
    return float(out) if out.ndim == 0 else out


def _ceiling(den):
    if not den > 0:
        raise NoFiniteCeilingError(f"ceiling denominator {den:.4g} is not positive")
    return 1.0 / den


def sndr_ceiling(cfg: LinkConfig) -> float:
    """High-SNR SNDR limit ``1 / ((1+ILR) clip/delta - 1)``.

    Reads only the impairment parameters. With an ideal amplifier it is
    ``1/ILR``.
    """
    b = cfg.bussgang
    return _ceiling((1.0 + cfg.ilr) * b.clip / b.delta - 1.0)


def sndr_ceiling_delta_sq(cfg: LinkConfig) -> float:
    """Variant ``1 / ((1+ILR) clip/delta^2 - 1)``.

    This is the limit of the SNDR when the selected-relay SNR sits at its
    per-link average; compare against :func:`sndr_ceiling`.
    """
    b = cfg.bussgang
    return _ceiling((1.0 + cfg.ilr) * b.clip / b.delta ** 2 - 1.0)
