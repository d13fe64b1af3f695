"""Monte Carlo estimates of outage, BER and capacity by direct SNDR sampling.

Work is split into a fixed number of chunks. Chunk ``i`` owns a Philox
stream keyed by ``(seed, i)`` and draws in fixed-size blocks, so the result
depends only on ``(seed, n_chunks, n_samples)`` and never on how many
workers execute the chunks. Per-chunk moments are merged in chunk order.

Both fading variables scale linearly with their average SNR, so one set of
normalized draws serves every configuration that shares the fading shape
``(N, m, rho, alpha, beta)``; :func:`simulate_many` exploits this for sweeps.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from statistics import NormalDist
from typing import Callable, Sequence

import numpy as np
from scipy.special import gammaincc

from .analytic import BPSK, ModulationSpec
from .fading import sample_irradiance_sq, sample_prs_snr_normalized
from .sndr import LinkConfig, e2e_sndr

_BLOCK = 1 << 20
WORKERS_ENV = "RFSO_WORKERS"


@dataclass(frozen=True)
class SimSpec:
    n_samples: int = 10 ** 7
    seed: int = 0
    n_chunks: int = 16
    confidence: float = 0.95

    def __post_init__(self):
        if int(self.n_samples) != self.n_samples or self.n_samples < 1000:
            raise ValueError(f"n_samples must be an integer >= 1000, got {self.n_samples!r}")
        if int(self.n_chunks) != self.n_chunks or self.n_chunks < 1:
            raise ValueError(f"n_chunks must be a positive integer, got {self.n_chunks!r}")
        if self.n_chunks > self.n_samples:
            raise ValueError("n_chunks cannot exceed n_samples")
        if not 0 <= int(self.seed) < 2 ** 64 or int(self.seed) != self.seed:
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {self.seed!r}")
        if not 0.0 < self.confidence < 1.0:
            raise ValueError(f"confidence must lie in (0, 1), got {self.confidence!r}")

    def chunk_sizes(self) -> list[int]:
        base, extra = divmod(int(self.n_samples), int(self.n_chunks))
        return [base + (1 if i < extra else 0) for i in range(int(self.n_chunks))]


@dataclass(frozen=True)
class SimResult:
    op_est: float
    ber_est: float
    ec_est: float
    op_ci: float
    ber_ci: float
    ec_ci: float
    n_effective: int


class _Moments:
    """Count, mean and centred second moment; merged with Chan's update."""

    __slots__ = ("n", "mean", "m2")

    def __init__(self):
        self.n = 0
        self.mean = 0.0
        self.m2 = 0.0

    def add_block(self, x: np.ndarray):
        nb = x.size
        if nb == 0:
            return
        mb = float(np.mean(x))
        m2b = float(np.sum((x - mb) ** 2))
        self.merge_raw(nb, mb, m2b)

    def merge_raw(self, nb, mb, m2b):
        n = self.n + nb
        d = mb - self.mean
        self.mean += d * nb / n
        self.m2 += m2b + d * d * self.n * nb / n
        self.n = n

    def merge(self, other: "_Moments"):
        if other.n:
            self.merge_raw(other.n, other.mean, other.m2)

    def halfwidth(self, z: float) -> float:
        if self.n < 2:
            return math.inf
        return z * math.sqrt(self.m2 / (self.n - 1) / self.n)


def default_workers() -> int:
    env = os.environ.get(WORKERS_ENV)
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def chunk_rng(seed: int, chunk: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), int(chunk)])))


def _shape_key(cfg: LinkConfig):
    rf, opt = cfg.rf, cfg.optical
    return (rf.n_relays, rf.rank, rf.rho, opt.alpha, opt.beta)


def _run_chunk(chunk, size, seed, groups, gamma_th, mod):
    rng = chunk_rng(seed, chunk)
    acc = {i: (_Moments(), _Moments(), _Moments()) for members in groups.values() for i, _ in members}
    done = 0
    while done < size:
        nb = min(_BLOCK, size - done)
        for (n_relays, rank, rho, alpha, beta), members in groups.items():
            x = sample_prs_snr_normalized(n_relays, rank, rho, rng, nb)
            i2 = sample_irradiance_sq(alpha, beta, rng, nb)
            for idx, cfg in members:
                s = e2e_sndr(cfg.rf.mean_snr * x, cfg.optical.mean_electrical_snr * i2, cfg)
                op_acc, ber_acc, ec_acc = acc[idx]
                op_acc.add_block((s < gamma_th).astype(float))
                ber_acc.add_block(0.5 * gammaincc(mod.p, mod.q * s))
                ec_acc.add_block(0.5 * np.log2(np.add(1.0, s)))
        done += nb
    return acc


def simulate_many(cfgs: Sequence[LinkConfig], gamma_th: float, mod: ModulationSpec = BPSK,
                  spec: SimSpec = SimSpec(), workers: int | None = None) -> list[SimResult]:
    """Estimate OP, BER and EC for several configurations with shared draws.

    Configurations with the same fading shape reuse the same normalized
    samples, so a sweep over SNR costs one set of draws.
    """
    if not gamma_th > 0:
        raise ValueError(f"gamma_th must be positive, got {gamma_th!r}")
    groups: dict = {}
    for i, cfg in enumerate(cfgs):
        groups.setdefault(_shape_key(cfg), []).append((i, cfg))
    sizes = spec.chunk_sizes()
    workers = default_workers() if workers is None else max(1, int(workers))

    def job(c):
        return _run_chunk(c, sizes[c], spec.seed, groups, gamma_th, mod)

    if workers == 1:
        parts = [job(c) for c in range(len(sizes))]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(job, range(len(sizes))))

    z = NormalDist().inv_cdf(0.5 + 0.5 * spec.confidence)
    out = []
    for i in range(len(cfgs)):
        total = (_Moments(), _Moments(), _Moments())
        for part in parts:
            for t, p in zip(total, part[i]):
                t.merge(p)
        op_m, ber_m, ec_m = total
        out.append(SimResult(
            op_est=min(max(op_m.mean, 0.0), 1.0),
            ber_est=min(max(ber_m.mean, 0.0), 0.5),
            ec_est=max(ec_m.mean, 0.0),
            op_ci=op_m.halfwidth(z), ber_ci=ber_m.halfwidth(z), ec_ci=ec_m.halfwidth(z),
            n_effective=op_m.n))
    return out


def simulate(cfg: LinkConfig, gamma_th: float, mod: ModulationSpec = BPSK,
             spec: SimSpec = SimSpec(), workers: int | None = None) -> SimResult:
    """Monte Carlo OP, BER and EC for one configuration."""
    return simulate_many([cfg], gamma_th, mod, spec, workers)[0]


def ks_distance(samples, cdf: Callable) -> float:
    """Sup-norm distance between the empirical CDF of ``samples`` and ``cdf``."""
    x = np.sort(np.asarray(samples, dtype=float).ravel())
    n = x.size
    if n < 100:
        raise ValueError(f"need at least 100 samples, got {n}")
    try:
        f = np.asarray(cdf(x), dtype=float)
        if f.shape != x.shape:
            raise TypeError
    except (TypeError, ValueError):
        f = np.array([cdf(float(v)) for v in x])
    hi = np.arange(1, n + 1) / n
    lo = np.arange(0, n) / n
    return float(max(np.max(hi - f), np.max(f - lo)))
