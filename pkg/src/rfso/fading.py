"""Fading statistics for the two hops.

RF hop: SNR of the relay ranked ``m``-th (ascending) among ``N`` i.i.d.
Rayleigh links, where the ranking used stale CSI with time correlation
``rho``. Optical hop: Gamma-Gamma irradiance under intensity modulation with
direct detection, so the electrical SNR scales with the squared irradiance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy import integrate, special, stats

from .errors import DomainError
from .specfun import ln_gamma, log_bessel_k


@dataclass(frozen=True)
class PrsConfig:
    """RF hop under partial relay selection with outdated CSI."""

    n_relays: int
    rank: int
    rho: float
    mean_snr: float

    def __post_init__(self):
        if int(self.n_relays) != self.n_relays or self.n_relays < 1:
            raise DomainError(f"n_relays must be a positive integer, got {self.n_relays!r}")
        if int(self.rank) != self.rank or not 1 <= self.rank <= self.n_relays:
            raise DomainError(f"rank must lie in [1, n_relays], got {self.rank!r}")
        if not 0.0 <= self.rho <= 1.0:
            raise DomainError(f"rho must lie in [0, 1], got {self.rho!r}")
        if not (math.isfinite(self.mean_snr) and self.mean_snr > 0):
            raise DomainError(f"mean_snr must be positive, got {self.mean_snr!r}")

    @cached_property
    def _terms(self):
        """Per-term (weight, decay, spread) of the alternating sums.

        ``weight = m C(N,m) (-1)^n C(m-1,n)``, ``decay = N-m+n+1`` and
        ``spread = (N-m+n)(1-rho)+1``; ordered by descending |weight/decay|.
        """
        N, m, rho = self.n_relays, self.rank, self.rho
        lead = m * math.comb(N, m)
        rows = []
        for n in range(m):
            w = lead * math.comb(m - 1, n) * (-1.0) ** n
            k = N - m + n + 1
            d = (N - m + n) * (1.0 - rho) + 1.0
            rows.append((float(w), float(k), d))
        rows.sort(key=lambda r: -abs(r[0] / r[1]))
        return tuple(rows)

    @cached_property
    def cancellation(self) -> float:
        """Largest partial-sum magnitude relative to a unit result."""
        return float(sum(abs(w / k) for w, k, _ in self._terms))

    @property
    def needs_mixture(self) -> bool:
        # beyond this the alternating sums keep fewer than ~7 correct digits
        return self.cancellation > _MAX_CANCELLATION

    def with_mean_snr(self, mean_snr: float) -> "PrsConfig":
        return PrsConfig(self.n_relays, self.rank, self.rho, mean_snr)


_MAX_CANCELLATION = 1e8


def _order_stat_logpdf(y, n_relays, rank):
    """Log-density of the rank-th smallest of ``n_relays`` i.i.d. Exp(1)."""
    lead = (ln_gamma(n_relays + 1.0) - ln_gamma(rank) - ln_gamma(n_relays - rank + 1.0))
    return lead + (rank - 1) * np.log(-np.expm1(-y)) - (n_relays - rank + 1) * y


def _mixture(x, cfg: PrsConfig, kind: str):
    """PDF / CDF / CCDF by integrating over the selection-time order statistic.

    Every integrand is non-negative, so this route is free of the
    cancellation that limits the alternating sums at large ``N``.
    """
    N, m, rho = cfg.n_relays, cfg.rank, cfg.rho
    u = np.asarray(x, dtype=float) / cfg.mean_snr
    if rho >= 1.0:
        z = -np.expm1(-np.maximum(u, 0.0))
        if kind == "pdf":
            return np.where(u >= 0, np.exp(_order_stat_logpdf(np.maximum(u, 1e-300), N, m)), 0.0) / cfg.mean_snr
        return special.betainc(m, N - m + 1, z) if kind == "cdf" else special.betaincc(m, N - m + 1, z)
    v = 1.0 - rho
    fy = lambda y: np.exp(_order_stat_logpdf(y, N, m))

    def one(t):
        if t <= 0.0:
            return {"pdf": 0.0, "cdf": 0.0, "ccdf": 1.0}[kind]
        if kind == "pdf":
            def g(y):
                a = 2.0 * math.sqrt(rho * t * y) / v
                return fy(y) * math.exp(a - (t + rho * y) / v) * special.i0e(a) / v
        else:
            fn = stats.ncx2.cdf if kind == "cdf" else stats.ncx2.sf
            g = lambda y: fy(y) * fn(2.0 * t / v, 2.0, 2.0 * rho * y / v)
        # the order statistic concentrates near log(N / (N - m + 1)); split there
        c = math.log(N / (N - m + 0.5)) + 1.0
        val = integrate.quad(g, 0.0, c, epsabs=1e-15, epsrel=1e-11, limit=200)[0]
        val += integrate.quad(g, c, math.inf, epsabs=1e-15, epsrel=1e-11, limit=200)[0]
        return val

    out = np.vectorize(one, otypes=[float])(u)
    return out / cfg.mean_snr if kind == "pdf" else out


def _compensated_sum(terms):
    """Neumaier summation over a sequence of equally shaped arrays."""
    total = np.zeros_like(terms[0])
    comp = np.zeros_like(terms[0])
    for t in terms:
        s = total + t
        big = np.abs(total) >= np.abs(t)
        comp += np.where(big, (total - s) + t, (t - s) + total)
        total = s
    return total + comp


def _as_array(x):
    arr = np.asarray(x, dtype=float)
    return arr, arr.ndim == 0


def prs_snr_pdf(x, cfg: PrsConfig):
    """PDF of the selected relay's first-hop SNR."""
    arr, scalar = _as_array(x)
    if cfg.needs_mixture:
        out = _mixture(arr, cfg, "pdf")
        return float(out) if scalar else out
    g = cfg.mean_snr
    parts = [w / (d * g) * np.exp(-k * arr / (d * g)) for w, k, d in cfg._terms]
    out = np.where(arr >= 0, _compensated_sum(parts), 0.0)
    return float(out) if scalar else out


def prs_snr_ccdf(x, cfg: PrsConfig):
    """Complementary CDF ``1 - F(x)`` of the selected relay's SNR."""
    arr, scalar = _as_array(x)
    if cfg.needs_mixture:
        out = np.clip(_mixture(arr, cfg, "ccdf"), 0.0, 1.0)
        return float(out) if scalar else out
    g = cfg.mean_snr
    parts = [w / k * np.exp(-k * np.maximum(arr, 0.0) / (d * g)) for w, k, d in cfg._terms]
    out = np.clip(_compensated_sum(parts), 0.0, 1.0)
    return float(out) if scalar else out


def prs_snr_cdf(x, cfg: PrsConfig):
    """CDF of the selected relay's first-hop SNR."""
    arr, scalar = _as_array(x)
    if cfg.needs_mixture:
        out = np.clip(_mixture(arr, cfg, "cdf"), 0.0, 1.0)
        return float(out) if scalar else out
    g = cfg.mean_snr
    parts = [np.ones_like(arr)]
    parts += [-w / k * np.exp(-k * np.maximum(arr, 0.0) / (d * g)) for w, k, d in cfg._terms]
    out = np.clip(_compensated_sum(parts), 0.0, 1.0)
    return float(out) if scalar else out


def prs_snr_mean(cfg: PrsConfig) -> float:
    """Mean SNR of the selected relay.

    The rank-``m`` of ``N`` unit exponentials has mean ``sum_{j<m} 1/(N-j)``;
    outdating mixes it with the unselected mean 1.
    """
    order_mean = math.fsum(1.0 / (cfg.n_relays - j) for j in range(cfg.rank))
    return cfg.mean_snr * (cfg.rho * order_mean + 1.0 - cfg.rho)


def sample_prs_snr_normalized(n_relays, rank, rho, rng, size):
    """Selected-relay SNR divided by the per-link mean SNR.

    Selection-time powers ``|h~_l|^2`` of unit complex Gaussians are i.i.d.
    Exp(1); the rank-``m`` one is picked. Transmission-time amplitude is
    ``sqrt(rho) h~ + sqrt(1-rho) w``; ``w`` is circularly symmetric, so the
    phase of ``h~`` can be rotated to zero without changing ``|h|``.
    """
    sel = rng.standard_exponential(size=(size, n_relays))
    sel = np.partition(sel, rank - 1, axis=1)[:, rank - 1]
    w = rng.standard_normal(size=(2, size)) * math.sqrt(0.5)
    re = math.sqrt(rho) * np.sqrt(sel) + math.sqrt(1.0 - rho) * w[0]
    im = math.sqrt(1.0 - rho) * w[1]
    return re * re + im * im


def sample_prs_snr(cfg: PrsConfig, rng: np.random.Generator, size=None):
    """Draw first-hop SNR(s) of the selected relay."""
    n = 1 if size is None else int(size)
    out = cfg.mean_snr * sample_prs_snr_normalized(cfg.n_relays, cfg.rank, cfg.rho, rng, n)
    return float(out[0]) if size is None else out


# --------------------------------------------------------------------------
# Gamma-Gamma optical hop
# --------------------------------------------------------------------------

def rytov_to_alphabeta(sigma_r2: float) -> tuple[float, float]:
    """Gamma-Gamma ``(alpha, beta)`` for plane-wave Rytov variance ``sigma_r2``."""
    s = float(sigma_r2)
    if not (math.isfinite(s) and s > 0):
        raise DomainError(f"Rytov variance must be positive, got {sigma_r2!r}")
    s125 = s ** 1.2
    alpha = 1.0 / math.expm1(0.49 * s / (1.0 + 1.11 * s125) ** (7.0 / 6.0))
    beta = 1.0 / math.expm1(0.51 * s / (1.0 + 0.69 * s125) ** (5.0 / 6.0))
    return alpha, beta


def scintillation_index(alpha: float, beta: float) -> float:
    return 1.0 / alpha + 1.0 / beta + 1.0 / (alpha * beta)


@dataclass(frozen=True)
class OpticalConfig:
    """Optical hop: Gamma-Gamma ``(alpha, beta)`` and average electrical SNR.

    Irradiance is normalized to unit mean, so ``mean_electrical_snr`` is
    ``mu_2`` and the average SNR is ``mu_2 * E[I^2]``.
    """

    alpha: float
    beta: float
    mean_electrical_snr: float

    def __post_init__(self):
        for name in ("alpha", "beta", "mean_electrical_snr"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise DomainError(f"{name} must be positive, got {v!r}")

    @property
    def scintillation_index(self) -> float:
        return scintillation_index(self.alpha, self.beta)

    @property
    def mean_snr(self) -> float:
        return self.mean_electrical_snr * (self.scintillation_index + 1.0)

    @classmethod
    def from_mean_snr(cls, alpha, beta, mean_snr):
        return cls(alpha, beta, mean_snr / (scintillation_index(alpha, beta) + 1.0))

    @classmethod
    def from_rytov(cls, sigma_r2, mean_snr):
        alpha, beta = rytov_to_alphabeta(sigma_r2)
        return cls.from_mean_snr(alpha, beta, mean_snr)


def gg_snr_logpdf(x: float, cfg: OpticalConfig) -> float:
    a, b, mu = cfg.alpha, cfg.beta, cfg.mean_electrical_snr
    if x <= 0:
        return -math.inf
    s = 0.5 * (a + b)
    arg = 2.0 * math.sqrt(a * b * math.sqrt(x / mu))
    return (s * math.log(a * b) + (0.5 * s - 1.0) * math.log(x)
            - ln_gamma(a) - ln_gamma(b) - 0.5 * s * math.log(mu)
            + log_bessel_k(a - b, arg))


def gg_snr_pdf(x, cfg: OpticalConfig):
    """PDF of the optical-hop SNR ``mu_2 I^2`` with Gamma-Gamma ``I``."""
    arr = np.asarray(x, dtype=float)
    if arr.ndim == 0:
        return math.exp(gg_snr_logpdf(float(arr), cfg))
    return np.array([math.exp(gg_snr_logpdf(v, cfg)) for v in arr.ravel()]).reshape(arr.shape)


def sample_irradiance_sq(alpha, beta, rng, size):
    """``I^2`` with ``I = I_X I_Y`` and unit-mean Gamma factors."""
    ix = rng.gamma(alpha, 1.0 / alpha, size)
    iy = rng.gamma(beta, 1.0 / beta, size)
    i = ix * iy
    return i * i


def sample_gg_snr(cfg: OpticalConfig, rng: np.random.Generator, size=None):
    """Draw optical-hop SNR(s) ``mu_2 I^2``."""
    n = 1 if size is None else int(size)
    out = cfg.mean_electrical_snr * sample_irradiance_sq(cfg.alpha, cfg.beta, rng, n)
    return float(out[0]) if size is None else out
