"""Closed-form and quadrature link metrics.

The outage probability is a finite alternating sum over the order-statistic
terms, each multiplied by ``E[exp(-s / gamma_2)]`` for the Gamma-Gamma hop,
which is a ``G^{5,0}_{0,5}`` Meijer function. BER and ergodic capacity
integrate that CDF numerically; the capacity upper bound uses a
``G^{5,1}_{1,5}`` closed form.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass

from scipy import integrate

from .errors import ConsistencyError, ConvergenceError, QuadratureError
from .fading import prs_snr_pdf
from .sndr import LinkConfig, sndr_ceiling
from .specfun import MeijerParams, gamma_upper_reg, ln_gamma, meijer_eval

_LN2 = math.log(2.0)


@dataclass(frozen=True)
class ModulationSpec:
    """Conditional BER family ``Gamma(p, q*gamma) / (2 Gamma(p))``."""

    p: float
    q: float
    name: str = ""

    def __post_init__(self):
        if not (self.p > 0 and self.q > 0):
            raise ValueError(f"modulation needs p, q > 0, got p={self.p!r} q={self.q!r}")


BPSK = ModulationSpec(0.5, 1.0, "BPSK")


class Method(str, enum.Enum):
    CLOSED_FORM = "closed_form"
    QUADRATURE = "quadrature"
    SERIES = "series"


@dataclass(frozen=True)
class MetricResult:
    value: float
    method: Method
    est_abs_error: float = 0.0
    clamped: bool = False

    def __float__(self):
        return float(self.value)


# --------------------------------------------------------------------------
# Gamma-Gamma building blocks
# --------------------------------------------------------------------------

def gg_laplace_inverse(s: float, alpha: float, beta: float, mu: float) -> tuple[float, float]:
    """``E[exp(-s / gamma_2)]`` with ``gamma_2 = mu I^2``; returns (value, abs error)."""
    if s <= 0.0:
        return 1.0, 0.0
    z = s * (alpha * beta) ** 2 / (16.0 * mu)
    res = meijer_eval(MeijerParams(5, 0, (), (0.5 * alpha, 0.5 * (alpha + 1.0),
                                               0.5 * beta, 0.5 * (beta + 1.0), 0.0), z))
    logpref = (alpha + beta - 2.0) * _LN2 - math.log(math.pi) - ln_gamma(alpha) - ln_gamma(beta)
    val = float(math.exp(logpref) * res.value)
    # an underflowed value is exact to within the smallest subnormal
    return val, (abs(val) * float(res.est_rel_err) if val != 0.0 else 0.0)


def gg_ratio_mean(b: float, alpha: float, beta: float, mu: float) -> tuple[float, float]:
    """``E[gamma_2 / (gamma_2 + b)]`` via ``G^{5,1}_{1,5}``; returns (value, abs error)."""
    s = 0.25 * (alpha + beta)
    z = (alpha * beta) ** 2 * b / (16.0 * mu)
    res = meijer_eval(MeijerParams(
        5, 1, (-s,),
        (0.25 * (alpha - beta), 0.25 * (alpha - beta + 2.0),
         0.25 * (beta - alpha), 0.25 * (beta - alpha + 2.0), -s), z))
    logpref = (2.0 * s * math.log(alpha * beta) + s * math.log(b) - math.log(4.0 * math.pi)
               - ln_gamma(alpha) - ln_gamma(beta) - s * math.log(mu))
    val = float(math.exp(logpref) * res.value)
    # an underflowed value is exact to within the smallest subnormal
    return val, (abs(val) * float(res.est_rel_err) if val != 0.0 else 0.0)


# --------------------------------------------------------------------------
# outage
# --------------------------------------------------------------------------

def _outage_terms(gamma_th: float, cfg: LinkConfig):
    """Signed terms ``w_n/k_n * exp(-x_n) * T_n`` whose sum is ``1 - F``."""
    ilr = cfg.ilr
    k = cfg.kappa
    mean1 = cfg.mean_selected_snr
    g1 = cfg.rf.mean_snr
    opt = cfg.optical
    amp = gamma_th * (1.0 + ilr) / (1.0 - ilr * gamma_th)
    terms = []
    err = 0.0
    for idx, (w, kk, d) in enumerate(cfg.rf._terms):
        c = kk / (d * g1)
        s = c * amp * (mean1 + k)
        try:
            t, t_err = gg_laplace_inverse(s, opt.alpha, opt.beta, opt.mean_electrical_snr)
        except ConvergenceError as exc:
            raise ConvergenceError(f"outage term n={int(kk) - cfg.rf.n_relays + cfg.rf.rank - 1}, "
                                   f"s={s:.6g}: {exc}", exc.partial_sum, exc.last_term) from exc
        scale = w / kk * math.exp(-c * amp * k)
        terms.append(scale * t)
        err += abs(scale) * t_err
    return terms, err


def sndr_cdf(gamma: float, cfg: LinkConfig) -> tuple[float, float]:
    """``(F(gamma), abs error)`` of the end-to-end SNDR."""
    if gamma <= 0.0:
        return 0.0, 0.0
    if cfg.ilr * gamma >= 1.0:
        return 1.0, 0.0
    terms, err = _outage_terms(gamma, cfg)
    return math.fsum([1.0] + [-t for t in terms]), err + 4e-16 * math.fsum(abs(t) for t in terms)


def _ccdf_with_error(gamma: float, cfg: LinkConfig) -> tuple[float, float]:
    if gamma <= 0.0:
        return 1.0, 0.0
    if cfg.ilr * gamma >= 1.0:
        return 0.0, 0.0
    terms, err = _outage_terms(gamma, cfg)
    err += 4e-16 * math.fsum(abs(t) for t in terms)
    return min(1.0, max(0.0, math.fsum(terms))), err


def sndr_ccdf(gamma: float, cfg: LinkConfig) -> float:
    """``1 - F(gamma)`` summed directly, keeping relative accuracy in the tail."""
    return _ccdf_with_error(gamma, cfg)[0]


def _clamp_probability(value, err):
    clamped = False
    if value < 0.0:
        if value < -max(1e-12, 10 * err):
            raise ConsistencyError(f"probability {value:.3e} is negative beyond roundoff")
        value, clamped = 0.0, True
    elif value > 1.0:
        if value > 1.0 + max(1e-12, 10 * err):
            raise ConsistencyError(f"probability {value:.6f} exceeds one beyond roundoff")
        value, clamped = 1.0, True
    return value, clamped


def outage_probability(gamma_th: float, cfg: LinkConfig) -> MetricResult:
    """Probability that the end-to-end SNDR falls below ``gamma_th``."""
    if not gamma_th > 0:
        raise ValueError(f"gamma_th must be positive, got {gamma_th!r}")
    if cfg.ilr * gamma_th >= 1.0:
        return MetricResult(1.0, Method.CLOSED_FORM)
    value, err = sndr_cdf(gamma_th, cfg)
    value, clamped = _clamp_probability(value, err)
    return MetricResult(value, Method.CLOSED_FORM, err, clamped)


def diversity_gain(alpha: float, beta: float) -> float:
    """Asymptotic outage slope for ideal hardware."""
    if not (alpha > 0 and beta > 0):
        raise ValueError("alpha and beta must be positive")
    return min(1.0, 0.5 * alpha, 0.5 * beta)


# --------------------------------------------------------------------------
# BER and capacity by quadrature
# --------------------------------------------------------------------------

def _quad(f, a, b, epsabs, epsrel, what):
    with warnings.catch_warnings():
        # roundoff warnings are judged below from the returned error estimate
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        val, abserr = integrate.quad(f, a, b, epsabs=epsabs, epsrel=epsrel, limit=400)
    if not math.isfinite(val) or abserr > 1e3 * max(epsabs, epsrel * abs(val)):
        raise QuadratureError(f"{what}: quadrature did not converge (err={abserr:.2e})",
                              partial=val, abserr=abserr)
    return val, abserr


def avg_ber(mod: ModulationSpec, cfg: LinkConfig) -> MetricResult:
    """Average BER, integrating the SNDR CDF against the modulation kernel."""
    p, q = mod.p, mod.q
    ilr = cfg.ilr
    g_max = 1.0 / ilr if ilr > 0 else math.inf
    g_cut = 1.0
    while gamma_upper_reg(p, q * g_cut) > 1e-17:
        g_cut *= 2.0
    upper = min(g_max, g_cut)
    tail_q = 0.5 * gamma_upper_reg(p, q * upper)
    if upper == g_max:
        tail, tail_err = tail_q, 0.0
    else:
        f_up = sndr_cdf(upper, cfg)[0]
        tail, tail_err = tail_q * f_up, tail_q * (1.0 - f_up)

    cdf_err = [0.0]

    # gamma = t^(1/p) removes the gamma^(p-1) endpoint singularity
    def integrand(t):
        g = t ** (1.0 / p)
        f, f_err = sndr_cdf(g, cfg)
        cdf_err[0] = max(cdf_err[0], f_err)
        return math.exp(-q * g) * f

    head, head_err = _quad(integrand, 0.0, upper ** p, 1e-11, 1e-10, "BER")
    pref = math.exp(p * math.log(q) - ln_gamma(p + 1.0)) * 0.5
    value = pref * head + tail
    # the kernel has unit mass, so CDF errors enter at most with weight 1/2
    err = pref * head_err + tail_err + 0.5 * cdf_err[0]
    value = min(max(value, 0.0), 0.5)
    return MetricResult(value, Method.QUADRATURE, err)


def ergodic_capacity(cfg: LinkConfig) -> MetricResult:
    """Ergodic capacity in bit/s/Hz: ``(1/2ln2) int (1-F(x))/(1+x) dx``."""
    ilr = cfg.ilr
    tail_err = 0.0
    if ilr > 0:
        u_max = math.log1p(1.0 / ilr)
    else:
        # P(SNDR > x) <= M / x with M = E[gamma_1] / kappa bounds the truncated tail
        m_bound = cfg.mean_selected_snr / cfg.kappa
        u_max = math.log1p(m_bound / 1e-11)
        tail_err = -m_bound * math.log1p(-math.exp(-u_max)) / (2.0 * _LN2)

    ccdf_err = [0.0]

    def integrand(u):
        v, v_err = _ccdf_with_error(math.expm1(u), cfg)
        ccdf_err[0] = max(ccdf_err[0], v_err)
        return v

    val, err = _quad(integrand, 0.0, u_max, 1e-9, 1e-9, "ergodic capacity")
    value = max(val, 0.0) / (2.0 * _LN2)
    err += min(u_max, 60.0) * ccdf_err[0]  # CDF noise over the finite support
    return MetricResult(value, Method.QUADRATURE, err / (2.0 * _LN2) + tail_err)


def capacity_ceiling(cfg: LinkConfig) -> float:
    """Saturated capacity ``0.5 log2(1 + gamma*)`` at infinite SNR."""
    return 0.5 * math.log2(1.0 + sndr_ceiling(cfg))


def j_expectation(cfg: LinkConfig) -> tuple[float, float]:
    """``E[gamma_1 gamma_2 / tau]`` with ``tau`` the non-ILR part of the SNDR denominator.

    Returns (value, abs error).
    """
    ilr = cfg.ilr
    k = cfg.kappa
    mean1 = cfg.mean_selected_snr
    opt = cfg.optical
    frac, frac_err = gg_ratio_mean((mean1 + k) / k, opt.alpha, opt.beta, opt.mean_electrical_snr)
    scale = mean1 / ((1.0 + ilr) * k)
    j = scale * frac
    if j < 0:
        raise ConsistencyError(f"negative J = {j:.3e}")
    return j, scale * frac_err


def capacity_upper_bound(cfg: LinkConfig) -> float:
    """Jensen upper bound ``0.5 log2(1 + J / (ILR J + 1))``."""
    j, _ = j_expectation(cfg)
    return 0.5 * math.log2(1.0 + j / (cfg.ilr * j + 1.0))


def capacity_approx(cfg: LinkConfig) -> float:
    """Moment approximation ``0.5 log2(1 + E[num] / E[den])`` of the SNDR."""
    ilr = cfg.ilr
    k = cfg.kappa
    mean1 = cfg.mean_selected_snr
    mean2 = cfg.optical.mean_snr
    num = mean1 * mean2
    den = ilr * num + (1.0 + ilr) * k * mean2 + (1.0 + ilr) * (mean1 + k)
    return 0.5 * math.log2(1.0 + num / den)


def capacity_limit(cfg: LinkConfig) -> MetricResult:
    """Exact infinite-SNR capacity when both average SNRs grow together.

    The distortion factor grows with the RF average SNR, so the SNDR does not
    settle on a constant: it tends to ``1 / (ILR + (1+ILR) r / (delta^2 X))``
    with ``r = sigma_d^2/sigma^2`` and ``X`` the selected-relay gain
    normalized by its per-link average. This averages that limit over ``X``.
    """
    b = cfg.bussgang
    ilr = cfg.ilr
    shape = cfg.rf.with_mean_snr(1.0)
    c = (1.0 + ilr) * b.dist_var_ratio / b.delta ** 2
    if c == 0.0:
        if ilr == 0.0:
            return MetricResult(math.inf, Method.QUADRATURE)
        return MetricResult(0.5 * math.log2(1.0 + 1.0 / ilr), Method.QUADRATURE)

    def integrand(x):
        return prs_snr_pdf(x, shape) * math.log1p(x / (ilr * x + c))

    val, err = _quad(integrand, 0.0, math.inf, 1e-12, 1e-10, "capacity limit")
    return MetricResult(val / (2.0 * _LN2), Method.QUADRATURE, err / (2.0 * _LN2))
