import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import integrate, stats

from rfso.errors import DomainError
from rfso.fading import (OpticalConfig, PrsConfig, gg_snr_pdf, prs_snr_ccdf, prs_snr_cdf,
                         prs_snr_mean, prs_snr_pdf, rytov_to_alphabeta, sample_gg_snr,
                         sample_irradiance_sq, sample_prs_snr, scintillation_index)
from rfso.mcsim import ks_distance

from conftest import ALPHA_T1, BETA_T1

TABLE1 = PrsConfig(7, 7, 0.9, 10.0)
GRID = [(n, m, rho) for n in (1, 3, 7) for m in sorted({1, math.ceil(n / 2), n})
        for rho in (0.0, 0.5, 0.9, 1.0)]


def quad_inf(f, a=0.0, b=math.inf):
    val, _ = integrate.quad(f, a, b, epsabs=1e-13, epsrel=1e-12, limit=400)
    return val


# ---------------------------------------------------------------- PRS analytic

def test_single_relay_is_exponential():
    cfg = PrsConfig(1, 1, 0.3, 4.0)
    x = np.linspace(0, 30, 50)
    assert np.allclose(prs_snr_pdf(x, cfg), np.exp(-x / 4.0) / 4.0, rtol=1e-14, atol=0)


@pytest.mark.parametrize("n,m,rho", GRID)
def test_pdf_normalized_and_cdf_consistent(n, m, rho):
    cfg = PrsConfig(n, m, rho, 10.0)
    assert abs(quad_inf(lambda x: prs_snr_pdf(x, cfg)) - 1.0) < 1e-8
    for x in (0.5, 10.0, 40.0):
        assert abs(quad_inf(lambda t: prs_snr_pdf(t, cfg), 0.0, x) - prs_snr_cdf(x, cfg)) < 1e-8
    xs = np.linspace(0, 200, 400)
    assert np.all(np.diff(prs_snr_cdf(xs, cfg)) >= -1e-15)


def test_cdf_endpoints():
    assert prs_snr_cdf(0.0, TABLE1) == 0.0
    assert prs_snr_cdf(1e4, TABLE1) == 1.0
    assert abs(prs_snr_cdf(5.0, TABLE1) + prs_snr_ccdf(5.0, TABLE1) - 1.0) < 1e-15


def test_cdf_at_mean_equals_integrated_pdf():
    ref = quad_inf(lambda t: prs_snr_pdf(t, TABLE1), 0.0, 10.0)
    assert abs(prs_snr_cdf(10.0, TABLE1) - ref) < 1e-8


def test_full_correlation_matches_order_statistic_density():
    # rho = 1: m-th smallest of N iid Exp(mean g); Beta-transform density
    n, m, g = 7, 7, 3.0
    cfg = PrsConfig(n, m, 1.0, g)
    x = np.linspace(0.01, 40, 60)
    u = 1 - np.exp(-x / g)
    ref = stats.beta(m, n - m + 1).pdf(u) * np.exp(-x / g) / g
    assert np.allclose(prs_snr_pdf(x, cfg), ref, rtol=1e-10)


@pytest.mark.parametrize("n,m,rho", GRID)
def test_mean_matches_quadrature(n, m, rho):
    cfg = PrsConfig(n, m, rho, 2.5)
    assert prs_snr_mean(cfg) == pytest.approx(quad_inf(lambda x: x * prs_snr_pdf(x, cfg)), rel=1e-9)


def test_mean_single_relay():
    assert prs_snr_mean(PrsConfig(1, 1, 0.5, 7.0)) == pytest.approx(7.0, rel=1e-15)


def test_mean_against_monte_carlo(rng):
    x = sample_prs_snr(TABLE1, rng, 10 ** 7)
    assert abs(x.mean() / prs_snr_mean(TABLE1) - 1) < 2e-3


def test_uncorrelated_selection_is_irrelevant():
    for m in (1, 4, 7):
        cfg = PrsConfig(7, m, 0.0, 3.0)
        assert prs_snr_mean(cfg) == pytest.approx(3.0, rel=1e-12)
        x = np.linspace(0, 20, 30)
        assert np.allclose(prs_snr_cdf(x, cfg), 1 - np.exp(-x / 3.0), atol=1e-13)


def test_large_n_alternating_sum_stays_accurate():
    # N = 64 best relay: alternating weights reach ~1e19 before cancelling
    cfg = PrsConfig(64, 64, 0.9, 1.0)
    assert cfg.needs_mixture
    nodes, weights = np.polynomial.legendre.leggauss(200)
    x = 15.0 * (nodes + 1.0)
    assert abs(15.0 * np.dot(weights, prs_snr_pdf(x, cfg)) - 1.0) < 1e-8
    assert prs_snr_cdf(0.0, cfg) == 0.0
    assert prs_snr_cdf(30.0, cfg) == pytest.approx(1.0, abs=1e-10)
    assert prs_snr_mean(cfg) == pytest.approx(15.0 * np.dot(weights, x * prs_snr_pdf(x, cfg)), rel=1e-8)


@pytest.mark.parametrize("kw", [dict(n_relays=0, rank=1), dict(n_relays=3, rank=4),
                                dict(n_relays=3, rank=1, rho=1.2), dict(n_relays=3, rank=1, mean_snr=0)])
def test_prs_config_validation(kw):
    args = dict(n_relays=3, rank=1, rho=0.5, mean_snr=1.0)
    args.update(kw)
    with pytest.raises(DomainError):
        PrsConfig(**args)


# ---------------------------------------------------------------- PRS sampler

def test_sampler_single_relay_full_correlation_is_exponential(rng):
    x = sample_prs_snr(PrsConfig(1, 1, 1.0, 2.0), rng, 10 ** 6)
    assert ks_distance(x, lambda v: 1 - np.exp(-v / 2.0)) < 0.002


@pytest.mark.parametrize("n,m,rho", GRID)
def test_sampler_matches_cdf(n, m, rho, rng):
    cfg = PrsConfig(n, m, rho, 10.0)
    x = sample_prs_snr(cfg, rng, 10 ** 6)
    assert ks_distance(x, lambda v: prs_snr_cdf(v, cfg)) < 0.01


def test_sampler_fully_outdated_is_exponential(rng):
    x = sample_prs_snr(PrsConfig(5, 2, 0.0, 3.0), rng, 10 ** 6)
    assert ks_distance(x, lambda v: 1 - np.exp(-v / 3.0)) < 0.01


def test_sampler_scalar_draw(rng):
    assert isinstance(sample_prs_snr(TABLE1, rng), float)


# ---------------------------------------------------------------- Gamma-Gamma

def test_rytov_table1():
    a, b = rytov_to_alphabeta(0.16)
    assert a == pytest.approx(ALPHA_T1, rel=1e-13)
    assert b == pytest.approx(BETA_T1, rel=1e-13)


def test_rytov_unit_against_high_precision():
    a, b = rytov_to_alphabeta(1.0)
    assert a == pytest.approx(4.39385902539214678695164777038279, rel=1e-13)
    assert b == pytest.approx(2.56363197950369495058137867075847, rel=1e-13)


@given(st.floats(1e-4, 50))
def test_rytov_alpha_exceeds_beta(s):
    a, b = rytov_to_alphabeta(s)
    assert a > b > 0


def test_rytov_weak_turbulence_limit():
    a, b = rytov_to_alphabeta(1e-8)
    assert a > 1e7 and b > 1e7


@pytest.mark.parametrize("s", [0.0, -1.0, math.nan])
def test_rytov_domain(s):
    with pytest.raises(DomainError):
        rytov_to_alphabeta(s)


def test_optical_mean_snr_relation():
    cfg = OpticalConfig.from_mean_snr(ALPHA_T1, BETA_T1, 10.0)
    assert cfg.mean_snr == pytest.approx(10.0, rel=1e-15)
    si = 1 / ALPHA_T1 + 1 / BETA_T1 + 1 / (ALPHA_T1 * BETA_T1)
    assert cfg.mean_electrical_snr * (si + 1) == pytest.approx(10.0, rel=1e-15)


@pytest.mark.parametrize("a,b", [(ALPHA_T1, BETA_T1), (4.39, 2.56), (2.5, 1.0)])
def test_gg_pdf_normalized_and_mean(a, b):
    cfg = OpticalConfig.from_mean_snr(a, b, 10.0)
    # integrate in log-space; the density has a heavy right tail for small beta
    f = lambda u: gg_snr_pdf(math.exp(u), cfg) * math.exp(u)
    norm = quad_inf(f, -60, 30)
    mean = quad_inf(lambda u: f(u) * math.exp(u), -60, 30)
    assert abs(norm - 1.0) < 1e-8
    assert mean == pytest.approx(cfg.mean_snr, rel=1e-6)


def test_gg_pdf_matches_mpmath():
    cfg = OpticalConfig.from_mean_snr(ALPHA_T1, BETA_T1, 10.0)
    a, b, mu = map(mp.mpf, (cfg.alpha, cfg.beta, cfg.mean_electrical_snr))
    for x in (0.1, 3.0, 10.0, 50.0):
        ref = ((a * b) ** ((a + b) / 2) * mp.mpf(x) ** ((a + b) / 4 - 1)
               / (mp.gamma(a) * mp.gamma(b) * mu ** ((a + b) / 4))
               * mp.besselk(a - b, 2 * mp.sqrt(a * b * mp.sqrt(x / mu))))
        assert gg_snr_pdf(x, cfg) == pytest.approx(float(ref), rel=1e-10)


@given(st.floats(1e-6, 1e4))
def test_gg_pdf_positive(x):
    assert gg_snr_pdf(x, OpticalConfig.from_mean_snr(ALPHA_T1, BETA_T1, 10.0)) > 0


def test_gg_sampler_mean(rng):
    cfg = OpticalConfig.from_mean_snr(ALPHA_T1, BETA_T1, 10.0)
    x = sample_gg_snr(cfg, rng, 10 ** 7)
    assert abs(x.mean() / 10.0 - 1) < 5e-3


@pytest.mark.parametrize("a,b", [(ALPHA_T1, BETA_T1), (2.5, 1.0)])
def test_gg_sampler_matches_pdf(a, b, rng):
    cfg = OpticalConfig.from_mean_snr(a, b, 10.0)
    x = sample_gg_snr(cfg, rng, 10 ** 6)
    grid = np.quantile(x, np.linspace(0.0005, 0.9995, 400))
    cdf_grid = np.array([quad_inf(lambda t: gg_snr_pdf(t, cfg), 0.0, g) for g in grid])
    # KS distance evaluated on a quantile grid with interpolated analytic CDF
    emp = np.searchsorted(np.sort(x), grid, side="right") / x.size
    assert np.max(np.abs(emp - cdf_grid)) < 0.01


def test_gg_scintillation_index(rng):
    i2 = sample_irradiance_sq(ALPHA_T1, BETA_T1, rng, 10 ** 7)
    i = np.sqrt(i2)
    assert i.var() / i.mean() ** 2 == pytest.approx(scintillation_index(ALPHA_T1, BETA_T1), rel=0.01)


def test_gg_vanishing_turbulence(rng):
    cfg = OpticalConfig.from_mean_snr(1e4, 1e4, 5.0)
    x = sample_gg_snr(cfg, rng, 10 ** 5)
    assert x.std() / x.mean() < 0.03
    assert abs(x.mean() / cfg.mean_electrical_snr - 1) < 0.01


@pytest.mark.parametrize("n,m,rho", [(7, 7, 0.9), (7, 4, 0.5), (3, 2, 1.0), (5, 5, 0.999)])
def test_mixture_route_matches_alternating_sums(n, m, rho):
    from rfso.fading import _mixture
    cfg = PrsConfig(n, m, rho, 2.0)
    x = np.array([0.05, 1.0, 4.0, 15.0])
    assert np.allclose(_mixture(x, cfg, "pdf"), prs_snr_pdf(x, cfg), rtol=1e-8, atol=1e-14)
    assert np.allclose(_mixture(x, cfg, "cdf"), prs_snr_cdf(x, cfg), rtol=1e-8, atol=1e-14)
    assert np.allclose(_mixture(x, cfg, "ccdf"), prs_snr_ccdf(x, cfg), rtol=1e-8, atol=1e-14)


def test_large_n_cdf_against_sampler(rng):
    cfg = PrsConfig(64, 40, 0.9, 1.0)
    assert cfg.needs_mixture
    x = np.sort(sample_prs_snr(cfg, rng, 2 * 10 ** 5))
    probe = np.quantile(x, np.linspace(0.02, 0.98, 25))
    emp = np.searchsorted(x, probe, side="right") / x.size
    assert np.max(np.abs(emp - prs_snr_cdf(probe, cfg))) < 0.008
    assert prs_snr_mean(cfg) == pytest.approx(x.mean(), rel=0.02)
