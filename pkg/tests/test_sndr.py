import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from rfso.errors import DomainError, NoFiniteCeilingError
from rfso.fading import OpticalConfig, PrsConfig, prs_snr_mean
from rfso.impairments import BussgangTriple, HpaModel, IqImbalance, bussgang_coeffs
from rfso.sndr import LinkConfig, e2e_sndr, kappa, sndr_ceiling, sndr_ceiling_delta_sq

from conftest import ALPHA_T1, BETA_T1

SEL8 = HpaModel.from_db("sel", 8.0)
TWTA5 = HpaModel.from_db("twta", 5.0)


def link(snr_db=30.0, hpa=None, ilr_db=None, **kw):
    return LinkConfig.from_average_snr(snr_db, hpa=hpa, ilr_db=ilr_db, **kw)


finite_pos = st.floats(0.0, 1e8, allow_nan=False)


# ---------------------------------------------------------------- kappa

@given(st.floats(1e-3, 1e9))
def test_kappa_ideal_is_one(g):
    assert kappa(BussgangTriple(1.0, 0.0, 1.0), g) == 1.0


def test_kappa_sel_8db():
    b = bussgang_coeffs(SEL8)
    assert kappa(b, 1e3) == pytest.approx(1 + (b.clip - b.delta ** 2) * 1001 / b.delta ** 2, rel=1e-14)
    assert kappa(b, 1e3) == pytest.approx(1.0 + 1.17949983828238e-4 * 1001 / 0.999031151226033869 ** 2,
                                          rel=1e-9)


def test_kappa_monotone():
    for kind in ("sel", "twta"):
        g = np.logspace(-2, 8, 60)
        b = bussgang_coeffs(HpaModel.from_db(kind, 5.0))
        assert np.all(np.diff([kappa(b, x) for x in g]) > 0)
        ibo = np.linspace(-5, 15, 60)
        k = [kappa(bussgang_coeffs(HpaModel.from_db(kind, i)), 1e3) for i in ibo]
        assert np.all(np.diff(k) < 0)


def test_link_kappa_uses_per_link_mean():
    cfg = link(40.0, SEL8)
    assert cfg.kappa == pytest.approx(kappa(bussgang_coeffs(SEL8), 1e4), rel=1e-15)


# ---------------------------------------------------------------- link config

def test_from_average_snr_fields():
    cfg = link(20.0, TWTA5, ilr_db=-15.0)
    assert cfg.rf == PrsConfig(7, 7, 0.9, 100.0)
    assert cfg.optical.alpha == pytest.approx(ALPHA_T1, rel=1e-13)
    assert cfg.optical.mean_snr == pytest.approx(100.0, rel=1e-14)
    assert cfg.ilr == pytest.approx(10 ** -1.5, rel=1e-15)
    assert cfg.mean_selected_snr == pytest.approx(prs_snr_mean(cfg.rf), rel=1e-15)


def test_ilr_override_beats_iq():
    iq = IqImbalance.from_db_deg(1.0, 15.0)
    cfg = LinkConfig(PrsConfig(7, 7, 0.9, 10.0), OpticalConfig.from_mean_snr(4.0, 2.0, 10.0),
                     iq=iq, ilr_override=0.05)
    assert cfg.ilr == 0.05
    cfg2 = LinkConfig(cfg.rf, cfg.optical, iq=iq)
    assert cfg2.ilr == pytest.approx(0.020637577130991836, rel=1e-13)
    assert LinkConfig(cfg.rf, cfg.optical).ilr == 0.0


@pytest.mark.parametrize("bad", [-0.1, math.inf, math.nan])
def test_ilr_override_domain(bad):
    with pytest.raises(DomainError):
        LinkConfig(PrsConfig(1, 1, 0.0, 1.0), OpticalConfig(2.0, 2.0, 1.0), ilr_override=bad)


def test_explicit_shape_parameters():
    cfg = link(10.0, alpha=3.0, beta=1.5)
    assert (cfg.optical.alpha, cfg.optical.beta) == (3.0, 1.5)


# ---------------------------------------------------------------- e2e SNDR

def test_ideal_reduces_to_classical_fixed_gain(rng):
    cfg = link(25.0)
    g1 = rng.exponential(300.0, 10 ** 4)
    g2 = rng.exponential(300.0, 10 ** 4)
    ref = g1 * g2 / (g2 + cfg.mean_selected_snr + 1.0)
    assert np.allclose(e2e_sndr(g1, g2, cfg), ref, rtol=1e-12, atol=0)


def test_zero_inputs_give_zero():
    cfg = link(30.0, SEL8, -15.0)
    assert e2e_sndr(0.0, 50.0, cfg) == 0.0
    assert e2e_sndr(50.0, 0.0, cfg) == 0.0


def test_direct_formula():
    cfg = link(30.0, TWTA5, -15.0)
    g1, g2 = 123.0, 4567.0
    ilr, k, e = cfg.ilr, cfg.kappa, cfg.mean_selected_snr
    ref = g1 * g2 / (ilr * g1 * g2 + (1 + ilr) * k * g2 + (1 + ilr) * (e + k))
    assert e2e_sndr(g1, g2, cfg) == pytest.approx(ref, rel=1e-15)


@given(finite_pos, finite_pos, st.sampled_from([None, 4.0, 8.0]), st.floats(-30, -5))
def test_sndr_upper_bounds(g1, g2, ibo, ilr_db):
    hpa = None if ibo is None else HpaModel.from_db("sel", ibo)
    cfg = link(30.0, hpa, ilr_db)
    s = e2e_sndr(g1, g2, cfg)
    assert 0.0 <= s < 1.0 / cfg.ilr
    assert s <= g1 / ((1 + cfg.ilr) * cfg.kappa) * (1 + 1e-14)


@pytest.mark.parametrize("hpa", [None, SEL8, TWTA5])
def test_sndr_monotone(hpa):
    cfg = link(30.0, hpa, -15.0)
    grid = np.logspace(-2, 7, 80)
    for fixed in (1.0, 1e3, 1e6):
        assert np.all(np.diff(e2e_sndr(grid, fixed, cfg)) >= 0)
        assert np.all(np.diff(e2e_sndr(fixed, grid, cfg)) >= 0)


def test_sndr_scalar_and_array():
    cfg = link(30.0)
    assert isinstance(e2e_sndr(1.0, 2.0, cfg), float)
    assert e2e_sndr(np.ones(3), 2.0, cfg).shape == (3,)


# ---------------------------------------------------------------- ceilings

def test_ideal_ceiling():
    assert sndr_ceiling(link(30.0, None, -20.0)) == pytest.approx(100.0, rel=1e-12)
    assert sndr_ceiling_delta_sq(link(30.0, None, -20.0)) == pytest.approx(100.0, rel=1e-12)


def test_ideal_without_leakage_has_no_ceiling():
    with pytest.raises(NoFiniteCeilingError):
        sndr_ceiling(link(30.0))


def test_sel_8db_ceilings_from_coefficients():
    cfg = link(30.0, SEL8, -15.0)
    b = bussgang_coeffs(SEL8)
    ilr = 10 ** -1.5
    assert sndr_ceiling(cfg) == pytest.approx(1 / ((1 + ilr) * b.clip / b.delta - 1), rel=1e-13)
    assert sndr_ceiling_delta_sq(cfg) == pytest.approx(1 / ((1 + ilr) * b.clip / b.delta ** 2 - 1), rel=1e-13)


def test_derived_ceiling_below_ideal():
    # clip >= delta^2, so the delta-squared form never exceeds 1/ILR
    for kind, ibo in (("sel", 4.0), ("sel", 8.0), ("twta", 5.0), ("twta", 8.0)):
        cfg = link(30.0, HpaModel.from_db(kind, ibo), -15.0)
        assert sndr_ceiling_delta_sq(cfg) < 1 / cfg.ilr


def test_ceiling_monotone_in_leakage():
    vals = [sndr_ceiling(link(30.0, SEL8, d)) for d in np.linspace(-30, -5, 40)]
    assert np.all(np.diff(vals) < 0)


def test_ceiling_undefined_without_leakage_for_sel():
    # clip < delta for SEL, so with ILR = 0 the printed denominator is negative
    with pytest.raises(NoFiniteCeilingError):
        sndr_ceiling(link(30.0, SEL8, None))


def test_ceiling_independent_of_snr():
    assert sndr_ceiling(link(10.0, SEL8, -15.0)) == sndr_ceiling(link(70.0, SEL8, -15.0))
    assert sndr_ceiling_delta_sq(link(10.0, TWTA5, -15.0)) == sndr_ceiling_delta_sq(link(70.0, TWTA5, -15.0))


def test_twta_printed_ceiling_undefined():
    # clip/delta = 0.6875 at 5 dB back-off: the printed denominator is negative
    with pytest.raises(NoFiniteCeilingError):
        sndr_ceiling(link(30.0, TWTA5, -15.0))
