"""Analytic-vs-Monte-Carlo cross-checks and the high-SNR ceiling arbitration."""

from __future__ import annotations

import copy
import math
from dataclasses import dataclass
from statistics import NormalDist

from . import analytic
from .config import RunConfig
from .errors import NoFiniteCeilingError
from .mcsim import simulate_many
from .sndr import LinkConfig, sndr_ceiling, sndr_ceiling_delta_sq

SUITE = (("sel", 4.0), ("sel", 8.0), ("twta", 5.0), ("twta", 8.0))
DEFAULT_ILR_DB = -15.0
REL_TOL = 0.05
N_SIGMA = 3.0
PROB_FLOOR = 1e-4
CEILING_TOL = 0.02
SATURATION_BITS = 0.01


@dataclass
class CheckRow:
    hpa: str
    ibo_db: float
    snr_db: float
    outage: float
    mc_outage: float
    mc_outage_ci: float
    ber: float
    mc_ber: float
    mc_ber_ci: float
    capacity: float
    mc_capacity: float
    mc_capacity_ci: float
    within_tol: bool


def agrees(exact: float, est: float, ci: float, z: float, floor: float = 0.0) -> bool:
    """``|exact - est| <= max(3 SE, 5 % of exact)``; values below ``floor`` are not judged."""
    if exact < floor:
        return True
    se = ci / z
    return abs(exact - est) <= max(N_SIGMA * se, REL_TOL * abs(exact))


def suite_configs(base: RunConfig) -> list[RunConfig]:
    out = []
    for kind, ibo in SUITE:
        cfg = copy.deepcopy(base)
        cfg.hpa, cfg.ibo_db = kind, ibo
        if cfg.ilr_db is None and cfg.zeta_db is None and cfg.theta_deg is None:
            cfg.ilr_db = DEFAULT_ILR_DB
        out.append(cfg.validate())
    return out


def cross_check(base: RunConfig, workers=None, metrics=("outage", "ber", "capacity")) -> list[CheckRow]:
    """Closed form / quadrature against Monte Carlo on the validation suite."""
    runs = suite_configs(base)
    grid = base.snr_grid()
    links = [(rc, snr, rc.link_config(snr)) for rc in runs for snr in grid]
    mod = base.modulation_spec()
    sims = simulate_many([lc for _, _, lc in links], base.gamma_th, mod, base.sim_spec(), workers)
    z = NormalDist().inv_cdf(0.5 + 0.5 * base.confidence)
    rows = []
    for (rc, snr, lc), sim in zip(links, sims):
        op = analytic.outage_probability(base.gamma_th, lc).value if "outage" in metrics else math.nan
        ber = analytic.avg_ber(mod, lc).value if "ber" in metrics else math.nan
        ec = analytic.ergodic_capacity(lc).value if "capacity" in metrics else math.nan
        ok = True
        if "outage" in metrics:
            ok &= agrees(op, sim.op_est, sim.op_ci, z, PROB_FLOOR)
        if "ber" in metrics:
            ok &= agrees(ber, sim.ber_est, sim.ber_ci, z, PROB_FLOOR)
        if "capacity" in metrics:
            ok &= agrees(ec, sim.ec_est, sim.ec_ci, z)
        rows.append(CheckRow(rc.hpa, rc.ibo_db, snr, op, sim.op_est, sim.op_ci, ber, sim.ber_est,
                             sim.ber_ci, ec, sim.ec_est, sim.ec_ci, bool(ok)))
    return rows


def max_relative_deviation(rows, metric: str, floor: float = 0.0) -> float:
    worst = 0.0
    for r in rows:
        exact, est = getattr(r, metric), getattr(r, "mc_" + metric)
        if exact >= floor and exact > 0 and math.isfinite(exact):
            worst = max(worst, abs(est - exact) / exact)
    return worst


@dataclass
class CeilingVerdict:
    hpa: str
    ibo_db: float
    ec_70: float
    ec_80: float
    printed: float
    derived: float
    limit: float
    winner: str

    @property
    def saturated(self) -> bool:
        return abs(self.ec_80 - self.ec_70) < SATURATION_BITS


def _capacity_of(fn, cfg: LinkConfig) -> float:
    try:
        return 0.5 * math.log2(1.0 + fn(cfg))
    except NoFiniteCeilingError:
        return math.nan


def arbitrate_ceiling(rc: RunConfig, lo_db: float = 70.0, hi_db: float = 80.0) -> CeilingVerdict:
    """Compare the saturated capacity with both candidate ceiling formulas."""
    lo, hi = rc.link_config(lo_db), rc.link_config(hi_db)
    ec_lo = analytic.ergodic_capacity(lo).value
    ec_hi = analytic.ergodic_capacity(hi).value
    printed = _capacity_of(sndr_ceiling, hi)
    derived = _capacity_of(sndr_ceiling_delta_sq, hi)
    limit = analytic.capacity_limit(hi).value
    cands = {name: abs(val / ec_hi - 1.0) for name, val in (("printed", printed), ("derived", derived))
             if math.isfinite(val)}
    inside = {k: v for k, v in cands.items() if v <= CEILING_TOL}
    winner = min(inside, key=inside.get) if inside else "none"
    return CeilingVerdict(rc.hpa, rc.ibo_db if rc.ibo_db is not None else math.nan,
                          ec_lo, ec_hi, printed, derived, limit, winner)


def ceiling_report(base: RunConfig) -> list[CeilingVerdict]:
    return [arbitrate_ceiling(rc) for rc in suite_configs(base)]
