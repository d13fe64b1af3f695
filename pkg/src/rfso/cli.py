"""Command-line front-end: metric sweeps, Monte Carlo runs and validation.

Every subcommand writes one CSV with ``#`` metadata lines, a header row and
one row per SNR point, then prints a one-line summary. Exit status is 0 on
success, 2 for configuration errors and 3 for numerical failures.
"""

from __future__ import annotations

import argparse
import csv
import io
import math
import sys

from . import __version__, analytic
from .config import METRICS, RunConfig, preset
from .errors import ConfigError, DomainError, NoFiniteCeilingError
from .mcsim import simulate_many
from . import validation

EXIT_CONFIG = 2
EXIT_NUMERIC = 3

SINGLE_POINT_DB = 30.0
COMMAND_METRICS = {
    "outage": ["outage"],
    "ber": ["ber"],
    "capacity": ["capacity", "capacity_approx", "capacity_bound", "capacity_ceiling"],
    "montecarlo": ["montecarlo"],
}
MC_COLUMNS = ("mc_outage", "mc_ber", "mc_capacity")


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def parse_snr(spec: str) -> tuple[float, float, float]:
    """``"start:stop:step"`` or a single value ``"x"``."""
    parts = spec.split(":")
    try:
        vals = [float(p) for p in parts]
    except ValueError:
        raise ConfigError("snr_db", f"cannot parse {spec!r}")
    if len(vals) == 1:
        return vals[0], vals[0], 1.0
    if len(vals) == 3:
        if not vals[0] < vals[1]:
            raise ConfigError("snr_db", "start must be below stop")
        return tuple(vals)
    raise ConfigError("snr_db", f"expected start:stop:step or a single value, got {spec!r}")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("configuration")
    g.add_argument("--config", help="JSON run configuration; flags override its entries")
    g.add_argument("--preset", default="table1", help="base parameter set (default: table1)")
    g.add_argument("--save-config", metavar="PATH", help="write the effective configuration as JSON")
    g.add_argument("--snr-db", help="average SNR per hop: start:stop:step or a single value")
    g.add_argument("--n-relays", type=int, dest="n_relays")
    g.add_argument("--rank", type=int)
    g.add_argument("--rho", type=float)
    g.add_argument("--rytov", type=float)
    g.add_argument("--alpha", type=float)
    g.add_argument("--beta", type=float)
    g.add_argument("--hpa", choices=["ideal", "sel", "twta"])
    g.add_argument("--ibo-db", type=float, dest="ibo_db")
    g.add_argument("--phi0", type=float)
    g.add_argument("--ilr-db", type=float, dest="ilr_db")
    g.add_argument("--zeta-db", type=float, dest="zeta_db", help="IQ amplitude imbalance")
    g.add_argument("--theta-deg", type=float, dest="theta_deg", help="IQ phase imbalance")
    g.add_argument("--gamma-th-db", type=float, dest="gamma_th_db")
    s = common.add_argument_group("monte carlo")
    s.add_argument("--samples", type=int)
    s.add_argument("--seed", type=int)
    s.add_argument("--chunks", type=int)
    s.add_argument("--workers", type=int, help="thread count; never changes results")
    common.add_argument("-o", "--output", help="CSV path (default: <command>.csv)")

    p = argparse.ArgumentParser(prog="rfso", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"rfso {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("outage", parents=[common], help="closed-form outage probability")
    sub.add_parser("ber", parents=[common], help="average BER by quadrature")
    sub.add_parser("capacity", parents=[common], help="ergodic capacity, approximation, bound, ceiling")
    sw = sub.add_parser("sweep", parents=[common], help="any combination of metrics over an SNR grid")
    sw.add_argument("--metrics", help=f"comma-separated subset of {','.join(METRICS)}")
    sub.add_parser("montecarlo", parents=[common], help="Monte Carlo OP, BER and EC")
    sub.add_parser("validate", parents=[common], help="analytic-vs-Monte-Carlo cross-check suite")
    return p


_OVERRIDES = ("n_relays", "rank", "rho", "rytov", "alpha", "beta", "hpa", "ibo_db", "phi0",
              "ilr_db", "zeta_db", "theta_deg", "gamma_th_db", "samples", "seed", "chunks")


def resolve_config(args) -> RunConfig:
    cfg = preset(args.preset)
    if args.config:
        cfg = RunConfig.load(args.config, cfg)
    for name in _OVERRIDES:
        v = getattr(args, name, None)
        if v is not None:
            setattr(cfg, name, v)
    if args.alpha is not None or args.beta is not None:
        cfg.rytov = None
    if args.ilr_db is not None:
        cfg.zeta_db = cfg.theta_deg = None
    elif args.zeta_db is not None or args.theta_deg is not None:
        cfg.ilr_db = None
    if args.snr_db is not None:
        cfg.snr_start, cfg.snr_stop, cfg.snr_step = parse_snr(args.snr_db)
    elif args.command in COMMAND_METRICS and args.command != "montecarlo" and not args.config:
        cfg.snr_start = cfg.snr_stop = SINGLE_POINT_DB
    if args.command in COMMAND_METRICS:
        cfg.metrics = list(COMMAND_METRICS[args.command])
    elif args.command == "sweep" and args.metrics:
        cfg.metrics = [m.strip() for m in args.metrics.split(",") if m.strip()]
    return cfg.validate()


def _header(cfg: RunConfig, command: str) -> list[str]:
    return [f"# rfso {__version__}", f"# command: {command}", f"# config_sha256: {cfg.digest()}",
            f"# seed: {cfg.seed}"]


def metric_table(cfg: RunConfig, workers=None) -> tuple[list[str], list[list]]:
    """Evaluate the requested metrics on the SNR grid."""
    grid = cfg.snr_grid()
    links = [cfg.link_config(s) for s in grid]
    mod = cfg.modulation_spec()
    order = [m for m in METRICS if m in cfg.metrics and m != "montecarlo"]
    cols = ["snr_db"] + order
    if "montecarlo" in cfg.metrics:
        cols += list(MC_COLUMNS) + [c + "_ci" for c in MC_COLUMNS]
        sims = simulate_many(links, cfg.gamma_th, mod, cfg.sim_spec(), workers)
    rows = []
    for i, (snr, lc) in enumerate(zip(grid, links)):
        row = [snr]
        for m in order:
            if m == "outage":
                row.append(analytic.outage_probability(cfg.gamma_th, lc).value)
            elif m == "ber":
                row.append(analytic.avg_ber(mod, lc).value)
            elif m == "capacity":
                row.append(analytic.ergodic_capacity(lc).value)
            elif m == "capacity_approx":
                row.append(analytic.capacity_approx(lc))
            elif m == "capacity_bound":
                row.append(analytic.capacity_upper_bound(lc))
            elif m == "capacity_ceiling":
                try:
                    row.append(analytic.capacity_ceiling(lc))
                except NoFiniteCeilingError:
                    row.append(math.inf)
        if "montecarlo" in cfg.metrics:
            r = sims[i]
            row += [r.op_est, r.ber_est, r.ec_est, r.op_ci, r.ber_ci, r.ec_ci]
        rows.append(row)
    return cols, rows


def _write_csv(path, meta, cols, rows, trailer=()):
    buf = io.StringIO()
    for line in meta:
        buf.write(line + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(cols)
    for r in rows:
        w.writerow([_fmt(v) for v in r])
    for line in trailer:
        buf.write(line + "\n")
    with open(path, "w", newline="") as fh:
        fh.write(buf.getvalue())


def _run_validate(cfg: RunConfig, workers, out) -> int:
    rows = validation.cross_check(cfg, workers)
    verdicts = validation.ceiling_report(cfg)
    cols = ["hpa", "ibo_db", "snr_db", "outage", "mc_outage", "mc_outage_ci", "ber", "mc_ber",
            "mc_ber_ci", "capacity", "mc_capacity", "mc_capacity_ci", "within_tol"]
    table = [[getattr(r, c) for c in cols] for r in rows]
    dev = {m: validation.max_relative_deviation(rows, m, validation.PROB_FLOOR if m != "capacity" else 0.0)
           for m in ("outage", "ber", "capacity")}
    trailer = [f"# max_rel_dev_{m}: {v:.6g}" for m, v in dev.items()]
    for v in verdicts:
        trailer.append(
            f"# ceiling {v.hpa} ibo={v.ibo_db:g}dB: ec70={v.ec_70:.6f} ec80={v.ec_80:.6f} "
            f"printed={v.printed:.6f} derived={v.derived:.6f} exact_limit={v.limit:.6f} "
            f"winner={v.winner}")
    _write_csv(out, _header(cfg, "validate"), cols, table, trailer)
    ok = all(r.within_tol for r in rows)
    for line in trailer:
        print(line[2:])
    bad = sum(not r.within_tol for r in rows)
    print(f"validate: {len(rows) - bad}/{len(rows)} points within tolerance -> {out}")
    return 0 if ok else 1


def run(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve_config(args)
        if args.save_config:
            cfg.save(args.save_config)
    except (ConfigError, DomainError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    out = args.output or f"{args.command}.csv"
    try:
        if args.command == "validate":
            return _run_validate(cfg, args.workers, out)
        cols, rows = metric_table(cfg, args.workers)
        _write_csv(out, _header(cfg, args.command), cols, rows)
    except (ArithmeticError, OverflowError) as exc:
        print(f"numerical error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ConfigError, DomainError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    print(f"{args.command}: {len(rows)} rows x {len(cols)} columns -> {out}")
    return 0


def main():
    sys.exit(run())
