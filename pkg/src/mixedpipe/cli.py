"""Command line: ``mixedpipe run | validate | check-flux``."""

import argparse
import csv
import logging
import sys
from pathlib import Path

import numpy as np

from . import kinetic
from .errors import ConfigurationError, SimulationError
from .scenario import load_scenario
from .solver import FrictionMode, run, snapshot

log = logging.getLogger("mixedpipe")

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_INVALID = 2
EXIT_ABORT = 3

FLUX_TOLERANCE = 1e-9

GAUGE_HEADER = ("t", "piezo", "Q", "A", "E")
SNAPSHOT_HEADER = ("x", "A", "Q", "E", "piezo", "level")


def _fmt(v):
    return repr(float(v))


def _write_csv(path, header, rows):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])


def _write_snapshot(path, snap):
    cols = [snap[k] for k in SNAPSHOT_HEADER]
    _write_csv(path, SNAPSHOT_HEADER, zip(*cols))


def _write_summary(path, items):
    with open(path, "w") as fh:
        for k, v in items:
            fh.write(f"{k} = {v}\n")


def cmd_run(args):
    try:
        scen = load_scenario(args.scenario)
        scen = scen.with_overrides(
            cfl=args.cfl, n_cells=args.cells, friction=args.friction,
            symmetry_metric=True if args.metric == "symmetry" else None)
    except ConfigurationError as exc:
        print(exc, file=sys.stderr)
        return EXIT_INVALID
    out = Path(args.out or scen.output or f"runs/{scen.name}")
    out.mkdir(parents=True, exist_ok=True)
    log.info("running %s -> %s", scen.name, out)

    summary = [("scenario", scen.name), ("friction", scen.friction),
               ("n_cells", scen.n_cells), ("cfl", scen.cfl), ("t_end", scen.t_end)]
    try:
        result = run(scen)
    except SimulationError as exc:
        state = exc.state
        _write_snapshot(out / "abort_state.csv", snapshot(state, scen.constants))
        summary += [("status", "aborted"), ("reason", str(exc)), ("steps", state.n),
                    ("time", _fmt(state.t))]
        _write_summary(out / "run_summary", summary)
        print(f"error: {exc}; state written to {out / 'abort_state.csv'}", file=sys.stderr)
        return EXIT_ABORT

    for g in result.gauges:
        _write_csv(out / "gauges" / f"{g.x:g}.csv", GAUGE_HEADER, g.rows)
    for t, snap in result.snapshots.items():
        _write_snapshot(out / "snapshots" / f"{t:g}.csv", snap)
    if scen.symmetry_metric:
        _write_csv(out / "symmetry.csv", ("t", "dev_A", "dev_Q"), result.symmetry)
        max_dev = max(r[1] for r in result.symmetry)
        summary.append(("max_symmetry_deviation", _fmt(max_dev)))
    summary += [
        ("status", "ok"),
        ("steps", result.steps),
        ("final_time", _fmt(result.state.t)),
        ("initial_mass", _fmt(result.initial_mass)),
        ("final_mass", _fmt(result.final_mass)),
        ("boundary_inflow", _fmt(result.boundary_inflow)),
        ("mass_balance_error", _fmt(result.mass_balance_error)),
        ("entropy_increases", result.entropy_increases),
        ("wall_time", f"{result.wall_time:.3f}"),
    ]
    _write_summary(out / "run_summary", summary)
    if args.plots:
        from .report import render
        for p in render(result, scen.geometry, out):
            log.info("wrote %s", p)
    print(f"{scen.name}: {result.steps} steps to t = {result.state.t:g} s, "
          f"output in {out}")
    return EXIT_OK


def cmd_validate(args):
    try:
        scen = load_scenario(args.scenario)
    except ConfigurationError as exc:
        print(exc, file=sys.stderr)
        return EXIT_INVALID
    print(f"{scen.name}: ok ({scen.n_cells} cells, t_end = {scen.t_end:g} s, "
          f"friction {scen.friction})")
    return EXIT_OK


def check_flux(seed, count, flux_fn=kinetic.interface_flux, g=9.81):
    """Largest relative deviation between ``flux_fn`` and the quadrature
    reference over ``count`` random interfaces."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(count):
        data = kinetic.random_interface(rng)
        err = kinetic.flux_relative_error(flux_fn(data, g), kinetic.quadrature_flux(data, g),
                                          data)
        worst = max(worst, err)
    return worst


def _perturbed(eps):
    def flux(data, g):
        f = kinetic.interface_flux(data, g)
        return kinetic.FluxPair(f.F_minus * (1.0 + eps), f.F_plus)
    return flux


def cmd_check_flux(args, flux_fn=None):
    if flux_fn is None:
        flux_fn = _perturbed(args.perturb) if args.perturb else kinetic.interface_flux
    worst = check_flux(args.seed, args.count, flux_fn)
    ok = worst < FLUX_TOLERANCE
    print(f"check-flux seed={args.seed} count={args.count} "
          f"max_rel_error={worst:.3e} {'PASS' if ok else 'FAIL'}")
    return EXIT_OK if ok else EXIT_FAIL


def build_parser():
    p = argparse.ArgumentParser(prog="mixedpipe",
                                description="Kinetic solver for mixed pipe flows.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run a scenario and write CSV output")
    r.add_argument("--scenario", required=True, help="scenario file or bundled name")
    r.add_argument("--out", help="output directory")
    r.add_argument("--cfl", type=float)
    r.add_argument("--cells", type=int)
    r.add_argument("--friction", choices=[m.value for m in FrictionMode])
    r.add_argument("--metric", choices=["symmetry"], help="extra per-output metric")
    r.add_argument("--plots", action="store_true", help="also render PNG figures")
    r.set_defaults(func=cmd_run)

    v = sub.add_parser("validate", help="check a scenario file")
    v.add_argument("--scenario", required=True)
    v.set_defaults(func=cmd_validate)

    c = sub.add_parser("check-flux", help="closed-form fluxes against quadrature")
    c.add_argument("--seed", type=int, default=42)
    c.add_argument("--count", type=int, default=1000)
    c.add_argument("--perturb", type=float, default=0.0,
                   help="scale the closed-form flux by 1+eps (negative control)")
    c.set_defaults(func=cmd_check_flux)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
