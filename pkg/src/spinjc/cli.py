"""Command-line entry point: ``spinjc {sweep,scan-optimal,resonance,correlate,preset}``."""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace
from pathlib import Path
from typing import List, Optional

import numpy as np

from . import sweep as sw
from .model import physical_frequency
from .spectrum import resonance_curve

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

log = logging.getLogger("spinjc")


def _load_spec(args, base: Optional[sw.SweepSpec] = None) -> sw.SweepSpec:
    spec = base or sw.SweepSpec(sw.BASE_MODEL)
    if args.config:
        with open(args.config, "rb") as fh:
            spec = sw.spec_from_config(tomllib.load(fh), spec)
    changes = {}
    if args.workers is not None:
        changes["workers"] = args.workers
    if args.fock_cutoff is not None:
        changes["fock_cutoff"] = args.fock_cutoff
        if spec.escalate_to is not None and spec.escalate_to <= args.fock_cutoff:
            changes["escalate_to"] = None
    return replace(spec, **changes) if changes else spec


def _emit(text: str, out: Optional[str]):
    if out:
        Path(out).write_text(text, encoding="utf-8")
        log.info("wrote %s", out)
    else:
        sys.stdout.write(text)


def _run_spec(spec: sw.SweepSpec, out: Optional[str]):
    if spec.mode == "sweep":
        _emit(sw.rows_to_csv(spec, sw.run_sweep(spec)), out)
    elif spec.mode == "scan-optimal":
        rows = sw.scan_optimal(spec.axis2.values(), spec.model, bracket=(spec.axis1.start, spec.axis1.stop),
                               grid_points=spec.axis1.num, fock_cutoff=spec.fock_cutoff,
                               two_level=spec.two_level, workers=spec.workers)
        _emit(sw.write_csv((r.as_dict() for r in rows), sw.OPTIMAL_COLUMNS), out)
    else:
        _run_correlate(spec, out)


def _run_correlate(spec: sw.SweepSpec, out: Optional[str]):
    results = sw.run_correlate(spec)
    _emit(sw.write_csv((r.row.as_dict() for r in results), sw.result_columns(spec)), out)
    prefix = str(Path(out).with_suffix("")) if out else "correlation"
    for r in results:
        for n, trace in r.traces.items():
            path = sw.trace_filename(prefix, n, r.row.delta_c_over_g, r.row.delta2_ratio)
            sw.write_csv(trace.rows(), sw.TRACE_COLUMNS, path)
            log.info("wrote %s", path)


def cmd_sweep(args):
    _run_spec(replace(_load_spec(args), mode="sweep"), args.out)


def cmd_scan_optimal(args):
    spec = _load_spec(args, sw.preset("fig2e"))
    if args.delta2:
        spec = replace(spec, axis2=sw.Axis(*args.delta2[:2], int(args.delta2[2])))
    _run_spec(replace(spec, mode="scan-optimal"), args.out)


def cmd_resonance(args):
    ratios = np.linspace(args.delta2[0], args.delta2[1], int(args.delta2[2]))
    rows = []
    for n in args.n:
        for branch in args.branch:
            curve = resonance_curve(n, branch, args.delta1_ratio, ratios, args.g, args.window)
            for r in curve.rows():
                r["delta_c_khz"] = physical_frequency(r["delta_c_over_g"] * args.g)
                rows.append(r)
    cols = ["n", "branch", "delta2_ratio", "delta_c_over_g", "delta_c_khz", "residual"]
    for r in rows:
        r["delta_c_khz"] = r["delta_c_khz"] / 1e3
    _emit(sw.write_csv(rows, cols), args.out)


def cmd_correlate(args):
    spec = _load_spec(args, sw.preset("fig3f"))
    changes = {"mode": "correlate"}
    if args.delta_c_over_g is not None:
        changes["axis1"] = sw.Axis.fixed(args.delta_c_over_g)
    if args.delta2_ratio is not None:
        changes["axis2"] = sw.Axis.fixed(args.delta2_ratio)
    if args.orders:
        changes["tau_orders"] = tuple(args.orders)
    _run_correlate(replace(spec, **changes), args.out)


def cmd_preset(args):
    if args.list or not args.name:
        for name in sorted(sw.PRESETS):
            print(f"{name:14s} {sw.PRESETS[name].mode:13s} {sw.PRESETS[name].description}")
        return
    _run_spec(_load_spec(args, sw.preset(args.name)), args.out)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="TOML file with [model], [sweep], [numerics] sections")
    common.add_argument("--out", help="output CSV (default: stdout)")
    common.add_argument("--workers", type=int, default=None, help="worker processes")
    common.add_argument("--fock-cutoff", type=int, default=None, help="maximum photon number kept")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="spinjc", description="Spin-1 Jaynes-Cummings photon statistics")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sweep", parents=[common], help="grid over delta_c/g and delta2/delta_c")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("scan-optimal", parents=[common], help="min over delta_c of g12(0) versus delta2")
    p.add_argument("--delta2", type=float, nargs=3, metavar=("START", "STOP", "NUM"))
    p.set_defaults(func=cmd_scan_optimal)

    p = sub.add_parser("resonance", parents=[common], help="n-photon resonance curves from the dressed spectrum")
    p.add_argument("--n", type=int, nargs="+", default=[1, 2])
    p.add_argument("--branch", nargs="+", default=["+", "-"], choices=["+", "-", "0"])
    p.add_argument("--delta1-ratio", type=float, default=0.1)
    p.add_argument("--delta2", type=float, nargs=3, default=[-0.5, 0.1, 61], metavar=("START", "STOP", "NUM"))
    p.add_argument("--g", type=float, default=6.0)
    p.add_argument("--window", type=float, default=4.0, help="search half-width in units of g")
    p.set_defaults(func=cmd_resonance)

    p = sub.add_parser("correlate", parents=[common], help="g_n^(2)(tau) traces at one operating point")
    p.add_argument("--delta-c-over-g", type=float)
    p.add_argument("--delta2-ratio", type=float)
    p.add_argument("--orders", type=int, nargs="+", choices=[1, 2])
    p.set_defaults(func=cmd_correlate)

    p = sub.add_parser("preset", parents=[common], help="run a figure preset")
    p.add_argument("name", nargs="?")
    p.add_argument("--list", action="store_true")
    p.set_defaults(func=cmd_preset)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        args.func(args)
    except KeyError as exc:
        print(exc.args[0] if exc.args else exc, file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
