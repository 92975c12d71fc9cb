"""Command-line entry point: ``qspeed {sweep,bound,optimize,witness,plot}``.

Exit codes: 0 success, 2 configuration error, 3 I/O error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from . import experiment as ex
from .errors import ConfigError, QSpeedError
from .optimize import OptimizerConfig
from .speed_limits import orthogonal_transfer_witness, speed_limit_report, witness_search

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_IO = 3


def _add_device_args(p: argparse.ArgumentParser):
    g = p.add_argument_group("device")
    g.add_argument("--d-site", type=int, dest="d_site", help="levels per qudit (2, 3 or 4)")
    g.add_argument("--g-mhz", type=float, dest="g_mhz", help="coupling g / 2pi in MHz")
    g.add_argument("--omega1-ghz", type=float, dest="omega1_ghz")
    g.add_argument("--omega2-ghz", type=float, dest="omega2_ghz")
    g.add_argument("--alpha-mhz", type=float, dest="alpha_mhz", help="anharmonicity / 2pi in MHz")
    g.add_argument("--leakage-levels", type=int, dest="leakage_levels")
    g.add_argument("--gate", help="target gate label (CZ or I)")
    g.add_argument("--config", type=Path, help="INI file with [device], [sweep], [optimizer] sections")


def _add_optimizer_args(p: argparse.ArgumentParser):
    g = p.add_argument_group("optimizer")
    g.add_argument("--optimizer", choices=("quopt", "grape"))
    g.add_argument("--ort", action="store_true", default=None, help="use the Duffing-oscillator (ORT) model")
    g.add_argument("--seeds", type=int)
    g.add_argument("--iterations", type=int)
    g.add_argument("--segments", type=int)
    g.add_argument("--grape-steps", type=int, dest="grape_steps")
    g.add_argument("--learning-rate", type=float, dest="learning_rate")
    g.add_argument("--momentum", type=float)
    g.add_argument("--cap-over-g", type=float, dest="cap_over_g")
    g.add_argument("--seed-base", type=int, dest="rng_seed_base")
    g.add_argument("--threads", type=int)
    g.add_argument("--full-scale", action="store_true", help="50 seeds x 5000 iterations (GRAPE: 10 x 1e4, 1e4 steps)")


_DEVICE_FLAGS = ("d_site", "g_mhz", "omega1_ghz", "omega2_ghz", "alpha_mhz", "leakage_levels")
_OPT_FLAGS = (
    "seeds", "iterations", "segments", "grape_steps", "learning_rate", "momentum",
    "cap_over_g", "rng_seed_base", "threads",
)


def _sections(args) -> dict[str, dict[str, str]]:
    """Config-file sections with CLI flags layered on top."""
    sections = ex.load_config_file(args.config) if getattr(args, "config", None) else {}
    sections = {k: dict(v) for k, v in sections.items()}
    dev = sections.setdefault("device", {})
    for key in _DEVICE_FLAGS:
        val = getattr(args, key, None)
        if val is not None:
            dev[key] = str(val)
    sw = sections.setdefault("sweep", {})
    for key in ("gate", "optimizer", "ort"):
        val = getattr(args, key, None)
        if val is not None:
            sw[key] = str(val)
    if getattr(args, "grid", None):
        sw["grid"] = args.grid
    if getattr(args, "output", None) is not None:
        sw["output"] = str(args.output)
    opt = sections.setdefault("optimizer", {})
    for key in _OPT_FLAGS:
        val = getattr(args, key, None)
        if val is not None:
            opt[key] = str(val)
    return sections


def _opt_base(args, sections) -> OptimizerConfig:
    if not getattr(args, "full_scale", False):
        return OptimizerConfig(**ex.DESK_BUDGET)
    grape = sections.get("sweep", {}).get("optimizer", "quopt") == "grape"
    return OptimizerConfig(**(ex.FULL_BUDGET_GRAPE if grape else ex.FULL_BUDGET_QUOPT))


def build_sweep_config(args) -> ex.SweepConfig:
    sections = _sections(args)
    return ex.sweep_config_from_sections(sections, _opt_base(args, sections))


def _print_record(rec: ex.SweepRecord):
    print(
        f"T/Tmin={rec.t_over_tmin:7.4f}  T={rec.t_seconds * 1e9:8.3f} ns  "
        f"F={rec.best_fidelity:.12f}  seed={rec.seed_used}  its={rec.iterations_run}",
        flush=True,
    )


def cmd_sweep(args) -> int:
    cfg = build_sweep_config(args)
    records = ex.run_sweep(cfg, progress=None if args.quiet else _print_record)
    if args.svg is not None:
        ex.emit_report(records, args.svg.with_suffix(""), formats=("svg",), title=f"{cfg.gate} d={cfg.device.d_site}")
    for thr in args.threshold or ():
        t = ex.find_threshold(records, thr)
        print(f"threshold F>={thr}: " + ("never crossed" if t is None else f"T/Tmin = {t:.4f}"))
    bound = ex.impossibility_bound(cfg.device, cfg.model_levels)
    bad = ex.impossibility_violations(records, bound)
    # for qubits pi/(2||H_I||) = 2 T_min exceeds the reachable CZ time, so it is no bound there
    if bad and cfg.device.d_site >= 3:
        print(f"WARNING: {len(bad)} record(s) beat the certified bound {bound * 1e9:.3f} ns", file=sys.stderr)
    return EXIT_OK


def cmd_bound(args) -> int:
    cfg = build_sweep_config(args)
    for line in speed_limit_report(cfg.device, cfg.target).lines():
        print(line)
    return EXIT_OK


def cmd_optimize(args) -> int:
    cfg = build_sweep_config(args)
    t = args.t_over_tmin * cfg.device.qubit_tmin
    res = ex.optimize_point(cfg, t)
    print(f"T/Tmin={args.t_over_tmin:.4f}  F={res.best_fidelity:.12f}  seed={res.seed_used}  its={res.iterations_run}")
    if args.pulse is not None:
        ex.write_pulse_csv(res.best_schedule, args.pulse)
        print(f"pulse written to {args.pulse}")
    return EXIT_OK


def cmd_witness(args) -> int:
    cfg = build_sweep_config(args)
    target = cfg.target
    psi = witness_search(target, args.resolution)
    if psi is None:
        print("no orthogonal-transfer product state found")
        return EXIT_OK
    psi = psi / np.linalg.norm(psi)
    ov = orthogonal_transfer_witness(target, psi)
    print(f"|<psi|U|psi>| = {abs(ov):.3e}")
    d = target.d_site
    amps = psi.reshape(d, d)
    a = np.sqrt(np.sum(np.abs(amps) ** 2, axis=1))
    b = np.sqrt(np.sum(np.abs(amps) ** 2, axis=0))
    print("qudit 1 amplitudes: " + " ".join(f"{x:.6f}" for x in a))
    print("qudit 2 amplitudes: " + " ".join(f"{x:.6f}" for x in b))
    return EXIT_OK


def cmd_plot(args) -> int:
    records = ex.read_csv(args.csv)
    out = args.output if args.output is not None else args.csv.with_suffix(".svg")
    ex.emit_report(records, out.with_suffix(""), formats=("svg",), title=args.title or "")
    print(f"wrote {out.with_suffix('.svg')}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="qspeed", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sweep", help="fidelity-vs-time sweep")
    _add_device_args(p)
    _add_optimizer_args(p)
    p.add_argument("--grid", help="'start:stop:step' or comma list, in units of the qubit T_min")
    p.add_argument("--fine", dest="grid", action="store_const", const="1.0:1.2:0.025", help="use the 1.0-1.2 fine grid")
    p.add_argument("-o", "--output", type=Path, help="CSV output path")
    p.add_argument("--svg", type=Path, help="also render an SVG plot")
    p.add_argument("--threshold", type=float, action="append", help="report first crossing of this fidelity")
    p.add_argument("-q", "--quiet", action="store_true")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("bound", help="speed-limit report")
    _add_device_args(p)
    p.set_defaults(func=cmd_bound)

    p = sub.add_parser("optimize", help="optimize a single gate time")
    _add_device_args(p)
    _add_optimizer_args(p)
    p.add_argument("--t", type=float, dest="t_over_tmin", required=True, help="gate time in units of T_min")
    p.add_argument("--pulse", type=Path, help="write best pulse amplitudes (rad/s) as CSV")
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("witness", help="search an orthogonal-transfer product state")
    _add_device_args(p)
    p.add_argument("--resolution", type=int, help="simplex grid resolution")
    p.set_defaults(func=cmd_witness)

    p = sub.add_parser("plot", help="render a sweep CSV as SVG")
    p.add_argument("csv", type=Path)
    p.add_argument("-o", "--output", type=Path)
    p.add_argument("--title")
    p.set_defaults(func=cmd_plot)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except OSError as exc:
        print(f"qspeed: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (QSpeedError, ValueError) as exc:
        print(f"qspeed: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
