"""Fidelity-vs-time sweeps, threshold extraction and report files.

Sweep times are given as multiples of the qubit CZ limit ``pi / (4 g)`` of
the configured device. CSV output uses the fixed header
``t_over_tmin,t_seconds,best_fidelity,infidelity,seed_used,iterations_run``
with every float written to 17 significant digits.
"""

from __future__ import annotations

import configparser
import csv
import logging
import math
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .device import TWO_PI, DeviceParams, OrtPulseSchedule, PulseSchedule, coupling_hamiltonian
from .errors import ConfigError
from .fidelity import TargetGate, identity_gate, subspace_fidelity, target_cz, avg_gate_fidelity_closed
from .optimize import OptimizationResult, OptimizerConfig, optimize_grape, optimize_quopt
from .speed_limits import qudit_lower_bound

log = logging.getLogger(__name__)

CSV_HEADER = ("t_over_tmin", "t_seconds", "best_fidelity", "infidelity", "seed_used", "iterations_run")
FIG2_GRID = tuple(round(0.05 * i, 10) for i in range(41))
FIG3_GRID = tuple(round(1.0 + 0.025 * i, 10) for i in range(9))
IMPOSSIBILITY_FIDELITY = 0.999
LOG_FLOOR = 1e-12

# desk-scale and full-scale budgets
DESK_BUDGET = dict(seeds=10, iterations=2000, grape_steps=2000)
FULL_BUDGET_QUOPT = dict(seeds=50, iterations=5000)
FULL_BUDGET_GRAPE = dict(seeds=10, iterations=10_000, grape_steps=10_000)


def make_target(gate: str, d_site: int) -> TargetGate:
    g = gate.upper()
    if g == "CZ":
        return target_cz(d_site)
    if g in ("I", "ID", "IDENTITY"):
        return identity_gate(d_site)
    raise ConfigError(f"unknown gate {gate!r}; expected CZ or I")


@dataclass(frozen=True)
class SweepConfig:
    device: DeviceParams = field(default_factory=DeviceParams)
    gate: str = "CZ"
    grid: tuple[float, ...] = FIG2_GRID
    optimizer: str = "quopt"
    ort: bool = False
    opt: OptimizerConfig = field(default_factory=lambda: OptimizerConfig(**DESK_BUDGET))
    output: Path | None = None

    def __post_init__(self):
        grid = tuple(float(t) for t in self.grid)
        object.__setattr__(self, "grid", grid)
        if not grid:
            raise ConfigError("time grid is empty")
        if any(t < 0 for t in grid):
            raise ConfigError("time grid values must be >= 0")
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise ConfigError("time grid must be strictly increasing")
        if self.optimizer not in ("quopt", "grape"):
            raise ConfigError(f"optimizer must be 'quopt' or 'grape', got {self.optimizer!r}")
        if self.ort and self.optimizer != "grape":
            raise ConfigError("the ORT model is only available with the grape optimizer")
        make_target(self.gate, self.device.d_site)

    @property
    def target(self) -> TargetGate:
        return make_target(self.gate, self.device.d_site)

    @property
    def model_levels(self) -> int:
        return self.device.ort_levels if self.ort else self.device.d_site


@dataclass(frozen=True)
class SweepRecord:
    t_over_tmin: float
    t_seconds: float
    best_fidelity: float
    infidelity: float
    seed_used: int
    iterations_run: int

    def row(self) -> list[str]:
        return [
            f"{self.t_over_tmin:.17g}",
            f"{self.t_seconds:.17g}",
            f"{self.best_fidelity:.17g}",
            f"{self.infidelity:.17g}",
            str(self.seed_used),
            str(self.iterations_run),
        ]


def optimize_point(cfg: SweepConfig, t_seconds: float) -> OptimizationResult:
    if cfg.optimizer == "quopt":
        return optimize_quopt(cfg.device, cfg.target, t_seconds, cfg.opt)
    return optimize_grape(cfg.device, cfg.target, t_seconds, cfg.opt, ort=cfg.ort)


def _zero_time_record(cfg: SweepConfig) -> SweepRecord:
    levels = cfg.model_levels
    eye = np.eye(levels * levels, dtype=complex)
    if cfg.ort:
        f = subspace_fidelity(cfg.target, eye, levels)
    else:
        f = avg_gate_fidelity_closed(cfg.target, eye)
    return SweepRecord(0.0, 0.0, f, 1.0 - f, cfg.opt.rng_seed_base, 0)


def run_sweep(cfg: SweepConfig, progress=None) -> list[SweepRecord]:
    """Best-of-seeds fidelity at every grid time.

    When ``cfg.output`` is set, the CSV is written row by row (flushed after
    each grid point) so an interrupted sweep keeps its finished points.
    """
    tmin = cfg.device.qubit_tmin
    records: list[SweepRecord] = []
    fh = writer = None
    if cfg.output is not None:
        path = Path(cfg.output)
        path.parent.mkdir(parents=True, exist_ok=True)
        fh = open(path, "w", newline="")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        fh.flush()
    try:
        for t_rel in cfg.grid:
            if t_rel == 0.0:
                rec = _zero_time_record(cfg)
            else:
                t = t_rel * tmin
                res = optimize_point(cfg, t)
                rec = SweepRecord(t_rel, t, res.best_fidelity, 1.0 - res.best_fidelity, res.seed_used, res.iterations_run)
            records.append(rec)
            log.info("T/Tmin=%.4f F=%.12f seed=%d", rec.t_over_tmin, rec.best_fidelity, rec.seed_used)
            if progress is not None:
                progress(rec)
            if writer is not None:
                writer.writerow(rec.row())
                fh.flush()
    finally:
        if fh is not None:
            fh.close()
    return records


def find_threshold(records: Sequence[SweepRecord], threshold: float) -> float | None:
    """Smallest grid time (in units of T_min) whose best fidelity reaches ``threshold``."""
    for rec in sorted(records, key=lambda r: r.t_over_tmin):
        if rec.best_fidelity >= threshold:
            return rec.t_over_tmin
    return None


def impossibility_bound(device: DeviceParams, levels: int | None = None) -> float:
    """``pi / (2 ||H0||)`` for the coupling truncated to ``levels`` (default ``d_site``)."""
    return qudit_lower_bound(coupling_hamiltonian(device, levels))


def impossibility_violations(
    records: Iterable[SweepRecord], bound_seconds: float, threshold: float = IMPOSSIBILITY_FIDELITY
) -> list[SweepRecord]:
    """Records faster than the certified bound that still reach ``threshold``."""
    return [r for r in records if r.t_seconds < bound_seconds and r.best_fidelity >= threshold]


def write_csv(records: Sequence[SweepRecord], path: Path | str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for rec in records:
            w.writerow(rec.row())
    return path


def read_csv(path: Path | str) -> list[SweepRecord]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = tuple(next(reader))
        if header != CSV_HEADER:
            raise ConfigError(f"{path}: unexpected CSV header {header}")
        out = []
        for row in reader:
            if not row:
                continue
            out.append(
                SweepRecord(float(row[0]), float(row[1]), float(row[2]), float(row[3]), int(row[4]), int(row[5]))
            )
    return out


def _svg_plot(records: Sequence[SweepRecord], path: Path, title: str):
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    t = np.array([r.t_over_tmin for r in records])
    f = np.array([r.best_fidelity for r in records])
    infid = np.maximum(np.array([r.infidelity for r in records]), LOG_FLOOR)
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9, 3.6))
    ax1.plot(t, f, "o-", ms=3)
    ax1.set_ylim(0.0, 1.0)
    ax1.set_xlabel("T / T_min")
    ax1.set_ylabel("fidelity F")
    ax2.semilogy(t, infid, "o-", ms=3)
    ax2.set_ylim(bottom=LOG_FLOOR / 2)
    ax2.set_xlabel("T / T_min")
    ax2.set_ylabel("1 - F")
    for ax in (ax1, ax2):
        ax.grid(alpha=0.3)
    if title:
        fig.suptitle(title)
    fig.tight_layout()
    fig.savefig(path, format="svg")
    plt.close(fig)


def emit_report(records: Sequence[SweepRecord], stem: Path | str, formats=("csv", "svg"), title: str = "") -> list[Path]:
    """Write ``<stem>.csv`` and/or ``<stem>.svg``; returns the written paths."""
    if not records:
        raise ValueError("cannot emit a report for an empty sweep")
    stem = Path(stem)
    stem.parent.mkdir(parents=True, exist_ok=True)
    out = []
    for fmt in formats:
        if fmt == "csv":
            out.append(write_csv(records, stem.with_suffix(".csv")))
        elif fmt == "svg":
            p = stem.with_suffix(".svg")
            _svg_plot(records, p, title)
            out.append(p)
        else:
            raise ConfigError(f"unknown report format {fmt!r}")
    return out


def write_pulse_csv(schedule: PulseSchedule | OrtPulseSchedule, path: Path | str) -> Path:
    """Dump segment amplitudes (rad/s), one row per segment or step."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    if isinstance(schedule, PulseSchedule):
        n = schedule.segments
        d = schedule.d_site
        cols = [f"omega_q{i + 1}_{q}{j}" for i in range(2) for q in "xy" for j in range(d - 1)]
        mat = schedule.step_matrix()
    else:
        n = schedule.steps
        cols = ["omega_q1", "omega_q2"]
        mat = schedule.step_matrix()
    dt = schedule.total_time / n
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["segment", "t_start", "t_end", *cols])
        for m in range(n):
            w.writerow([m + 1, f"{m * dt:.17g}", f"{(m + 1) * dt:.17g}", *(f"{v:.17g}" for v in mat[m])])
    return path


# ---------------------------------------------------------------- config files

def parse_grid(text: str) -> tuple[float, ...]:
    """``"a:b:step"`` (inclusive) or a comma-separated list."""
    text = text.strip()
    if ":" in text:
        try:
            a, b, step = (float(x) for x in text.split(":"))
        except ValueError:
            raise ConfigError(f"bad grid spec {text!r}") from None
        if step <= 0:
            raise ConfigError("grid step must be positive")
        n = int(math.floor((b - a) / step + 1e-9)) + 1
        return tuple(round(a + i * step, 10) for i in range(n))
    try:
        return tuple(float(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise ConfigError(f"bad grid spec {text!r}") from None


_DEVICE_KEYS = {"g_mhz", "omega1_ghz", "omega2_ghz", "alpha_mhz", "d_site", "leakage_levels"}
_SWEEP_KEYS = {"gate", "grid", "optimizer", "ort", "output"}


def device_from_mapping(m: dict) -> DeviceParams:
    unknown = set(m) - _DEVICE_KEYS
    if unknown:
        raise ConfigError(f"unknown [device] keys: {sorted(unknown)}")
    base = DeviceParams()
    try:
        g = TWO_PI * 1e6 * float(m["g_mhz"]) if "g_mhz" in m else base.g
        w1 = TWO_PI * 1e9 * float(m["omega1_ghz"]) if "omega1_ghz" in m else base.omega[0]
        w2 = TWO_PI * 1e9 * float(m["omega2_ghz"]) if "omega2_ghz" in m else base.omega[1]
        a = TWO_PI * 1e6 * float(m["alpha_mhz"]) if "alpha_mhz" in m else base.alpha[0]
        d = int(m.get("d_site", base.d_site))
        leak = int(m.get("leakage_levels", base.leakage_levels))
    except ValueError as exc:
        raise ConfigError(f"[device]: {exc}") from None
    return DeviceParams(g=g, omega=(w1, w2), alpha=(a, a), d_site=d, leakage_levels=leak)


def optimizer_from_mapping(m: dict, base: OptimizerConfig | None = None) -> OptimizerConfig:
    base = base or OptimizerConfig(**DESK_BUDGET)
    types = {f.name: f.type for f in fields(OptimizerConfig)}
    changes = {}
    for key, raw in m.items():
        if key not in types:
            raise ConfigError(f"unknown [optimizer] key {key!r}")
        default = getattr(base, key)
        try:
            if key in ("cap", "threads") and str(raw).strip().lower() in ("", "none"):
                changes[key] = None
            elif key in ("iterations", "seeds", "rng_seed_base", "segments", "grape_steps", "threads"):
                changes[key] = int(raw)
            else:
                changes[key] = float(raw) if not isinstance(default, bool) else _parse_bool(raw)
        except ValueError:
            raise ConfigError(f"[optimizer] {key}: cannot parse {raw!r}") from None
    return base.with_(**changes)


def _parse_bool(raw) -> bool:
    s = str(raw).strip().lower()
    if s in ("1", "true", "yes", "on"):
        return True
    if s in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"not a boolean: {raw!r}")


def load_config_file(path: Path | str) -> dict[str, dict[str, str]]:
    """Read an INI-style file with ``[device]``, ``[sweep]`` and ``[optimizer]`` sections."""
    cp = configparser.ConfigParser()
    try:
        with open(path) as fh:
            cp.read_file(fh)
    except configparser.Error as exc:
        raise ConfigError(f"{path}: {exc}") from None
    extra = set(cp.sections()) - {"device", "sweep", "optimizer"}
    if extra:
        raise ConfigError(f"{path}: unknown sections {sorted(extra)}")
    return {s: dict(cp[s]) for s in ("device", "sweep", "optimizer") if cp.has_section(s)}


def sweep_config_from_sections(sections: dict[str, dict[str, str]], opt_base: OptimizerConfig | None = None) -> SweepConfig:
    dev = device_from_mapping(sections.get("device", {}))
    sw = sections.get("sweep", {})
    unknown = set(sw) - _SWEEP_KEYS
    if unknown:
        raise ConfigError(f"unknown [sweep] keys: {sorted(unknown)}")
    opt = optimizer_from_mapping(sections.get("optimizer", {}), opt_base)
    return SweepConfig(
        device=dev,
        gate=sw.get("gate", "CZ"),
        grid=parse_grid(sw["grid"]) if "grid" in sw else FIG2_GRID,
        optimizer=sw.get("optimizer", "quopt"),
        ort=_parse_bool(sw.get("ort", "false")),
        opt=opt,
        output=Path(sw["output"]) if sw.get("output") else None,
    )
