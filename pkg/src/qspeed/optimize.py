"""Gradient-based pulse optimization (segmented QuOpt path and fine-step GRAPE path).

Both paths minimize the closed-form infidelity ``r = 1 - F`` with exact
gradients from :mod:`qspeed._kernels`, using full-gradient descent with
Nesterov momentum and projection onto the amplitude box ``|Omega| <= cap``
after every update. Internally the parameters are ``Omega / g`` so a single
learning rate works across devices.
"""

from __future__ import annotations

import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from . import _kernels
from .device import (
    DeviceParams,
    OrtPulseSchedule,
    PulseSchedule,
    control_operators,
    coupling_hamiltonian,
    ort_drive_operators,
    ort_static_hamiltonian,
)
from .errors import ConfigError, DimensionMismatch
from .fidelity import TargetGate, embed_target


@dataclass(frozen=True)
class OptimizerConfig:
    """Optimizer settings.

    ``cap`` and ``learning_rate`` default to device-relative values: the cap
    is ``cap_over_g * g`` and the learning rate acts on ``Omega / g``.
    ``tol`` stops a run early once the infidelity falls below it.
    """

    iterations: int = 5000
    seeds: int = 50
    learning_rate: float = 0.8
    momentum: float = 0.99
    cap: float | None = None
    cap_over_g: float = 40.0
    rng_seed_base: int = 0
    init_fraction: float = 0.1
    segments: int = 40
    grape_steps: int = 10_000
    tol: float = 1e-12
    threads: int | None = None

    def __post_init__(self):
        if self.iterations < 0:
            raise ConfigError("iterations must be >= 0")
        if self.seeds < 1:
            raise ConfigError("seeds must be >= 1")
        if not self.learning_rate > 0:
            raise ConfigError("learning_rate must be positive")
        if not 0 <= self.momentum < 1:
            raise ConfigError("momentum must lie in [0, 1)")
        if self.segments < 1 or self.grape_steps < 1:
            raise ConfigError("segments and grape_steps must be >= 1")

    def resolved_cap(self, p: DeviceParams) -> float:
        return self.cap if self.cap is not None else self.cap_over_g * p.g

    def with_(self, **changes) -> "OptimizerConfig":
        return replace(self, **changes)


@dataclass
class OptimizationResult:
    best_schedule: PulseSchedule | OrtPulseSchedule
    best_fidelity: float
    fidelity_trace: np.ndarray
    seed_used: int
    wall_time: float
    iterations_run: int = 0
    extra: dict = field(default_factory=dict)

    @property
    def best_infidelity(self) -> float:
        return 1.0 - self.best_fidelity


@dataclass(frozen=True)
class ControlProblem:
    """Flattened control problem: ``U = prod_s exp(-i (h0 + sum_k x[s,k] g ops[k]) dt)``.

    ``overlap`` is the (possibly zero-padded) target adjoint so that
    ``z = tr(overlap @ U)``; ``dim`` is the computational dimension ``d``.
    """

    h0: np.ndarray
    ops: np.ndarray
    dt: float
    steps: int
    overlap: np.ndarray
    dim: int
    scale: float

    @property
    def n_controls(self) -> int:
        return self.ops.shape[0]

    def fidelity(self, x: np.ndarray) -> float:
        u = _kernels.propagate(self.h0, self.ops, x * self.scale, self.dt)
        z = np.trace(self.overlap @ u)
        d = self.dim
        return float((abs(z) ** 2 + d) / (d * (d + 1)))

    def infidelity_and_grad(self, x: np.ndarray) -> tuple[float, np.ndarray]:
        """Infidelity and its gradient with respect to ``x`` (amplitudes over ``scale``)."""
        u, dz = _kernels.propagate_with_gradient(self.h0, self.ops, x * self.scale, self.dt, self.overlap)
        z = np.trace(self.overlap @ u)
        d = self.dim
        norm = d * (d + 1)
        r = 1.0 - (abs(z) ** 2 + d) / norm
        grad = (-2.0 * self.scale / norm) * (z.real * dz.real + z.imag * dz.imag)
        return float(r), grad


def quopt_problem(p: DeviceParams, target: TargetGate, total_time: float, steps: int) -> ControlProblem:
    if target.dim != p.dim:
        raise DimensionMismatch(f"target dim {target.dim} != device dim {p.dim}")
    return ControlProblem(
        h0=coupling_hamiltonian(p),
        ops=np.asarray(control_operators(p.d_site)),
        dt=total_time / steps,
        steps=steps,
        overlap=np.ascontiguousarray(target.matrix.conj().T),
        dim=target.dim,
        scale=p.g,
    )


def ort_problem(p: DeviceParams, target: TargetGate, total_time: float, steps: int) -> ControlProblem:
    if target.d_site != p.d_site:
        raise DimensionMismatch("target and device disagree on d_site")
    n = p.ort_levels
    return ControlProblem(
        h0=ort_static_hamiltonian(p),
        ops=np.asarray(ort_drive_operators(n)),
        dt=total_time / steps,
        steps=steps,
        overlap=np.ascontiguousarray(embed_target(target, n).conj().T),
        dim=target.dim,
        scale=p.g,
    )


def infidelity_gradient(p: DeviceParams, s: PulseSchedule, target: TargetGate) -> np.ndarray:
    """Exact ``d r / d Omega`` (s/rad), same shape as ``s.amplitudes``."""
    prob = quopt_problem(p, target, s.total_time, s.segments)
    _, grad_x = prob.infidelity_and_grad(s.step_matrix() / p.g)
    grad = grad_x / p.g
    return grad.T.reshape(s.amplitudes.shape)


def ort_infidelity_gradient(p: DeviceParams, s: OrtPulseSchedule, target: TargetGate) -> np.ndarray:
    prob = ort_problem(p, target, s.total_time, s.steps)
    _, grad_x = prob.infidelity_and_grad(s.step_matrix() / p.g)
    return (grad_x / p.g).T.copy()


def step_scale(prob: ControlProblem) -> float:
    """Curvature normalization ``steps / (g T)^2`` applied to the learning rate.

    The largest Hessian eigenvalue of the infidelity in ``Omega / g``
    coordinates grows like ``(g T)^2 / steps``, so this keeps one learning
    rate stable across gate times and discretizations.
    """
    gt = prob.scale * prob.dt * prob.steps
    return prob.steps / (gt * gt)


def descend(
    prob: ControlProblem,
    x0: np.ndarray,
    cfg: OptimizerConfig,
    cap_x: float,
) -> tuple[np.ndarray, float, np.ndarray, int]:
    """Nesterov accelerated gradient with box projection and adaptive restart.

    The gradient is taken at the look-ahead point ``y = x + mu v``; whenever
    the infidelity at ``y`` rises above the previous evaluation the momentum
    is zeroed. Returns ``(best_x, best_fidelity, fidelity_trace,
    iterations_run)``: the trace holds the fidelity of every evaluated point
    and the returned point is the best one seen, not the last.
    """
    x = np.clip(np.array(x0, dtype=float), -cap_x, cap_x)
    v = np.zeros_like(x)
    lr = cfg.learning_rate * step_scale(prob)
    mu = cfg.momentum
    trace = []
    best_x, best_f = x.copy(), -np.inf
    r_prev = np.inf
    it = 0
    for it in range(cfg.iterations + 1):
        y = np.clip(x + mu * v, -cap_x, cap_x) if it else x
        r, grad = prob.infidelity_and_grad(y)
        f = 1.0 - r
        trace.append(f)
        if f > best_f:
            best_f, best_x = f, y.copy()
        if it == cfg.iterations or r <= cfg.tol:
            break
        if r > r_prev:
            v[:] = 0.0
        r_prev = r
        x_new = np.clip(y - lr * grad, -cap_x, cap_x)
        v = x_new - x
        x = x_new
    return best_x, float(best_f), np.asarray(trace), it


def _initial(rng: np.random.Generator, shape, cap_x: float, fraction: float) -> np.ndarray:
    a = fraction * cap_x
    return rng.uniform(-a, a, size=shape)


def _run_quopt_seed(p, target, total_time, cfg, seed, steps, init=None) -> OptimizationResult:
    t0 = time.perf_counter()
    cap = cfg.resolved_cap(p)
    cap_x = cap / p.g
    prob = quopt_problem(p, target, total_time, steps)
    rng = np.random.default_rng(seed)
    x0 = _initial(rng, (steps, prob.n_controls), cap_x, cfg.init_fraction) if init is None else init
    bx, bf, trace, its = descend(prob, x0, cfg, cap_x)
    sched = PulseSchedule.from_step_matrix(bx * p.g, p.d_site, total_time, cap)
    return OptimizationResult(sched, bf, trace, seed, time.perf_counter() - t0, its)


def _run_ort_seed(p, target, total_time, cfg, seed, steps) -> OptimizationResult:
    t0 = time.perf_counter()
    cap = cfg.resolved_cap(p)
    cap_x = cap / p.g
    prob = ort_problem(p, target, total_time, steps)
    rng = np.random.default_rng(seed)
    x0 = _initial(rng, (steps, prob.n_controls), cap_x, cfg.init_fraction)
    bx, bf, trace, its = descend(prob, x0, cfg, cap_x)
    sched = OrtPulseSchedule(total_time, (bx * p.g).T.copy(), cap)
    return OptimizationResult(sched, bf, trace, seed, time.perf_counter() - t0, its)


def _thread_count(cfg: OptimizerConfig) -> int:
    if cfg.threads is not None:
        return max(1, cfg.threads)
    env = os.environ.get("QSPEED_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ConfigError(f"QSPEED_THREADS must be an integer, got {env!r}") from None
    return os.cpu_count() or 1


def multi_seed_search(run: Callable[[int], OptimizationResult], cfg: OptimizerConfig) -> OptimizationResult:
    """Run seeds ``rng_seed_base .. rng_seed_base + seeds - 1`` and keep the best.

    Ties go to the lowest seed, so the result does not depend on the number
    of worker threads.
    """
    seeds = [cfg.rng_seed_base + i for i in range(cfg.seeds)]
    workers = min(_thread_count(cfg), len(seeds))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run, seeds))
    else:
        results = [run(s) for s in seeds]
    best = results[0]
    for res in results[1:]:
        if res.best_fidelity > best.best_fidelity:
            best = res
    best.extra["seed_fidelities"] = [r.best_fidelity for r in results]
    best.extra["total_iterations"] = sum(r.iterations_run for r in results)
    return best


def _check_time(total_time: float):
    if not total_time > 0:
        raise ConfigError(f"total_time must be positive, got {total_time}")


def optimize_quopt(p: DeviceParams, target: TargetGate, total_time: float, cfg: OptimizerConfig) -> OptimizationResult:
    """Segmented optimization over ``cfg.segments`` piecewise-constant drives, best of ``cfg.seeds``."""
    _check_time(total_time)
    return multi_seed_search(
        lambda seed: _run_quopt_seed(p, target, total_time, cfg, seed, cfg.segments), cfg
    )


def optimize_grape(
    p: DeviceParams,
    target: TargetGate,
    total_time: float,
    cfg: OptimizerConfig,
    ort: bool = False,
) -> OptimizationResult:
    """Fine-step GRAPE over ``cfg.grape_steps`` steps.

    ``ort=False`` optimizes all ``4 (d - 1)`` transition drives of the
    idealized model at every step; ``ort=True`` optimizes the two real
    per-qudit envelopes of the Duffing-oscillator model, scoring the
    computational block of the enlarged propagator.
    """
    _check_time(total_time)
    steps = cfg.grape_steps
    if ort:
        return multi_seed_search(lambda seed: _run_ort_seed(p, target, total_time, cfg, seed, steps), cfg)
    return multi_seed_search(lambda seed: _run_quopt_seed(p, target, total_time, cfg, seed, steps), cfg)


GRAPE_SEEDS = 10
