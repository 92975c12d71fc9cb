import numpy as np
import pytest

from qspeed.device import DeviceParams, OrtPulseSchedule, PulseSchedule, propagate_ort, propagate_segmented
from qspeed.errors import ConfigError
from qspeed.fidelity import avg_gate_fidelity_closed, identity_gate, infidelity, subspace_fidelity, target_cz
from qspeed.optimize import (
    OptimizerConfig,
    _run_quopt_seed,
    descend,
    infidelity_gradient,
    multi_seed_search,
    optimize_grape,
    optimize_quopt,
    ort_infidelity_gradient,
    quopt_problem,
)


def fd_gradient(p, s, target, h):
    grad = np.zeros_like(s.amplitudes)
    for idx in np.ndindex(s.amplitudes.shape):
        a = s.amplitudes.copy()
        a[idx] += h
        rp = infidelity(target, propagate_segmented(p, PulseSchedule(s.total_time, a)))
        a[idx] -= 2 * h
        rm = infidelity(target, propagate_segmented(p, PulseSchedule(s.total_time, a)))
        grad[idx] = (rp - rm) / (2 * h)
    return grad


def assert_grad_close(analytic, numeric, rel=1e-4, floor=1e-8):
    err = np.abs(analytic - numeric)
    assert np.all(err <= rel * np.abs(numeric) + floor * max(1.0, np.max(np.abs(numeric)))), np.max(err)


@pytest.mark.parametrize("d, m", [(2, 3), (3, 2), (3, 4)])
def test_gradient_matches_finite_differences(d, m):
    p = DeviceParams(d_site=d)
    rng = np.random.default_rng(d * 10 + m)
    t = 1.1 * p.qubit_tmin
    s = PulseSchedule(t, rng.uniform(-8, 8, (2, 2, d - 1, m)) * p.g)
    target = target_cz(d)
    analytic = infidelity_gradient(p, s, target)
    numeric = fd_gradient(p, s, target, 1e-6 * p.g)
    # scale to dimensionless units before comparing
    assert_grad_close(analytic * p.g, numeric * p.g)


def test_gradient_vanishes_at_perfect_gate():
    p = DeviceParams(d_site=3)
    s = PulseSchedule(2 * p.qubit_tmin, np.random.default_rng(1).uniform(-3, 3, (2, 2, 2, 4)) * p.g)
    reached = propagate_segmented(p, s)
    from qspeed.fidelity import TargetGate

    grad = infidelity_gradient(p, s, TargetGate(9, reached, "self"))
    assert np.linalg.norm(grad * p.g) <= 1e-6


def test_gradient_swap_symmetry():
    # CZ and H0 are symmetric under exchanging the qudits
    p = DeviceParams(d_site=3)
    rng = np.random.default_rng(5)
    per_qudit = rng.uniform(-5, 5, (1, 2, 2, 3)) * p.g
    s = PulseSchedule(p.qubit_tmin, np.concatenate([per_qudit, per_qudit]))
    grad = infidelity_gradient(p, s, target_cz(3))
    assert np.allclose(grad[0], grad[1], atol=1e-12 * np.max(np.abs(grad)))


def test_ort_gradient_matches_finite_differences():
    p = DeviceParams(d_site=3)
    rng = np.random.default_rng(9)
    s = OrtPulseSchedule(p.qubit_tmin, rng.uniform(-10, 10, (2, 5)) * p.g)
    cz = target_cz(3)
    analytic = ort_infidelity_gradient(p, s, cz) * p.g
    h = 1e-6 * p.g
    numeric = np.zeros_like(analytic)
    for idx in np.ndindex(s.envelope.shape):
        e = s.envelope.copy()
        e[idx] += h
        rp = 1 - subspace_fidelity(cz, propagate_ort(p, OrtPulseSchedule(s.total_time, e)), 4)
        e[idx] -= 2 * h
        rm = 1 - subspace_fidelity(cz, propagate_ort(p, OrtPulseSchedule(s.total_time, e)), 4)
        numeric[idx] = (rp - rm) / (2 * h) * p.g
    assert_grad_close(analytic, numeric)


def test_config_validation():
    with pytest.raises(ConfigError):
        OptimizerConfig(seeds=0)
    with pytest.raises(ConfigError):
        OptimizerConfig(momentum=1.0)
    with pytest.raises(ConfigError):
        OptimizerConfig(learning_rate=0.0)
    assert OptimizerConfig().resolved_cap(DeviceParams()) == pytest.approx(40 * DeviceParams().g)


def test_identity_target_from_zero_init():
    p = DeviceParams(d_site=3)
    cfg = OptimizerConfig(iterations=200, seeds=1, tol=0.0)
    zeros = np.zeros((cfg.segments, 8))
    # g T << 1: the free coupling evolution is already close to the identity
    res = _run_quopt_seed(p, identity_gate(3), 3e-4 / p.g, cfg, 0, cfg.segments, init=zeros)
    assert res.best_infidelity <= 1e-6
    # at g T = 0.1 the local drives have to echo the coupling phase out
    res = _run_quopt_seed(p, identity_gate(3), 0.1 / p.g, cfg, 0, cfg.segments)
    assert res.best_infidelity < 0.02 * (1 - res.fidelity_trace[0])


def test_qubit_cz_improves_and_respects_cap():
    p = DeviceParams(d_site=2)
    cfg = OptimizerConfig(iterations=300, seeds=2, cap_over_g=3.0, init_fraction=1.0)
    res = optimize_quopt(p, target_cz(2), 1.5 * p.qubit_tmin, cfg)
    cap = cfg.resolved_cap(p)
    assert np.max(np.abs(res.best_schedule.amplitudes)) <= cap
    assert res.best_fidelity == pytest.approx(np.max(res.fidelity_trace))
    # reported fidelity belongs to the reported schedule
    u = propagate_segmented(p, res.best_schedule)
    assert avg_gate_fidelity_closed(target_cz(2), u) == pytest.approx(res.best_fidelity, abs=1e-12)
    assert res.fidelity_trace[0] < res.best_fidelity


def test_trace_running_max_and_range():
    p = DeviceParams(d_site=3)
    res = optimize_quopt(p, target_cz(3), 0.9 * p.qubit_tmin, OptimizerConfig(iterations=150, seeds=1))
    tr = res.fidelity_trace
    assert np.all((tr >= -1e-12) & (tr <= 1 + 1e-12))
    run_max = np.maximum.accumulate(tr)
    assert np.all(np.diff(run_max) >= 0)
    assert run_max[-1] == res.best_fidelity


def test_zero_iterations_returns_initial_fidelity():
    p = DeviceParams(d_site=2)
    cfg = OptimizerConfig(iterations=0, seeds=1)
    res = optimize_quopt(p, target_cz(2), p.qubit_tmin, cfg)
    x0 = np.random.default_rng(0).uniform(-4, 4, (40, 4))
    f0 = avg_gate_fidelity_closed(target_cz(2), propagate_segmented(p, PulseSchedule.from_step_matrix(x0 * p.g, 2, p.qubit_tmin)))
    assert res.fidelity_trace.shape == (1,)
    assert res.best_fidelity == pytest.approx(f0, abs=1e-14)
    g_res = optimize_grape(p, target_cz(2), p.qubit_tmin, cfg.with_(grape_steps=50))
    assert len(g_res.fidelity_trace) == 1


def test_determinism_and_thread_independence():
    p = DeviceParams(d_site=2)
    cfg = OptimizerConfig(iterations=60, seeds=4, rng_seed_base=7)
    a = optimize_quopt(p, target_cz(2), p.qubit_tmin, cfg.with_(threads=1))
    b = optimize_quopt(p, target_cz(2), p.qubit_tmin, cfg.with_(threads=3))
    assert a.best_fidelity == b.best_fidelity
    assert a.seed_used == b.seed_used
    assert np.array_equal(a.fidelity_trace, b.fidelity_trace)
    assert a.extra["seed_fidelities"] == b.extra["seed_fidelities"]


def test_multi_seed_monotone_and_single_seed():
    p = DeviceParams(d_site=2)
    cfg = OptimizerConfig(iterations=40, seeds=5, threads=1)
    five = optimize_quopt(p, target_cz(2), 0.9 * p.qubit_tmin, cfg)
    one = optimize_quopt(p, target_cz(2), 0.9 * p.qubit_tmin, cfg.with_(seeds=1))
    assert five.best_fidelity >= one.best_fidelity
    single = _run_quopt_seed(p, target_cz(2), 0.9 * p.qubit_tmin, cfg, 0, cfg.segments)
    assert one.best_fidelity == single.best_fidelity
    assert np.array_equal(one.fidelity_trace, single.fidelity_trace)


def test_multi_seed_ties_go_to_lowest_seed():
    class R:
        def __init__(self, s):
            self.best_fidelity = 0.5
            self.seed_used = s
            self.iterations_run = 1
            self.extra = {}

    best = multi_seed_search(R, OptimizerConfig(seeds=4, rng_seed_base=3, threads=2))
    assert best.seed_used == 3


def test_descend_projection_is_exact():
    p = DeviceParams(d_site=2)
    prob = quopt_problem(p, target_cz(2), 3 * p.qubit_tmin, 10)
    x0 = np.random.default_rng(0).uniform(-5, 5, (10, 4))
    bx, *_ = descend(prob, x0, OptimizerConfig(iterations=50, learning_rate=50.0), cap_x=0.5)
    assert np.max(np.abs(bx)) <= 0.5


def test_grape_idealized_and_ort_smoke():
    p = DeviceParams(d_site=3)
    cfg = OptimizerConfig(iterations=20, seeds=1, grape_steps=60)
    ideal = optimize_grape(p, target_cz(3), 1.2 * p.qubit_tmin, cfg)
    assert isinstance(ideal.best_schedule, PulseSchedule) and ideal.best_schedule.segments == 60
    ort = optimize_grape(p, target_cz(3), 1.2 * p.qubit_tmin, cfg, ort=True)
    assert isinstance(ort.best_schedule, OrtPulseSchedule) and ort.best_schedule.steps == 60
    u = propagate_ort(p, ort.best_schedule)
    assert subspace_fidelity(target_cz(3), u, 4) == pytest.approx(ort.best_fidelity, abs=1e-12)
    with pytest.raises(ConfigError):
        optimize_grape(p, target_cz(3), 0.0, cfg)
