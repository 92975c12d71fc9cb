"""Optimal-control CZ gates on coupled transmon qudits, and the speed limits they run into."""

from ._kernels import BACKEND_NAME
from .device import DeviceParams, OrtPulseSchedule, PulseSchedule, propagate_ort, propagate_segmented
from .experiment import SweepConfig, SweepRecord, emit_report, find_threshold, run_sweep
from .fidelity import (
    TargetGate,
    avg_gate_fidelity_basis,
    avg_gate_fidelity_closed,
    subspace_fidelity,
    target_cz,
)
from .linalg import BasisKind, OperatorBasis, build_basis, matexp, operator_norm
from .optimize import OptimizationResult, OptimizerConfig, optimize_grape, optimize_quopt
from .speed_limits import (
    orthogonal_transfer_witness,
    qubit_gate_tmin,
    qudit_lower_bound,
    speed_limit_report,
    witness_search,
)

__version__ = "0.1.0"

__all__ = [
    "BACKEND_NAME",
    "BasisKind",
    "DeviceParams",
    "OperatorBasis",
    "OptimizationResult",
    "OptimizerConfig",
    "OrtPulseSchedule",
    "PulseSchedule",
    "SweepConfig",
    "SweepRecord",
    "TargetGate",
    "avg_gate_fidelity_basis",
    "avg_gate_fidelity_closed",
    "build_basis",
    "emit_report",
    "find_threshold",
    "matexp",
    "operator_norm",
    "optimize_grape",
    "optimize_quopt",
    "orthogonal_transfer_witness",
    "propagate_ort",
    "propagate_segmented",
    "qubit_gate_tmin",
    "qudit_lower_bound",
    "run_sweep",
    "speed_limit_report",
    "subspace_fidelity",
    "target_cz",
    "witness_search",
]
