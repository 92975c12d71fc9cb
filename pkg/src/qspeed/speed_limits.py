"""Analytic gate-time bounds and orthogonal-state-transfer witnesses.

Qubit gates use the canonical coefficients of ``exp(-i H t)`` with
``H = h1 XX + h2 YY + h3 ZZ``: under a coupling of strength ``g`` the
minimal time is ``(|h1| + |h2| + |h3|) / g``. For two qudits coupled by
``H_I`` the bound ``T* >= pi / (2 ||H_I||)`` applies to any gate that maps
some state to an orthogonal one.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog, minimize

from .device import DeviceParams, coupling_hamiltonian
from .errors import DimensionMismatch, NonpositiveCoupling, QSpeedError, ZeroHamiltonian
from .fidelity import TargetGate, target_cz
from .linalg import as_matrix, is_hermitian, operator_norm

WITNESS_TOL = 1e-8


@dataclass(frozen=True)
class CanonicalCoefficients:
    """Canonical-form coefficients, ordered ``h1 >= h2 >= |h3|``.

    Values are the dimensionless multiples entering the qubit bound
    (the same quantities are sometimes written ``lambda_x, lambda_y, lambda_z``).
    """

    h1: float
    h2: float
    h3: float

    def __post_init__(self):
        if not (self.h1 >= self.h2 >= abs(self.h3)):
            raise ValueError(f"coefficients must satisfy h1 >= h2 >= |h3|, got {self}")

    @property
    def l1(self) -> float:
        return abs(self.h1) + abs(self.h2) + abs(self.h3)


_Q = np.pi / 4
CANONICAL_TABLE: dict[str, CanonicalCoefficients] = {
    "I": CanonicalCoefficients(0.0, 0.0, 0.0),
    "CZ": CanonicalCoefficients(_Q, 0.0, 0.0),
    "CNOT": CanonicalCoefficients(_Q, 0.0, 0.0),
    "ISWAP": CanonicalCoefficients(_Q, _Q, 0.0),
    "SQRT_ISWAP": CanonicalCoefficients(_Q / 2, _Q / 2, 0.0),
    "SWAP": CanonicalCoefficients(_Q, _Q, _Q),
}


def canonical_coefficients(gate: str) -> CanonicalCoefficients:
    try:
        return CANONICAL_TABLE[gate.upper()]
    except KeyError:
        raise QSpeedError(f"no canonical coefficients tabulated for {gate!r}") from None


def qubit_gate_tmin(coeffs: CanonicalCoefficients, g: float) -> float:
    """Minimal qubit gate time ``(|h1| + |h2| + |h3|) / g`` in seconds."""
    if not g > 0:
        raise NonpositiveCoupling(f"coupling must be positive, got {g}")
    return coeffs.l1 / g


def qudit_lower_bound(h_interaction) -> float:
    """``pi / (2 ||H_I||)`` for an interaction Hamiltonian in rad/s."""
    h = as_matrix(h_interaction)
    if not is_hermitian(h):
        raise ValueError("interaction Hamiltonian must be Hermitian")
    norm = operator_norm(h)
    if norm == 0.0:
        raise ZeroHamiltonian("interaction Hamiltonian is zero")
    return np.pi / (2.0 * norm)


def orthogonal_transfer_witness(target: TargetGate, psi) -> complex:
    """Overlap ``<psi| U |psi>``; zero certifies an orthogonal state transfer."""
    psi = np.asarray(psi, dtype=complex).ravel()
    if psi.shape[0] != target.dim:
        raise DimensionMismatch(f"state has {psi.shape[0]} amplitudes, gate acts on {target.dim}")
    norm = np.linalg.norm(psi)
    if abs(norm - 1.0) > 1e-12:
        raise ValueError(f"state must be normalized, |psi| = {norm!r}")
    return complex(np.vdot(psi, target.matrix @ psi))


def uniform_witness_state(d_site: int) -> np.ndarray:
    """``|1> (x) (|0> + ... + |d-1>) / sqrt(d)``."""
    a = np.zeros(d_site, dtype=complex)
    a[1] = 1.0
    b = np.full(d_site, 1.0 / np.sqrt(d_site), dtype=complex)
    return np.kron(a, b)


def _simplex_grid(d: int, resolution: int):
    for c in itertools.product(range(resolution + 1), repeat=d - 1):
        if sum(c) <= resolution:
            yield np.array(c + (resolution - sum(c),), dtype=float) / resolution


def _zero_in_hull(points: np.ndarray) -> bool:
    """Whether 0 lies in the convex hull of the complex numbers ``points``."""
    a_eq = np.vstack([points.real, points.imag, np.ones(points.size)])
    out = linprog(np.zeros(points.size), A_eq=a_eq, b_eq=[0.0, 0.0, 1.0], bounds=(0, None), method="highs")
    return out.status == 0


def witness_search(target: TargetGate, resolution: int | None = None) -> np.ndarray | None:
    """Search product states ``a (x) b`` with ``<psi|U|psi> = 0`` for a diagonal ``U``.

    For diagonal ``U`` the overlap only depends on the populations
    ``p = |a|^2`` and ``q = |b|^2``: ``<psi|U|psi> = p^T D q`` with
    ``D[k, l] = U[kl, kl]``. A coarse simplex grid is scanned and the best
    candidates are refined with Nelder-Mead on a softmax parametrization.
    Returns the normalized state or ``None`` when nothing reaches
    ``|overlap| <= 1e-8``.
    """
    m = target.matrix
    if np.max(np.abs(m - np.diag(np.diag(m)))) > 1e-12:
        raise QSpeedError("witness_search requires a diagonal target")
    d = target.d_site
    if d * d != target.dim:
        raise DimensionMismatch("target is not a two-qudit gate with equal site dimensions")
    dmat = np.diag(m).reshape(d, d)
    if not _zero_in_hull(dmat.ravel()):
        # p^T D q is a convex combination of the entries of D
        return None
    res = 2 * d if resolution is None else resolution
    grid = list(_simplex_grid(d, res))
    gp = np.stack(grid)
    overlaps = np.abs(gp @ dmat @ gp.T)
    flat = np.argsort(overlaps, axis=None)
    i, j = np.unravel_index(flat[0], overlaps.shape)

    def state(p, q):
        return np.kron(np.sqrt(p), np.sqrt(q)).astype(complex)

    if overlaps[i, j] <= WITNESS_TOL:
        return state(gp[i], gp[j])

    def unpack(theta):
        u, w = theta[:d], theta[d:]
        p = np.exp(u - u.max())
        q = np.exp(w - w.max())
        return p / p.sum(), q / q.sum()

    def cost(theta):
        p, q = unpack(theta)
        return abs(p @ dmat @ q) ** 2

    for k in flat[:8]:
        i, j = np.unravel_index(k, overlaps.shape)
        theta0 = np.concatenate([np.log(gp[i] + 1e-3), np.log(gp[j] + 1e-3)])
        out = minimize(cost, theta0, method="Nelder-Mead", options=dict(xatol=1e-12, fatol=1e-24, maxiter=20000))
        p, q = unpack(out.x)
        if abs(p @ dmat @ q) <= WITNESS_TOL:
            return state(p, q)
    return None


@dataclass(frozen=True)
class SpeedLimitReport:
    gate_label: str
    qubit_tmin: float
    qudit_lower_bound: float
    ratio: float
    witness_state: np.ndarray | None
    witness_overlap: complex | None
    h_norm: float

    def lines(self) -> list[str]:
        out = [
            f"gate: {self.gate_label}",
            f"qubit CZ T_min: {self.qubit_tmin * 1e9:.4f} ns",
            f"||H_I||: {self.h_norm:.6e} rad/s",
            f"qudit lower bound pi/(2||H_I||): {self.qudit_lower_bound * 1e9:.4f} ns",
            f"ratio bound / T_min: {self.ratio:.6f}",
        ]
        if self.witness_state is None:
            out.append("witness: none found")
        else:
            out.append(f"witness |<psi|U|psi>|: {abs(self.witness_overlap):.3e}")
            out.append("witness state: " + " ".join(f"{c.real:+.6f}" for c in self.witness_state))
        return out


def speed_limit_report(p: DeviceParams, gate: TargetGate | None = None) -> SpeedLimitReport:
    """Qubit CZ limit, qudit operator-norm bound and orthogonal-transfer witness for ``gate``.

    The interaction Hamiltonian is the coupling ``H0`` at ``p.d_site`` levels.
    """
    gate = target_cz(p.d_site) if gate is None else gate
    tmin = qubit_gate_tmin(CANONICAL_TABLE["CZ"], p.g)
    h = coupling_hamiltonian(p)
    bound = qudit_lower_bound(h)
    psi = uniform_witness_state(gate.d_site)
    overlap = orthogonal_transfer_witness(gate, psi)
    if abs(overlap) > WITNESS_TOL:
        psi = witness_search(gate)
        overlap = None if psi is None else orthogonal_transfer_witness(gate, psi / np.linalg.norm(psi))
    return SpeedLimitReport(gate.label, tmin, bound, bound / tmin, psi, overlap, operator_norm(h))
