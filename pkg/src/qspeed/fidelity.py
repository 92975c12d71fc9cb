"""Target gates and average gate fidelity."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, NonUnitaryRealized, UnsupportedDimension
from .linalg import SUPPORTED_SITE_DIMS, OperatorBasis, as_matrix, is_unitary

REALIZED_UNITARY_TOL = 1e-8


@dataclass(frozen=True)
class TargetGate:
    dim: int
    matrix: np.ndarray
    label: str

    @property
    def d_site(self) -> int:
        return int(round(np.sqrt(self.dim)))


def target_cz(d_site: int) -> TargetGate:
    """Qudit CZ, ``CZ |k>|l> = exp(2 pi i k l / d) |k>|l>``."""
    if d_site not in SUPPORTED_SITE_DIMS:
        raise UnsupportedDimension(f"d_site must be one of {SUPPORTED_SITE_DIMS}, got {d_site}")
    k, l = np.divmod(np.arange(d_site * d_site), d_site)
    # reduce k*l mod d first so the phases are exact roots of unity
    phases = np.exp(2j * np.pi * ((k * l) % d_site) / d_site)
    return TargetGate(d_site * d_site, np.diag(phases), f"CZ{d_site}")


def identity_gate(d_site: int) -> TargetGate:
    return TargetGate(d_site * d_site, np.eye(d_site * d_site, dtype=complex), f"I{d_site}")


def _check_dims(target: TargetGate, realized: np.ndarray):
    if realized.shape != (target.dim, target.dim):
        raise DimensionMismatch(f"target is {target.dim}-dimensional, realized has shape {realized.shape}")


def avg_gate_fidelity_basis(target: TargetGate, realized, basis: OperatorBasis) -> float:
    """Average gate fidelity as a sum over a trace-orthogonal operator basis.

    ``F = (sum_j tr(W E_j^+ W^+ R E_j R^+) + d^2) / (d^2 (d + 1))`` with
    target ``W``, realized gate ``R`` and basis ``{E_j}``.
    """
    realized = as_matrix(realized)
    _check_dims(target, realized)
    if basis.dim != target.dim:
        raise DimensionMismatch("basis dimension does not match the target")
    if not is_unitary(realized, REALIZED_UNITARY_TOL):
        raise NonUnitaryRealized("realized gate is not unitary")
    return _basis_sum_fidelity(target.matrix, realized, basis)


def _basis_sum_fidelity(w: np.ndarray, r: np.ndarray, basis: OperatorBasis) -> float:
    d = w.shape[0]
    e = basis.stacked()
    m = w.conj().T @ r
    # tr(W E^+ W^+ R E R^+) = tr(E^+ M E M^+)
    left = np.conj(np.transpose(e, (0, 2, 1))) @ m
    right = e @ m.conj().T
    terms = np.einsum("jab,jba->j", left, right)
    total = terms.sum()
    if abs(total.imag) > 1e-9 * max(1.0, abs(total.real)):
        raise ArithmeticError(f"basis sum has imaginary residue {total.imag:.3e}")
    return float((total.real + d * d) / (d * d * (d + 1)))


def avg_gate_fidelity_closed(target: TargetGate, realized) -> float:
    """``(|tr(W^+ R)|^2 + d) / (d (d + 1))``."""
    realized = as_matrix(realized)
    _check_dims(target, realized)
    d = target.dim
    z = np.vdot(target.matrix, realized)
    return float((abs(z) ** 2 + d) / (d * (d + 1)))


def infidelity(target: TargetGate, realized) -> float:
    return 1.0 - avg_gate_fidelity_closed(target, realized)


def computational_indices(d_site: int, levels: int) -> np.ndarray:
    """Indices of ``|k>|l>``, ``k, l < d_site``, inside a ``levels x levels`` product space."""
    k, l = np.divmod(np.arange(d_site * d_site), d_site)
    return k * levels + l


def embed_target(target: TargetGate, levels: int) -> np.ndarray:
    """Target matrix padded with zeros outside the computational subspace."""
    d_site = target.d_site
    n = levels * levels
    idx = computational_indices(d_site, levels)
    out = np.zeros((n, n), dtype=complex)
    out[np.ix_(idx, idx)] = target.matrix
    return out


def subspace_fidelity(target: TargetGate, realized, d_site_model: int) -> float:
    """Fidelity of the computational block ``P`` of a gate on an enlarged space.

    The basis-sum formula is applied to the (trace-decreasing) block, which
    reduces to ``(|tr(W^+ P)|^2 + d) / (d (d + 1))``.
    """
    realized = as_matrix(realized)
    if realized.shape[0] != d_site_model**2 or d_site_model < target.d_site:
        raise DimensionMismatch(
            f"realized shape {realized.shape} incompatible with {d_site_model} levels per qudit"
        )
    idx = computational_indices(target.d_site, d_site_model)
    block = realized[np.ix_(idx, idx)]
    d = target.dim
    z = np.vdot(target.matrix, block)
    return float((abs(z) ** 2 + d) / (d * (d + 1)))
