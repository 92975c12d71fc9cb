"""Dense complex linear algebra and single/two-site operator constructors.

All matrices are plain ``numpy.ndarray`` objects of dtype ``complex128``.
Dimensions in this package never exceed 16 x 16 (two ququarts), so every
routine here is dense.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import (
    InvalidDimension,
    InvalidTransition,
    NonHermitianInput,
    UnsupportedDimension,
)

HERMITIAN_TOL = 1e-10
UNITARY_TOL = 1e-10
EQUALITY_TOL = 1e-9

SUPPORTED_SITE_DIMS = (2, 3, 4)


class BasisKind(enum.Enum):
    GELL_MANN_PRODUCTS = "gellmann"
    WEYL_UNITARIES = "weyl"


class Quadrature(enum.Enum):
    X = "x"
    Y = "y"


def as_matrix(m) -> np.ndarray:
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
        raise InvalidDimension(f"expected a non-empty square matrix, got shape {a.shape}")
    return a


def is_hermitian(h, tol: float = HERMITIAN_TOL) -> bool:
    h = as_matrix(h)
    # relative to the matrix scale: physical Hamiltonians here are O(1e9) rad/s
    scale = max(1.0, float(np.max(np.abs(h))))
    return float(np.max(np.abs(h - h.conj().T))) <= tol * scale


def is_unitary(u, tol: float = UNITARY_TOL) -> bool:
    u = as_matrix(u)
    return float(np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0])))) <= tol


def kron(a, b) -> np.ndarray:
    """Kronecker product, ``out[i*nb + k, j*nb + l] = a[i, j] * b[k, l]``."""
    return np.kron(as_matrix(a), as_matrix(b))


def matexp(h, t: float) -> np.ndarray:
    """Return ``exp(-1j * h * t)`` for Hermitian ``h``.

    Computed from the Hermitian eigendecomposition ``h = V diag(w) V^dagger``,
    which keeps the result unitary to solver precision.
    """
    h = as_matrix(h)
    if not is_hermitian(h):
        raise NonHermitianInput("matexp requires a Hermitian generator")
    w, v = np.linalg.eigh(0.5 * (h + h.conj().T))
    return (v * np.exp(-1j * w * t)) @ v.conj().T


def operator_norm(m) -> float:
    """Largest singular value."""
    return float(np.linalg.norm(as_matrix(m), 2))


def annihilation(d: int) -> np.ndarray:
    """Truncated ladder operator with ``<k|a|l> = sqrt(l) delta_{k,l-1}``."""
    if d < 2:
        raise InvalidDimension(f"annihilation operator needs d >= 2, got {d}")
    return np.diag(np.sqrt(np.arange(1, d, dtype=float)), k=1).astype(complex)


def position(d: int) -> np.ndarray:
    """``a + a^dagger`` truncated to ``d`` levels."""
    a = annihilation(d)
    return a + a.conj().T


def number(d: int) -> np.ndarray:
    return np.diag(np.arange(d, dtype=float)).astype(complex)


def transition_operator(d: int, j: int, quadrature: Quadrature | str) -> np.ndarray:
    """Pauli-like drive operator on the ``|j> <-> |j+1>`` transition.

    ``X`` has ones at ``(j, j+1)`` and ``(j+1, j)``; ``Y`` has ``-i`` at
    ``(j, j+1)`` and ``+i`` at ``(j+1, j)``.
    """
    if d < 2:
        raise InvalidDimension(f"transition operator needs d >= 2, got {d}")
    if not 0 <= j <= d - 2:
        raise InvalidTransition(f"transition index {j} out of range for d={d}")
    q = Quadrature(quadrature) if not isinstance(quadrature, Quadrature) else quadrature
    m = np.zeros((d, d), dtype=complex)
    if q is Quadrature.X:
        m[j, j + 1] = 1.0
        m[j + 1, j] = 1.0
    else:
        m[j, j + 1] = -1j
        m[j + 1, j] = 1j
    return m


def embed(op, site: int, dims: tuple[int, int]) -> np.ndarray:
    """Place a single-site operator on ``site`` (0 or 1) of a two-site space."""
    eye_other = np.eye(dims[1 - site], dtype=complex)
    return kron(op, eye_other) if site == 0 else kron(eye_other, op)


def gell_mann(d: int) -> list[np.ndarray]:
    """Generalized Gell-Mann matrices for ``su(d)``, ``tr(l_j l_k) = 2 delta_jk``.

    Order: symmetric, antisymmetric, then diagonal. For ``d=2`` these are
    ``sigma_x, sigma_y, sigma_z``.
    """
    sym, anti, diag = [], [], []
    for j in range(d):
        for k in range(j + 1, d):
            s = np.zeros((d, d), dtype=complex)
            s[j, k] = s[k, j] = 1.0
            sym.append(s)
            a = np.zeros((d, d), dtype=complex)
            a[j, k] = -1j
            a[k, j] = 1j
            anti.append(a)
    for l in range(1, d):
        m = np.zeros((d, d), dtype=complex)
        m[np.arange(l), np.arange(l)] = 1.0
        m[l, l] = -l
        diag.append(np.sqrt(2.0 / (l * (l + 1))) * m)
    return sym + anti + diag


def weyl_operators(d: int) -> list[np.ndarray]:
    """Clock-and-shift unitaries ``X^a Z^b`` for ``a, b`` in ``0..d-1``."""
    shift = np.roll(np.eye(d, dtype=complex), 1, axis=0)
    clock = np.diag(np.exp(2j * np.pi * np.arange(d) / d))
    out = []
    for a in range(d):
        xa = np.linalg.matrix_power(shift, a)
        for b in range(d):
            out.append(xa @ np.linalg.matrix_power(clock, b))
    return out


@dataclass(frozen=True)
class OperatorBasis:
    """Trace-orthogonal operator basis of a two-site space.

    Every element satisfies ``tr(E_j^dagger E_k) = dim * delta_jk`` so the
    basis-sum fidelity formula applies to either kind.
    """

    dim: int
    elements: tuple[np.ndarray, ...]
    kind: BasisKind

    def __len__(self) -> int:
        return len(self.elements)

    def stacked(self) -> np.ndarray:
        return np.stack(self.elements)


def build_basis(d_site: int, kind: BasisKind | str) -> OperatorBasis:
    """Two-site operator basis of dimension ``d_site**2``.

    ``GELL_MANN_PRODUCTS`` uses ``{I, l_1, ..., l_{d^2-1}}`` per site, each
    Gell-Mann matrix rescaled so ``tr(l^2) = d_site``; the identity product
    is included as the first element. ``WEYL_UNITARIES`` uses products of
    clock-and-shift operators.
    """
    if d_site not in SUPPORTED_SITE_DIMS:
        raise UnsupportedDimension(f"d_site must be one of {SUPPORTED_SITE_DIMS}, got {d_site}")
    kind = BasisKind(kind) if not isinstance(kind, BasisKind) else kind
    if kind is BasisKind.GELL_MANN_PRODUCTS:
        single = [np.eye(d_site, dtype=complex)]
        single += [np.sqrt(d_site / 2.0) * g for g in gell_mann(d_site)]
    else:
        single = weyl_operators(d_site)
    elements = tuple(kron(a, b) for a in single for b in single)
    return OperatorBasis(dim=d_site * d_site, elements=elements, kind=kind)


def random_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random unitary via QR of a Ginibre matrix."""
    z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    ph = np.diag(r) / np.abs(np.diag(r))
    return q * ph


def random_hermitian(n: int, rng: np.random.Generator, scale: float = 1.0) -> np.ndarray:
    z = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return scale * 0.5 * (z + z.conj().T)
