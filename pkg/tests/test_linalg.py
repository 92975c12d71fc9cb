import numpy as np
import pytest
from hypothesis import given, strategies as st

from qspeed.errors import InvalidDimension, InvalidTransition, NonHermitianInput, UnsupportedDimension
from qspeed.linalg import (
    BasisKind,
    Quadrature,
    annihilation,
    build_basis,
    embed,
    gell_mann,
    is_hermitian,
    is_unitary,
    kron,
    matexp,
    operator_norm,
    position,
    random_hermitian,
    random_unitary,
    transition_operator,
)

SX = np.array([[0, 1], [1, 0]], dtype=complex)
seeds = st.integers(min_value=0, max_value=2**32 - 1)


def test_kron_identity_and_pauli():
    assert np.array_equal(kron(np.eye(2), np.eye(2)), np.eye(4))
    assert np.array_equal(kron(SX, SX), np.fliplr(np.eye(4)))


def test_kron_index_convention(rng):
    a = rng.standard_normal((2, 2))
    b = rng.standard_normal((3, 3))
    k = kron(a, b)
    for i, j, m, n in [(0, 0, 0, 0), (1, 0, 2, 1), (1, 1, 0, 2)]:
        assert k[i * 3 + m, j * 3 + n] == a[i, j] * b[m, n]


def test_kron_position_norm():
    assert operator_norm(kron(position(3), position(3))) == pytest.approx(3.0, abs=1e-12)


@given(seeds)
def test_kron_mixed_product(seed):
    rng = np.random.default_rng(seed)
    a, b, c, d = (random_hermitian(3, rng) for _ in range(4))
    assert np.allclose(kron(a, b) @ kron(c, d), kron(a @ c, b @ d), atol=1e-12, rtol=0)


def test_matexp_examples():
    assert np.allclose(matexp(np.zeros((3, 3)), 1.7), np.eye(3), atol=1e-15)
    assert np.allclose(matexp(np.diag([1.0, 2.0]), np.pi), np.diag([-1.0, 1.0]), atol=1e-14)
    assert np.allclose(matexp(SX, np.pi / 2), -1j * SX, atol=1e-14)


def test_matexp_rejects_non_hermitian():
    with pytest.raises(NonHermitianInput):
        matexp(np.array([[0, 1], [0, 0]], dtype=complex), 1.0)


def test_matexp_unitary_random_dims():
    rng = np.random.default_rng(7)
    for _ in range(1000):
        n = int(rng.integers(2, 17))
        h = random_hermitian(n, rng, scale=float(rng.uniform(0.1, 10)))
        u = matexp(h, float(rng.uniform(-5, 5)))
        assert np.max(np.abs(u.conj().T @ u - np.eye(n))) <= 1e-10


@given(seeds, st.floats(-3, 3), st.floats(-3, 3))
def test_matexp_group_property(seed, t1, t2):
    rng = np.random.default_rng(seed)
    h = random_hermitian(int(rng.integers(2, 10)), rng)
    assert np.allclose(matexp(h, t1) @ matexp(h, t2), matexp(h, t1 + t2), atol=1e-10, rtol=0)


def test_operator_norm_examples():
    assert operator_norm(np.eye(4)) == pytest.approx(1.0)
    assert operator_norm(position(3)) == pytest.approx(np.sqrt(3), abs=1e-12)


@given(seeds)
def test_operator_norm_unitary_invariance(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 10))
    m = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    u, v = random_unitary(n, rng), random_unitary(n, rng)
    assert operator_norm(u @ m @ v) == pytest.approx(operator_norm(m), abs=1e-9)


def test_annihilation():
    assert np.array_equal(annihilation(2), np.array([[0, 1], [0, 0]]))
    assert np.allclose(annihilation(3), [[0, 1, 0], [0, 0, np.sqrt(2)], [0, 0, 0]])
    assert annihilation(4)[2, 3] == np.sqrt(3)
    for d in range(2, 7):
        a = annihilation(d)
        for k in range(d):
            for l in range(d):
                assert a[k, l] == (np.sqrt(l) if k == l - 1 else 0.0)
    with pytest.raises(InvalidDimension):
        annihilation(1)


def test_transition_operator():
    assert np.array_equal(transition_operator(2, 0, Quadrature.X), SX)
    expected = np.array([[0, 0, 0], [0, 0, -1j], [0, 1j, 0]])
    assert np.array_equal(transition_operator(3, 1, Quadrature.Y), expected)
    x = transition_operator(4, 2, "x")
    assert x[2, 3] == x[3, 2] == 1 and np.count_nonzero(x) == 2
    with pytest.raises(InvalidTransition):
        transition_operator(3, 2, Quadrature.X)
    with pytest.raises(InvalidTransition):
        transition_operator(3, -1, Quadrature.Y)


def test_embed_sites():
    op = transition_operator(3, 0, Quadrature.X)
    assert np.array_equal(embed(op, 0, (3, 3)), np.kron(op, np.eye(3)))
    assert np.array_equal(embed(op, 1, (3, 3)), np.kron(np.eye(3), op))


@pytest.mark.parametrize("d", [2, 3, 4])
def test_gell_mann_orthonormal(d):
    mats = gell_mann(d)
    assert len(mats) == d * d - 1
    for j, a in enumerate(mats):
        assert is_hermitian(a)
        assert abs(np.trace(a)) < 1e-14
        for k, b in enumerate(mats):
            assert np.trace(a @ b) == pytest.approx(2.0 * (j == k), abs=1e-12)


@pytest.mark.parametrize("d", [2, 3, 4])
@pytest.mark.parametrize("kind", list(BasisKind))
def test_basis_trace_orthogonal(d, kind):
    basis = build_basis(d, kind)
    e = basis.stacked()
    assert len(basis) == d**4
    gram = np.einsum("jab,kab->jk", e.conj(), e)
    assert np.allclose(gram, d * d * np.eye(d**4), atol=1e-10)
    if kind is BasisKind.WEYL_UNITARIES:
        assert all(is_unitary(u) for u in basis.elements)


def test_basis_qubit_weyl_is_pauli_group():
    basis = build_basis(2, "weyl")
    assert len(basis) == 16
    paulis = [np.eye(2), SX, np.array([[0, -1j], [1j, 0]]), np.diag([1, -1])]
    products = [np.kron(a, b) for a in paulis for b in paulis]
    for e in basis.elements:
        # each element is a Pauli product up to a phase
        assert any(abs(abs(np.trace(p.conj().T @ e)) - 4) < 1e-12 for p in products)


def test_gell_mann_products_qutrit_count():
    basis = build_basis(3, BasisKind.GELL_MANN_PRODUCTS)
    assert len(basis) == 81
    assert np.array_equal(basis.elements[0], np.eye(9))
    non_identity = [e for e in basis.elements if not np.allclose(e, np.eye(9))]
    assert len(non_identity) == 80


def test_build_basis_unsupported():
    with pytest.raises(UnsupportedDimension):
        build_basis(5, BasisKind.WEYL_UNITARIES)
