import numpy as np
import pytest
from conftest import pair_of

from specshift.functions import Monomial, Polynomial, fz
from specshift.herm import (
    HermitianError,
    eigh,
    hermitian,
    matrix_function,
    random_hermitian,
    resolvent,
    schatten_norm,
    trace_and_norms,
)


def test_diagonal_input():
    d = eigh(np.diag([3.0, 1.0]))
    assert np.allclose(d.eigenvalues, [1.0, 3.0])
    assert np.allclose(d.projectors[0], np.diag([0.0, 1.0]))
    assert np.allclose(d.projectors[1], np.diag([1.0, 0.0]))


def test_pauli_x_projectors():
    d = eigh(np.array([[0.0, 1.0], [1.0, 0.0]]))
    assert np.allclose(d.values, [-1.0, 1.0])
    assert np.allclose(d.projectors[0], 0.5 * np.array([[1, -1], [-1, 1]]))
    assert np.allclose(d.projectors[1], 0.5 * np.array([[1, 1], [1, 1]]))


def test_zero_matrix_is_one_cluster():
    d = eigh(np.zeros((3, 3)))
    assert d.n_clusters == 1
    assert np.allclose(d.projectors[0], np.eye(3))


def test_non_hermitian_rejected():
    with pytest.raises(HermitianError):
        hermitian(np.array([[0.0, 1.0], [0.0, 0.0]]))


@pytest.mark.parametrize("n", [1, 2, 5, 9, 16])
def test_decomposition_invariants(rng, n):
    h = random_hermitian(n, rng, 2.0)
    d = eigh(h)
    P = d.projectors
    assert np.linalg.norm(P.sum(axis=0) - np.eye(n)) < 1e-10
    for i in range(len(P)):
        for j in range(len(P)):
            if i != j:
                assert np.linalg.norm(P[i] @ P[j]) < 1e-10
    spread = max(1.0, np.ptp(d.eigenvalues))
    assert np.linalg.norm(np.einsum("k,kij->ij", d.values, P) - h) <= 1e-9 * spread


def test_jacobi_agrees_with_lapack(rng):
    h = random_hermitian(12, rng)
    assert np.allclose(eigh(h).eigenvalues, np.linalg.eigvalsh(h), atol=1e-12)


def test_repeated_eigenvalue_single_projector(rng):
    q, _ = np.linalg.qr(rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4)))
    h = q @ np.diag([1.0, 1.0, 2.0, -0.5]) @ q.conj().T
    d = eigh(h)
    assert d.n_clusters == 3
    assert sorted(np.round(np.trace(d.projectors, axis1=1, axis2=2).real).astype(int)) == [1, 1, 2]


def test_matrix_function_examples():
    x = eigh(np.array([[0.0, 1.0], [1.0, 0.0]]))
    assert np.allclose(matrix_function(Monomial(2), x), np.eye(2))
    assert np.allclose(matrix_function(Monomial(1), x), [[0, 1], [1, 0]])
    d = eigh(np.diag([0.0, 1.0]))
    assert np.allclose(matrix_function(fz(2j), d), np.diag([1 / 2j, 1 / (2j - 1)]))


def test_polynomial_matches_horner(rng):
    h = random_hermitian(5, rng)
    c = rng.normal(size=5)
    horner = np.zeros((5, 5), dtype=complex)
    for ck in c[::-1]:
        horner = horner @ h + ck * np.eye(5)
    got = matrix_function(Polynomial(c), eigh(h))
    assert np.linalg.norm(got - horner) <= 1e-9 * np.linalg.norm(horner)


def test_trace_and_norms_examples(rng):
    t = trace_and_norms(np.array([[0.0, 1.0], [1.0, 0.0]]))
    assert t.trace == 0 and np.isclose(t.hs_norm, np.sqrt(2)) and np.isclose(t.op_norm, 1.0)
    assert np.isclose(schatten_norm(np.eye(3), 3), 3 ** (1 / 3))
    a = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    assert np.isclose(schatten_norm(a, 2) ** 2, np.sum(np.abs(a) ** 2))
    with pytest.raises(ValueError):
        schatten_norm(a, 0.5)


def test_resolvent_identity(rng):
    h0, v = pair_of(rng, 4)
    z = 2j + 1 + np.linalg.norm(h0, 2) + np.linalg.norm(v, 2)
    lhs = resolvent(h0 + v, z) - resolvent(h0, z)
    rhs = resolvent(h0 + v, z) @ v @ resolvent(h0, z)
    assert np.linalg.norm(lhs - rhs) < 1e-10
