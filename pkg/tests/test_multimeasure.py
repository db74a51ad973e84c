from math import factorial

import numpy as np
import pytest
from conftest import pair_of, rel

from specshift.functions import Monomial, Polynomial, fz
from specshift.herm import eigh, hs_norm, random_hermitian, resolvent
from specshift.multimeasure import (
    AtomicMultiMeasure,
    SizeError,
    build_m,
    build_m1,
    build_m2,
    build_m_plain,
    total_variation,
)
from specshift.taylor import gateaux_derivative

H0 = np.diag([0.0, 1.0])
X = np.array([[0.0, 1.0], [1.0, 0.0]])


def test_hand_computed_example():
    m = build_m_plain(H0, X, 2)
    assert m.n_atoms == 2
    assert m.weight_of((0, 1)) == pytest.approx(1.0)
    assert m.weight_of((1, 0)) == pytest.approx(1.0)
    assert m.weight_of((0, 0)) == 0 and m.weight_of((1, 1)) == 0
    assert total_variation(m) == pytest.approx(2.0) == pytest.approx(hs_norm(X) ** 2)


def test_zero_perturbation_is_empty():
    m = build_m_plain(H0, np.zeros((2, 2)), 3)
    assert m.n_atoms == 0 and m.total_variation() == 0.0


def test_total_mass_is_trace_of_power(rng):
    h0, v = pair_of(rng, 3)
    m = build_m_plain(h0, v, 3)
    assert m.total_mass() == pytest.approx(np.trace(v @ v @ v), rel=1e-12)


def test_variation_bound(rng):
    for _ in range(20):
        h0, v = pair_of(rng, 4, 1.3)
        assert build_m_plain(h0, v, 2).total_variation() <= hs_norm(v) ** 2 + 1e-9
        w = random_hermitian(4, rng)
        D = [eigh(h0), eigh(h0 + v), eigh(w)]
        m = build_m(D, [v, w, v])
        assert m.total_variation() <= hs_norm(v) ** 2 * hs_norm(w) + 1e-9


def test_constant_functions_give_total_mass(rng):
    h0, v = pair_of(rng, 3)
    m = build_m_plain(h0, v, 2)
    one = Polynomial([1.0])
    assert m.pair_product([one, one]) == pytest.approx(m.total_mass())


def test_product_pairing_against_trace(rng):
    h0, v = pair_of(rng, 3)
    z = 0.4 + 1.2j
    m = build_m_plain(h0, v, 3)
    r = resolvent(h0, z)
    direct = np.trace(np.linalg.matrix_power(r @ v, 3))
    assert rel(m.pair_product([fz(z)] * 3), direct) < 1e-10
    f = [Monomial(2), fz(z), Monomial(1)]
    direct = np.trace(h0 @ h0 @ v @ r @ v @ h0 @ v)
    assert rel(m.pair_product(f), direct) < 1e-10


def test_divided_difference_pairings(rng):
    h0, v = pair_of(rng, 3)
    z = -0.3 + 0.9j
    for p in (1, 2, 3):
        m1 = build_m1(h0, v, p)
        lhs = factorial(p) * m1.pair_divided_difference(fz(z))
        assert rel(lhs, np.trace(gateaux_derivative(h0, v, p, fz(z)))) < 1e-9
        assert abs(m1.pair_divided_difference(Monomial(p - 1))) < 1e-12
        m2 = build_m2(h0, v, p)
        r0, r1 = resolvent(h0, z), resolvent(h0 + v, z)
        expect = np.trace(r1 @ np.linalg.matrix_power(v @ r0, p))
        assert rel(m2.pair_divided_difference(fz(z)), expect) < 1e-9


def test_order_two_measure_is_nonnegative(rng):
    for _ in range(100):
        h0, v = pair_of(rng, int(rng.integers(2, 6)), 1.0)
        w = build_m_plain(h0, v, 2).weights
        assert np.all(np.abs(w.imag) < 1e-12) and w.real.min() >= -1e-12


def test_first_order_perturbed_measure_is_real(rng):
    for _ in range(50):
        h0, v = pair_of(rng, 4)
        assert np.max(np.abs(build_m2(h0, v, 1).weights.imag)) <= 1e-12


def test_no_diagonal_atoms_with_shared_eigenvalue():
    h0 = np.diag([0.0, 0.0, 1.0])
    v = np.zeros((3, 3))
    v[0, 2] = v[2, 0] = 0.6
    shared = set(np.round(eigh(h0).values, 9)) & set(np.round(eigh(h0 + v).values, 9))
    assert 0.0 in shared
    for p in (1, 2, 3):
        mass, _ = build_m2(h0, v, p).diagonal_scan()
        assert abs(mass) <= 1e-12


def test_random_perturbed_measure_has_no_diagonal_mass(rng):
    h0, v = pair_of(rng, 4)
    mass, off = build_m2(h0, v, 2).diagonal_scan()
    assert abs(mass) <= 1e-10 and off.n_atoms > 0


def test_commuting_pair_is_all_diagonal(rng):
    h0 = np.diag(rng.normal(size=4))
    v = np.diag(rng.normal(size=4))
    mass, off = build_m_plain(h0, v, 3).diagonal_scan()
    assert off.n_atoms == 0
    assert mass == pytest.approx(np.sum(np.diag(v) ** 3))


def test_conjugation_symmetry(rng):
    h0, v = pair_of(rng, 3)
    m = build_m_plain(h0, v, 3)
    T = m.dense()
    # reversing the cycle conjugates the weight
    for idx in np.ndindex(T.shape):
        assert abs(np.conj(T[idx]) - T[idx[::-1]]) <= 1e-12


def test_marginal_reproduces_plain_measure(rng):
    h0, v = pair_of(rng, 3)
    for p in (1, 2, 3):
        marg = build_m1(h0, v, p).marginal(p).dense()
        assert np.max(np.abs(marg - build_m_plain(h0, v, p).dense())) <= 1e-12


def test_size_guard():
    with pytest.raises(SizeError):
        build_m_plain(np.diag(np.arange(40.0)), np.ones((40, 40)), 5)


def test_json_atoms(rng):
    h0, v = pair_of(rng, 2)
    d = build_m_plain(h0, v, 2).to_dict()
    assert all(set(a) == {"nodes", "weight"} for a in d["atoms"])
    assert isinstance(build_m_plain(h0, v, 2), AtomicMultiMeasure)
