from math import factorial

import numpy as np
import pytest
from conftest import pair_of, rel

from specshift.functions import Exponential, Monomial, fz
from specshift.herm import eigh, hs_norm, matrix_function, random_hermitian
from specshift.pspline import PiecewisePolynomial
from specshift.ssf import (
    cauchy_identity_rows,
    cauchy_transform,
    eta_recursive,
    eta_spline_rep,
    koplienko_eta2,
    krein_xi,
    krein_xi_spline,
    l1_distance,
    shift_function,
    spectral_average_first,
    spectral_average_higher,
    third_order_parts_identity,
    verify_trace_formula,
)

ONE = np.array([[0.0]]), np.array([[1.0]])


def spectrum_hull(h0, v):
    e = np.concatenate([np.linalg.eigvalsh(h0), np.linalg.eigvalsh(h0 + v)])
    return e.min(), e.max()


def test_xi_scalar_case():
    xi = krein_xi(*ONE)
    assert xi(np.array([-0.5, 0.0, 0.5, 0.999, 1.0, 1.5])).tolist() == [0, 1, 1, 1, 0, 0]
    assert xi.integral() == pytest.approx(1.0)
    sp = krein_xi_spline(*ONE)
    assert l1_distance(xi, sp) < 1e-12


def test_zero_perturbation_gives_zero(rng):
    h0 = random_hermitian(3, rng)
    z = np.zeros((3, 3))
    for p in (1, 2, 3, 4):
        for route in ("recursive", "spline"):
            assert shift_function(h0, z, p, route).abs_integral() == 0.0
    assert koplienko_eta2(h0, z).abs_integral() == 0.0


def test_xi_defining_identity(rng):
    h0, v = pair_of(rng, 4)
    xi = krein_xi(h0, v)
    d0, d1 = eigh(h0), eigh(h0 + v)
    for f in (Monomial(2), Monomial(3), fz(0.2 + 0.9j)):
        direct = np.trace(matrix_function(f, d1) - matrix_function(f, d0))
        assert rel(xi.pair(f), direct) <= 1e-9
    assert l1_distance(xi, krein_xi_spline(h0, v)) <= 1e-9


def test_eta2_scalar_closed_form():
    v = 0.8
    eta = koplienko_eta2(np.array([[0.0]]), np.array([[v]]))
    t = np.array([-0.2, 0.1, 0.4, 0.79, 0.9])
    assert np.allclose(eta(t), np.where((t > 0) & (t < v), v - t, 0.0), atol=1e-14)


def test_eta2_positive_with_known_mass(rng):
    for _ in range(20):
        h0, v = pair_of(rng, int(rng.integers(1, 6)))
        eta = koplienko_eta2(h0, v)
        assert eta.minimum() >= -1e-12
        assert eta.integral() == pytest.approx(hs_norm(v) ** 2 / 2, rel=1e-10)


def test_recursion_reproduces_koplienko(rng):
    h0, v = pair_of(rng, 3)
    assert l1_distance(eta_recursive(h0, v, 2), koplienko_eta2(h0, v)) <= 1e-9
    h0, v = pair_of(rng, 2)
    assert l1_distance(eta_spline_rep(h0, v, 2), koplienko_eta2(h0, v)) <= 1e-8


@pytest.mark.parametrize("p", [1, 2, 3, 4])
def test_mass_and_variation(rng, p):
    h0, v = pair_of(rng, 4)
    for route in ("recursive", "spline"):
        eta = shift_function(h0, v, p, route)
        mass = np.trace(np.linalg.matrix_power(v, p)).real / factorial(p)
        assert abs(eta.integral() - mass) <= 1e-9
        if p >= 2:
            assert eta.abs_integral() <= hs_norm(v) ** p / factorial(p) + 1e-9


def test_route_moments_agree(rng):
    h0, v = pair_of(rng, 3)
    a, b = eta_recursive(h0, v, 3), eta_spline_rep(h0, v, 3)
    for k in range(6):
        assert rel(a.moment(k), b.moment(k)) <= 1e-8


def test_spline_route_degree_and_realness(rng):
    h0, v = pair_of(rng, 4)
    for p in (2, 3, 4):
        eta = eta_spline_rep(h0, v, p)
        assert eta.density.degree <= p - 1
        assert eta.provenance == "spline_rep"


def test_support_inside_hull(rng):
    h0, v = pair_of(rng, 4)
    lo, hi = spectrum_hull(h0, v)
    for p in (1, 2, 3):
        for route in ("recursive", "spline"):
            eta = shift_function(h0, v, p, route)
            a, b = eta.support()
            assert lo - 1e-9 <= a and b <= hi + 1e-9
            assert eta.density.tail_norm() <= 1e-10


def test_scaling_in_perturbation():
    h0 = np.diag([0.0, 1.0])
    v = np.array([[0.3, 0.5], [0.5, -0.2]])
    s = 0.5
    for p in (2, 3):
        a = eta_recursive(h0, v, p).integral()
        b = eta_recursive(h0, s * v, p).integral()
        assert b == pytest.approx(s**p * a, rel=1e-10)


def test_trace_formula_monomial(rng):
    h0, v = pair_of(rng, 3)
    for p in (2, 3):
        rows, cross = verify_trace_formula(h0, v, p, [Monomial(p)])
        assert all(r.passed for r in rows + cross)
        assert rows[0].lhs == pytest.approx(np.trace(np.linalg.matrix_power(v, p)))


def test_trace_formula_full_set(rng):
    h0, v = pair_of(rng, 4)
    rows, cross = verify_trace_formula(h0, v, 3)
    assert all(r.passed for r in rows), [r for r in rows if not r.passed]
    assert all(r.passed for r in cross)
    z_rows = [r for r in rows if r.f == fz(2j).label]
    assert z_rows and max(r.rel_err for r in z_rows) <= 1e-8


def test_trace_formula_zero_perturbation(rng):
    h0 = random_hermitian(3, rng)
    rows, _ = verify_trace_formula(h0, np.zeros((3, 3)), 2)
    assert all(r.abs_err == 0.0 for r in rows)


def test_cauchy_of_indicator():
    box = PiecewisePolynomial.indicator(0.0, 1.0)
    assert abs(cauchy_transform(box, 1j) - np.log(1j / (1j - 1))) < 1e-14
    with pytest.raises(ValueError):
        cauchy_transform(box, 0.5)


def test_cauchy_identities(rng):
    for p in (1, 2, 3):
        h0, v = pair_of(rng, 3)
        rows = cauchy_identity_rows(h0, v, p, [2j, 0.4 - 1.3j])
        assert all(r.abs_err <= 1e-8 * max(1.0, abs(r.rhs)) for r in rows), rows


def test_third_order_parts(rng):
    h0, v = pair_of(rng, 3)
    rows = third_order_parts_identity(h0, v)
    assert all(r.passed for r in rows)
    cube = [r for r in rows if r.f == "t^3"][0]
    assert cube.lhs == pytest.approx(np.trace(v @ v @ v))
    zero = third_order_parts_identity(h0, np.zeros((3, 3)))
    assert all(abs(r.lhs) < 1e-13 and abs(r.rhs) < 1e-13 for r in zero)


def test_first_order_averaging(rng):
    h0, v = pair_of(rng, 4)
    assert all(r.passed for r in spectral_average_first(h0, v, [Monomial(3)], 64))
    h0, v = np.array([[0.2]]), np.array([[0.9]])
    f = Exponential(2.0)
    for r in spectral_average_first(h0, v, [f]):
        assert abs(r.lhs - (f(1.1) - f(0.2))) < 1e-12
    with pytest.raises(ValueError):
        spectral_average_first(h0, v, quad_nodes=8)


def test_higher_order_averaging(rng):
    h0, v = pair_of(rng, 2)
    assert all(r.passed for r in spectral_average_higher(h0, v, 2, [Monomial(4)]))
    h0, v = pair_of(rng, 3)
    assert all(r.passed for r in spectral_average_higher(h0, v, 3))


def test_higher_order_averaging_scalar():
    h0, v = np.array([[0.1]]), np.array([[0.6]])
    f = Monomial(5)
    for p in (2, 3):
        row = spectral_average_higher(h0, v, p, [f])[0]
        taylor = sum(f.derivative(0.1, j) * 0.6**j / factorial(j) for j in range(p))
        assert abs(row.lhs - (f(0.7) - taylor)) < 1e-10
        assert row.passed
