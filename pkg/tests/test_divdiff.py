from math import factorial

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from specshift.divdiff import (
    DegenerateSplineError,
    cluster_rows,
    dd_eval,
    dd_exp_opitz,
    dd_peano,
    dd_resolvent_closed,
    dd_table,
)
from specshift.functions import Exponential, Monomial, Polynomial, ResolventPower, fz

nodes_st = st.lists(st.floats(-2, 2, allow_nan=False), min_size=2, max_size=6)


def test_order_zero_is_evaluation():
    assert dd_eval(Exponential(1.5), [0.3]) == pytest.approx(np.exp(1.5j * 0.3))


def test_square_over_three_nodes():
    assert dd_eval(Monomial(2), [0.0, 1.0, 7.0]) == pytest.approx(1.0)


def test_cube_over_three_nodes():
    assert dd_eval(Monomial(3), [0.0, 1.0, 2.0]) == pytest.approx(3.0)


def test_fully_confluent_is_scaled_derivative():
    f = Exponential(0.7)
    x = 0.4
    assert dd_eval(f, [x] * 4) == pytest.approx(f.derivative(x, 3) / 6)
    g = fz(1 + 2j)
    assert dd_eval(g, [x] * 3) == pytest.approx(g.derivative(x, 2) / 2)


def test_resolvent_closed_examples():
    assert dd_resolvent_closed(1j, [0.0, 1.0]) == pytest.approx(-0.5 + 0.5j)
    for p in range(5):
        assert dd_resolvent_closed(2j, [0.0] * (p + 1)) == pytest.approx((2j) ** -(p + 1))
    with pytest.raises(ValueError):
        dd_resolvent_closed(1.0, [0.0, 1.0])


def test_resolvent_power_closed_form_matches_table(rng):
    for k in range(1, 4):
        x = np.sort(rng.uniform(-1, 1, 4))
        z = 0.3 + 1.1j
        table = complex(dd_table(ResolventPower(z, k + 1), x[None, :])[0])
        assert dd_resolvent_closed(z, x, k) == pytest.approx(table, rel=1e-10)


def test_resolvent_agreement_with_newton_table(rng):
    # well-separated nodes: the Newton table keeps its digits
    for _ in range(100):
        p = int(rng.integers(0, 6))
        x = np.sort(rng.uniform(-1, 1, p + 1))
        if p and np.min(np.diff(x)) < 0.05:
            continue
        z = complex(rng.uniform(-1, 1), rng.uniform(0.3, 2))
        table = complex(dd_table(fz(z), x[None, :])[0])
        assert abs(dd_eval(fz(z), x) - table) <= 1e-12 * max(1.0, abs(table))


def test_real_pole_rejected():
    # poles are nonreal by construction, so no node can hit one
    with pytest.raises(ValueError):
        ResolventPower(0.5, 1)


def test_opitz_matches_newton_table(rng):
    for _ in range(50):
        x = np.sort(rng.uniform(-1, 1, int(rng.integers(1, 6))))
        s = float(rng.uniform(-3, 3))
        table = complex(dd_table(Exponential(s), cluster_rows(x[None, :]))[0])
        assert abs(dd_exp_opitz(s, x) - table) < 1e-9 * max(1.0, abs(table))


@settings(max_examples=60, deadline=None)
@given(nodes_st, st.integers(0, 2), st.randoms(use_true_random=False))
def test_symmetry(nodes, which, rnd):
    f = [Exponential(1.3), fz(0.2 + 0.9j), Monomial(5)][which]
    perm = list(nodes)
    rnd.shuffle(perm)
    a, b = dd_eval(f, nodes), dd_eval(f, perm)
    assert abs(a - b) <= 1e-12 * max(abs(a), 1e-300) or abs(a - b) < 1e-14


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 6), st.data())
def test_leading_coefficient(p, data):
    coeffs = data.draw(st.lists(st.floats(-3, 3), min_size=p + 1, max_size=p + 1))
    if abs(coeffs[-1]) < 1e-3:
        coeffs[-1] = 1.0
    x = data.draw(st.lists(st.floats(-2, 2), min_size=p + 1, max_size=p + 1))
    got = dd_eval(Polynomial(coeffs), x)
    assert abs(got - coeffs[-1]) <= 1e-10 * abs(coeffs[-1])


def test_bound_on_interval(rng):
    for _ in range(200):
        p = int(rng.integers(1, 6))
        x = rng.uniform(-1, 1, p + 1)
        a, b = x.min(), x.max()
        z = complex(rng.uniform(-1, 1), rng.uniform(0.3, 2))
        dist = abs(z.imag) if a <= z.real <= b else min(abs(z - a), abs(z - b))
        assert abs(dd_eval(fz(z), x)) <= (1.0 + 1e-12) / dist ** (p + 1)
        s = float(rng.uniform(-3, 3))
        assert abs(dd_eval(Exponential(s), x)) <= (1.0 + 1e-12) * abs(s) ** p / factorial(p)


def test_derivative_interchange():
    # d/dz Delta[f_z] = Delta[d/dz f_z] = -Delta[1/(z - t)^2]
    x = [0.0, 0.4, 1.1, 1.5]
    z, h = 0.3 + 0.8j, 1e-5
    fd = (dd_resolvent_closed(z + h, x) - dd_resolvent_closed(z - h, x)) / (2 * h)
    exact = -dd_resolvent_closed(z, x, 1)
    assert abs(fd - exact) <= 1e-6 * abs(exact)


def test_peano_examples():
    assert dd_peano(Monomial(3), [0.0, 1.0, 2.0]) == pytest.approx(3.0)
    assert dd_peano(Polynomial([2.5]), [0.0, 1.0, 2.0]) == 0.0
    assert dd_peano(fz(3j), [0.0, 1.0]) == pytest.approx(dd_resolvent_closed(3j, [0.0, 1.0]), rel=1e-9)
    with pytest.raises(DegenerateSplineError):
        dd_peano(Monomial(2), [0.5, 0.5, 0.5])


def test_near_coincident_nodes_are_snapped():
    x = np.array([[0.0, 1e-13, 1.0]])
    tied = cluster_rows(x)
    assert tied[0, 0] == tied[0, 1]
    f = Exponential(2.0)
    expect = (f(1.0) - f(0.0) - f.derivative(0.0, 1)) / 1.0
    assert dd_eval(fz(0.1 + 1j), x[0]) == pytest.approx(dd_eval(fz(0.1 + 1j), [0.0, 0.0, 1.0]), rel=1e-9)
    assert dd_eval(f, x[0]) == pytest.approx(expect, rel=1e-9)
