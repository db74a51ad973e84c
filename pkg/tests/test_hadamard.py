import csv
import io

import numpy as np
import pytest

from specshift.hadamard import (
    coordinate_decomposition,
    direct_sum_divergence,
    hadamard_matrix,
    hadamard_tv,
    series_csv,
)
from specshift.herm import eigh
from specshift.multimeasure import SizeError


@pytest.mark.parametrize("k", [1, 2, 3, 4])
def test_block_is_unitary_hadamard(k):
    v = hadamard_matrix(k)
    n = 2**k
    assert np.max(np.abs(v @ v - np.eye(n))) <= 1e-12
    assert np.max(np.abs(np.abs(v) - n**-0.5)) <= 1e-12
    assert np.allclose(np.abs(eigh(v).values), 1.0, atol=1e-12)


def test_coordinate_decomposition():
    d = coordinate_decomposition(4)
    assert d.values.tolist() == [0, 1, 2, 3]
    assert np.allclose(d.projectors.sum(axis=0), np.eye(4))


@pytest.mark.parametrize("k,p,expected", [(1, 2, 2.0), (2, 3, 8.0), (1, 3, 2**1.5)])
def test_worked_cases(k, p, expected):
    out = hadamard_tv(k, p)
    assert out["tv"] == pytest.approx(expected, rel=1e-9)
    assert out["predicted"] == pytest.approx(expected, rel=1e-12)


@pytest.mark.parametrize("p", [2, 3, 4])
def test_tensor_multiplicativity(p):
    for k in (1, 2, 3):
        if (2 ** (k + 1)) ** p > 1e8:
            continue
        a, b = hadamard_tv(k, p)["tv"], hadamard_tv(k + 1, p)["tv"]
        assert b == pytest.approx(2 ** (p / 2) * a, rel=1e-9)


@pytest.mark.parametrize("k", [1, 2, 3, 4])
def test_order_two_attains_hilbert_schmidt(k):
    assert hadamard_tv(k, 2)["tv"] == pytest.approx(2**k, rel=1e-9)


def test_argument_guards():
    for k, p in ((0, 2), (5, 2), (2, 1), (2, 5)):
        with pytest.raises(ValueError):
            hadamard_tv(k, p)
    with pytest.raises(ValueError):
        hadamard_matrix(-1)
    assert issubclass(SizeError, ValueError)


@pytest.mark.parametrize("p", [3, 4])
def test_divergence_table(p):
    rows = direct_sum_divergence(p, 20)
    for case in ("I", "II"):
        sel = [r for r in rows if r.case == case]
        pn = np.array([r.pnorm_partial for r in sel])
        tv = np.array([r.tv_partial for r in sel])
        assert np.all(np.diff(pn) > 0) and np.all(np.diff(tv) > 0)
        assert pn[-1] - pn[-2] < 1e-3
        if case == "I":
            # unnormalized: the variation series is exactly harmonic
            assert np.allclose(tv, np.cumsum(1.0 / np.arange(1, 21)))
            assert tv[-1] >= 0.9 * np.log(20)


def test_single_term():
    for p in (3, 4):
        for r in direct_sum_divergence(p, 1):
            assert r.K == 1
            growth = 2.0 ** (p / 2 - 1)
            assert r.tv_partial == pytest.approx(r.pnorm_partial * growth)
        ii = [r for r in direct_sum_divergence(p, 1) if r.case == "II"][0]
        assert ii.pnorm_partial == pytest.approx(1.0)


def test_divergence_guards():
    with pytest.raises(ValueError):
        direct_sum_divergence(2, 10)
    with pytest.raises(ValueError):
        direct_sum_divergence(3, 41)


def test_csv_round_trip():
    rows = direct_sum_divergence(3, 5)
    parsed = list(csv.DictReader(io.StringIO(series_csv(rows))))
    assert len(parsed) == 10
    assert list(parsed[0]) == ["K", "pnorm_partial", "tv_partial", "case"]
    assert float(parsed[3]["tv_partial"]) == rows[3].tv_partial
