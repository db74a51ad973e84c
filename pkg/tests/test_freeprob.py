import numpy as np
import pytest

from specshift.freeprob import (
    FreeModel,
    NoncrossingPartition,
    SizeError,
    asymptotic_freeness_mc,
    catalan,
    cumulant_weight_sum,
    enumerate_nc,
    free_chain_rows,
    free_cumulants,
    free_mass_rows,
    free_multimeasure,
    is_noncrossing,
    kreweras,
    kreweras_permutation,
    mixed_moment,
    moments_from_cumulants,
    set_partitions,
)

BELL = [1, 1, 2, 5, 15, 52, 203, 877, 4140]


def model_pm1(order=6):
    return FreeModel.from_spectrum([0.0, 1.0], [0.5, 0.5], [-1.0, 1.0], order)


@pytest.mark.parametrize("p", range(1, 9))
def test_counts(p):
    parts = list(set_partitions(p))
    assert len(parts) == BELL[p]
    brute = [b for b in parts if is_noncrossing(b)]
    assert len(enumerate_nc(p)) == len(brute) == catalan(p)


def test_small_counts_and_order():
    assert [len(enumerate_nc(p)) for p in (1, 3, 4)] == [1, 5, 14]
    for pi in enumerate_nc(5):
        mins = [b[0] for b in pi.blocks]
        assert mins == sorted(mins)
    with pytest.raises(SizeError):
        enumerate_nc(11)
    with pytest.raises(SizeError):
        enumerate_nc(0)


def test_crossing_detection():
    assert not is_noncrossing(((1, 3), (2, 4)))
    assert is_noncrossing(((1, 4), (2, 3)))
    with pytest.raises(ValueError):
        NoncrossingPartition(4, ((1, 3), (2, 4)))


def test_kreweras_extremes():
    for p in (1, 3, 5):
        full = NoncrossingPartition(p, (tuple(range(1, p + 1)),))
        single = NoncrossingPartition(p, tuple((i,) for i in range(1, p + 1)))
        assert kreweras(full) == single
        assert kreweras(single) == full


def test_kreweras_worked_case():
    pi = NoncrossingPartition(4, ((1, 3), (2,), (4,)))
    k = kreweras(pi)
    assert len(pi) + len(k) == 5
    assert k.blocks == ((1, 2), (3, 4))
    interleaved = [tuple(2 * x - 1 for x in b) for b in pi.blocks] + [tuple(2 * x for x in b) for b in k.blocks]
    assert is_noncrossing(interleaved)


@pytest.mark.parametrize("p", range(1, 8))
def test_kreweras_block_count_and_formula(p):
    for pi in enumerate_nc(p):
        k = kreweras(pi)
        assert len(pi) + len(k) == p + 1
        assert k == kreweras_permutation(pi)


def test_cumulant_examples():
    assert np.allclose(free_cumulants([0, 1, 0, 2]), [0, 1, 0, 0])
    c = 1.7
    assert np.allclose(free_cumulants([c, c**2, c**3]), [c, 0, 0], atol=1e-14)


def test_cumulant_round_trip(rng):
    atoms = rng.uniform(-2, 2, 5)
    w = rng.dirichlet(np.ones(5))
    m = np.array([np.sum(w * atoms**k) for k in range(1, 9)])
    back = moments_from_cumulants(free_cumulants(m))
    assert np.max(np.abs(back - m) / np.maximum(1.0, np.abs(m))) <= 1e-12


@pytest.mark.parametrize("p", [1, 2, 3, 4, 5])
def test_free_total_mass(p):
    model = FreeModel.from_spectrum([-1.0, 0.3, 2.0], [0.2, 0.5, 0.3], [-0.5, 0.1, 1.4], 6)
    row = free_mass_rows(model, p)[0]
    assert row.abs_err <= 1e-12 * max(1.0, abs(row.rhs))


def test_order_one():
    model = FreeModel([0.0, 2.0], [0.25, 0.75], [0.6])
    m = free_multimeasure(model, 1)
    assert m.weight_of((0,)) == pytest.approx(0.25 * 0.6)
    assert m.weight_of((1,)) == pytest.approx(0.75 * 0.6)


def test_constant_perturbation_lives_on_diagonal():
    c = 0.8
    model = FreeModel([0.0, 1.0, 3.0], [0.2, 0.3, 0.5], [c, c**2, c**3])
    m = free_multimeasure(model, 3)
    assert np.all(m.index == m.index[:, :1])
    for a, w in enumerate(model.h0_weights):
        assert m.weight_of((a, a, a)) == pytest.approx(c**3 * w)


@pytest.mark.parametrize("p", [2, 3, 4])
def test_variation_bounded_by_cumulants(p):
    model = model_pm1()
    assert free_multimeasure(model, p).total_variation() <= cumulant_weight_sum(model, p) + 1e-12


@pytest.mark.parametrize("p", [1, 2, 3, 4])
def test_trace_chain(p):
    model = FreeModel.from_spectrum([-0.5, 0.4, 1.2], [0.3, 0.3, 0.4], [-1.0, 0.2, 0.9, 1.5], 6)
    row = free_chain_rows(model, p)[0]
    assert row.passed, row


def test_mixed_moments_of_pushforward():
    model = model_pm1()
    m = free_multimeasure(model, 2)
    # all exponents zero gives the total mass
    assert mixed_moment(m, (0, 0)) == pytest.approx(1.0)


def test_model_validation():
    with pytest.raises(ValueError):
        FreeModel([0.0, 1.0], [0.6, 0.6], [1.0])
    with pytest.raises(ValueError):
        FreeModel([0.0], [1.0], [0.5, 0.1], v_spectrum=[0.5, 0.5])
    model = model_pm1(4)
    assert FreeModel.from_dict(model.to_dict()).v_moments.tolist() == model.v_moments.tolist()


def test_constant_spectrum_is_exact():
    model = FreeModel.from_spectrum([0.0, 1.0], [0.5, 0.5], [0.7], 4)
    out = asymptotic_freeness_mc(model, 3, n=100, samples=2, seed=1)
    assert out["max_deviation"] <= 1e-12


@pytest.mark.slow
def test_asymptotic_freeness():
    out = asymptotic_freeness_mc(model_pm1(), 3, n=200, samples=20, seed=0)
    assert out["pass"], out


def test_monte_carlo_guards():
    with pytest.raises(ValueError):
        asymptotic_freeness_mc(model_pm1(), 2, n=50)
    with pytest.raises(ValueError):
        asymptotic_freeness_mc(FreeModel([0.0], [1.0], [0.0, 1.0]), 2, n=100)
