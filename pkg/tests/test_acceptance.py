"""The eleven acceptance criteria at full scale.

Each test records one PASS/FAIL line, printed together in the terminal
summary (and immediately with ``-s``).
"""
import os

import pytest
from conftest import ACCEPTANCE_LINES

from specshift import battery

JOBS = os.cpu_count() or 1


def report(result):
    line = result.line()
    ACCEPTANCE_LINES.append(line)
    print(line)
    if not result.ok:
        for f in result.failures[:5]:
            print("   ", f)
        pytest.fail(line, pytrace=False)


@pytest.fixture(scope="module")
def trace_results():
    return battery.trace_suite(seed=2024, count=50, max_n=6, orders=(1, 2, 3, 4), jobs=JOBS)


def test_criterion_01_hadamard_total_variation():
    report(battery.hadamard_total_variation((1, 2, 3, 4), (2, 3, 4)))


def test_criterion_02_trace_formula(trace_results):
    report(trace_results[0])


def test_criterion_03_normalization_and_variation(trace_results):
    # the bound ||V||_2^p / p! is checked on every instance, including p = 1
    report(trace_results[1])


def test_criterion_03_variant_trace_norm_at_order_one():
    # same instances; at p = 1 the bound is taken in the trace norm ||V||_1.
    # This is a labelled variant and does not replace the check above.
    reports = battery.analyse_all(battery.random_instances(2024, 50, 6, (1, 2, 3, 4)), JOBS)
    res = battery.normalization_and_variation(reports, krein_trace_norm=True)
    res.title += " (variant: trace norm at p=1)"
    report(res)


def test_criterion_04_route_equivalence(trace_results):
    report(trace_results[2])


def test_criterion_05_koplienko_positivity():
    report(battery.koplienko_positivity(seed=5, count=100, max_n=6))


def test_criterion_06_multimeasure_lemmas():
    report(battery.multimeasure_suite(seed=6, count=200, max_n=5, max_p=4))


def test_criterion_07_divided_differences_and_splines():
    report(battery.divided_difference_suite(seed=7, count=500))


def test_criterion_08_cauchy_transform():
    report(battery.cauchy_suite(seed=8, count=50, max_n=5, n_z=5, jobs=JOBS))


def test_criterion_09_spectral_averaging():
    report(battery.averaging_suite(seed=9, count=20, max_n=4, quad_nodes=64, jobs=JOBS))


def test_criterion_10_free_probability():
    report(battery.free_suite(seed=10, count=50))


@pytest.mark.slow
def test_criterion_10_monte_carlo_freeness():
    report(battery.free_suite(seed=10, count=50, mc=True, mc_n=200, mc_samples=20))


def test_criterion_11_direct_sum_divergence():
    report(battery.divergence_suite((3, 4), 20))
