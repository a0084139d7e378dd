import math

import pytest

from quadray import (BranchPointError, QuadraticMap, default_tree_basepoint,
                     periodic_pressure_estimate, pressure_comparison,
                     tree_pressure_estimate)


def test_periodic_squaring_t0(squaring):
    # 2^10 - 1 circle points (the superattracting origin is off the Julia set)
    est = periodic_pressure_estimate(squaring, 0.0, 10)
    assert est.value == pytest.approx(math.log(1023.0) / 10.0, abs=1e-12)


def test_periodic_squaring_t1(squaring):
    # every circle point has |(f^10)'| = 2^10
    est = periodic_pressure_estimate(squaring, 1.0, 10)
    assert est.value == pytest.approx(math.log(1023.0 / 1024.0) / 10.0, abs=1e-9)


def test_periodic_squaring_t2(squaring):
    est = periodic_pressure_estimate(squaring, 2.0, 8)
    expected = (math.log(255.0) - 16.0 * math.log(2.0)) / 8.0
    assert est.value == pytest.approx(expected, abs=1e-9)


def test_tree_squaring_t1_exact_zero(squaring):
    est = tree_pressure_estimate(squaring, 1.0 + 0j, 1.0, 10)
    assert est.value == pytest.approx(0.0, abs=1e-10)


def test_tree_squaring_t0_log2(squaring):
    est = tree_pressure_estimate(squaring, 1.0 + 0j, 0.0, 10)
    assert est.value == pytest.approx(math.log(2.0), abs=1e-12)


def test_tree_counting_independent_of_derivatives(chebyshev):
    est = tree_pressure_estimate(chebyshev, 1j, 0.0, 8)
    assert est.value == pytest.approx(math.log(2.0), abs=1e-12)


def test_tree_branch_point_error(basilica):
    # basepoint = c is the critical value: its backward tree passes through 0
    with pytest.raises(BranchPointError):
        tree_pressure_estimate(basilica, basilica.c, 1.0, 3)


def test_comparison_squaring_closed_form(squaring):
    curve = pressure_comparison(squaring, 1.0 + 0.01j, [0.0, 0.5, 1.0, 2.0], 12)
    for t in curve.t_grid:
        target = (1.0 - t) * math.log(2.0)
        assert curve.value(t, 12, "periodic") == pytest.approx(target, abs=1e-3)
        assert curve.value(t, 12, "tree") == pytest.approx(target, abs=1e-3)
    assert curve.discrepancy < 1e-3


def test_comparison_basilica_levels(basilica):
    z = default_tree_basepoint(basilica)
    curve = pressure_comparison(basilica, z, [0.0, 1.0], 10)
    # at t=0 both sides are pure counting and nearly coincide; at t=1 the
    # tree prefactor bias (~0.8/n here) dominates the gap
    per0 = curve.value(0.0, 10, "periodic")
    tree0 = curve.value(0.0, 10, "tree")
    assert abs(per0 - tree0) < 1e-3
    assert curve.discrepancy < 0.12
    # both levels present for the trend readout
    levels = {e.n for e in curve.estimates}
    assert levels == {9, 10}


def test_degenerate_grid_counting(basilica):
    curve = pressure_comparison(basilica, default_tree_basepoint(basilica), [0.0], 8)
    per = curve.value(0.0, 8, "periodic")
    tree = curve.value(0.0, 8, "tree")
    count_in_julia = 2 ** 8 - 2  # the superattracting 2-cycle is excluded
    assert per == pytest.approx(math.log(count_in_julia) / 8.0, abs=1e-12)
    assert tree == pytest.approx(math.log(2.0), abs=1e-12)
    assert curve.discrepancy == pytest.approx(abs(per - tree))


def test_monotone_in_t_when_derivatives_expand(squaring):
    values = [periodic_pressure_estimate(squaring, t, 8).value
              for t in (0.0, 0.5, 1.0, 1.5, 2.0)]
    assert all(b <= a + 1e-12 for a, b in zip(values, values[1:]))


def test_tree_mode_records_basepoint(squaring):
    est = tree_pressure_estimate(squaring, 2.0 + 0j, 1.0, 4)
    assert est.basepoint == 2.0 + 0j
    assert est.mode == "tree"
    assert est.value * est.n == pytest.approx(est.log_sum)


def test_negative_t_warns(squaring):
    with pytest.warns(UserWarning):
        periodic_pressure_estimate(squaring, -0.5, 4)


def test_periodic_estimate_stable_under_tighter_precision(basilica):
    from quadray import PrecisionConfig
    loose = periodic_pressure_estimate(basilica, 1.0, 8)
    tight = periodic_pressure_estimate(
        basilica, 1.0, 8, PrecisionConfig(newton_tol=1e-13, dedup_tol=1e-12))
    assert abs(loose.value - tight.value) < 1e-9
