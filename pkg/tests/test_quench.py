import math

from hypothesis import given, strategies as st
import numpy as np
import pytest

from src.quenchfidelity.core.bloch import DVector
from src.quenchfidelity.core.errors import DomainError, GapClosed
from src.quenchfidelity.dynamics.quench import (
    KGrid,
    QuenchSpec,
    critical_times,
    fidelity_decay_rate,
    grid_fidelities,
    lbar_k,
    lbar_rate_function,
    loschmidt_k,
    loschmidt_rate_thermodynamic,
    loschmidt_total,
    quench_fidelity_k,
    quench_fidelity_total,
    rate_derivative,
    relation_curve,
    relation_lbar_from_fidelity,
)
from src.quenchfidelity.models import XY_MODEL

component = st.floats(min_value=-5.0, max_value=5.0, allow_nan=False, allow_infinity=False)


def test_kgrid_holds_the_interior_momenta():
    grid = KGrid(30)
    assert len(grid) == 14
    assert grid.momenta[0] == pytest.approx(2 * math.pi / 30)
    assert grid.momenta[-1] == pytest.approx(2 * math.pi * 14 / 30)
    assert np.all(np.diff(grid.momenta) > 0)


@pytest.mark.parametrize("size", [0, -4, 7, 3.0])
def test_kgrid_rejects_bad_sizes(size):
    with pytest.raises(DomainError):
        KGrid(size)


def test_echo_starts_at_one_and_reaches_lbar_at_the_critical_time():
    d_i, d_f = DVector(1.0, 0.5, -0.3), DVector(-0.2, 1.1, 0.7)
    assert loschmidt_k(d_i, d_f, 0.0) == 1.0
    t_c = critical_times(d_f, 1)[0]
    assert loschmidt_k(d_i, d_f, t_c) == pytest.approx(lbar_k(d_i, d_f), abs=1e-12)


def test_perpendicular_modes_have_zero_lbar_and_half_root_fidelity():
    d_i, d_f = DVector(0.0, 0.0, 1.0), DVector(1.0, 0.0, 0.0)
    assert lbar_k(d_i, d_f) == 0.0
    assert quench_fidelity_k(d_i, d_f) == pytest.approx(math.sqrt(0.5))


def test_critical_times_are_odd_multiples_of_a_quarter_period():
    times = critical_times(DVector(0.0, 2.0, 0.0), 3)
    assert times == pytest.approx([math.pi / 4, 3 * math.pi / 4, 5 * math.pi / 4])
    with pytest.raises(DomainError):
        critical_times(DVector(0.0, 2.0, 0.0), 0)
    with pytest.raises(GapClosed):
        critical_times(DVector(0.0, 0.0, 0.0), 1)


@given(component, component, component, component, component, component)
def test_lbar_equals_the_fidelity_relation(a, b, c, x, y, z):
    d_i, d_f = DVector(a, b, c), DVector(x, y, z)
    if d_i.norm < 1e-3 or d_f.norm < 1e-3:
        return
    assert lbar_k(d_i, d_f) == pytest.approx(relation_lbar_from_fidelity(quench_fidelity_k(d_i, d_f)), abs=1e-12)


def test_fidelity_relation_domain():
    assert relation_lbar_from_fidelity(0.0) == 1.0
    assert relation_lbar_from_fidelity(1.0) == 1.0
    assert relation_lbar_from_fidelity(math.sqrt(0.5)) == pytest.approx(0.0, abs=1e-15)
    with pytest.raises(DomainError):
        relation_lbar_from_fidelity(1.1)
    with pytest.raises(DomainError):
        relation_lbar_from_fidelity(-0.01)


def test_relation_curve_spans_the_unit_interval():
    curve = relation_curve(11)
    assert len(curve) == 11
    assert curve[0] == {"fidelity_k": 0.0, "lbar_k": 1.0}
    assert curve[-1] == {"fidelity_k": 1.0, "lbar_k": 1.0}


def test_identical_quench_has_an_identically_zero_rate(reference_initial):
    q = QuenchSpec(XY_MODEL, reference_initial, reference_initial, KGrid(30))
    series = loschmidt_total(q, np.linspace(0.0, 5.0, 51))
    assert np.all(series.rate == 0.0)
    assert np.all(series.total == 1.0)
    assert lbar_rate_function(q) == pytest.approx(0.0, abs=1e-14)


def test_total_echo_is_the_product_of_mode_echoes(reference_initial):
    q = QuenchSpec(XY_MODEL, reference_initial, (0.0, -2.0), KGrid(30))
    t = 0.83
    series = loschmidt_total(q, [t])
    per_mode = [
        loschmidt_k(XY_MODEL.dvector(q.gamma_i, k), XY_MODEL.dvector(q.gamma_f, k), t) for k in q.kgrid.momenta
    ]
    assert series.values_per_k[0] == pytest.approx(per_mode, abs=1e-12)
    assert series.total[0] == pytest.approx(np.prod(per_mode), rel=1e-10)
    assert series.rate[0] == pytest.approx(-np.log(np.prod(per_mode)) / 30, rel=1e-10)


def test_exact_zero_factors_give_infinite_rates(constant_model):
    perpendicular = QuenchSpec(constant_model, (0, 0, 1), (1, 0, 0), KGrid(8))
    assert lbar_rate_function(perpendicular) == math.inf
    series = loschmidt_total(perpendicular, [0.0, math.pi / 2])
    assert list(series.rate_infinite) == [False, True]
    assert series.rate[1] == math.inf
    assert series.total[1] == 0.0

    antiparallel = QuenchSpec(constant_model, (0, 0, 1), (0, 0, -1), KGrid(8))
    assert fidelity_decay_rate(antiparallel) == math.inf
    assert lbar_rate_function(antiparallel) == pytest.approx(0.0, abs=1e-15)


def test_gap_closing_on_the_grid_names_the_momentum():
    # eta = 0 and h = -1/2 close the gap at k = pi/3, a grid point for L = 6
    with pytest.raises(GapClosed) as info:
        lbar_rate_function(QuenchSpec(XY_MODEL, (-2.0, 0.8), (-0.5, 0.0), KGrid(6)))
    assert info.value.k == pytest.approx(math.pi / 3)


def test_finite_size_rates_approach_the_thermodynamic_limit(reference_initial):
    gamma_f = (-2.0, -2.0)
    q = QuenchSpec(XY_MODEL, reference_initial, gamma_f, KGrid(4000))
    assert lbar_rate_function(q) == pytest.approx(lbar_rate_function(q, thermodynamic_limit=True), abs=1e-6)
    assert fidelity_decay_rate(q) == pytest.approx(fidelity_decay_rate(q, thermodynamic_limit=True), abs=1e-6)
    finite = loschmidt_total(q, [1.0]).rate[0]
    assert finite == pytest.approx(loschmidt_rate_thermodynamic(XY_MODEL, reference_initial, gamma_f, [1.0])[0], abs=1e-6)


def test_thermodynamic_echo_rate_vanishes_at_time_zero(reference_initial):
    rates = loschmidt_rate_thermodynamic(XY_MODEL, reference_initial, (0.0, -2.0), [0.0])
    assert rates[0] == 0.0


def test_total_fidelity_includes_the_boundary_factors(reference_initial):
    # h_f = 0 flips the k = 0 occupation, so the many-body overlap vanishes exactly
    q = QuenchSpec(XY_MODEL, reference_initial, (0.0, -2.0), KGrid(30))
    assert quench_fidelity_total(q) == 0.0
    assert math.isfinite(fidelity_decay_rate(q))

    same_phase = QuenchSpec(XY_MODEL, reference_initial, (-2.5, 0.5), KGrid(30))
    assert quench_fidelity_total(same_phase) == pytest.approx(float(np.prod(grid_fidelities(same_phase))), rel=1e-12)


def test_rate_derivative_of_a_line_is_its_slope():
    params = np.linspace(-1.0, 1.0, 21)
    slope = rate_derivative(3.0 * params + 1.0, params)
    assert slope == pytest.approx(np.full(21, 3.0))
    assert list(rate_derivative([1.0], [0.0])) == [0.0]


def vector_pairs():
    return st.tuples(st.builds(DVector, component, component, component), st.builds(DVector, component, component, component))


@given(vector_pairs(), component, component)
def test_per_mode_quantities_ignore_the_identity_parts(pair, a0, b0):
    d_i, d_f = pair
    if d_i.norm < 1e-3 or d_f.norm < 1e-3:
        return
    shifted_i, shifted_f = d_i.shifted(a0), d_f.shifted(b0)
    assert lbar_k(shifted_i, shifted_f) == lbar_k(d_i, d_f)
    assert quench_fidelity_k(shifted_i, shifted_f) == quench_fidelity_k(d_i, d_f)
    assert loschmidt_k(shifted_i, shifted_f, 1.3) == loschmidt_k(d_i, d_f, 1.3)


@given(vector_pairs())
def test_per_mode_quantities_are_symmetric_in_the_quench(pair):
    d_i, d_f = pair
    if d_i.norm < 1e-3 or d_f.norm < 1e-3:
        return
    assert lbar_k(d_i, d_f) == pytest.approx(lbar_k(d_f, d_i), abs=1e-15)
    assert quench_fidelity_k(d_i, d_f) == pytest.approx(quench_fidelity_k(d_f, d_i), abs=1e-15)


@given(vector_pairs(), st.floats(min_value=0.0, max_value=100.0))
def test_echo_never_falls_below_its_time_minimum(pair, t):
    d_i, d_f = pair
    if d_i.norm < 1e-3 or d_f.norm < 1e-3:
        return
    assert loschmidt_k(d_i, d_f, t) >= lbar_k(d_i, d_f) - 1e-10


def test_fidelity_keeps_relative_precision_near_antiparallel_vectors():
    # 1 + g rounds to zero here; |d-hat_i + d-hat_f| / 2 does not
    assert quench_fidelity_k(DVector(1.0, 0.0, 0.0), DVector(-1.0, 1e-9, 0.0)) == pytest.approx(5e-10, rel=1e-6)
    assert quench_fidelity_k(DVector(1.0, 0.0, 0.0), DVector(-1.0, 0.0, 0.0)) == 0.0


def test_grid_fidelities_resolve_modes_next_to_an_antiparallel_boundary(reference_initial):
    # just past h_f = 3/2 the lowest momenta sit very close to antiparallel
    q = QuenchSpec(XY_MODEL, reference_initial, (1.501, -2.0), KGrid(200_000))
    fidelities = grid_fidelities(q)
    assert np.all(fidelities > 0.0)
    assert math.isfinite(fidelity_decay_rate(q))
