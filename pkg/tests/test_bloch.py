import math

from hypothesis import assume, given, settings, strategies as st
import numpy as np
import pytest

from src.quenchfidelity.core.bloch import (
    DVector,
    SpinorState,
    build_matrix,
    evolution_operator,
    evolve,
    excited_state,
    ground_state,
    inner_product,
    overlap_modulus,
    unit_dot,
)
from src.quenchfidelity.core.errors import DomainError, GapClosed

component = st.floats(min_value=-10.0, max_value=10.0, allow_nan=False, allow_infinity=False)


def dvectors():
    return st.builds(DVector, component, component, component, component)


@given(dvectors())
def test_ground_state_is_the_lower_eigenvector(d):
    assume(d.norm > 1e-3)
    h = build_matrix(d).as_array()
    psi = ground_state(d).as_array()
    residual = h @ psi - (d.d0 - d.norm) * psi
    assert np.linalg.norm(residual) <= 1e-12 * max(1.0, d.norm + abs(d.d0))


@given(dvectors())
def test_excited_state_is_the_upper_eigenvector_and_orthogonal(d):
    assume(d.norm > 1e-3)
    h = build_matrix(d).as_array()
    psi = excited_state(d).as_array()
    assert np.linalg.norm(h @ psi - (d.d0 + d.norm) * psi) <= 1e-12 * max(1.0, d.norm + abs(d.d0))
    assert abs(inner_product(ground_state(d), excited_state(d))) < 1e-12


@given(dvectors())
def test_canonical_phase_makes_the_pivot_real(d):
    assume(d.norm > 1e-3)
    s = ground_state(d)
    largest = max(abs(s.a), abs(s.b))
    assert any(
        abs(x) >= largest - 1e-12 and abs(x.imag) < 1e-12 and x.real >= 0.0 for x in (s.a, s.b)
    )


@given(dvectors(), dvectors())
def test_overlap_squared_matches_half_one_plus_alignment(d_i, d_f):
    assume(d_i.norm > 1e-3 and d_f.norm > 1e-3)
    overlap = overlap_modulus(ground_state(d_i), ground_state(d_f))
    assert overlap ** 2 == pytest.approx(0.5 * (1.0 + unit_dot(d_i, d_f)), abs=1e-12)


@given(dvectors(), st.floats(min_value=-50.0, max_value=50.0))
@settings(deadline=None)
def test_evolution_is_unitary(d, t):
    u = evolution_operator(d, t)
    assert np.allclose(u.conj().T @ u, np.eye(2), atol=1e-12)


def test_evolution_with_only_d0_is_a_phase():
    d = DVector(0.0, 0.0, 0.0, 2.0)
    u = evolution_operator(d, 0.5)
    assert np.allclose(u, np.exp(-1j) * np.eye(2))


def test_evolve_keeps_the_state_normalized():
    s = SpinorState.normalized(1.0, 1j)
    out = evolve(DVector(0.3, -1.2, 2.0, 0.4), 3.7, s)
    assert abs(out.a) ** 2 + abs(out.b) ** 2 == pytest.approx(1.0, abs=1e-12)


def test_build_matrix_is_hermitian_with_trace_two_d0():
    m = build_matrix(DVector(1.0, 2.0, 3.0, 0.5))
    entries = m.as_array()
    assert np.allclose(entries, entries.conj().T)
    assert m.trace == pytest.approx(1.0)


def test_unit_dot_examples():
    assert unit_dot(DVector(1, 2, 3), DVector(2, 4, 6)) == pytest.approx(1.0)
    assert unit_dot(DVector(1, 0, 0), DVector(-3, 0, 0)) == -1.0
    assert unit_dot(DVector(1, 0, 0), DVector(0, 1, 0)) == 0.0


def test_zero_vector_has_no_ground_state():
    with pytest.raises(GapClosed) as info:
        ground_state(DVector(0.0, 0.0, 0.0))
    assert info.value.norm == 0.0


def test_non_finite_components_are_rejected():
    with pytest.raises(DomainError):
        DVector(math.nan, 0.0)
    with pytest.raises(DomainError):
        evolution_operator(DVector(1.0, 0.0), math.inf)


def test_spinor_must_be_normalized():
    with pytest.raises(DomainError):
        SpinorState(1.0, 1.0)
    with pytest.raises(DomainError):
        SpinorState.normalized(0.0, 0.0)


def test_sigma_z_ground_state_is_the_lower_basis_state():
    s = ground_state(DVector(0.0, 0.0, 1.0))
    assert s.a == 0
    assert s.b == pytest.approx(1.0)


times = st.floats(min_value=-20.0, max_value=20.0, allow_nan=False, allow_infinity=False)


@given(dvectors(), times, times)
@settings(deadline=None)
def test_evolution_composes_over_consecutive_intervals(d, t1, t2):
    s = SpinorState.normalized(0.6, 0.8j)
    direct = evolve(d, t1 + t2, s).as_array()
    stepwise = evolve(d, t2, evolve(d, t1, s)).as_array()
    assert np.allclose(direct, stepwise, atol=1e-10)


@given(dvectors(), st.floats(min_value=0.01, max_value=100.0), component)
def test_ground_state_ignores_scale_and_identity_part(d, factor, d0):
    assume(d.norm > 1e-3)
    reference = ground_state(d)
    for other in (d.scaled(factor), d.scaled(factor, d0=d0), d.shifted(d0)):
        assert overlap_modulus(reference, ground_state(other)) == pytest.approx(1.0, abs=1e-12)


@given(dvectors())
def test_half_period_evolution_is_minus_identity(d):
    assume(d.norm > 1e-3)
    traceless = d.shifted(0.0)
    assert np.allclose(evolution_operator(traceless, math.pi / traceless.norm), -np.eye(2), atol=1e-12)


@given(dvectors())
def test_matrix_maps_the_ground_state_to_its_energy(d):
    assume(d.norm > 1e-3)
    psi = ground_state(d)
    image = build_matrix(d).apply(psi)
    assert np.allclose(image, (d.d0 - d.norm) * psi.as_array(), atol=1e-12 * max(1.0, d.norm + abs(d.d0)))
