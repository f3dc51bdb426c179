import math

import pytest

from src.quenchfidelity.dynamics.quench import KGrid, QuenchSpec, fidelity_decay_rate, lbar_rate_function
from src.quenchfidelity.models import XY_MODEL
from src.quenchfidelity.modes.mode_analysis import find_k0_k1_roots, mode_report

ETA_F = -2.0


def alpha(reference_initial, h_f, scale):
    # breakpoints on the scale of the structure next to k = 0 and k = pi, plus every interior antiparallel mode
    q = QuenchSpec(XY_MODEL, reference_initial, (h_f, ETA_F), KGrid(2))
    offsets = [scale * s for s in (0.25, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0)]
    points = offsets + [math.pi - p for p in offsets]
    points += list(find_k0_k1_roots(XY_MODEL, reference_initial, (h_f, ETA_F)).k0)
    return fidelity_decay_rate(q, thermodynamic_limit=True, singular_points=points)


def secant(reference_initial, h1, h2, scale):
    return (alpha(reference_initial, h2, scale) - alpha(reference_initial, h1, scale)) / (h2 - h1)


def slope_increments(slope_at):
    slopes = [slope_at(delta) for delta in (1e-3, 1e-4, 1e-5)]
    return slopes[1] - slopes[0], slopes[2] - slopes[1]


@pytest.mark.parametrize("field", [-1.0, 1.0])
def test_fidelity_rate_slope_diverges_logarithmically_at_the_field_lines(reference_initial, field):
    above = slope_increments(lambda d: secant(reference_initial, field + d, field + 2 * d, d))
    below = slope_increments(lambda d: secant(reference_initial, field - 2 * d, field - d, d))
    # every decade closer to the field line adds a constant to the slope
    for first, second in (above, below):
        assert first > 0.02 and second > 0.02
        assert 0.5 < second / first < 2.0
    expected = math.log(10.0) / (8.0 * math.pi)
    assert above[1] == pytest.approx(expected, rel=0.25)
    assert below[1] == pytest.approx(expected, rel=0.25)


def test_fidelity_rate_slope_settles_away_from_critical_lines(reference_initial):
    first, second = slope_increments(lambda d: secant(reference_initial, 0.5 + d, 0.5 + 2 * d, d))
    assert abs(first) < 1e-2
    assert abs(second) < 1e-2


def test_interior_antiparallel_mode_enters_past_h_three_halves(reference_initial):
    below = mode_report(XY_MODEL, reference_initial, (1.4, ETA_F))
    above = mode_report(XY_MODEL, reference_initial, (1.6, ETA_F))
    assert below.boundary_flags == above.boundary_flags == (0, 0)
    assert (below.n_k0, above.n_k0) == (2, 3)
    assert math.cos(above.k0_roots[0]) == pytest.approx((4.0 - 0.8 * 1.6) / 2.8, abs=1e-9)


def test_lbar_rate_is_finite_without_critical_modes(reference_initial):
    q = QuenchSpec(XY_MODEL, reference_initial, (-2.0, ETA_F), KGrid(2))
    assert math.isfinite(lbar_rate_function(q, thermodynamic_limit=True))
    assert lbar_rate_function(q, thermodynamic_limit=True) > 0.0


@pytest.mark.parametrize("h_f, expected", [(1.501, 1.16991), (1.5001, 1.2403)])
def test_fidelity_rate_next_to_the_entering_antiparallel_mode(reference_initial, h_f, expected):
    # ln F^q falls to about -20 at k = 1e-5 here; a cancelling 1 + g would floor it near -690
    assert alpha(reference_initial, h_f, math.sqrt(h_f - 1.5)) == pytest.approx(expected, abs=2e-4)


def test_fidelity_rate_slope_stays_bounded_once_the_antiparallel_mode_is_inside(reference_initial):
    # below h_f = 3/2 the cross product only comes close to zero near k = 0, on a scale sqrt(3/2 - h_f)
    below = slope_increments(lambda d: secant(reference_initial, 1.5 - 2 * d, 1.5 - d, math.sqrt(d)))
    above = slope_increments(lambda d: secant(reference_initial, 1.5 + d, 1.5 + 2 * d, math.sqrt(d)))
    assert below[0] > 1.0
    assert below[1] > 2.0 * below[0]
    assert abs(above[0]) < 0.05
    assert abs(above[1]) < 0.05
