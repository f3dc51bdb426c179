"""
The anisotropic XY chain in a transverse field, in its momentum-space
two-band form d_k = (-2h - 2 cos k, -2 eta sin k, 0), d_0 = 0.

Besides the d-vectors this module carries the closed-form per-mode
quantities, the decoupled k=0 / k=pi occupations, the winding number and
the equilibrium phase classification.
"""

from dataclasses import dataclass
from enum import Enum
import logging
import math
from typing import List, Tuple

import numpy as np
from scipy.integrate import trapezoid

from src.quenchfidelity.core.bloch import GAP_TOLERANCE, DVector
from src.quenchfidelity.core.errors import CriticalBoundary, DomainError, GapClosed, NonIntegerResult
from src.quenchfidelity.models.model_spec import ModelSpec

logger = logging.getLogger(__name__)

BOUNDARY_TOLERANCE = 1e-12
WINDING_MIN_EXPONENT = 10
WINDING_MAX_EXPONENT = 20
WINDING_SNAP_TOLERANCE = 1e-6


@dataclass(frozen=True)
class XYParams:
    """Transverse field strength h and anisotropy eta."""

    h: float
    eta: float

    def __post_init__(self):
        if not (math.isfinite(self.h) and math.isfinite(self.eta)):
            raise DomainError(f"XY parameters must be finite, got h={self.h!r}, eta={self.eta!r}")
        object.__setattr__(self, "h", float(self.h))
        object.__setattr__(self, "eta", float(self.eta))

    @classmethod
    def from_gamma(cls, gamma) -> "XYParams":
        h, eta = gamma
        return cls(h, eta)

    def as_gamma(self) -> Tuple[float, float]:
        return (self.h, self.eta)


class EquilibriumPhase(Enum):
    """Regions of the (h, eta) plane, ordered along h and then by the sign of eta."""

    H_BELOW_MINUS_ONE = 0
    INNER_ETA_POSITIVE = 1
    INNER_ETA_NEGATIVE = 2
    H_ABOVE_PLUS_ONE = 3
    CRITICAL = -1


def xy_dvectors(gamma, ks) -> np.ndarray:
    h, eta = gamma
    ks = np.asarray(ks, dtype=float)
    rows = np.zeros((ks.size, 4))
    rows[:, 0] = -2.0 * h - 2.0 * np.cos(ks)
    rows[:, 1] = -2.0 * eta * np.sin(ks)
    return rows


def xy_dvector(p: XYParams, k: float) -> DVector:
    """d-vector of mode k in [0, pi]."""
    if not 0.0 <= k <= math.pi:
        raise DomainError(f"k must lie in [0, pi], got {k!r}")
    return DVector(-2.0 * p.h - 2.0 * math.cos(k), -2.0 * p.eta * math.sin(k), 0.0, 0.0)


def _mode_weights(p: XYParams, k: float) -> Tuple[float, float]:
    # d / (-2) = (h + cos k, eta sin k)
    x, y = p.h + math.cos(k), p.eta * math.sin(k)
    return x, y


def _check_gap(p: XYParams, k: float) -> float:
    x, y = _mode_weights(p, k)
    norm = 2.0 * math.hypot(x, y)
    if norm <= GAP_TOLERANCE:
        raise GapClosed(norm, k)
    return x * x + y * y


def xy_lbar_closed_form(pi: XYParams, pf: XYParams, k: float) -> float:
    """Time-minimum of the per-mode echo written directly in (h, eta)."""
    den_i, den_f = _check_gap(pi, k), _check_gap(pf, k)
    c, s = math.cos(k), math.sin(k)
    num = (pi.h + c) * (pf.h + c) + pi.eta * pf.eta * s * s
    return num * num / (den_i * den_f)


def xy_fidelity_closed_form(pi: XYParams, pf: XYParams, k: float) -> float:
    """Per-mode quench fidelity written directly in (h, eta)."""
    den_i, den_f = _check_gap(pi, k), _check_gap(pf, k)
    c, s = math.cos(k), math.sin(k)
    num = (pi.h + c) * (pf.h + c) + pi.eta * pf.eta * s * s
    value = num / (2.0 * math.sqrt(den_i * den_f)) + 0.5
    return math.sqrt(min(1.0, max(0.0, value)))


def _on_field_line(h: float) -> bool:
    return abs(h + 1.0) <= BOUNDARY_TOLERANCE or abs(h - 1.0) <= BOUNDARY_TOLERANCE


def xy_boundary_fidelities(pi: XYParams, pf: XYParams) -> Tuple[int, int]:
    """
    Fidelity factors (F_0, F_pi) of the decoupled k=0 and k=pi fermion modes:
    1 when the pre- and post-quench occupations agree, 0 otherwise.
    """
    for label, p in (("pre-quench", pi), ("post-quench", pf)):
        if _on_field_line(p.h):
            raise CriticalBoundary(f"{label} h={p.h!r} lies on a critical line h=+-1")
    f0 = int(np.sign(pi.h + 1.0) == np.sign(pf.h + 1.0))
    fpi = int(np.sign(pi.h - 1.0) == np.sign(pf.h - 1.0))
    return f0, fpi


def _winding_trapezoid(p: XYParams, samples: int) -> float:
    ks = np.linspace(-math.pi, math.pi, samples + 1)
    dx = -2.0 * p.h - 2.0 * np.cos(ks)
    dy = -2.0 * p.eta * np.sin(ks)
    ddx = 2.0 * np.sin(ks)
    ddy = -2.0 * p.eta * np.cos(ks)
    norm_sq = dx * dx + dy * dy
    if np.min(norm_sq) <= GAP_TOLERANCE ** 2:
        j = int(np.argmin(norm_sq))
        raise GapClosed(math.sqrt(norm_sq[j]), float(ks[j]))
    integrand = (dx * ddy - dy * ddx) / norm_sq
    return float(trapezoid(integrand, ks) / (2.0 * math.pi))


def xy_winding_number(p: XYParams) -> int:
    """
    Winding of (dx, dy) around the origin over the Brillouin zone, by composite
    trapezoid on [-pi, pi] with Richardson refinement and an integer snap.
    """
    previous = _winding_trapezoid(p, 2 ** WINDING_MIN_EXPONENT)
    for exponent in range(WINDING_MIN_EXPONENT + 1, WINDING_MAX_EXPONENT + 1):
        current = _winding_trapezoid(p, 2 ** exponent)
        extrapolated = current + (current - previous) / 3.0
        nearest = round(extrapolated)
        if abs(extrapolated - nearest) < WINDING_SNAP_TOLERANCE and abs(current - previous) < WINDING_SNAP_TOLERANCE:
            logger.debug("winding for %s converged at 2^%d samples", p, exponent)
            return int(nearest)
        previous = current
    raise NonIntegerResult(previous, 2 ** WINDING_MAX_EXPONENT)


def xy_equilibrium_phase(p: XYParams) -> EquilibriumPhase:
    """Classify (h, eta) against the lines h=-1, h=+1 and eta=0 for |h|<1."""
    if _on_field_line(p.h):
        return EquilibriumPhase.CRITICAL
    if p.h < -1.0:
        return EquilibriumPhase.H_BELOW_MINUS_ONE
    if p.h > 1.0:
        return EquilibriumPhase.H_ABOVE_PLUS_ONE
    if abs(p.eta) <= BOUNDARY_TOLERANCE:
        return EquilibriumPhase.CRITICAL
    return EquilibriumPhase.INNER_ETA_POSITIVE if p.eta > 0 else EquilibriumPhase.INNER_ETA_NEGATIVE


def xy_phase_grid(h_values, eta_values) -> List[dict]:
    """Region label and winding number for every (h, eta) of a grid, row-major in h."""
    rows = []
    for h in h_values:
        for eta in eta_values:
            p = XYParams(h, eta)
            phase = xy_equilibrium_phase(p)
            winding = None
            if phase is not EquilibriumPhase.CRITICAL:
                try:
                    winding = xy_winding_number(p)
                except (GapClosed, NonIntegerResult) as e:
                    logger.warning("winding failed at %s: %s", p, e)
            rows.append({"h": float(h), "eta": float(eta), "phase": phase.name, "winding": winding})
    return rows


def xy_mode_density(pi: XYParams, eta_f: float, h_values, ks) -> List[dict]:
    """L-bar_k and F^q_k on a (h_f, k) grid at fixed eta_f; gap-closed modes are skipped."""
    rows = []
    for h_f in h_values:
        pf = XYParams(h_f, eta_f)
        for k in ks:
            try:
                rows.append(
                    {
                        "h_f": float(h_f),
                        "k": float(k),
                        "lbar_k": xy_lbar_closed_form(pi, pf, k),
                        "fidelity_k": xy_fidelity_closed_form(pi, pf, k),
                    }
                )
            except GapClosed:
                continue
    return rows


def _is_critical(gamma) -> bool:
    return xy_equilibrium_phase(XYParams.from_gamma(gamma)) is EquilibriumPhase.CRITICAL


def _boundary_fidelities(gamma_i, gamma_f) -> Tuple[int, int]:
    return xy_boundary_fidelities(XYParams.from_gamma(gamma_i), XYParams.from_gamma(gamma_f))


XY_MODEL = ModelSpec(
    name="xy",
    param_names=("h", "eta"),
    dvector_map=xy_dvectors,
    planar=True,
    boundary_modes=(0.0, math.pi),
    boundary_fidelities=_boundary_fidelities,
    is_critical=_is_critical,
    description="anisotropic XY chain in a transverse field",
)
