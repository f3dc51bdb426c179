"""
Brute-force checks that never touch the closed-form echo or fidelity formulas.

Ground and excited states come from numpy's Hermitian eigensolver applied to
build_matrix, time evolution from the spectral decomposition of H_f, and the
operator identities at a perpendicular (k_c) mode are checked with plain
matrix products.
"""

from dataclasses import dataclass, field
from enum import Enum
import json
import math
from typing import Optional, Tuple

import numpy as np
from scipy.linalg import expm
from scipy.optimize import brentq, minimize_scalar

from src.quenchfidelity.core.bloch import GAP_TOLERANCE, DVector, build_matrix
from src.quenchfidelity.core.errors import DomainError, GapClosed, PreconditionFailed

MIN_TIME_SAMPLES = 256
PERPENDICULAR_TOLERANCE = 1e-8
IDENTITY_TOLERANCE = 1e-10
_GOLDEN_TOL = 1e-12
_SQRT_HALF = math.sqrt(0.5)


class OracleProperty(Enum):
    STATE_MAPPING = "state_mapping"
    EXPECTATIONS = "expectations"
    ANTICOMMUTATOR = "anticommutator"
    FIDELITY_RELATION = "fidelity_relation"
    NUMERIC_LBAR = "numeric_lbar"
    LOSCHMIDT_EVOLUTION = "loschmidt_evolution"
    XY_CLOSED_FORM = "xy_closed_form"
    QUENCH_QUARTET = "quench_quartet"
    KC_REFINEMENT = "kc_refinement"
    K01_REFINEMENT = "k01_refinement"
    BOUNDARY_FIDELITIES = "boundary_fidelities"
    CRITICAL_TIME_ECHO = "critical_time_echo"
    CRITICAL_TIME_MINIMIZER = "critical_time_minimizer"
    SUFFICIENT_CONDITION = "sufficient_condition"
    WINDING_NUMBERS = "winding_numbers"
    DQPT_ORACLE = "dqpt_oracle"


@dataclass(frozen=True)
class OracleReport:
    checked_property: OracleProperty
    max_deviation: float
    tolerance: float
    passed: bool = field(init=False)
    witness: Optional[dict] = None
    seed: Optional[int] = None

    def __post_init__(self):
        object.__setattr__(self, "passed", bool(self.max_deviation <= self.tolerance))

    def as_record(self) -> dict:
        return {
            "property": self.checked_property.value,
            "max_deviation": self.max_deviation,
            "tolerance": self.tolerance,
            "passed": self.passed,
            "witness": json.dumps(self.witness, sort_keys=True) if self.witness is not None else None,
            "seed": self.seed,
        }


def _vector_witness(d_i: DVector, d_f: DVector) -> dict:
    return {"d_i": [d_i.dx, d_i.dy, d_i.dz, d_i.d0], "d_f": [d_f.dx, d_f.dy, d_f.dz, d_f.d0]}


def _eigensystem(d: DVector) -> Tuple[np.ndarray, np.ndarray]:
    if d.norm <= GAP_TOLERANCE:
        raise GapClosed(d.norm)
    return np.linalg.eigh(build_matrix(d).as_array())


def numeric_ground_state(d: DVector) -> np.ndarray:
    return _eigensystem(d)[1][:, 0]


def numeric_excited_state(d: DVector) -> np.ndarray:
    return _eigensystem(d)[1][:, 1]


def numeric_fidelity(d_i: DVector, d_f: DVector) -> float:
    """|<0_i|0_f>| from the eigensolver's ground states."""
    return float(abs(np.vdot(numeric_ground_state(d_i), numeric_ground_state(d_f))))


def evolved_overlap(d_i: DVector, d_f: DVector, t: float) -> float:
    """|<0_i| exp(-i H_f t) |0_i>|^2 with the propagator from a matrix exponential."""
    psi = numeric_ground_state(d_i)
    propagator = expm(-1j * t * build_matrix(d_f).as_array())
    return float(abs(np.vdot(psi, propagator @ psi)) ** 2)


class _SpectralEcho:
    """L(t) = |sum_j p_j exp(-i w_j t)|^2 with p_j = |<v_j|0_i>|^2 over the eigenpairs of H_f."""

    def __init__(self, d_i: DVector, d_f: DVector):
        psi = numeric_ground_state(d_i)
        energies, vectors = _eigensystem(d_f)
        self.energies = energies
        self.weights = np.abs(vectors.conj().T @ psi) ** 2
        self.window = 2.0 * math.pi / (energies[1] - energies[0])

    def amplitude(self, t):
        t = np.asarray(t, dtype=float)
        return np.exp(-1j * np.multiply.outer(t, self.energies)) @ self.weights

    def __call__(self, t):
        return np.abs(self.amplitude(t)) ** 2

    def derivative(self, t: float) -> float:
        phases = np.exp(-1j * self.energies * t)
        a = np.dot(phases, self.weights)
        da = np.dot(-1j * self.energies * phases, self.weights)
        return float(2.0 * np.real(np.conj(a) * da))


def numeric_echo_minimum(d_i: DVector, d_f: DVector, time_samples: int = MIN_TIME_SAMPLES) -> Tuple[float, float]:
    """
    (t*, L(t*)) for the minimum of the numerically evolved echo over one
    echo period [0, pi/|d_f|]: dense grid, golden-section refinement between the
    grid minimum's neighbours, then a Brent polish on dL/dt when it changes sign there.
    """
    if time_samples < MIN_TIME_SAMPLES:
        raise DomainError(f"time_samples must be >= {MIN_TIME_SAMPLES}, got {time_samples!r}")
    echo = _SpectralEcho(d_i, d_f)
    times = np.linspace(0.0, echo.window, time_samples + 1)
    values = echo(times)
    j = int(np.argmin(values))
    if j == 0 or j == len(times) - 1:
        return float(times[j]), float(values[j])

    a, b, c = times[j - 1], times[j], times[j + 1]
    try:
        result = minimize_scalar(lambda t: float(echo(t)), bracket=(a, b, c), method="golden", tol=_GOLDEN_TOL)
        t_min = float(result.x)
    except ValueError:
        t_min = float(b)
    if echo.derivative(a) * echo.derivative(c) < 0.0:
        t_min = float(brentq(echo.derivative, a, c, xtol=1e-15))
    return t_min, float(echo(t_min))


def numeric_lbar(d_i: DVector, d_f: DVector, time_samples: int = MIN_TIME_SAMPLES) -> float:
    """Time-minimum of the numerically evolved per-mode echo."""
    return numeric_echo_minimum(d_i, d_f, time_samples)[1]


def _require_perpendicular(d_i: DVector, d_f: DVector, both_traceless: bool) -> None:
    fidelity = numeric_fidelity(d_i, d_f)
    if abs(fidelity - _SQRT_HALF) > PERPENDICULAR_TOLERANCE:
        raise PreconditionFailed(f"fidelity {fidelity!r} is not sqrt(2)/2 within {PERPENDICULAR_TOLERANCE}")
    if d_f.d0 != 0.0:
        raise PreconditionFailed(f"post-quench d0 must vanish, got {d_f.d0!r}")
    if both_traceless and d_i.d0 != 0.0:
        raise PreconditionFailed(f"pre-quench d0 must vanish, got {d_i.d0!r}")


def check_state_mapping(d_i: DVector, d_f: DVector) -> OracleReport:
    """H_f|0_i> must be parallel to |1_i> with a coefficient of modulus |d_f|."""
    _require_perpendicular(d_i, d_f, both_traceless=False)
    h_f = build_matrix(d_f).as_array()
    ground, excited = numeric_ground_state(d_i), numeric_excited_state(d_i)
    image = h_f @ ground
    coefficient = np.vdot(excited, image)
    orthogonal = float(np.linalg.norm(image - coefficient * excited))
    modulus = abs(abs(coefficient) - d_f.norm) / d_f.norm
    return OracleReport(
        OracleProperty.STATE_MAPPING,
        max(orthogonal, modulus),
        IDENTITY_TOLERANCE,
        witness=_vector_witness(d_i, d_f),
    )


def expectation_values(d_i: DVector, d_f: DVector) -> Tuple[float, float]:
    """(<0_i|H_f|0_i>, <0_i|H_f^2|0_i>) by matrix products, without any precondition."""
    h_f = build_matrix(d_f).as_array()
    ground = numeric_ground_state(d_i)
    first = np.vdot(ground, h_f @ ground).real
    second = np.vdot(ground, h_f @ (h_f @ ground)).real
    return float(first), float(second)


def check_expectations(d_i: DVector, d_f: DVector) -> OracleReport:
    """<0_i|H_f|0_i> = 0 and <0_i|H_f^2|0_i> = |d_f|^2 at a perpendicular mode."""
    _require_perpendicular(d_i, d_f, both_traceless=False)
    first, second = expectation_values(d_i, d_f)
    norm_sq = d_f.norm ** 2
    deviation = max(abs(first), abs(second - norm_sq) / norm_sq)
    return OracleReport(OracleProperty.EXPECTATIONS, deviation, IDENTITY_TOLERANCE, witness=_vector_witness(d_i, d_f))


def check_anticommutator(d_i: DVector, d_f: DVector) -> OracleReport:
    """{H_i, H_f} = 0 for perpendicular traceless pairs, to 1e-10 |d_i||d_f|."""
    _require_perpendicular(d_i, d_f, both_traceless=True)
    h_i = build_matrix(d_i).as_array()
    h_f = build_matrix(d_f).as_array()
    deviation = float(np.max(np.abs(h_i @ h_f + h_f @ h_i)))
    return OracleReport(
        OracleProperty.ANTICOMMUTATOR,
        deviation,
        IDENTITY_TOLERANCE * d_i.norm * d_f.norm,
        witness=_vector_witness(d_i, d_f),
    )


def batched_echo_minima(rows_i: np.ndarray, rows_f: np.ndarray, time_samples: int = MIN_TIME_SAMPLES) -> np.ndarray:
    """
    min_t L_k(t) for many modes at once, one full period per mode sampled on an
    odd grid. Rows hold (dx, dy, dz, d0); the eigenproblems are solved as a stack.
    """
    def stack(rows):
        dx, dy, dz, d0 = rows.T
        m = np.empty((len(rows), 2, 2), dtype=complex)
        m[:, 0, 0] = d0 + dz
        m[:, 1, 1] = d0 - dz
        m[:, 0, 1] = dx - 1j * dy
        m[:, 1, 0] = dx + 1j * dy
        return m

    _, vec_i = np.linalg.eigh(stack(rows_i))
    energies, vec_f = np.linalg.eigh(stack(rows_f))
    ground = vec_i[:, :, 0]
    weights = np.abs(np.einsum("nij,ni->nj", vec_f.conj(), ground)) ** 2
    period = 2.0 * math.pi / (energies[:, 1] - energies[:, 0])
    fractions = np.linspace(0.0, 1.0, 2 * time_samples + 1)
    times = period[:, None] * fractions[None, :]
    phases = np.exp(-1j * times[:, :, None] * energies[:, None, :])
    echo = np.abs(np.einsum("ntj,nj->nt", phases, weights)) ** 2
    return echo.min(axis=1)
