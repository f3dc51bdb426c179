"""
Loschmidt echoes, quench fidelities and their size-normalized rate functions.

Per-mode quantities take two DVectors; whole-system quantities take a
QuenchSpec and work on the interior momentum grid 2*pi*m/L, m = 1 .. L/2 - 1.
Sums and products run in ascending k so results are bit-reproducible.
"""

from dataclasses import dataclass, field
import logging
import math
from typing import Iterable, Sequence, Tuple

import numpy as np
from scipy.integrate import quad

from src.quenchfidelity.core.bloch import GAP_TOLERANCE, DVector, unit_dot
from src.quenchfidelity.core.errors import DomainError, GapClosed
from src.quenchfidelity.models.model_spec import ModelSpec

logger = logging.getLogger(__name__)

FIDELITY_DOMAIN_TOLERANCE = 1e-12
QUAD_EPSABS = 1e-9
QUAD_LIMIT = 500
_LOG_FLOOR = 1e-300


@dataclass(frozen=True)
class KGrid:
    """Interior momenta k_m = 2 pi m / L of an even-L periodic chain."""

    L: int
    momenta: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not isinstance(self.L, (int, np.integer)) or self.L <= 0 or self.L % 2:
            raise DomainError(f"system size L must be an even positive integer, got {self.L!r}")
        momenta = 2.0 * np.pi * np.arange(1, self.L // 2) / self.L
        momenta.setflags(write=False)
        object.__setattr__(self, "momenta", momenta)

    @property
    def spacing(self) -> float:
        return 2.0 * math.pi / self.L

    def __len__(self) -> int:
        return len(self.momenta)


@dataclass(frozen=True)
class QuenchSpec:
    """A sudden quench gamma_i -> gamma_f of a registered model on a momentum grid."""

    model: ModelSpec
    gamma_i: Tuple[float, ...]
    gamma_f: Tuple[float, ...]
    kgrid: KGrid

    def __post_init__(self):
        object.__setattr__(self, "gamma_i", self.model.check_gamma(self.gamma_i, "gamma_i"))
        object.__setattr__(self, "gamma_f", self.model.check_gamma(self.gamma_f, "gamma_f"))

    @property
    def L(self) -> int:
        return self.kgrid.L


@dataclass(frozen=True)
class LoschmidtSeries:
    times: np.ndarray
    momenta: np.ndarray
    values_per_k: np.ndarray  # shape (len(times), len(momenta))
    total: np.ndarray
    rate: np.ndarray
    rate_infinite: np.ndarray  # True where the total echo is exactly zero


@dataclass(frozen=True)
class ModeVectors:
    """Unit Bloch vectors and norms of both Hamiltonians on a set of momenta."""

    momenta: np.ndarray
    unit_i: np.ndarray
    unit_f: np.ndarray
    norm_i: np.ndarray
    norm_f: np.ndarray

    @classmethod
    def from_rows(
        cls, ks: np.ndarray, rows_i: np.ndarray, rows_f: np.ndarray, gap_tolerance: float = GAP_TOLERANCE
    ) -> "ModeVectors":
        """Normalize already evaluated d-vector rows; raises GapClosed naming the first offending k."""
        unit_i, norm_i = _unit_rows(rows_i, ks, gap_tolerance)
        unit_f, norm_f = _unit_rows(rows_f, ks, gap_tolerance)
        return cls(ks, unit_i, unit_f, norm_i, norm_f)

    @property
    def alignment(self) -> np.ndarray:
        return np.clip(np.einsum("ij,ij->i", self.unit_i, self.unit_f), -1.0, 1.0)

    @property
    def cross(self) -> np.ndarray:
        return np.cross(self.unit_i, self.unit_f)

    @property
    def cross_z(self) -> np.ndarray:
        return self.unit_i[:, 0] * self.unit_f[:, 1] - self.unit_i[:, 1] * self.unit_f[:, 0]

    @property
    def misalignment(self) -> np.ndarray:
        """1 - g^2 as |d-hat_i x d-hat_f|^2, exactly zero for identical directions."""
        return np.sum(self.cross ** 2, axis=1)

    @property
    def fidelity(self) -> np.ndarray:
        """F^q_k as |d-hat_i + d-hat_f| / 2, which keeps its relative accuracy as g -> -1."""
        return np.minimum(0.5 * np.linalg.norm(self.unit_i + self.unit_f, axis=1), 1.0)


def _unit_rows(rows: np.ndarray, ks: np.ndarray, gap_tolerance: float):
    norms = np.linalg.norm(rows[:, :3], axis=1)
    closed = np.flatnonzero(norms <= gap_tolerance)
    if closed.size:
        j = int(closed[0])
        raise GapClosed(float(norms[j]), float(ks[j]))
    return rows[:, :3] / norms[:, None], norms


def mode_vectors(
    model: ModelSpec, gamma_i, gamma_f, ks, gap_tolerance: float = GAP_TOLERANCE
) -> ModeVectors:
    """Evaluate both quench sides on `ks`; raises GapClosed naming the first offending k."""
    ks = np.atleast_1d(np.asarray(ks, dtype=float))
    return ModeVectors.from_rows(ks, model.dvectors(gamma_i, ks), model.dvectors(gamma_f, ks), gap_tolerance)


def loschmidt_k(d_i: DVector, d_f: DVector, t: float) -> float:
    """1 - [1 - (d-hat_i . d-hat_f)^2] sin^2(|d_f| t)."""
    g = unit_dot(d_i, d_f)
    value = 1.0 - (1.0 - g * g) * math.sin(d_f.norm * t) ** 2
    return min(1.0, max(0.0, value))


def lbar_k(d_i: DVector, d_f: DVector) -> float:
    """Time-minimum of the per-mode echo, (d-hat_i . d-hat_f)^2."""
    g = unit_dot(d_i, d_f)
    return g * g


def critical_times(d_f: DVector, n_max: int) -> list:
    """t_{c,n} = (2n - 1) pi / (2 |d_f|) for n = 1 .. n_max."""
    if n_max < 1:
        raise DomainError(f"n_max must be >= 1, got {n_max!r}")
    norm = d_f.norm
    if norm <= GAP_TOLERANCE:
        raise GapClosed(norm)
    return [(2 * n - 1) * math.pi / (2.0 * norm) for n in range(1, n_max + 1)]


def quench_fidelity_k(d_i: DVector, d_f: DVector) -> float:
    """
    |<psi_i|psi_f>| of the two ground states, sqrt[(1 + d-hat_i . d-hat_f) / 2],
    evaluated as |d-hat_i + d-hat_f| / 2.
    """
    return min(1.0, 0.5 * float(np.linalg.norm(d_i.unit() + d_f.unit())))


def relation_lbar_from_fidelity(fq: float) -> float:
    """(2 F^2 - 1)^2, the time-minimum echo recovered from the per-mode fidelity."""
    if not (-FIDELITY_DOMAIN_TOLERANCE <= fq <= 1.0 + FIDELITY_DOMAIN_TOLERANCE):
        raise DomainError(f"fidelity must lie in [0, 1], got {fq!r}")
    fq = min(1.0, max(0.0, fq))
    return (2.0 * fq * fq - 1.0) ** 2


def relation_curve(samples: int = 201) -> list:
    """(F, L-bar) pairs along F in [0, 1]."""
    return [{"fidelity_k": float(f), "lbar_k": relation_lbar_from_fidelity(float(f))} for f in np.linspace(0.0, 1.0, samples)]


def _neg_log_mean(values: np.ndarray, L: int) -> float:
    if np.any(values == 0.0):
        return math.inf
    return float(0.0 - np.sum(np.log(values)) / L)


def loschmidt_total(q: QuenchSpec, times: Sequence[float]) -> LoschmidtSeries:
    """
    Per-mode echoes on the interior grid, their product (taken in log space)
    and the rate function -(1/L) ln L(t). Boundary modes only add a phase.
    """
    times = np.asarray(times, dtype=float)
    vectors = mode_vectors(q.model, q.gamma_i, q.gamma_f, q.kgrid.momenta)
    sin_sq = np.sin(np.outer(times, vectors.norm_f)) ** 2
    values = np.clip(1.0 - vectors.misalignment[None, :] * sin_sq, 0.0, 1.0)

    zero = np.any(values == 0.0, axis=1)
    with np.errstate(divide="ignore"):
        log_sum = np.sum(np.log(values), axis=1)
    total = np.where(zero, 0.0, np.exp(log_sum))
    rate = np.where(zero, math.inf, 0.0 - log_sum / q.L)
    if zero.any():
        logger.info("echo vanishes exactly at %d of %d times", int(zero.sum()), len(times))
    return LoschmidtSeries(times, vectors.momenta, values, total, rate, zero)


def _thermodynamic_neg_log(integrand, singular_points: Iterable[float]) -> float:
    # -(1/2pi) * integral_0^pi ln f(k) dk
    def log_f(k):
        return math.log(max(integrand(k), _LOG_FLOOR))

    points = sorted(p for p in singular_points if 0.0 < p < math.pi)
    if points:
        value, error = quad(log_f, 0.0, math.pi, points=points, epsabs=QUAD_EPSABS, limit=QUAD_LIMIT)
    else:
        value, error = quad(log_f, 0.0, math.pi, epsabs=QUAD_EPSABS, limit=QUAD_LIMIT)
    logger.debug("thermodynamic integral %.17g (error estimate %.3g)", value, error)
    return 0.0 - value / (2.0 * math.pi)


def _at(model: ModelSpec, gamma_i, gamma_f, prop: str):
    # one ModeVectors property as a scalar function of k, for quad
    def value(k: float) -> float:
        return float(getattr(mode_vectors(model, gamma_i, gamma_f, [k]), prop)[0])

    return value


def lbar_rate_function(
    q: QuenchSpec, thermodynamic_limit: bool = False, singular_points: Iterable[float] = ()
) -> float:
    """
    -(1/L) sum_k ln L-bar_k, or the (0, pi) integral in the thermodynamic limit.
    Returns math.inf when a grid mode has L-bar_k exactly 0.
    """
    if thermodynamic_limit:
        g = _at(q.model, q.gamma_i, q.gamma_f, "alignment")
        return _thermodynamic_neg_log(lambda k: g(k) ** 2, singular_points)
    g = mode_vectors(q.model, q.gamma_i, q.gamma_f, q.kgrid.momenta).alignment
    return _neg_log_mean(g * g, q.L)


def fidelity_decay_rate(
    q: QuenchSpec, thermodynamic_limit: bool = False, singular_points: Iterable[float] = ()
) -> float:
    """-(1/L) sum_k ln F^q_k over the interior modes; math.inf on an exact zero."""
    if thermodynamic_limit:
        return _thermodynamic_neg_log(_at(q.model, q.gamma_i, q.gamma_f, "fidelity"), singular_points)
    return _neg_log_mean(grid_fidelities(q), q.L)


def grid_fidelities(q: QuenchSpec) -> np.ndarray:
    """F^q_k on the interior grid, ascending k."""
    return mode_vectors(q.model, q.gamma_i, q.gamma_f, q.kgrid.momenta).fidelity


def quench_fidelity_total(q: QuenchSpec) -> float:
    """Product of interior F^q_k times the 0/1 boundary-mode factors, when the model has them."""
    fidelities = grid_fidelities(q)
    total = 0.0 if np.any(fidelities == 0.0) else float(np.exp(np.sum(np.log(fidelities))))
    if q.model.boundary_fidelities is not None:
        f0, fpi = q.model.boundary_fidelities(q.gamma_i, q.gamma_f)
        total *= f0 * fpi
    return total


def loschmidt_rate_thermodynamic(
    model: ModelSpec, gamma_i, gamma_f, times: Sequence[float], singular_points: Iterable[float] = ()
) -> np.ndarray:
    """lambda(t) = -(1/2pi) integral_0^pi ln L_k(t) dk for each time."""
    singular_points = list(singular_points)
    rates = []
    for t in times:

        def echo(k, t=float(t)):
            vectors = mode_vectors(model, gamma_i, gamma_f, [k])
            return 1.0 - vectors.misalignment[0] * math.sin(vectors.norm_f[0] * t) ** 2

        rates.append(_thermodynamic_neg_log(echo, singular_points))
    return np.asarray(rates)


def rate_derivative(values: Sequence[float], params: Sequence[float]) -> np.ndarray:
    """Finite-difference derivative of a rate function along a parameter line."""
    values = np.asarray(values, dtype=float)
    params = np.asarray(params, dtype=float)
    if len(values) < 2:
        return np.zeros_like(values)
    with np.errstate(invalid="ignore"):
        return np.gradient(values, params)
