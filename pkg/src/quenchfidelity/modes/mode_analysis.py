"""
Location and classification of the special momentum modes of a quench:

- k_c: d-hat_i perpendicular to d-hat_f (F^q_k = sqrt(2)/2, L-bar_k = 0),
- k_0: antiparallel (F^q_k = 0),
- k_1: parallel (F^q_k = 1).

Roots are bracketed on a uniform scan of [0, pi] and all brackets of a quench
are refined together by Illinois false position; even-multiplicity touch-zeros
and doubly occupied brackets are found by golden-section refinement of grid
local minima.
"""

from dataclasses import dataclass, field
from enum import Enum
import logging
import math
from typing import Callable, Dict, List, Optional, Sequence, Tuple
import warnings

import numpy as np
from scipy.optimize import minimize_scalar

from src.quenchfidelity.core.bloch import GAP_TOLERANCE, DVector, unit_dot
from src.quenchfidelity.core.errors import CriticalBoundary, DomainError, ResolutionWarning
from src.quenchfidelity.dynamics.quench import ModeVectors, QuenchSpec, mode_vectors
from src.quenchfidelity.models.model_spec import ModelSpec

logger = logging.getLogger(__name__)

CLASS_TOLERANCE = 1e-8
TOUCH_ACCEPT = 1e-8
TOUCH_PREFILTER = 1e-3
CONTINUUM_TOLERANCE = 1e-12
DISCONTINUITY_TOLERANCE = 1e-6
DEFAULT_RESOLUTION = 4096
MIN_RESOLUTION = 64
_ROOT_XTOL = 1e-15
_ROOT_RTOL = 4 * np.finfo(float).eps
_REFINE_MAX_STEPS = 200
_GOLDEN_TOL = 1e-10
_SQRT_HALF = math.sqrt(0.5)

Evaluator = Callable[[np.ndarray], np.ndarray]


class ModeClass(Enum):
    KC = "Kc"
    K0 = "K0"
    K1 = "K1"
    GENERIC = "Generic"


@dataclass(frozen=True)
class K01Roots:
    k0: Tuple[float, ...]
    k1: Tuple[float, ...]
    continuum_k0: bool = False
    continuum_k1: bool = False
    resolution_warning: bool = False


@dataclass(frozen=True)
class ModeReport:
    kc_roots: Tuple[float, ...] = ()
    k0_roots: Tuple[float, ...] = ()
    k1_roots: Tuple[float, ...] = ()
    n_kc: int = 0
    n_k0: int = 0
    n_k1: int = 0
    boundary_flags: Optional[Tuple[int, int]] = None
    continuum_k0: bool = False
    continuum_k1: bool = False
    resolution_warning: bool = False
    notes: Tuple[str, ...] = field(default=(), compare=False)

    @property
    def dqpt_exists(self) -> bool:
        return self.n_kc > 0


@dataclass(frozen=True)
class GridMode:
    """One row of the finite-L mode table."""

    k: float
    lbar_k: float
    fidelity_k: float
    mode_class: ModeClass
    kc_neighborhood: bool


def alignment(d_i: DVector, d_f: DVector) -> float:
    """g = d-hat_i . d-hat_f in [-1, 1]."""
    return unit_dot(d_i, d_f)


def _check_resolution(resolution: int) -> int:
    if int(resolution) < MIN_RESOLUTION:
        raise DomainError(f"resolution must be >= {MIN_RESOLUTION}, got {resolution!r}")
    return int(resolution)


def _scan_grid(model: ModelSpec, gamma_i, gamma_f, resolution: int) -> ModeVectors:
    # closed interval [0, pi]; an endpoint is dropped when either gap closes there
    ks = np.linspace(0.0, math.pi, _check_resolution(resolution))
    rows_i, rows_f = model.dvectors(gamma_i, ks), model.dvectors(gamma_f, ks)
    keep = np.ones(len(ks), dtype=bool)
    for j in (0, len(ks) - 1):
        for rows in (rows_i, rows_f):
            if np.linalg.norm(rows[j, :3]) <= GAP_TOLERANCE:
                keep[j] = False
    return ModeVectors.from_rows(ks[keep], rows_i[keep], rows_f[keep])


def _interior(k: float) -> bool:
    return 0.0 < k < math.pi


def _dedupe(roots: List[float]) -> List[float]:
    unique: List[float] = []
    for k in sorted(roots):
        if not unique or k - unique[-1] > 1e-12:
            unique.append(k)
    return unique


def _refine_brackets(f: Evaluator, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    """
    Zeros of f inside the sign-change brackets [lo_j, hi_j], refined together by
    Illinois false position with a bisection fallback. f is always called on the
    full bracket array. NaN marks a bracket whose sign change is a jump.
    """
    lo = np.array(lo, dtype=float)
    hi = np.array(hi, dtype=float)
    roots = np.full(lo.size, np.nan)
    if lo.size == 0:
        return roots
    f_lo, f_hi = f(lo), f(hi)
    done = np.zeros(lo.size, dtype=bool)
    for ends, values in ((lo, f_lo), (hi, f_hi)):
        hit = ~done & (values == 0.0)
        roots[hit] = ends[hit]
        done |= hit

    # grid and array evaluations can disagree in the last bits at a near-zero end
    same = ~done & (f_lo * f_hi > 0.0)
    near = np.where(np.abs(f_lo) <= np.abs(f_hi), lo, hi)
    close = same & (np.minimum(np.abs(f_lo), np.abs(f_hi)) <= DISCONTINUITY_TOLERANCE)
    roots[close] = near[close]
    done |= same

    kept = np.zeros(lo.size, dtype=int)  # end kept by the last step: -1 lo, +1 hi
    widths = [np.full(lo.size, np.inf)] * 2  # bracket widths two steps and one step back
    for _ in range(_REFINE_MAX_STEPS):
        width = hi - lo
        active = ~done & (width > _ROOT_XTOL + _ROOT_RTOL * np.abs(hi))
        if not active.any():
            break
        with np.errstate(invalid="ignore", divide="ignore"):
            x = (lo * f_hi - hi * f_lo) / (f_hi - f_lo)
        # bisect where false position leaves the bracket or has stopped halving it
        slow = width > 0.5 * widths[0]
        x = np.where(slow | ~((x > lo) & (x < hi)), 0.5 * (lo + hi), x)
        x = np.where(active, x, lo)
        fx = f(x)

        hit = active & (fx == 0.0)
        roots[hit] = x[hit]
        done |= hit
        step = active & ~hit
        right = step & (fx * f_lo > 0.0)
        left = step & ~right
        # Illinois: halve the value at an end kept twice in a row
        f_hi = np.where(right & (kept == 1), 0.5 * f_hi, f_hi)
        f_lo = np.where(left & (kept == -1), 0.5 * f_lo, f_lo)
        lo, f_lo = np.where(right, x, lo), np.where(right, fx, f_lo)
        hi, f_hi = np.where(left, x, hi), np.where(left, fx, f_hi)
        kept = np.where(right, 1, np.where(left, -1, kept))
        widths = [widths[1], width]

    pending = ~done
    if pending.any():
        a_abs, b_abs = np.abs(f(lo)), np.abs(f(hi))
        best = np.where(a_abs <= b_abs, lo, hi)
        # a sign change across a jump leaves |f| large at both ends
        best[np.minimum(a_abs, b_abs) > DISCONTINUITY_TOLERANCE] = np.nan
        roots[pending] = best[pending]
    return roots


def _golden_minimum(folded: Callable[[float], float], a: float, b: float, c: float) -> Tuple[float, float]:
    try:
        result = minimize_scalar(folded, bracket=(a, b, c), method="golden", tol=_GOLDEN_TOL)
    except ValueError:
        result = minimize_scalar(folded, bounds=(a, c), method="bounded", options={"xatol": 1e-14})
    return float(result.x), float(result.fun)


def _touch_zeros(f: Evaluator, ks: np.ndarray, values: np.ndarray, signed: bool, warn: bool) -> Tuple[List[float], bool]:
    """
    Grid local minima of |values| refined by golden section: even-multiplicity
    zeros, and with `signed` two sign changes hidden in one bracket.
    Returns (roots, two_roots_in_one_bracket).
    """
    roots: List[float] = []
    crowded = False

    def scalar(k: float) -> float:
        return float(f(np.array([k]))[0])

    mags = np.abs(values)
    inner = mags[1:-1]
    minima = np.flatnonzero((inner < mags[:-2]) & (inner < mags[2:]) & (inner < TOUCH_PREFILTER)) + 1
    for j in minima:
        sign = 1.0 if values[j] > 0 else -1.0
        if signed and not (values[j - 1] * sign > 0 and values[j + 1] * sign > 0):
            continue
        if values[j] == 0.0:
            continue

        def folded(k, sign=sign):
            return sign * scalar(k) if signed else abs(scalar(k))

        k_min, v_min = _golden_minimum(folded, ks[j - 1], ks[j], ks[j + 1])
        if signed and v_min < 0.0:
            crowded = True
            if warn:
                warnings.warn(
                    f"two roots share the bracket [{ks[j - 1]:.6g}, {ks[j + 1]:.6g}]; increase the resolution",
                    ResolutionWarning,
                    stacklevel=5,
                )
            split = _refine_brackets(f, np.array([ks[j - 1], k_min]), np.array([k_min, ks[j + 1]]))
            roots.extend(float(r) for r in split if not math.isnan(r) and _interior(r))
        elif abs(v_min) < TOUCH_ACCEPT and _interior(k_min):
            logger.debug("touch-zero at k=%.17g, |f|=%.3g", k_min, abs(v_min))
            roots.append(k_min)

    return roots, crowded


def _values(vectors: ModeVectors, kind: str) -> np.ndarray:
    if kind == "alignment":
        return vectors.alignment
    if kind == "cross_z":
        return vectors.cross_z
    return np.linalg.norm(vectors.cross, axis=1)


class _ModeSearch:
    """The k_c and k_0/k_1 searches of one quench, sharing a single scan grid."""

    def __init__(self, model: ModelSpec, gamma_i, gamma_f, resolution: int, warn: bool):
        self.model = model
        self.gamma_i = model.check_gamma(gamma_i, "gamma_i")
        self.gamma_f = model.check_gamma(gamma_f, "gamma_f")
        self.warn = warn
        self.grid = _scan_grid(model, self.gamma_i, self.gamma_f, resolution)
        self.cross_kind = "cross_z" if model.planar else "cross_norm"

    def evaluator(self, kind: str) -> Evaluator:
        def f(ks: np.ndarray) -> np.ndarray:
            return _values(mode_vectors(self.model, self.gamma_i, self.gamma_f, ks), kind)

        return f

    def _merged(self, is_alignment: np.ndarray) -> Evaluator:
        def f(ks: np.ndarray) -> np.ndarray:
            vectors = mode_vectors(self.model, self.gamma_i, self.gamma_f, ks)
            return np.where(is_alignment, vectors.alignment, vectors.cross_z)

        return f

    def _locate(self, jobs) -> Dict[str, Tuple[List[float], bool]]:
        ks = self.grid.momenta
        roots = {kind: [float(k) for k in ks[values == 0.0] if _interior(k)] for kind, values, _ in jobs}
        crowded = dict.fromkeys(roots, False)

        lo, hi, owner = [], [], []
        for kind, values, signed in jobs:
            if signed:
                j = np.flatnonzero(values[:-1] * values[1:] < 0.0)
                lo.append(ks[j])
                hi.append(ks[j + 1])
                owner.extend([kind] * len(j))
        if owner:
            lo, hi, owner = np.concatenate(lo), np.concatenate(hi), np.array(owner)
            refined = _refine_brackets(self._merged(owner == "alignment"), lo, hi)
            for a, b, kind, root in zip(lo, hi, owner, refined):
                if math.isnan(root):
                    logger.warning("dropping sign change in [%.6f, %.6f]: function is discontinuous there", a, b)
                elif _interior(root):
                    roots[kind].append(float(root))

        for kind, values, signed in jobs:
            touch, crowded[kind] = _touch_zeros(self.evaluator(kind), ks, values, signed, self.warn)
            roots[kind].extend(touch)
        return {kind: (_dedupe(found), crowded[kind]) for kind, found in roots.items()}

    def run(self, kc: bool = True, k01: bool = True) -> Tuple[List[float], bool, Optional[K01Roots]]:
        g_grid = self.grid.alignment
        jobs = []
        if kc:
            jobs.append(("alignment", g_grid, True))

        continuum = None
        if k01:
            cross = self.grid.cross
            if np.max(np.linalg.norm(cross, axis=1)) <= CONTINUUM_TOLERANCE:
                if np.all(g_grid > 0):
                    continuum = K01Roots((), (), continuum_k1=True)
                elif np.all(g_grid < 0):
                    continuum = K01Roots((), (), continuum_k0=True)
            if continuum is None:
                values = cross[:, 2] if self.model.planar else np.linalg.norm(cross, axis=1)
                jobs.append((self.cross_kind, values, self.model.planar))

        found = self._locate(jobs)
        kc_roots, kc_crowded = found.get("alignment", ([], False))
        if not k01 or continuum is not None:
            return kc_roots, kc_crowded, continuum

        roots, crowded = found[self.cross_kind]
        signs = self.evaluator("alignment")(np.array(roots)) if roots else np.array([])
        k0 = tuple(k for k, g in zip(roots, signs) if g < 0)
        k1 = tuple(k for k, g in zip(roots, signs) if g >= 0)
        return kc_roots, kc_crowded, K01Roots(k0, k1, resolution_warning=crowded)


def find_kc_roots(model: ModelSpec, gamma_i, gamma_f, resolution: int = DEFAULT_RESOLUTION) -> List[float]:
    """All k in (0, pi) with d-hat_i . d-hat_f = 0, ascending."""
    roots, _, _ = _ModeSearch(model, gamma_i, gamma_f, resolution, warn=True).run(k01=False)
    return roots


def find_k0_k1_roots(model: ModelSpec, gamma_i, gamma_f, resolution: int = DEFAULT_RESOLUTION) -> K01Roots:
    """
    Interior momenta where the Bloch vectors are antiparallel (k_0) or parallel (k_1),
    located as zeros of the cross product and classified by the sign of g.
    An identical quench is reported through `continuum_k1` with empty lists.
    """
    _, _, k01 = _ModeSearch(model, gamma_i, gamma_f, resolution, warn=True).run(kc=False)
    return k01


def mode_report(model: ModelSpec, gamma_i, gamma_f, resolution: int = DEFAULT_RESOLUTION) -> ModeReport:
    """
    Roots, boundary-mode flags and counts n_kc, n_k0, n_k1 of one quench. A crowded
    bracket is recorded in the report instead of being warned about.
    """
    search = _ModeSearch(model, gamma_i, gamma_f, resolution, warn=False)
    kc, kc_crowded, k01 = search.run()
    notes: List[str] = []

    boundary = None
    if model.boundary_fidelities is not None:
        try:
            boundary = tuple(model.boundary_fidelities(search.gamma_i, search.gamma_f))
        except CriticalBoundary as e:
            notes.append(f"boundary modes undefined: {e}")

    n_k0 = len(k01.k0) + (sum(1 for f in boundary if f == 0) if boundary else 0)
    n_k1 = len(k01.k1) + (sum(1 for f in boundary if f == 1) if boundary else 0)
    for a in k01.k0:
        for b in k01.k1:
            if abs(a - b) < 1e-9:
                notes.append(f"coincident k0/k1 at k={a!r}")
    if kc_crowded or k01.resolution_warning:
        notes.append("resolution warning: a bracket held two roots")

    return ModeReport(
        kc_roots=tuple(kc),
        k0_roots=k01.k0,
        k1_roots=k01.k1,
        n_kc=len(kc),
        n_k0=n_k0,
        n_k1=n_k1,
        boundary_flags=boundary,
        continuum_k0=k01.continuum_k0,
        continuum_k1=k01.continuum_k1,
        resolution_warning=kc_crowded or k01.resolution_warning,
        notes=tuple(notes),
    )


def dqpt_exists(model: ModelSpec, gamma_i, gamma_f, resolution: int = DEFAULT_RESOLUTION) -> bool:
    """True iff the quench has at least one k_c mode."""
    return bool(find_kc_roots(model, gamma_i, gamma_f, resolution))


def sufficient_condition_holds(report: ModeReport) -> bool:
    """A k_0 and a k_1 mode together force a k_c mode between them."""
    return report.n_k0 >= 1 and report.n_k1 >= 1


def classify_mode(fidelity: float, tolerance: float = CLASS_TOLERANCE) -> ModeClass:
    if abs(fidelity - _SQRT_HALF) <= tolerance:
        return ModeClass.KC
    if abs(fidelity) <= tolerance:
        return ModeClass.K0
    if abs(fidelity - 1.0) <= tolerance:
        return ModeClass.K1
    return ModeClass.GENERIC


def classify_grid_modes(
    q: QuenchSpec, kc_roots: Sequence[float] = (), tolerance: float = CLASS_TOLERANCE
) -> List[GridMode]:
    """
    Finite-L mode table. `kc_neighborhood` marks the grid mode nearest to each
    located k_c root (within half a grid spacing).
    """
    vectors = mode_vectors(q.model, q.gamma_i, q.gamma_f, q.kgrid.momenta)
    half = 0.5 * q.kgrid.spacing
    rows = []
    for k, g, fq in zip(q.kgrid.momenta, vectors.alignment, vectors.fidelity):
        rows.append(
            GridMode(
                k=float(k),
                lbar_k=float(g * g),
                fidelity_k=float(fq),
                mode_class=classify_mode(float(fq), tolerance),
                kc_neighborhood=any(abs(k - r) <= half for r in kc_roots),
            )
        )
    return rows
