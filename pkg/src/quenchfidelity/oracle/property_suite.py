"""
Seeded randomized property runs backing the `verify` command.

Every property is evaluated on draws from a single numpy Generator created from
the given seed, in a fixed order, so two runs with the same seed produce the
same reports bit for bit.
"""

import logging
import math
from typing import Callable, List, Tuple

import numpy as np
from scipy.optimize import minimize_scalar

from src.quenchfidelity.core.bloch import DVector
from src.quenchfidelity.core.errors import CriticalBoundary, GapClosed, NonIntegerResult, PreconditionFailed
from src.quenchfidelity.dynamics.quench import (
    critical_times,
    lbar_k,
    loschmidt_k,
    quench_fidelity_k,
    relation_lbar_from_fidelity,
)
from src.quenchfidelity.models.xy import (
    XY_MODEL,
    EquilibriumPhase,
    XYParams,
    xy_boundary_fidelities,
    xy_equilibrium_phase,
    xy_fidelity_closed_form,
    xy_lbar_closed_form,
    xy_winding_number,
)
from src.quenchfidelity.modes.mode_analysis import find_kc_roots, mode_report, sufficient_condition_holds
from src.quenchfidelity.oracle.evolution_oracle import (
    OracleProperty,
    OracleReport,
    batched_echo_minima,
    check_anticommutator,
    check_expectations,
    check_state_mapping,
    evolved_overlap,
    numeric_echo_minimum,
    numeric_lbar,
)

logger = logging.getLogger(__name__)

DEFAULT_SEED = 20240601
DEFAULT_TRIALS = 10_000
DEFAULT_ORACLE_TRIALS = 1_000
FAULT_OFFSET = 1e-6
QUARTET_INITIAL = (-2.0, 0.8)
QUARTET_ETA_F = -2.0
QUARTET_FIELDS = (-2.0, -1.1, 0.0, 2.0)
DQPT_ECHO_THRESHOLD = 1e-6
DQPT_MARGINAL_FLOOR = 1e-12
DQPT_K_SAMPLES = 2049
DQPT_REFINE_CEILING = 1e-2
DQPT_MAX_TURN = 0.05
DQPT_SUBDIVISIONS = 32
DQPT_MIN_SPACING = 1e-12
WINDING_POINTS_PER_REGION = 20


def _random_dvector(rng: np.random.Generator, with_d0: bool = True) -> DVector:
    dx, dy, dz = rng.normal(size=3) * rng.uniform(0.2, 5.0)
    d0 = rng.normal() if with_d0 else 0.0
    return DVector(dx, dy, dz, d0)


def _perpendicular_pair(rng: np.random.Generator) -> Tuple[DVector, DVector]:
    d_i = _random_dvector(rng, with_d0=False)
    u = d_i.vector / d_i.norm
    v = rng.normal(size=3)
    v = v - np.dot(v, u) * u
    v = v / np.linalg.norm(v) * rng.uniform(0.2, 5.0)
    return d_i, DVector(*v, 0.0)


def _random_xy(rng: np.random.Generator) -> Tuple[float, float]:
    return float(rng.uniform(-3.0, 3.0)), float(rng.uniform(-3.0, 3.0))


def _cos_roots_oracle(gamma_i, gamma_f) -> List[float]:
    # g(k) = 0 is a quadratic in c = cos k
    (hi, ei), (hf, ef) = gamma_i, gamma_f
    coefficients = [1.0 - ei * ef, hi + hf, hi * hf + ei * ef]
    roots = np.roots(coefficients)
    real = [float(r.real) for r in roots if abs(r.imag) < 1e-12 and -1.0 < r.real < 1.0]
    return sorted(real)


class _Worst:
    """Running maximum deviation with the witness that produced it."""

    def __init__(self):
        self.deviation = 0.0
        self.witness = None

    def update(self, deviation: float, witness: Callable[[], dict]) -> None:
        if deviation > self.deviation or (math.isnan(deviation) and not math.isnan(self.deviation)):
            self.deviation = deviation
            self.witness = witness()

    def report(self, prop: OracleProperty, tolerance: float, seed: int) -> OracleReport:
        return OracleReport(prop, self.deviation, tolerance, witness=self.witness, seed=seed)


def check_fidelity_relation(rng, trials: int, seed: int, inject_fault: bool = False) -> OracleReport:
    worst = _Worst()
    offset = FAULT_OFFSET if inject_fault else 0.0
    for _ in range(trials):
        d_i, d_f = _random_dvector(rng), _random_dvector(rng)
        expected = relation_lbar_from_fidelity(quench_fidelity_k(d_i, d_f)) + offset
        worst.update(abs(lbar_k(d_i, d_f) - expected), lambda: {"d_i": d_i.vector.tolist(), "d_f": d_f.vector.tolist()})
    return worst.report(OracleProperty.FIDELITY_RELATION, 1e-12, seed)


def check_numeric_lbar(rng, trials: int, seed: int) -> OracleReport:
    worst = _Worst()
    for _ in range(trials):
        d_i, d_f = _random_dvector(rng), _random_dvector(rng)
        worst.update(abs(numeric_lbar(d_i, d_f) - lbar_k(d_i, d_f)), lambda: {"d_i": d_i.vector.tolist(), "d_f": d_f.vector.tolist()})
    return worst.report(OracleProperty.NUMERIC_LBAR, 1e-10, seed)


def check_loschmidt_evolution(rng, trials: int, seed: int) -> OracleReport:
    worst = _Worst()
    for _ in range(trials):
        d_i, d_f = _random_dvector(rng), _random_dvector(rng)
        t = float(rng.uniform(0.0, 10.0))
        deviation = abs(loschmidt_k(d_i, d_f, t) - evolved_overlap(d_i, d_f, t))
        worst.update(deviation, lambda: {"d_i": d_i.vector.tolist(), "d_f": d_f.vector.tolist(), "t": t})
    return worst.report(OracleProperty.LOSCHMIDT_EVOLUTION, 1e-10, seed)


def check_appendix_identities(rng, trials: int, seed: int) -> List[OracleReport]:
    checks = (
        (OracleProperty.STATE_MAPPING, check_state_mapping, False),
        (OracleProperty.EXPECTATIONS, check_expectations, False),
        (OracleProperty.ANTICOMMUTATOR, check_anticommutator, True),
    )
    worst = {prop: _Worst() for prop, _, _ in checks}
    for _ in range(trials):
        d_i, d_f = _perpendicular_pair(rng)
        for prop, check, scaled in checks:
            try:
                report = check(d_i, d_f)
            except PreconditionFailed as e:
                worst[prop].update(math.inf, lambda: {"error": str(e)})
                continue
            # the anticommutator tolerance scales with |d_i||d_f|; compare on that scale
            deviation = report.max_deviation / (d_i.norm * d_f.norm) if scaled else report.max_deviation
            worst[prop].update(deviation, lambda: report.witness)
    return [worst[prop].report(prop, 1e-10, seed) for prop, _, _ in checks]


def check_xy_closed_forms(rng, trials: int, seed: int) -> OracleReport:
    worst = _Worst()
    for _ in range(trials):
        pi, pf = XYParams(*_random_xy(rng)), XYParams(*_random_xy(rng))
        k = float(rng.uniform(0.0, math.pi))
        try:
            d_i = XY_MODEL.dvector(pi.as_gamma(), k)
            d_f = XY_MODEL.dvector(pf.as_gamma(), k)
            lbar_dev = abs(xy_lbar_closed_form(pi, pf, k) - lbar_k(d_i, d_f))
            # compare F^2: the square root is ill-conditioned near F = 0
            fid_dev = abs(xy_fidelity_closed_form(pi, pf, k) ** 2 - quench_fidelity_k(d_i, d_f) ** 2)
        except GapClosed:
            continue
        worst.update(max(lbar_dev, fid_dev), lambda: {"gamma_i": pi.as_gamma(), "gamma_f": pf.as_gamma(), "k": k})
    return worst.report(OracleProperty.XY_CLOSED_FORM, 1e-12, seed)


def _quartet_roots():
    for h_f in QUARTET_FIELDS:
        gamma_f = (h_f, QUARTET_ETA_F)
        yield gamma_f, find_kc_roots(XY_MODEL, QUARTET_INITIAL, gamma_f)


def check_quench_quartet(seed: int) -> List[OracleReport]:
    roots_worst, refine_worst = _Worst(), _Worst()
    echo_worst, time_worst = _Worst(), _Worst()
    for gamma_f, roots in _quartet_roots():
        expected = _cos_roots_oracle(QUARTET_INITIAL, gamma_f)
        found = sorted(math.cos(k) for k in roots)
        if len(found) != len(expected):
            roots_worst.update(math.inf, lambda: {"gamma_f": gamma_f, "found": found, "expected": expected})
        else:
            for c_found, c_expected in zip(found, expected):
                roots_worst.update(abs(c_found - c_expected), lambda: {"gamma_f": gamma_f, "cos_k": c_found})
        for k in roots:
            d_i = XY_MODEL.dvector(QUARTET_INITIAL, k)
            d_f = XY_MODEL.dvector(gamma_f, k)
            witness = lambda: {"gamma_f": gamma_f, "k": k}
            refine_worst.update(abs(float(np.dot(d_i.unit(), d_f.unit()))), witness)
            t_c = critical_times(d_f, 1)[0]
            echo_worst.update(loschmidt_k(d_i, d_f, t_c), witness)
            t_min, _ = numeric_echo_minimum(d_i, d_f)
            time_worst.update(abs(t_min - t_c) / t_c, witness)
    return [
        roots_worst.report(OracleProperty.QUENCH_QUARTET, 1e-9, seed),
        refine_worst.report(OracleProperty.KC_REFINEMENT, 1e-12, seed),
        echo_worst.report(OracleProperty.CRITICAL_TIME_ECHO, 1e-10, seed),
        time_worst.report(OracleProperty.CRITICAL_TIME_MINIMIZER, 1e-8, seed),
    ]


def check_boundary_fidelities(seed: int) -> OracleReport:
    expected = {-2.0: (1, 1), 0.0: (0, 1), 2.0: (0, 0)}
    worst = _Worst()
    pi = XYParams(*QUARTET_INITIAL)
    for h_f, flags in expected.items():
        found = xy_boundary_fidelities(pi, XYParams(h_f, QUARTET_ETA_F))
        mismatch = float(sum(a != b for a, b in zip(found, flags)))
        worst.update(mismatch, lambda: {"h_f": h_f, "found": list(found), "expected": list(flags)})
    return worst.report(OracleProperty.BOUNDARY_FIDELITIES, 0.0, seed)


def check_sufficient_condition(rng, trials: int, seed: int) -> List[OracleReport]:
    implication, refinement = _Worst(), _Worst()
    counterexamples = 0
    for _ in range(trials):
        gamma_i, gamma_f = _random_xy(rng), _random_xy(rng)
        if XY_MODEL.critical(gamma_i) or XY_MODEL.critical(gamma_f):
            continue
        try:
            report = mode_report(XY_MODEL, gamma_i, gamma_f)
        except (GapClosed, CriticalBoundary):
            continue
        if sufficient_condition_holds(report) and not report.dqpt_exists:
            counterexamples += 1
            implication.update(float(counterexamples), lambda: {"gamma_i": gamma_i, "gamma_f": gamma_f})
        for sign, roots in ((-1.0, report.k0_roots), (1.0, report.k1_roots)):
            for k in roots:
                g = float(np.dot(XY_MODEL.dvector(gamma_i, k).unit(), XY_MODEL.dvector(gamma_f, k).unit()))
                refinement.update(abs(g - sign), lambda: {"gamma_i": gamma_i, "gamma_f": gamma_f, "k": k})
    return [
        implication.report(OracleProperty.SUFFICIENT_CONDITION, 0.0, seed),
        refinement.report(OracleProperty.K01_REFINEMENT, 1e-10, seed),
    ]


_REGION_SAMPLERS = {
    EquilibriumPhase.H_BELOW_MINUS_ONE: lambda rng: (rng.uniform(-3.0, -1.2), rng.uniform(-3.0, 3.0)),
    EquilibriumPhase.INNER_ETA_POSITIVE: lambda rng: (rng.uniform(-0.8, 0.8), rng.uniform(0.2, 3.0)),
    EquilibriumPhase.INNER_ETA_NEGATIVE: lambda rng: (rng.uniform(-0.8, 0.8), rng.uniform(-3.0, -0.2)),
    EquilibriumPhase.H_ABOVE_PLUS_ONE: lambda rng: (rng.uniform(1.2, 3.0), rng.uniform(-3.0, 3.0)),
}

# pairs of regions that share one of the three equilibrium boundaries
_ADJACENT_REGIONS = (
    (EquilibriumPhase.H_BELOW_MINUS_ONE, EquilibriumPhase.INNER_ETA_POSITIVE),
    (EquilibriumPhase.H_BELOW_MINUS_ONE, EquilibriumPhase.INNER_ETA_NEGATIVE),
    (EquilibriumPhase.INNER_ETA_POSITIVE, EquilibriumPhase.INNER_ETA_NEGATIVE),
    (EquilibriumPhase.INNER_ETA_POSITIVE, EquilibriumPhase.H_ABOVE_PLUS_ONE),
    (EquilibriumPhase.INNER_ETA_NEGATIVE, EquilibriumPhase.H_ABOVE_PLUS_ONE),
)


def check_winding_numbers(rng, seed: int) -> OracleReport:
    worst = _Worst()
    violations = 0
    per_region = {}
    for region, sample in _REGION_SAMPLERS.items():
        values = set()
        for _ in range(WINDING_POINTS_PER_REGION):
            p = XYParams(*(float(v) for v in sample(rng)))
            if xy_equilibrium_phase(p) is not region:
                continue
            try:
                values.add(xy_winding_number(p))
            except (GapClosed, NonIntegerResult) as e:
                violations += 1
                worst.update(float(violations), lambda: {"params": p.as_gamma(), "error": str(e)})
        per_region[region] = values
        if len(values) != 1:
            violations += 1
            worst.update(float(violations), lambda: {"region": region.name, "windings": sorted(values)})
    for a, b in _ADJACENT_REGIONS:
        if per_region[a] == per_region[b]:
            violations += 1
            worst.update(float(violations), lambda: {"regions": [a.name, b.name], "windings": sorted(per_region[a])})
    return worst.report(OracleProperty.WINDING_NUMBERS, 0.0, seed)


def _turning_angles(rows: np.ndarray) -> np.ndarray:
    # angle between the Bloch directions of neighbouring samples
    with np.errstate(invalid="ignore", divide="ignore"):
        units = rows[:, :3] / np.linalg.norm(rows[:, :3], axis=1)[:, None]
        return np.arccos(np.clip(np.einsum("ij,ij->i", units[:-1], units[1:]), -1.0, 1.0))


def _oracle_momenta(gamma_i, gamma_f) -> np.ndarray:
    """
    Dense k grid on [0, pi], subdivided wherever either Bloch direction turns by
    more than DQPT_MAX_TURN between neighbours (near-closing gaps turn it through
    pi over a width set by the smallest |d|).
    """
    ks = np.linspace(0.0, math.pi, DQPT_K_SAMPLES)
    while True:
        turn = np.fmax(_turning_angles(XY_MODEL.dvectors(gamma_i, ks)), _turning_angles(XY_MODEL.dvectors(gamma_f, ks)))
        coarse = np.flatnonzero((turn > DQPT_MAX_TURN) & (np.diff(ks) > DQPT_MIN_SPACING))
        if not coarse.size:
            return ks
        extra = [np.linspace(ks[j], ks[j + 1], DQPT_SUBDIVISIONS + 1)[1:-1] for j in coarse]
        ks = np.union1d(ks, np.concatenate(extra))


def dqpt_echo_minimum(gamma_i, gamma_f) -> float:
    """Smallest numerically evolved echo over an adaptive k grid, refined around each low local minimum."""
    ks = _oracle_momenta(gamma_i, gamma_f)
    minima = batched_echo_minima(XY_MODEL.dvectors(gamma_i, ks), XY_MODEL.dvectors(gamma_f, ks))
    best = float(np.min(minima))
    candidates = [
        j for j in range(1, len(ks) - 1) if minima[j] <= minima[j - 1] and minima[j] <= minima[j + 1] and minima[j] < DQPT_REFINE_CEILING
    ]

    def at(k: float) -> float:
        k = min(math.pi, max(0.0, k))
        return float(batched_echo_minima(XY_MODEL.dvectors(gamma_i, [k]), XY_MODEL.dvectors(gamma_f, [k]))[0])

    for j in candidates:
        result = minimize_scalar(at, bounds=(ks[j - 1], ks[j + 1]), method="bounded", options={"xatol": 1e-12})
        best = min(best, float(result.fun))
    return best


def check_dqpt_oracle(rng, trials: int, seed: int) -> OracleReport:
    """
    dqpt_exists against the numerically evolved echo. Near-tangent quenches whose
    echo minimum falls between the floor and the threshold are skipped.
    """
    worst = _Worst()
    mismatches = skipped = 0
    for _ in range(trials):
        gamma_i, gamma_f = _random_xy(rng), _random_xy(rng)
        if XY_MODEL.critical(gamma_i) or XY_MODEL.critical(gamma_f):
            continue
        try:
            exists = bool(find_kc_roots(XY_MODEL, gamma_i, gamma_f))
            minimum = dqpt_echo_minimum(gamma_i, gamma_f)
        except GapClosed:
            continue
        if DQPT_MARGINAL_FLOOR < minimum < DQPT_ECHO_THRESHOLD and not exists:
            skipped += 1
            continue
        if exists != (minimum < DQPT_ECHO_THRESHOLD):
            mismatches += 1
            worst.update(float(mismatches), lambda: {"gamma_i": gamma_i, "gamma_f": gamma_f, "echo_minimum": minimum})
    if skipped:
        logger.info("dqpt oracle skipped %d near-tangent quenches", skipped)
    return worst.report(OracleProperty.DQPT_ORACLE, 0.0, seed)


def run_property_suite(
    seed: int = DEFAULT_SEED,
    trials: int = DEFAULT_TRIALS,
    oracle_trials: int = DEFAULT_ORACLE_TRIALS,
    inject_fault: bool = False,
) -> List[OracleReport]:
    """Run every property in a fixed order; `inject_fault` perturbs the fidelity relation by 1e-6."""
    rng = np.random.default_rng(seed)
    reports: List[OracleReport] = [
        check_fidelity_relation(rng, trials, seed, inject_fault),
        check_numeric_lbar(rng, oracle_trials, seed),
        check_loschmidt_evolution(rng, oracle_trials, seed),
    ]
    reports.extend(check_appendix_identities(rng, oracle_trials, seed))
    reports.append(check_xy_closed_forms(rng, oracle_trials, seed))
    reports.extend(check_quench_quartet(seed))
    reports.append(check_boundary_fidelities(seed))
    reports.extend(check_sufficient_condition(rng, oracle_trials, seed))
    reports.append(check_winding_numbers(rng, seed))
    reports.append(check_dqpt_oracle(rng, oracle_trials, seed))
    for report in reports:
        log = logger.info if report.passed else logger.warning
        log("%s: max deviation %.3g (tolerance %.3g)", report.checked_property.value, report.max_deviation, report.tolerance)
    return reports
