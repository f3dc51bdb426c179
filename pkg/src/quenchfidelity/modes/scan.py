"""
Two-parameter scans of the post-quench plane: one ModeReport summary per cell,
assembled in row-major order (axis1 outer, axis2 inner).
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
import logging
import math
from typing import List, Optional, Tuple

import numpy as np
from tqdm import tqdm

from src.quenchfidelity.core.errors import CriticalBoundary, DomainError, GapClosed, QuenchFidelityError
from src.quenchfidelity.dynamics.quench import KGrid, QuenchSpec, fidelity_decay_rate, lbar_rate_function
from src.quenchfidelity.models.model_spec import ModelSpec
from src.quenchfidelity.modes.mode_analysis import DEFAULT_RESOLUTION, mode_report, sufficient_condition_holds

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Axis:
    """One scanned model parameter: `samples` evenly spaced values on [lo, hi]."""

    name: str
    lo: float
    hi: float
    samples: int

    def __post_init__(self):
        if not (math.isfinite(self.lo) and math.isfinite(self.hi)):
            raise DomainError(f"axis '{self.name}' range must be finite, got [{self.lo!r}, {self.hi!r}]")
        if self.samples < 1:
            raise DomainError(f"axis '{self.name}' needs at least one sample")
        if self.samples == 1 and self.lo != self.hi:
            raise DomainError(f"axis '{self.name}' needs at least two samples for a non-degenerate range")

    @property
    def values(self) -> np.ndarray:
        if self.samples == 1:
            return np.array([float(self.lo)])
        return np.linspace(self.lo, self.hi, self.samples)


@dataclass(frozen=True)
class ScanCell:
    param1: float
    param2: float
    gamma_f: Tuple[float, ...]
    n_kc: Optional[int] = None
    n_k0: Optional[int] = None
    n_k1: Optional[int] = None
    dqpt_exists: Optional[bool] = None
    sufficient: Optional[bool] = None
    critical: bool = False
    lbar_rate: Optional[float] = None
    fidelity_rate: Optional[float] = None
    error: Optional[str] = None

    def as_record(self, axis1: str, axis2: str) -> dict:
        return {
            axis1: self.param1,
            axis2: self.param2,
            "n_kc": self.n_kc,
            "n_k0": self.n_k0,
            "n_k1": self.n_k1,
            "dqpt_exists": self.dqpt_exists,
            "sufficient": self.sufficient,
            "critical": self.critical,
            "lbar_rate": self.lbar_rate,
            "fidelity_rate": self.fidelity_rate,
            "error": self.error,
        }


@dataclass(frozen=True)
class ScanResult:
    axes: Tuple[Axis, Axis]
    cells: Tuple[ScanCell, ...]

    def __post_init__(self):
        expected = self.axes[0].samples * self.axes[1].samples
        if len(self.cells) != expected:
            raise DomainError(f"scan holds {len(self.cells)} cells, expected {expected}")

    @property
    def shape(self) -> Tuple[int, int]:
        return (self.axes[0].samples, self.axes[1].samples)

    def cell(self, i: int, j: int) -> ScanCell:
        return self.cells[i * self.axes[1].samples + j]

    def records(self) -> List[dict]:
        return [c.as_record(self.axes[0].name, self.axes[1].name) for c in self.cells]


def evaluate_cell(
    model: ModelSpec,
    gamma_i,
    gamma_f,
    resolution: int = DEFAULT_RESOLUTION,
    kgrid: Optional[KGrid] = None,
    thermodynamic_limit: bool = False,
    params: Tuple[float, float] = (math.nan, math.nan),
) -> ScanCell:
    """Mode counts and, when a lattice or the thermodynamic limit is asked for, the rate functions of one quench."""
    gamma_f = tuple(gamma_f)
    param1, param2 = params
    if model.critical(gamma_f) or model.critical(gamma_i):
        return ScanCell(param1, param2, gamma_f, critical=True)
    try:
        report = mode_report(model, gamma_i, gamma_f, resolution)
        lbar_rate = fidelity_rate = None
        if kgrid is not None or thermodynamic_limit:
            q = QuenchSpec(model, gamma_i, gamma_f, kgrid or KGrid(2))
            lbar_rate = lbar_rate_function(q, thermodynamic_limit, report.kc_roots)
            fidelity_rate = fidelity_decay_rate(q, thermodynamic_limit, report.k0_roots)
        return ScanCell(
            param1,
            param2,
            gamma_f,
            n_kc=report.n_kc,
            n_k0=report.n_k0,
            n_k1=report.n_k1,
            dqpt_exists=report.dqpt_exists,
            sufficient=sufficient_condition_holds(report),
            lbar_rate=lbar_rate,
            fidelity_rate=fidelity_rate,
        )
    except QuenchFidelityError as e:
        logger.warning("cell %s failed: %s", gamma_f, e)
        return ScanCell(param1, param2, gamma_f, critical=isinstance(e, (GapClosed, CriticalBoundary)), error=str(e))


def scan_phase_diagram(
    model: ModelSpec,
    gamma_i,
    axis1: Axis,
    axis2: Axis,
    resolution: int = DEFAULT_RESOLUTION,
    kgrid: Optional[KGrid] = None,
    thermodynamic_limit: bool = False,
    workers: int = 1,
    progress: bool = False,
) -> ScanResult:
    """
    Evaluate every (axis1, axis2) cell of the post-quench plane. Parameters that
    are not scanned keep their pre-quench values. Cells on a critical line are
    labelled instead of counted; failures are stored in the cell.
    """
    gamma_i = model.check_gamma(gamma_i, "gamma_i")
    for axis in (axis1, axis2):
        if axis.name not in model.param_names:
            raise DomainError(f"model '{model.name}' has no parameter '{axis.name}' to scan")
    if axis1.name == axis2.name:
        raise DomainError(f"scan axes must differ, both are '{axis1.name}'")

    jobs = []
    for v1 in axis1.values:
        for v2 in axis2.values:
            gamma_f = model.with_param(model.with_param(gamma_i, axis1.name, v1), axis2.name, v2)
            jobs.append((float(v1), float(v2), gamma_f))

    def run(job):
        v1, v2, gamma_f = job
        return evaluate_cell(model, gamma_i, gamma_f, resolution, kgrid, thermodynamic_limit, (v1, v2))

    logger.info("scanning %d x %d cells of '%s' with %d worker(s)", axis1.samples, axis2.samples, model.name, workers)
    with tqdm(total=len(jobs), disable=not progress, desc="scan") as bar:
        if workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                cells = []
                for cell in pool.map(run, jobs):
                    cells.append(cell)
                    bar.update(1)
        else:
            cells = []
            for job in jobs:
                cells.append(run(job))
                bar.update(1)

    return ScanResult((axis1, axis2), tuple(cells))

