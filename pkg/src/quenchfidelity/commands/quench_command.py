import logging
import math

from src.quenchfidelity.commands.command_result import CommandResult
from src.quenchfidelity.config.configfile import RunConfig
from src.quenchfidelity.dynamics.quench import (
    QuenchSpec,
    fidelity_decay_rate,
    lbar_rate_function,
    loschmidt_rate_thermodynamic,
    loschmidt_total,
    quench_fidelity_total,
)
from src.quenchfidelity.modes.mode_analysis import classify_grid_modes, mode_report, sufficient_condition_holds
from src.quenchfidelity.output.writers import write_table

logger = logging.getLogger(__name__)


class QuenchCommand:
    """
    One sudden quench: the echo time series, the per-mode table on the lattice
    grid and a one-row summary with mode counts and rate functions.
    """

    def __init__(self, run_config: RunConfig):
        self.run_config = run_config

    def series_records(self, q: QuenchSpec, singular_points) -> list:
        cfg = self.run_config
        times = cfg.times
        if cfg.thermodynamic_limit:
            rates = loschmidt_rate_thermodynamic(q.model, q.gamma_i, q.gamma_f, times, singular_points)
            return [{"t": float(t), "rate": float(r)} for t, r in zip(times, rates)]
        series = loschmidt_total(q, times)
        return [
            {"t": float(t), "echo": float(e), "rate": float(r)}
            for t, e, r in zip(series.times, series.total, series.rate)
        ]

    def summary_record(self, q: QuenchSpec, report) -> dict:
        cfg = self.run_config
        boundary = report.boundary_flags or (None, None)
        return {
            "model": q.model.name,
            "gamma_i": " ".join(repr(v) for v in q.gamma_i),
            "gamma_f": " ".join(repr(v) for v in q.gamma_f),
            "L": None if cfg.thermodynamic_limit else q.L,
            "n_kc": report.n_kc,
            "n_k0": report.n_k0,
            "n_k1": report.n_k1,
            "dqpt_exists": report.dqpt_exists,
            "sufficient": sufficient_condition_holds(report),
            "lbar_rate": lbar_rate_function(q, cfg.thermodynamic_limit, report.kc_roots),
            "fidelity_rate": fidelity_decay_rate(q, cfg.thermodynamic_limit, report.k0_roots),
            "fidelity_total": None if cfg.thermodynamic_limit else quench_fidelity_total(q),
            "boundary_f0": boundary[0],
            "boundary_fpi": boundary[1],
            "notes": "; ".join(report.notes),
        }

    def process(self) -> CommandResult:
        cfg = self.run_config
        q = QuenchSpec(cfg.model, cfg.gamma_i, cfg.gamma_f, cfg.kgrid)
        report = mode_report(cfg.model, cfg.gamma_i, cfg.gamma_f, cfg.k_samples)
        logger.info("quench %s -> %s: n_kc=%d", q.gamma_i, q.gamma_f, report.n_kc)

        modes = [
            {
                "k": row.k,
                "lbar_k": row.lbar_k,
                "fidelity_k": row.fidelity_k,
                "class": row.mode_class,
                "kc_neighborhood": row.kc_neighborhood,
            }
            for row in classify_grid_modes(q, report.kc_roots)
        ]
        summary = self.summary_record(q, report)
        if math.isinf(summary["lbar_rate"]) or math.isinf(summary["fidelity_rate"]):
            logger.info("a grid mode sits exactly on a special value; rate written as inf")

        paths = []
        paths += write_table(cfg.output_path, "series", self.series_records(q, report.kc_roots), cfg.output_format)
        paths += write_table(cfg.output_path, "modes", modes, cfg.output_format)
        paths += write_table(cfg.output_path, "summary", [summary], cfg.output_format)
        return CommandResult(paths)
