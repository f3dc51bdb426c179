"""
Phase diagrams and tables for the XY chain: equilibrium phases with winding numbers,
the (h_f, eta_f) diagrams of n_kc and of n_k0 / n_k1, per-mode densities and the
rate functions with their derivatives along eta_f = -2, per-mode tables at four
representative quenches, and the L-bar versus F^q relation curve.
"""

import logging
import math
import sys

import numpy as np

from src.quenchfidelity.commands.command_result import CommandResult
from src.quenchfidelity.config.configfile import RunConfig
from src.quenchfidelity.core.errors import ConfigError
from src.quenchfidelity.dynamics.quench import QuenchSpec, rate_derivative, relation_curve
from src.quenchfidelity.models.xy import XYParams, xy_mode_density, xy_phase_grid
from src.quenchfidelity.modes.mode_analysis import classify_grid_modes, find_kc_roots
from src.quenchfidelity.modes.scan import Axis, evaluate_cell, scan_phase_diagram
from src.quenchfidelity.output.writers import write_table

logger = logging.getLogger(__name__)

ETA_F_LINE = -2.0
QUENCH_POINTS = (-2.0, -1.1, 0.0, 2.0)
PLANE = (-3.0, 3.0)
EQUILIBRIUM_SAMPLES = 61
DENSITY_FIELDS = 121
DENSITY_MOMENTA = 129
LINE_SAMPLES = 600


class XYDemoCommand:
    def __init__(self, run_config: RunConfig, grid_samples: int = 201):
        if run_config.model.name != "xy":
            raise ConfigError("model.name", f"xy-demo needs the xy model, got '{run_config.model.name}'")
        self.run_config = run_config
        self.grid_samples = grid_samples

    def equilibrium_records(self) -> list:
        axis = np.linspace(*PLANE, EQUILIBRIUM_SAMPLES)
        return xy_phase_grid(axis, axis)

    def diagram_records(self):
        cfg = self.run_config
        result = scan_phase_diagram(
            cfg.model,
            cfg.gamma_i,
            Axis("h", *PLANE, self.grid_samples),
            Axis("eta", *PLANE, self.grid_samples),
            resolution=cfg.k_samples,
            workers=cfg.workers,
            progress=sys.stderr.isatty(),
        )
        kc, k01 = [], []
        for cell in result.cells:
            base = {"h_f": cell.param1, "eta_f": cell.param2, "critical": cell.critical}
            kc.append({**base, "n_kc": cell.n_kc, "dqpt_exists": cell.dqpt_exists})
            k01.append({**base, "n_k0": cell.n_k0, "n_k1": cell.n_k1, "sufficient": cell.sufficient})
        return kc, k01

    def density_records(self) -> list:
        pi = XYParams.from_gamma(self.run_config.gamma_i)
        return xy_mode_density(
            pi, ETA_F_LINE, np.linspace(*PLANE, DENSITY_FIELDS), np.linspace(0.0, math.pi, DENSITY_MOMENTA)
        )

    def line_records(self) -> list:
        """Thermodynamic-limit rate functions along eta_f = -2 and their finite-difference derivatives."""
        cfg = self.run_config
        cells = []
        for h_f in np.linspace(*PLANE, LINE_SAMPLES):
            cell = evaluate_cell(
                cfg.model, cfg.gamma_i, (h_f, ETA_F_LINE), cfg.k_samples, thermodynamic_limit=True, params=(h_f, ETA_F_LINE)
            )
            if cell.critical or cell.error:
                continue
            cells.append(cell)
        h = np.array([c.param1 for c in cells])
        lbar = np.array([c.lbar_rate for c in cells])
        fidelity = np.array([c.fidelity_rate for c in cells])
        lbar_slope = rate_derivative(lbar, h)
        fidelity_slope = rate_derivative(fidelity, h)
        return [
            {
                "h_f": c.param1,
                "n_kc": c.n_kc,
                "n_k0": c.n_k0,
                "n_k1": c.n_k1,
                "lbar_rate": c.lbar_rate,
                "lbar_rate_derivative": float(lbar_slope[j]),
                "fidelity_rate": c.fidelity_rate,
                "fidelity_rate_derivative": float(fidelity_slope[j]),
            }
            for j, c in enumerate(cells)
        ]

    def quench_point_records(self) -> list:
        cfg = self.run_config
        rows = []
        for h_f in QUENCH_POINTS:
            gamma_f = (h_f, ETA_F_LINE)
            q = QuenchSpec(cfg.model, cfg.gamma_i, gamma_f, cfg.kgrid)
            roots = find_kc_roots(cfg.model, cfg.gamma_i, gamma_f, cfg.k_samples)
            for mode in classify_grid_modes(q, roots):
                rows.append(
                    {
                        "h_f": h_f,
                        "k": mode.k,
                        "lbar_k": mode.lbar_k,
                        "fidelity_k": mode.fidelity_k,
                        "class": mode.mode_class,
                        "kc_neighborhood": mode.kc_neighborhood,
                    }
                )
        return rows

    def process(self) -> CommandResult:
        cfg = self.run_config
        stem, fmt = cfg.output_path, cfg.output_format
        paths = write_table(stem, "equilibrium_phases", self.equilibrium_records(), fmt)
        kc, k01 = self.diagram_records()
        paths += write_table(stem, "dqpt_diagram", kc, fmt)
        paths += write_table(stem, "k0_k1_diagram", k01, fmt)
        paths += write_table(stem, "mode_density", self.density_records(), fmt)
        paths += write_table(stem, "eta_line", self.line_records(), fmt)
        paths += write_table(stem, "quench_points", self.quench_point_records(), fmt)
        paths += write_table(stem, "relation_curve", relation_curve(), fmt)
        return CommandResult(paths)
