import math

from src.quenchfidelity.commands.command_result import CommandResult
from src.quenchfidelity.config.configfile import RunConfig
from src.quenchfidelity.dynamics.quench import lbar_k, quench_fidelity_k
from src.quenchfidelity.modes.mode_analysis import ModeClass, mode_report, sufficient_condition_holds
from src.quenchfidelity.output.writers import write_table


class ModesCommand:
    """Located k_c, k_0 and k_1 roots of one quench, plus the boundary modes and the counts."""

    def __init__(self, run_config: RunConfig):
        self.run_config = run_config

    def root_record(self, kind: ModeClass, k: float, boundary: bool = False) -> dict:
        cfg = self.run_config
        d_i = cfg.model.dvector(cfg.gamma_i, k)
        d_f = cfg.model.dvector(cfg.gamma_f, k)
        return {
            "kind": kind,
            "k": k,
            "cos_k": math.cos(k),
            "fidelity_k": quench_fidelity_k(d_i, d_f),
            "lbar_k": lbar_k(d_i, d_f),
            "boundary": boundary,
        }

    def process(self) -> CommandResult:
        cfg = self.run_config
        report = mode_report(cfg.model, cfg.gamma_i, cfg.gamma_f, cfg.k_samples)

        roots = [self.root_record(ModeClass.KC, k) for k in report.kc_roots]
        roots += [self.root_record(ModeClass.K0, k) for k in report.k0_roots]
        roots += [self.root_record(ModeClass.K1, k) for k in report.k1_roots]
        if report.boundary_flags is not None:
            # boundary modes are decoupled: their fidelity is the 0/1 occupation flag
            for k, flag in zip(cfg.model.boundary_modes, report.boundary_flags):
                roots.append(
                    {
                        "kind": ModeClass.K1 if flag else ModeClass.K0,
                        "k": k,
                        "cos_k": math.cos(k),
                        "fidelity_k": float(flag),
                        "lbar_k": 1.0,
                        "boundary": True,
                    }
                )

        summary = {
            "n_kc": report.n_kc,
            "n_k0": report.n_k0,
            "n_k1": report.n_k1,
            "dqpt_exists": report.dqpt_exists,
            "sufficient": sufficient_condition_holds(report),
            "continuum_k0": report.continuum_k0,
            "continuum_k1": report.continuum_k1,
            "resolution_warning": report.resolution_warning,
            "notes": "; ".join(report.notes),
        }
        paths = write_table(cfg.output_path, "roots", roots, cfg.output_format)
        paths += write_table(cfg.output_path, "mode_counts", [summary], cfg.output_format)
        return CommandResult(paths)
