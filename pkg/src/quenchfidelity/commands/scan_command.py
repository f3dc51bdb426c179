import logging
import sys

from src.quenchfidelity.commands.command_result import CommandResult
from src.quenchfidelity.config.configfile import RunConfig
from src.quenchfidelity.modes.scan import scan_phase_diagram
from src.quenchfidelity.output.writers import write_table

logger = logging.getLogger(__name__)


class ScanCommand:
    """Dynamical phase diagram over two post-quench parameters."""

    def __init__(self, run_config: RunConfig):
        self.run_config = run_config

    def process(self) -> CommandResult:
        cfg = self.run_config
        axis1, axis2 = cfg.axes
        result = scan_phase_diagram(
            cfg.model,
            cfg.gamma_i,
            axis1,
            axis2,
            resolution=cfg.k_samples,
            kgrid=None if cfg.thermodynamic_limit else cfg.kgrid,
            thermodynamic_limit=cfg.thermodynamic_limit,
            workers=cfg.workers,
            progress=sys.stderr.isatty(),
        )
        failed = sum(1 for c in result.cells if c.error)
        if failed:
            logger.warning("%d of %d cells recorded an error", failed, len(result.cells))
        return CommandResult(write_table(cfg.output_path, "scan", result.records(), cfg.output_format))
