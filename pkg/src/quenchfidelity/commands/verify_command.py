import logging

from src.quenchfidelity.commands.command_result import CommandResult
from src.quenchfidelity.config.configfile import RunConfig
from src.quenchfidelity.oracle.property_suite import run_property_suite
from src.quenchfidelity.output.writers import write_table

logger = logging.getLogger(__name__)


class VerifyCommand:
    def __init__(self, run_config: RunConfig, inject_fault: bool = False):
        self.run_config = run_config
        self.inject_fault = inject_fault

    def process(self) -> CommandResult:
        cfg = self.run_config
        reports = run_property_suite(cfg.seed, cfg.trials, cfg.oracle_trials, self.inject_fault)
        failed = [r.checked_property.value for r in reports if not r.passed]
        if failed:
            logger.warning("failed properties: %s", ", ".join(failed))
        paths = write_table(cfg.output_path, "verify", [r.as_record() for r in reports], cfg.output_format)
        return CommandResult(paths, passed=not failed)
