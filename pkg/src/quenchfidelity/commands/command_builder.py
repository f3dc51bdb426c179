from src.quenchfidelity.commands.modes_command import ModesCommand
from src.quenchfidelity.commands.quench_command import QuenchCommand
from src.quenchfidelity.commands.scan_command import ScanCommand
from src.quenchfidelity.commands.verify_command import VerifyCommand
from src.quenchfidelity.commands.xy_demo_command import XYDemoCommand
from src.quenchfidelity.config.configfile import RunConfig
from src.quenchfidelity.core.errors import DomainError


class CommandBuilder:
    def __init__(self, run_config: RunConfig, inject_fault: bool = False, grid_samples: int = 201):
        self.run_config = run_config
        self.inject_fault = inject_fault
        self.grid_samples = grid_samples

    def setup_command(self, name: str):
        """
        Sets up the command object for the selected subcommand.
        """
        if name == "quench":
            return QuenchCommand(self.run_config)
        elif name == "scan":
            return ScanCommand(self.run_config)
        elif name == "modes":
            return ModesCommand(self.run_config)
        elif name == "verify":
            return VerifyCommand(self.run_config, self.inject_fault)
        elif name == "xy-demo":
            return XYDemoCommand(self.run_config, self.grid_samples)
        else:
            raise DomainError(f"unknown command '{name}'")
