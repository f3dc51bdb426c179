from dataclasses import dataclass, field
from pathlib import Path
from typing import List


@dataclass
class CommandResult:
    """Files a command wrote and whether it succeeded (only `verify` can fail without raising)."""

    paths: List[Path] = field(default_factory=list)
    passed: bool = True
