from .evolution_oracle import (
    OracleProperty,
    OracleReport,
    check_anticommutator,
    check_expectations,
    check_state_mapping,
    numeric_lbar,
)
from .property_suite import run_property_suite

__all__ = [
    "OracleProperty",
    "OracleReport",
    "check_anticommutator",
    "check_expectations",
    "check_state_mapping",
    "numeric_lbar",
    "run_property_suite",
]
