"""
Tabular output for external plotting: RFC-4180 CSV with a header line and an
optional JSON mirror using the same field names.

Floats are written in their shortest round-trip form; infinities become the
literal tokens "inf" / "-inf" so that no file ever holds a NaN-like blank.
"""

import csv
from enum import Enum
import json
import logging
import math
from pathlib import Path
from typing import List, Optional, Sequence

import numpy as np

logger = logging.getLogger(__name__)


def _plain(value):
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, (np.bool_, bool)):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    return value


def format_value(value) -> str:
    """One CSV cell."""
    value = _plain(value)
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return repr(value)
    return str(value)


def json_value(value):
    value = _plain(value)
    if isinstance(value, float) and not math.isfinite(value):
        return "inf" if value > 0 else ("-inf" if value < 0 else "nan")
    return value


def _fields(records: Sequence[dict], fields: Optional[Sequence[str]]) -> List[str]:
    if fields is not None:
        return list(fields)
    names: List[str] = []
    for record in records:
        for name in record:
            if name not in names:
                names.append(name)
    return names


def write_csv(path: Path, records: Sequence[dict], fields: Optional[Sequence[str]] = None) -> Path:
    path = Path(path)
    names = _fields(records, fields)
    with path.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\r\n")
        writer.writerow(names)
        for record in records:
            writer.writerow([format_value(record.get(name)) for name in names])
    return path


def write_json(path: Path, records: Sequence[dict], fields: Optional[Sequence[str]] = None) -> Path:
    path = Path(path)
    names = _fields(records, fields)
    rows = [{name: json_value(record.get(name)) for name in names} for record in records]
    with path.open("w", encoding="utf-8") as handle:
        json.dump(rows, handle, indent=2, allow_nan=False)
        handle.write("\n")
    return path


def write_table(
    stem: str, name: str, records: Sequence[dict], output_format: str = "csv", fields: Optional[Sequence[str]] = None
) -> List[Path]:
    """Write `records` as <stem>_<name>.csv and/or .json; returns the written paths in order."""
    base = Path(f"{stem}_{name}")
    if base.parent != Path("."):
        base.parent.mkdir(parents=True, exist_ok=True)
    written = []
    if output_format in ("csv", "both"):
        written.append(write_csv(Path(f"{base}.csv"), records, fields))
    if output_format in ("json", "both"):
        written.append(write_json(Path(f"{base}.json"), records, fields))
    for path in written:
        logger.info("wrote %d rows to %s", len(records), path)
    return written


def read_csv(path: Path) -> List[dict]:
    """Read a table written by write_csv back, every cell as a string."""
    with Path(path).open(newline="", encoding="utf-8") as handle:
        return list(csv.DictReader(handle))
