"""
lrpids Export Module.

Writes command results as CSV tables and JSON sidecars. Every file carries
the config digest; floats are written with 17 significant digits and nothing
time-dependent is recorded, so identical configs give byte-identical files.
"""

import csv
import json
import logging
import math
from pathlib import Path
from typing import Any, Iterable, List, Sequence

import numpy as np

logger = logging.getLogger("lrpids")


def output_stem(command: str, config_digest: str) -> str:
    """`<command>-<digest[:12]>`, the common stem of all files of one run."""
    return f"{command}-{config_digest[:12]}"


def format_cell(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return "%.17g" % float(value)
    return str(value)


def to_jsonable(value: Any) -> Any:
    """Converts numpy scalars/arrays and non-finite floats into plain JSON values."""
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return to_jsonable(value.tolist())
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if math.isfinite(value) else None
    return value


def write_csv(
    path: Path, columns: Sequence[str], rows: Iterable[Sequence[Any]], config_digest: str
) -> Path:
    """
    Writes a CSV table preceded by a `# config_digest=<hex>` comment line.

    Args:
        path: Target file.
        columns: Header names.
        rows: Row values; floats are written as %.17g.
        config_digest: Full config digest.

    Returns:
        Path: The written file.
    """
    path = Path(path)
    with path.open("w", newline="") as handle:
        handle.write(f"# config_digest={config_digest}\n")
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([format_cell(v) for v in row])
    logger.debug(f"Wrote {path}")
    return path


def write_json(path: Path, payload: Any) -> Path:
    """Writes a JSON document with sorted keys and two-space indent."""
    path = Path(path)
    path.write_text(json.dumps(to_jsonable(payload), sort_keys=True, indent=2) + "\n")
    logger.debug(f"Wrote {path}")
    return path


def read_csv_rows(path: Path) -> List[List[str]]:
    """Reads back a CSV written by write_csv: header row first, digest comment skipped."""
    with Path(path).open(newline="") as handle:
        lines = [line for line in handle if not line.startswith("#")]
    return list(csv.reader(lines))
