"""
Run artifacts: manifest, time-series CSV and summary, all written atomically.
"""

import csv
import math
import os
import tempfile
from typing import Any, Dict, Iterable, List, Sequence

import numpy as np

from src.logger import setup_logger
from src.config import save_json

# Setup logger
logger = setup_logger(__name__)

MANIFEST_FILE = "manifest.json"
TIMESERIES_FILE = "timeseries.csv"
SUMMARY_FILE = "summary.json"


def format_cell(value: Any) -> str:
    """Floats as the shortest round-trip decimal; everything else as text."""
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return str(value)


def write_csv(file_path: str, columns: Sequence[str], rows: Iterable[Sequence[Any]]) -> None:
    """
    Write a CSV file atomically (temp file in the same directory, then rename).

    Args:
        file_path: Destination path
        columns: Header names
        rows: Row values
    """
    directory = os.path.dirname(os.path.abspath(file_path))
    os.makedirs(directory, exist_ok=True)
    handle, temp_path = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=".csv")
    try:
        with os.fdopen(handle, "w", encoding="utf-8", newline="") as f:
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(list(columns))
            for row in rows:
                writer.writerow([format_cell(value) for value in row])
        os.replace(temp_path, file_path)
        logger.debug(f"Wrote {file_path}")
    except Exception as e:
        logger.error(f"Failed to write {file_path}: {str(e)}")
        if os.path.exists(temp_path):
            os.remove(temp_path)
        raise


def to_json_value(value: Any) -> Any:
    """Convert numpy scalars and arrays to JSON values; NaN and Inf become null."""
    if isinstance(value, dict):
        return {str(k): to_json_value(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_json_value(v) for v in value]
    if isinstance(value, np.ndarray):
        return [to_json_value(v) for v in value.tolist()]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if math.isfinite(value) else None
    if isinstance(value, complex):
        return [to_json_value(value.real), to_json_value(value.imag)]
    return value


def write_run(directory: str, manifest: Dict[str, Any], columns: List[str],
              rows: Iterable[Sequence[Any]], summary: Dict[str, Any],
              artifacts: Dict[str, Dict[str, Any]] = None) -> Dict[str, str]:
    """
    Write the three run files plus any extra JSON artifacts.

    Returns:
        Mapping of artifact name to path
    """
    os.makedirs(directory, exist_ok=True)
    paths = {
        "manifest": os.path.join(directory, MANIFEST_FILE),
        "timeseries": os.path.join(directory, TIMESERIES_FILE),
        "summary": os.path.join(directory, SUMMARY_FILE),
    }
    write_csv(paths["timeseries"], columns, rows)
    save_json(paths["summary"], to_json_value(summary))
    for name, document in (artifacts or {}).items():
        paths[name] = os.path.join(directory, name)
        save_json(paths[name], to_json_value(document))
    save_json(paths["manifest"], to_json_value(manifest))
    logger.info(f"Run artifacts written to {directory}")
    return paths
