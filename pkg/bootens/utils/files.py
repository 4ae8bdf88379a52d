import csv
import json
from pathlib import Path
from typing import Any, Iterable, List

import numpy as np


def write_json(path: Path, data: Any):
    """Sorted keys, two-space indent, trailing newline."""
    with open(path, "w") as f:
        json.dump(data, f, sort_keys=True, indent=2)
        f.write("\n")


def read_json(path: Path) -> Any:
    with open(path) as f:
        return json.load(f)


def _cell(value: Any) -> Any:
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, np.integer):
        return int(value)
    return value


def write_rows(path: Path, header: List[str], rows: Iterable[Iterable[Any]]):
    """CSV with floats written at full precision."""
    with open(path, "w", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_cell(v) for v in row])
