import csv
import hashlib
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Tuple

import numpy as np

from ..core import RngStream
from ..errors import DatasetError

log = logging.getLogger(__name__)

BUNDLED_DATASET = Path(__file__).resolve().parent.parent / "data" / "synthetic.csv"


@dataclass
class Dataset:
    X: np.ndarray
    y: np.ndarray
    feature_names: List[str] = field(default_factory=list)
    target_name: str = "y"
    source: str = ""

    def __post_init__(self):
        self.X = np.atleast_2d(np.asarray(self.X, dtype=np.float64))
        self.y = np.asarray(self.y, dtype=np.float64).reshape(-1)
        if self.X.shape[0] != len(self.y):
            raise DatasetError(f"{self.X.shape[0]} input rows but {len(self.y)} targets")
        if not self.feature_names:
            self.feature_names = [f"x{i}" for i in range(self.X.shape[1])]

    def __len__(self) -> int:
        return len(self.y)

    @property
    def n_features(self) -> int:
        return self.X.shape[1]

    def subset(self, idx: np.ndarray) -> "Dataset":
        return Dataset(self.X[idx], self.y[idx], self.feature_names, self.target_name, self.source)


def load_csv(path: Path) -> Dataset:
    """
    Read a numeric CSV with a header row; the last column is the target.

    Blank lines are skipped. Any non-numeric or non-finite cell is reported
    together with its line number.
    """
    path = Path(path)
    rows, errors = [], []
    with open(path, newline="") as f:
        reader = csv.reader(f)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise DatasetError(f"{path} is empty")
        if len(header) < 2:
            raise DatasetError(f"{path}: need at least one feature column and a target column")
        for row in reader:
            line = reader.line_num
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) != len(header):
                errors.append(f"line {line}: expected {len(header)} columns, found {len(row)}")
                continue
            try:
                values = [float(cell) for cell in row]
            except ValueError:
                bad = next(c for c in row if not _is_float(c))
                errors.append(f"line {line}: non-numeric cell `{bad.strip()}`")
                continue
            if not all(np.isfinite(values)):
                errors.append(f"line {line}: non-finite value")
                continue
            rows.append(values)
    if errors:
        shown = "; ".join(errors[:5])
        more = f" (and {len(errors) - 5} more)" if len(errors) > 5 else ""
        raise DatasetError(f"{path}: {shown}{more}")
    if len(rows) < 2:
        raise DatasetError(f"{path}: need at least 2 data rows, found {len(rows)}")
    data = np.array(rows, dtype=np.float64)
    log.info("loaded %d rows with %d features from %s", len(rows), data.shape[1] - 1, path)
    return Dataset(data[:, :-1], data[:, -1], header[:-1], header[-1], str(path))


def _is_float(cell: str) -> bool:
    try:
        float(cell)
        return True
    except ValueError:
        return False


def dataset_digest(dataset: Dataset) -> str:
    h = hashlib.sha256()
    h.update(np.ascontiguousarray(dataset.X, dtype="<f8").tobytes())
    h.update(np.ascontiguousarray(dataset.y, dtype="<f8").tobytes())
    h.update(",".join([*dataset.feature_names, dataset.target_name]).encode())
    return h.hexdigest()


def synthetic_mean(X: np.ndarray) -> np.ndarray:
    X = np.atleast_2d(X)
    f = 2.0 * np.sin(X[:, 0])
    if X.shape[1] > 1:
        f = f + 0.5 * X[:, 1] ** 2
    if X.shape[1] > 2:
        f = f + X[:, 2:].sum(axis=1) * 0.3
    return f


def synthetic_sigma(X: np.ndarray) -> np.ndarray:
    X = np.atleast_2d(X)
    return 0.3 + 0.5 * np.abs(np.cos(0.5 * X[:, 0]))


def make_synthetic_dataset(n: int, d: int, rng: RngStream) -> Dataset:
    """Heteroscedastic nonlinear regression data with inputs uniform on [-2, 2]^d."""
    if n < 2 or d < 1:
        raise ValueError("need n >= 2 rows and d >= 1 features")
    X = rng.generator.uniform(-2.0, 2.0, size=(n, d))
    y = synthetic_mean(X) + synthetic_sigma(X) * rng.generator.standard_normal(n)
    return Dataset(X, y, source=f"synthetic(n={n}, d={d})")


def split_covariates(
    X: np.ndarray, test_fraction: float, rng: RngStream
) -> Tuple[np.ndarray, np.ndarray]:
    """Random train/test split of row indices, at least one row on each side."""
    n = np.atleast_2d(X).shape[0]
    if not 0.0 < test_fraction < 1.0:
        raise ValueError(f"test_fraction must lie in (0, 1), got {test_fraction}")
    if n < 2:
        raise DatasetError("cannot split fewer than 2 rows")
    n_test = min(n - 1, max(1, round(test_fraction * n)))
    perm = rng.generator.permutation(n)
    return np.sort(perm[n_test:]), np.sort(perm[:n_test])
