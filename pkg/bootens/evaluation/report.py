"""
Coverage reports and their files.

Per experiment the writers produce one CSV of raw per-point values per
(method, alpha, kind) and a `summary.json`. JSON is written with sorted keys
and without timestamps, so reruns give byte-identical files.
"""
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
from tabulate import tabulate

from ..intervals import IntervalKind, IntervalSet
from ..utils import write_rows
from .metrics import brier, containment_probability, rmse


def alpha_key(alpha: float) -> str:
    return f"{alpha:g}"


@dataclass
class CoverageReport:
    method: str
    alpha: float
    n_sim: int
    cicf: Optional[np.ndarray] = None
    picf: Optional[np.ndarray] = None
    brier_ci: Optional[float] = None
    brier_pi: Optional[float] = None
    width_ci: Optional[float] = None
    width_pi: Optional[float] = None
    rmse: Optional[float] = None
    bias: Optional[np.ndarray] = None
    point_width_ci: Optional[np.ndarray] = None
    point_width_pi: Optional[np.ndarray] = None

    def __post_init__(self):
        for name in ("cicf", "picf"):
            values = getattr(self, name)
            if values is not None and np.any((values < 0) | (values > 1)):
                raise ValueError(f"{name} values must lie in [0, 1]")

    def summary(self) -> Dict[str, Any]:
        out = {"n_sim": self.n_sim}
        for name in ("brier_ci", "brier_pi", "width_ci", "width_pi", "rmse"):
            value = getattr(self, name)
            if value is not None:
                out[name] = value
        if self.cicf is not None:
            out["mean_cicf"] = float(np.mean(self.cicf))
        if self.picf is not None:
            out["mean_picf"] = float(np.mean(self.picf))
        return out


@dataclass
class CoverageAccumulator:
    """
    Collects one method's per-replicate results.

    Replicates are added in index order; all aggregates are plain means over
    replicates, so the result does not depend on how replicates were scheduled.
    """

    method: str
    true_f: np.ndarray
    sigma_sq: np.ndarray
    noise: Any
    ci_hits: Dict[float, List[np.ndarray]] = field(default_factory=dict)
    pi_probs: Dict[float, List[np.ndarray]] = field(default_factory=dict)
    ci_widths: Dict[float, List[np.ndarray]] = field(default_factory=dict)
    pi_widths: Dict[float, List[np.ndarray]] = field(default_factory=dict)
    errors: List[np.ndarray] = field(default_factory=list)
    rmses: List[float] = field(default_factory=list)

    def add(
        self,
        intervals: Dict[Tuple[IntervalKind, float], IntervalSet],
        f_star: np.ndarray,
        test_targets: Optional[np.ndarray] = None,
    ):
        for (kind, alpha), interval in intervals.items():
            match kind:
                case IntervalKind.CONFIDENCE:
                    self.ci_hits.setdefault(alpha, []).append(interval.contains(self.true_f))
                    self.ci_widths.setdefault(alpha, []).append(interval.width)
                case IntervalKind.PREDICTION:
                    prob = containment_probability(self.true_f, self.sigma_sq, self.noise, interval)
                    self.pi_probs.setdefault(alpha, []).append(prob)
                    self.pi_widths.setdefault(alpha, []).append(interval.width)
        self.errors.append(np.asarray(f_star) - self.true_f)
        if test_targets is not None:
            self.rmses.append(rmse(f_star, test_targets))

    @property
    def n_sim(self) -> int:
        return len(self.errors)

    def reports(self) -> List[CoverageReport]:
        out = []
        bias = np.mean(self.errors, axis=0)
        mean_rmse = float(np.mean(self.rmses)) if self.rmses else None
        for alpha in sorted(set(self.ci_hits) | set(self.pi_probs)):
            report = CoverageReport(self.method, alpha, self.n_sim, rmse=mean_rmse, bias=bias)
            if alpha in self.ci_hits:
                report.cicf = np.mean(self.ci_hits[alpha], axis=0)
                report.brier_ci = brier(report.cicf, alpha)
                report.point_width_ci = np.mean(self.ci_widths[alpha], axis=0)
                report.width_ci = float(np.mean(report.point_width_ci))
            if alpha in self.pi_probs:
                report.picf = np.mean(self.pi_probs[alpha], axis=0)
                report.brier_pi = brier(report.picf, alpha)
                report.point_width_pi = np.mean(self.pi_widths[alpha], axis=0)
                report.width_pi = float(np.mean(report.point_width_pi))
            out.append(report)
        return out


def write_coverage_csvs(out_dir: Path, reports: List[CoverageReport], true_f) -> List[Path]:
    """One CSV of per-point coverage, width and bias per (method, alpha, kind)."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for report in reports:
        for short, values, widths in (
            ("ci", report.cicf, report.point_width_ci),
            ("pi", report.picf, report.point_width_pi),
        ):
            if values is None:
                continue
            path = out_dir / f"{report.method}_{short}_alpha{alpha_key(report.alpha)}.csv"
            rows = zip(range(len(values)), true_f, values, widths, report.bias)
            write_rows(path, ["point", "f", "coverage", "mean_width", "bias"], rows)
            written.append(path)
    return written


def summarize(reports: List[CoverageReport]) -> Dict[str, Dict[str, Any]]:
    out: Dict[str, Dict[str, Any]] = {}
    for report in reports:
        out.setdefault(report.method, {})[alpha_key(report.alpha)] = report.summary()
    return out


def _fmt(value: Optional[float], scale: float = 1.0) -> str:
    return "-" if value is None else f"{value * scale:.3g}"


def methods_table(summary: Dict[str, Dict[str, Any]], alpha: float, tablefmt: str = "simple") -> str:
    """Brier scores (x100), widths and RMSE per method at one alpha."""
    key = alpha_key(alpha)
    level = round(100 * (1 - alpha))
    rows = []
    for method in sorted(summary):
        entry = summary[method].get(key)
        if entry is None:
            continue
        rows.append(
            [
                method,
                _fmt(entry.get("brier_ci"), 100),
                _fmt(entry.get("brier_pi"), 100),
                _fmt(entry.get("width_ci")),
                _fmt(entry.get("width_pi")),
                _fmt(entry.get("rmse")),
            ]
        )
    headers = [
        "method",
        f"Brier-CI{level} x100",
        f"Brier-PI{level} x100",
        f"Width CI{level}",
        f"Width PI{level}",
        "RMSE",
    ]
    return tabulate(rows, headers=headers, tablefmt=tablefmt)
