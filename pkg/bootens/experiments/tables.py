"""Plain-text tables of finished experiment summaries."""
from typing import Any, Dict, List, Sequence

from tabulate import tabulate

from ..evaluation import alpha_key, methods_table
from .variants import NOISE_VARIANTS


def _fmt(value: Any) -> Any:
    if isinstance(value, float):
        return f"{value:.4g}"
    return "-" if value is None else value


def coverage_tables(summary: Dict[str, Any], alphas: Sequence[float], tablefmt: str) -> str:
    blocks = []
    for alpha in alphas:
        blocks.append(f"alpha = {alpha:g}\n" + methods_table(summary["methods"], alpha, tablefmt))
    if "bde_variances" in summary:
        v = summary["bde_variances"]
        blocks.append(
            f"BDE sigma_t^2 = {_fmt(v['sigma_t_sq'])}, sigma_d^2 = {_fmt(v['sigma_d_sq'])}"
        )
    return "\n\n".join(blocks)


def r_sweep_table(variants: Dict[str, Any], alpha: float, tablefmt: str) -> str:
    """Width, Brier score and sigma_d^2 of the BDE against the retraining fraction."""
    key = alpha_key(alpha)
    rows = []
    for name in sorted(variants, key=lambda n: variants[n]["retrain_fraction"]):
        if not name.startswith("r_sweep/"):
            continue
        summary = variants[name]
        entry = summary["methods"].get("BDE", {}).get(key, {})
        brier = entry.get("brier_ci")
        rows.append(
            [
                summary["retrain_fraction"],
                _fmt(entry.get("width_ci")),
                _fmt(None if brier is None else 100 * brier),
                _fmt(entry.get("width_pi")),
                _fmt(summary.get("bde_variances", {}).get("sigma_d_sq")),
            ]
        )
    level = round(100 * (1 - alpha))
    headers = ["r", f"Width CI{level}", f"Brier-CI{level} x100", f"Width PI{level}", "sigma_d^2"]
    return tabulate(rows, headers=headers, tablefmt=tablefmt)


def noise_table(variants: Dict[str, Any], alpha: float, tablefmt: str) -> str:
    """Brier scores per noise model next to their change from the gaussian run."""
    key = alpha_key(alpha)
    baseline = variants["gaussian"]["methods"]
    rows = []
    for noise in NOISE_VARIANTS:
        if noise not in variants:
            continue
        for method, by_alpha in sorted(variants[noise]["methods"].items()):
            entry = by_alpha.get(key, {})
            reference = baseline.get(method, {}).get(key, {})
            brier, base = entry.get("brier_ci"), reference.get("brier_ci")
            change = None if brier is None or base is None else 100 * (brier - base)
            rows.append(
                [
                    noise,
                    method,
                    _fmt(None if brier is None else 100 * brier),
                    _fmt(change),
                    _fmt(entry.get("width_ci")),
                ]
            )
    level = round(100 * (1 - alpha))
    headers = [
        "noise",
        "method",
        f"Brier-CI{level} x100",
        "vs gaussian x100",
        f"Width CI{level}",
    ]
    return tabulate(rows, headers=headers, tablefmt=tablefmt)


def variants_tables(summary: Dict[str, Any], alphas: Sequence[float], tablefmt: str) -> str:
    variants = summary["variants"]
    blocks: List[str] = []
    for name in sorted(variants):
        if name.startswith("r_sweep/"):
            continue
        blocks.append(f"[{name}]\n" + coverage_tables(variants[name], alphas, tablefmt))
    if any(name.startswith("r_sweep/") for name in variants):
        for alpha in alphas:
            table = r_sweep_table(variants, alpha, tablefmt)
            blocks.append(f"[r_sweep] alpha = {alpha:g}\n" + table)
    if "gaussian" in variants and any(n in variants for n in NOISE_VARIANTS[1:]):
        for alpha in alphas:
            table = noise_table(variants, alpha, tablefmt)
            blocks.append(f"[noise] alpha = {alpha:g}\n" + table)
    return "\n\n".join(blocks)


def exp2_table(summary: Dict[str, Any], tablefmt: str) -> str:
    rows = [
        [
            row["n"],
            _fmt(row["sigma_t_sq"]),
            _fmt(row["sigma_d_sq"]),
            "yes" if row["clamped"] else "",
        ]
        for row in summary["rows"]
    ]
    headers = ["N", "sigma_t^2", "sigma_d^2", "clamped"]
    return f"K = {summary['k']}\n" + tabulate(rows, headers=headers, tablefmt=tablefmt)


def exp3_table(summary: Dict[str, Any], tablefmt: str) -> str:
    headers = ["dataset", "BDE sigma_t^2", "BDE sigma_d^2", "sigma_t^2", "sigma_d^2", "ratio"]
    row = [
        summary["dataset"],
        _fmt(summary["bde_sigma_t_sq"]),
        _fmt(summary["bde_sigma_d_sq"]),
        _fmt(summary["oracle_sigma_t_sq"]),
        _fmt(summary["oracle_sigma_d_sq"]),
        _fmt(summary["ratio"]),
    ]
    table = tabulate([row], headers=headers, tablefmt=tablefmt)
    if summary.get("degenerate"):
        table += "\n(no retrained epochs: BDE sigma_d^2 is 0 by construction)"
    return f"M = {summary['m']}, r = {summary['retrain_fraction']:g}\n" + table


def exp4_table(summary: Dict[str, Any], tablefmt: str) -> str:
    level = round(100 * (1 - summary["alpha"]))
    rows = [
        [f"mean BDE CI{level} width at the data", _fmt(summary["mean_bde_width_at_points"])],
        [f"mean DE CI{level} width at the data", _fmt(summary["mean_de_width_at_points"])],
        ["ratio", _fmt(summary["width_ratio"])],
    ]
    return tabulate(rows, tablefmt=tablefmt)


def render_summary(
    summary: Dict[str, Any], alphas: Sequence[float], tablefmt: str = "simple"
) -> str:
    if "variants" in summary:
        return variants_tables(summary, alphas, tablefmt)
    match summary.get("experiment"):
        case "exp2":
            return exp2_table(summary, tablefmt)
        case "exp3":
            return exp3_table(summary, tablefmt)
        case "exp4":
            return exp4_table(summary, tablefmt)
    return coverage_tables(summary, alphas, tablefmt)
