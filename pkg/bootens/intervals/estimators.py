import numpy as np


def estimate_sigma_t_sq(member_means) -> np.ndarray | float:
    """Unbiased sample variance of member means along axis 0 (divisor M - 1)."""
    means = np.asarray(member_means, dtype=np.float64)
    if means.shape[0] < 2:
        raise ValueError("estimating sigma_t^2 needs at least 2 members")
    result = np.var(means, axis=0, ddof=1)
    return float(result) if np.ndim(result) == 0 else result


def estimate_sigma_d_sq(original_means, retrained_means) -> np.ndarray | float:
    """Mean squared original-versus-retrained difference (divisor M)."""
    original = np.asarray(original_means, dtype=np.float64)
    retrained = np.asarray(retrained_means, dtype=np.float64)
    if original.shape != retrained.shape:
        raise ValueError(f"shape mismatch: {original.shape} vs {retrained.shape}")
    if original.shape[0] < 1:
        raise ValueError("estimating sigma_d^2 needs at least 1 member")
    result = np.mean((original - retrained) ** 2, axis=0)
    return float(result) if np.ndim(result) == 0 else result


def empirical_quantiles(samples, probs, axis: int = 0) -> np.ndarray:
    """Quantiles by linear interpolation between order statistics."""
    return np.quantile(np.asarray(samples, dtype=np.float64), probs, axis=axis, method="linear")
