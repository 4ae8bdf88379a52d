import math

import numpy as np
import pytest
from bootens.config import load_experiment_config
from bootens.core import RngStream
from bootens.ensemble import EnsembleConfig, predict_members, train_bootstrapped_ensemble
from bootens.experiments import run_exp1, run_exp2, run_exp3, run_exp4, run_variants
from bootens.intervals import BdeStatistics, de_mixture_moments
from bootens.network import MlpConfig, forward_batch, train


@pytest.mark.parametrize("seed", range(10))
def test_mixture_moments_match_brute_force(seed):
    rng = RngStream(seed).generator
    m = int(rng.integers(2, 7))
    means = rng.normal(scale=2.0, size=m)
    variances = rng.uniform(0.1, 3.0, size=m)
    n = 1_000_000
    pick = rng.integers(0, m, size=n)
    draws = rng.normal(means[pick], np.sqrt(variances[pick]))
    f_star, sigma_star_sq = de_mixture_moments(means, variances)
    centered = draws - draws.mean()
    sample_var = np.mean(centered**2)
    var_se = math.sqrt((np.mean(centered**4) - sample_var**2) / n)
    assert abs(draws.mean() - f_star) <= 4 * math.sqrt(sample_var / n)
    assert abs(sample_var - sigma_star_sq) <= 4 * var_se


# Desk-scale runs of the full experiments on the bundled dataset; minutes each.


def desk(tmp_path, experiment, **overrides):
    settings = {"experiment": experiment, "output": str(tmp_path), "jobs": 4}
    settings.update({key.replace("__", "."): value for key, value in overrides.items()})
    return load_experiment_config(overrides=settings)


@pytest.mark.slow
def test_benchmark_orders_methods(tmp_path):
    summary = run_exp1(desk(tmp_path, "exp1"))
    at_80 = {method: summary["methods"][method]["0.2"] for method in ["BDE", "DE", "NB"]}
    assert at_80["BDE"]["brier_ci"] < at_80["DE"]["brier_ci"] < at_80["NB"]["brier_ci"]
    assert at_80["BDE"]["width_ci"] > at_80["DE"]["width_ci"]


@pytest.mark.slow
def test_bde_variance_matches_oracle(tmp_path):
    summary = run_exp3(desk(tmp_path, "exp3"))
    assert summary["m"] == 20
    assert 0.7 <= summary["ratio"] <= 1.3


@pytest.mark.slow
def test_overfitting_network_keeps_bde_intervals_open(tmp_path):
    summary = run_exp4(desk(tmp_path, "exp4"))
    assert summary["width_ratio"] >= 2


@pytest.mark.slow
def test_width_grows_with_retrain_fraction(tmp_path):
    cfg = desk(tmp_path, "r_sweep", methods=["BDE"], variants__run=["r_sweep"])
    combined = run_variants(cfg)
    widths = [
        combined[f"r_sweep/r{r:g}"]["methods"]["BDE"]["0.2"]["width_ci"]
        for r in cfg.variants.r_grid
    ]
    assert widths == sorted(widths)


@pytest.mark.slow
def test_data_variance_shrinks_with_training_size(tmp_path):
    cfg = desk(tmp_path, "exp2")
    rows = run_exp2(cfg)
    by_n = {row["n"]: row for row in rows}
    smallest, largest = min(cfg.exp2.n_grid), max(cfg.exp2.n_grid)
    assert by_n[largest]["sigma_d_sq"] < by_n[smallest]["sigma_d_sq"]


@pytest.mark.slow
def test_data_variance_matches_least_squares_on_linear_toy():
    rng = RngStream(31).generator
    n, noise_sd = 500, 0.3
    X = rng.uniform(-1, 1, size=(n, 1))
    y = 1.5 * X[:, 0] + 0.5 + noise_sd * rng.standard_normal(n)
    net = MlpConfig(input_dim=1, hidden_sizes=(16, 16), epochs=80, learning_rate=0.005)
    cfg = EnsembleConfig(m=10, retrain_fraction=0.3, net=net, base_seed=5)
    bde = train_bootstrapped_ensemble(cfg, (X, y))
    grid = np.linspace(-0.8, 0.8, 33).reshape(-1, 1)
    means, variances = predict_members(bde.original_ensemble(), grid)
    retrained, _ = predict_members(bde.retrained_ensemble(), grid)
    sigma_d_sq = BdeStatistics.from_predictions(means, variances, retrained).sigma_d_sq

    design = np.column_stack([np.ones(n), X[:, 0]])
    test_design = np.column_stack([np.ones(len(grid)), grid[:, 0]])
    leverage = np.einsum("ij,jk,ik->i", test_design, np.linalg.inv(design.T @ design), test_design)
    ols_variance = noise_sd**2 * leverage
    ratio = np.mean(sigma_d_sq) / np.mean(ols_variance)
    assert 0.5 <= ratio <= 2.0


@pytest.mark.slow
def test_network_learns_heteroscedastic_noise():
    rng = RngStream(32).generator
    n = 2000
    X = rng.uniform(-1, 1, size=(n, 1))
    sigma = 0.5 + np.abs(X[:, 0])
    y = sigma * rng.standard_normal(n)
    net = MlpConfig(input_dim=1, l2_coefficient=1.0 / n, epochs=80)
    params = train(net, (X, y), RngStream(33)).params
    grid = np.linspace(-0.9, 0.9, 19).reshape(-1, 1)
    _, variance = forward_batch(params, net, grid)
    true_sigma = 0.5 + np.abs(grid[:, 0])
    assert np.all(np.abs(np.sqrt(variance) / true_sigma - 1) <= 0.25)


@pytest.mark.slow
def test_gamma_noise_degrades_coverage(tmp_path):
    cfg = desk(tmp_path, "variants", methods=["BDE"], variants__run=["gaussian", "gamma"])
    combined = run_variants(cfg)
    brier = {noise: combined[noise]["methods"]["BDE"]["0.2"]["brier_ci"] for noise in combined}
    assert brier["gamma"] > brier["gaussian"]
