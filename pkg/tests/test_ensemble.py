from dataclasses import replace

import numpy as np
import pytest
from bootens.core import RngStream
from bootens.ensemble import (
    DeepEnsemble,
    EnsembleConfig,
    bootstrap_indices,
    epoch_budget,
    load_ensemble,
    member_seeds,
    predict_members,
    save_ensemble,
    train_bootstrapped_ensemble,
    train_deep_ensemble,
    train_naive_bootstrap,
    train_with_retry,
)
from bootens.ensemble import training as ensemble_training
from bootens.errors import InvariantViolation, TrainingDivergedError
from bootens.intervals import BdeStatistics
from bootens.network import MlpConfig, Standardizer, train


def linear_data(n=500, seed=0):
    rng = RngStream(seed).generator
    X = rng.uniform(-1, 1, size=(n, 1))
    y = 2 * X[:, 0] + 0.1 * rng.standard_normal(n)
    return X, y


def small_cfg(**kwargs) -> EnsembleConfig:
    net = MlpConfig(input_dim=1, hidden_sizes=(16, 16), epochs=30, learning_rate=0.01)
    settings = dict(m=2, retrain_fraction=0.3, net=net, base_seed=3)
    settings.update(kwargs)
    return EnsembleConfig(**settings)


def same_members(a, b) -> bool:
    return all(
        np.array_equal(x, y) for p, q in zip(a, b) for x, y in zip(p.arrays(), q.arrays())
    )


grid = np.linspace(-0.9, 0.9, 37).reshape(-1, 1)


def test_deep_ensemble_fits_linear_toy():
    ensemble = train_deep_ensemble(small_cfg(), linear_data())
    means, variances = predict_members(ensemble, grid)
    assert means.shape == (2, 37) and variances.shape == (2, 37)
    assert not np.array_equal(means[0], means[1])
    for member in means:
        assert np.sqrt(np.mean((member - 2 * grid[:, 0]) ** 2)) < 0.25


def test_deep_ensemble_is_deterministic():
    a = train_deep_ensemble(small_cfg(), linear_data())
    b = train_deep_ensemble(small_cfg(), linear_data())
    assert same_members(a.members, b.members)


def test_parallel_members_match_serial():
    serial = train_deep_ensemble(small_cfg(), linear_data(n=100))
    parallel = train_deep_ensemble(small_cfg(), linear_data(n=100), jobs=2)
    assert same_members(serial.members, parallel.members)


def test_bde_originals_equal_deep_ensemble():
    data = linear_data(n=200)
    de = train_deep_ensemble(small_cfg(), data)
    bde = train_bootstrapped_ensemble(small_cfg(), data)
    assert same_members(bde.originals, de.members)
    assert not same_members(bde.retrained, bde.originals)
    assert all(c.epoch_index == 21 for c in bde.checkpoints)


def test_zero_retrain_fraction_copies_originals():
    data = linear_data(n=100)
    bde = train_bootstrapped_ensemble(small_cfg(retrain_fraction=0.0), data)
    assert same_members(bde.retrained, bde.originals)
    assert bde.checkpoints == [None, None]
    means, variances = predict_members(bde.original_ensemble(), grid)
    retrained, _ = predict_members(bde.retrained_ensemble(), grid)
    stats = BdeStatistics.from_predictions(means, variances, retrained)
    assert np.all(stats.sigma_d_sq == 0)


def test_full_retrain_from_epoch_zero():
    bde = train_bootstrapped_ensemble(small_cfg(retrain_fraction=1.0), linear_data(n=100))
    assert all(c.epoch_index == 0 for c in bde.checkpoints)
    assert bde.size == 2


def test_retraining_is_per_member():
    data = linear_data(n=100)
    two = train_bootstrapped_ensemble(small_cfg(m=2), data)
    three = train_bootstrapped_ensemble(small_cfg(m=3), data)
    assert same_members(two.retrained, three.retrained[:2])


def test_naive_bootstrap_differs_from_deep_ensemble():
    data = linear_data(n=100)
    nb = train_naive_bootstrap(small_cfg(), data)
    de = train_deep_ensemble(small_cfg(), data)
    assert nb.method == "NB"
    assert not same_members(nb.members, de.members)


def test_bootstrap_indices_are_reproducible():
    a = bootstrap_indices(RngStream(1, 5), 50)
    b = bootstrap_indices(RngStream(1, 5), 50)
    assert np.array_equal(a, b)
    assert a.min() >= 0 and a.max() < 50


def test_bootstrap_unique_fraction():
    rng = RngStream(2)
    fractions = [
        len(np.unique(bootstrap_indices(rng.child(k), 1000))) / 1000 for k in range(200)
    ]
    assert np.mean(fractions) == pytest.approx(1 - np.exp(-1), abs=0.01)


def test_bootstrap_needs_two_rows():
    with pytest.raises(ValueError):
        bootstrap_indices(RngStream(0), 1)


def test_predict_members_follows_target_scale():
    ensemble = train_deep_ensemble(small_cfg(), linear_data(n=100))
    s = ensemble.standardizer
    scaled = DeepEnsemble(
        ensemble.members,
        Standardizer(s.x_mean, s.x_std, 10 * s.y_mean, 10 * s.y_std),
        ensemble.net,
    )
    means, variances = predict_members(ensemble, grid)
    scaled_means, scaled_variances = predict_members(scaled, grid)
    assert np.allclose(scaled_means, 10 * means)
    assert np.allclose(scaled_variances, 100 * variances)


def test_predict_members_identity_standardizer():
    ensemble = train_deep_ensemble(small_cfg(), linear_data(n=100))
    raw = DeepEnsemble(ensemble.members[:1], Standardizer.identity(1), ensemble.net)
    means, _ = predict_members(raw, grid)
    assert means.shape == (1, 37)


def test_predict_members_checks_width():
    ensemble = train_deep_ensemble(small_cfg(), linear_data(n=100))
    with pytest.raises(ValueError):
        predict_members(ensemble, np.zeros((3, 2)))


checkpoint_tests = [
    (80, 0.3, 56, 24),
    (10, 0.25, 8, 2),
    (5, 0.5, 2, 3),
    (10, 0.0, 10, 0),
    (10, 1.0, 0, 10),
]


@pytest.mark.parametrize("epochs, r, checkpoint, retrain", checkpoint_tests)
def test_checkpoint_epoch(epochs, r, checkpoint, retrain):
    cfg = small_cfg(retrain_fraction=r, net=MlpConfig(input_dim=1, epochs=epochs))
    assert cfg.checkpoint_epoch == checkpoint
    assert cfg.retrain_epochs == retrain


def test_epoch_budget():
    cfg = EnsembleConfig(m=5, retrain_fraction=0.3, net=MlpConfig(input_dim=1, epochs=80))
    assert epoch_budget(cfg) == 5 * (80 + 24)


@pytest.mark.parametrize("kwargs", [dict(m=1), dict(retrain_fraction=1.5), dict(base_seed=-1)])
def test_invalid_ensemble_config(kwargs):
    with pytest.raises(ValueError):
        small_cfg(**kwargs)


def test_member_seeds_by_method():
    seeds = member_seeds(small_cfg(m=3), ["DE"])
    assert sorted(seeds) == ["member_00", "member_01", "member_02"]
    assert list(seeds["member_00"]) == ["train"]
    both = member_seeds(small_cfg(m=3), ["BDE", "NB"])
    assert set(both["member_01"]) == {"train", "boot", "nb"}


def test_save_and_load_bde(tmp_path):
    data = linear_data(n=100)
    cfg = small_cfg()
    bde = train_bootstrapped_ensemble(cfg, data)
    save_ensemble(tmp_path / "bde", bde, cfg, dataset_hash="abc")
    loaded, loaded_cfg = load_ensemble(tmp_path / "bde")
    assert loaded_cfg.m == 2 and loaded_cfg.retrain_fraction == 0.3
    assert same_members(loaded.originals, bde.originals)
    assert same_members(loaded.retrained, bde.retrained)
    assert loaded.checkpoints[0].epoch_index == bde.checkpoints[0].epoch_index
    a, _ = predict_members(loaded.original_ensemble(), grid)
    b, _ = predict_members(bde.original_ensemble(), grid)
    assert np.array_equal(a, b)


def test_save_and_load_deep_ensemble(tmp_path):
    cfg = small_cfg()
    de = train_deep_ensemble(cfg, linear_data(n=100))
    save_ensemble(tmp_path / "de", de, cfg)
    loaded, _ = load_ensemble(tmp_path / "de")
    assert isinstance(loaded, DeepEnsemble) and loaded.method == "DE"
    assert same_members(loaded.members, de.members)


def test_load_rejects_non_ensemble(tmp_path):
    with pytest.raises(InvariantViolation):
        load_ensemble(tmp_path)


def test_input_dim_follows_data():
    X = RngStream(0).generator.normal(size=(50, 3))
    y = X.sum(axis=1)
    ensemble = train_deep_ensemble(replace(small_cfg(), base_seed=1), (X, y))
    assert ensemble.net.input_dim == 3
    assert ensemble.net.l2_coefficient == pytest.approx(1 / 50)


def diverging(real, failures):
    """Wrap `real` so that its first `failures` calls diverge."""
    calls = []

    def wrapper(*args, **kwargs):
        calls.append(args)
        if len(calls) <= failures:
            raise TrainingDivergedError(len(calls))
        return real(*args, **kwargs)

    wrapper.calls = calls
    return wrapper


def test_diverged_member_retries_on_retry_stream(monkeypatch):
    net = small_cfg().net.resolved(100)
    data = linear_data(n=100)
    rng = RngStream(3, 11)
    flaky = diverging(train, 1)
    monkeypatch.setattr(ensemble_training, "train", flaky)
    result = train_with_retry(net, data, rng, member=0)
    assert len(flaky.calls) == 2
    assert flaky.calls[1][2] == rng.child("retry", 1)
    expected = train(net, data, rng.child("retry", 1))
    assert same_members([result.params], [expected.params])


def test_second_divergence_is_fatal(monkeypatch):
    net = small_cfg().net.resolved(100)
    monkeypatch.setattr(ensemble_training, "train", diverging(train, 2))
    with pytest.raises(TrainingDivergedError, match="ensemble member 3"):
        train_with_retry(net, linear_data(n=100), RngStream(3), member=3)


def test_diverged_retraining_retries_deterministically(monkeypatch):
    data = linear_data(n=100)
    clean = train_bootstrapped_ensemble(small_cfg(), data)
    real = ensemble_training.resume_train
    retried = []
    for _ in range(2):
        monkeypatch.setattr(ensemble_training, "resume_train", diverging(real, 1))
        retried.append(train_bootstrapped_ensemble(small_cfg(), data))
    assert same_members(retried[0].retrained, retried[1].retrained)
    assert same_members(retried[0].originals, clean.originals)
    # only member 0 diverged, so only its retrained network moved to the retry stream
    assert not same_members(retried[0].retrained[:1], clean.retrained[:1])
    assert same_members(retried[0].retrained[1:], clean.retrained[1:])


def test_failed_retraining_is_fatal(monkeypatch):
    real = ensemble_training.resume_train
    monkeypatch.setattr(ensemble_training, "resume_train", diverging(real, 2))
    with pytest.raises(TrainingDivergedError, match="retraining of member 0"):
        train_bootstrapped_ensemble(small_cfg(), linear_data(n=100))


def retraining_shift(noise_sd: float) -> float:
    rng = RngStream(21).generator
    X = rng.uniform(-1, 1, size=(400, 1))
    y = 2 * X[:, 0] + noise_sd * rng.standard_normal(400)
    net = MlpConfig(input_dim=1, hidden_sizes=(16, 16), epochs=60, learning_rate=0.01)
    bde = train_bootstrapped_ensemble(small_cfg(net=net), (X, y))
    means, _ = predict_members(bde.original_ensemble(), grid)
    retrained, _ = predict_members(bde.retrained_ensemble(), grid)
    return float(np.mean(np.abs(means - retrained)))


def test_near_noiseless_retraining_stays_close():
    quiet = retraining_shift(np.sqrt(1e-3))
    noisy = retraining_shift(0.5)
    # targets span roughly [-2, 2]
    assert quiet < 0.1
    assert quiet < noisy
