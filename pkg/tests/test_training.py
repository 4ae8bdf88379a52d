import numpy as np
import pytest
from bootens.core import RngStream
from bootens.errors import DatasetError, InvariantViolation, TrainingDivergedError
from bootens.network import (
    MlpConfig,
    fit_standardizer,
    forward_batch,
    load_checkpoint,
    load_params,
    resume_train,
    save_checkpoint,
    save_params,
    train,
)


def toy_data(n=60, seed=0):
    rng = RngStream(seed).generator
    X = rng.uniform(-1, 1, size=(n, 2))
    y = np.sin(2 * X[:, 0]) + 0.5 * X[:, 1] + 0.1 * rng.standard_normal(n)
    return X, y


def toy_net(**kwargs) -> MlpConfig:
    settings = dict(input_dim=2, hidden_sizes=(8, 8), epochs=12, batch_size=16)
    settings.update(kwargs)
    return MlpConfig(**settings)


def same_params(a, b) -> bool:
    return all(np.array_equal(x, y) for x, y in zip(a.arrays(), b.arrays()))


def test_training_is_deterministic():
    data = toy_data()
    a = train(toy_net(), data, RngStream(1, 2))
    b = train(toy_net(), data, RngStream(1, 2))
    assert same_params(a.params, b.params)
    assert a.losses == b.losses


def test_training_reduces_loss():
    result = train(toy_net(epochs=40), toy_data(), RngStream(3))
    assert len(result.losses) == 40
    assert result.losses[-1] < result.losses[0]


@pytest.mark.parametrize("checkpoint_epoch", [0, 5, 11])
def test_resume_reproduces_uninterrupted_training(checkpoint_epoch):
    data = toy_data()
    full = train(toy_net(), data, RngStream(7))
    partial = train(toy_net(), data, RngStream(7), checkpoint_epoch)
    assert partial.checkpoint.epoch_index == checkpoint_epoch
    resumed = resume_train(toy_net(), partial.checkpoint, data)
    assert same_params(resumed.params, full.params)
    assert resumed.losses == full.losses[checkpoint_epoch:]


def test_resume_leaves_checkpoint_untouched():
    data = toy_data()
    partial = train(toy_net(), data, RngStream(7), 6)
    before = partial.checkpoint.copy()
    resume_train(toy_net(), partial.checkpoint, data)
    assert same_params(before.params, partial.checkpoint.params)
    assert before.data_order_stream == partial.checkpoint.data_order_stream


def test_fresh_order_differs():
    data = toy_data()
    partial = train(toy_net(), data, RngStream(7), 6)
    replay = resume_train(toy_net(), partial.checkpoint, data, reuse_order=True)
    fresh = resume_train(toy_net(), partial.checkpoint, data, reuse_order=False)
    assert not same_params(replay.params, fresh.params)


@pytest.mark.parametrize("checkpoint_epoch", [-1, 12, 20])
def test_checkpoint_epoch_out_of_range(checkpoint_epoch):
    with pytest.raises(ValueError):
        train(toy_net(), toy_data(), RngStream(0), checkpoint_epoch)


def test_resume_rejects_other_architecture():
    data = toy_data()
    partial = train(toy_net(), data, RngStream(0), 4)
    with pytest.raises(ValueError):
        resume_train(toy_net(hidden_sizes=(4,)), partial.checkpoint, data)


def test_mismatched_rows():
    X, y = toy_data()
    with pytest.raises(ValueError):
        train(toy_net(), (X, y[:-1]), RngStream(0))


def test_divergence_is_reported():
    X, y = toy_data()
    with pytest.raises(TrainingDivergedError) as e:
        train(toy_net(learning_rate=1e300), (X, y * 1e300), RngStream(0))
    assert e.value.epoch >= 1


def test_params_file(tmp_path):
    net = toy_net().resolved(60)
    params = train(net, toy_data(), RngStream(0)).params
    save_params(tmp_path / "p.npz", params, net)
    assert same_params(load_params(tmp_path / "p.npz", net), params)
    with pytest.raises(InvariantViolation):
        load_checkpoint(tmp_path / "p.npz")
    with pytest.raises(InvariantViolation):
        load_params(tmp_path / "p.npz", toy_net(epochs=13).resolved(60))


def test_checkpoint_file_resumes_exactly(tmp_path):
    data = toy_data()
    net = toy_net().resolved(60)
    partial = train(net, data, RngStream(5), 7)
    save_checkpoint(tmp_path / "c.npz", partial.checkpoint, net)
    restored = load_checkpoint(tmp_path / "c.npz", net)
    assert restored.epoch_index == 7
    assert restored.adam.step == partial.checkpoint.adam.step
    a = resume_train(net, partial.checkpoint, data)
    b = resume_train(net, restored, data)
    assert same_params(a.params, b.params)


def test_checkpoint_is_not_params(tmp_path):
    net = toy_net().resolved(60)
    partial = train(net, toy_data(), RngStream(5), 3)
    save_checkpoint(tmp_path / "c.npz", partial.checkpoint, net)
    with pytest.raises(InvariantViolation):
        load_params(tmp_path / "c.npz")


def test_standardizer():
    X, y = toy_data()
    s = fit_standardizer(X, y)
    Xs, ys = s.apply(X, y)
    assert np.allclose(Xs.mean(axis=0), 0) and np.allclose(Xs.std(axis=0), 1)
    assert ys.mean() == pytest.approx(0, abs=1e-12) and ys.std() == pytest.approx(1)
    assert np.allclose(s.invert_mean(ys), y)
    assert np.allclose(s.invert_variance(np.ones(3)), y.std() ** 2)
    again = type(s).from_dict(s.to_dict())
    assert np.array_equal(again.apply_x(X), Xs)


@pytest.mark.parametrize(
    "X, y",
    [
        (np.array([[1.0, 0.0], [1.0, 1.0]]), np.array([0.0, 1.0])),
        (np.array([[0.0], [1.0]]), np.array([2.0, 2.0])),
        (np.array([[0.0]]), np.array([1.0])),
    ],
)
def test_standardizer_rejects_degenerate_data(X, y):
    with pytest.raises(DatasetError):
        fit_standardizer(X, y)


def test_prediction_is_finite():
    net = toy_net()
    X, y = toy_data()
    params = train(net, (X, y), RngStream(0)).params
    mean, variance = forward_batch(params, net, X)
    assert np.all(np.isfinite(mean)) and np.all(variance > 0)
