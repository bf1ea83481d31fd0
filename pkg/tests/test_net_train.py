import numpy as np
import pytest

from salientrank.core import AgreementMap, build_nested_stack, normalize_saliency
from salientrank.errors import TrainingDivergedError, ValidationError
from salientrank.net import NetConfig, TrainConfig, TrainSample, train
from salientrank.net.gradcheck import check_model_gradients
from salientrank.net.train import Adam, Sgd, build_targets


def tiny_dataset(seed=0, n=2, size=16):
    rng = np.random.Generator(np.random.PCG64(seed))
    samples = []
    for _ in range(n):
        a = AgreementMap(rng.integers(0, 13, size=(size, size)), 12)
        samples.append(
            TrainSample(
                image=rng.uniform(0, 1, size=(3, size, size)),
                stack=build_nested_stack(a),
                saliency=normalize_saliency(a),
            )
        )
    return samples


def test_zero_learning_rate_keeps_loss_constant():
    data = tiny_dataset()
    for optimizer in ("sgd", "adam"):
        cfg = TrainConfig(epochs=4, learning_rate=0.0, optimizer=optimizer, seed=1)
        result = train(data, cfg)
        assert len(set(result.trajectory)) == 1


def test_training_reduces_loss():
    data = tiny_dataset()
    result = train(data, TrainConfig(epochs=30, seed=2))
    assert result.trajectory[-1] < 0.6 * result.trajectory[0]


def test_training_is_deterministic():
    data = tiny_dataset()
    cfg = TrainConfig(epochs=5, seed=3)
    a = train(data, cfg)
    b = train(data, cfg)
    assert a.trajectory == b.trajectory
    for name in a.params.tensors:
        assert np.array_equal(a.params.tensors[name], b.params.tensors[name])


def test_divergence_detected():
    data = tiny_dataset()
    cfg = TrainConfig(epochs=60, optimizer="sgd", learning_rate=1e14, seed=4)
    with np.errstate(over="ignore", invalid="ignore"), pytest.raises(TrainingDivergedError):
        train(data, cfg)


def test_gt_scale_blows_up_initial_loss_quadratically():
    data = tiny_dataset()
    base = train(data, TrainConfig(epochs=1, seed=5, gt_scale=1.0))
    scaled = train(data, TrainConfig(epochs=1, seed=5, gt_scale=1000.0))
    ratio = scaled.trajectory[0] / base.trajectory[0]
    assert 1e5 < ratio < 1e7  # ~c^2, exact only for identically-zero predictions


def test_empty_dataset_rejected():
    with pytest.raises(ValidationError):
        train([], TrainConfig())


def test_config_validation():
    with pytest.raises(ValidationError):
        TrainConfig(optimizer="rmsprop")
    with pytest.raises(ValidationError):
        TrainConfig(gt_scale=0.0)
    with pytest.raises(ValidationError):
        TrainConfig(stage_weights=(1.0, 0.0, 1.0))


def test_build_targets_shapes_and_scaling():
    rng = np.random.Generator(np.random.PCG64(6))
    a = AgreementMap(rng.integers(0, 13, size=(32, 32)), 12)
    net = NetConfig(stages=4)
    targets = build_targets(build_nested_stack(a), normalize_saliency(a), net, gt_scale=2.0)
    assert [t.shape for t in targets.stacks] == [(12, 4, 4), (12, 8, 8), (12, 16, 16)]
    assert [m.shape for m in targets.maps] == [(1, 4, 4), (1, 8, 8), (1, 16, 16)]
    assert targets.fused_map.shape == (1, 16, 16)
    assert float(targets.maps[0].max()) <= 2.0
    assert float(targets.maps[0].max()) > 1.0  # scaling applied


def test_optimizer_steps():
    tensors = {"w": np.array([1.0, 2.0])}
    Sgd(0.5).step(tensors, {"w": np.array([1.0, -2.0])})
    assert np.allclose(tensors["w"], [0.5, 3.0])

    tensors = {"w": np.array([1.0])}
    adam = Adam(0.1)
    adam.step(tensors, {"w": np.array([1.0])})
    # first Adam step moves by ~lr regardless of gradient scale
    assert tensors["w"][0] == pytest.approx(0.9, abs=1e-6)


def test_quick_gradient_suite_without_atrous():
    entries = check_model_gradients(NetConfig(), seed=3, coords=2)
    assert max(e.max_rel_error for e in entries) < 1e-4
