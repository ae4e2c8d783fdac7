import math

import numpy as np
import pytest

from empnav.nets import (
    AdamState,
    DiagGaussian,
    Mlp,
    adam_step,
    load_mlp,
    mlp_forward,
    mlp_gradients,
    save_mlp,
    tanh_log_prob_from_pre,
    tanh_sample,
)
from util import fd_gradient_check


def reference_forward(net, x):
    """Independent dot-product oracle for the MLP forward pass."""
    a = np.asarray(x, dtype=np.float64)
    last = len(net.weights) - 1
    for i, (W, b) in enumerate(zip(net.weights, net.biases)):
        z = np.array([sum(a[k] * W[k, j] for k in range(W.shape[0])) + b[j] for j in range(W.shape[1])])
        a = np.tanh(z) if i < last else z
    return a


def test_zero_weight_net_outputs_bias():
    net = Mlp([3, 2], seed=0)
    net.weights[0][:] = 0.0
    net.biases[0][:] = [1.5, -2.0]
    for x in (np.zeros(3), np.ones(3), np.array([3.0, -1.0, 0.5])):
        assert np.allclose(net.forward(x), [1.5, -2.0])


def test_identity_initialized_linear_net():
    net = Mlp([4, 4], seed=0)
    net.weights[0][:] = np.eye(4)
    net.biases[0][:] = 0.0
    x = np.array([0.3, -1.2, 5.0, 0.0])
    assert np.allclose(net.forward(x), x)


def test_forward_matches_reference_oracle():
    rng = np.random.default_rng(3)
    net = Mlp([2, 16, 2], seed=11)
    x = rng.normal(size=2)
    assert np.allclose(mlp_forward(net, x), reference_forward(net, x), atol=1e-12)


def test_forward_shape_mismatch_raises():
    net = Mlp([3, 4], seed=0)
    with pytest.raises(ValueError):
        net.forward(np.zeros(5))


def test_gradients_zero_upstream():
    net = Mlp([3, 8, 2], seed=1)
    grads, gin = mlp_gradients(net, np.ones(3), np.zeros(2))
    assert all(np.all(g == 0.0) for g in grads)
    assert np.all(gin == 0.0)


def test_gradients_match_finite_differences():
    rng = np.random.default_rng(5)
    net = Mlp([3, 8, 8, 2], seed=2)
    x = rng.normal(size=3)
    up = rng.normal(size=2)
    grads, _ = mlp_gradients(net, x, up)
    fd_gradient_check(lambda: float(net.forward(x) @ up), net.parameters(), grads, h=1e-5)


def test_gradients_linear_in_upstream():
    rng = np.random.default_rng(6)
    net = Mlp([3, 6, 2], seed=3)
    x = rng.normal(size=3)
    up = rng.normal(size=2)
    g1, gi1 = mlp_gradients(net, x, up)
    g2, gi2 = mlp_gradients(net, x, 2.0 * up)
    for a, b in zip(g1, g2):
        assert np.allclose(2.0 * a, b)
    assert np.allclose(2.0 * gi1, gi2)


def test_adam_zero_gradient_keeps_params():
    net = Mlp([2, 2], seed=4)
    before = [p.copy() for p in net.parameters()]
    state = AdamState(net.parameters(), lr=0.1)
    adam_step(net.parameters(), [np.zeros_like(p) for p in net.parameters()], state)
    for p, b in zip(net.parameters(), before):
        assert np.allclose(p, b)
    assert state.step_count == 1


def test_adam_constant_gradient_step_magnitude():
    # with constant gradient the bias-corrected update is lr * g/|g| exactly
    p = [np.array([0.0])]
    state = AdamState(p, lr=0.05)
    g = [np.array([0.73])]
    last = p[0][0]
    for _ in range(10):
        adam_step(p, g, state)
        step = abs(p[0][0] - last)
        last = p[0][0]
        assert abs(step - 0.05) / 0.05 < 0.01


def test_adam_minimizes_scalar_quadratic():
    p = [np.array([0.0])]
    state = AdamState(p, lr=0.1)
    for _ in range(500):
        adam_step(p, [2.0 * (p[0] - 3.0)], state)
    assert abs(p[0][0] - 3.0) < 1e-2


def test_adam_rejects_non_finite_gradient():
    p = [np.zeros(2)]
    state = AdamState(p)
    with pytest.raises(FloatingPointError):
        adam_step(p, [np.array([np.nan, 0.0])], state)


def test_gaussian_log_prob_standard_normal():
    d = DiagGaussian(np.zeros(1), np.zeros(1))
    assert abs(d.log_prob(np.zeros(1)) - (-0.5 * math.log(2 * math.pi))) < 1e-12


def test_gaussian_log_prob_additivity():
    d = DiagGaussian(np.zeros(2), np.zeros(2))
    assert abs(d.log_prob(np.zeros(2)) - 2 * (-0.5 * math.log(2 * math.pi))) < 1e-12


def test_gaussian_sample_moments():
    mean = np.array([0.7, -1.1])
    log_std = np.array([math.log(0.5), math.log(2.0)])
    d = DiagGaussian(mean, log_std)
    rng = np.random.default_rng(8)
    xs = d.sample(rng, size=100_000)
    se_mean = d.std / math.sqrt(len(xs))
    assert np.all(np.abs(xs.mean(axis=0) - mean) < 3 * se_mean)
    se_std = d.std / math.sqrt(2 * len(xs))
    assert np.all(np.abs(xs.std(axis=0) - d.std) < 3 * se_std)


def test_gaussian_sampling_deterministic_by_seed():
    d = DiagGaussian(np.zeros(3), np.zeros(3))
    a = d.sample(np.random.default_rng(42), size=5)
    b = d.sample(np.random.default_rng(42), size=5)
    assert np.array_equal(a, b)


def test_log_std_clamp():
    d = DiagGaussian(np.zeros(1), np.array([99.0]))
    assert d.log_std[0] == 2.0
    d = DiagGaussian(np.zeros(1), np.array([-99.0]))
    assert d.log_std[0] == -20.0


def test_tanh_log_prob_integrates_to_one():
    # Monte-Carlo integral of the squashed density over [-1, 1]
    mean = np.array([0.3])
    log_std = np.array([math.log(0.8)])
    rng = np.random.default_rng(9)
    a = rng.uniform(-1.0, 1.0, size=(200_000, 1))
    u = np.arctanh(np.clip(a, -1 + 1e-12, 1 - 1e-12))
    dens = np.exp(tanh_log_prob_from_pre(mean, log_std, u))
    integral = 2.0 * dens.mean()
    assert abs(integral - 1.0) < 0.01


def test_tanh_sample_in_box():
    a, u = tanh_sample(np.zeros(2), np.full(2, 2.0), np.random.default_rng(1), size=1000)
    assert np.all(np.abs(a) <= 1.0)
    assert np.allclose(np.tanh(u), a)


def test_init_determinism():
    n1 = Mlp([4, 8, 2], seed=123)
    n2 = Mlp([4, 8, 2], seed=123)
    for a, b in zip(n1.parameters(), n2.parameters()):
        assert np.array_equal(a, b)
    n3 = Mlp([4, 8, 2], seed=124)
    assert any(not np.array_equal(a, b) for a, b in zip(n1.parameters(), n3.parameters()))


def test_checkpoint_roundtrip(tmp_path):
    net = Mlp([5, 7, 3], seed=77)
    path = tmp_path / "net.mlp"
    save_mlp(path, net)
    loaded = load_mlp(path)
    assert loaded.sizes == net.sizes
    assert loaded.activation == net.activation
    x = np.random.default_rng(0).normal(size=5)
    assert np.array_equal(loaded.forward(x), net.forward(x))


def test_checkpoint_rejects_garbage(tmp_path):
    path = tmp_path / "bad.mlp"
    path.write_bytes(b"not a checkpoint")
    with pytest.raises(ValueError):
        load_mlp(path)
