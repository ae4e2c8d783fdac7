"""Minimal dense-network substrate: MLPs with manual backprop, Adam, Gaussian heads.

Everything is float64 numpy. Networks are value-semantic containers of weight
matrices; forward/backward are explicit so the rest of the package can assemble
exact gradients for its losses without a general autodiff graph.

Checkpoint layout (stable across versions, see save_mlp/load_mlp):
    magic bytes b"EMPNAV-MLP-1\\n"
    uint32 little-endian: number of layer sizes, then each layer size
    uint32: activation code (0 identity, 1 tanh, 2 relu)
    per layer, in order: weight matrix row-major float64 (fan_in x fan_out),
    then bias vector float64 (fan_out)
"""

from __future__ import annotations

import struct

import numpy as np

LOG_STD_MIN = -20.0
LOG_STD_MAX = 2.0

_MAGIC = b"EMPNAV-MLP-1\n"
_ACT_CODES = {"identity": 0, "tanh": 1, "relu": 2}
_ACT_NAMES = {v: k for k, v in _ACT_CODES.items()}


def _act(z, kind):
    if kind == "tanh":
        return np.tanh(z)
    if kind == "relu":
        return np.maximum(z, 0.0)
    return z


def _act_grad_from_out(a, kind):
    # gradient of the activation expressed through its own output
    if kind == "tanh":
        return 1.0 - a * a
    if kind == "relu":
        return (a > 0.0).astype(np.float64)
    return np.ones_like(a)


class Mlp:
    """Dense feedforward net: affine layers with a fixed hidden activation.

    sizes = [n_in, h1, ..., n_out]; hidden layers use `activation`, the output
    layer is identity. Weights are fan-in-scaled uniform, biases zero.
    """

    def __init__(self, sizes, activation="tanh", seed=0):
        if len(sizes) < 2:
            raise ValueError("Mlp needs at least input and output sizes")
        if activation not in _ACT_CODES:
            raise ValueError(f"unknown activation {activation!r}")
        self.sizes = list(int(s) for s in sizes)
        self.activation = activation
        rng = np.random.default_rng(seed)
        self.weights = []
        self.biases = []
        for fan_in, fan_out in zip(self.sizes[:-1], self.sizes[1:]):
            bound = 1.0 / np.sqrt(fan_in)
            self.weights.append(rng.uniform(-bound, bound, size=(fan_in, fan_out)))
            self.biases.append(np.zeros(fan_out))

    @property
    def n_in(self):
        return self.sizes[0]

    @property
    def n_out(self):
        return self.sizes[-1]

    def parameters(self):
        """Flat list of parameter arrays, weights and biases interleaved."""
        out = []
        for W, b in zip(self.weights, self.biases):
            out.append(W)
            out.append(b)
        return out

    def copy(self):
        other = Mlp.__new__(Mlp)
        other.sizes = list(self.sizes)
        other.activation = self.activation
        other.weights = [W.copy() for W in self.weights]
        other.biases = [b.copy() for b in self.biases]
        return other

    def forward(self, x):
        y, _ = self.forward_cache(x)
        return y

    def forward_cache(self, x):
        """Forward pass returning (output, cache) for a later backward()."""
        x = np.asarray(x, dtype=np.float64)
        squeeze = x.ndim == 1
        a = x[None, :] if squeeze else x
        if a.shape[1] != self.sizes[0]:
            raise ValueError(f"input width {a.shape[1]} != layer size {self.sizes[0]}")
        cache = []
        last = len(self.weights) - 1
        for i, (W, b) in enumerate(zip(self.weights, self.biases)):
            z = a @ W + b
            out = _act(z, self.activation) if i < last else z
            # post-activation is cached so backward never recomputes tanh
            cache.append((a, out if i < last else None))
            a = out
        return (a[0] if squeeze else a), (cache, squeeze)

    def backward(self, cache, grad_out):
        """Backprop an upstream dLoss/dOutput through the cached forward pass.

        Returns (param_grads, grad_input); param_grads matches parameters()
        ordering and is summed over the batch.
        """
        cache, squeeze = cache
        g = np.asarray(grad_out, dtype=np.float64)
        if squeeze:
            g = g[None, :]
        dWs = [None] * len(self.weights)
        dbs = [None] * len(self.biases)
        last = len(self.weights) - 1
        for i in range(last, -1, -1):
            a_prev, a_out = cache[i]
            if i < last:
                g = g * _act_grad_from_out(a_out, self.activation)
            dWs[i] = a_prev.T @ g
            dbs[i] = g.sum(axis=0)
            g = g @ self.weights[i].T
        grads = []
        for dW, db in zip(dWs, dbs):
            grads.append(dW)
            grads.append(db)
        return grads, (g[0] if squeeze else g)


def mlp_forward(net, x):
    """Functional forward; validates shape, deterministic."""
    return net.forward(x)


def mlp_gradients(net, x, upstream):
    """Exact reverse-mode derivatives of forward composed with `upstream`.

    upstream is dLoss/dOutput for each output component (same shape as the
    forward output). Returns (param_grads, input_grad).
    """
    y, cache = net.forward_cache(x)
    up = np.asarray(upstream, dtype=np.float64)
    if up.shape != np.shape(y):
        raise ValueError(f"upstream shape {up.shape} != output shape {np.shape(y)}")
    return net.backward(cache, up)


class AdamState:
    """Per-parameter-list Adam accumulators with bias correction."""

    def __init__(self, params, lr=3e-4, beta1=0.9, beta2=0.999, eps=1e-8):
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.step_count = 0
        self.m = [np.zeros_like(p) for p in params]
        self.v = [np.zeros_like(p) for p in params]


def adam_step(params, grads, state):
    """One bias-corrected Adam update, applied in place to `params`."""
    if len(params) != len(grads) or len(params) != len(state.m):
        raise ValueError("params/grads/state length mismatch")
    for g in grads:
        if not np.all(np.isfinite(g)):
            raise FloatingPointError("non-finite gradient passed to adam_step")
    state.step_count += 1
    t = state.step_count
    b1, b2 = state.beta1, state.beta2
    c1 = 1.0 - b1 ** t
    c2 = 1.0 - b2 ** t
    for p, g, m, v in zip(params, grads, state.m, state.v):
        m *= b1
        m += (1.0 - b1) * g
        v *= b2
        v += (1.0 - b2) * (g * g)
        p -= state.lr * (m / c1) / (np.sqrt(v / c2) + state.eps)
    return params, state


class DiagGaussian:
    """Diagonal Gaussian over vectors; log_std clamped to [-20, 2]."""

    def __init__(self, mean, log_std):
        self.mean = np.asarray(mean, dtype=np.float64)
        self.log_std = np.clip(np.asarray(log_std, dtype=np.float64), LOG_STD_MIN, LOG_STD_MAX)

    @property
    def std(self):
        return np.exp(self.log_std)

    def log_prob(self, x):
        """Exact log-density, summed over the last axis."""
        x = np.asarray(x, dtype=np.float64)
        z = (x - self.mean) / self.std
        per_dim = -0.5 * z * z - self.log_std - 0.5 * np.log(2.0 * np.pi)
        return per_dim.sum(axis=-1)

    def sample(self, rng, size=None):
        """Reparameterized draw: mean + std * eps with eps ~ N(0, I)."""
        shape = self.mean.shape if size is None else (size,) + self.mean.shape
        eps = rng.standard_normal(shape)
        return self.mean + self.std * eps

    def entropy(self):
        """Differential entropy, summed over the last axis."""
        per_dim = self.log_std + 0.5 * (1.0 + np.log(2.0 * np.pi))
        return per_dim.sum(axis=-1)


def softplus(x):
    return np.logaddexp(0.0, x)


def tanh_log_prob_from_pre(mean, log_std, u):
    """log-density of a = tanh(u) under tanh(DiagGaussian(mean, log_std)).

    u is the pre-squash value (needed for an exact change of variables);
    log(1 - tanh(u)^2) is evaluated in the stable 2*(log2 - u - softplus(-2u))
    form. Summed over the last axis.
    """
    log_std = np.clip(log_std, LOG_STD_MIN, LOG_STD_MAX)
    z = (u - mean) / np.exp(log_std)
    base = -0.5 * z * z - log_std - 0.5 * np.log(2.0 * np.pi)
    corr = 2.0 * (np.log(2.0) - u - softplus(-2.0 * u))
    return (base - corr).sum(axis=-1)


def tanh_sample(mean, log_std, rng, size=None):
    """Squashed reparameterized sample; returns (action, pre_squash)."""
    dist = DiagGaussian(mean, log_std)
    u = dist.sample(rng, size=size)
    return np.tanh(u), u


def save_mlp(path, net):
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<I", len(net.sizes)))
        for s in net.sizes:
            fh.write(struct.pack("<I", s))
        fh.write(struct.pack("<I", _ACT_CODES[net.activation]))
        for W, b in zip(net.weights, net.biases):
            fh.write(np.ascontiguousarray(W, dtype=np.float64).tobytes())
            fh.write(np.ascontiguousarray(b, dtype=np.float64).tobytes())


def load_mlp(path):
    with open(path, "rb") as fh:
        magic = fh.read(len(_MAGIC))
        if magic != _MAGIC:
            raise ValueError(f"{path}: not an empnav MLP checkpoint")
        (n_sizes,) = struct.unpack("<I", fh.read(4))
        sizes = [struct.unpack("<I", fh.read(4))[0] for _ in range(n_sizes)]
        (act_code,) = struct.unpack("<I", fh.read(4))
        net = Mlp.__new__(Mlp)
        net.sizes = sizes
        net.activation = _ACT_NAMES[act_code]
        net.weights = []
        net.biases = []
        for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
            W = np.frombuffer(fh.read(8 * fan_in * fan_out), dtype=np.float64).reshape(fan_in, fan_out)
            b = np.frombuffer(fh.read(8 * fan_out), dtype=np.float64)
            net.weights.append(W.copy())
            net.biases.append(b.copy())
    return net
