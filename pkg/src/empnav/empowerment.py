"""Variational estimate of how much a human's action steers its next map state.

Three networks trained on (z, a, z') triples harvested from episode traces:

  source   omega(a | z)      Gaussian over actions, fit by NLL on observed actions
  transition T(z, a) -> z'   point estimate of the next map, fit by MSE
  planning q(a | z~')        Gaussian over actions given a predicted next map

The per-state estimate draws a ~ omega(.|z), pushes each sample through the
transition net, and averages log q(a | z~') - log omega(a | z).

The transition net stays a point estimator, but it carries a per-dimension
residual std calibrated from its own training MSE (EMA). Planning-loss pairs
and the estimator both add seeded residual noise to T's output: without it the
learned channel a -> T(z, a) is deterministic, the planning net can sharpen
without bound wherever that map is invertible, and on the synthetic
linear-Gaussian calibration channel the estimate overshoots the analytic
mutual information by a wide margin. With the calibrated noise the fitted
joint matches the data joint and the estimate lands on the analytic value.

Estimates can be negative: this is a sampled variational bound, not a clipped
quantity. With shared, input-independent source/planning heads the two
log-densities cancel termwise and the estimate is exactly zero.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field

import numpy as np

from .nets import AdamState, Mlp, adam_step, load_mlp, save_mlp
from .occupancy import GridSpec, assemble_state

LOG_STD_MIN = -20.0
LOG_STD_MAX = 2.0


@dataclass
class EstimatorConfig:
    action_dim: int = 2
    hidden: tuple = (64, 64)
    lr: float = 3e-4
    batch_size: int = 256
    train_steps: int = 6000
    lambda_entropy: float = 0.01
    n_samples: int = 32
    residual_ema: float = 0.02
    residual_floor: float = 1e-3
    convergence_tol: float = 0.0  # 0 disables early stopping
    convergence_window: int = 200
    condition_on_current: bool = False  # q(a | z, z~') variant


@dataclass
class EmpowermentNets:
    """Source/transition/planning triplet plus the residual-noise calibration.

    residual_net predicts per-dimension log-variance of the transition's
    prediction error as a function of (z, a); crowded states are genuinely
    harder to predict, and a single global scale would understate their noise
    and inflate their estimates. residual_std is a global fallback (and the
    scale used when residual_net is None, as in hand-built test nets).
    """

    source: Mlp
    transition: Mlp
    planning: Mlp
    residual_std: np.ndarray
    action_dim: int = 2
    condition_on_current: bool = False
    residual_net: Mlp = None
    residual_floor: float = 1e-3

    def residual_scale(self, x):
        """Per-sample residual std for transition inputs x = [z, a]."""
        if self.residual_net is None:
            return self.residual_std
        log_var = np.clip(self.residual_net.forward(x), _LOG_VAR_MIN, _LOG_VAR_MAX)
        return np.maximum(self.residual_floor, np.exp(0.5 * log_var))


_LOG_VAR_MIN = 2.0 * math.log(1e-3)
_LOG_VAR_MAX = 2.0 * math.log(10.0)


def _seed_tuple(seed):
    return seed if isinstance(seed, tuple) else (seed,)


def build_estimator(state_dim, cfg=None, seed=0):
    cfg = cfg if cfg is not None else EstimatorConfig()
    d = cfg.action_dim
    q_in = 2 * state_dim if cfg.condition_on_current else state_dim
    base = _seed_tuple(seed)
    return EmpowermentNets(
        source=Mlp([state_dim, *cfg.hidden, 2 * d], seed=(*base, 0)),
        transition=Mlp([state_dim + d, *cfg.hidden, state_dim], seed=(*base, 1)),
        planning=Mlp([q_in, *cfg.hidden, 2 * d], seed=(*base, 2)),
        residual_std=np.ones(state_dim),
        action_dim=d,
        condition_on_current=cfg.condition_on_current,
        residual_net=Mlp([state_dim + d, *cfg.hidden, state_dim], seed=(*base, 3)),
        residual_floor=cfg.residual_floor,
    )


def _heads(net, x, d):
    y, cache = net.forward_cache(x)
    mean = y[..., :d]
    raw = y[..., d:]
    log_std = np.clip(raw, LOG_STD_MIN, LOG_STD_MAX)
    mask = ((raw > LOG_STD_MIN) & (raw < LOG_STD_MAX)).astype(np.float64)
    return mean, log_std, mask, cache


def _gauss_logp(mean, log_std, x):
    z = (x - mean) / np.exp(log_std)
    return (-0.5 * z * z - log_std - 0.5 * np.log(2.0 * np.pi)).sum(axis=-1)


def source_loss(z, a, nets):
    """Negative log-likelihood of observed actions under the source policy."""
    B = z.shape[0]
    mean, log_std, mask, cache = _heads(nets.source, z, nets.action_dim)
    zs = (a - mean) / np.exp(log_std)
    loss = float(-np.mean(_gauss_logp(mean, log_std, a)))
    g_mean = -zs / np.exp(log_std) / B
    g_ls = (1.0 - zs * zs) / B * mask
    grads, _ = nets.source.backward(cache, np.concatenate([g_mean, g_ls], axis=1))
    return loss, grads


def transition_loss(z, a, z_next, nets):
    """Mean squared error of the next-state point prediction.

    Also returns the per-dimension batch residual variance used to calibrate
    residual_std.
    """
    B = z.shape[0]
    x = np.concatenate([z, a], axis=1)
    pred, cache = nets.transition.forward_cache(x)
    diff = pred - z_next
    loss = float(np.mean(np.sum(diff * diff, axis=1)))
    grads, _ = nets.transition.backward(cache, 2.0 * diff / B)
    residual_var = np.mean(diff * diff, axis=0)
    return loss, grads, residual_var


def _predicted_next(nets, z, a, rng):
    x = np.concatenate([z, a], axis=1)
    pred = nets.transition.forward(x)
    noise = rng.standard_normal(pred.shape)
    return pred + nets.residual_scale(x) * noise


def residual_variance_loss(z, a, z_next, nets):
    """Gaussian log-variance calibration of the transition's residuals.

    The transition's point prediction is frozen; the residual net fits
    E[diff^2 | z, a] through the NLL 0.5 * (log var + diff^2 / var).
    """
    B = z.shape[0]
    x = np.concatenate([z, a], axis=1)
    diff = nets.transition.forward(x) - z_next
    lv_raw, cache = nets.residual_net.forward_cache(x)
    lv = np.clip(lv_raw, _LOG_VAR_MIN, _LOG_VAR_MAX)
    mask = ((lv_raw > _LOG_VAR_MIN) & (lv_raw < _LOG_VAR_MAX)).astype(np.float64)
    sq = diff * diff
    loss = float(np.mean(np.sum(0.5 * (lv + sq * np.exp(-lv)), axis=1)))
    g_lv = 0.5 * (1.0 - sq * np.exp(-lv)) / B * mask
    grads, _ = nets.residual_net.backward(cache, g_lv)
    return loss, grads


def _planning_input(nets, z, z_pred):
    if nets.condition_on_current:
        return np.concatenate([z, z_pred], axis=1)
    return z_pred


def planning_loss(z, nets, rng, lam):
    """-E[log q(a | z~')] - lam * E[H(q)] on source-sampled actions.

    Gradient flows to the planning parameters only; the source samples and the
    transition prediction are treated as constants (Algorithm-style update).
    The entropy term rewards spread, keeping q from collapsing.
    """
    if lam < 0.0:
        raise ValueError("entropy coefficient must be >= 0")
    B = z.shape[0]
    d = nets.action_dim
    s_mean, s_ls, _, _ = _heads(nets.source, z, d)
    a = s_mean + np.exp(s_ls) * rng.standard_normal(s_mean.shape)
    z_pred = _predicted_next(nets, z, a, rng)
    q_in = _planning_input(nets, z, z_pred)
    mean, log_std, mask, cache = _heads(nets.planning, q_in, d)
    zs = (a - mean) / np.exp(log_std)
    nll = float(-np.mean(_gauss_logp(mean, log_std, a)))
    entropy = float(np.mean((log_std + 0.5 * (1.0 + np.log(2.0 * np.pi))).sum(axis=-1)))
    loss = nll - lam * entropy
    g_mean = -zs / np.exp(log_std) / B
    g_ls = ((1.0 - zs * zs) / B - lam / B) * mask
    grads, _ = nets.planning.backward(cache, np.concatenate([g_mean, g_ls], axis=1))
    return loss, grads


def estimate_empowerment(z, nets, n_samples=32, seed=0):
    """Sampled variational bound at one state; deterministic given the seed."""
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    rng = np.random.default_rng(seed)
    return float(_estimate_block(np.asarray(z, dtype=np.float64)[None, :], nets, n_samples, rng)[0])


def _estimate_block(Z, nets, n_samples, rng):
    """Vectorized estimates for a block of states (n_states,)."""
    n, sd = Z.shape
    d = nets.action_dim
    s_mean, s_ls, _, _ = _heads(nets.source, Z, d)
    eps = rng.standard_normal((n, n_samples, d))
    a = s_mean[:, None, :] + np.exp(s_ls)[:, None, :] * eps
    log_w = _gauss_logp(s_mean[:, None, :], s_ls[:, None, :], a)

    z_rep = np.repeat(Z, n_samples, axis=0)
    a_flat = a.reshape(n * n_samples, d)
    x = np.concatenate([z_rep, a_flat], axis=1)
    pred = nets.transition.forward(x)
    pred = pred + nets.residual_scale(x) * rng.standard_normal(pred.shape)
    q_in = _planning_input(nets, z_rep, pred)
    q_mean, q_ls, _, _ = _heads(nets.planning, q_in, d)
    log_q = _gauss_logp(q_mean, q_ls, a_flat).reshape(n, n_samples)
    return np.mean(log_q - log_w, axis=1)


@dataclass
class TrainCurves:
    source: list = field(default_factory=list)
    transition: list = field(default_factory=list)
    planning: list = field(default_factory=list)
    total: list = field(default_factory=list)


def train_estimator(Z, A, Z_next, cfg=None, seed=0, state_dim=None):
    """Fit the three networks on a triple dataset; returns (nets, curves)."""
    cfg = cfg if cfg is not None else EstimatorConfig()
    Z = np.asarray(Z, dtype=np.float64)
    A = np.asarray(A, dtype=np.float64)
    Z_next = np.asarray(Z_next, dtype=np.float64)
    if not (len(Z) == len(A) == len(Z_next)) or len(Z) == 0:
        raise ValueError("dataset arrays must be non-empty and same length")
    nets = build_estimator(Z.shape[1] if state_dim is None else state_dim, cfg, seed=seed)
    rng = np.random.default_rng((*_seed_tuple(seed), 0xE5))
    opt_s = AdamState(nets.source.parameters(), lr=cfg.lr)
    opt_t = AdamState(nets.transition.parameters(), lr=cfg.lr)
    opt_q = AdamState(nets.planning.parameters(), lr=cfg.lr)
    opt_r = AdamState(nets.residual_net.parameters(), lr=cfg.lr)
    curves = TrainCurves()
    n = len(Z)
    for step in range(cfg.train_steps):
        idx = rng.integers(0, n, size=min(cfg.batch_size, n))
        zb, ab, znb = Z[idx], A[idx], Z_next[idx]
        ls, gs = source_loss(zb, ab, nets)
        lt, gt, residual_var = transition_loss(zb, ab, znb, nets)
        lr_, gr = residual_variance_loss(zb, ab, znb, nets)
        lq, gq = planning_loss(zb, nets, rng, cfg.lambda_entropy)
        total = ls + lt + lq
        if not np.isfinite(total + lr_):
            raise RuntimeError(f"estimator training diverged at step {step}")
        adam_step(nets.source.parameters(), gs, opt_s)
        adam_step(nets.transition.parameters(), gt, opt_t)
        adam_step(nets.residual_net.parameters(), gr, opt_r)
        adam_step(nets.planning.parameters(), gq, opt_q)
        nets.residual_std = np.maximum(
            cfg.residual_floor,
            np.sqrt(
                (1.0 - cfg.residual_ema) * nets.residual_std**2
                + cfg.residual_ema * residual_var
            ),
        )
        curves.source.append(ls)
        curves.transition.append(lt)
        curves.planning.append(lq)
        curves.total.append(total)
        if cfg.convergence_tol > 0.0 and step >= 2 * cfg.convergence_window:
            w = cfg.convergence_window
            recent = np.mean(curves.total[-w:])
            before = np.mean(curves.total[-2 * w : -w])
            if abs(before - recent) < cfg.convergence_tol:
                break
    return nets, curves


def dataset_from_traces(traces, spec=None, k=1, include_parked=False):
    """(z, a, z') triples for every human and active timestep of each trace.

    An active timestep is one before the human first reaches its goal;
    include_parked=True keeps post-arrival steps (zero actions) as well.
    """
    spec = spec if spec is not None else GridSpec()
    Z, A, Z_next = [], [], []
    for trace in traces:
        arrivals = trace.human_arrival_steps()
        n_steps = trace.n_steps
        for t in range(n_steps):
            world = trace.snapshots[t]
            world_next = trace.snapshots[t + 1]
            for h in range(len(world.humans)):
                arrived = arrivals[h] is not None and t >= arrivals[h]
                if arrived and not include_parked:
                    continue
                Z.append(assemble_state(h, world, spec, k=k))
                act = trace.actions[t][h + 1]
                A.append([act.v_x, act.v_y])
                Z_next.append(assemble_state(h, world_next, spec, k=k))
    if not Z:
        raise ValueError("traces produced an empty dataset")
    return np.array(Z), np.array(A), np.array(Z_next)


@dataclass
class EmpowermentRecord:
    """Per-human empowerment series plus the trial-level Mean Empowerment."""

    per_human: list  # list of (timesteps array, estimates array)
    per_human_mean: np.ndarray
    mean_empowerment: float


def mean_empowerment(trace, nets, spec=None, n_samples=32, seed=0, k=1, include_parked=False):
    """Average per-human, per-active-step estimates into one trial scalar.

    Active steps run from the start until the human first reaches its goal
    (inclusive); collision-shortened episodes contribute whatever steps exist.
    """
    if not trace.snapshots:
        raise ValueError("empty trace")
    spec = spec if spec is not None else GridSpec()
    n_humans = len(trace.snapshots[0].humans)
    if n_humans == 0:
        raise ValueError("trace has no humans to evaluate")
    arrivals = trace.human_arrival_steps()
    last = len(trace.snapshots) - 1
    rng = np.random.default_rng(seed)
    per_human = []
    means = []
    for h in range(n_humans):
        stop = arrivals[h] if arrivals[h] is not None else last
        stop = min(stop, last) if not include_parked else last
        ts = np.arange(0, stop + 1)
        states = np.array([assemble_state(h, trace.snapshots[t], spec, k=k) for t in ts])
        est = _estimate_block(states, nets, n_samples, rng)
        per_human.append((ts, est))
        means.append(float(np.mean(est)))
    return EmpowermentRecord(
        per_human=per_human,
        per_human_mean=np.array(means),
        mean_empowerment=float(np.mean(means)),
    )


def episode_series(record, n_snapshots):
    """Per-timestep mean over humans still active at each t (NaN when none)."""
    out = np.full(n_snapshots, np.nan)
    counts = np.zeros(n_snapshots)
    for ts, est in record.per_human:
        for t, e in zip(ts, est):
            if np.isnan(out[t]):
                out[t] = 0.0
            out[t] += e
            counts[t] += 1
    mask = counts > 0
    out[mask] /= counts[mask]
    return out


def save_estimator(directory, nets, meta=None):
    os.makedirs(directory, exist_ok=True)
    save_mlp(os.path.join(directory, "source.mlp"), nets.source)
    save_mlp(os.path.join(directory, "transition.mlp"), nets.transition)
    save_mlp(os.path.join(directory, "planning.mlp"), nets.planning)
    if nets.residual_net is not None:
        save_mlp(os.path.join(directory, "residual.mlp"), nets.residual_net)
    with open(os.path.join(directory, "manifest.txt"), "w") as fh:
        fh.write(f"action_dim = {nets.action_dim}\n")
        fh.write(f"condition_on_current = {int(nets.condition_on_current)}\n")
        fh.write(f"residual_floor = {nets.residual_floor:.17g}\n")
        fh.write("residual_std = " + ",".join(f"{v:.17g}" for v in nets.residual_std) + "\n")
        for key, val in (meta or {}).items():
            fh.write(f"{key} = {val}\n")


def load_estimator(directory):
    meta = {}
    with open(os.path.join(directory, "manifest.txt")) as fh:
        for line in fh:
            if "=" in line:
                key, val = line.split("=", 1)
                meta[key.strip()] = val.strip()
    residual_path = os.path.join(directory, "residual.mlp")
    nets = EmpowermentNets(
        source=load_mlp(os.path.join(directory, "source.mlp")),
        transition=load_mlp(os.path.join(directory, "transition.mlp")),
        planning=load_mlp(os.path.join(directory, "planning.mlp")),
        residual_std=np.array([float(v) for v in meta["residual_std"].split(",")]),
        action_dim=int(meta.get("action_dim", 2)),
        condition_on_current=bool(int(meta.get("condition_on_current", 0))),
        residual_net=load_mlp(residual_path) if os.path.exists(residual_path) else None,
        residual_floor=float(meta.get("residual_floor", 1e-3)),
    )
    return nets, meta
