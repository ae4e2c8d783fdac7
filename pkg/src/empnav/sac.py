"""Soft Actor-Critic robot policy with ORCA imitation pretraining.

Twin critics with frozen targets (clipped double-Q), a tanh-squashed Gaussian
actor, and a trainable entropy temperature steered toward a target entropy.
Training has two phases: behavior-cloning + Bellman pretraining on an
ORCA-driven expert buffer, then standard off-policy SAC against the simulator.

Observations are expressed in a goal-aligned robot frame (rotated so the goal
sits on +x): [d_g, v, rho, v_ref] for the robot followed by
[rel_p, v, rho, present] for each of the nearest `n_neighbors` humans,
zero-padded. Actor actions live in the same frame; before stepping the world
they are projected onto the unit speed disc and rotated back, which keeps the
executed command inside the [-1, 1] action box for any frame angle.

Training reward: r_s on success, r_c on collision, and goal_weight * (-d_g) +
r_int otherwise. goal_weight defaults to 0.1 here (not 1.0): with the full
-d_g stream an early collision strictly dominates reaching a distant goal once
the episode terminates on contact, and the policy learns to crash. The trace
CSVs and compute_reward keep the literal reward.
"""

from __future__ import annotations

import hashlib
import math
import os
from dataclasses import dataclass

import numpy as np

from .nets import (
    AdamState,
    Mlp,
    adam_step,
    load_mlp,
    save_mlp,
    tanh_log_prob_from_pre,
)
from .policies import OrcaConfig, OrcaPolicy
from .simulation import (
    Action,
    RewardParams,
    WorldState,
    compute_reward,
    detect_collisions,
    observe,
    step_agent,
)

ACTION_DIM = 2


@dataclass
class SacConfig:
    gamma: float = 0.99
    tau: float = 0.005
    target_entropy: float = -2.0
    batch_size: int = 256
    buffer_capacity: int = 100_000
    lr_actor: float = 3e-4
    lr_critic: float = 3e-4
    lr_alpha: float = 3e-4
    hidden: tuple = (64, 64)
    n_neighbors: int = 5
    warmup_steps: int = 1000
    updates_per_step: int = 1
    goal_weight: float = 0.1
    r_int: float = 0.0
    imitation_episodes: int = 100
    imitation_steps: int = 3000
    init_log_alpha: float = math.log(0.2)

    def reward_params(self):
        return RewardParams(goal_weight=self.goal_weight, r_int=self.r_int)

    def obs_dim(self):
        return 5 + 6 * self.n_neighbors


def robot_observation(robot, humans, n_neighbors):
    """Goal-aligned robot-frame feature vector with zero-padded human slots."""
    dx = robot.g_x - robot.p_x
    dy = robot.g_y - robot.p_y
    d_g = math.hypot(dx, dy)
    ang = math.atan2(dy, dx)
    c, s = math.cos(ang), math.sin(ang)

    def rot(x, y):
        return c * x + s * y, -s * x + c * y

    vx, vy = rot(robot.v_x, robot.v_y)
    obs = [d_g, vx, vy, robot.rho, robot.v_ref]
    by_dist = sorted(
        humans, key=lambda h: math.hypot(h.p_x - robot.p_x, h.p_y - robot.p_y)
    )[:n_neighbors]
    for h in by_dist:
        px, py = rot(h.p_x - robot.p_x, h.p_y - robot.p_y)
        hvx, hvy = rot(h.v_x, h.v_y)
        obs += [px, py, hvx, hvy, h.rho, 1.0]
    obs += [0.0] * (6 * (n_neighbors - len(by_dist)))
    return np.array(obs)


def goal_frame_angle(robot):
    return math.atan2(robot.g_y - robot.p_y, robot.g_x - robot.p_x)


def frame_action_to_world(a, ang):
    """Project to the unit speed disc, rotate back to world axes."""
    ax, ay = float(a[0]), float(a[1])
    n = math.hypot(ax, ay)
    if n > 1.0:
        ax /= n
        ay /= n
    c, s = math.cos(ang), math.sin(ang)
    return Action(c * ax - s * ay, s * ax + c * ay)


def world_action_to_frame(act, ang):
    c, s = math.cos(ang), math.sin(ang)
    return np.array([c * act.v_x + s * act.v_y, -s * act.v_x + c * act.v_y])


class ReplayBuffer:
    """Fixed-capacity ring buffer of transitions; optional next-action slot."""

    def __init__(self, capacity, obs_dim, with_next_action=False):
        self.capacity = capacity
        self.obs = np.zeros((capacity, obs_dim))
        self.act = np.zeros((capacity, ACTION_DIM))
        self.rew = np.zeros(capacity)
        self.obs2 = np.zeros((capacity, obs_dim))
        self.done = np.zeros(capacity)
        self.act2 = np.zeros((capacity, ACTION_DIM)) if with_next_action else None
        self.size = 0
        self.head = 0

    def __len__(self):
        return self.size

    def add(self, obs, act, rew, obs2, done, act2=None):
        i = self.head
        self.obs[i] = obs
        self.act[i] = act
        self.rew[i] = rew
        self.obs2[i] = obs2
        self.done[i] = float(done)
        if self.act2 is not None:
            if act2 is None:
                raise ValueError("buffer expects a next action")
            self.act2[i] = act2
        self.head = (i + 1) % self.capacity
        self.size = min(self.size + 1, self.capacity)

    def sample(self, rng, batch_size):
        idx = rng.integers(0, self.size, size=batch_size)
        batch = {
            "obs": self.obs[idx],
            "act": self.act[idx],
            "rew": self.rew[idx],
            "obs2": self.obs2[idx],
            "done": self.done[idx],
        }
        if self.act2 is not None:
            batch["act2"] = self.act2[idx]
        return batch


@dataclass
class SacNets:
    actor: Mlp
    q1: Mlp
    q2: Mlp
    q1_target: Mlp
    q2_target: Mlp
    log_alpha: np.ndarray

    @property
    def alpha(self):
        return float(np.exp(self.log_alpha[0]))


def build_nets(obs_dim, cfg, seed=0):
    """Actor outputs [mean, log_std]; log_std head starts at -0.5 exactly."""
    actor = Mlp([obs_dim, *cfg.hidden, 2 * ACTION_DIM], seed=seed)
    actor.weights[-1][:, ACTION_DIM:] = 0.0
    actor.biases[-1][ACTION_DIM:] = -0.5
    q1 = Mlp([obs_dim + ACTION_DIM, *cfg.hidden, 1], seed=seed + 1)
    q2 = Mlp([obs_dim + ACTION_DIM, *cfg.hidden, 1], seed=seed + 2)
    return SacNets(
        actor=actor,
        q1=q1,
        q2=q2,
        q1_target=q1.copy(),
        q2_target=q2.copy(),
        log_alpha=np.array([cfg.init_log_alpha]),
    )


def _actor_heads(nets, obs):
    y, cache = nets.actor.forward_cache(obs)
    mean = y[..., :ACTION_DIM]
    raw = y[..., ACTION_DIM:]
    log_std = np.clip(raw, -20.0, 2.0)
    clip_mask = ((raw > -20.0) & (raw < 2.0)).astype(np.float64)
    return mean, log_std, clip_mask, cache


def sample_squashed(nets, obs, rng):
    """Fresh tanh-squashed reparameterized actions with exact log-probs."""
    mean, log_std, _, _ = _actor_heads(nets, obs)
    eps = rng.standard_normal(mean.shape)
    u = mean + np.exp(log_std) * eps
    a = np.tanh(u)
    logp = tanh_log_prob_from_pre(mean, log_std, u)
    return a, logp


def critic_target(batch, nets, cfg, rng):
    """y = r + gamma * (1 - done) * (min_j targetQ_j(o', a') - alpha * log pi)."""
    a2, logp2 = sample_squashed(nets, batch["obs2"], rng)
    qin = np.concatenate([batch["obs2"], a2], axis=1)
    q1t = nets.q1_target.forward(qin)[:, 0]
    q2t = nets.q2_target.forward(qin)[:, 0]
    qmin = np.minimum(q1t, q2t)
    return batch["rew"] + cfg.gamma * (1.0 - batch["done"]) * (
        qmin - nets.alpha * logp2
    )


def critic_loss(batch, nets, targets):
    """Per-critic mean squared Bellman error and parameter gradients."""
    qin = np.concatenate([batch["obs"], batch["act"]], axis=1)
    B = qin.shape[0]
    out = []
    for critic in (nets.q1, nets.q2):
        pred, cache = critic.forward_cache(qin)
        resid = pred[:, 0] - targets
        loss = float(np.mean(resid**2))
        grads, _ = critic.backward(cache, (2.0 * resid / B)[:, None])
        out.append((loss, grads))
    (l1, g1), (l2, g2) = out
    return l1, l2, g1, g2


def actor_loss(batch, nets, alpha, rng):
    """Negated SAC policy objective with exact gradients for the actor.

    Actions are reparameterized (u = mean + std * eps with frozen eps), so the
    whole expression is a deterministic function of the actor parameters and
    finite differences can check the gradient.
    """
    obs = batch["obs"]
    B = obs.shape[0]
    mean, log_std, clip_mask, cache = _actor_heads(nets, obs)
    std = np.exp(log_std)
    eps = rng.standard_normal(mean.shape)
    u = mean + std * eps
    a = np.tanh(u)
    logp = tanh_log_prob_from_pre(mean, log_std, u)

    qin = np.concatenate([obs, a], axis=1)
    p1, c1 = nets.q1.forward_cache(qin)
    p2, c2 = nets.q2.forward_cache(qin)
    q1v, q2v = p1[:, 0], p2[:, 0]
    take1 = q1v <= q2v
    qmin = np.where(take1, q1v, q2v)
    loss = float(-np.mean(qmin - alpha * logp))

    # d(-mean qmin)/da, routed through whichever critic achieved the min
    _, gin1 = nets.q1.backward(c1, (-take1.astype(np.float64) / B)[:, None])
    _, gin2 = nets.q2.backward(c2, (-(~take1).astype(np.float64) / B)[:, None])
    g_a = (gin1 + gin2)[:, obs.shape[1] :]

    g_u = g_a * (1.0 - a * a)
    tanh_u = np.tanh(u)
    g_mean = g_u + (alpha / B) * 2.0 * tanh_u
    g_ls = g_u * (std * eps) + (alpha / B) * (-1.0 + 2.0 * tanh_u * std * eps)
    upstream = np.concatenate([g_mean, g_ls * clip_mask], axis=1)
    grads, _ = nets.actor.backward(cache, upstream)
    return loss, grads


def temperature_loss(batch, nets, target_entropy, rng):
    """J_alpha = alpha * (measured entropy - target); gradient on log_alpha."""
    _, logp = sample_squashed(nets, batch["obs"], rng)
    alpha = nets.alpha
    gap = float(np.mean(-logp)) - target_entropy
    return alpha * gap, np.array([alpha * gap])


def soft_update(online, target, tau):
    if not (0.0 < tau <= 1.0):
        raise ValueError("tau must be in (0, 1]")
    if online.sizes != target.sizes:
        raise ValueError("online/target layer sizes differ")
    for W_o, W_t in zip(online.weights, target.weights):
        W_t *= 1.0 - tau
        W_t += tau * W_o
    for b_o, b_t in zip(online.biases, target.biases):
        b_t *= 1.0 - tau
        b_t += tau * b_o
    return target


def imitation_actor_loss(batch, nets):
    """Mean squared L2 gap between the deterministic action and the expert's."""
    obs, act_e = batch["obs"], batch["act"]
    B = obs.shape[0]
    mean, _, _, cache = _actor_heads(nets, obs)
    a_pred = np.tanh(mean)
    diff = a_pred - act_e
    loss = float(np.mean(np.sum(diff**2, axis=1)))
    g_mean = (2.0 / B) * diff * (1.0 - a_pred * a_pred)
    upstream = np.concatenate([g_mean, np.zeros_like(g_mean)], axis=1)
    grads, _ = nets.actor.backward(cache, upstream)
    return loss, grads


def imitation_critic_loss(batch, nets, cfg):
    """Bellman error toward y = r + gamma * min_j targetQ_j(o', a'_e); no entropy."""
    qin2 = np.concatenate([batch["obs2"], batch["act2"]], axis=1)
    q1t = nets.q1_target.forward(qin2)[:, 0]
    q2t = nets.q2_target.forward(qin2)[:, 0]
    y = batch["rew"] + cfg.gamma * (1.0 - batch["done"]) * np.minimum(q1t, q2t)
    return critic_loss(batch, nets, y)


class CrowdEnv:
    """Gym-style wrapper over the crowd world for SAC training rollouts."""

    def __init__(self, scenario, cfg, orca_cfg=None):
        self.scenario = scenario
        self.cfg = cfg
        self.human_policy = OrcaPolicy(
            orca_cfg if orca_cfg is not None else OrcaConfig(v_max=scenario.v_ref),
            dt=scenario.dt,
        )
        self.reward_params = cfg.reward_params()
        self.world = None
        self.frame_angle = 0.0
        self.steps = 0

    def reset(self, seed):
        self.world = self.scenario.spawn(seed)
        self.steps = 0
        return self._observe()

    def _observe(self):
        self.frame_angle = goal_frame_angle(self.world.robot)
        humans = [observe(h) for h in self.world.humans]
        return robot_observation(self.world.robot, humans, self.cfg.n_neighbors)

    def step(self, frame_action):
        """Apply a robot-frame action; returns (obs2, reward, done, info)."""
        world = self.world
        robot_act = frame_action_to_world(frame_action, self.frame_angle)
        human_actions = []
        for k, human in enumerate(world.humans):
            if human.at_goal():
                human_actions.append(Action(0.0, 0.0))
                continue
            neighbors = [observe(h) for i, h in enumerate(world.humans) if i != k]
            if self.scenario.robot_visible:
                neighbors.append(observe(world.robot))
            human_actions.append(self.human_policy(human, tuple(neighbors)))
        new_robot = step_agent(world.robot, robot_act, world.dt)
        new_humans = [
            step_agent(h, a, world.dt) for h, a in zip(world.humans, human_actions)
        ]
        self.world = WorldState(
            robot=new_robot, humans=new_humans, t=world.t + 1, dt=world.dt
        )
        self.steps += 1
        events = detect_collisions(self.world)
        collided = any(0 in pair for pair in events)
        reward = compute_reward(self.world, self.reward_params, collision=collided)
        success = self.world.robot.at_goal()
        done = success or collided
        timeout = not done and self.steps >= self.scenario.max_steps
        obs2 = self._observe()
        info = {"success": success, "collision": collided, "timeout": timeout}
        return obs2, reward, done, info


def collect_expert_demonstrations(n_episodes, scenario, seed, cfg=None, orca_cfg=None):
    """ORCA-driven robot episodes stored as (o, a, r, o', done, a') transitions.

    Actions and observations use the same robot-frame conventions as SAC;
    rewards use the SAC training shaping so the imitation critic sees the same
    scale it will be fine-tuned on.
    """
    cfg = cfg if cfg is not None else SacConfig()
    expert = OrcaPolicy(
        orca_cfg if orca_cfg is not None else OrcaConfig(v_max=scenario.v_ref),
        dt=scenario.dt,
    )
    buffer = ReplayBuffer(
        max(1, n_episodes * scenario.max_steps), cfg.obs_dim(), with_next_action=True
    )
    env = CrowdEnv(scenario, cfg)
    for ep in range(n_episodes):
        obs = env.reset((seed, ep))
        ang = env.frame_angle
        world_act = expert(env.world.robot, tuple(observe(h) for h in env.world.humans))
        act = world_action_to_frame(world_act, ang)
        for _ in range(scenario.max_steps):
            obs2, rew, done, info = env.step(act)
            ang2 = env.frame_angle
            world_act2 = expert(
                env.world.robot, tuple(observe(h) for h in env.world.humans)
            )
            act2 = world_action_to_frame(world_act2, ang2)
            buffer.add(obs, act, rew, obs2, done, act2=act2)
            if done or info["timeout"]:
                break
            obs, act, ang = obs2, act2, ang2
    return buffer


@dataclass
class TrainLogRow:
    episode: int
    env_steps: int
    ret: float
    success: bool
    steps: int
    alpha: float


@dataclass
class TrainResult:
    nets: SacNets
    log: list
    expert_buffer: object
    steps_to_criterion: int
    total_env_steps: int


def pretrain_imitation(nets, expert, cfg, rng, steps=None):
    """Behavior cloning on the actor plus Bellman fitting on the critics."""
    steps = steps if steps is not None else cfg.imitation_steps
    opt_actor = AdamState(nets.actor.parameters(), lr=cfg.lr_actor)
    opt_q1 = AdamState(nets.q1.parameters(), lr=cfg.lr_critic)
    opt_q2 = AdamState(nets.q2.parameters(), lr=cfg.lr_critic)
    for _ in range(steps):
        batch = expert.sample(rng, min(cfg.batch_size, len(expert)))
        loss_a, g_a = imitation_actor_loss(batch, nets)
        l1, l2, g1, g2 = imitation_critic_loss(batch, nets, cfg)
        if not np.isfinite(loss_a + l1 + l2):
            raise RuntimeError("imitation pretraining diverged")
        adam_step(nets.actor.parameters(), g_a, opt_actor)
        adam_step(nets.q1.parameters(), g1, opt_q1)
        adam_step(nets.q2.parameters(), g2, opt_q2)
        soft_update(nets.q1, nets.q1_target, cfg.tau)
        soft_update(nets.q2, nets.q2_target, cfg.tau)
    return nets


def train(
    scenario,
    cfg,
    seed=0,
    episodes=500,
    pretrain=True,
    success_streak=10,
):
    """Two-phase SAC training; returns nets plus a per-episode log.

    steps_to_criterion records the env-step count at the end of the first
    `success_streak` consecutive successful episodes (total steps if the
    streak never happens), which the pretraining ablation compares.
    """
    rng = np.random.default_rng((seed, 0x5AC))
    nets = build_nets(cfg.obs_dim(), cfg, seed=seed)
    expert = None
    if pretrain and cfg.imitation_episodes > 0:
        expert = collect_expert_demonstrations(
            cfg.imitation_episodes, scenario, (seed, 0xE), cfg
        )
        pretrain_imitation(nets, expert, cfg, rng)

    buffer = ReplayBuffer(cfg.buffer_capacity, cfg.obs_dim())
    if expert is not None and len(expert) > 0:
        # seed the replay so early SAC updates do not unlearn the cloned policy
        n = len(expert)
        for i in range(n):
            buffer.add(
                expert.obs[i], expert.act[i], expert.rew[i], expert.obs2[i], expert.done[i]
            )

    opt_actor = AdamState(nets.actor.parameters(), lr=cfg.lr_actor)
    opt_q1 = AdamState(nets.q1.parameters(), lr=cfg.lr_critic)
    opt_q2 = AdamState(nets.q2.parameters(), lr=cfg.lr_critic)
    opt_alpha = AdamState([nets.log_alpha], lr=cfg.lr_alpha)

    env = CrowdEnv(scenario, cfg)
    log = []
    total_steps = 0
    streak = 0
    steps_to_criterion = None
    for ep in range(episodes):
        obs = env.reset((seed, 1, ep))
        ep_ret = 0.0
        ep_steps = 0
        info = {"success": False, "collision": False, "timeout": False}
        while True:
            if total_steps < cfg.warmup_steps and not pretrain:
                act = rng.uniform(-1.0, 1.0, size=ACTION_DIM)
            else:
                a, _ = sample_squashed(nets, obs, rng)
                act = a
            obs2, rew, done, info = env.step(act)
            buffer.add(obs, act, rew, obs2, done)
            ep_ret += rew
            ep_steps += 1
            total_steps += 1
            ready = len(buffer) >= cfg.batch_size and (
                pretrain or total_steps >= cfg.warmup_steps
            )
            if ready:
                for _ in range(cfg.updates_per_step):
                    _sac_update(nets, buffer, cfg, rng, opt_actor, opt_q1, opt_q2, opt_alpha)
            obs = obs2
            if done or info["timeout"]:
                break
        streak = streak + 1 if info["success"] else 0
        if steps_to_criterion is None and streak >= success_streak:
            steps_to_criterion = total_steps
        log.append(
            TrainLogRow(
                episode=ep,
                env_steps=total_steps,
                ret=ep_ret,
                success=bool(info["success"]),
                steps=ep_steps,
                alpha=nets.alpha,
            )
        )
    return TrainResult(
        nets=nets,
        log=log,
        expert_buffer=expert,
        steps_to_criterion=steps_to_criterion if steps_to_criterion is not None else total_steps,
        total_env_steps=total_steps,
    )


def _sac_update(nets, buffer, cfg, rng, opt_actor, opt_q1, opt_q2, opt_alpha):
    batch = buffer.sample(rng, cfg.batch_size)
    y = critic_target(batch, nets, cfg, rng)
    l1, l2, g1, g2 = critic_loss(batch, nets, y)
    la, ga = actor_loss(batch, nets, nets.alpha, rng)
    lt, gt = temperature_loss(batch, nets, cfg.target_entropy, rng)
    if not np.isfinite(l1 + l2 + la + lt):
        raise RuntimeError("SAC training diverged (non-finite loss)")
    adam_step(nets.q1.parameters(), g1, opt_q1)
    adam_step(nets.q2.parameters(), g2, opt_q2)
    adam_step(nets.actor.parameters(), ga, opt_actor)
    adam_step([nets.log_alpha], [gt], opt_alpha)
    soft_update(nets.q1, nets.q1_target, cfg.tau)
    soft_update(nets.q2, nets.q2_target, cfg.tau)


class SacPolicy:
    """Frozen-actor policy usable by run_episode; deterministic by default."""

    name = "sac"

    def __init__(self, actor, n_neighbors=5, deterministic=True, seed=0):
        self.actor = actor
        self.n_neighbors = n_neighbors
        self.deterministic = deterministic
        self.rng = np.random.default_rng(seed)

    def __call__(self, state, neighbors=()):
        obs = robot_observation(state, neighbors, self.n_neighbors)
        y = self.actor.forward(obs)
        mean = y[:ACTION_DIM]
        if self.deterministic:
            a = np.tanh(mean)
        else:
            log_std = np.clip(y[ACTION_DIM:], -20.0, 2.0)
            a = np.tanh(mean + np.exp(log_std) * self.rng.standard_normal(ACTION_DIM))
        return frame_action_to_world(a, goal_frame_angle(state))


def evaluate_success(actor, scenario, seeds, n_neighbors=5):
    """Greedy success rate of a frozen actor over the given spawn seeds."""
    from .simulation import run_episode

    policy = SacPolicy(actor, n_neighbors=n_neighbors)
    human = OrcaPolicy(OrcaConfig(v_max=scenario.v_ref), dt=scenario.dt)
    wins = 0
    for s in seeds:
        world = scenario.spawn(s)
        trace = run_episode(
            world,
            policy,
            human,
            scenario.max_steps,
            d_disc=scenario.d_discomfort,
            robot_visible=scenario.robot_visible,
        )
        wins += int(trace.success)
    return wins / len(seeds)


def config_fingerprint(scenario, cfg, seed):
    text = repr((scenario, cfg, seed)).encode()
    return hashlib.sha256(text).hexdigest()[:16]


def save_sac(directory, nets, scenario, cfg, seed, episodes):
    os.makedirs(directory, exist_ok=True)
    save_mlp(os.path.join(directory, "actor.mlp"), nets.actor)
    save_mlp(os.path.join(directory, "q1.mlp"), nets.q1)
    save_mlp(os.path.join(directory, "q2.mlp"), nets.q2)
    save_mlp(os.path.join(directory, "q1_target.mlp"), nets.q1_target)
    save_mlp(os.path.join(directory, "q2_target.mlp"), nets.q2_target)
    with open(os.path.join(directory, "manifest.txt"), "w") as fh:
        fh.write(f"log_alpha = {nets.log_alpha[0]:.17g}\n")
        fh.write(f"n_neighbors = {cfg.n_neighbors}\n")
        fh.write(f"hidden = {','.join(str(h) for h in cfg.hidden)}\n")
        fh.write(f"train_seed = {seed}\n")
        fh.write(f"episodes = {episodes}\n")
        fh.write(f"config_hash = {config_fingerprint(scenario, cfg, seed)}\n")


def load_sac(directory):
    nets = SacNets(
        actor=load_mlp(os.path.join(directory, "actor.mlp")),
        q1=load_mlp(os.path.join(directory, "q1.mlp")),
        q2=load_mlp(os.path.join(directory, "q2.mlp")),
        q1_target=load_mlp(os.path.join(directory, "q1_target.mlp")),
        q2_target=load_mlp(os.path.join(directory, "q2_target.mlp")),
        log_alpha=np.array([0.0]),
    )
    meta = {}
    with open(os.path.join(directory, "manifest.txt")) as fh:
        for line in fh:
            if "=" in line:
                key, val = line.split("=", 1)
                meta[key.strip()] = val.strip()
    nets.log_alpha = np.array([float(meta.get("log_alpha", 0.0))])
    return nets, meta


def write_train_log(path, log):
    with open(path, "w") as fh:
        fh.write("episode,return,success,steps,alpha\n")
        for row in log:
            fh.write(
                f"{row.episode},{row.ret:.9g},{int(row.success)},{row.steps},{row.alpha:.9g}\n"
            )
