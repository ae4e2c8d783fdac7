"""2-D crowd world: holonomic kinematics, circle-crossing scenarios, episode engine.

Conventions: one robot (agent index 0) plus N humans (indices 1..N). All motion
is holonomic: a policy commands a velocity, positions integrate p' = p + v*dt.
Collision and success checks run on post-step positions; there is no
continuous-time sweep (at dt=0.25 s and v_max=1 m/s relative interpenetration
per step is bounded by 0.5 m, which is accepted and flagged).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

ACTION_BOUND = 1.0


class SimulationError(RuntimeError):
    """Episode-level failure (invalid policy output, unplaceable crowd)."""


class ActionBoundsError(ValueError):
    """Commanded velocity component outside the [-1, 1] action box."""


@dataclass(slots=True)
class AgentState:
    """Full agent state: pose, goal, preferred speed, cosmetic heading."""

    p_x: float
    p_y: float
    v_x: float
    v_y: float
    rho: float
    g_x: float
    g_y: float
    v_ref: float
    theta: float = 0.0

    def goal_distance(self):
        return math.hypot(self.g_x - self.p_x, self.g_y - self.p_y)

    def at_goal(self):
        return self.goal_distance() < self.rho


@dataclass(frozen=True, slots=True)
class Observable:
    """Projection of an agent visible to other agents."""

    p_x: float
    p_y: float
    v_x: float
    v_y: float
    rho: float


@dataclass(frozen=True, slots=True)
class Action:
    v_x: float
    v_y: float


@dataclass(slots=True)
class WorldState:
    robot: AgentState
    humans: list
    t: int
    dt: float

    def agents(self):
        """Robot-first list of all agents; index order is stable."""
        return [self.robot] + list(self.humans)


@dataclass(slots=True)
class RewardParams:
    """Terms of the per-step robot reward.

    goal_weight scales the -d_g term; 1.0 is the literal reward, smaller values
    are used by SAC training configs (see sac module).  r_int is an additive
    interaction term with no fixed semantics, default 0.
    """

    r_c: float = -20.0
    r_s: float = 20.0
    r_int: float = 0.0
    goal_weight: float = 1.0

    def __post_init__(self):
        if not (self.r_c < 0.0 < self.r_s):
            raise ValueError("reward params must satisfy r_c < 0 < r_s")


def observe(agent):
    return Observable(agent.p_x, agent.p_y, agent.v_x, agent.v_y, agent.rho)


def validate_agent_state(state, v_max=1.0):
    """Spawn-time invariants: positive radius/speed preference, speed cap."""
    if state.rho <= 0.0 or state.v_ref <= 0.0:
        raise ValueError("agent radius and preferred speed must be positive")
    if math.hypot(state.v_x, state.v_y) > v_max + 1e-9:
        raise ValueError("agent speed exceeds v_max")


def step_agent(state, action, dt):
    """Integrate one holonomic step; rejects out-of-box actions, never clamps."""
    if dt <= 0.0:
        raise ValueError("dt must be positive")
    ax, ay = action.v_x, action.v_y
    if not (-ACTION_BOUND <= ax <= ACTION_BOUND and -ACTION_BOUND <= ay <= ACTION_BOUND):
        raise ActionBoundsError(f"action ({ax}, {ay}) outside [-1, 1] box")
    theta = math.atan2(ay, ax) if (ax != 0.0 or ay != 0.0) else state.theta
    return AgentState(
        state.p_x + ax * dt,
        state.p_y + ay * dt,
        ax,
        ay,
        state.rho,
        state.g_x,
        state.g_y,
        state.v_ref,
        theta,
    )


def detect_collisions(world):
    """All overlapping agent pairs (i, j), i < j, robot-first indexing."""
    agents = world.agents()
    pairs = []
    for i in range(len(agents)):
        ai = agents[i]
        for j in range(i + 1, len(agents)):
            aj = agents[j]
            if math.hypot(ai.p_x - aj.p_x, ai.p_y - aj.p_y) < ai.rho + aj.rho:
                pairs.append((i, j))
    return pairs


def compute_reward(world, params, collision=False):
    """Per-step robot reward; `collision` reports this step's detection result."""
    d_g = world.robot.goal_distance()
    if d_g < world.robot.rho:
        return params.r_s
    r = params.goal_weight * (-d_g) + params.r_int
    if collision:
        r += params.r_c
    return r


def discomfort_flags(world, d_disc=0.2):
    """Per-human flag: surface gap to any other agent below the threshold."""
    if d_disc <= 0.0:
        raise ValueError("d_disc must be positive")
    agents = world.agents()
    flags = []
    for k in range(1, len(agents)):
        flags.append(_crowded(agents, k, d_disc))
    return flags


def _crowded(agents, idx, d_disc):
    me = agents[idx]
    for j, other in enumerate(agents):
        if j == idx:
            continue
        gap = math.hypot(me.p_x - other.p_x, me.p_y - other.p_y) - me.rho - other.rho
        if gap < d_disc:
            return True
    return False


def all_agent_discomfort(world, d_disc=0.2):
    """Robot-first discomfort flags (robot uses the same surface-gap rule)."""
    agents = world.agents()
    return [_crowded(agents, i, d_disc) for i in range(len(agents))]


def spawn_circle_crossing(
    n_humans,
    circle_radius,
    seed,
    agent_radius=0.3,
    v_ref=1.0,
    dt=0.25,
    jitter_deg=35.0,
    margin=0.3,
    max_attempts=100,
):
    """Place robot + humans on a circle with antipodal goals.

    Base angles are evenly spaced (robot at -pi/2); each agent's angle gets a
    seeded uniform jitter of +-jitter_deg, redrawn until the agent clears every
    already-placed start AND goal by rho_i + rho_j + margin (goals inherit
    start separation through antipodality, and the start-vs-goal check keeps
    nobody spawning on a spot where another agent will park). Identical seeds
    give bit-identical worlds.
    """
    if n_humans < 0:
        raise ValueError("n_humans must be >= 0")
    if circle_radius <= 2.0 * agent_radius:
        raise ValueError("circle radius too small for agent radius")
    rng = np.random.default_rng(seed)
    count = n_humans + 1
    base = -0.5 * math.pi + 2.0 * math.pi * np.arange(count) / count
    jitter_rad = math.radians(jitter_deg)
    sep = 2.0 * agent_radius + margin
    for _ in range(max_attempts):
        spots = []
        for i in range(count):
            placed = False
            for _ in range(max_attempts):
                ang = base[i] + rng.uniform(-jitter_rad, jitter_rad)
                x = circle_radius * math.cos(ang)
                y = circle_radius * math.sin(ang)
                clear = True
                for ox, oy in spots:
                    if (
                        math.hypot(x - ox, y - oy) < sep
                        or math.hypot(x + ox, y + oy) < sep
                    ):
                        clear = False
                        break
                if clear:
                    spots.append((x, y))
                    placed = True
                    break
            if not placed:
                break
        if len(spots) < count:
            continue
        agents = []
        for x, y in spots:
            agents.append(
                AgentState(
                    x, y, 0.0, 0.0, agent_radius, -x, -y, v_ref,
                    math.atan2(-y, -x),
                )
            )
        for a in agents:
            validate_agent_state(a)
        return WorldState(robot=agents[0], humans=agents[1:], t=0, dt=dt)
    raise SimulationError(
        f"could not place {count} agents on radius {circle_radius} after {max_attempts} attempts"
    )


@dataclass
class ScenarioConfig:
    """Circle-crossing scenario knobs shared by training and evaluation."""

    n_humans: int = 5
    circle_radius: float = 4.0
    dt: float = 0.25
    max_steps: int = 100
    agent_radius: float = 0.3
    v_ref: float = 1.0
    jitter_deg: float = 35.0
    spawn_margin: float = 0.3
    d_discomfort: float = 0.2
    robot_visible: bool = False

    def spawn(self, seed):
        return spawn_circle_crossing(
            self.n_humans,
            self.circle_radius,
            seed,
            agent_radius=self.agent_radius,
            v_ref=self.v_ref,
            dt=self.dt,
            jitter_deg=self.jitter_deg,
            margin=self.spawn_margin,
        )


@dataclass
class EpisodeTrace:
    """Complete record of one episode.

    snapshots has length n_steps + 1; actions/rewards/collisions have length
    n_steps (entry t describes the transition snapshot t -> t+1); discomfort
    has one robot-first flag list per snapshot.
    """

    dt: float
    snapshots: list = field(default_factory=list)
    actions: list = field(default_factory=list)
    rewards: list = field(default_factory=list)
    collisions: list = field(default_factory=list)
    discomfort: list = field(default_factory=list)
    termination: str = ""

    @property
    def n_steps(self):
        return len(self.actions)

    @property
    def success(self):
        return self.termination == "success"

    def collision_count(self):
        return sum(len(ev) for ev in self.collisions)

    def human_arrival_steps(self):
        """First snapshot index at which each human is at its goal, else None."""
        n = len(self.snapshots[0].humans)
        arrivals = [None] * n
        for t, world in enumerate(self.snapshots):
            for k, h in enumerate(world.humans):
                if arrivals[k] is None and h.at_goal():
                    arrivals[k] = t
        return arrivals


def run_episode(
    world,
    robot_policy,
    human_policy,
    max_steps,
    reward_params=None,
    d_disc=0.2,
    robot_visible=False,
):
    """Advance all agents simultaneously until success, collision, or timeout.

    Policies are called as policy(own_state, neighbor_observables). Humans that
    reach their goal hold position with zero velocity. The robot is hidden from
    the humans' neighbor lists unless robot_visible is set (the robot always
    appears in occupancy maps and discomfort checks regardless).
    """
    if max_steps <= 0:
        raise ValueError("max_steps must be positive")
    params = reward_params if reward_params is not None else RewardParams()
    world = WorldState(robot=world.robot, humans=list(world.humans), t=world.t, dt=world.dt)
    trace = EpisodeTrace(dt=world.dt)
    trace.snapshots.append(_copy_world(world))
    trace.discomfort.append(all_agent_discomfort(world, d_disc))

    for _ in range(max_steps):
        robot_obs = tuple(observe(h) for h in world.humans)
        try:
            robot_action = robot_policy(world.robot, robot_obs)
        except ActionBoundsError:
            raise
        actions = [robot_action]
        for k, human in enumerate(world.humans):
            if human.at_goal():
                actions.append(Action(0.0, 0.0))
                continue
            neighbors = [observe(h) for i, h in enumerate(world.humans) if i != k]
            if robot_visible:
                neighbors.append(observe(world.robot))
            actions.append(human_policy(human, tuple(neighbors)))
        try:
            new_robot = step_agent(world.robot, actions[0], world.dt)
            new_humans = [
                step_agent(h, a, world.dt) for h, a in zip(world.humans, actions[1:])
            ]
        except ActionBoundsError as err:
            raise SimulationError(f"policy produced invalid action at t={world.t}: {err}")
        world = WorldState(robot=new_robot, humans=new_humans, t=world.t + 1, dt=world.dt)

        events = detect_collisions(world)
        robot_collided = any(0 in pair for pair in events)
        reward = compute_reward(world, params, collision=robot_collided)

        trace.snapshots.append(_copy_world(world))
        trace.actions.append(actions)
        trace.rewards.append(reward)
        trace.collisions.append(events)
        trace.discomfort.append(all_agent_discomfort(world, d_disc))

        if world.robot.at_goal():
            trace.termination = "success"
            return trace
        if robot_collided:
            trace.termination = "collision"
            return trace
    trace.termination = "timeout"
    return trace


def _copy_world(world):
    return WorldState(
        robot=AgentState(
            world.robot.p_x, world.robot.p_y, world.robot.v_x, world.robot.v_y,
            world.robot.rho, world.robot.g_x, world.robot.g_y, world.robot.v_ref,
            world.robot.theta,
        ),
        humans=[
            AgentState(h.p_x, h.p_y, h.v_x, h.v_y, h.rho, h.g_x, h.g_y, h.v_ref, h.theta)
            for h in world.humans
        ],
        t=world.t,
        dt=world.dt,
    )


TRACE_COLUMNS = (
    "t,agent_id,kind,p_x,p_y,v_x,v_y,a_x,a_y,reward,collision,discomfort"
)


def _g9(x):
    return f"{x:.9g}"


def trace_to_csv(trace, fh):
    """Line-oriented trace export: one row per agent per snapshot.

    Rows at t < n_steps carry the action applied at t, the robot reward for
    transition t -> t+1, and a collision flag if the agent was in a colliding
    pair during that transition; the final snapshot row carries zeros there.
    """
    fh.write(TRACE_COLUMNS + "\n")
    n_steps = trace.n_steps
    for t, world in enumerate(trace.snapshots):
        agents = world.agents()
        if t < n_steps:
            acts = trace.actions[t]
            events = trace.collisions[t]
            reward = trace.rewards[t]
        else:
            acts = [Action(0.0, 0.0)] * len(agents)
            events = []
            reward = 0.0
        flags = trace.discomfort[t]
        for idx, agent in enumerate(agents):
            kind = "robot" if idx == 0 else "human"
            collided = int(any(idx in pair for pair in events))
            row = [
                str(t),
                str(idx),
                kind,
                _g9(agent.p_x),
                _g9(agent.p_y),
                _g9(agent.v_x),
                _g9(agent.v_y),
                _g9(acts[idx].v_x),
                _g9(acts[idx].v_y),
                _g9(reward if idx == 0 else 0.0),
                str(collided),
                str(int(flags[idx])),
            ]
            fh.write(",".join(row) + "\n")
