"""Navigation policies: Linear baseline and ORCA.

ORCA builds one half-plane constraint per neighbor from the truncated velocity
obstacle of the pair (reciprocity factor 1/2: each agent takes half of the
avoidance responsibility), then picks the permitted velocity closest to the
preferred velocity with an incremental 2-D linear program. When the constraints
are jointly infeasible inside the speed disc, a 3-D fallback returns the
velocity minimizing the largest violation, so a result is always produced.
Pairs that already overlap use an escape construction over one time step
instead of the full horizon.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .simulation import ACTION_BOUND, Action

_EPS = 1e-10


class DegenerateGeometryError(ValueError):
    """Two agents share a center; the velocity obstacle is undefined."""


@dataclass(frozen=True)
class HalfPlaneConstraint:
    """Permitted velocities satisfy dot(v - point, normal) >= 0; |normal| = 1."""

    point: tuple
    normal: tuple

    def permits(self, v, tol=0.0):
        return (v[0] - self.point[0]) * self.normal[0] + (v[1] - self.point[1]) * self.normal[1] >= -tol

    def violation(self, v):
        d = (v[0] - self.point[0]) * self.normal[0] + (v[1] - self.point[1]) * self.normal[1]
        return max(0.0, -d)


@dataclass
class OrcaConfig:
    time_horizon: float = 5.0
    safety_space: float = 0.0
    v_max: float = 1.0
    neighbor_count: int = 5
    sensing_range: float = 10.0
    # tiny leftward bias on v_pref that breaks perfectly symmetric head-on
    # deadlocks; set to 0.0 to disable (the symmetry tests do)
    symmetry_bias: float = 1e-6


def linear_policy(state, neighbors=()):
    """Full speed straight at the goal, components clamped to the action box."""
    dx = state.g_x - state.p_x
    dy = state.g_y - state.p_y
    dist = math.hypot(dx, dy)
    if dist < state.rho:
        return Action(0.0, 0.0)
    vx = state.v_ref * dx / dist
    vy = state.v_ref * dy / dist
    vx = min(ACTION_BOUND, max(-ACTION_BOUND, vx))
    vy = min(ACTION_BOUND, max(-ACTION_BOUND, vy))
    return Action(vx, vy)


def preferred_velocity(state, cfg):
    base = linear_policy(state)
    vx, vy = base.v_x, base.v_y
    speed = math.hypot(vx, vy)
    if cfg.symmetry_bias and speed > 0.0:
        # leftward = +90 degrees from the preferred direction
        ux, uy = vx / speed, vy / speed
        vx += cfg.symmetry_bias * (-uy)
        vy += cfg.symmetry_bias * ux
    return np.array([vx, vy])


def orca_constraints(state, neighbors, cfg, dt):
    """One ORCA half-plane per neighbor (neighbors already filtered/truncated)."""
    out = []
    inv_tau = 1.0 / cfg.time_horizon
    inv_dt = 1.0 / dt
    for other in neighbors:
        rx = other.p_x - state.p_x
        ry = other.p_y - state.p_y
        vx = state.v_x - other.v_x
        vy = state.v_y - other.v_y
        r = state.rho + other.rho + cfg.safety_space
        dist_sq = rx * rx + ry * ry
        if dist_sq == 0.0:
            raise DegenerateGeometryError("coincident agent centers")
        r_sq = r * r
        if dist_sq > r_sq:
            # no current overlap: truncated cone over the time horizon
            wx = vx - inv_tau * rx
            wy = vy - inv_tau * ry
            w_len_sq = wx * wx + wy * wy
            dot1 = wx * rx + wy * ry
            if dot1 < 0.0 and dot1 * dot1 > r_sq * w_len_sq:
                # project on the cut-off circle
                w_len = math.sqrt(w_len_sq)
                ux, uy = wx / w_len, wy / w_len
                ndir = (ux, uy)
                mag = r * inv_tau - w_len
                u = (mag * ux, mag * uy)
            else:
                # project on a leg of the cone
                leg = math.sqrt(dist_sq - r_sq)
                if rx * vy - ry * vx > 0.0:
                    dirx = (rx * leg - ry * r) / dist_sq
                    diry = (rx * r + ry * leg) / dist_sq
                else:
                    dirx = -(rx * leg + ry * r) / dist_sq
                    diry = -(-rx * r + ry * leg) / dist_sq
                dot2 = vx * dirx + vy * diry
                u = (dot2 * dirx - vx, dot2 * diry - vy)
                ndir = (-diry, dirx)
        else:
            # already colliding: escape over a single time step
            wx = vx - inv_dt * rx
            wy = vy - inv_dt * ry
            w_len = math.hypot(wx, wy)
            if w_len > _EPS:
                ux, uy = wx / w_len, wy / w_len
            else:
                d = math.sqrt(dist_sq)
                ux, uy = -rx / d, -ry / d
            ndir = (ux, uy)
            mag = r * inv_dt - w_len
            u = (mag * ux, mag * uy)
        point = (state.v_x + 0.5 * u[0], state.v_y + 0.5 * u[1])
        out.append(HalfPlaneConstraint(point=point, normal=ndir))
    return out


def _direction(con):
    # line direction whose left normal is the constraint normal
    return (con.normal[1], -con.normal[0])


def _det(ax, ay, bx, by):
    return ax * by - ay * bx


def _lp1(cons, line_no, radius, opt, direction_opt, result):
    """Optimize along the boundary line of constraint line_no."""
    line = cons[line_no]
    dirx, diry = _direction(line)
    px, py = line.point
    dot_pd = px * dirx + py * diry
    disc = dot_pd * dot_pd + radius * radius - (px * px + py * py)
    if disc < 0.0:
        return False, result
    sq = math.sqrt(disc)
    t_left = -dot_pd - sq
    t_right = -dot_pd + sq
    for j in range(line_no):
        jdirx, jdiry = _direction(cons[j])
        jpx, jpy = cons[j].point
        den = _det(dirx, diry, jdirx, jdiry)
        num = _det(jdirx, jdiry, px - jpx, py - jpy)
        if abs(den) <= _EPS:
            if num < 0.0:
                return False, result
            continue
        t = num / den
        if den >= 0.0:
            t_right = min(t_right, t)
        else:
            t_left = max(t_left, t)
        if t_left > t_right:
            return False, result
    if direction_opt:
        if opt[0] * dirx + opt[1] * diry > 0.0:
            t = t_right
        else:
            t = t_left
    else:
        t = dirx * (opt[0] - px) + diry * (opt[1] - py)
        t = min(t_right, max(t_left, t))
    return True, (px + t * dirx, py + t * diry)


def _lp2(cons, radius, opt, direction_opt):
    """Incremental 2-D LP; returns (first failing index or len, result)."""
    if direction_opt:
        result = (opt[0] * radius, opt[1] * radius)
    elif opt[0] * opt[0] + opt[1] * opt[1] > radius * radius:
        n = math.hypot(opt[0], opt[1])
        result = (opt[0] / n * radius, opt[1] / n * radius)
    else:
        result = (opt[0], opt[1])
    for i, con in enumerate(cons):
        dirx, diry = _direction(con)
        if _det(dirx, diry, con.point[0] - result[0], con.point[1] - result[1]) > 0.0:
            ok, new_result = _lp1(cons, i, radius, opt, direction_opt, result)
            if not ok:
                return i, result
            result = new_result
    return len(cons), result


def _lp3(cons, begin, radius, result):
    """Fallback: move result to minimize the largest constraint violation."""
    distance = 0.0
    for i in range(begin, len(cons)):
        dirx, diry = _direction(cons[i])
        if _det(dirx, diry, cons[i].point[0] - result[0], cons[i].point[1] - result[1]) > distance:
            proj = []
            for j in range(i):
                jdirx, jdiry = _direction(cons[j])
                det = _det(dirx, diry, jdirx, jdiry)
                if abs(det) <= _EPS:
                    if dirx * jdirx + diry * jdiry > 0.0:
                        continue
                    ppx = 0.5 * (cons[i].point[0] + cons[j].point[0])
                    ppy = 0.5 * (cons[i].point[1] + cons[j].point[1])
                else:
                    s = _det(jdirx, jdiry, cons[i].point[0] - cons[j].point[0],
                             cons[i].point[1] - cons[j].point[1]) / det
                    ppx = cons[i].point[0] + s * dirx
                    ppy = cons[i].point[1] + s * diry
                ndx = jdirx - dirx
                ndy = jdiry - diry
                nlen = math.hypot(ndx, ndy)
                if nlen <= _EPS:
                    continue
                ndx /= nlen
                ndy /= nlen
                # constraint whose boundary direction is (ndx, ndy)
                proj.append(HalfPlaneConstraint(point=(ppx, ppy), normal=(-ndy, ndx)))
            fail, new_result = _lp2(proj, radius, (-diry, dirx), True)
            if fail >= len(proj):
                result = new_result
            distance = _det(dirx, diry, cons[i].point[0] - result[0], cons[i].point[1] - result[1])
    return result


def solve_velocity_program(constraints, v_pref, v_max):
    """Closest-to-preferred velocity under the half-planes and the speed disc."""
    if v_max <= 0.0:
        raise ValueError("v_max must be positive")
    opt = (float(v_pref[0]), float(v_pref[1]))
    fail, result = _lp2(list(constraints), v_max, opt, False)
    if fail < len(constraints):
        result = _lp3(list(constraints), fail, v_max, result)
    return Action(result[0], result[1])


def _nearest_neighbors(state, neighbors, cfg):
    scored = []
    for ob in neighbors:
        d = math.hypot(ob.p_x - state.p_x, ob.p_y - state.p_y)
        if d <= cfg.sensing_range:
            scored.append((d, ob))
    scored.sort(key=lambda pair: pair[0])
    return [ob for _, ob in scored[: cfg.neighbor_count]]


def orca_policy(state, neighbors, cfg, dt):
    """ORCA step: constraints from the nearest neighbors, then the LP."""
    chosen = _nearest_neighbors(state, neighbors, cfg)
    constraints = orca_constraints(state, chosen, cfg, dt)
    v_pref = preferred_velocity(state, cfg)
    act = solve_velocity_program(constraints, v_pref, cfg.v_max)
    vx = min(ACTION_BOUND, max(-ACTION_BOUND, act.v_x))
    vy = min(ACTION_BOUND, max(-ACTION_BOUND, act.v_y))
    return Action(vx, vy)


class LinearPolicy:
    """Constant-velocity baseline; ignores every neighbor."""

    name = "linear"

    def __call__(self, state, neighbors=()):
        return linear_policy(state, neighbors)


class OrcaPolicy:
    name = "orca"

    def __init__(self, cfg=None, dt=0.25):
        self.cfg = cfg if cfg is not None else OrcaConfig()
        self.dt = dt

    def __call__(self, state, neighbors=()):
        return orca_policy(state, neighbors, self.cfg, self.dt)


class NoisyOrcaPolicy:
    """ORCA with seeded Gaussian output noise, clipped to the action box."""

    name = "noisy_orca"

    def __init__(self, cfg=None, dt=0.25, noise_std=0.1, seed=0):
        self.cfg = cfg if cfg is not None else OrcaConfig()
        self.dt = dt
        self.noise_std = noise_std
        self.rng = np.random.default_rng(seed)

    def __call__(self, state, neighbors=()):
        act = orca_policy(state, neighbors, self.cfg, self.dt)
        nx, ny = self.rng.normal(0.0, self.noise_std, size=2)
        vx = min(ACTION_BOUND, max(-ACTION_BOUND, act.v_x + nx))
        vy = min(ACTION_BOUND, max(-ACTION_BOUND, act.v_y + ny))
        return Action(vx, vy)
