"""Poke at the ORCA machinery directly: half-planes and the velocity LP.

Two agents approach head-on; we print the constraint each builds, solve the
velocity program, and confirm the chosen velocities are mirror images and
avoid the collision cone.
"""

import numpy as np

from empnav.policies import (
    OrcaConfig,
    orca_constraints,
    preferred_velocity,
    solve_velocity_program,
)
from empnav.simulation import AgentState, observe

cfg = OrcaConfig(symmetry_bias=0.0)
left = AgentState(-2.0, 0.0, 1.0, 0.0, 0.3, 2.0, 0.0, 1.0, 0.0)
right = AgentState(2.0, 0.0, -1.0, 0.0, 0.3, -2.0, 0.0, 1.0, 0.0)

for name, me, other in (("left", left, right), ("right", right, left)):
    (con,) = orca_constraints(me, [observe(other)], cfg, dt=0.25)
    print(f"{name} agent half-plane: point=({con.point[0]:+.3f},{con.point[1]:+.3f}) "
          f"normal=({con.normal[0]:+.3f},{con.normal[1]:+.3f})")
    v_pref = preferred_velocity(me, cfg)
    act = solve_velocity_program([con], v_pref, cfg.v_max)
    print(f"  v_pref=({v_pref[0]:+.3f},{v_pref[1]:+.3f}) -> "
          f"chosen=({act.v_x:+.3f},{act.v_y:+.3f}) "
          f"permitted={con.permits((act.v_x, act.v_y), tol=1e-9)}")

# the LP against a brute-force scan on a random constraint set
rng = np.random.default_rng(0)
cons = []
for _ in range(4):
    point = tuple(rng.uniform(-0.8, 0.8, 2))
    n = rng.normal(size=2)
    n /= np.linalg.norm(n)
    cons.append(type(con)(point=point, normal=tuple(n)))
v_pref = np.array([0.9, -0.3])
act = solve_velocity_program(cons, v_pref, 1.0)

res = 2e-3
xs = np.arange(-1, 1 + res / 2, res)
X, Y = np.meshgrid(xs, xs)
inside = X**2 + Y**2 <= 1.0
feas = inside.copy()
for c in cons:
    feas &= ((X - c.point[0]) * c.normal[0] + (Y - c.point[1]) * c.normal[1]) >= 0
print("\nrandom 4-constraint instance:")
if feas.any():
    d2 = (X - v_pref[0]) ** 2 + (Y - v_pref[1]) ** 2
    d2[~feas] = np.inf
    i = np.unravel_index(np.argmin(d2), d2.shape)
    print(f"  LP solution   ({act.v_x:+.4f},{act.v_y:+.4f})")
    print(f"  grid solution ({X[i]:+.4f},{Y[i]:+.4f})  (2e-3 resolution)")
else:
    # jointly infeasible: both solvers fall back to least-violation
    viol = np.zeros_like(X)
    for c in cons:
        v = -((X - c.point[0]) * c.normal[0] + (Y - c.point[1]) * c.normal[1])
        viol = np.maximum(viol, np.maximum(v, 0.0))
    viol[~inside] = np.inf
    best = float(viol[inside].min())
    mine = max(c.violation((act.v_x, act.v_y)) for c in cons)
    print(f"  infeasible set: LP max violation {mine:.4f}, grid best {best:.4f}")
