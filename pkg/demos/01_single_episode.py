"""Run one circle-crossing episode and print what happened.

A robot driven by ORCA crosses a crowd of five ORCA pedestrians. The humans do
not react to the robot (the evaluation convention), so the robot has to do all
the avoiding itself.
"""

import numpy as np

from empnav.policies import OrcaConfig, OrcaPolicy
from empnav.simulation import ScenarioConfig, run_episode

scenario = ScenarioConfig(n_humans=5)
orca = OrcaPolicy(OrcaConfig(), dt=scenario.dt)

world = scenario.spawn(seed=3)
print(f"spawned {len(world.humans)} humans on a circle of radius {scenario.circle_radius} m")

trace = run_episode(
    world, orca, orca, scenario.max_steps, d_disc=scenario.d_discomfort
)
print(f"episode ended: {trace.termination} after {trace.n_steps} steps "
      f"({trace.n_steps * scenario.dt:.1f} s)")
print(f"collision events: {trace.collision_count()}")

arrivals = trace.human_arrival_steps()
for k, t in enumerate(arrivals):
    status = f"arrived at step {t}" if t is not None else "still en route"
    print(f"  human {k}: {status}")

print("\nrobot track (every 8 steps):")
for t in range(0, trace.n_steps + 1, 8):
    r = trace.snapshots[t].robot
    disc = "discomfort" if trace.discomfort[t][0] else ""
    print(f"  t={t:3d}  p=({r.p_x:+5.2f},{r.p_y:+5.2f})  "
          f"|v|={np.hypot(r.v_x, r.v_y):.2f}  d_goal={r.goal_distance():.2f} {disc}")

print(f"\nmean step reward: {np.mean(trace.rewards):+.2f} "
      f"(distance term dominates until the terminal bonus)")
