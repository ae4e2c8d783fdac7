"""Empowerment over the course of an episode: the congestion dip.

Fit the estimator to homogeneous all-ORCA episodes, then score a fresh episode
step by step. Empowerment starts near zero while agents are spread out, dips
as everyone converges on the circle center, and recovers as the crowd clears;
the binary discomfort flag only spikes at close encounters.
"""

import numpy as np

from empnav.empowerment import (
    EstimatorConfig,
    dataset_from_traces,
    episode_series,
    mean_empowerment,
    train_estimator,
)
from empnav.occupancy import GridSpec
from empnav.policies import OrcaConfig, OrcaPolicy
from empnav.simulation import ScenarioConfig, run_episode

scenario = ScenarioConfig(n_humans=5, robot_visible=True, max_steps=150)
orca = OrcaPolicy(OrcaConfig(), dt=scenario.dt)
spec = GridSpec()

print("generating 60 training episodes...")
traces = [
    run_episode(scenario.spawn(10_000 + s), orca, orca, scenario.max_steps,
                robot_visible=True)
    for s in range(60)
]
Z, A, ZN = dataset_from_traces(traces, spec)
print(f"fitting estimator on {len(Z)} (z, a, z') triples...")
nets, _ = train_estimator(Z, A, ZN, EstimatorConfig(train_steps=4000), seed=7)

trace = run_episode(scenario.spawn(0), orca, orca, scenario.max_steps, robot_visible=True)
record = mean_empowerment(trace, nets, spec, n_samples=32, seed=77)
series = episode_series(record, len(trace.snapshots))

print(f"\nepisode of {trace.n_steps} steps, Mean Empowerment {record.mean_empowerment:+.3f}")
print("t    empowerment   discomfort")
scale = 30
lo, hi = np.nanmin(series), np.nanmax(series)
for t in range(0, len(series), 2):
    if np.isnan(series[t]):
        continue
    bar = int((series[t] - lo) / (hi - lo + 1e-9) * scale)
    disc = "*" if any(trace.discomfort[t][1:]) else ""
    print(f"{t:3d}  {series[t]:+7.3f} {'#' * bar:<{scale}} {disc}")

thirds = np.array_split(series[~np.isnan(series)], 3)
print("\nsegment means:", " -> ".join(f"{seg.mean():+.3f}" for seg in thirds))
