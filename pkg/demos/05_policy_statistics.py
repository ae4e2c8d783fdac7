"""Small end-to-end evaluation: two policies, paired seeds, rank statistics.

Runs the full harness at toy scale (20 trials, linear vs ORCA), prints the
success table and Mean Empowerment distributions, then the Shapiro-Wilk,
Kruskal-Wallis, and Dunn results from the emitted CSVs. With a SAC checkpoint
available, add "sac" to the roster for the three-policy comparison.
"""

import os
import tempfile

from empnav.harness import load_config, report, run_suite

cfg = load_config(None)
cfg.roster = ("linear", "orca")
cfg.trials = 20
cfg.estimator.train_steps = 2000
cfg.estimator.n_samples = 16
cfg.out_dir = os.path.join(tempfile.mkdtemp(prefix="empnav_demo_"), "eval")

print(f"running {cfg.trials} paired trials for {cfg.roster} "
      f"({cfg.scenario.n_humans} humans)...")
out = run_suite(cfg)
report(cfg, artifact_dir=out)


def show(name, limit=None):
    print(f"\n--- {name}")
    lines = open(os.path.join(out, name)).read().strip().split("\n")
    for line in lines[1 : (limit + 1) if limit else None]:
        print(" ", line)


show("success_rates.csv")
show("stats_shapiro.csv")
show("stats_kruskal.csv")
show("stats_dunn.csv")
show("report_emp_vs_density.csv")
show("report_violin.csv", limit=8)
print(f"\nall artifacts under {out}")
