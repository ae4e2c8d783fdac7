"""Command-line driver.

Subcommands: simulate, demos, train-sac, train-emp, evaluate, stats, report.
Exit codes: 0 success, 2 validation error (bad config/arguments), 3 runtime
failure inside a stage.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from .harness import (
    ConfigError,
    load_config,
    report,
    run_suite,
    run_trial_episode,
    simulate_one,
    write_stats,
)


def _parser():
    p = argparse.ArgumentParser(
        prog="empnav",
        description="Crowd-navigation simulation and human-empowerment evaluation",
    )
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, help_text):
        s = sub.add_parser(name, help=help_text)
        s.add_argument("--config", default=None, help="INI config file")
        s.add_argument("--seed", type=int, default=None, help="seed override")
        s.add_argument("--out", default=None, help="output directory")
        s.add_argument("--policy", default=None, help="policy name")
        s.add_argument("--trials", type=int, default=None, help="trial count override")
        return s

    add("simulate", "run one episode and write its trace CSV")
    d = add("demos", "collect an ORCA expert demonstration buffer")
    d.add_argument("--episodes", type=int, default=None)
    t = add("train-sac", "train the SAC robot policy and save a checkpoint")
    t.add_argument("--episodes", type=int, default=None)
    t.add_argument("--no-pretrain", action="store_true")
    e = add("train-emp", "generate traces for one policy and train its estimator")
    e.add_argument("--episodes", type=int, default=None)
    add("evaluate", "run the full trial suite (traces, estimators, stats)")
    add("stats", "recompute statistics CSVs from existing trial summaries")
    add("report", "emit tidy plot-data CSVs from evaluate artifacts")
    return p


def main(argv=None):
    args = _parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        if args.trials is not None:
            cfg.trials = args.trials
        out_dir = args.out if args.out is not None else cfg.out_dir
        handler = {
            "simulate": _cmd_simulate,
            "demos": _cmd_demos,
            "train-sac": _cmd_train_sac,
            "train-emp": _cmd_train_emp,
            "evaluate": _cmd_evaluate,
            "stats": _cmd_stats,
            "report": _cmd_report,
        }[args.command]
        return handler(cfg, args, out_dir)
    except (ConfigError, FileNotFoundError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    except Exception as err:  # runtime failure in a stage
        print(f"{args.command} failed: {err}", file=sys.stderr)
        return 3


def _cmd_simulate(cfg, args, out_dir):
    os.makedirs(out_dir, exist_ok=True)
    policy = args.policy or cfg.roster[0]
    seed = args.seed if args.seed is not None else cfg.seed_base
    path = os.path.join(out_dir, f"trace_{policy}_{seed}.csv")
    trace = simulate_one(cfg, policy, seed, path)
    print(f"{path}: {trace.termination} after {trace.n_steps} steps")
    return 0


def _cmd_demos(cfg, args, out_dir):
    from .sac import SacConfig, collect_expert_demonstrations

    os.makedirs(out_dir, exist_ok=True)
    episodes = args.episodes or cfg.sac_imitation_episodes
    seed = args.seed if args.seed is not None else cfg.sac_train_seed
    sac_cfg = _sac_config(cfg)
    buf = collect_expert_demonstrations(episodes, cfg.scenario, (seed, 0xE), sac_cfg)
    path = os.path.join(out_dir, "expert_buffer.npz")
    np.savez_compressed(
        path,
        obs=buf.obs[: len(buf)],
        act=buf.act[: len(buf)],
        rew=buf.rew[: len(buf)],
        obs2=buf.obs2[: len(buf)],
        done=buf.done[: len(buf)],
        act2=buf.act2[: len(buf)],
    )
    print(f"{path}: {len(buf)} transitions from {episodes} episodes")
    return 0


def _sac_config(cfg):
    from .sac import SacConfig

    return SacConfig(
        n_neighbors=cfg.orca.neighbor_count,
        goal_weight=cfg.sac_goal_weight,
        r_int=cfg.sac_r_int,
        imitation_episodes=cfg.sac_imitation_episodes,
        imitation_steps=cfg.sac_imitation_steps,
        warmup_steps=cfg.sac_warmup_steps,
    )


def _cmd_train_sac(cfg, args, out_dir):
    from .sac import save_sac, train, write_train_log

    episodes = args.episodes or cfg.sac_train_episodes
    seed = args.seed if args.seed is not None else cfg.sac_train_seed
    sac_cfg = _sac_config(cfg)
    result = train(
        cfg.scenario, sac_cfg, seed=seed, episodes=episodes,
        pretrain=not args.no_pretrain,
    )
    save_sac(out_dir, result.nets, cfg.scenario, sac_cfg, seed, episodes)
    write_train_log(os.path.join(out_dir, "train_log.csv"), result.log)
    recent = result.log[-50:]
    rate = sum(r.success for r in recent) / max(1, len(recent))
    print(f"{out_dir}: {episodes} episodes, last-50 success {rate:.2f}")
    return 0


def _cmd_train_emp(cfg, args, out_dir):
    from .empowerment import dataset_from_traces, save_estimator, train_estimator

    policy = args.policy or cfg.roster[0]
    episodes = args.episodes or cfg.trials
    sac_nets = None
    if policy == "sac":
        from .harness import _load_sac_nets

        sac_nets = _load_sac_nets(cfg)
    traces = [
        run_trial_episode(cfg, policy, cfg.scenario.n_humans, i, sac_nets=sac_nets)
        for i in range(episodes)
    ]
    Z, A, ZN = dataset_from_traces(traces, cfg.grid, k=cfg.k, include_parked=cfg.include_parked)
    nets, _ = train_estimator(Z, A, ZN, cfg.estimator, seed=(cfg.estimator_seed, 0))
    save_estimator(out_dir, nets, meta={"policy": policy, "config_hash": cfg.config_hash()})
    print(f"{out_dir}: estimator trained on {len(Z)} triples from {episodes} episodes")
    return 0


def _cmd_evaluate(cfg, args, out_dir):
    path = run_suite(cfg, out_dir=out_dir)
    print(f"{path}: evaluation artifacts written")
    return 0


def _cmd_stats(cfg, args, out_dir):
    from .stats import SampleGroup

    summaries = os.path.join(out_dir, "trial_summaries.csv")
    if not os.path.exists(summaries):
        raise FileNotFoundError(f"no trial summaries at {summaries}")
    groups = {}
    with open(summaries) as fh:
        header = None
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if header is None:
                header = line.split(",")
                continue
            row = dict(zip(header, line.split(",")))
            if int(row["n_humans"]) != cfg.scenario.n_humans:
                continue
            groups.setdefault(row["policy"], []).append(float(row["mean_empowerment"]))
    groups = {k: SampleGroup(k, np.array(v)) for k, v in groups.items()}
    write_stats(out_dir, cfg, groups)
    print(f"{out_dir}: statistics written for {len(groups)} groups")
    return 0


def _cmd_report(cfg, args, out_dir):
    path = report(cfg, artifact_dir=out_dir, out_dir=out_dir)
    print(f"{path}: report CSVs written")
    return 0


if __name__ == "__main__":
    sys.exit(main())
