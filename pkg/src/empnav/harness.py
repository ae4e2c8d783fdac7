"""Experiment driver: seeded trial batches, estimator training, stats, CSV output.

Configuration is a flat INI file (key = value under [section] headers); every
key has a default so an empty file is a valid config. All artifacts are CSV
with a mandatory header and a leading `# config_hash=` provenance comment;
writes are deterministic, so identical configs give byte-identical outputs.

Seed discipline: trial i of every policy spawns its world from seed_base + i
(paired crowds across policies); Monte-Carlo estimation seeds derive from a
separate stream keyed by (seed_base, policy, size, trial).
"""

from __future__ import annotations

import configparser
import hashlib
import os
from dataclasses import dataclass, field

import numpy as np

from .empowerment import (
    EstimatorConfig,
    dataset_from_traces,
    mean_empowerment,
    save_estimator,
    train_estimator,
)
from .occupancy import GridSpec
from .policies import LinearPolicy, NoisyOrcaPolicy, OrcaConfig, OrcaPolicy
from .sac import SacPolicy, load_sac
from .simulation import ScenarioConfig, run_episode, trace_to_csv
from .stats import (
    DegenerateSampleError,
    SampleGroup,
    dunn_posthoc,
    kruskal_wallis,
    shapiro_wilk,
)

KNOWN_POLICIES = ("linear", "orca", "sac", "noisy_orca")


class ConfigError(ValueError):
    """Invalid or inconsistent experiment configuration."""


@dataclass
class ExperimentConfig:
    scenario: ScenarioConfig = field(default_factory=ScenarioConfig)
    orca: OrcaConfig = field(default_factory=OrcaConfig)
    grid: GridSpec = field(default_factory=GridSpec)
    k: int = 1
    include_parked: bool = False
    roster: tuple = ("linear", "orca")
    sac_checkpoint: str = ""
    noisy_orca_std: float = 0.1
    trials: int = 100
    seed_base: int = 0
    estimator: EstimatorConfig = field(default_factory=EstimatorConfig)
    estimator_seed: int = 7
    density_sizes: tuple = ()
    alpha: float = 0.05
    out_dir: str = "out"
    sac_train_episodes: int = 2000
    sac_train_seed: int = 777
    sac_goal_weight: float = 0.1
    sac_r_int: float = 0.0
    sac_imitation_episodes: int = 100
    sac_imitation_steps: int = 3000
    sac_warmup_steps: int = 1000

    def sizes(self):
        """Crowd sizes evaluated; the scenario's n_humans always comes first."""
        sizes = [self.scenario.n_humans]
        for s in self.density_sizes:
            if s not in sizes:
                sizes.append(s)
        return sizes

    def canonical_dump(self):
        lines = []
        for name, obj in (
            ("scenario", self.scenario),
            ("orca", self.orca),
            ("grid", self.grid),
            ("estimator", self.estimator),
        ):
            for key in sorted(vars(obj) if hasattr(obj, "__dict__") else obj.__dataclass_fields__):
                lines.append(f"{name}.{key}={getattr(obj, key)!r}")
        for key in (
            "k", "include_parked", "roster", "sac_checkpoint", "noisy_orca_std",
            "trials", "seed_base", "estimator_seed", "density_sizes", "alpha",
            "sac_train_episodes", "sac_train_seed", "sac_goal_weight", "sac_r_int",
            "sac_imitation_episodes", "sac_imitation_steps", "sac_warmup_steps",
        ):
            lines.append(f"{key}={getattr(self, key)!r}")
        return "\n".join(lines)

    def config_hash(self):
        return hashlib.sha256(self.canonical_dump().encode()).hexdigest()[:16]


def _get(parser, section, key, fallback, cast):
    if not parser.has_section(section) or not parser.has_option(section, key):
        return fallback
    raw = parser.get(section, key).strip()
    if raw == "":
        return fallback
    if cast is bool:
        return raw.lower() in ("1", "true", "yes", "on")
    return cast(raw)


def _int_list(raw):
    return tuple(int(tok) for tok in raw.replace(",", " ").split())


def load_config(path=None):
    """Parse an INI config file; missing file or keys fall back to defaults."""
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    if path is not None:
        if not os.path.exists(path):
            raise ConfigError(f"config file not found: {path}")
        try:
            parser.read(path, encoding="utf-8")
        except configparser.Error as err:
            raise ConfigError(f"cannot parse config: {err}")
    try:
        scenario = ScenarioConfig(
            n_humans=_get(parser, "scenario", "n_humans", 5, int),
            circle_radius=_get(parser, "scenario", "circle_radius", 4.0, float),
            dt=_get(parser, "scenario", "dt", 0.25, float),
            max_steps=_get(parser, "scenario", "max_steps", 100, int),
            agent_radius=_get(parser, "scenario", "agent_radius", 0.3, float),
            v_ref=_get(parser, "scenario", "v_ref", 1.0, float),
            jitter_deg=_get(parser, "scenario", "jitter_deg", 35.0, float),
            spawn_margin=_get(parser, "scenario", "spawn_margin", 0.3, float),
            d_discomfort=_get(parser, "scenario", "d_discomfort", 0.2, float),
            robot_visible=_get(parser, "scenario", "robot_visible", False, bool),
        )
        orca = OrcaConfig(
            time_horizon=_get(parser, "orca", "time_horizon", 5.0, float),
            safety_space=_get(parser, "orca", "safety_space", 0.0, float),
            v_max=_get(parser, "orca", "v_max", 1.0, float),
            neighbor_count=_get(parser, "orca", "neighbor_count", 5, int),
            sensing_range=_get(parser, "orca", "sensing_range", 10.0, float),
            symmetry_bias=_get(parser, "orca", "symmetry_bias", 1e-6, float),
        )
        grid = GridSpec(
            rows=_get(parser, "grid", "rows", 4, int),
            cols=_get(parser, "grid", "cols", 4, int),
            cell_size=_get(parser, "grid", "cell_size", 1.0, float),
        )
        hidden = _int_list(_get(parser, "estimator", "hidden", "64,64", str))
        estimator = EstimatorConfig(
            hidden=hidden,
            lr=_get(parser, "estimator", "learning_rate", 3e-4, float),
            batch_size=_get(parser, "estimator", "batch_size", 256, int),
            train_steps=_get(parser, "estimator", "train_steps", 6000, int),
            lambda_entropy=_get(parser, "estimator", "lambda_entropy", 0.01, float),
            n_samples=_get(parser, "estimator", "n_samples", 32, int),
        )
        roster_raw = _get(parser, "policies", "roster", "linear, orca", str)
        roster = tuple(tok.strip() for tok in roster_raw.split(",") if tok.strip())
        cfg = ExperimentConfig(
            scenario=scenario,
            orca=orca,
            grid=grid,
            k=_get(parser, "grid", "k", 1, int),
            include_parked=_get(parser, "grid", "include_parked", False, bool),
            roster=roster,
            sac_checkpoint=_get(parser, "policies", "sac_checkpoint", "", str),
            noisy_orca_std=_get(parser, "policies", "noisy_orca_std", 0.1, float),
            trials=_get(parser, "trials", "count", 100, int),
            seed_base=_get(parser, "trials", "seed_base", 0, int),
            estimator=estimator,
            estimator_seed=_get(parser, "estimator", "seed", 7, int),
            density_sizes=_int_list(_get(parser, "scenario", "density_sizes", "", str)),
            alpha=_get(parser, "stats", "alpha", 0.05, float),
            out_dir=_get(parser, "output", "directory", "out", str),
            sac_train_episodes=_get(parser, "sac", "train_episodes", 2000, int),
            sac_train_seed=_get(parser, "sac", "train_seed", 777, int),
            sac_goal_weight=_get(parser, "sac", "goal_weight", 0.1, float),
            sac_r_int=_get(parser, "sac", "r_int", 0.0, float),
            sac_imitation_episodes=_get(parser, "sac", "imitation_episodes", 100, int),
            sac_imitation_steps=_get(parser, "sac", "imitation_steps", 3000, int),
            sac_warmup_steps=_get(parser, "sac", "warmup_steps", 1000, int),
        )
    except (ValueError, TypeError) as err:
        raise ConfigError(str(err))
    validate_config(cfg)
    return cfg


def validate_config(cfg):
    if cfg.trials < 1:
        raise ConfigError("trials must be >= 1")
    if not cfg.roster:
        raise ConfigError("policy roster is empty")
    for name in cfg.roster:
        if name not in KNOWN_POLICIES:
            raise ConfigError(f"unknown policy {name!r}; choose from {KNOWN_POLICIES}")
    if cfg.k < 1:
        raise ConfigError("grid k must be >= 1")


def make_policy(name, cfg, trial_seed=0, sac_nets=None):
    """Fresh policy instance for one episode (seeded where stochastic)."""
    if name == "linear":
        return LinearPolicy()
    if name == "orca":
        return OrcaPolicy(cfg.orca, dt=cfg.scenario.dt)
    if name == "noisy_orca":
        return NoisyOrcaPolicy(
            cfg.orca, dt=cfg.scenario.dt, noise_std=cfg.noisy_orca_std,
            seed=(trial_seed, 0xA0),
        )
    if name == "sac":
        if sac_nets is None:
            raise ConfigError("sac policy requested but no checkpoint is loaded")
        return SacPolicy(sac_nets.actor, n_neighbors=cfg.orca.neighbor_count)
    raise ConfigError(f"unknown policy {name!r}")


def _load_sac_nets(cfg):
    if "sac" not in cfg.roster:
        return None
    if not cfg.sac_checkpoint:
        raise ConfigError("roster includes sac but sac_checkpoint is not set")
    if not os.path.isdir(cfg.sac_checkpoint):
        raise ConfigError(f"sac checkpoint directory not found: {cfg.sac_checkpoint}")
    nets, _ = load_sac(cfg.sac_checkpoint)
    return nets


def run_trial_episode(cfg, policy_name, n_humans, trial, sac_nets=None):
    scenario = ScenarioConfig(
        n_humans=n_humans,
        circle_radius=cfg.scenario.circle_radius,
        dt=cfg.scenario.dt,
        max_steps=cfg.scenario.max_steps,
        agent_radius=cfg.scenario.agent_radius,
        v_ref=cfg.scenario.v_ref,
        jitter_deg=cfg.scenario.jitter_deg,
        spawn_margin=cfg.scenario.spawn_margin,
        d_discomfort=cfg.scenario.d_discomfort,
        robot_visible=cfg.scenario.robot_visible,
    )
    world = scenario.spawn(cfg.seed_base + trial)
    robot = make_policy(policy_name, cfg, trial_seed=cfg.seed_base + trial, sac_nets=sac_nets)
    human = OrcaPolicy(cfg.orca, dt=scenario.dt)
    return run_episode(
        world,
        robot,
        human,
        scenario.max_steps,
        d_disc=scenario.d_discomfort,
        robot_visible=scenario.robot_visible,
    )


@dataclass
class TrialSummary:
    seed: int
    policy: str
    n_humans: int
    mean_empowerment: float
    success: bool
    termination: str
    steps: int
    collisions: int
    discomfort_fraction: float


def _discomfort_fraction(trace):
    if not trace.discomfort:
        return 0.0
    flagged = sum(1 for flags in trace.discomfort if any(flags[1:]))
    return flagged / len(trace.discomfort)


def _g9(x):
    return f"{x:.9g}"


class _Csv:
    def __init__(self, path, header, config_hash):
        self.fh = open(path, "w")
        self.fh.write(f"# config_hash={config_hash}\n")
        self.fh.write(header + "\n")

    def row(self, *cells):
        self.fh.write(",".join(str(c) for c in cells) + "\n")

    def close(self):
        self.fh.close()


def run_suite(cfg, out_dir=None):
    """Full evaluation: traces, estimators, empowerment records, stats, CSVs.

    Returns the artifact directory. Per policy: generate paired-seed traces for
    every crowd size, train that policy's estimator on the pooled dataset,
    then score every trace. Statistics run on the primary-size groups.
    """
    out = out_dir if out_dir is not None else cfg.out_dir
    os.makedirs(out, exist_ok=True)
    chash = cfg.config_hash()
    sac_nets = _load_sac_nets(cfg)
    sizes = cfg.sizes()

    summaries = []
    emp_csv = _Csv(
        os.path.join(out, "empowerment.csv"),
        "trial_seed,policy,n_humans,human_id,t,empowerment,discomfort",
        chash,
    )
    groups = {}
    for p_idx, policy_name in enumerate(cfg.roster):
        traces = {}
        for size in sizes:
            traces[size] = [
                run_trial_episode(cfg, policy_name, size, i, sac_nets=sac_nets)
                for i in range(cfg.trials)
            ]
        all_traces = [tr for size in sizes for tr in traces[size]]
        Z, A, ZN = dataset_from_traces(
            all_traces, cfg.grid, k=cfg.k, include_parked=cfg.include_parked
        )
        nets, _ = train_estimator(
            Z, A, ZN, cfg.estimator, seed=(cfg.estimator_seed, p_idx)
        )
        save_estimator(
            os.path.join(out, "estimators", policy_name),
            nets,
            meta={"policy": policy_name, "config_hash": chash},
        )
        for size in sizes:
            values = []
            for i, trace in enumerate(traces[size]):
                record = mean_empowerment(
                    trace,
                    nets,
                    cfg.grid,
                    n_samples=cfg.estimator.n_samples,
                    seed=(cfg.seed_base, p_idx, size, i, 0xAC),
                    k=cfg.k,
                    include_parked=cfg.include_parked,
                )
                seed = cfg.seed_base + i
                for h, (ts, est) in enumerate(record.per_human):
                    for t, e in zip(ts, est):
                        disc = int(trace.discomfort[t][h + 1])
                        emp_csv.row(seed, policy_name, size, h, t, _g9(e), disc)
                summaries.append(
                    TrialSummary(
                        seed=seed,
                        policy=policy_name,
                        n_humans=size,
                        mean_empowerment=record.mean_empowerment,
                        success=trace.success,
                        termination=trace.termination,
                        steps=trace.n_steps,
                        collisions=trace.collision_count(),
                        discomfort_fraction=_discomfort_fraction(trace),
                    )
                )
                values.append(record.mean_empowerment)
            if size == cfg.scenario.n_humans:
                groups[policy_name] = SampleGroup(policy_name, np.array(values))
    emp_csv.close()

    sm = _Csv(
        os.path.join(out, "trial_summaries.csv"),
        "trial_seed,policy,n_humans,mean_empowerment,success,termination,steps,collisions,discomfort_fraction",
        chash,
    )
    for s in summaries:
        sm.row(
            s.seed, s.policy, s.n_humans, _g9(s.mean_empowerment), int(s.success),
            s.termination, s.steps, s.collisions, _g9(s.discomfort_fraction),
        )
    sm.close()

    sr = _Csv(
        os.path.join(out, "success_rates.csv"),
        "policy,n_humans,trials,success_rate",
        chash,
    )
    for policy_name in cfg.roster:
        for size in sizes:
            wins = sum(
                1 for s in summaries
                if s.policy == policy_name and s.n_humans == size and s.success
            )
            sr.row(policy_name, size, cfg.trials, _g9(wins / cfg.trials))
    sr.close()

    write_stats(out, cfg, groups)
    return out


def write_stats(out, cfg, groups):
    """Shapiro-Wilk per policy, Kruskal-Wallis omnibus, Dunn pairwise matrix.

    Groups too small for a test (n < 3) or degenerate produce nan rows or
    header-only files rather than failing the suite.
    """
    chash = cfg.config_hash()
    sw = _Csv(os.path.join(out, "stats_shapiro.csv"), "policy,n,statistic,p_value", chash)
    for name, g in groups.items():
        try:
            res = shapiro_wilk(g.values)
            sw.row(name, g.n, _g9(res.statistic), _g9(res.p_value))
        except (DegenerateSampleError, ValueError):
            sw.row(name, g.n, "nan", "nan")
    sw.close()

    ordered = list(groups.values())
    testable = len(ordered) >= 2 and all(g.n >= 3 for g in ordered)
    kw = _Csv(os.path.join(out, "stats_kruskal.csv"), "statistic,p_value,n_groups", chash)
    if testable:
        res = kruskal_wallis(ordered)
        kw.row(_g9(res.statistic), _g9(res.p_value), len(ordered))
    kw.close()

    dn = _Csv(os.path.join(out, "stats_dunn.csv"), "policy_a,policy_b,p_value", chash)
    if testable:
        matrix = dunn_posthoc(ordered)
        for i, gi in enumerate(ordered):
            for j, gj in enumerate(ordered):
                if i < j:
                    dn.row(gi.label, gj.label, _g9(matrix[i, j]))
    dn.close()


def _read_csv(path):
    with open(path) as fh:
        lines = [ln.rstrip("\n") for ln in fh if not ln.startswith("#")]
    header = lines[0].split(",")
    rows = [dict(zip(header, ln.split(","))) for ln in lines[1:]]
    return rows


def report(cfg, artifact_dir=None, out_dir=None):
    """Tidy plot-data CSVs derived from run_suite artifacts."""
    art = artifact_dir if artifact_dir is not None else cfg.out_dir
    out = out_dir if out_dir is not None else art
    summaries_path = os.path.join(art, "trial_summaries.csv")
    emp_path = os.path.join(art, "empowerment.csv")
    if not os.path.exists(summaries_path) or not os.path.exists(emp_path):
        raise FileNotFoundError(f"run_suite artifacts missing under {art}")
    os.makedirs(out, exist_ok=True)
    chash = cfg.config_hash()
    summaries = _read_csv(summaries_path)
    emp_rows = _read_csv(emp_path)
    primary = cfg.scenario.n_humans

    # per-policy, per-trial, per-t mean over humans, at the primary size
    by_policy_t = {}
    for r in emp_rows:
        if int(r["n_humans"]) != primary:
            continue
        key = (r["policy"], int(r["trial_seed"]), int(r["t"]))
        by_policy_t.setdefault(key, []).append(float(r["empowerment"]))
    series = {}
    for (policy, seed, t), vals in by_policy_t.items():
        series.setdefault((policy, t), []).append(float(np.mean(vals)))
    tv = _Csv(os.path.join(out, "report_emp_vs_time.csv"), "policy,t,mean,std,n_trials", chash)
    for policy in cfg.roster:
        ts = sorted(t for (p, t) in series if p == policy)
        for t in ts:
            vals = np.array(series[(policy, t)])
            tv.row(policy, t, _g9(float(vals.mean())), _g9(float(vals.std())), len(vals))
    tv.close()

    dens = {}
    for r in summaries:
        dens.setdefault((r["policy"], int(r["n_humans"])), []).append(
            float(r["mean_empowerment"])
        )
    dv = _Csv(
        os.path.join(out, "report_emp_vs_density.csv"),
        "policy,n_humans,mean_empowerment,n_trials",
        chash,
    )
    for policy in cfg.roster:
        for size in cfg.sizes():
            vals = dens.get((policy, size))
            if vals:
                dv.row(policy, size, _g9(float(np.mean(vals))), len(vals))
    dv.close()

    vi = _Csv(
        os.path.join(out, "report_violin.csv"),
        "policy,trial_seed,mean_empowerment",
        chash,
    )
    for r in summaries:
        if int(r["n_humans"]) == primary:
            vi.row(r["policy"], r["trial_seed"], r["mean_empowerment"])
    vi.close()

    # empowerment vs discomfort for the first trial seed of each policy
    chosen = cfg.seed_base
    dc = _Csv(
        os.path.join(out, "report_emp_vs_discomfort.csv"),
        "policy,t,empowerment,discomfort",
        chash,
    )
    for policy in cfg.roster:
        per_t = {}
        disc_t = {}
        for r in emp_rows:
            if r["policy"] != policy or int(r["trial_seed"]) != chosen:
                continue
            if int(r["n_humans"]) != primary:
                continue
            t = int(r["t"])
            per_t.setdefault(t, []).append(float(r["empowerment"]))
            disc_t[t] = max(disc_t.get(t, 0), int(r["discomfort"]))
        for t in sorted(per_t):
            dc.row(policy, t, _g9(float(np.mean(per_t[t]))), disc_t[t])
    dc.close()
    return out


def simulate_one(cfg, policy_name, seed, out_path):
    """Run one seeded episode and write its trace CSV."""
    sac_nets = _load_sac_nets(cfg) if policy_name == "sac" else None
    world = cfg.scenario.spawn(seed)
    robot = make_policy(policy_name, cfg, trial_seed=seed, sac_nets=sac_nets)
    human = OrcaPolicy(cfg.orca, dt=cfg.scenario.dt)
    trace = run_episode(
        world,
        robot,
        human,
        cfg.scenario.max_steps,
        d_disc=cfg.scenario.d_discomfort,
        robot_visible=cfg.scenario.robot_visible,
    )
    with open(out_path, "w") as fh:
        trace_to_csv(trace, fh)
    return trace
