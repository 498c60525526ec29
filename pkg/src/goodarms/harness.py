"""Seeded, parallel experiment runner with CSV output.

A config describes one experiment: an algorithm, an instance (built-in
generator or instance file), problem parameters and a repetition count.
Run i uses seed ``base_seed + i``, so every run is reproducible in
isolation and results do not depend on the parallelism width; rows are
keyed by run index regardless of completion order.

runs.csv columns (exact order)::

    experiment_id, algorithm, n, m, k, rho, epsilon, delta, scheme,
    h_star_mode, seed, run_index, samples, rounds, mistake,
    pulls_b1, pulls_b2, pulls_b3

Inapplicable fields hold the empty string (e.g. rho for finite runs).
Every run is verified against the ground-truth oracles at epsilon exactly;
the mistake column is that diagnostic verdict.
"""

from __future__ import annotations

import csv
import json
import statistics
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass

from .analysis import top_rho_eps, verify_run
from .bounds import SCHEMES
from .core import (ContinuousReservoir, FiniteBandit, Tally, UniformMeanLaw,
                   UsageError, make_linear_instance, make_lower_bound_instance,
                   make_two_level_reservoir)
from .finite import H_STAR_MODES, f2, lucb_km
from .infinite import QuantileProblem, k_independent_qp, kqp1, opt_qp, p3
from .instancefile import load_instance
from .rng import RngStream

FINITE_ALGORITHMS = ("lucb_km", "f2")
INFINITE_ALGORITHMS = ("p3", "kqp1", "opt_qp", "k_independent_qp")
ALGORITHMS = FINITE_ALGORITHMS + INFINITE_ALGORITHMS

RUNS_COLUMNS = (
    "experiment_id", "algorithm", "n", "m", "k", "rho", "epsilon", "delta",
    "scheme", "h_star_mode", "seed", "run_index", "samples", "rounds",
    "mistake", "pulls_b1", "pulls_b2", "pulls_b3",
)

GROUP_KEYS = ("algorithm", "n", "m", "k", "rho", "epsilon", "delta",
              "scheme", "h_star_mode")

SUMMARY_COLUMNS = GROUP_KEYS + (
    "runs", "mean_samples", "stderr_samples", "mistake_rate",
    "frac_b1", "frac_b2", "frac_b3",
)

PRESETS = ("fig1", "fig2", "fig3")


@dataclass(frozen=True)
class ExperimentConfig:
    """One experiment: algorithm, instance, parameters, repetitions."""

    experiment_id: str
    algorithm: str
    instance: dict
    epsilon: float
    delta: float
    k: int | None = None
    m: int | None = None
    rho: float | None = None
    scheme: str = "kl"
    h_star_mode: str = "argmin"
    qf_solver: str = "lucb_km"
    runs: int = 100
    base_seed: int = 0
    parallelism: int = 1

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "ExperimentConfig":
        data = json.loads(text)
        unknown = set(data) - {f for f in cls.__dataclass_fields__}
        if unknown:
            raise UsageError(f"unknown config fields: {sorted(unknown)}")
        return cls(**data)


def build_instance(spec: dict):
    """Build a finite instance or reservoir from a config instance spec."""
    if not isinstance(spec, dict):
        raise UsageError("instance spec must be a mapping")
    if "file" in spec:
        return load_instance(spec["file"])
    gen = spec.get("generator")
    args = {k: v for k, v in spec.items() if k != "generator"}
    if gen == "linear":
        return make_linear_instance(int(args.pop("n")))
    if gen == "lower_bound":
        return make_lower_bound_instance(
            int(args.pop("n")), int(args.pop("m")), int(args.pop("k")),
            float(args.pop("epsilon")), args.pop("included"))
    if gen == "two_level":
        return make_two_level_reservoir(
            int(args.pop("n")), float(args.pop("top_fraction")),
            float(args.pop("mu_top")), float(args.pop("mu_bottom")))
    if gen == "uniform_reservoir":
        return ContinuousReservoir(UniformMeanLaw(
            float(args.pop("low", 0.0)), float(args.pop("high", 1.0))))
    raise UsageError(f"unknown instance generator {gen!r}")


def validate_config(config: ExperimentConfig) -> None:
    """Field-level validation; raises UsageError naming the bad field."""
    if not config.experiment_id:
        raise UsageError("experiment_id: must be nonempty")
    if config.algorithm not in ALGORITHMS:
        raise UsageError(f"algorithm: {config.algorithm!r} not in {ALGORITHMS}")
    if not 0.0 < config.epsilon <= 1.0:
        raise UsageError("epsilon: must lie in (0, 1]")
    if not 0.0 < config.delta <= 1.0:
        raise UsageError("delta: must lie in (0, 1]")
    if config.runs < 1:
        raise UsageError("runs: must be >= 1")
    if config.parallelism < 1:
        raise UsageError("parallelism: must be >= 1")
    if config.scheme not in SCHEMES:
        raise UsageError(f"scheme: {config.scheme!r} not in {SCHEMES}")
    if config.h_star_mode not in H_STAR_MODES:
        raise UsageError(f"h_star_mode: {config.h_star_mode!r} not in {H_STAR_MODES}")
    if config.algorithm in FINITE_ALGORITHMS:
        if config.m is None:
            raise UsageError("m: required for finite algorithms")
        if config.algorithm == "lucb_km" and config.k is None:
            raise UsageError("k: required for lucb_km")
    else:
        if config.rho is None:
            raise UsageError("rho: required for reservoir algorithms")
        if config.algorithm in ("kqp1", "k_independent_qp") and config.k is None:
            raise UsageError(f"k: required for {config.algorithm}")
        if config.qf_solver not in FINITE_ALGORITHMS:
            raise UsageError(f"qf_solver: {config.qf_solver!r} not in {FINITE_ALGORITHMS}")
    instance = build_instance(config.instance)
    if config.algorithm in FINITE_ALGORITHMS:
        if not isinstance(instance, FiniteBandit):
            raise UsageError("instance: finite algorithms need a finite instance")
    elif isinstance(instance, FiniteBandit):
        raise UsageError("instance: reservoir algorithms need a reservoir")


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _finite_row(config: ExperimentConfig, instance, run_index: int) -> dict:
    rng = RngStream(config.base_seed + run_index)
    if config.algorithm == "lucb_km":
        record = lucb_km(instance, config.k, config.m, config.epsilon,
                         config.delta, config.scheme, rng,
                         h_star_mode=config.h_star_mode)
        h_mode = config.h_star_mode
    else:
        record = f2(instance, config.m, config.epsilon, config.delta,
                    config.scheme, rng)
        h_mode = None
    mistake = not verify_run(record, instance, config.m, config.epsilon)
    b1, b2, b3 = record.pulls_by_group
    return {
        "n": _fmt(instance.n), "m": _fmt(config.m), "k": _fmt(record.k),
        "rho": "", "scheme": config.scheme, "h_star_mode": _fmt(h_mode),
        "seed": _fmt(record.seed), "samples": _fmt(record.total_samples),
        "rounds": _fmt(record.rounds), "mistake": _fmt(mistake),
        "pulls_b1": _fmt(b1), "pulls_b2": _fmt(b2), "pulls_b3": _fmt(b3),
    }


def _infinite_row(config: ExperimentConfig, reservoir, run_index: int) -> dict:
    rng = RngStream(config.base_seed + run_index)
    tally = Tally()
    optimal = top_rho_eps(reservoir, config.rho, config.epsilon)
    k = config.k if config.k is not None else 1
    scheme = ""
    if config.algorithm == "p3":
        outputs = [p3(reservoir, config.rho, config.epsilon, config.delta,
                      rng, tally=tally)]
    elif config.algorithm == "kqp1":
        problem = QuantileProblem(reservoir, config.rho, k, config.epsilon,
                                  config.delta)
        outputs = list(kqp1(problem, rng, tally=tally))
    elif config.algorithm == "k_independent_qp":
        problem = QuantileProblem(reservoir, config.rho, k, config.epsilon,
                                  config.delta)
        outputs = list(k_independent_qp(problem, rng, tally=tally))
    else:  # opt_qp: its finite stage runs config.qf_solver with config.scheme
        scheme = config.scheme
        if config.qf_solver == "lucb_km":
            def solver(inst, m, eps, delta, solver_rng, solver_tally):
                return lucb_km(inst, 1, m, eps, delta, config.scheme,
                               solver_rng, tally=solver_tally).returned[0]
        else:
            def solver(inst, m, eps, delta, solver_rng, solver_tally):
                return f2(inst, m, eps, delta, config.scheme, solver_rng,
                          tally=solver_tally).returned[0]
        outputs = [opt_qp(reservoir, config.rho, config.epsilon, config.delta,
                          solver, rng, tally=tally)]
    distinct = len(set(outputs)) == len(outputs)
    mistake = not (len(outputs) == k and distinct
                   and all(optimal(arm) for arm in outputs))
    return {
        "n": "", "m": "", "k": _fmt(k), "rho": _fmt(config.rho),
        "scheme": scheme, "h_star_mode": "", "seed": _fmt(rng.seed),
        "samples": _fmt(tally.count), "rounds": "", "mistake": _fmt(mistake),
        "pulls_b1": "", "pulls_b2": "", "pulls_b3": "",
    }


def run_one(config: ExperimentConfig, run_index: int) -> dict:
    """Execute a single seeded run and format its CSV row."""
    instance = build_instance(config.instance)
    if config.algorithm in FINITE_ALGORITHMS:
        row = _finite_row(config, instance, run_index)
    else:
        row = _infinite_row(config, instance, run_index)
    row.update({
        "experiment_id": config.experiment_id,
        "algorithm": config.algorithm,
        "epsilon": _fmt(config.epsilon),
        "delta": _fmt(config.delta),
        "run_index": _fmt(run_index),
    })
    return {col: row[col] for col in RUNS_COLUMNS}


def run_experiment(config: ExperimentConfig) -> list[dict]:
    """All seeded runs of one config, ordered by run index.

    Deterministic for a fixed (config, base_seed) at any parallelism width:
    run i depends only on seed base_seed + i.
    """
    validate_config(config)
    indices = range(config.runs)
    if config.parallelism == 1:
        return [run_one(config, i) for i in indices]
    with ProcessPoolExecutor(max_workers=config.parallelism) as pool:
        rows = list(pool.map(run_one, [config] * config.runs, indices,
                             chunksize=max(1, config.runs // (4 * config.parallelism))))
    return rows


def write_runs_csv(rows, path) -> None:
    _write_csv(path, RUNS_COLUMNS, rows)


def write_summary_csv(rows, path) -> None:
    _write_csv(path, SUMMARY_COLUMNS, rows)


def _write_csv(path, columns, rows) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(columns), lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow(row)


def read_csv_rows(path) -> list[dict]:
    with open(path, "r", encoding="utf-8", newline="") as fh:
        return list(csv.DictReader(fh))


def aggregate(rows, group_keys=GROUP_KEYS) -> list[dict]:
    """Group per-run rows and compute means, standard errors, mistake rates.

    Standard error is the sample standard deviation (n-1 denominator) over
    sqrt(runs); a single-run group gets stderr 0 by convention and a
    warning. Group pull fractions are means of per-run fractions.
    """
    rows = list(rows)
    if not rows:
        raise UsageError("aggregate needs a nonempty run table")
    groups: dict[tuple, list[dict]] = {}
    for row in rows:
        groups.setdefault(tuple(row[k] for k in group_keys), []).append(row)

    out = []
    for key, members in groups.items():
        samples = [int(r["samples"]) for r in members]
        mistakes = [int(r["mistake"]) for r in members]
        runs = len(members)
        mean = statistics.fmean(samples)
        if runs > 1:
            stderr = statistics.stdev(samples) / runs ** 0.5
        else:
            warnings.warn(f"group {key}: single run, stderr reported as 0",
                          RuntimeWarning, stacklevel=2)
            stderr = 0.0
        summary = dict(zip(group_keys, key))
        summary.update({
            "runs": _fmt(runs),
            "mean_samples": _fmt(mean),
            "stderr_samples": _fmt(stderr),
            "mistake_rate": _fmt(statistics.fmean(mistakes)),
        })
        if all(r["pulls_b1"] != "" for r in members):
            for col, src in (("frac_b1", "pulls_b1"), ("frac_b2", "pulls_b2"),
                             ("frac_b3", "pulls_b3")):
                summary[col] = _fmt(statistics.fmean(
                    int(r[src]) / int(r["samples"]) for r in members))
        else:
            summary.update({"frac_b1": "", "frac_b2": "", "frac_b3": ""})
        out.append(summary)
    return out


def preset(name: str, scale: float = 1.0, full: bool = False,
           parallelism: int = 1) -> list[ExperimentConfig]:
    """Configs reproducing the three reference experiment protocols.

    ``scale`` multiplies repetition counts for desk-scale execution. The
    first protocol caps instances at n <= 50 unless ``full`` is set (the
    n in {100, 200} legs at delta = 0.001 are compute-heavy). Algorithm
    pairs on the same instance share base seeds, so comparisons are paired.
    """
    if name not in PRESETS:
        raise UsageError(f"unknown preset {name!r}; use one of {PRESETS}")
    if scale <= 0.0:
        raise UsageError("scale must be > 0")
    runs = max(1, round(100 * scale))
    configs = []
    if name == "fig1":
        sizes = [10, 20, 50, 100, 200]
        if not full:
            sizes = [n for n in sizes if n <= 50]
        for n in sizes:
            m = n // 10
            if m * 10 != n:
                raise UsageError(f"m = 0.1*n must be an integer, got n={n}")
            for algo in ("lucb_km", "f2"):
                configs.append(ExperimentConfig(
                    experiment_id=f"fig1-n{n}-{algo}", algorithm=algo,
                    instance={"generator": "linear", "n": n}, epsilon=0.05,
                    delta=0.001, k=1, m=m, scheme="kl", runs=runs,
                    base_seed=101000 + n, parallelism=parallelism))
    elif name == "fig2":
        for m in range(1, 6):
            for algo in ("lucb_km", "f2"):
                configs.append(ExperimentConfig(
                    experiment_id=f"fig2-m{m}-{algo}", algorithm=algo,
                    instance={"generator": "linear", "n": 10}, epsilon=0.05,
                    delta=0.001, k=1, m=m, scheme="kl", runs=runs,
                    base_seed=102000 + m, parallelism=parallelism))
    else:
        for k in (1, 2, 3, 5, 8, 10):
            configs.append(ExperimentConfig(
                experiment_id=f"fig3-k{k}-lucb_km", algorithm="lucb_km",
                instance={"generator": "linear", "n": 20}, epsilon=0.05,
                delta=0.001, k=k, m=10, scheme="kl", runs=runs,
                base_seed=103000 + k, parallelism=parallelism))
    return configs
