"""Experiment orchestration: configuration, seeded trial fan-out,
persistence, and gate evaluation.

Persistence contract: one tidy CSV of per-trial scalars (columns
experiment, trial, metric, value) plus one JSON summary per run. All
aggregates and gates are pure functions of the per-trial rows and the
config; the self-audit re-parses the written CSV and recomputes them
before the summary goes out. CSV bytes are fully determined by the
config (seed included) - timestamps live only in the JSON.
"""

from __future__ import annotations

import csv
import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path
from typing import Callable, Iterable

import numpy as np

from . import edgestats, greencmp, lawcheck, momentcmp
from .ensemble import EnsembleSpec, EntryDistribution, sample_raw, standardize_columns
from .errors import ConfigurationError
from .mplaw import MPLaw, SpectralDomain
from .spectra import eigenvalues

__all__ = ["RunConfig", "GateResult", "RunReport", "EXPERIMENTS", "run", "run_one",
           "load_report", "format_report"]

EXPERIMENTS = ("localaw", "rigidity", "edge", "greencmp", "moments")
CSV_HEADER = ("experiment", "trial", "metric", "value")


@dataclass(frozen=True)
class RunConfig:
    """One experiment run. Defaults are desk scale: small enough that the
    full battery finishes in about a minute, large enough that every gate
    is meaningfully exercised."""

    experiment: str = "all"
    n: int = 100
    m: int = 400
    dist: str = "gaussian"
    trials: int = 100
    seed: int = 7
    epsilon: float = 0.05           # eta0 = n^(-2/3 - epsilon) at the edge
    envelope_exponent: float = 3.0  # poly-log envelope (log n)^exponent
    frequency_gate: float = 0.99    # required trial frequency for envelope events
    edge_k: int = 2                 # extreme values retained per trial
    shift_exponent: float = 0.1     # sandwich shift n^(-shift_exponent)
    kernel_ratio_gate: float = 50.0
    workers: int = 1
    out: str = "runs"

    def __post_init__(self) -> None:
        if self.experiment not in EXPERIMENTS + ("all",):
            raise ConfigurationError(f"unknown experiment {self.experiment!r}")
        if self.trials < 1:
            raise ConfigurationError("trials must be positive")
        if self.workers < 1:
            raise ConfigurationError("workers must be positive")
        try:
            EntryDistribution(self.dist)
        except ValueError as exc:
            choices = ", ".join(d.value for d in EntryDistribution)
            raise ConfigurationError(
                f"unknown distribution {self.dist!r}; choose from {choices}") from exc

    def ensemble_spec(self) -> EnsembleSpec:
        return EnsembleSpec(m=self.m, n=self.n, dist=EntryDistribution(self.dist),
                            seed=self.seed)

    def law(self) -> MPLaw:
        return MPLaw(d=self.n / self.m)

    @classmethod
    def from_sources(cls, file_values: dict | None = None,
                     overrides: dict | None = None) -> "RunConfig":
        """Build from config-file values overlaid with CLI overrides
        (overrides win; None values are ignored)."""
        merged: dict = {}
        for source in (file_values or {}), (overrides or {}):
            merged.update({k: v for k, v in source.items() if v is not None})
        valid = {f.name: f.type for f in fields(cls)}
        unknown = set(merged) - set(valid)
        if unknown:
            raise ConfigurationError(f"unknown config keys: {sorted(unknown)}")
        coerced = {}
        for key, value in merged.items():
            kind = valid[key]
            coerced[key] = int(value) if kind == "int" else (
                float(value) if kind == "float" else str(value))
        return cls(**coerced)


@dataclass(frozen=True)
class GateResult:
    """One pass/fail gate: the measured quantity, the bound it is compared
    against, and the direction of the comparison."""

    name: str
    observed: float
    bound: float
    comparator: str  # "<=" or ">="

    @property
    def passed(self) -> bool:
        if self.comparator == "<=":
            return self.observed <= self.bound
        if self.comparator == ">=":
            return self.observed >= self.bound
        raise ConfigurationError(f"unknown comparator {self.comparator!r}")


@dataclass
class RunReport:
    """Everything one experiment produced: config echo, per-trial rows,
    aggregates, gates, and provenance."""

    experiment: str
    config: dict
    rows: list[tuple[int, str, float]]
    aggregates: dict[str, float]
    gates: list[GateResult]
    wall_clock: float
    self_audit: str = "unchecked"

    @property
    def passed(self) -> bool:
        return all(g.passed for g in self.gates)


def _map_trials(fn: Callable[[int], dict[str, float]], trials: int,
                workers: int) -> list[dict[str, float]]:
    """Evaluate one trial function over range(trials), optionally through
    a bounded thread pool. Results come back in trial order regardless of
    scheduling, so aggregation is order-insensitive by construction."""
    if workers <= 1:
        return [fn(t) for t in range(trials)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, range(trials)))


def _rows_from_metrics(per_trial: list[dict[str, float]]) -> list[tuple[int, str, float]]:
    return [(trial, metric, float(value))
            for trial, metrics in enumerate(per_trial)
            for metric, value in metrics.items()]


def _metric_array(rows: Iterable[tuple[int, str, float]], metric: str) -> np.ndarray:
    return np.asarray([v for _, m, v in rows if m == metric], dtype=float)


# --- row producers (one per experiment) --------------------------------------

def _rows_localaw(config: RunConfig) -> list[tuple[int, str, float]]:
    law = config.law()
    domain = SpectralDomain.for_law(law, config.n)
    spec = config.ensemble_spec()

    def one(trial: int) -> dict[str, float]:
        x = standardize_columns(sample_raw(spec, trial=trial))
        grid = lawcheck.local_law_deviation(eigenvalues(x), law, domain)
        return {"sup_normalized_deviation": grid.sup}

    return _rows_from_metrics(_map_trials(one, config.trials, config.workers))


def _rows_rigidity(config: RunConfig) -> list[tuple[int, str, float]]:
    law = config.law()
    spec = config.ensemble_spec()
    envelope = math.log(config.n) ** config.envelope_exponent

    def one(trial: int) -> dict[str, float]:
        x = standardize_columns(sample_raw(spec, trial=trial))
        spectrum = eigenvalues(x)
        profile = lawcheck.rigidity_profile(spectrum, law)
        extreme = lawcheck.extreme_bound_check(spectrum, law, envelope)
        return {"max_normalized_deviation": profile.max_normalized,
                "extreme_bound_ok": float(extreme)}

    return _rows_from_metrics(_map_trials(one, config.trials, config.workers))


def _rows_edge(config: RunConfig) -> list[tuple[int, str, float]]:
    spec = config.ensemble_spec()

    def metrics(ensemble: str, offset: int, trial: int) -> dict[str, float]:
        raw = sample_raw(spec, trial=trial + offset)
        x = standardize_columns(raw) if ensemble == "correlation" else raw
        spectrum = eigenvalues(x)
        short = "corr" if ensemble == "correlation" else "cov"
        out: dict[str, float] = {}
        for side in edgestats.SIDES:
            for i, v in enumerate(edgestats.rescale_edge(spectrum, config.edge_k, side), 1):
                out[f"{short}_{side}_{i}"] = float(v)
        return out

    # disjoint trial ranges keep the two sample sets statistically independent
    corr = _map_trials(lambda t: metrics("correlation", 0, t), config.trials, config.workers)
    cov = _map_trials(lambda t: metrics("covariance", config.trials, t),
                      config.trials, config.workers)
    return _rows_from_metrics([{**a, **b} for a, b in zip(corr, cov)])


def _rows_greencmp(config: RunConfig) -> list[tuple[int, str, float]]:
    law = config.law()
    spec = config.ensemble_spec()
    z = greencmp.default_edge_z(law, config.n, config.epsilon)

    def one(trial: int) -> dict[str, float]:
        x = standardize_columns(sample_raw(spec, trial=trial))
        record = greencmp.comparison_record(x, z, law)
        out = {"identity_residual_max": max(record.residuals.values()),
               "baseline_mu": record.mu,
               "ratio_abs": abs(record.ratio)}
        for i, term in enumerate(record.terms, start=1):
            out[f"term{i}_abs"] = abs(term)
        return out

    rows = _rows_from_metrics(_map_trials(one, config.trials, config.workers))
    steps = greencmp.telescope_step_samples(spec, 1, greencmp.FUNCTIONALS[0], z,
                                            trials=config.trials, epsilon=config.epsilon,
                                            trial_offset=config.trials)
    rows += [(t, "telescope_step", float(v)) for t, v in enumerate(steps)]
    return rows


# kernel-sum cases run at fixed brute-force scale regardless of config size
_KERNEL_M, _KERNEL_N, _KERNEL_INSTANCES = 12, 6, 3


def _kernel_cases() -> list[tuple[momentcmp.Partition, int, int]]:
    cases: list[tuple[momentcmp.Partition, int, int]] = [
        (momentcmp.Partition.of((1, 2)), 1, 0)]
    cases += [(p, 1, 1) for p in momentcmp.enumerate_partitions(4)]
    cases += [(p, 2, 0) for p in momentcmp.enumerate_partitions(4)]
    return cases


def _rows_moments(config: RunConfig) -> list[tuple[int, str, float]]:
    dist = EntryDistribution(config.dist)
    quartic = momentcmp.Partition.of((1, 2, 3, 4))
    diffs = momentcmp.moment_difference_samples(dist, config.m, quartic, (1, 1, 1, 1),
                                                config.trials, seed=config.seed)
    rows = [(t, "quartic_difference", float(v)) for t, v in enumerate(diffs)]
    bf_spec = EnsembleSpec(m=_KERNEL_M, n=_KERNEL_N, dist=EntryDistribution.GAUSSIAN,
                           seed=config.seed)
    law = MPLaw(d=_KERNEL_N / _KERNEL_M)
    z = greencmp.default_edge_z(law, _KERNEL_N, config.epsilon)
    for instance in range(_KERNEL_INSTANCES):
        x = standardize_columns(sample_raw(bf_spec, trial=instance))
        for idx, (partition, a, b) in enumerate(_kernel_cases()):
            res = momentcmp.sum_bound_check(x, z, partition, a, b)
            rows.append((instance, f"kernel_ratio_{idx:02d}", res.ratio))
    return rows


_ROW_PRODUCERS = {
    "localaw": _rows_localaw,
    "rigidity": _rows_rigidity,
    "edge": _rows_edge,
    "greencmp": _rows_greencmp,
    "moments": _rows_moments,
}


# --- aggregates and gates (pure functions of rows + config) ------------------

def _edge_samples_from_rows(rows: list, tag: str, side: str, k: int) -> list[edgestats.EdgeSample]:
    short = "corr" if tag == "correlation" else "cov"
    per_rank = [_metric_array(rows, f"{short}_{side}_{i}") for i in range(1, k + 1)]
    return [edgestats.EdgeSample(tag=tag, side=side,
                                 values=np.array([per_rank[i][t] for i in range(k)]),
                                 trial=t)
            for t in range(len(per_rank[0]))]


def _aggregate(experiment: str, rows: list, config: RunConfig) -> dict[str, float]:
    if experiment == "localaw":
        envelope = math.log(config.n) ** config.envelope_exponent
        sups = _metric_array(rows, "sup_normalized_deviation")
        return {"envelope": envelope,
                "within_envelope_frequency": float(np.mean(sups <= envelope)),
                "sup_deviation_max": float(sups.max()),
                "sup_deviation_median": float(np.median(sups))}

    if experiment == "rigidity":
        envelope = math.log(config.n) ** config.envelope_exponent
        devs = _metric_array(rows, "max_normalized_deviation")
        extreme = _metric_array(rows, "extreme_bound_ok")
        return {"envelope": envelope,
                "rigidity_frequency": float(np.mean(devs <= envelope)),
                "extreme_frequency": float(extreme.mean()),
                "max_deviation_median": float(np.median(devs)),
                "max_deviation_max": float(devs.max())}

    if experiment == "edge":
        shift = config.n ** (-config.shift_exponent)
        agg: dict[str, float] = {"shift": shift}
        for side in edgestats.SIDES:
            corr1 = _metric_array(rows, f"corr_{side}_1")
            cov1 = _metric_array(rows, f"cov_{side}_1")
            d2 = edgestats.ks_statistic(corr1, cov1)
            agg[f"two_sample_ks_{side}"] = d2
            agg[f"two_sample_pvalue_{side}"] = edgestats.ks_pvalue(d2, len(corr1), len(cov1))
            agg[f"tw_ks_cov_{side}"] = edgestats.ks_statistic(cov1, edgestats.tw1_cdf)
            agg[f"tw_ks_corr_{side}"] = edgestats.ks_statistic(corr1, edgestats.tw1_cdf)
            report = edgestats.universality_gap(
                _edge_samples_from_rows(rows, "correlation", side, config.edge_k),
                _edge_samples_from_rows(rows, "covariance", side, config.edge_k),
                shift)
            agg[f"sandwich_violation_{side}"] = report.worst_violation
            agg[f"sandwich_gate_{side}"] = 2.0 * report.mc_std_error + shift
        return agg

    if experiment == "greencmp":
        steps = _metric_array(rows, "telescope_step")
        se = float(steps.std(ddof=1) / math.sqrt(len(steps)))
        return {"identity_residual_max": float(_metric_array(rows, "identity_residual_max").max()),
                "ratio_abs_mean": float(_metric_array(rows, "ratio_abs").mean()),
                "telescope_estimate": float(steps.mean()),
                "telescope_std_error": se,
                "telescope_gate": 5.0 * se + 10.0 * config.n ** (-7.0 / 6.0)}

    if experiment == "moments":
        diffs = _metric_array(rows, "quartic_difference")
        ratios = np.asarray([v for _, name, v in rows if name.startswith("kernel_ratio_")])
        se = float(diffs.std(ddof=1) / math.sqrt(len(diffs)))
        return {"quartic_estimate": float(diffs.mean()),
                "quartic_std_error": se,
                "quartic_exact_gaussian": momentcmp.gaussian_quartic_difference(config.m),
                "kernel_ratio_max": float(ratios.max()),
                "kernel_cases": float(len({name for _, name, _ in rows
                                           if name.startswith("kernel_ratio_")}))}

    raise ConfigurationError(f"unknown experiment {experiment!r}")


def _gates(experiment: str, agg: dict[str, float], config: RunConfig) -> list[GateResult]:
    if experiment == "localaw":
        return [GateResult("local_law_frequency", agg["within_envelope_frequency"],
                           config.frequency_gate, ">=")]
    if experiment == "rigidity":
        return [GateResult("rigidity_frequency", agg["rigidity_frequency"],
                           config.frequency_gate, ">="),
                GateResult("extreme_frequency", agg["extreme_frequency"],
                           config.frequency_gate, ">=")]
    if experiment == "edge":
        # the KS p-value gates embody the no-distinction null; the TW gate
        # widens with 1/sqrt(trials) so small smoke runs are not dominated
        # by sampling noise
        return [GateResult("two_sample_pvalue_largest", agg["two_sample_pvalue_largest"],
                           0.01, ">="),
                GateResult("two_sample_pvalue_smallest", agg["two_sample_pvalue_smallest"],
                           0.01, ">="),
                GateResult("tw_ks_cov_largest", agg["tw_ks_cov_largest"],
                           0.05 + 1.0 / math.sqrt(config.trials), "<="),
                GateResult("sandwich_violation_largest", agg["sandwich_violation_largest"],
                           agg["sandwich_gate_largest"], "<="),
                GateResult("sandwich_violation_smallest", agg["sandwich_violation_smallest"],
                           agg["sandwich_gate_smallest"], "<=")]
    if experiment == "greencmp":
        return [GateResult("identity_residual_max", agg["identity_residual_max"], 1e-8, "<="),
                GateResult("telescope_step", abs(agg["telescope_estimate"]),
                           agg["telescope_gate"], "<=")]
    if experiment == "moments":
        gates = [GateResult("kernel_ratio_max", agg["kernel_ratio_max"],
                            config.kernel_ratio_gate, "<=")]
        if config.dist == EntryDistribution.GAUSSIAN.value:
            gates.insert(0, GateResult(
                "quartic_vs_exact",
                abs(agg["quartic_estimate"] - agg["quartic_exact_gaussian"]),
                5.0 * agg["quartic_std_error"], "<="))
        return gates
    raise ConfigurationError(f"unknown experiment {experiment!r}")


# --- persistence --------------------------------------------------------------

def _write_csv(path: Path, experiment: str, rows: list) -> None:
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_HEADER)
        for trial, metric, value in rows:
            writer.writerow([experiment, trial, metric, f"{value:.17g}"])


def _read_csv(path: Path) -> list[tuple[int, str, float]]:
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if tuple(header) != CSV_HEADER:
            raise ConfigurationError(f"unexpected CSV header in {path}: {header}")
        return [(int(r[1]), r[2], float(r[3])) for r in reader]


def run_one(config: RunConfig, out_dir: Path | None = None) -> RunReport:
    """Execute one experiment, persist trials.csv and summary.json under
    out_dir, and return the report. Rows gathered before an interrupt are
    flushed before the interrupt propagates."""
    if config.experiment == "all":
        raise ConfigurationError("run_one needs a single experiment")
    start = time.perf_counter()
    out_dir = Path(config.out) / config.experiment if out_dir is None else out_dir
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path = out_dir / "trials.csv"
    interrupted = False
    try:
        rows = _ROW_PRODUCERS[config.experiment](config)
    except KeyboardInterrupt:
        interrupted = True
        rows = []
    _write_csv(csv_path, config.experiment, rows)
    if interrupted:
        (out_dir / "summary.json").write_text(
            json.dumps({"experiment": config.experiment, "config": asdict(config),
                        "interrupted": True}, indent=2, sort_keys=True) + "\n")
        raise KeyboardInterrupt
    agg = _aggregate(config.experiment, rows, config)
    gates = _gates(config.experiment, agg, config)
    # self-audit: aggregates must be recomputable from the persisted rows
    reread = _aggregate(config.experiment, _read_csv(csv_path), config)
    audit = "pass"
    for key in sorted(set(agg) | set(reread)):
        if not math.isclose(agg.get(key, math.nan), reread.get(key, math.nan),
                            rel_tol=1e-12, abs_tol=1e-15):
            audit = f"fail:{key}"
            break
    report = RunReport(experiment=config.experiment, config=asdict(config), rows=rows,
                       aggregates=agg, gates=gates,
                       wall_clock=time.perf_counter() - start, self_audit=audit)
    summary = {
        "experiment": report.experiment,
        "config": report.config,
        "aggregates": report.aggregates,
        "gates": [{"name": g.name, "observed": g.observed, "bound": g.bound,
                   "comparator": g.comparator, "passed": g.passed} for g in gates],
        "passed": report.passed,
        "trials_csv": csv_path.name,
        "wall_clock_seconds": report.wall_clock,
        "self_audit": report.self_audit,
        "seed": config.seed,
    }
    (out_dir / "summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    return report


def run(config: RunConfig) -> list[RunReport]:
    """Run the configured experiment (or all of them), one subdirectory
    per experiment under the output directory."""
    base = Path(config.out)
    names = EXPERIMENTS if config.experiment == "all" else (config.experiment,)
    return [run_one(replace(config, experiment=name), base / name) for name in names]


# --- report loading ------------------------------------------------------------

def load_report(run_dir: Path) -> dict:
    """Load a persisted summary plus its trial rows; corrupt JSON raises
    ConfigurationError naming the byte offset."""
    run_dir = Path(run_dir)
    summary_path = run_dir / "summary.json"
    if not summary_path.exists():
        raise FileNotFoundError(f"no summary.json under {run_dir}")
    try:
        summary = json.loads(summary_path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigurationError(
            f"corrupt report {summary_path}: {exc.msg} at byte offset {exc.pos}") from exc
    rows = _read_csv(run_dir / summary["trials_csv"]) if "trials_csv" in summary else []
    return {"summary": summary, "rows": rows, "dir": run_dir}


def format_report(loaded: dict) -> str:
    """Gate-by-gate text summary naming both sides of every inequality."""
    summary = loaded["summary"]
    cfg = summary["config"]
    lines = [f"experiment: {summary['experiment']}  "
             f"(n={cfg['n']}, m={cfg['m']}, dist={cfg['dist']}, "
             f"trials={cfg['trials']}, seed={cfg['seed']})"]
    for gate in summary.get("gates", []):
        status = "PASS" if gate["passed"] else "FAIL"
        lines.append(f"  {gate['name']}: observed {gate['observed']:.6g} "
                     f"{gate['comparator']} bound {gate['bound']:.6g} [{status}]")
    lines.append(f"  self-audit: {summary['self_audit']}; "
                 f"wall clock {summary['wall_clock_seconds']:.2f}s; "
                 f"overall: {'PASS' if summary['passed'] else 'FAIL'}")
    return "\n".join(lines)
