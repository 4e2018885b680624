"""Benchmark harness: parameter sweeps over synthetic instances.

Each experiment cell (sweep value x seed x method) generates an instance,
runs the method, replays the result, and records one metrics row. Wall-clock
covers the planning call only (instance generation and replay excluded; the
cluster-sort-assign timing includes its tree construction and clustering,
which happen inside the planner). Outputs are a stable-schema
``metrics.csv``, a per-value aggregate ``summary.csv``, one plot-data CSV
per figure, and rendered PNG figures.
"""

from __future__ import annotations

import csv
import statistics
import time
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Sequence

from .errors import ConfigError
from .heuristics import csa_plan, edf_plan, ndf_plan, report_objective, simulate_plan
from .instance import GeneratorConfig, Instance, generate_synthetic
from .milp import EnumerationLimits, check_limits, default_alphas, default_l_max, oracle_search

METHOD_ORDER = ("csa", "edf", "ndf", "oracle")

METRICS_HEADER = (
    "method",
    "seed",
    "n_deliveries",
    "ratio",
    "n_cps",
    "served",
    "avg_cost_per_served",
    "elapsed_ms",
    "objective",
    "sweep_value",
)

SUMMARY_HEADER = (
    "method",
    "sweep_value",
    "n_runs",
    "served_mean",
    "served_std",
    "avg_cost_mean",
    "avg_cost_std",
    "elapsed_ms_mean",
    "elapsed_ms_std",
    "cost_reduction_vs_edf",
    "cost_reduction_vs_ndf",
)


@dataclass(frozen=True)
class ExperimentConfig:
    """One sweep: which dimension varies, its values, and the fixed sizes."""

    sweep: str  # "deliveries" | "ratio" | "cps"
    values: tuple[float, ...]
    deliveries: int = 200
    ratio: float = 5.0
    cps: int = 5
    seeds: tuple[int, ...] = tuple(range(10))
    methods: tuple[str, ...] = ("csa", "edf", "ndf")
    output_dir: Path | None = None
    generator: GeneratorConfig = field(default_factory=GeneratorConfig)
    oracle_limits: EnumerationLimits = field(default_factory=EnumerationLimits)
    bill_depot_return: bool = True
    render_figures: bool = True


@dataclass(frozen=True)
class MetricsRow:
    method: str
    seed: int
    n_deliveries: int
    ratio: float
    n_cps: int
    served: int
    avg_cost_per_served: float
    elapsed_ms: float
    objective: float
    sweep_value: float


@dataclass(frozen=True)
class SummaryRow:
    method: str
    sweep_value: float
    n_runs: int
    served_mean: float
    served_std: float
    avg_cost_mean: float
    avg_cost_std: float
    elapsed_ms_mean: float
    elapsed_ms_std: float
    cost_reduction_vs_edf: float | None = None
    cost_reduction_vs_ndf: float | None = None


def cell_sizes(config: ExperimentConfig, value: float) -> tuple[int, int, int, float]:
    """(n_deliveries, n_evs, n_cps, ratio) for one sweep value."""
    if config.sweep == "deliveries":
        nd, ratio, nc = int(value), config.ratio, config.cps
    elif config.sweep == "ratio":
        nd, ratio, nc = config.deliveries, float(value), config.cps
    elif config.sweep == "cps":
        nd, ratio, nc = config.deliveries, config.ratio, int(value)
    else:
        raise ConfigError(f"unknown sweep {config.sweep!r}")
    if ratio <= 0:
        raise ConfigError("ratio must be > 0")
    ne = max(1, round(nd / ratio))
    return nd, ne, nc, ratio


def validate_config(config: ExperimentConfig) -> ExperimentConfig:
    if not config.values:
        raise ConfigError("values: at least one sweep value is required")
    if not config.seeds:
        raise ConfigError("seeds: at least one seed is required")
    if not config.methods:
        raise ConfigError("methods: at least one method is required")
    for m in config.methods:
        if m not in METHOD_ORDER:
            raise ConfigError(f"unknown method {m!r}")
    for value in config.values:
        nd, ne, nc, _ = cell_sizes(config, value)
        if min(nd, ne, nc) < 1:
            raise ConfigError(f"sweep value {value}: implies an empty instance")
        if "oracle" in config.methods:
            # refuse before any run rather than fail mid-sweep
            probe_limits = config.oracle_limits
            if nd > probe_limits.max_deliveries or ne > probe_limits.max_evs or nc > probe_limits.max_cps:
                raise ConfigError(
                    f"sweep value {value}: size ({nd} deliveries, {ne} vehicles, {nc} "
                    "charging points) exceeds the enumeration limits required by the "
                    "oracle method"
                )
    return config


def _run_method(
    method: str,
    instance: Instance,
    config: ExperimentConfig,
    alphas: tuple[float, float],
) -> tuple[int, float, float, float]:
    """(served, avg_cost_per_served, elapsed_ms, objective) for one cell."""
    bill = config.bill_depot_return
    if method == "oracle":
        limits = replace(config.oracle_limits, alphas=alphas, bill_depot_return=bill)
        check_limits(instance, limits)
        start = time.perf_counter()
        result = oracle_search(instance, limits)
        elapsed_ms = (time.perf_counter() - start) * 1000.0
        avg_cost = result.total_cost / result.served if result.served else 0.0
        return result.served, avg_cost, elapsed_ms, result.objective
    planner = {"csa": csa_plan, "edf": edf_plan, "ndf": ndf_plan}[method]
    start = time.perf_counter()
    plan = planner(instance)
    elapsed_ms = (time.perf_counter() - start) * 1000.0
    report = simulate_plan(instance, plan, bill_depot_return=bill)
    return (
        report.served_count,
        report.cost_per_served,
        elapsed_ms,
        report_objective(report, alphas),
    )


def run_experiment(config: ExperimentConfig) -> list[MetricsRow]:
    """Run the sweep and (when an output directory is set) write all outputs."""
    validate_config(config)
    rows: list[MetricsRow] = []
    for value in config.values:
        nd, ne, nc, ratio = cell_sizes(config, value)
        for seed in config.seeds:
            instance = generate_synthetic(seed, nd, nc, ne, config.generator)
            alphas = default_alphas(instance, default_l_max(instance))
            for method in config.methods:
                served, avg_cost, elapsed_ms, objective = _run_method(
                    method, instance, config, alphas
                )
                rows.append(
                    MetricsRow(
                        method=method,
                        seed=seed,
                        n_deliveries=nd,
                        ratio=ratio,
                        n_cps=nc,
                        served=served,
                        avg_cost_per_served=avg_cost,
                        elapsed_ms=elapsed_ms,
                        objective=objective,
                        sweep_value=float(value),
                    )
                )
    rows.sort(key=lambda r: (r.sweep_value, r.seed, METHOD_ORDER.index(r.method)))
    if config.output_dir is not None:
        write_outputs(config, rows)
    return rows


# ---------------------------------------------------------------------------
# Aggregation


def summarize(rows: Sequence[MetricsRow]) -> list[SummaryRow]:
    """Mean/stddev per (method, sweep value), plus the cost reduction of the
    cluster planner against each baseline: (base - csa) / base."""
    if not rows:
        raise ConfigError("summarize: no rows")
    grouped: dict[tuple[str, float], list[MetricsRow]] = {}
    for row in rows:
        grouped.setdefault((row.method, row.sweep_value), []).append(row)

    cost_means: dict[tuple[str, float], float] = {}
    for key, bucket in grouped.items():
        cost_means[key] = statistics.fmean(r.avg_cost_per_served for r in bucket)

    out: list[SummaryRow] = []
    values = sorted({v for (_, v) in grouped})
    for value in values:
        for method in METHOD_ORDER:
            bucket = grouped.get((method, value))
            if not bucket:
                continue
            served = [float(r.served) for r in bucket]
            cost = [r.avg_cost_per_served for r in bucket]
            elapsed = [r.elapsed_ms for r in bucket]
            red_edf = red_ndf = None
            if method == "csa":
                base = cost_means.get(("edf", value))
                if base is not None and base > 0:
                    red_edf = (base - cost_means[("csa", value)]) / base
                base = cost_means.get(("ndf", value))
                if base is not None and base > 0:
                    red_ndf = (base - cost_means[("csa", value)]) / base
            out.append(
                SummaryRow(
                    method=method,
                    sweep_value=value,
                    n_runs=len(bucket),
                    served_mean=statistics.fmean(served),
                    served_std=statistics.pstdev(served),
                    avg_cost_mean=statistics.fmean(cost),
                    avg_cost_std=statistics.pstdev(cost),
                    elapsed_ms_mean=statistics.fmean(elapsed),
                    elapsed_ms_std=statistics.pstdev(elapsed),
                    cost_reduction_vs_edf=red_edf,
                    cost_reduction_vs_ndf=red_ndf,
                )
            )
    return out


# ---------------------------------------------------------------------------
# Output files


def write_metrics_csv(rows: Iterable[MetricsRow], path: str | Path) -> Path:
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(METRICS_HEADER)
        for r in rows:
            writer.writerow(
                [
                    r.method,
                    r.seed,
                    r.n_deliveries,
                    repr(r.ratio),
                    r.n_cps,
                    r.served,
                    repr(r.avg_cost_per_served),
                    repr(r.elapsed_ms),
                    repr(r.objective),
                    repr(r.sweep_value),
                ]
            )
    return path


def write_summary_csv(summary: Iterable[SummaryRow], path: str | Path) -> Path:
    path = Path(path)

    def cell(v: float | None) -> str:
        return "" if v is None else repr(v)

    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(SUMMARY_HEADER)
        for s in summary:
            writer.writerow(
                [
                    s.method,
                    repr(s.sweep_value),
                    s.n_runs,
                    repr(s.served_mean),
                    repr(s.served_std),
                    repr(s.avg_cost_mean),
                    repr(s.avg_cost_std),
                    repr(s.elapsed_ms_mean),
                    repr(s.elapsed_ms_std),
                    cell(s.cost_reduction_vs_edf),
                    cell(s.cost_reduction_vs_ndf),
                ]
            )
    return path


_PLOT_METRICS = (
    ("served", "served_mean", "served_std"),
    ("cost", "avg_cost_mean", "avg_cost_std"),
    ("elapsed", "elapsed_ms_mean", "elapsed_ms_std"),
)


def write_plot_data(summary: Sequence[SummaryRow], outdir: str | Path) -> list[Path]:
    """One CSV per figure: x column plus mean/std series per method."""
    outdir = Path(outdir)
    methods = [m for m in METHOD_ORDER if any(s.method == m for s in summary)]
    values = sorted({s.sweep_value for s in summary})
    cell_map = {(s.method, s.sweep_value): s for s in summary}
    written = []
    for metric, mean_attr, std_attr in _PLOT_METRICS:
        path = outdir / f"plotdata_{metric}.csv"
        header = ["x"]
        for m in methods:
            header += [f"{m}_mean", f"{m}_std"]
        with path.open("w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(header)
            for value in values:
                row: list[str] = [repr(value)]
                for m in methods:
                    s = cell_map.get((m, value))
                    if s is None:
                        row += ["", ""]
                    else:
                        row += [repr(getattr(s, mean_attr)), repr(getattr(s, std_attr))]
                writer.writerow(row)
        written.append(path)
    return written


_SWEEP_LABEL = {
    "deliveries": "Number of deliveries",
    "ratio": "Delivery-to-vehicle ratio",
    "cps": "Number of charging points",
}


def write_outputs(config: ExperimentConfig, rows: Sequence[MetricsRow]) -> dict[str, list[Path]]:
    outdir = Path(config.output_dir or ".")
    outdir.mkdir(parents=True, exist_ok=True)
    summary = summarize(rows)
    written = {
        "metrics": [write_metrics_csv(rows, outdir / "metrics.csv")],
        "summary": [write_summary_csv(summary, outdir / "summary.csv")],
        "plot_data": write_plot_data(summary, outdir),
        "figures": [],
    }
    if config.render_figures:
        from . import plots  # matplotlib import deferred until actually needed

        written["figures"] = plots.render_sweep_figures(
            summary, _SWEEP_LABEL.get(config.sweep, config.sweep), outdir
        )
    return written
