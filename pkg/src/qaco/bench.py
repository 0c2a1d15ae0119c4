"""Seeded experiment runner, noise sweeps and report serialisation."""

from __future__ import annotations

import csv
import io
import json
import math
import statistics
import time
from dataclasses import asdict, dataclass, field, replace
from typing import Iterable, Sequence

import numpy as np

from .aco import AcoConfig, aco_solve
from .cluster import hierarchical_solve
from .errors import ConfigError
from .pheromone import QacoConfig, SolveResult, check_capacity, qaco_solve
from .qsim import NOISELESS, NoiseModel, NoiseSpec
from .tspio import TspInstance, format_tour, is_permutation, load_tsplib, random_instance

ALGORITHMS = ("aco", "qaco", "aco-kmeans", "qaco-kmeans")
FORMATS = ("csv", "json", "svg", "tour")
CSV_COLUMNS = ("algorithm", "instance", "seed", "best_length", "wall_ms")
SWEEP_RATES = (0.001, 0.01, 0.02, 0.05, 0.1)
SWEEP_MODELS = (NoiseModel.BIT_FLIP, NoiseModel.THERMAL_RELAXATION)


@dataclass(frozen=True)
class ExperimentConfig:
    instance: str
    algorithm: str = "qaco-kmeans"
    seeds: tuple[int, ...] = (0,)
    iterations: int | None = None
    cap: int = 4
    metric: str | None = None
    noise: NoiseSpec = NOISELESS
    aco: AcoConfig = field(default_factory=AcoConfig)
    qaco: QacoConfig = field(default_factory=lambda: QacoConfig(max_iterations=1000))
    kmeans_restarts: int = 10
    output: str | None = None
    format: str = "csv"


@dataclass
class SeedRecord:
    seed: int
    best_length: float
    best_tour: list[int]
    trace: list[tuple[int, float]]
    wall_ms: float
    feasible: bool


@dataclass
class RunReport:
    algorithm: str
    instance: str
    noise: str
    records: list[SeedRecord]

    @property
    def lengths(self) -> list[float]:
        return [r.best_length for r in self.records]

    @property
    def min(self) -> float:
        return min(self.lengths)

    @property
    def mean(self) -> float:
        return statistics.fmean(self.lengths)

    @property
    def std(self) -> float:
        return statistics.pstdev(self.lengths)

    @property
    def label(self) -> str:
        return self.algorithm if self.noise == "none" else f"{self.algorithm}[{self.noise}]"


def resolve_instance(source: str, metric: str | None = None) -> TspInstance:
    try:
        if source.startswith("random:"):
            _, n, seed = source.split(":")
            inst = random_instance(int(n), int(seed))
        else:
            inst = load_tsplib(source)
        return inst.with_metric(metric.upper()) if metric else inst
    except (OSError, ValueError) as exc:
        raise ConfigError(f"cannot load instance {source!r}: {exc}") from None


def _validate(cfg: ExperimentConfig, inst: TspInstance) -> None:
    if cfg.algorithm not in ALGORITHMS:
        raise ConfigError(f"unknown algorithm {cfg.algorithm!r}; choose from {', '.join(ALGORITHMS)}")
    if not cfg.seeds:
        raise ConfigError("seed list is empty")
    if cfg.format not in FORMATS:
        raise ConfigError(f"unknown format {cfg.format!r}")
    if cfg.iterations is not None and cfg.iterations < 1:
        raise ConfigError("iterations must be >= 1")
    if cfg.cap < 2:
        raise ConfigError("cap must be >= 2")
    if cfg.algorithm == "aco" and inst.dimension < 3:
        raise ConfigError("plain ACO needs at least 3 cities")
    if cfg.algorithm == "qaco":
        try:
            check_capacity(inst.dimension, replace(cfg.qaco, max_cities=cfg.cap))
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
    if cfg.algorithm.endswith("kmeans") and inst.points is None and inst.dimension > cfg.cap:
        raise ConfigError(f"{inst.name} has no coordinates for K-means decomposition")


def _solver_configs(cfg: ExperimentConfig) -> tuple[AcoConfig, QacoConfig]:
    aco_cfg, qaco_cfg = cfg.aco, cfg.qaco
    if cfg.iterations is not None:
        aco_cfg = replace(aco_cfg, iterations=cfg.iterations)
        qaco_cfg = replace(qaco_cfg, max_iterations=cfg.iterations)
    try:
        qaco_cfg = replace(qaco_cfg, max_cities=cfg.cap, noise=cfg.noise)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    return aco_cfg, qaco_cfg


def solve_once(cfg: ExperimentConfig, inst: TspInstance, rng: np.random.Generator) -> SolveResult:
    aco_cfg, qaco_cfg = _solver_configs(cfg)

    def aco_sub(sub, r):
        return aco_solve(sub, aco_cfg, r)

    def qaco_sub(sub, r):
        return qaco_solve(sub, qaco_cfg, r)

    if cfg.algorithm == "aco":
        return aco_sub(inst, rng)
    if cfg.algorithm == "qaco":
        return qaco_sub(inst, rng)
    sub = aco_sub if cfg.algorithm == "aco-kmeans" else qaco_sub
    return hierarchical_solve(inst, sub, cfg.cap, rng, restarts=cfg.kmeans_restarts)


def run_experiment(cfg: ExperimentConfig, instance: TspInstance | None = None) -> RunReport:
    """Run every seed independently; each seed owns a fresh generator."""
    inst = instance if instance is not None else resolve_instance(cfg.instance, cfg.metric)
    _validate(cfg, inst)
    _solver_configs(cfg)  # surfaces bad solver settings before any seed runs
    records = []
    for seed in cfg.seeds:
        rng = np.random.default_rng(seed)
        t0 = time.perf_counter()
        res = solve_once(cfg, inst, rng)
        wall = (time.perf_counter() - t0) * 1e3
        records.append(
            SeedRecord(
                seed=int(seed),
                best_length=float(res.length),
                best_tour=[int(c) for c in res.tour],
                trace=[(int(i), float(v)) for i, v in res.trace],
                wall_ms=wall,
                feasible=is_permutation(res.tour, inst.dimension),
            )
        )
    noise = "none" if not cfg.noise.active else f"{cfg.noise.model.value}:{cfg.noise.rate:g}"
    return RunReport(cfg.algorithm, inst.name, noise, records)


def noise_sweep(
    cfg: ExperimentConfig,
    rates: Sequence[float] = SWEEP_RATES,
    models: Iterable[NoiseModel] = SWEEP_MODELS,
) -> dict[tuple[NoiseModel, float], RunReport]:
    """One experiment per (model, rate) cell, all cells on the same seeds."""
    inst = resolve_instance(cfg.instance, cfg.metric)
    for r in rates:
        if not 0.0 <= r <= 1.0:
            raise ConfigError(f"noise rate {r} outside [0, 1]")
    table = {}
    for model in models:
        for rate in rates:
            spec = NoiseSpec(model, rate, cfg.noise.placement)
            table[(NoiseModel(model), rate)] = run_experiment(replace(cfg, noise=spec), inst)
    return table


# --- reporters ------------------------------------------------------------


def _num(v: float) -> str:
    return repr(float(v))


def _record_dict(r: SeedRecord, timing: bool) -> dict:
    d = asdict(r)
    d["trace"] = [list(p) for p in r.trace]
    d["wall_ms"] = r.wall_ms if timing else None
    return d


def report_to_dict(report: RunReport, timing: bool = False) -> dict:
    return {
        "algorithm": report.algorithm,
        "instance": report.instance,
        "noise": report.noise,
        "records": [_record_dict(r, timing) for r in report.records],
        "aggregate": {"min": report.min, "mean": report.mean, "std": report.std},
    }


def report_from_dict(d: dict) -> RunReport:
    recs = [
        SeedRecord(
            seed=r["seed"],
            best_length=r["best_length"],
            best_tour=r["best_tour"],
            trace=[tuple(p) for p in r["trace"]],
            wall_ms=r["wall_ms"] if r["wall_ms"] is not None else math.nan,
            feasible=r["feasible"],
        )
        for r in d["records"]
    ]
    return RunReport(d["algorithm"], d["instance"], d["noise"], recs)


def _svg(reports: Sequence[RunReport]) -> str:
    w, h, pad = 640, 400, 40
    series = [(rep.label, rec) for rep in reports for rec in rep.records if rec.trace]
    xs = [i for _, rec in series for i, _ in rec.trace] or [1]
    ys = [v for _, rec in series for _, v in rec.trace] or [0.0]
    x0, x1 = min(xs), max(max(xs), min(xs) + 1)
    y0, y1 = min(ys), max(ys)
    if y1 == y0:
        y1 = y0 + 1.0
    palette = ("#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f")
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">',
        f'<rect width="{w}" height="{h}" fill="white"/>',
        f'<text x="{pad}" y="20" font-size="12">best length vs iteration ({y0:.6g} .. {y1:.6g})</text>',
    ]
    for k, (label, rec) in enumerate(series):
        pts = " ".join(
            f"{pad + (i - x0) / (x1 - x0) * (w - 2 * pad):.2f},{h - pad - (v - y0) / (y1 - y0) * (h - 2 * pad):.2f}"
            for i, v in rec.trace
        )
        out.append(
            f'<polyline fill="none" stroke="{palette[k % len(palette)]}" stroke-width="1.5" '
            f'points="{pts}"><title>{label} seed {rec.seed}</title></polyline>'
        )
    out.append("</svg>")
    return "\n".join(out) + "\n"


def emit_report(reports: RunReport | Sequence[RunReport], fmt: str = "csv", timing: bool = False) -> str:
    """Serialise one or more reports.

    ``wall_ms`` is left blank (CSV) or null (JSON) unless ``timing`` is set, so
    identical configurations give byte-identical output.
    """
    if isinstance(reports, RunReport):
        reports = [reports]
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for rep in reports:
            for r in rep.records:
                writer.writerow(
                    [rep.label, rep.instance, r.seed, _num(r.best_length), f"{r.wall_ms:.3f}" if timing else ""]
                )
        return buf.getvalue()
    if fmt == "json":
        payload = [report_to_dict(rep, timing) for rep in reports]
        return json.dumps(payload[0] if len(payload) == 1 else payload, indent=2) + "\n"
    if fmt == "svg":
        return _svg(reports)
    if fmt == "tour":
        rep, rec = min(((rep, r) for rep in reports for r in rep.records), key=lambda p: p[1].best_length)
        return format_tour(rep.instance, rec.best_length, rec.best_tour)
    raise ConfigError(f"unknown format {fmt!r}")


def write_output(text: str, path: str | None) -> None:
    if path is None:
        print(text, end="")
        return
    try:
        with open(path, "w") as fh:
            fh.write(text)
    except OSError as exc:
        raise ConfigError(f"cannot write {path}: {exc}") from None


def sweep_summary(table: dict[tuple[NoiseModel, float], RunReport]) -> str:
    """Mean best length per (model, rate), laid out like the noise table."""
    rates = sorted({rate for _, rate in table})
    models = list(dict.fromkeys(m for m, _ in table))
    lines = ["model," + ",".join(f"{r:g}" for r in rates)]
    for m in models:
        lines.append(m.value + "," + ",".join(_num(table[(m, r)].mean) for r in rates))
    return "\n".join(lines) + "\n"

