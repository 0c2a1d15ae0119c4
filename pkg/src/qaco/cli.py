"""Command line: ``qaco solve|sweep|compare <instance> ...``.

Instances are TSPLIB paths, bundled names (``ulysses16``, ``bayg29_display``)
or ``random:N:SEED``. A flat ``key = value`` config file may supply any flag;
flags given on the command line win.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace

from . import bench
from .aco import AcoConfig
from .errors import ConfigError
from .pheromone import QacoConfig
from .qsim import NoiseModel, NoiseSpec

ALGO_ALIASES = {"aco+kmeans": "aco-kmeans", "qaco+kmeans": "qaco-kmeans"}


def read_config_file(path: str) -> dict[str, str]:
    values = {}
    try:
        with open(path) as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    for n, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{n}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        values[key.replace("-", "_")] = value
    return values


def parse_seeds(text: str) -> tuple[int, ...]:
    """``"3"``, ``"0,1,5"`` or a half-open range ``"0:10"``."""
    text = text.strip()
    try:
        if ":" in text:
            lo, hi = text.split(":")
            return tuple(range(int(lo), int(hi)))
        return tuple(int(s) for s in text.split(",") if s.strip())
    except ValueError:
        raise ConfigError(f"bad seed list {text!r}") from None


def _floats(text: str) -> list[float]:
    try:
        return [float(s) for s in text.split(",") if s.strip()]
    except ValueError:
        raise ConfigError(f"bad number list {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("instance", nargs="?")
    common.add_argument("--config")
    common.add_argument("--seed", type=int)
    common.add_argument("--seeds")
    common.add_argument("--iters", type=int)
    common.add_argument("--cap", type=int)
    common.add_argument("--noise", help="MODEL:RATE with MODEL in {bitflip, thermal}")
    common.add_argument("--noise-placement", choices=["multi", "all"])
    common.add_argument("--metric", choices=["euc_2d", "geo", "raw_euclidean", "explicit"])
    common.add_argument("--restarts", type=int, help="K-means restarts")
    common.add_argument("--ants", type=int)
    common.add_argument("--alpha", type=float)
    common.add_argument("--beta", type=float)
    common.add_argument("--rho", type=float)
    common.add_argument("--q0", type=float)
    common.add_argument("--out")
    common.add_argument("--format", choices=bench.FORMATS)
    common.add_argument("--timing", action="store_true", help="fill the wall_ms column")

    p = argparse.ArgumentParser(prog="qaco", description="Quantum ant colony TSP toolkit")
    sub = p.add_subparsers(dest="command", required=True)
    s = sub.add_parser("solve", parents=[common], help="run one algorithm over a seed list")
    s.add_argument("--algo")
    w = sub.add_parser("sweep", parents=[common], help="noise-rate sweep over both noise models")
    w.add_argument("--algo")
    w.add_argument("--rates")
    w.add_argument("--models")
    w.add_argument("--summary", action="store_true", help="print the mean-per-cell table instead")
    c = sub.add_parser("compare", parents=[common], help="several algorithms on paired seeds")
    c.add_argument("--algos")
    return p


def _merged(args: argparse.Namespace) -> dict:
    opts = read_config_file(args.config) if args.config else {}
    for key, value in vars(args).items():
        if value is not None and value is not False and key not in ("config", "command"):
            opts[key] = value
    return opts


def _get(opts, key, conv, default=None):
    if key not in opts:
        return default
    try:
        return conv(opts[key])
    except (TypeError, ValueError):
        raise ConfigError(f"bad value for {key}: {opts[key]!r}") from None


def _algo(name: str) -> str:
    name = name.lower()
    return ALGO_ALIASES.get(name, name)


def experiment_from_options(opts: dict) -> bench.ExperimentConfig:
    if not opts.get("instance"):
        raise ConfigError("no instance given")
    if "seeds" in opts:
        seeds = parse_seeds(str(opts["seeds"]))
    elif "seed" in opts:
        seeds = (_get(opts, "seed", int),)
    else:
        seeds = (0,)
    noise = NoiseSpec.parse(str(opts["noise"])) if "noise" in opts else NoiseSpec()
    if "noise_placement" in opts:
        noise = replace(noise, placement=opts["noise_placement"])
    aco_kw = {
        k: _get(opts, src, conv)
        for k, src, conv in (
            ("num_ants", "ants", int),
            ("alpha", "alpha", float),
            ("beta", "beta", float),
            ("rho", "rho", float),
            ("q0", "q0", float),
        )
        if src in opts
    }
    return bench.ExperimentConfig(
        instance=str(opts["instance"]),
        algorithm=_algo(str(opts.get("algo", "qaco-kmeans"))),
        seeds=seeds,
        iterations=_get(opts, "iters", int),
        cap=_get(opts, "cap", int, 4),
        metric=opts.get("metric"),
        noise=noise,
        aco=AcoConfig(**aco_kw),
        qaco=QacoConfig(max_iterations=1000),
        kmeans_restarts=_get(opts, "restarts", int, 10),
        output=opts.get("out"),
        format=str(opts.get("format", "csv")),
    )


def _flag(opts, key) -> bool:
    v = opts.get(key, False)
    return v if isinstance(v, bool) else str(v).lower() in ("1", "true", "yes", "on")


def run(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    opts = _merged(args)
    cfg = experiment_from_options(opts)
    timing = _flag(opts, "timing")
    if args.command == "solve":
        reports = [bench.run_experiment(cfg)]
    elif args.command == "compare":
        algos = [_algo(a) for a in str(opts.get("algos", "aco,aco-kmeans,qaco-kmeans")).split(",") if a.strip()]
        if not algos:
            raise ConfigError("no algorithms to compare")
        inst = bench.resolve_instance(cfg.instance, cfg.metric)
        reports = [bench.run_experiment(replace(cfg, algorithm=a), inst) for a in algos]
    else:
        rates = _floats(str(opts["rates"])) if "rates" in opts else list(bench.SWEEP_RATES)
        try:
            models = [NoiseModel(m.strip().lower()) for m in str(opts.get("models", "bitflip,thermal")).split(",")]
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        table = bench.noise_sweep(cfg, rates, models)
        if _flag(opts, "summary"):
            bench.write_output(bench.sweep_summary(table), cfg.output)
            return 0
        reports = list(table.values())
    bench.write_output(bench.emit_report(reports, cfg.format, timing=timing), cfg.output)
    return 0


def main(argv: list[str] | None = None) -> int:
    try:
        return run(argv)
    except ConfigError as exc:
        print(f"qaco: configuration error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
