#!/usr/bin/env python3
"""Mean QACO+KMEANS tour length under bit-flip and thermal-relaxation noise.

    python scripts/run_noise_sweep.py --instance bayg29_display --seeds 0:10
"""

import argparse

from qaco import bench
from qaco.cli import parse_seeds
from qaco.qsim import NoiseModel, NoiseSpec


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--instance", default="bayg29_display")
    p.add_argument("--metric", default="raw_euclidean")
    p.add_argument("--seeds", default="0:10")
    p.add_argument("--iters", type=int)
    p.add_argument("--rates", default=",".join(f"{r:g}" for r in bench.SWEEP_RATES))
    p.add_argument("--placement", choices=["multi", "all"], default="multi")
    p.add_argument("--out")
    args = p.parse_args(argv)

    cfg = bench.ExperimentConfig(
        args.instance,
        "qaco-kmeans",
        parse_seeds(args.seeds),
        iterations=args.iters,
        metric=args.metric,
        noise=NoiseSpec(NoiseModel.NONE, 0.0, args.placement),
    )
    clean = bench.run_experiment(cfg)
    table = bench.noise_sweep(cfg, [float(r) for r in args.rates.split(",")])
    text = bench.sweep_summary(table) + f"noiseless,{clean.mean!r}\n"
    bench.write_output(text, args.out)


if __name__ == "__main__":
    main()
