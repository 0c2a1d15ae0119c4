#!/usr/bin/env python3
"""Best/mean/std tour length per algorithm on the three benchmark instances.

    python scripts/run_benchmarks.py --seeds 0:10 --out benchmarks.csv
"""

import argparse
import csv
import sys

from qaco import bench
from qaco.cli import parse_seeds

INSTANCES = ("ulysses16", "bayg29_display", "random:64:0")
ALGOS = ("aco", "aco-kmeans", "qaco-kmeans")


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--seeds", default="0:10")
    p.add_argument("--iters", type=int, help="iterations for every solver (default: 1000)")
    p.add_argument("--metric", default="raw_euclidean")
    p.add_argument("--instances", default=",".join(INSTANCES))
    p.add_argument("--algos", default=",".join(ALGOS))
    p.add_argument("--out", help="CSV file (default: stdout)")
    args = p.parse_args(argv)

    seeds = parse_seeds(args.seeds)
    rows = []
    for source in args.instances.split(","):
        inst = bench.resolve_instance(source, args.metric)
        for algo in args.algos.split(","):
            cfg = bench.ExperimentConfig(source, algo, seeds, iterations=args.iters, metric=args.metric)
            rep = bench.run_experiment(cfg, inst)
            rows.append([inst.name, algo, f"{rep.min:.4f}", f"{rep.mean:.4f}", f"{rep.std:.4f}"])
            print(f"{inst.name:>16} {algo:>12}  min {rep.min:10.4f}  mean {rep.mean:10.4f}", file=sys.stderr)

    fh = open(args.out, "w", newline="") if args.out else sys.stdout
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["instance", "algorithm", "min", "mean", "std"])
    w.writerows(rows)
    if args.out:
        fh.close()


if __name__ == "__main__":
    main()
