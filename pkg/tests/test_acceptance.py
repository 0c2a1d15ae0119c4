"""End-to-end acceptance criteria; one PASS/FAIL line per criterion is printed
in the terminal summary."""

import functools
import math
import subprocess
import sys
import time
from itertools import product

import numpy as np

from oracles import brute_force_tsp
from qaco import qsim
from qaco.aco import AcoConfig
from qaco.bench import ExperimentConfig, run_experiment
from qaco.cluster import kmeans, lloyd
from qaco.pheromone import (
    PI,
    QacoConfig,
    SolutionPool,
    SubproblemEncoding,
    decode_bitstring,
    delta_theta,
    encode_tour,
    mutation_angle,
    pool_selection_probs,
    qaco_solve,
    repair,
)
from qaco.qsim import NoiseModel, NoiseSpec
from qaco.tspio import is_permutation, random_instance

RESULTS: list[str] = []
SEEDS = tuple(range(10))


def record(n: int, ok: bool, detail: str) -> None:
    line = f"ACCEPTANCE criterion {n}: {'PASS' if ok else 'FAIL'} - {detail}"
    RESULTS.append(line)
    print(line)
    assert ok, line


def three_qubit_state():
    s = qsim.init_state(3)
    for q, theta in enumerate((PI / 2, -PI / 2, 2 * PI / 3)):
        s = qsim.apply_ry(s, q, theta)
    return s


# cached runs shared by the trend criteria and the feasibility check


@functools.lru_cache(maxsize=None)
def four_city_runs():
    out = []
    for s in range(20):
        inst = random_instance(4, 1000 + s)
        res = qaco_solve(inst, QacoConfig(max_iterations=200), np.random.default_rng(s))
        out.append((inst, res))
    return out


@functools.lru_cache(maxsize=None)
def ulysses_reports():
    aco = ExperimentConfig("ulysses16", "aco", SEEDS, metric="raw_euclidean", aco=AcoConfig())
    qk = ExperimentConfig("ulysses16", "qaco-kmeans", SEEDS, metric="raw_euclidean")
    return run_experiment(aco), run_experiment(qk)


NOISE_SETTINGS = [NoiseSpec(m, r) for m, r in product((NoiseModel.BIT_FLIP, NoiseModel.THERMAL_RELAXATION), (0.01, 0.1))]


@functools.lru_cache(maxsize=None)
def bayg29_reports():
    base = ExperimentConfig("bayg29_display", "qaco-kmeans", SEEDS, metric="raw_euclidean")
    clean = run_experiment(base)
    noisy = [run_experiment(ExperimentConfig(**{**base.__dict__, "noise": spec})) for spec in NOISE_SETTINGS]
    return clean, noisy


def test_criterion_01_three_qubit_exactness():
    t0 = time.perf_counter()
    p = qsim.probabilities(three_qubit_state())
    err = float(np.abs(p - np.array([1 / 16, 3 / 16] * 4)).max())
    dt = time.perf_counter() - t0
    record(1, err <= 1e-12 and dt < 1.0, f"max |p - (1/16, 3/16, ...)| = {err:.2e}, {dt * 1e3:.1f} ms")


def test_criterion_02_sampling_fidelity():
    t0 = time.perf_counter()
    rng = np.random.default_rng(2024)
    state = three_qubit_state()
    n = 16_000
    counts = np.zeros(8)
    for _ in range(n):
        counts[int(qsim.sample(state, rng), 2)] += 1
    p = qsim.probabilities(state)
    z = np.abs(counts / n - p) / np.sqrt(p * (1 - p) / n)
    dt = time.perf_counter() - t0
    record(2, bool(z.max() <= 5) and dt < 5.0, f"max deviation {z.max():.2f} sigma over 8 outcomes, {dt:.2f} s")


def test_criterion_03_selection_oracle():
    rng = np.random.default_rng(3)
    worst_sum = worst_elem = 0.0
    for _ in range(1000):
        d = rng.integers(1, 33, size=int(rng.integers(1, 11)))
        p = pool_selection_probs(d)
        inv_total = sum(1.0 / x for x in d)
        oracle = [1.0 / (x * inv_total) for x in d]
        worst_sum = max(worst_sum, abs(p.sum() - 1.0))
        worst_elem = max(worst_elem, float(np.abs(p - oracle).max()))
    record(3, worst_sum <= 1e-12 and worst_elem <= 1e-12, f"max |sum-1| = {worst_sum:.1e}, max |p - oracle| = {worst_elem:.1e}")


ROTATION_ROWS = [
    (0, 0, True, -0.01),
    (0, 0, False, 0.04),
    (0, 1, True, -0.05),
    (0, 1, False, 0.07),
    (1, 0, True, 0.05),
    (1, 0, False, -0.07),
    (1, 1, True, 0.01),
    (1, 1, False, -0.04),
]


def test_criterion_04_rotation_table():
    bad = [(x, b, f) for x, b, f, v in ROTATION_ROWS if not math.isclose(delta_theta(x, b, f), v * PI, abs_tol=1e-15)]
    record(4, not bad, f"{8 - len(bad)}/8 rows match" + (f", mismatched {bad}" if bad else ""))


def test_criterion_05_mutation_schedule():
    expected = {0: 0.0, 4: 0.0, 5: PI / 6, 9: PI / 6, 10: PI / 4, 14: PI / 4, 15: PI / 2, 16: 0.0}
    got = {c: mutation_angle(c) for c in expected}
    record(5, got == expected, "angles at counts 0,4,5,9,10,14,15,16 = " + ", ".join(f"{v / PI:.4g}pi" for v in got.values()))


def test_criterion_06_four_city_exactness():
    t0 = time.perf_counter()
    runs = four_city_runs()
    dt = time.perf_counter() - t0
    hits = sum(math.isclose(res.length, brute_force_tsp(inst.matrix)[0], rel_tol=1e-9) for inst, res in runs)
    record(6, hits >= 18 and dt < 30, f"optimum in {hits}/20 runs (need 18), {dt:.1f} s")


def test_criterion_07_benchmark_trend():
    t0 = time.perf_counter()
    aco, qk = ulysses_reports()
    dt = time.perf_counter() - t0
    ok = qk.mean <= aco.mean and dt < 600
    record(
        7,
        ok,
        f"ulysses16 RAW_EUCLIDEAN, 10 seeds: mean QACO+KMEANS {qk.mean:.4f} vs ACO {aco.mean:.4f} "
        f"(need <=), {dt:.0f} s",
    )


def test_criterion_08_noise_robustness():
    t0 = time.perf_counter()
    clean, noisy = bayg29_reports()
    dt = time.perf_counter() - t0
    rel = [abs(rep.mean - clean.mean) / clean.mean for rep in noisy]
    cells = ", ".join(f"{rep.noise} {rep.mean:.1f}" for rep in noisy)
    record(
        8,
        max(rel) <= 0.25 and dt < 1200,
        f"noiseless mean {clean.mean:.1f}; {cells}; max rel. change {max(rel):.2%} (need <= 25%), {dt:.0f} s",
    )


def test_criterion_09_feasibility():
    tours = [(res.tour, 4) for _, res in four_city_runs()]
    for rep in ulysses_reports():
        tours += [(r.best_tour, 16) for r in rep.records]
    clean, noisy = bayg29_reports()
    for rep in [clean, *noisy]:
        tours += [(r.best_tour, 29) for r in rep.records]
    bad_tours = sum(not is_permutation(t, n) for t, n in tours)

    rng = np.random.default_rng(9)
    bad_repairs = 0
    fuzzed = 100_000
    encs = {k: SubproblemEncoding.for_cities(k) for k in (2, 3, 4)}
    pools = {}
    for k, enc in encs.items():
        pools[k] = SolutionPool(10)
        for _ in range(10):
            t = [int(c) for c in rng.permutation(k)]
            pools[k].add(t, encode_tour(t, enc), float(rng.uniform()))
    cfg = QacoConfig()
    for i in range(fuzzed):
        k = (2, 3, 4)[i % 3]
        enc = encs[k]
        bits = "".join(map(str, rng.integers(0, 2, enc.path_qubits)))
        iteration = int(rng.integers(1, 201))
        tour = repair(bits, iteration, pools[k], cfg, rng, enc)
        if not is_permutation(tour, k) or (decode_bitstring(bits, enc) not in (None, tour)):
            bad_repairs += 1
    record(
        9,
        bad_tours == 0 and bad_repairs == 0,
        f"{len(tours) - bad_tours}/{len(tours)} acceptance tours valid; {fuzzed - bad_repairs}/{fuzzed} fuzzed repairs feasible",
    )


def test_criterion_10_kmeans_properties():
    rng = np.random.default_rng(10)
    violations = 0
    for _ in range(100):
        n = int(rng.integers(5, 80))
        x = rng.uniform(0, 100, (n, 2))
        k = int(rng.integers(1, min(n, 8) + 1))
        h = lloyd(x, x[rng.choice(n, k, replace=False)]).history
        violations += any(b > a + 1e-9 * max(1.0, a) for a, b in zip(h, h[1:]))
    x = rng.uniform(0, 100, (30, 2))
    one = kmeans(x, 1, rng=rng)
    k1 = np.allclose(one.centroids[0], x.mean(axis=0), rtol=0, atol=1e-12) and math.isclose(
        one.inertia, float(((x - x.mean(axis=0)) ** 2).sum()), rel_tol=1e-12
    )
    kn = kmeans(x, 30, rng=rng).inertia == 0.0
    record(10, violations == 0 and k1 and kn, f"{100 - violations}/100 datasets monotone; k=1 exact: {k1}; k=n exact: {kn}")


def test_criterion_11_cli_determinism(tmp_path):
    outs = []
    for run in ("a", "b"):
        path = tmp_path / f"{run}.csv"
        subprocess.run(
            [sys.executable, "-m", "qaco", "compare", "ulysses16", "--metric", "raw_euclidean",
             "--seeds", "0:3", "--iters", "200", "--out", str(path)],
            check=True,
        )
        outs.append(path.read_bytes())
    rows = outs[0].decode().count("\n") - 1
    record(11, outs[0] == outs[1] and rows == 9, f"two compare runs, {rows} rows each, byte-identical: {outs[0] == outs[1]}")
