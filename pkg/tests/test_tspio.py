import math
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import held_karp
from qaco.errors import TsplibParseError
from qaco.tspio import (
    Metric,
    TspInstance,
    format_tour,
    from_matrix,
    from_points,
    is_permutation,
    load_tsplib,
    parse_tour,
    parse_tsplib,
    random_instance,
    tour_length,
    write_tsplib,
)

DATA = Path(__file__).parent / "data"


def read_tsplib_tour(path):
    lines = Path(path).read_text().split("TOUR_SECTION")[1].split()
    return [int(x) - 1 for x in lines if x != "-1" and x != "EOF"]


def geo_oracle(a, b):
    """Scalar transcription of the published TSPLIB GEO routine."""
    def rad(x):
        deg = int(x)
        return 3.141592 * (deg + 5.0 * (x - deg) / 3.0) / 180.0

    lat_i, lon_i, lat_j, lon_j = rad(a[0]), rad(a[1]), rad(b[0]), rad(b[1])
    q1 = math.cos(lon_i - lon_j)
    q2 = math.cos(lat_i - lat_j)
    q3 = math.cos(lat_i + lat_j)
    return float(int(6378.388 * math.acos(0.5 * ((1.0 + q1) * q2 - (1.0 - q1) * q3)) + 1.0))


def test_ulysses16_header():
    u = load_tsplib("ulysses16")
    assert u.dimension == 16 and u.metric is Metric.GEO and u.name == "ulysses16.tsp"


def test_ulysses16_geo_optimum_matches_published_value():
    u = load_tsplib("ulysses16")
    assert held_karp(u.matrix) == 6859
    assert tour_length(u, read_tsplib_tour(DATA / "ulysses16.opt.tour")) == 6859


def test_gr17_lower_diag_row():
    g = load_tsplib(str(DATA / "gr17.tsp"))
    assert g.dimension == 17 and g.metric is Metric.EXPLICIT and g.edge_weight_format == "LOWER_DIAG_ROW"
    assert held_karp(g.matrix) == 2085


def test_bayg29_canonical_file():
    path = DATA / "bayg29.tsp"
    if not path.exists():
        pytest.skip("canonical bayg29.tsp (EXPLICIT UPPER_ROW) is not bundled; see the README")
    b = load_tsplib(str(path))
    assert b.dimension == 29 and b.metric is Metric.EXPLICIT and b.edge_weight_format == "UPPER_ROW"


def test_bayg29_display_bundle():
    b = load_tsplib("bayg29_display")
    assert b.dimension == 29 and b.metric is Metric.EUC_2D


def test_upper_row_fixture():
    s = load_tsplib(str(DATA / "small_upper_row.tsp"))
    expected = np.array([[0, 3, 4, 5], [3, 0, 6, 7], [4, 6, 0, 8], [5, 7, 8, 0]], dtype=float)
    assert np.array_equal(s.matrix, expected)
    assert tour_length(s, [0, 1, 2, 3]) == 3 + 6 + 8 + 5


@pytest.mark.parametrize("fmt", ["FULL_MATRIX", "UPPER_ROW", "LOWER_ROW", "UPPER_DIAG_ROW", "LOWER_DIAG_ROW"])
def test_explicit_formats_agree(fmt):
    g = load_tsplib(str(DATA / "gr17.tsp"))
    again = parse_tsplib(write_tsplib(TspInstance(**{**g.__dict__, "edge_weight_format": fmt})))
    assert np.array_equal(again.matrix, g.matrix)


def test_missing_dimension_names_field():
    text = "NAME: broken\nTYPE: TSP\nEDGE_WEIGHT_TYPE: EUC_2D\nNODE_COORD_SECTION\n1 0 0\n2 1 1\nEOF\n"
    with pytest.raises(TsplibParseError, match="DIMENSION"):
        parse_tsplib(text)


@pytest.mark.parametrize(
    "text,match,line",
    [
        ("NAME: x\nDIMENSION: two\nEDGE_WEIGHT_TYPE: EUC_2D\n", "DIMENSION", 2),
        ("NAME: x\nDIMENSION: 2\nEDGE_WEIGHT_TYPE: MAN_2D\n", "EDGE_WEIGHT_TYPE", 3),
        ("NAME: x\nDIMENSION: 2\nEDGE_WEIGHT_TYPE: EUC_2D\n1 0 0\n", "outside", 4),
        ("NAME: x\nDIMENSION: 3\nEDGE_WEIGHT_TYPE: EUC_2D\nNODE_COORD_SECTION\n1 0 0\n2 1 1\nEOF\n", "DIMENSION", 7),
    ],
)
def test_parse_errors_carry_line_numbers(text, match, line):
    with pytest.raises(TsplibParseError, match=match) as exc:
        parse_tsplib(text)
    assert str(exc.value).startswith(f"line {line}:")


def test_explicit_value_count_checked():
    text = (
        "NAME: x\nDIMENSION: 3\nEDGE_WEIGHT_TYPE: EXPLICIT\nEDGE_WEIGHT_FORMAT: UPPER_ROW\n"
        "EDGE_WEIGHT_SECTION\n1 2\nEOF\n"
    )
    with pytest.raises(TsplibParseError, match="needs 3"):
        parse_tsplib(text)


def test_asymmetric_matrix_rejected():
    with pytest.raises(ValueError):
        from_matrix([[0, 1], [2, 0]])


def test_distances_3_4_5():
    pts = [(0, 0), (3, 4)]
    assert from_points(pts).distance(0, 1) == 5.0
    assert from_points(pts, metric="EUC_2D").distance(0, 1) == 5
    assert from_points([(0, 0), (1, 1)], metric="EUC_2D").distance(0, 1) == 1  # nint(1.414)
    with pytest.raises(IndexError):
        from_points(pts).distance(0, 2)


def test_geo_against_scalar_oracle():
    u = load_tsplib("ulysses16")
    for i in range(16):
        for j in range(16):
            if i != j:
                assert abs(u.distance(i, j) - geo_oracle(u.coords[i], u.coords[j])) <= 1e-9


@settings(max_examples=100, deadline=None)
@given(
    a=st.tuples(st.floats(-89.59, 89.59), st.floats(-179.59, 179.59)),
    b=st.tuples(st.floats(-89.59, 89.59), st.floats(-179.59, 179.59)),
)
def test_geo_random_pairs(a, b):
    inst = from_points([a, b], metric="GEO")
    assert abs(inst.distance(0, 1) - geo_oracle(a, b)) <= 1e-9


def test_tour_length_examples():
    sq = from_points([(0, 0), (1, 0), (1, 1), (0, 1)])
    assert tour_length(sq, [0, 1, 2, 3]) == 4.0
    two = from_points([(0, 0), (3, 4)])
    assert tour_length(two, [1, 0]) == 10.0
    with pytest.raises(ValueError):
        tour_length(sq, [0, 1, 1, 3])
    with pytest.raises(ValueError):
        tour_length(sq, [0, 1, 2])


def test_ulysses16_reference_tour_raw_euclidean():
    # the published optimal tour, measured in raw coordinate units
    u = load_tsplib("ulysses16").with_metric("RAW_EUCLIDEAN")
    length = tour_length(u, read_tsplib_tour(DATA / "ulysses16.opt.tour"))
    assert length == pytest.approx(74.10873595815309, abs=1e-9)
    assert abs(length - 77.8372) / 77.8372 < 0.05


@settings(max_examples=50, deadline=None)
@given(n=st.integers(3, 9), seed=st.integers(0, 1000), shift=st.integers(0, 8))
def test_tour_length_rotation_and_reversal_invariant(n, seed, shift):
    inst = random_instance(n, seed)
    t = list(np.random.default_rng(seed).permutation(n))
    base = tour_length(inst, t)
    rot = t[shift % n :] + t[: shift % n]
    assert tour_length(inst, rot) == pytest.approx(base, rel=1e-12)
    assert tour_length(inst, rot[::-1]) == pytest.approx(base, rel=1e-12)


def test_random_instance_properties():
    a, b = random_instance(64, 11), random_instance(64, 11)
    assert a == b
    assert np.all((a.coords >= 0) & (a.coords <= 1000))
    two = random_instance(2, 0)
    assert not np.array_equal(two.coords[0], two.coords[1])
    assert random_instance(64, 12) != a
    with pytest.raises(ValueError):
        random_instance(1, 0)


def test_with_metric_and_subinstance():
    u = load_tsplib("ulysses16")
    raw = u.with_metric("RAW_EUCLIDEAN")
    assert raw.distance(0, 1) == pytest.approx(math.dist(u.coords[0], u.coords[1]))
    sub = raw.subinstance([3, 0, 7])
    assert sub.metric is Metric.EXPLICIT and sub.dimension == 3
    assert sub.distance(0, 2) == raw.distance(3, 7)
    assert np.array_equal(sub.points, raw.coords[[3, 0, 7]])


def test_matrix_is_read_only():
    with pytest.raises(ValueError):
        random_instance(4, 0).matrix[0, 1] = 1.0


coords_strategy = st.integers(2, 12).flatmap(
    lambda n: st.lists(
        st.tuples(st.floats(-1e6, 1e6, allow_nan=False), st.floats(-1e6, 1e6, allow_nan=False)),
        min_size=n,
        max_size=n,
    )
)


@settings(max_examples=60, deadline=None)
@given(pts=coords_strategy, metric=st.sampled_from(["EUC_2D", "RAW_EUCLIDEAN", "GEO"]), name=st.from_regex(r"[a-z][a-z0-9_]{0,10}", fullmatch=True))
def test_roundtrip_coordinate_instances(pts, metric, name):
    if metric == "GEO":
        pts = [(x % 89, y % 179) for x, y in pts]
    inst = TspInstance(name=name, metric=Metric(metric), coords=np.array(pts, dtype=float))
    assert parse_tsplib(write_tsplib(inst)) == inst


@settings(max_examples=60, deadline=None)
@given(
    n=st.integers(2, 10),
    seed=st.integers(0, 10_000),
    fmt=st.sampled_from(["FULL_MATRIX", "UPPER_ROW", "LOWER_ROW", "UPPER_DIAG_ROW", "LOWER_DIAG_ROW"]),
    with_display=st.booleans(),
)
def test_roundtrip_explicit_instances(n, seed, fmt, with_display):
    r = np.random.default_rng(seed)
    w = np.triu(r.integers(1, 1000, (n, n)), 1).astype(float)
    w = w + w.T
    display = r.uniform(0, 100, (n, 2)) if with_display else None
    inst = TspInstance("m", Metric.EXPLICIT, weights=w, display=display, edge_weight_format=fmt)
    assert parse_tsplib(write_tsplib(inst)) == inst


def test_roundtrip_bundled_files():
    for name in ("ulysses16", "bayg29_display"):
        inst = load_tsplib(name)
        assert parse_tsplib(write_tsplib(inst)) == inst
    g = load_tsplib(str(DATA / "gr17.tsp"))
    assert parse_tsplib(write_tsplib(g)) == g


def test_tour_file_roundtrip():
    text = format_tour("ulysses16", 74.5, [3, 1, 0, 2])
    assert parse_tour(text) == ("ulysses16", 74.5, [3, 1, 0, 2])
    assert is_permutation(parse_tour(text)[2], 4)
