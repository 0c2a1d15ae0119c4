"""TSPLIB ingestion, distance metrics, tour evaluation and random instances."""

from __future__ import annotations

import enum
from dataclasses import dataclass, replace
from functools import cached_property
from importlib import resources
from typing import Sequence

import numpy as np

from .errors import TsplibParseError

GEO_PI = 3.141592
GEO_RADIUS = 6378.388

EXPLICIT_FORMATS = ("FULL_MATRIX", "UPPER_ROW", "LOWER_ROW", "UPPER_DIAG_ROW", "LOWER_DIAG_ROW")
BUILTIN = {"ulysses16": "ulysses16.tsp", "bayg29_display": "bayg29_display.tsp"}


class Metric(str, enum.Enum):
    EUC_2D = "EUC_2D"
    GEO = "GEO"
    RAW_EUCLIDEAN = "RAW_EUCLIDEAN"
    EXPLICIT = "EXPLICIT"


@dataclass(frozen=True, eq=False)
class TspInstance:
    name: str
    metric: Metric
    coords: np.ndarray | None = None
    weights: np.ndarray | None = None
    display: np.ndarray | None = None
    comment: str = ""
    edge_weight_format: str | None = None

    def __post_init__(self):
        if self.metric is Metric.EXPLICIT:
            if self.weights is None:
                raise ValueError("EXPLICIT instance needs a weight matrix")
            w = self.weights
            if w.ndim != 2 or w.shape[0] != w.shape[1]:
                raise ValueError("weight matrix must be square")
            if not np.array_equal(w, w.T) or np.any(np.diag(w) != 0):
                raise ValueError("weight matrix must be symmetric with zero diagonal")
        elif self.coords is None:
            raise ValueError(f"{self.metric.value} instance needs node coordinates")

    @property
    def dimension(self) -> int:
        data = self.weights if self.metric is Metric.EXPLICIT else self.coords
        return len(data)

    @property
    def points(self) -> np.ndarray | None:
        """Planar positions used for clustering (node coords, else display coords)."""
        return self.coords if self.coords is not None else self.display

    @cached_property
    def matrix(self) -> np.ndarray:
        m = distance_matrix(self)
        m.setflags(write=False)
        return m

    def distance(self, i: int, j: int) -> float:
        n = self.dimension
        if not (0 <= i < n and 0 <= j < n):
            raise IndexError(f"city index out of range for dimension {n}: ({i}, {j})")
        return float(self.matrix[i, j])

    def with_metric(self, metric: Metric | str) -> TspInstance:
        metric = Metric(metric)
        if metric is self.metric:
            return self
        if metric is Metric.EXPLICIT:
            return replace(self, metric=metric, weights=self.matrix.copy())
        return replace(self, metric=metric)

    def subinstance(self, cities: Sequence[int], name: str | None = None) -> TspInstance:
        """Explicit instance over a subset of cities, in the given order."""
        idx = np.asarray(cities, dtype=int)
        pts = self.points
        return TspInstance(
            name=name or f"{self.name}[{len(idx)}]",
            metric=Metric.EXPLICIT,
            weights=self.matrix[np.ix_(idx, idx)].copy(),
            display=None if pts is None else pts[idx].copy(),
        )

    def __eq__(self, other):
        if not isinstance(other, TspInstance):
            return NotImplemented
        return (
            self.name == other.name
            and self.metric == other.metric
            and self.comment == other.comment
            and self.edge_weight_format == other.edge_weight_format
            and _arr_eq(self.coords, other.coords)
            and _arr_eq(self.weights, other.weights)
            and _arr_eq(self.display, other.display)
        )

    __hash__ = None


def _arr_eq(a, b) -> bool:
    if a is None or b is None:
        return a is None and b is None
    return a.shape == b.shape and np.array_equal(a, b)


def from_points(points, name: str = "points", metric: Metric | str = Metric.RAW_EUCLIDEAN) -> TspInstance:
    return TspInstance(name=name, metric=Metric(metric), coords=np.asarray(points, dtype=float))


def from_matrix(weights, name: str = "explicit", points=None) -> TspInstance:
    return TspInstance(
        name=name,
        metric=Metric.EXPLICIT,
        weights=np.asarray(weights, dtype=float),
        display=None if points is None else np.asarray(points, dtype=float),
    )


# --- metrics -------------------------------------------------------------


def _nint(x):
    return np.floor(x + 0.5)


def geo_radians(x):
    """TSPLIB DDD.MM coordinate to radians (degrees truncated, minutes scaled by 5/3)."""
    x = np.asarray(x, dtype=float)
    deg = np.trunc(x)
    minutes = x - deg
    return GEO_PI * (deg + 5.0 * minutes / 3.0) / 180.0


def distance_matrix(inst: TspInstance) -> np.ndarray:
    if inst.metric is Metric.EXPLICIT:
        return np.array(inst.weights, dtype=float)
    c = inst.coords
    if inst.metric is Metric.GEO:
        lat = geo_radians(c[:, 0])
        lon = geo_radians(c[:, 1])
        q1 = np.cos(lon[:, None] - lon[None, :])
        q2 = np.cos(lat[:, None] - lat[None, :])
        q3 = np.cos(lat[:, None] + lat[None, :])
        arg = np.clip(0.5 * ((1.0 + q1) * q2 - (1.0 - q1) * q3), -1.0, 1.0)
        d = np.trunc(GEO_RADIUS * np.arccos(arg) + 1.0)
    else:
        diff = c[:, None, :] - c[None, :, :]
        d = np.sqrt((diff**2).sum(axis=-1))
        if inst.metric is Metric.EUC_2D:
            d = _nint(d)
    np.fill_diagonal(d, 0.0)
    return d


def validate_tour(tour: Sequence[int], n: int) -> list[int]:
    t = [int(x) for x in tour]
    if len(t) != n or sorted(t) != list(range(n)):
        raise ValueError(f"not a permutation of range({n}): {list(tour)!r}")
    return t


def is_permutation(tour: Sequence[int], n: int) -> bool:
    try:
        validate_tour(tour, n)
    except (TypeError, ValueError):
        return False
    return True


def tour_length(inst: TspInstance | np.ndarray, tour: Sequence[int]) -> float:
    m = inst.matrix if isinstance(inst, TspInstance) else np.asarray(inst)
    t = np.asarray(validate_tour(tour, len(m)), dtype=int)
    return float(m[t, np.roll(t, -1)].sum())


def random_instance(
    n: int, seed: int, box: tuple[float, float, float, float] = (0.0, 1000.0, 0.0, 1000.0)
) -> TspInstance:
    """`n` uniform points in (xmin, xmax, ymin, ymax); exact duplicates are redrawn."""
    if n < 2:
        raise ValueError("random instance needs at least 2 cities")
    xmin, xmax, ymin, ymax = box
    rng = np.random.default_rng(seed)
    pts = np.empty((n, 2))
    seen: set[tuple[float, float]] = set()
    i = 0
    while i < n:
        p = (float(rng.uniform(xmin, xmax)), float(rng.uniform(ymin, ymax)))
        if p in seen:
            continue
        seen.add(p)
        pts[i] = p
        i += 1
    return TspInstance(name=f"random{n}-s{seed}", metric=Metric.RAW_EUCLIDEAN, coords=pts)


# --- TSPLIB reader / writer ----------------------------------------------

_SECTIONS = {"NODE_COORD_SECTION", "EDGE_WEIGHT_SECTION", "DISPLAY_DATA_SECTION"}


def _is_keyword(token: str) -> bool:
    return token[:1].isalpha()


def parse_tsplib(text: str) -> TspInstance:
    spec: dict[str, tuple[str, int]] = {}
    sections: dict[str, tuple[list[str], int]] = {}
    current: str | None = None
    lines = text.splitlines()
    lineno = 0
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line:
            continue
        head = line.split()[0].rstrip(":")
        if _is_keyword(head):
            current = None
            if head == "EOF":
                break
            if head in _SECTIONS:
                current = head
                sections[head] = ([], lineno)
                continue
            if ":" not in line:
                raise TsplibParseError(f"malformed specification line {line!r}", lineno)
            key, value = line.split(":", 1)
            spec[key.strip().upper()] = (value.strip(), lineno)
            continue
        if current is None:
            raise TsplibParseError(f"data outside of any section: {line!r}", lineno)
        sections[current][0].extend(line.split())
    end_line = lineno

    def need(key: str) -> tuple[str, int]:
        if key not in spec:
            raise TsplibParseError(f"missing required field {key}")
        return spec[key]

    name = need("NAME")[0]
    dim_text, dim_line = need("DIMENSION")
    try:
        n = int(dim_text)
    except ValueError:
        raise TsplibParseError(f"DIMENSION is not an integer: {dim_text!r}", dim_line) from None
    ewt, ewt_line = need("EDGE_WEIGHT_TYPE")
    try:
        metric = Metric(ewt.upper())
    except ValueError:
        raise TsplibParseError(f"unknown EDGE_WEIGHT_TYPE {ewt!r}", ewt_line) from None
    if "TYPE" in spec and spec["TYPE"][0].upper() not in ("TSP",):
        raise TsplibParseError(f"unsupported TYPE {spec['TYPE'][0]!r}", spec["TYPE"][1])
    comment = spec.get("COMMENT", ("", 0))[0]

    def node_table(section: str) -> np.ndarray | None:
        if section not in sections:
            return None
        tokens, start = sections[section]
        if len(tokens) % 3:
            raise TsplibParseError(f"{section} rows must be 'id x y'", start)
        rows = np.array(tokens, dtype=float).reshape(-1, 3)
        if len(rows) != n:
            raise TsplibParseError(
                f"{section} has {len(rows)} nodes but DIMENSION is {n}", end_line
            )
        ids = rows[:, 0].astype(int)
        if sorted(ids) != list(range(1, n + 1)):
            raise TsplibParseError(f"{section} node ids must be 1..{n}", start)
        out = np.empty((n, 2))
        out[ids - 1] = rows[:, 1:]
        return out

    coords = node_table("NODE_COORD_SECTION")
    display = node_table("DISPLAY_DATA_SECTION")
    weights = None
    fmt = None
    if metric is Metric.EXPLICIT:
        fmt, fmt_line = need("EDGE_WEIGHT_FORMAT")
        fmt = fmt.upper()
        if fmt not in EXPLICIT_FORMATS:
            raise TsplibParseError(f"unsupported EDGE_WEIGHT_FORMAT {fmt!r}", fmt_line)
        if "EDGE_WEIGHT_SECTION" not in sections:
            raise TsplibParseError("missing required section EDGE_WEIGHT_SECTION", end_line)
        tokens, start = sections["EDGE_WEIGHT_SECTION"]
        weights = _unpack_weights(np.array(tokens, dtype=float), n, fmt, end_line)
        coords = None
    elif coords is None:
        raise TsplibParseError("missing required section NODE_COORD_SECTION", end_line)
    try:
        return TspInstance(
            name=name,
            metric=metric,
            coords=coords,
            weights=weights,
            display=display,
            comment=comment,
            edge_weight_format=fmt,
        )
    except ValueError as exc:
        raise TsplibParseError(str(exc), end_line) from None


def _unpack_weights(values: np.ndarray, n: int, fmt: str, line: int) -> np.ndarray:
    w = np.zeros((n, n))
    if fmt == "FULL_MATRIX":
        expected = n * n
    elif fmt in ("UPPER_ROW", "LOWER_ROW"):
        expected = n * (n - 1) // 2
    else:
        expected = n * (n + 1) // 2
    if len(values) != expected:
        raise TsplibParseError(
            f"EDGE_WEIGHT_SECTION has {len(values)} values, {fmt} with DIMENSION {n} needs {expected}",
            line,
        )
    if fmt == "FULL_MATRIX":
        return values.reshape(n, n)
    # numpy's triangle index helpers enumerate in row-major order, as TSPLIB does
    idx = {
        "UPPER_ROW": np.triu_indices(n, k=1),
        "UPPER_DIAG_ROW": np.triu_indices(n, k=0),
        "LOWER_ROW": np.tril_indices(n, k=-1),
        "LOWER_DIAG_ROW": np.tril_indices(n, k=0),
    }[fmt]
    w[idx] = values
    return w + w.T - np.diag(np.diag(w))


def _fmt_num(v: float) -> str:
    v = float(v)
    return str(int(v)) if v.is_integer() and abs(v) < 2**53 else repr(v)


def write_tsplib(inst: TspInstance) -> str:
    out = [f"NAME: {inst.name}", "TYPE: TSP"]
    if inst.comment:
        out.append(f"COMMENT: {inst.comment}")
    out += [f"DIMENSION: {inst.dimension}", f"EDGE_WEIGHT_TYPE: {inst.metric.value}"]
    if inst.metric is Metric.EXPLICIT:
        fmt = inst.edge_weight_format or "FULL_MATRIX"
        out.append(f"EDGE_WEIGHT_FORMAT: {fmt}")
        out.append("EDGE_WEIGHT_SECTION")
        out += _pack_weights(inst.weights, fmt)
    else:
        out.append("NODE_COORD_SECTION")
        out += [f"{i + 1} {_fmt_num(x)} {_fmt_num(y)}" for i, (x, y) in enumerate(inst.coords)]
    if inst.display is not None:
        out.append("DISPLAY_DATA_SECTION")
        out += [f"{i + 1} {_fmt_num(x)} {_fmt_num(y)}" for i, (x, y) in enumerate(inst.display)]
    out.append("EOF")
    return "\n".join(out) + "\n"


def _pack_weights(w: np.ndarray, fmt: str) -> list[str]:
    n = len(w)
    rows = []
    for i in range(n):
        if fmt == "FULL_MATRIX":
            cols = range(n)
        elif fmt == "UPPER_ROW":
            cols = range(i + 1, n)
        elif fmt == "UPPER_DIAG_ROW":
            cols = range(i, n)
        elif fmt == "LOWER_ROW":
            cols = range(i)
        else:
            cols = range(i + 1)
        if len(cols):
            rows.append(" ".join(_fmt_num(w[i, j]) for j in cols))
    return rows


def load_tsplib(path_or_name: str) -> TspInstance:
    """Read a TSPLIB file by path, or one of the bundled instances by name."""
    key = path_or_name.removesuffix(".tsp")
    if key in BUILTIN:
        text = resources.files("qaco.data").joinpath(BUILTIN[key]).read_text()
    else:
        with open(path_or_name) as fh:
            text = fh.read()
    return parse_tsplib(text)


# --- tour files ----------------------------------------------------------


def format_tour(name: str, length: float, tour: Sequence[int]) -> str:
    return f"{name} {_fmt_num(length)}\n" + "".join(f"{int(c)}\n" for c in tour)


def parse_tour(text: str) -> tuple[str, float, list[int]]:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    name, length = lines[0].rsplit(None, 1)
    return name, float(length), [int(ln) for ln in lines[1:]]

