"""Discrete mated-CRT map with boundary built from an (L, R) path.

Cells are consecutive windows of ``cell_size`` of path time, and two cells
a < b are W-adjacent (W either coordinate) when

    max(min of W over cell a, min of W over cell b) <= min of W strictly
    between,

with the empty in-between minimum read as +infinity, so consecutive cells
are always adjacent.  A brute-force O(n^2) evaluation of this rule is the
correctness oracle; the fast builder gets the identical edge set from one
left-to-right monotone-stack sweep per coordinate.

Edges carry one tag each with precedence consecutive > L > R (labels only,
never membership).  Boundary cells are those where R attains a new running
minimum, with cell 1 always boundary; this discrete rule is a convention
validated structurally, not a continuum statement.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from . import _kernels
from .bm import Path2D
from .errors import DomainError, ParameterError

__all__ = [
    "CellPath",
    "MatedCrtGraph",
    "TAG_NAMES",
    "build_brute",
    "build_fast",
    "mark_boundary",
    "export_graph",
    "import_graph",
    "degree_counts",
]

TAG_NAMES = ("consecutive", "L", "R")
_MIN_POINTS_PER_CELL = 10


@dataclass(frozen=True)
class CellPath:
    """Per-cell minima of an (L, R) path, the input to the builders.

    Cell j (1-based) covers path time [(j-1) cell_size, j cell_size];
    ``l_min[j-1]`` and ``r_min[j-1]`` are the grid minima over it, endpoints
    included.  These arrays are the interval-query structure: the infimum
    strictly between cells a < b is the minimum of the entries a+1 .. b-1.
    """

    n: int
    l_min: np.ndarray
    r_min: np.ndarray
    cell_size: float

    def __post_init__(self) -> None:
        if self.n < 1:
            raise DomainError("need at least one full cell")
        if not self.cell_size > 0.0:
            raise ParameterError(f"cell_size must be positive, got {self.cell_size}")
        for name in ("l_min", "r_min"):
            arr = np.ascontiguousarray(getattr(self, name), dtype=np.float64)
            if arr.shape != (self.n,):
                raise ParameterError(f"{name} must have shape ({self.n},)")
            view = arr.view()
            view.setflags(write=False)
            object.__setattr__(self, name, view)

    @classmethod
    def from_path(cls, path: Path2D, cell_size: float) -> "CellPath":
        """Cell minima of ``path``; cell_size must be a multiple of its dt
        with at least ``_MIN_POINTS_PER_CELL`` steps per cell."""
        k = int(round(cell_size / path.dt))
        if abs(k * path.dt - cell_size) > 1e-9 * cell_size:
            raise ParameterError(
                f"cell_size {cell_size} is not a multiple of path dt {path.dt}"
            )
        if k < _MIN_POINTS_PER_CELL:
            raise ParameterError(
                f"cell_size must cover >= {_MIN_POINTS_PER_CELL} path steps, got {k}"
            )
        n = (path.n_points - 1) // k
        if n < 1:
            raise DomainError(
                f"path shorter than one cell ({path.n_points} points, {k} per cell)"
            )
        mins = []
        starts = np.arange(n) * k
        for col in (0, 1):
            w = path.points[: n * k, col]
            red = np.minimum.reduceat(w, starts)
            mins.append(np.minimum(red, path.points[k :: k, col][:n]))
        return cls(n=n, l_min=mins[0], r_min=mins[1], cell_size=cell_size)

    def interior_min(self, which: str, a: int, b: int) -> float:
        """Minimum strictly between cells a < b (1-based); +inf when empty."""
        arr = self.l_min if which == "L" else self.r_min
        if b - a < 2:
            return math.inf
        return float(arr[a : b - 1].min())


@dataclass(frozen=True)
class MatedCrtGraph:
    """Adjacency of the cell map: edges stored as parallel arrays.

    ``edge_a < edge_b`` (1-based cells), sorted lexicographically with no
    duplicates; ``edge_tag`` indexes into ``TAG_NAMES``; ``boundary`` is a
    per-cell flag.  ``cell_size`` is kept when known so boundary marking can
    recompute minima from the originating path; serialized forms omit it.
    """

    n: int
    edge_a: np.ndarray
    edge_b: np.ndarray
    edge_tag: np.ndarray
    boundary: np.ndarray
    cell_size: Optional[float] = None

    def __post_init__(self) -> None:
        a = np.ascontiguousarray(self.edge_a, dtype=np.int64)
        b = np.ascontiguousarray(self.edge_b, dtype=np.int64)
        t = np.ascontiguousarray(self.edge_tag, dtype=np.uint8)
        bd = np.ascontiguousarray(self.boundary, dtype=bool)
        if self.n < 1:
            raise ParameterError("graph needs at least one cell")
        if not (a.shape == b.shape == t.shape):
            raise ParameterError("edge arrays must have matching shapes")
        if bd.shape != (self.n,):
            raise ParameterError(f"boundary must have shape ({self.n},)")
        if a.size:
            if not ((a >= 1) & (a < b) & (b <= self.n)).all():
                raise ParameterError("edges must satisfy 1 <= a < b <= n")
            if (t >= len(TAG_NAMES)).any():
                raise ParameterError("unknown edge tag code")
            key = a * (self.n + 1) + b
            if not (np.diff(key) > 0).all():
                raise ParameterError("edges must be sorted (a, b) without duplicates")
            adjacent = b - a == 1
            if not (t[adjacent] == 0).all() or (t[~adjacent] == 0).any():
                raise ParameterError(
                    "the consecutive tag must mark exactly the pairs (k, k+1)"
                )
            if int(adjacent.sum()) != self.n - 1:
                raise ParameterError("all consecutive pairs (k, k+1) must be present")
        elif self.n > 1:
            raise ParameterError("all consecutive pairs (k, k+1) must be present")
        for name, arr in (
            ("edge_a", a),
            ("edge_b", b),
            ("edge_tag", t),
            ("boundary", bd),
        ):
            view = arr.view()
            view.setflags(write=False)
            object.__setattr__(self, name, view)

    @property
    def n_edges(self) -> int:
        return self.edge_a.size

    def edges(self) -> list[tuple[int, int, str]]:
        """Edge list as (a, b, tag) tuples; convenient for small graphs."""
        return [
            (int(a), int(b), TAG_NAMES[t])
            for a, b, t in zip(self.edge_a, self.edge_b, self.edge_tag)
        ]

    def edge_set(self) -> set[tuple[int, int]]:
        """Untagged edge pairs, for equality comparisons."""
        return set(zip(self.edge_a.tolist(), self.edge_b.tolist()))


def _assemble(
    n: int,
    la: np.ndarray,
    lb: np.ndarray,
    ra: np.ndarray,
    rb: np.ndarray,
    cell_size: Optional[float],
) -> MatedCrtGraph:
    """Merge consecutive, L, and R pairs with tag precedence and sorting.

    Inputs are 0-based pairs from the per-coordinate rules; consecutive
    pairs are regenerated in full and win the tag, then L over R.
    """
    cons_a = np.arange(1, n, dtype=np.int64)
    parts_a = [cons_a, la + 1, ra + 1]
    parts_b = [cons_a + 1, lb + 1, rb + 1]
    codes = [
        np.zeros(n - 1, dtype=np.uint8),
        np.ones(la.size, dtype=np.uint8),
        np.full(ra.size, 2, dtype=np.uint8),
    ]
    a = np.concatenate(parts_a)
    b = np.concatenate(parts_b)
    code = np.concatenate(codes)
    keep = b - a >= 2
    keep |= code == 0
    a, b, code = a[keep], b[keep], code[keep]
    key = a * (n + 1) + b
    order = np.lexsort((code, key))
    a, b, code, key = a[order], b[order], code[order], key[order]
    if key.size:
        first = np.concatenate([[True], key[1:] != key[:-1]])
        a, b, code = a[first], b[first], code[first]
    return MatedCrtGraph(
        n=n,
        edge_a=a,
        edge_b=b,
        edge_tag=code,
        boundary=np.zeros(n, dtype=bool),
        cell_size=cell_size,
    )


def build_brute(path: Path2D, cell_size: float) -> MatedCrtGraph:
    """O(n^2) direct evaluation of the adjacency rule; the oracle."""
    cp = CellPath.from_path(path, cell_size)
    pairs: dict[str, list[list[int]]] = {}
    for which, m in (("L", cp.l_min), ("R", cp.r_min)):
        pa: list[int] = []
        pb: list[int] = []
        for bi in range(1, cp.n):
            between = math.inf
            for ai in range(bi - 1, -1, -1):
                if max(m[ai], m[bi]) <= between:
                    pa.append(ai)
                    pb.append(bi)
                between = min(between, m[ai])
        pairs[which] = [pa, pb]
    return _assemble(
        cp.n,
        np.asarray(pairs["L"][0], dtype=np.int64),
        np.asarray(pairs["L"][1], dtype=np.int64),
        np.asarray(pairs["R"][0], dtype=np.int64),
        np.asarray(pairs["R"][1], dtype=np.int64),
        cell_size,
    )


def build_fast(path: Path2D, cell_size: float) -> MatedCrtGraph:
    """Monotone-stack builder; identical edge set to :func:`build_brute`
    in O(n) time and memory."""
    cp = CellPath.from_path(path, cell_size)
    la, lb = _kernels.stack_edges(cp.l_min)
    ra, rb = _kernels.stack_edges(cp.r_min)
    return _assemble(cp.n, la, lb, ra, rb, cell_size)


def mark_boundary(path: Path2D, g: MatedCrtGraph) -> MatedCrtGraph:
    """Flag boundary cells: cell 1, plus every cell where the cell minimum
    of R drops strictly below all earlier cell minima."""
    if g.cell_size is None:
        raise ParameterError("graph carries no cell_size; rebuild from the path")
    cp = CellPath.from_path(path, g.cell_size)
    if cp.n != g.n:
        raise ParameterError(
            f"path yields {cp.n} cells but graph has {g.n}; not built from it"
        )
    running = np.minimum.accumulate(cp.r_min)
    flags = np.empty(g.n, dtype=bool)
    flags[0] = True
    flags[1:] = cp.r_min[1:] < running[:-1]
    return MatedCrtGraph(
        n=g.n,
        edge_a=g.edge_a,
        edge_b=g.edge_b,
        edge_tag=g.edge_tag,
        boundary=flags,
        cell_size=g.cell_size,
    )


def export_graph(g: MatedCrtGraph, format: str = "json") -> bytes:
    """Serialize deterministically: CSV lines ``a,b,tag`` in (a, b) order,
    or JSON {n, edges, boundary} (boundary as 0/1 flags)."""
    if format == "csv":
        lines = [
            f"{a},{b},{TAG_NAMES[t]}\n"
            for a, b, t in zip(g.edge_a, g.edge_b, g.edge_tag)
        ]
        return "".join(lines).encode("ascii")
    if format == "json":
        payload = {
            "n": g.n,
            "edges": [
                [int(a), int(b), TAG_NAMES[t]]
                for a, b, t in zip(g.edge_a, g.edge_b, g.edge_tag)
            ],
            "boundary": [int(x) for x in g.boundary],
        }
        return (json.dumps(payload, separators=(",", ":")) + "\n").encode("ascii")
    raise ParameterError(f"unknown format {format!r}")


def import_graph(data: Union[bytes, str], format: str = "json") -> MatedCrtGraph:
    """Parse :func:`export_graph` output.

    CSV carries neither n nor boundary flags: n is inferred as the largest
    cell index and the boundary comes back unset.
    """
    if isinstance(data, bytes):
        data = data.decode("ascii")
    tag_code = {name: i for i, name in enumerate(TAG_NAMES)}
    if format == "csv":
        a, b, t = [], [], []
        for line in data.splitlines():
            if not line:
                continue
            fa, fb, ft = line.split(",")
            a.append(int(fa))
            b.append(int(fb))
            t.append(tag_code[ft])
        n = max(b) if b else 1
        return MatedCrtGraph(
            n=n,
            edge_a=np.asarray(a, dtype=np.int64),
            edge_b=np.asarray(b, dtype=np.int64),
            edge_tag=np.asarray(t, dtype=np.uint8),
            boundary=np.zeros(n, dtype=bool),
        )
    if format == "json":
        payload = json.loads(data)
        edges = payload["edges"]
        return MatedCrtGraph(
            n=int(payload["n"]),
            edge_a=np.asarray([e[0] for e in edges], dtype=np.int64),
            edge_b=np.asarray([e[1] for e in edges], dtype=np.int64),
            edge_tag=np.asarray([tag_code[e[2]] for e in edges], dtype=np.uint8),
            boundary=np.asarray(payload["boundary"], dtype=bool),
        )
    raise ParameterError(f"unknown format {format!r}")


def degree_counts(g: MatedCrtGraph) -> tuple[np.ndarray, np.ndarray]:
    """Degree histogram of the graph: (degrees, counts), degrees ascending."""
    deg = np.bincount(g.edge_a, minlength=g.n + 1) + np.bincount(
        g.edge_b, minlength=g.n + 1
    )
    deg = deg[1:]
    values, counts = np.unique(deg, return_counts=True)
    return values.astype(np.int64), counts.astype(np.int64)
