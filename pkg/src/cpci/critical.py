"""Critical point classification of grid vertices across ensemble members.

Each vertex is classified from the signs of its link neighbors (higher
or lower than the center) under a strict total order that breaks value
ties by linear index, so repeated values never produce an undefined
answer.  The sign sequence around the link decides the type: no sign
change means an extremum, more than two maximal runs means a saddle.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import IntEnum
from functools import lru_cache

import numpy as np

from .grid import Ensemble, GridTopology, VertexLink, build_link

__all__ = [
    "CriticalType",
    "TypeCounts",
    "TYPE_CODES",
    "compare_vertices",
    "classify_vertex",
    "classify_field",
    "count_types",
]


class CriticalType(IntEnum):
    REGULAR = 0
    MINIMUM = 1
    MAXIMUM = 2
    SADDLE = 3


# Short codes used by the CSV interchange formats.
TYPE_CODES = {
    CriticalType.MINIMUM: "min",
    CriticalType.MAXIMUM: "max",
    CriticalType.SADDLE: "sad",
    CriticalType.REGULAR: "reg",
}


@dataclass(frozen=True)
class TypeCounts:
    """Occurrence counts of each critical type at one vertex, out of m."""

    c_min: int
    c_max: int
    c_saddle: int
    m: int

    def __post_init__(self):
        if self.m < 1:
            raise ValueError(f"ensemble size must be >= 1, got {self.m}")
        for name in ("c_min", "c_max", "c_saddle"):
            count = getattr(self, name)
            if not 0 <= count <= self.m:
                raise ValueError(f"{name}={count} outside [0, {self.m}]")
        if self.c_min + self.c_max + self.c_saddle > self.m:
            raise ValueError("type counts exceed ensemble size")


def compare_vertices(field: np.ndarray, u: int, v: int) -> int:
    """Strict total order on vertices u, v (linear indices): -1 or +1.

    Compares (value, linear index) lexicographically; the index
    tie-break is the symbolic perturbation that removes degeneracy.
    """
    if u == v:
        raise ValueError("compare_vertices needs two distinct vertices")
    return -1 if (field[u], u) < (field[v], v) else 1


def _run_count(signs: list[bool], closed: bool) -> int:
    """Number of maximal constant runs; callers handle the uniform case."""
    changes = sum(signs[k] != signs[k - 1] for k in range(1, len(signs)))
    if closed:
        # For a mixed cyclic sequence the run count equals the number of
        # transitions, counting the wrap-around pair.
        return changes + (signs[0] != signs[-1])
    return changes + 1


def classify_vertex(
    field: np.ndarray,
    topology: GridTopology,
    v: tuple[int, int],
    link: VertexLink | None = None,
) -> CriticalType:
    """Classify one vertex of one field (scalar reference path).

    All link neighbors higher -> MINIMUM; all lower -> MAXIMUM; more
    than two sign runs around the link (cyclic for interior vertices,
    path for boundary ones) -> SADDLE; anything else -> REGULAR.
    """
    if link is None:
        link = build_link(topology, v)
    center = topology.linear(*v)
    higher = [
        compare_vertices(field, topology.linear(i, j), center) > 0
        for i, j in link.neighbors
    ]
    if all(higher):
        return CriticalType.MINIMUM
    if not any(higher):
        return CriticalType.MAXIMUM
    if _run_count(higher, link.closed) > 2:
        return CriticalType.SADDLE
    return CriticalType.REGULAR


@lru_cache(maxsize=32)
def _link_groups(nx: int, ny: int):
    """Vertices bucketed by link shape for vectorized classification.

    Returns tuples (centers, neighbors, index_higher, closed) where
    `centers` has shape (G,), `neighbors` (G, deg), and `index_higher`
    is the precomputed index tie-break mask neighbors > centers.
    """
    topology = GridTopology(nx, ny)
    buckets: dict[tuple, list[tuple[int, tuple[int, ...]]]] = {}
    for j in range(ny):
        for i in range(nx):
            link = build_link(topology, (i, j))
            offsets = tuple((p - i, q - j) for p, q in link.neighbors)
            buckets.setdefault((offsets, link.closed), []).append(
                (topology.linear(i, j),
                 tuple(topology.linear(p, q) for p, q in link.neighbors)))
    groups = []
    for (_, closed), entries in buckets.items():
        centers = np.array([c for c, _ in entries], dtype=np.intp)
        neighbors = np.array([nb for _, nb in entries], dtype=np.intp)
        groups.append((centers, neighbors, neighbors > centers[:, None], closed))
    return tuple(groups)


def _classify_codes(values: np.ndarray, topology: GridTopology) -> np.ndarray:
    """Classify every vertex of every member: (m, n) values -> int8 codes."""
    m = values.shape[0]
    codes = np.zeros((m, topology.n), dtype=np.int8)
    for centers, neighbors, index_higher, closed in _link_groups(topology.nx, topology.ny):
        center_vals = values[:, centers][:, :, None]          # (m, G, 1)
        neighbor_vals = values[:, neighbors]                   # (m, G, deg)
        higher = (neighbor_vals > center_vals) | (
            (neighbor_vals == center_vals) & index_higher[None, :, :])
        all_higher = higher.all(axis=2)
        all_lower = (~higher).all(axis=2)
        if closed:
            changes = (higher != np.roll(higher, -1, axis=2)).sum(axis=2)
        else:
            changes = (higher[:, :, 1:] != higher[:, :, :-1]).sum(axis=2) + 1
        block = np.zeros((m, len(centers)), dtype=np.int8)
        block[changes > 2] = CriticalType.SADDLE
        block[all_higher] = CriticalType.MINIMUM
        block[all_lower] = CriticalType.MAXIMUM
        codes[:, centers] = block
    return codes


def _member_chunk(n: int) -> int:
    # Bound the (chunk, n, 6) float workspace to roughly 50 MB.
    return max(1, 1_000_000 // max(n, 1))


def classify_field(field: np.ndarray, topology: GridTopology) -> list[CriticalType]:
    """Per-vertex classification of a single field, in linear-index order."""
    arr = np.asarray(field, dtype=np.float64)
    if arr.shape != (topology.n,):
        raise ValueError(
            f"field has {arr.size} values, topology needs {topology.n}")
    if not np.isfinite(arr).all():
        raise ValueError("field values must be finite")
    codes = _classify_codes(arr[None, :], topology)[0]
    return [CriticalType(int(code)) for code in codes]


def count_types(e: Ensemble) -> list[TypeCounts]:
    """Per-vertex occurrence counts of each type across all members."""
    totals = np.zeros((3, e.topology.n), dtype=np.int64)
    chunk = _member_chunk(e.topology.n)
    for start in range(0, e.m, chunk):
        codes = _classify_codes(e.values[start:start + chunk], e.topology)
        totals[0] += (codes == CriticalType.MINIMUM).sum(axis=0)
        totals[1] += (codes == CriticalType.MAXIMUM).sum(axis=0)
        totals[2] += (codes == CriticalType.SADDLE).sum(axis=0)
    return [
        TypeCounts(int(c_min), int(c_max), int(c_sad), e.m)
        for c_min, c_max, c_sad in totals.T
    ]
