"""Shortest-path geometry of the cell graphs: diameters, balls, growth and bounds.

Paths only care whether two cells are adjacent, so edge multiplicities are
dropped here.  Eccentricities and ball sizes are constant on orbits of the
dihedral symmetry group, which cuts an all-sources sweep by a factor ~16.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import shortest_path

from .errors import DegenerateRange, LevelTooLarge
from .graphbuild.graph import CellGraph
from .symmetry import all_elements, d8_permutation

BATCH = 256
MAX_METRIC_LEVEL = 5


def adjacency_pattern(graph: CellGraph) -> sp.csr_matrix:
    a = graph.adjacency()
    a.data[:] = 1.0
    return a


def _bfs(adj, sources) -> np.ndarray:
    d = shortest_path(adj, directed=False, unweighted=True, indices=np.atleast_1d(sources))
    return d.astype(np.int64)


@dataclass(frozen=True, eq=False)
class DistanceField:
    level: int
    source: int
    distances: np.ndarray

    def normalized(self, diameter: int) -> np.ndarray:
        return self.distances / float(diameter)


def bfs_distances(graph: CellGraph, source: int) -> DistanceField:
    return DistanceField(graph.level, int(source), _bfs(adjacency_pattern(graph), source)[0])


def orbit_representatives(m: int) -> tuple[np.ndarray, np.ndarray]:
    """(representatives, orbit sizes) of the D8 action on level-m cells."""
    perms = np.stack([d8_permutation(g, m) for g in all_elements()])
    rep = perms.min(axis=0)
    reps, sizes = np.unique(rep, return_counts=True)
    return reps, sizes


@dataclass(frozen=True, eq=False)
class SweepResult:
    """All-sources statistics gathered from one BFS per symmetry orbit."""

    level: int
    diameter: int
    pair: tuple[int, int]
    eccentricity: np.ndarray  # per cell
    max_ball: np.ndarray  # max over centres of #B(v, n), n = 0..diameter


_SWEEPS: dict[tuple, SweepResult] = {}


def _sweep(graph: CellGraph) -> SweepResult:
    m = graph.level
    adj = adjacency_pattern(graph)
    reps, _ = orbit_representatives(m)
    ecc_rep = np.zeros(len(reps), dtype=np.int64)
    far = np.zeros(len(reps), dtype=np.int64)
    counts = []
    for s in range(0, len(reps), BATCH):
        d = _bfs(adj, reps[s : s + BATCH])
        ecc_rep[s : s + BATCH] = d.max(axis=1)
        far[s : s + BATCH] = d.argmax(axis=1)
        width = int(d.max()) + 1
        c = np.stack([np.bincount(row, minlength=width) for row in d])
        counts.append(np.cumsum(c, axis=1))
    diam = int(ecc_rep.max())
    max_ball = np.zeros(diam + 1, dtype=np.int64)
    for c in counts:
        padded = np.pad(c, ((0, 0), (0, diam + 1 - c.shape[1])), mode="edge")
        max_ball = np.maximum(max_ball, padded.max(axis=0))
    k = int(np.argmax(ecc_rep))
    ecc = np.zeros(8**m, dtype=np.int64)
    for g in all_elements():
        ecc[d8_permutation(g, m)[reps]] = ecc_rep
    return SweepResult(m, diam, (int(reps[k]), int(far[k])), ecc, max_ball)


def sweep(graph: CellGraph) -> SweepResult:
    if graph.level > MAX_METRIC_LEVEL:
        raise LevelTooLarge(f"level {graph.level} exceeds {MAX_METRIC_LEVEL}")
    key = (graph.level, graph.pairs.tobytes())
    if key not in _SWEEPS:
        _SWEEPS[key] = _sweep(graph)
    return _SWEEPS[key]


def diameter(graph: CellGraph) -> tuple[int, tuple[int, int]]:
    """Exact diameter and one pair attaining it."""
    r = sweep(graph)
    return r.diameter, r.pair


@dataclass(frozen=True)
class BallTable:
    center: int
    radii: np.ndarray
    sizes: np.ndarray


def ball_sizes(graph: CellGraph, center: int = 0, n_max: int | None = None) -> BallTable:
    d = bfs_distances(graph, center).distances
    n_max = int(d.max()) if n_max is None else int(n_max)
    radii = np.arange(n_max + 1)
    return BallTable(int(center), radii, np.searchsorted(np.sort(d), radii, side="right"))


@dataclass(frozen=True)
class GrowthFit:
    exponent: float
    constant: float
    fit_range: tuple[int, int]


def growth_fit(table: BallTable, lo: int = 1, hi: int | None = None, diameter: int | None = None) -> GrowthFit:
    """Least-squares slope of log #B against log n over radii lo..hi.

    The default upper end is floor(d/2), d the diameter (or the table's last radius).
    """
    if hi is None:
        d = int(table.radii[-1]) if diameter is None else int(diameter)
        hi = d // 2
    sel = (table.radii >= max(lo, 1)) & (table.radii <= hi)
    if sel.sum() < 4:
        raise DegenerateRange(f"only {int(sel.sum())} radii in [{lo}, {hi}]; need 4")
    x = np.log(table.radii[sel])
    y = np.log(table.sizes[sel])
    slope, icpt = np.polyfit(x, y, 1)
    return GrowthFit(float(slope), float(math.exp(icpt)), (int(lo), int(hi)))


# -- bounds ----------------------------------------------------------------------


@dataclass(frozen=True)
class BoundCheck:
    name: str
    lhs: float
    rhs: float
    passed: bool

    def as_dict(self) -> dict:
        return {"name": self.name, "lhs": self.lhs, "rhs": self.rhs, "pass": self.passed}


@dataclass
class BoundsReport:
    diameters: dict[int, int]
    checks: list[BoundCheck] = field(default_factory=list)
    tightest_ball_constant: float = math.nan

    @property
    def all_passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_json(self) -> str:
        return json.dumps([c.as_dict() for c in self.checks])


def conjectured_diameter(m: int) -> int:
    return 7 * 2 ** (m - 2) + 1


def check_bounds(diameters: dict[int, int], max_balls: dict[int, np.ndarray] | None = None) -> BoundsReport:
    """Diameter bounds, the conjectured closed form for m >= 3, and #B <= 200 n^3.

    ``max_balls[m][n]`` is the largest ball of radius n over all centres.
    """
    rep = BoundsReport(dict(diameters))
    for m in sorted(diameters):
        d = diameters[m]
        if m + 1 in diameters:
            rhs = 2 * d + 2**m + 1
            rep.checks.append(BoundCheck(f"d_{m + 1} <= 2 d_{m} + 2^{m} + 1", diameters[m + 1], rhs, diameters[m + 1] <= rhs))
        up = 2 ** (m - 1) * (m + 2) - 1
        rep.checks.append(BoundCheck(f"d_{m} <= 2^{m - 1} ({m}+2) - 1", d, up, d <= up))
        low = 2 ** (m - 1) - 1
        rep.checks.append(BoundCheck(f"d_{m} >= 2^{m - 1} - 1", d, low, d >= low))
        if m >= 3:
            c = conjectured_diameter(m)
            rep.checks.append(BoundCheck(f"d_{m} == 7 * 2^{m - 2} + 1", d, c, d == c))
    best = 0.0
    for m, balls in sorted((max_balls or {}).items()):
        radii = np.arange(1, min(2 ** (m - 1), len(balls)))
        if len(radii) == 0:
            continue
        ratio = balls[radii] / radii.astype(float) ** 3
        worst = int(radii[np.argmax(ratio)])
        best = max(best, float(ratio.max()))
        lhs = int(balls[worst])
        rep.checks.append(BoundCheck(f"#B_{m}(v, n) <= 200 n^3 for n < 2^{m - 1}", lhs, 200 * worst**3, bool(np.all(ratio <= 200))))
    rep.tightest_ball_constant = best
    return rep


# -- normalised fields ---------------------------------------------------------


def normalized_field(f: DistanceField, diameter: int) -> np.ndarray:
    return f.normalized(diameter)


def block_mean_gap(fine: np.ndarray, coarse: np.ndarray) -> float:
    """sup over first-digit blocks of |block mean(fine) - block mean(coarse)|."""
    a = fine.reshape(8, -1).mean(axis=1)
    b = coarse.reshape(8, -1).mean(axis=1)
    return float(np.abs(a - b).max())


def distance_field_to_csv(f: DistanceField, diameter: int) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["cell_index", "distance", "normalized"])
    for i, (d, n) in enumerate(zip(f.distances, f.normalized(diameter))):
        w.writerow([i, int(d), f"{n:.10g}"])
    return buf.getvalue()
