"""Cell multigraph container, Laplacian assembly and exports."""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components

from ..errors import DegreeViolation

DEGREE = 8


def _canonical(i, j, mult, n_cells):
    i = np.asarray(i, dtype=np.int64)
    j = np.asarray(j, dtype=np.int64)
    mult = np.asarray(mult, dtype=np.int64)
    lo, hi = np.minimum(i, j), np.maximum(i, j)
    key = lo * n_cells + hi
    uniq, inv = np.unique(key, return_inverse=True)
    total = np.bincount(inv, weights=mult, minlength=len(uniq)).astype(np.int64)
    keep = total != 0
    uniq, total = uniq[keep], total[keep]
    pairs = np.stack([uniq // n_cells, uniq % n_cells], axis=1)
    return pairs, total


@dataclass(frozen=True, eq=False)
class CellGraph:
    """Loop-free multigraph on the 8^m cells of level m.

    ``pairs`` holds (i, j) with i < j, sorted lexicographically, and ``mult``
    the number of matched side pairs between the two cells.
    """

    level: int
    pairs: np.ndarray
    mult: np.ndarray
    builder: str

    @classmethod
    def from_edges(cls, level, i, j, mult, builder, validate=True) -> "CellGraph":
        n = 8**level
        i = np.asarray(i)
        if np.any(i == np.asarray(j)):
            raise DegreeViolation("self-loop in edge list")
        pairs, total = _canonical(i, j, mult, n)
        g = cls(level=level, pairs=pairs, mult=total, builder=builder)
        if validate:
            g.validate()
        return g

    @property
    def n_cells(self) -> int:
        return 8**self.level

    def degrees(self) -> np.ndarray:
        n = self.n_cells
        return np.bincount(self.pairs[:, 0], self.mult, n) + np.bincount(self.pairs[:, 1], self.mult, n)

    def adjacency(self) -> sp.csr_matrix:
        n = self.n_cells
        i, j = self.pairs[:, 0], self.pairs[:, 1]
        a = sp.coo_matrix(
            (np.concatenate([self.mult, self.mult]).astype(float), (np.concatenate([i, j]), np.concatenate([j, i]))),
            shape=(n, n),
        )
        return a.tocsr()

    def multiplicity(self, i: int, j: int) -> int:
        lo, hi = min(i, j), max(i, j)
        k = np.searchsorted(self.pairs[:, 0] * self.n_cells + self.pairs[:, 1], lo * self.n_cells + hi)
        if k < len(self.mult) and self.pairs[k, 0] == lo and self.pairs[k, 1] == hi:
            return int(self.mult[k])
        return 0

    def as_dict(self) -> dict[tuple[int, int], int]:
        return {(int(a), int(b)): int(c) for (a, b), c in zip(self.pairs, self.mult)}

    def same_multigraph(self, other: "CellGraph") -> bool:
        return (
            self.level == other.level
            and np.array_equal(self.pairs, other.pairs)
            and np.array_equal(self.mult, other.mult)
        )

    def is_connected(self) -> bool:
        ncomp, _ = connected_components(self.adjacency(), directed=False)
        return ncomp == 1

    def validate(self) -> None:
        if np.any(self.pairs[:, 0] >= self.pairs[:, 1]):
            raise DegreeViolation("pairs must satisfy i < j (no loops)")
        if np.any(self.mult <= 0):
            raise DegreeViolation("non-positive multiplicity")
        deg = self.degrees()
        bad = np.nonzero(deg != DEGREE)[0]
        if len(bad):
            raise DegreeViolation(f"cell {bad[0]} has total multiplicity {deg[bad[0]]}, expected {DEGREE}")
        if not self.is_connected():
            raise DegreeViolation("cell graph is disconnected")


def build_level1() -> CellGraph:
    """Ring of 8 cells: single edges to both neighbours, six to the opposite cell."""
    i = np.arange(8)
    return CellGraph.from_edges(
        1,
        np.concatenate([i, i[:4]]),
        np.concatenate([(i + 1) % 8, i[:4] + 4]),
        np.concatenate([np.ones(8, int), np.full(4, 6)]),
        builder="recursive",
    )


def assemble_laplacian(g: CellGraph) -> sp.csr_matrix:
    """L = 8 I - A as a sparse symmetric matrix."""
    lap = DEGREE * sp.identity(g.n_cells, format="csr") - g.adjacency()
    lap.sort_indices()
    return lap.tocsr()


# -- exports ------------------------------------------------------------------


def graph_to_dict(g: CellGraph) -> dict:
    return {
        "level": g.level,
        "builder": g.builder,
        "edges": [[int(a), int(b), int(c)] for (a, b), c in zip(g.pairs, g.mult)],
    }


def graph_to_json(g: CellGraph) -> str:
    return json.dumps(graph_to_dict(g))


def graph_from_json(text: str) -> CellGraph:
    doc = json.loads(text)
    e = np.asarray(doc["edges"], dtype=np.int64).reshape(-1, 3)
    return CellGraph.from_edges(doc["level"], e[:, 0], e[:, 1], e[:, 2], doc["builder"])


def laplacian_to_matrix_market(lap: sp.spmatrix) -> str:
    # scipy.io.mmwrite picks "integer" as the field and adds a comment line,
    # so the lower triangle is written directly.
    low = sp.tril(lap).tocoo()
    order = np.lexsort((low.row, low.col))
    n = lap.shape[0]
    lines = ["%%MatrixMarket matrix coordinate real symmetric", f"{n} {n} {low.nnz}"]
    for k in order:
        lines.append(f"{low.row[k] + 1} {low.col[k] + 1} {int(round(low.data[k]))}")
    return "\n".join(lines) + "\n"
