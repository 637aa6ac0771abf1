"""Dihedral symmetry of the cell graphs and O/E/R/C classification.

A group element ``D8Element(k, reflected)`` acts on the plane as
``p -> R^k S^f p`` where R is the anticlockwise rotation by pi/4 and S the
reflection in the vertical axis (a line through midpoints of opposite octagon
edges).  On addresses this becomes an affine map of the first digit and a sign
change of the others.  The constants of that map are read off the embedding
rather than hand-derived, see :func:`address_action_constants`.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable

import numpy as np
from scipy.spatial import cKDTree

from .addressing import all_addresses, digits_to_index
from .errors import NotSymmetric
from .geometry import EPS, cell_centers, reflect, rotate
from .graphbuild.graph import CellGraph
from .spectral import ClassifiedEigen, Spectrum, group_multiplicities, GROUP_RTOL

TYPE_OF_SIGNS = {(1, 1): "O", (1, -1): "E", (-1, 1): "R", (-1, -1): "C"}
CLASSIFY_TOL = 1e-6


@dataclass(frozen=True)
class D8Element:
    rotation: int = 0
    reflected: bool = False

    def __post_init__(self):
        object.__setattr__(self, "rotation", int(self.rotation) % 8)
        object.__setattr__(self, "reflected", bool(self.reflected))

    def compose(self, other: "D8Element") -> "D8Element":
        """self o other (apply ``other`` first)."""
        sign = -1 if self.reflected else 1
        return D8Element(self.rotation + sign * other.rotation, self.reflected ^ other.reflected)

    __mul__ = compose

    def inverse(self) -> "D8Element":
        return self if self.reflected else D8Element(-self.rotation, False)

    def apply_to_points(self, points) -> np.ndarray:
        p = np.asarray(points, dtype=float)
        if self.reflected:
            p = reflect(p, math.pi / 2)
        return rotate(p, self.rotation)

    def __str__(self) -> str:
        return f"r^{self.rotation}" + (" e" if self.reflected else "")


IDENTITY = D8Element(0, False)
ROT = D8Element(1, False)  # r: anticlockwise by pi/4
EDGE_REFLECTION = D8Element(0, True)  # e: vertical axis, through edge midpoints
CORNER_REFLECTION = D8Element(1, True)  # c: axis at 5pi/8, through corners


def all_elements() -> list[D8Element]:
    return [D8Element(k, f) for f in (False, True) for k in range(8)]


def geometric_permutation(g: D8Element, m: int) -> np.ndarray:
    """Cell permutation induced by moving the cell centres with ``g``."""
    c = cell_centers(m)
    d, j = cKDTree(c).query(g.apply_to_points(c), distance_upper_bound=EPS)
    if not np.all(np.isfinite(d)):
        raise ValueError(f"{g} does not map level-{m} cells onto cells")
    return j


@lru_cache(maxsize=None)
def address_action_constants() -> tuple[int, int]:
    """(rotation step, reflection constant c0) of the address action.

    Rotation by one step adds ``step`` to the first digit; the reflection S
    maps (X1, X2, ...) to (c0 - X1, -X2, ...).  Both are solved from level 1
    and confirmed on every level-2 cell.
    """
    step = int(geometric_permutation(ROT, 1)[0]) % 8
    c0 = int(geometric_permutation(EDGE_REFLECTION, 1)[0]) % 8
    for g in (ROT, EDGE_REFLECTION):
        if not np.array_equal(_formula_permutation(g, 2, step, c0), geometric_permutation(g, 2)):
            raise AssertionError(f"address formula disagrees with geometry for {g}")
    return step, c0


def _formula_permutation(g: D8Element, m: int, step: int, c0: int) -> np.ndarray:
    a = all_addresses(m)
    out = a.copy()
    if g.reflected:
        out[:, 0] = c0 - a[:, 0]
        out[:, 1:] = -a[:, 1:]
    out[:, 0] += step * g.rotation
    return digits_to_index(out % 8)


@lru_cache(maxsize=64)
def _cached_permutation(g: D8Element, m: int) -> np.ndarray:
    step, c0 = address_action_constants()
    p = _formula_permutation(g, m, step, c0)
    p.setflags(write=False)
    return p


def d8_permutation(g: D8Element, m: int) -> np.ndarray:
    """perm[i] = index of the cell that ``g`` carries cell i to."""
    return _cached_permutation(g, m)


def reflection_axis_constant(g: D8Element) -> int | None:
    """c0 with g: (X1, ...) -> (c0 - X1, ...), or None for rotations."""
    if not g.reflected:
        return None
    step, c0 = address_action_constants()
    return (c0 + step * g.rotation) % 8


def verify_automorphism(g: D8Element, graph: CellGraph) -> tuple[bool, list[tuple[int, int, int]]]:
    """Check mult(g i, g j) == mult(i, j); violations are (i, j, mult(i, j))."""
    p = d8_permutation(g, graph.level)
    a, b = p[graph.pairs[:, 0]], p[graph.pairs[:, 1]]
    moved = CellGraph.from_edges(graph.level, a, b, graph.mult, graph.builder, validate=False)
    if moved.same_multigraph(graph):
        return True, []
    mine, theirs = graph.as_dict(), moved.as_dict()
    bad = sorted((i, j, mine.get((i, j), 0)) for (i, j) in set(mine) | set(theirs) if mine.get((i, j)) != theirs.get((i, j)))
    return False, bad


def automorphism_report(graph: CellGraph) -> str:
    rows = []
    for g in all_elements():
        ok, bad = verify_automorphism(g, graph)
        rows.append({"element": str(g), "ok": ok, "violations": [list(v) for v in bad]})
    return json.dumps(rows)


# -- classification -------------------------------------------------------------


@dataclass(frozen=True)
class Classification:
    kind: str
    signs: dict[str, int]
    residuals: dict[str, float]


def classify_eigenfunction(u, m: int, tol: float = CLASSIFY_TOL) -> Classification:
    u = np.asarray(u, dtype=float)
    u = u / np.linalg.norm(u)
    signs, res = {}, {}
    for name, g in (("e", EDGE_REFLECTION), ("r", ROT), ("c", CORNER_REFLECTION)):
        ug = u[d8_permutation(g, m)]
        s = 1 if ug @ u >= 0 else -1
        r = float(np.linalg.norm(ug - s * u))
        if r > tol:
            raise NotSymmetric(f"u o {name} differs from {s:+d} u by {r:.2e}")
        signs[name], res[name] = s, r
    if signs["c"] != signs["e"] * signs["r"]:
        raise NotSymmetric("sign of c is not the product of the signs of e and r")
    return Classification(TYPE_OF_SIGNS[(signs["e"], signs["r"])], signs, res)


def classify_spectrum(
    s: Spectrum, rtol: float = GROUP_RTOL, tol: float = CLASSIFY_TOL, complete_only: bool = True
) -> tuple[list[ClassifiedEigen], dict[int, str]]:
    """Classify every multiplicity-1 group.

    Returns the classified eigenfunctions (ascending) and a map group index -> type.
    """
    groups = group_multiplicities(s.eigenvalues, rtol)
    if complete_only and s.mode != "full":
        groups = groups[:-1]
    vecs = s.unit_vectors()
    out, types = [], {}
    for gi, g in enumerate(groups):
        if g.multiplicity != 1:
            continue
        u = vecs[:, g.indices[0]]
        c = classify_eigenfunction(u, s.level, tol)
        out.append(ClassifiedEigen(float(s.eigenvalues[g.indices[0]]), c.kind, u))
        types[gi] = c.kind
    return out, types


@dataclass(frozen=True)
class TypeCounts:
    O: int
    E: int
    R: int
    C: int

    def as_tuple(self) -> tuple[int, int, int, int]:
        return (self.O, self.E, self.R, self.C)


def count_types(kinds: Iterable) -> TypeCounts:
    counts = {"O": 0, "E": 0, "R": 0, "C": 0}
    for k in kinds:
        counts[getattr(k, "kind", k)] += 1
    return TypeCounts(**counts)


def expected_type_counts(m: int) -> TypeCounts:
    """O = C = 4*8^(m-2) + 2^(m-2), E = R = 4*8^(m-2) - 2^(m-2)."""
    a = 4 * Fraction(8) ** (m - 2)
    b = Fraction(2) ** (m - 2)
    oc, er = a + b, a - b
    if oc.denominator != 1 or er.denominator != 1:
        raise ValueError(f"count formula is not integral at level {m}")
    return TypeCounts(int(oc), int(er), int(er), int(oc))
