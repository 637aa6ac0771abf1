"""Level-by-level identification builder.

Cells are handled internally by their *word index*: the base-8 value of the
absolute contraction word (j1, ..., jm).  Prefixing the digit X to every word of
a level-(m-1) object is then just ``X * 8**(m-1) + w``, and the antipode of a
word is obtained by adding 4 to every digit.

A side of the level-m octagasket is described by its *side curve*: the ordered
list of m-cells whose sides make up side s of the unit octagon, walked from
vertex s to vertex s+1.  Each unit carries a flag telling whether it lies on
the straight contact segment of the side (the part shared with a neighbouring
cell) or on one of the dips into a pseudo-cell hole.  The curve obeys

    C_m(s) = s.C_{m-1}(s) + s.C_{m-1}(s+1) + (s+1).C_{m-1}(s-1) + (s+1).C_{m-1}(s)

where the middle two pieces never touch the outer side.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

from ..addressing import word_index_to_cell_index
from ..errors import DegreeViolation, InvalidEntry, LevelTooLarge
from .graph import DEGREE, CellGraph

MAX_RECURSIVE_LEVEL = 5


@lru_cache(maxsize=None)
def side_curve(m: int, s: int) -> tuple[np.ndarray, np.ndarray]:
    """(word indices, contact flags) of the m-cells along side ``s``."""
    s %= 8
    if m == 0:
        return np.zeros(1, dtype=np.int64), np.ones(1, dtype=bool)
    shift = 8 ** (m - 1)
    parts = [
        (s, s, True),
        (s, s + 1, False),
        (s + 1, s - 1, False),
        (s + 1, s, True),
    ]
    words, flags = [], []
    for prefix, side, keep in parts:
        w, c = side_curve(m - 1, side % 8)
        words.append((prefix % 8) * shift + w)
        flags.append(c if keep else np.zeros_like(c))
    out_w, out_c = np.concatenate(words), np.concatenate(flags)
    out_w.setflags(write=False)
    out_c.setflags(write=False)
    return out_w, out_c


def antipode_words(m: int) -> np.ndarray:
    """Word index of the antipodal cell for every word index."""
    w = np.arange(8**m, dtype=np.int64)
    out = np.zeros_like(w)
    for k in range(m):
        digit = (w // 8**k) % 8
        out += ((digit + 4) % 8) * 8**k
    return out


def _degrees(edges, n):
    a, b, c = edges
    return np.bincount(a, c, n).astype(np.int64) + np.bincount(b, c, n).astype(np.int64)


def _join(*edge_lists):
    return tuple(np.concatenate([e[k] for e in edge_lists]).astype(np.int64) for k in range(3))


def _interface_edges(m: int, x: int):
    """Gluing of copy x to copy x+1 inside a level-m gasket (m >= 2).

    Copy x meets copy x+1 along side x+2 of the former and side x+6 of the
    latter, the second walked backwards.  Contact units face each other
    directly; between two consecutive contacts the dips are mirror images.
    """
    shift = 8 ** (m - 1)
    wx, cx = side_curve(m - 1, x + 2)
    wy, cy = side_curve(m - 1, x + 6)
    wx = x * shift + wx
    wy = ((x + 1) % 8) * shift + wy[::-1]
    cy = cy[::-1]
    if not np.array_equal(cx, cy):
        raise DegreeViolation(f"side curves of copies {x} and {x + 1} do not line up")
    contacts = np.nonzero(cx)[0]
    partner = np.arange(len(wx))
    for a, b in zip(contacts[:-1], contacts[1:]):
        i = np.arange(a + 1, b)
        partner[i] = a + b - i
    return wx, wy[partner], np.ones(len(wx), dtype=np.int64)


def _close_against_antipode(edges, m, select):
    """Give every selected cell 8-n edges to its antipode (n = current degree)."""
    n = 8**m
    deg = _degrees(edges, n)
    ant = antipode_words(m)
    w = np.arange(n)
    sel = select & (w < ant)
    if np.any(deg[w[sel]] != deg[ant[sel]]):
        k = w[sel][np.nonzero(deg[w[sel]] != deg[ant[sel]])[0][0]]
        raise DegreeViolation(f"word {k}: degree {deg[k]} but antipode has {deg[ant[k]]}")
    if np.any(deg > DEGREE):
        raise DegreeViolation(f"degree {deg.max()} exceeds {DEGREE}")
    missing = DEGREE - deg[w[sel]]
    keep = missing > 0
    extra = (w[sel][keep], ant[w[sel][keep]], missing[keep])
    return _join(edges, extra)


@lru_cache(maxsize=None)
def inner_edges(m: int):
    """Edges of the level-m gasket before the outer boundary is identified."""
    if m == 1:
        i = np.arange(8)
        return _join(
            (i, (i + 1) % 8, np.ones(8, dtype=np.int64)),
            (i[:4], i[:4] + 4, np.full(4, 2, dtype=np.int64)),
        )
    a, b, c = inner_edges(m - 1)
    shift = 8 ** (m - 1)
    copies = [(x * shift + a, x * shift + b, c) for x in range(8)]
    glue = [_interface_edges(m, x) for x in range(8)]
    edges = _join(*copies, *glue)
    w = np.arange(8**m)
    second = ((w // 8 ** (m - 2)) % 8 - w // shift) % 8
    return _close_against_antipode(edges, m, np.isin(second, (3, 4, 5)))


def build_graph_recursive(m: int) -> CellGraph:
    if m < 1:
        raise ValueError("level must be >= 1")
    if m > MAX_RECURSIVE_LEVEL:
        raise LevelTooLarge(f"level {m} exceeds {MAX_RECURSIVE_LEVEL}")
    edges = _close_against_antipode(inner_edges(m), m, np.ones(8**m, dtype=bool))
    to_cell = word_index_to_cell_index(m)
    a, b, c = edges
    return CellGraph.from_edges(m, to_cell[a], to_cell[b], c, builder="recursive")


# -- central strengths ----------------------------------------------------------


def refine_strength_sequence(s) -> tuple[int, ...]:
    rule = {2: (2, 4, 2), 4: (2, 4, 4, 4, 2)}
    out: list[int] = []
    for v in s:
        if v not in rule:
            raise InvalidEntry(f"strength {v!r} not in {{2, 4}}")
        out.extend(rule[v])
    return tuple(out)


def central_strengths(m: int) -> tuple[int, ...]:
    """Strengths of the gluing across the central pseudo-cell between copies 0 and 1.

    Read off the interface: the central dip is the stretch between the two
    middle contacts, and consecutive units glued to the same pair of cells form
    one connection whose strength is the run length.
    """
    if m < 3:
        raise ValueError("central strengths start at level 3")
    wx, wy, _ = _interface_edges(m, 0)
    _, flags = side_curve(m - 1, 2)
    contacts = np.nonzero(flags)[0]
    mid = len(contacts) // 2
    lo, hi = contacts[mid - 1], contacts[mid]
    px, py = wx[lo + 1 : hi], wy[lo + 1 : hi]
    runs = []
    count = 1
    for k in range(1, len(px)):
        if px[k] == px[k - 1] and py[k] == py[k - 1]:
            count += 1
        else:
            runs.append(count)
            count = 1
    runs.append(count)
    return tuple(runs)
