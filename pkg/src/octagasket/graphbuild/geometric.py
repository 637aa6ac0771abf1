"""Side pairing read straight off the planar picture.

Every cell contributes eight side segments.  Segments shared by two cells are
glued directly.  The rest bound holes (pseudo-cells, open cell centres, the
central hole and the outside), and inside each hole a side is glued to its
point reflection through the hole's centre.  Holes are found by walking the
boundary; the centre of each walk must be one of the catalogued centres.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components
from scipy.spatial import cKDTree

from ..errors import AmbiguousMatch, LevelTooLarge, UnmatchedSide
from ..geometry import EPS, center_catalog, cell_vertices
from .graph import CellGraph

MAX_GEOMETRIC_LEVEL = 5


def _merge_points(points: np.ndarray, tol: float = EPS) -> np.ndarray:
    """Label coincident points (within ``tol``) with a shared id 0..k-1."""
    pairs = cKDTree(points).query_pairs(tol, output_type="ndarray")
    n = len(points)
    g = coo_matrix((np.ones(len(pairs)), (pairs[:, 0], pairs[:, 1])), shape=(n, n))
    _, labels = connected_components(g, directed=False)
    return labels


def _next_half_edge(start, end, pts):
    """Successor of each boundary half-edge when the hole is kept on the left.

    At the end vertex take the outgoing half-edge turning most sharply
    clockwise from the way back, so walks never cross into another hole.
    """
    order = np.argsort(start, kind="stable")
    first = np.searchsorted(start[order], np.arange(pts.shape[0]))
    last = np.searchsorted(start[order], np.arange(pts.shape[0]), side="right")
    nxt = np.empty(len(start), dtype=np.int64)
    for h in range(len(start)):
        v = end[h]
        cands = order[first[v] : last[v]]
        if len(cands) == 1:
            nxt[h] = cands[0]
            continue
        if len(cands) == 0:
            raise UnmatchedSide(f"boundary walk stops at vertex {v}")
        back = pts[start[h]] - pts[v]
        a_back = math.atan2(back[1], back[0])
        best, best_turn = -1, 10.0
        for g in cands:
            d = pts[end[g]] - pts[v]
            turn = (a_back - math.atan2(d[1], d[0])) % (2 * math.pi)
            if turn < 1e-12:
                turn = 2 * math.pi
            if turn < best_turn:
                best, best_turn = g, turn
        nxt[h] = best
    return nxt


def _faces(nxt):
    face = np.full(len(nxt), -1, dtype=np.int64)
    cycles = []
    for h in range(len(nxt)):
        if face[h] >= 0:
            continue
        cyc = []
        g = h
        while face[g] < 0:
            face[g] = len(cycles)
            cyc.append(g)
            g = nxt[g]
        if g != h:
            raise UnmatchedSide("boundary walk does not close")
        cycles.append(np.array(cyc))
    return face, cycles


def build_graph_geometric(m: int, return_holes: bool = False):
    """Cell multigraph from coincident sides plus antipodal gluing across holes.

    With ``return_holes`` also returns the (k, 2) array of hole centres found.
    """
    if m < 1:
        raise ValueError("level must be >= 1")
    if m > MAX_GEOMETRIC_LEVEL:
        raise LevelTooLarge(f"level {m} exceeds {MAX_GEOMETRIC_LEVEL}")
    n = 8**m
    verts = cell_vertices(m).reshape(-1, 2)  # row order is cell index
    vid = _merge_points(verts).reshape(n, 8)
    pts = np.zeros((vid.max() + 1, 2))
    pts[vid.ravel()] = verts

    a = vid.ravel()
    b = np.roll(vid, -1, axis=1).ravel()
    owner = np.repeat(np.arange(n), 8)
    key = np.minimum(a, b) * len(pts) + np.maximum(a, b)
    _, inv, cnt = np.unique(key, return_inverse=True, return_counts=True)
    if cnt.max() > 2:
        raise AmbiguousMatch("a side segment is shared by more than two cells")
    shared = cnt[inv] == 2

    # (a) coincident segments
    sk = key[shared]
    order = np.argsort(sk, kind="stable")
    direct = owner[shared][order].reshape(-1, 2)
    if np.any(direct[:, 0] == direct[:, 1]):
        raise AmbiguousMatch("a cell shares a side with itself")

    # (b) holes: boundary sides reversed so the hole lies on the left
    bnd = np.nonzero(~shared)[0]
    start, end = b[bnd], a[bnd]
    nxt = _next_half_edge(start, end, pts)
    face, cycles = _faces(nxt)
    mids = 0.5 * (pts[start] + pts[end])
    catalog = center_catalog(m)
    ctree = catalog.tree()
    partner = np.full(len(bnd), -1, dtype=np.int64)
    hole_centers = []
    for cyc in cycles:
        c = pts[start[cyc]].mean(axis=0)
        hits = ctree.query_ball_point(c, EPS)
        if len(hits) == 0:
            raise UnmatchedSide(f"hole centred at {c} is not in the centre catalogue")
        if len(hits) > 1:
            raise AmbiguousMatch(f"hole centre {c} matches {len(hits)} catalogue points")
        c = catalog.points()[hits[0]]
        hole_centers.append(c)
        d, j = cKDTree(mids[cyc]).query(2 * c - mids[cyc], distance_upper_bound=EPS)
        if not np.all(np.isfinite(d)):
            raise UnmatchedSide(f"side without antipodal partner in hole at {c}")
        mate = cyc[j]
        if np.any(partner[cyc] >= 0) or not np.array_equal(j[j], np.arange(len(cyc))):
            raise AmbiguousMatch(f"antipodal pairing in hole at {c} is not an involution")
        partner[cyc] = mate
    sel = np.arange(len(bnd)) < partner
    x, y = owner[bnd[sel]], owner[bnd[partner[sel]]]
    if np.any(x == y):
        raise AmbiguousMatch("antipodal gluing pairs two sides of the same cell")

    i = np.concatenate([direct[:, 0], x])
    j = np.concatenate([direct[:, 1], y])
    g = CellGraph.from_edges(m, i, j, np.ones(len(i), dtype=np.int64), builder="geometric")
    if return_holes:
        return g, np.array(hole_centers)
    return g

