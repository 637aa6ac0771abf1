"""Planar realisation of the octagasket.

Coordinates are plain floats.  Everything lives in the closed unit disk and the
smallest feature at level 5 is about 2e-3, so a coincidence tolerance of
``EPS = 1e-9`` separates "same point" from "different point" with a wide margin.

Conventions
-----------
* Contraction ``F_n`` scales by ``RHO = 1/(2+sqrt 2)`` towards the vertex of the
  unit octagon at angle ``(5 - 2n) pi / 8``; the eight 1-cells are therefore
  numbered clockwise starting at the top left.
* Octagon vertex ``k`` of any cell sits at angle ``(5 - 2k) pi / 8`` from the
  cell centre (clockwise from top left, same as the cells).  Side ``k`` runs
  from vertex ``k`` to vertex ``k + 1``; its outward normal points at angle
  ``(2 - k) pi / 4``.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterator, Sequence

import numpy as np
from scipy.spatial import cKDTree

from .addressing import (
    Address,
    all_addresses,
    format_address,
    validate_address,
    words_of,
)
from .errors import LevelTooLarge

SQRT2 = math.sqrt(2.0)
RHO = 1.0 / (2.0 + SQRT2)
EPS = 1e-9
MAX_EMBED_LEVEL = 6

ANGLES = np.array([(5 - 2 * n) * math.pi / 8 for n in range(8)])
DIRECTIONS = np.stack([np.cos(ANGLES), np.sin(ANGLES)], axis=1)
OFFSETS = (1.0 + SQRT2) * DIRECTIONS


def apply_contraction(n: int, p) -> np.ndarray:
    """F_n(p) = RHO * (p + (1 + sqrt 2) * (cos t_n, sin t_n)), t_n = (5-2n)pi/8.

    ``p`` may be a single point or any array whose last axis has length 2.
    """
    return RHO * (np.asarray(p, dtype=float) + OFFSETS[int(n) % 8])


def fixed_point(n: int) -> np.ndarray:
    # RHO (1 + sqrt2) / (1 - RHO) == 1: the fixed points are the octagon vertices
    return DIRECTIONS[int(n) % 8].copy()


def rotate(points, k: int) -> np.ndarray:
    """Rotate anticlockwise by k * pi/4 about the origin."""
    a = k * math.pi / 4
    rot = np.array([[math.cos(a), -math.sin(a)], [math.sin(a), math.cos(a)]])
    return np.asarray(points, dtype=float) @ rot.T


def reflect(points, axis_angle: float) -> np.ndarray:
    """Reflect across the line through the origin at ``axis_angle``."""
    c, s = math.cos(2 * axis_angle), math.sin(2 * axis_angle)
    ref = np.array([[c, s], [s, -c]])
    return np.asarray(points, dtype=float) @ ref.T


@dataclass(frozen=True)
class CellOctagon:
    address: Address
    center: np.ndarray
    vertices: np.ndarray  # (8, 2), clockwise, vertex 0 at the top left

    @property
    def side_segments(self) -> np.ndarray:
        """(8, 2, 2): side k runs from vertex k to vertex k+1."""
        return np.stack([self.vertices, np.roll(self.vertices, -1, axis=0)], axis=1)

    @property
    def level(self) -> int:
        return len(self.address)


def _centers_from_words(words: np.ndarray) -> np.ndarray:
    out = np.zeros((words.shape[0], 2))
    for k in range(words.shape[1]):
        out += RHO ** (k + 1) * OFFSETS[words[:, k]]
    return out


def word_center(word: Sequence[int]) -> np.ndarray:
    """F_{j1} o ... o F_{jm} applied to the origin."""
    p = np.zeros(2)
    for j in reversed(word):
        p = apply_contraction(j, p)
    return p


def cell_octagon(addr: Sequence[int]) -> CellOctagon:
    addr = validate_address(addr)
    word = np.cumsum(addr) % 8
    center = word_center(word)
    vertices = center + RHO ** len(addr) * DIRECTIONS
    return CellOctagon(address=addr, center=center, vertices=vertices)


def cell_centers(m: int) -> np.ndarray:
    """(8^m, 2) centres of all m-cells in cell-index order."""
    return _centers_from_words(words_of(all_addresses(m)))


def cell_vertices(m: int) -> np.ndarray:
    """(8^m, 8, 2) octagon vertices, clockwise, in cell-index order."""
    return cell_centers(m)[:, None, :] + RHO**m * DIRECTIONS[None, :, :]


# -- identification centres ---------------------------------------------------


def pseudo_seed(depth: int) -> np.ndarray:
    """Centres of the holes straddling the common side of 1-cells 0 and 1.

    They sit on the y-axis at ``(1-RHO) cos(pi/8) + sum_i e_i RHO^i (1-RHO) sin(pi/8)``
    for every sign pattern ``e`` of length ``0..depth``.
    """
    base = (1 - RHO) * math.cos(math.pi / 8)
    step = (1 - RHO) * math.sin(math.pi / 8)
    ys = [base]
    for n in range(1, depth + 1):
        for signs in itertools.product((-1, 1), repeat=n):
            ys.append(base + sum(e * RHO ** (i + 1) * step for i, e in enumerate(signs)))
    return np.array([[0.0, y] for y in ys])


@dataclass(frozen=True)
class CenterSet:
    level: int
    origin: np.ndarray
    cell_centers: dict[int, np.ndarray]
    pseudo_centers: np.ndarray
    _tree: cKDTree = field(repr=False, compare=False, default=None)

    def points(self) -> np.ndarray:
        parts = [self.origin[None, :]]
        parts += [self.cell_centers[k] for k in sorted(self.cell_centers)]
        parts.append(self.pseudo_centers)
        return np.concatenate([p.reshape(-1, 2) for p in parts])

    def __len__(self) -> int:
        return len(self.points())

    def tree(self) -> cKDTree:
        if self._tree is None:
            object.__setattr__(self, "_tree", cKDTree(self.points()))
        return self._tree

    def lookup(self, p, tol: float = EPS) -> np.ndarray | None:
        """Catalogue point within ``tol`` of ``p``, or None."""
        d, i = self.tree().query(np.asarray(p, dtype=float), distance_upper_bound=tol)
        if not np.isfinite(d):
            return None
        return self.points()[i]

    def contains(self, p, tol: float = EPS) -> bool:
        return self.lookup(p, tol) is not None


@lru_cache(maxsize=None)
def center_catalog(m: int) -> CenterSet:
    """Every point through which sides of Gamma_m are glued antipodally.

    The origin serves the outer boundary and the central hole.  The k-cells
    with k < m have open central holes, glued through their centres.  Pseudo
    cells: holes straddling the common side of two adjacent j-cells inside the
    same (j-1)-cell; at level m those between 1-cells have depth up to m-2,
    and each extra F-prefix uses up one level.
    """
    if m < 1:
        raise ValueError("level must be >= 1")
    if m > MAX_EMBED_LEVEL:
        raise LevelTooLarge(f"level {m} exceeds {MAX_EMBED_LEVEL}")
    cells = {k: cell_centers(k) for k in range(1, m)}
    pseudo = []
    for j in range(0, m - 1):
        seed = pseudo_seed(m - 2 - j)
        ring = np.concatenate([rotate(seed, r) for r in range(8)])
        if j == 0:
            pseudo.append(ring)
        else:
            c = cell_centers(j)
            pseudo.append((c[:, None, :] + RHO**j * ring[None, :, :]).reshape(-1, 2))
    pseudo_arr = np.concatenate(pseudo) if pseudo else np.zeros((0, 2))
    return CenterSet(level=m, origin=np.zeros(2), cell_centers=cells, pseudo_centers=pseudo_arr)


# -- whole embedding ------------------------------------------------------------


@dataclass(frozen=True)
class PlanarEmbedding:
    level: int
    centers: np.ndarray  # (8^m, 2)
    vertices: np.ndarray  # (8^m, 8, 2)

    def __len__(self) -> int:
        return self.centers.shape[0]

    def octagon(self, i: int) -> CellOctagon:
        digits = all_addresses(self.level)[i]
        return CellOctagon(
            address=tuple(int(d) for d in digits),
            center=self.centers[i],
            vertices=self.vertices[i],
        )

    @property
    def octagons(self) -> list[CellOctagon]:
        return [self.octagon(i) for i in range(len(self))]

    def __iter__(self) -> Iterator[CellOctagon]:
        return (self.octagon(i) for i in range(len(self)))

    @property
    def side_length(self) -> float:
        return 2 * RHO**self.level * math.sin(math.pi / 8)


def build_embedding(m: int) -> PlanarEmbedding:
    if m < 1:
        raise ValueError("level must be >= 1")
    if m > MAX_EMBED_LEVEL:
        raise LevelTooLarge(f"level {m} exceeds {MAX_EMBED_LEVEL}")
    centers = cell_centers(m)
    vertices = centers[:, None, :] + RHO**m * DIRECTIONS[None, :, :]
    return PlanarEmbedding(level=m, centers=centers, vertices=vertices)


def embedding_to_dict(emb: PlanarEmbedding) -> dict:
    addrs = all_addresses(emb.level)
    cells = []
    for i in range(len(emb)):
        cells.append(
            {
                "address": format_address(addrs[i]),
                "center": [float(f"{x:.12g}") for x in emb.centers[i]],
                "vertices": [[float(f"{x:.12g}") for x in v] for v in emb.vertices[i]],
            }
        )
    return {"level": emb.level, "cells": cells}


def embedding_to_json(emb: PlanarEmbedding) -> str:
    return json.dumps(embedding_to_dict(emb))


def coincident_pairs(a: np.ndarray, b: np.ndarray, tol: float = EPS) -> np.ndarray:
    """Index j into ``b`` of the point coinciding with each row of ``a`` (-1 if none)."""
    d, j = cKDTree(b).query(a, distance_upper_bound=tol)
    return np.where(np.isfinite(d), j, -1)
