import json
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.spatial import cKDTree

from octagasket.addressing import address_to_index, to_word
from octagasket.errors import EmptyAddress, LevelTooLarge
from octagasket.geometry import (
    EPS,
    RHO,
    apply_contraction,
    build_embedding,
    cell_centers,
    cell_octagon,
    center_catalog,
    embedding_to_dict,
    embedding_to_json,
    fixed_point,
    pseudo_seed,
    rotate,
)
from octagasket.graphbuild import build_graph_geometric

points = st.tuples(st.floats(-1, 1), st.floats(-1, 1)).map(np.array)


def test_rho_and_first_cell():
    p = apply_contraction(0, (0.0, 0.0))
    # rho (1 + sqrt 2) = sqrt 2 / 2
    assert math.hypot(*p) == pytest.approx(math.sqrt(2) / 2, abs=1e-14)
    assert math.atan2(p[1], p[0]) == pytest.approx(5 * math.pi / 8, abs=1e-14)
    assert np.allclose(cell_octagon((0,)).center, p, atol=1e-15)


@pytest.mark.parametrize("n", range(8))
def test_fixed_points_are_octagon_vertices(n):
    q = fixed_point(n)
    assert np.allclose(apply_contraction(n, q), q, atol=1e-15)
    assert math.hypot(*q) == pytest.approx(1.0)


@given(st.integers(0, 7), points, points)
def test_contraction_is_similarity(n, p, q):
    d = np.linalg.norm(apply_contraction(n, p) - apply_contraction(n, q))
    assert d == pytest.approx(RHO * np.linalg.norm(p - q), abs=1e-12)


@given(st.lists(st.integers(0, 7), min_size=1, max_size=5))
def test_composition_oracle(addr):
    # F_{j1} o ... o F_{jm}(0) built by explicit nesting
    word = to_word(addr)
    p = np.zeros(2)
    for j in reversed(word):
        p = RHO * (p + (1 + math.sqrt(2)) * np.array([math.cos((5 - 2 * j) * math.pi / 8), math.sin((5 - 2 * j) * math.pi / 8)]))
    oc = cell_octagon(addr)
    assert np.allclose(oc.center, p, atol=1e-14)
    assert np.allclose(cell_centers(len(addr))[address_to_index(addr)], p, atol=1e-14)


def test_octagon_shape():
    oc = cell_octagon((0, 0, 0))
    r = np.linalg.norm(oc.vertices - oc.center, axis=1)
    assert np.allclose(r, RHO**3, atol=1e-15)
    sides = np.linalg.norm(np.diff(np.vstack([oc.vertices, oc.vertices[:1]]), axis=0), axis=1)
    assert np.allclose(sides, sides[0], atol=1e-15)
    # clockwise: negative signed area
    x, y = oc.vertices.T
    assert 0.5 * np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y) < 0
    assert oc.side_segments.shape == (8, 2, 2)


def test_empty_address():
    with pytest.raises(EmptyAddress):
        cell_octagon(())


def _shared_sides(octs):
    segs = {}
    count = 0
    for k, oc in enumerate(octs):
        for a, b in oc.side_segments:
            key = tuple(sorted([tuple(np.round(a, 9)), tuple(np.round(b, 9))]))
            if key in segs and segs[key] != k:
                count += 1
            segs.setdefault(key, k)
    return count


def test_level1_ring_shares_eight_sides():
    octs = [cell_octagon((i,)) for i in range(8)]
    assert _shared_sides(octs) == 8
    assert _shared_sides([octs[0], octs[1]]) == 1


def test_rotation_covariance():
    for m in (1, 2, 3):
        c = cell_centers(m)
        d, _ = cKDTree(c).query(rotate(c, 1))
        assert d.max() < EPS


def test_embedding():
    e1 = build_embedding(1)
    assert len(e1) == 8 and len(e1.octagons) == 8
    e2 = build_embedding(2)
    assert len(e2) == 64
    d = np.linalg.norm(e2.centers[:, None] - e2.centers[None], axis=2)
    np.fill_diagonal(d, np.inf)
    # adjacent octagons of side s have centres 2 * apothem = s (1 + sqrt 2) apart
    assert d.min() == pytest.approx(e2.side_length * (1 + math.sqrt(2)), abs=1e-9)
    assert d.min() >= e2.side_length - 1e-9
    for m in (1, 2, 3):
        v = build_embedding(m).vertices
        assert np.all(np.hypot(v[..., 0], v[..., 1]) <= 1 + 1e-12)
    with pytest.raises(LevelTooLarge):
        build_embedding(7)


def test_embedding_json():
    doc = json.loads(embedding_to_json(build_embedding(1)))
    assert doc["level"] == 1 and len(doc["cells"]) == 8
    c = doc["cells"][0]
    assert c["address"] == "0" and len(c["vertices"]) == 8
    assert c["center"][1] == float(f"{math.sqrt(2) / 2 * math.sin(5 * math.pi / 8):.12g}")
    assert embedding_to_dict(build_embedding(2))["cells"][9]["address"] == "11"


def test_catalog_level1_is_origin_only():
    cat = center_catalog(1)
    assert len(cat) == 1
    assert np.allclose(cat.points(), [[0, 0]])


def test_first_pseudo_point():
    p = pseudo_seed(0)
    assert p.shape == (1, 2)
    assert p[0, 1] == pytest.approx((1 - RHO) * math.cos(math.pi / 8))
    assert p[0, 1] == pytest.approx(0.65328, abs=1e-5)
    assert len(pseudo_seed(2)) == 1 + 2 + 4


@pytest.mark.parametrize("m", [1, 2, 3, 4])
def test_catalog_has_no_duplicates_and_is_nested(m):
    pts = center_catalog(m).points()
    assert len(cKDTree(pts).query_pairs(EPS)) == 0
    d, _ = cKDTree(center_catalog(m + 1).points()).query(pts)
    assert d.max() < EPS


@pytest.mark.parametrize("m", [1, 2, 3, 4])
def test_catalog_is_exactly_the_hole_centres(m):
    # independent oracle: boundary walks of the planar picture; origin serves
    # both the outer face and the central hole
    _, holes = build_graph_geometric(m, return_holes=True)
    cat = center_catalog(m).points()
    assert len(holes) == len(cat) + 1
    d, j = cKDTree(cat).query(holes)
    assert d.max() < EPS
    assert len(set(j)) == len(cat)


def test_level2_square_holes_in_catalog():
    _, holes = build_graph_geometric(2, return_holes=True)
    cat = center_catalog(2)
    # eight square holes between 1-cells plus eight open 1-cell centres
    assert sum(1 for h in holes if np.linalg.norm(h) > 0.5) == 16
    assert all(cat.contains(h) for h in holes)
