import math

import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given, settings, strategies as st

from octagasket.errors import DimensionTooLarge, PartialSpectrum
from octagasket.spectral import (
    ClassifiedEigen,
    RatioRow,
    RatioTable,
    block_circulant_eigenvalues,
    complete_groups,
    eigendecompose,
    eigenvalue_count,
    group_multiplicities,
    match_levels,
    renormalize,
    renormalized_table,
    spectrum_to_csv,
    trim_ratio_table,
    weyl_fit,
)

from conftest import full_spectrum, laplacian, lowest_spectrum


def circulant_oracle():
    # eigenvalues of the level-1 ring: 8 - 2 cos(2 pi k/8) - 6 (-1)^k
    k = np.arange(8)
    return np.sort(8 - 2 * np.cos(2 * np.pi * k / 8) - 6 * (-1.0) ** k)


def test_level1_closed_form():
    s = full_spectrum(1)
    expect = np.sort([0, 2, 2, 4, 14 - math.sqrt(2), 14 - math.sqrt(2), 14 + math.sqrt(2), 14 + math.sqrt(2)])
    assert np.allclose(s.eigenvalues, expect, atol=1e-10)
    assert np.allclose(circulant_oracle(), expect, atol=1e-12)


@pytest.mark.parametrize("m", [1, 2, 3])
def test_eigenvectors(m):
    s = full_spectrum(m)
    n = 8**m
    phi = s.eigenvectors
    # orthonormal under the uniform probability measure
    assert np.allclose(phi.T @ phi / n, np.eye(n), atol=1e-10)
    assert s.residual_bound < 1e-10
    assert np.allclose(laplacian(m) @ phi, phi * s.eigenvalues, atol=1e-9)


@pytest.mark.parametrize("m", [1, 2, 3, 4])
def test_block_matches_dense(m):
    dense = np.linalg.eigvalsh(laplacian(m).toarray())
    assert np.allclose(block_circulant_eigenvalues(laplacian(m)), dense, atol=1e-10)


def test_frozen_level2_values():
    got = [(round(g.value, 9), g.multiplicity) for g in group_multiplicities(full_spectrum(2))[:6]]
    assert got == [
        (0.0, 1),
        (0.487129187, 2),
        (0.978315773, 1),
        (2.2871356, 1),
        (2.32957114, 2),
        (2.381966011, 1),
    ]
    # 2.381966... = 4 - golden ratio
    assert full_spectrum(2).eigenvalues[7] == pytest.approx(4 - (1 + math.sqrt(5)) / 2, abs=1e-12)


def test_lowest_agrees_with_full():
    lo = lowest_spectrum(3, 40)
    assert np.allclose(lo.eigenvalues, full_spectrum(3).eigenvalues[:40], atol=1e-10)
    assert lo.mode == "lowest"
    g = complete_groups(lo)
    assert sum(x.multiplicity for x in g) <= 40


def test_trace_identity():
    for m in (1, 2, 3):
        assert full_spectrum(m).eigenvalues.sum() == pytest.approx(8 * 8**m, rel=1e-10)


def test_dense_cap():
    big = sp.identity(8**5, format="csr") * 8
    with pytest.raises(DimensionTooLarge):
        eigendecompose(big, "full")


def test_counting_needs_full():
    with pytest.raises(PartialSpectrum):
        eigenvalue_count(lowest_spectrum(3, 40), 1.0)
    s = full_spectrum(1)
    assert eigenvalue_count(s, 2.5) == 3
    assert eigenvalue_count(s, 100) == 8


@given(st.lists(st.floats(0, 100), min_size=1, max_size=40))
def test_grouping_partitions(xs):
    xs = np.sort(xs)
    groups = group_multiplicities(xs)
    idx = [i for g in groups for i in g.indices]
    assert idx == list(range(len(xs)))
    values = [g.value for g in groups]
    assert values == sorted(values)


@given(st.integers(1, 5), st.floats(0.5, 10), st.floats(0, 50))
def test_renormalize(m, r, x):
    assert renormalize([x], m, r)[0] == pytest.approx(r ** (m - 1) * x)


def test_renormalize_rounding():
    assert renormalize([0.113832870], 3, 4.4, decimals=4)[0] == pytest.approx(4.4**2 * 0.1138)
    with pytest.raises(ValueError):
        renormalize([1.0], 2, 0)


def test_weyl_fit_power_law():
    # N(lambda) = k + 1 for lambda_k = (k + 1)^(1/a) gives slope a exactly
    a = 1.37
    lam = np.arange(1, 500) ** (1 / a)
    assert weyl_fit(lam).alpha == pytest.approx(a, abs=1e-9)


def test_weyl_frozen():
    got = [round(weyl_fit(full_spectrum(m)).alpha, 4) for m in (1, 2, 3)]
    assert got == [0.4889, 1.0638, 1.3030]


def _fake(value, kind, vec):
    return ClassifiedEigen(value, kind, np.asarray(vec, dtype=float))


def test_match_prefers_overlap():
    rng = np.random.default_rng(0)
    coarse = rng.standard_normal(8)
    good = np.repeat(coarse, 8) + 0.01 * rng.standard_normal(64)
    bad = rng.standard_normal(64)
    lower = [_fake(4.0, "O", coarse)]
    upper = [_fake(1.0, "O", bad), _fake(0.95, "O", good), _fake(1.0, "E", good)]
    assert match_levels(lower, upper) == {0: 1}
    # nothing inside the ratio window
    assert match_levels([_fake(10.0, "O", coarse)], upper) == {}


def test_trim():
    rows = [RatioRow("O", {1: 0.0, 2: 0.0}), RatioRow("E", {1: 2.0, 2: 0.5}), RatioRow("R", {1: 9.0, 2: 2.0}), RatioRow("C", {2: 1.0})]
    t = trim_ratio_table(RatioTable(rows, (1, 2), math.nan), 1, 8.0)
    assert [r.kind for r in t.rows] == ["O", "E"]
    assert t.r_estimate == pytest.approx(4.0)


def test_renormalized_table_stops_on_mismatch():
    groups = {m: group_multiplicities(full_spectrum(m)) for m in (2, 3)}
    rows = renormalized_table(groups, 4.4, levels=(2, 3), n_rows=5)
    assert rows[0].label == "1" and rows[1].label == "2,3" and rows[1].multiplicity == 2
    assert rows[1].values[3] == pytest.approx(4.4**2 * full_spectrum(3).eigenvalues[1])


def test_spectrum_csv():
    text = spectrum_to_csv(full_spectrum(1), {0: "O"})
    lines = text.splitlines()
    assert lines[0] == "k,eigenvalue,group,multiplicity,symmetry_type"
    assert lines[2].startswith("1,2,1,2,") or lines[2].startswith("1,2.0000")
    assert len(lines) == 9 and lines[1].endswith(",0,1,O")


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 10**6))
def test_rayleigh_quotient_bounds(seed):
    # every Rayleigh quotient lies in [lambda_min, lambda_max]
    v = np.random.default_rng(seed).standard_normal(64)
    q = v @ (laplacian(2) @ v) / (v @ v)
    e = full_spectrum(2).eigenvalues
    assert e[0] - 1e-12 <= q <= e[-1] + 1e-12
