"""Eigenvalues of the cell-graph Laplacians and the tables built from them.

Eigenvectors are returned normalised for the uniform probability measure on
cells, i.e. ``sum(phi_i * phi_j) / N == delta_ij`` with ``N = 8**m``.  Residual
certificates are always measured on the corresponding unit vectors
``phi / sqrt(N)`` so that the bound ``8e-8`` is independent of the level.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np
import scipy.linalg as la
import scipy.sparse as sp
from scipy.sparse.linalg import ArpackNoConvergence, eigsh

from .errors import (
    ConvergenceFailure,
    DimensionTooLarge,
    InsufficientData,
    PartialSpectrum,
)

FULL_DENSE_CAP = 4096
LOWEST_CAP = 200
RESIDUAL_BOUND = 1e-8 * 8
GROUP_RTOL = 1e-9
RATIO_WINDOW = (3.5, 5.0)


@dataclass(frozen=True, eq=False)
class Spectrum:
    level: int
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray | None  # (N, k), mu-orthonormal columns
    mode: str  # "full" | "lowest"
    residual_bound: float = math.nan

    def __len__(self) -> int:
        return len(self.eigenvalues)

    @property
    def n_cells(self) -> int:
        return 8**self.level

    def unit_vectors(self) -> np.ndarray:
        if self.eigenvectors is None:
            raise PartialSpectrum("spectrum was computed without eigenvectors")
        return self.eigenvectors / math.sqrt(self.n_cells)


@dataclass(frozen=True)
class EigenGroup:
    value: float
    indices: tuple[int, ...]

    @property
    def multiplicity(self) -> int:
        return len(self.indices)


@dataclass(frozen=True)
class WeylFit:
    alpha: float
    fit_range: tuple[int, int]
    residual: float


def _level_of(n: int) -> int:
    m = round(math.log(n, 8))
    if 8**m != n:
        raise ValueError(f"dimension {n} is not a power of 8")
    return m


def _fix_signs(vecs: np.ndarray) -> np.ndarray:
    # first entry of largest magnitude made positive
    idx = np.argmax(np.abs(vecs), axis=0)
    s = np.sign(vecs[idx, np.arange(vecs.shape[1])])
    s[s == 0] = 1
    return vecs * s


def residuals(lap, values: np.ndarray, unit_vecs: np.ndarray) -> np.ndarray:
    r = lap @ unit_vecs - unit_vecs * values[None, :]
    return np.linalg.norm(r, axis=0)


def eigendecompose(
    lap,
    mode: str = "full",
    k: int = 40,
    *,
    vectors: bool = True,
    method: str = "dense",
    seed: int = 0,
    sigma: float = -1e-3,
    maxiter: int | None = None,
) -> Spectrum:
    """Eigenpairs of a cell-graph Laplacian.

    ``mode="full"`` uses a dense symmetric solver (dimension <= 4096), or with
    ``method="block"`` the block-circulant reduction below (values only).
    ``mode="lowest"`` returns the ``k`` smallest pairs by shift-invert Lanczos.
    """
    n = lap.shape[0]
    m = _level_of(n)
    if mode == "full":
        if method == "block":
            vals = block_circulant_eigenvalues(lap)
            return Spectrum(m, vals, None, "full")
        if n > FULL_DENSE_CAP:
            raise DimensionTooLarge(f"dense solve capped at {FULL_DENSE_CAP}, got {n}")
        dense = lap.toarray() if sp.issparse(lap) else np.asarray(lap, dtype=float)
        if not vectors:
            vals = la.eigvalsh(dense)
            return Spectrum(m, vals, None, "full")
        vals, vecs = la.eigh(dense)
    elif mode == "lowest":
        if not 1 <= k <= LOWEST_CAP:
            raise ValueError(f"k must lie in 1..{LOWEST_CAP}")
        if k >= n - 1:
            return eigendecompose(lap, "full", vectors=vectors)
        v0 = np.random.default_rng(seed).standard_normal(n)
        try:
            vals, vecs = eigsh(
                sp.csc_matrix(lap), k=k, sigma=sigma, which="LM", v0=v0, maxiter=maxiter
            )
        except ArpackNoConvergence as exc:
            raise ConvergenceFailure(str(exc)) from exc
        # Rayleigh-Ritz on the returned subspace restores orthogonality in clusters
        q, _ = np.linalg.qr(vecs)
        vals, y = la.eigh(q.T @ (lap @ q))
        vecs = q @ y
    else:
        raise ValueError(f"unknown mode {mode!r}")
    vecs = _fix_signs(vecs)
    res = residuals(lap, vals, vecs)
    bound = float(res.max())
    if bound > RESIDUAL_BOUND:
        raise ConvergenceFailure(f"residual {bound:.2e} exceeds {RESIDUAL_BOUND:.0e}")
    return Spectrum(m, vals, vecs * math.sqrt(n), mode, bound)


def block_circulant_eigenvalues(lap) -> np.ndarray:
    """All eigenvalues using the 8-fold rotation symmetry of the cell graph.

    Shifting the first address digit by one moves cell i to i + N/8 (mod N), so
    L is block circulant with blocks B_d = L[0:n, d n:(d+1) n].  Its spectrum is
    the union over k of the spectra of H_k = sum_d w^(dk) B_d, w = exp(2 pi i/8);
    H_k and H_(8-k) are conjugate and share eigenvalues.
    """
    lap = sp.csr_matrix(lap)
    N = lap.shape[0]
    n = N // 8
    shift = sp.csr_matrix(
        (np.ones(N), (np.arange(N), (np.arange(N) + n) % N)), shape=(N, N)
    )
    if abs(shift @ lap @ shift.T - lap).max() > 0:
        raise ValueError("matrix is not block circulant under the rotation")
    row = lap[:n].toarray()
    blocks = [row[:, d * n : (d + 1) * n] for d in range(8)]
    out = []
    for k in range(5):
        if k in (0, 4):
            h = sum(((-1) ** (d * k // 4)) * blocks[d] for d in range(8))
            vals = la.eigvalsh(h)
        else:
            w = np.exp(2j * np.pi * k / 8)
            h = sum(w**d * blocks[d] for d in range(8))
            vals = la.eigvalsh(h)
        out.append(vals)
        if k in (1, 2, 3):
            out.append(vals)
    return np.sort(np.concatenate(out))


def group_multiplicities(values, rtol: float = GROUP_RTOL) -> list[EigenGroup]:
    """Chain ascending eigenvalues into groups; a gap <= rtol*max(1, |x|) joins."""
    values = np.asarray(getattr(values, "eigenvalues", values), dtype=float)
    groups: list[list[int]] = []
    for i, x in enumerate(values):
        if groups and x - values[groups[-1][-1]] <= rtol * max(1.0, abs(x)):
            groups[-1].append(i)
        else:
            groups.append([i])
    return [EigenGroup(float(values[g].mean()), tuple(g)) for g in groups]


def complete_groups(s: Spectrum, rtol: float = GROUP_RTOL) -> list[EigenGroup]:
    """Groups of a spectrum, dropping the last one if a partial solve may have cut it."""
    groups = group_multiplicities(s.eigenvalues, rtol)
    if s.mode != "full" and groups:
        groups = groups[:-1]
    return groups


def counting_function(s: Spectrum) -> tuple[np.ndarray, np.ndarray]:
    """Breakpoints (lambda_k, k+1) of the eigenvalue counting function."""
    if s.mode != "full":
        raise PartialSpectrum("counting function needs the full spectrum")
    return s.eigenvalues.copy(), np.arange(1, len(s) + 1)


def eigenvalue_count(s: Spectrum, x: float) -> int:
    """N(x) = number of eigenvalues <= x."""
    if s.mode != "full":
        raise PartialSpectrum("counting function needs the full spectrum")
    return int(np.searchsorted(s.eigenvalues, x, side="right"))


def weyl_fit(s, min_value: float = 1e-9) -> WeylFit:
    """Slope of log N(lambda_k) against log lambda_k over all positive eigenvalues."""
    if isinstance(s, Spectrum):
        lam, counts = counting_function(s)
    else:
        lam = np.sort(np.asarray(s, dtype=float))
        counts = np.arange(1, len(lam) + 1)
    pos = np.nonzero(lam > min_value)[0]
    x, y = np.log(lam[pos]), np.log(counts[pos])
    coef, res, *_ = np.polyfit(x, y, 1, full=True)
    resid = float(res[0]) if len(res) else 0.0
    return WeylFit(float(coef[0]), (int(pos[0]), int(pos[-1])), resid)


# -- cross-level matching ---------------------------------------------------------


@dataclass(frozen=True, eq=False)
class ClassifiedEigen:
    value: float
    kind: str  # O | E | R | C
    vector: np.ndarray


@dataclass
class RatioRow:
    kind: str
    values: dict[int, float]  # level -> eigenvalue

    def ratio(self, m: int) -> float | None:
        """R_m / R_(m+1), or None where either side is missing or zero."""
        a, b = self.values.get(m), self.values.get(m + 1)
        if a is None or b is None or b == 0 or a == 0:
            return None
        return a / b

    @property
    def first_level(self) -> int:
        return min(self.values)


@dataclass
class RatioTable:
    rows: list[RatioRow]
    levels: tuple[int, ...]
    r_estimate: float
    flagged: list[str] = field(default_factory=list)

    def find(self, level: int, value: float, tol: float = 5e-5) -> RatioRow | None:
        for row in self.rows:
            v = row.values.get(level)
            if v is not None and abs(v - value) <= tol:
                return row
        return None


def _coarse(u: np.ndarray) -> np.ndarray:
    # children of cell i are 8i .. 8i+7
    return u.reshape(-1, 8).mean(axis=1)


def _overlap(fine: np.ndarray, coarse: np.ndarray) -> float:
    c = _coarse(fine)
    den = np.linalg.norm(c) * np.linalg.norm(coarse)
    return float(abs(c @ coarse) / den) if den > 0 else 0.0


def match_levels(
    lower: Sequence[ClassifiedEigen],
    upper: Sequence[ClassifiedEigen],
    window: tuple[float, float] = RATIO_WINDOW,
) -> dict[int, int]:
    """Pair multiplicity-1 eigenfunctions of consecutive levels.

    Candidates share the symmetry type and have eigenvalue ratio inside
    ``window``.  Pairs are accepted greedily by how well the block averages of
    the finer eigenfunction reproduce the coarser one; ties go to the lower
    indices.  Returns a map from lower index to upper index.
    """
    cands = []
    for i, a in enumerate(lower):
        if a.value <= 0:
            continue
        for j, b in enumerate(upper):
            if b.kind != a.kind or b.value <= 0:
                continue
            if window[0] <= a.value / b.value <= window[1]:
                score = round(_overlap(b.vector, a.vector), 6)
                cands.append((-score, i, j))
    cands.sort()
    used_i, used_j, out = set(), set(), {}
    for _, i, j in cands:
        if i in used_i or j in used_j:
            continue
        out[i] = j
        used_i.add(i)
        used_j.add(j)
    return out


def match_multiplicity_one(
    classified: Mapping[int, Sequence[ClassifiedEigen]],
    levels: Sequence[int] | None = None,
    window: tuple[float, float] = RATIO_WINDOW,
) -> RatioTable:
    """Chains of matched multiplicity-1 eigenvalues across levels with their ratios."""
    levels = tuple(sorted(classified) if levels is None else levels)
    for m in levels:
        if m not in classified or classified[m] is None:
            raise InsufficientData(f"no classified eigenvalues for level {m}")
    rows: list[RatioRow] = []
    owner: dict[tuple[int, int], RatioRow] = {}
    zero = RatioRow("O", {})
    for m in levels:
        for j, e in enumerate(classified[m]):
            if e.value <= 1e-9:
                zero.values[m] = 0.0
                owner[(m, j)] = zero
    if zero.values:
        rows.append(zero)
    for lo, hi in zip(levels[:-1], levels[1:]):
        pairs = match_levels(classified[lo], classified[hi], window)
        for i, e in enumerate(classified[lo]):
            if (lo, i) in owner:
                continue
            row = RatioRow(e.kind, {lo: e.value})
            rows.append(row)
            owner[(lo, i)] = row
        for i, j in pairs.items():
            row = owner[(lo, i)]
            row.values[hi] = classified[hi][j].value
            owner[(hi, j)] = row
    last = levels[-1]
    for j, e in enumerate(classified[last]):
        if (last, j) not in owner:
            row = RatioRow(e.kind, {last: e.value})
            rows.append(row)
            owner[(last, j)] = row
    rows.sort(key=lambda r: (r.first_level, r.values[r.first_level]))

    flagged = _flag_types(rows, levels)
    r_est = math.nan
    if len(levels) >= 2:
        m4 = levels[-2]
        ratios = [r.ratio(m4) for r in rows if r.ratio(m4) is not None]
        if ratios:
            r_est = float(np.mean(ratios))
    return RatioTable(rows, levels, r_est, flagged)


def _flag_types(rows, levels) -> list[str]:
    # more than one unmatched entry per ten rows of a type needs a manual look
    flagged = []
    for kind in "OERC":
        of_kind = [r for r in rows if r.kind == kind]
        broken = [r for r in of_kind if len(r.values) < len(levels)]
        if len(broken) > max(1, len(of_kind) // 10):
            flagged.append(kind)
    return flagged


def trim_ratio_table(table: RatioTable, level: int, max_value: float) -> RatioTable:
    """Rows whose first nonblank entry sits at or below ``level`` with value < max_value.

    Rows that start at a higher level are kept when their chain reaches back at
    most to ``level + 1`` and stays under ``max_value / 4``.
    """
    keep = []
    for row in table.rows:
        m0 = row.first_level
        v0 = row.values[m0]
        if m0 <= level and v0 < max_value:
            keep.append(row)
        elif m0 == level + 1 and v0 < max_value / 4 and len(row.values) > 1:
            keep.append(row)
    m4 = table.levels[-2]
    ratios = [r.ratio(m4) for r in keep if r.ratio(m4) is not None]
    r_est = float(np.mean(ratios)) if ratios else math.nan
    return RatioTable(keep, table.levels, r_est, _flag_types(keep, table.levels))


# -- renormalisation -------------------------------------------------------------


def renormalize(values, level: int, r: float, decimals: int | None = None) -> np.ndarray:
    """r^(m-1) * lambda, optionally after rounding lambda to ``decimals`` places."""
    if r <= 0:
        raise ValueError("r must be positive")
    lam = np.asarray(values, dtype=float)
    if decimals is not None:
        lam = np.round(lam, decimals)
    return r ** (level - 1) * lam


@dataclass(frozen=True)
class RenormalizedRow:
    label: str  # 1-based eigenvalue indices, e.g. "2,3"
    multiplicity: int
    values: dict[int, float]


def renormalized_table(
    groups: Mapping[int, Sequence[EigenGroup]],
    r: float,
    levels: Sequence[int] = (3, 4, 5),
    n_rows: int | None = None,
    decimals: int | None = None,
) -> list[RenormalizedRow]:
    """Group-by-group renormalised eigenvalues, stopping where multiplicities differ."""
    count = min(len(groups[m]) for m in levels)
    if n_rows is not None:
        count = min(count, n_rows)
    rows = []
    for g in range(count):
        mults = {groups[m][g].multiplicity for m in levels}
        if len(mults) != 1:
            break
        first = groups[levels[0]][g]
        label = ",".join(str(i + 1) for i in first.indices)
        vals = {m: float(renormalize(groups[m][g].value, m, r, decimals)) for m in levels}
        rows.append(RenormalizedRow(label, first.multiplicity, vals))
    return rows


# -- exports ------------------------------------------------------------------


def _g10(x: float) -> str:
    return f"{x:.10g}"


def spectrum_to_csv(s: Spectrum, types: Mapping[int, str] | None = None, rtol: float = GROUP_RTOL) -> str:
    """Columns k,eigenvalue,group,multiplicity,symmetry_type (type keyed by group)."""
    types = types or {}
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["k", "eigenvalue", "group", "multiplicity", "symmetry_type"])
    for gi, g in enumerate(group_multiplicities(s.eigenvalues, rtol)):
        for k in g.indices:
            w.writerow([k, _g10(s.eigenvalues[k]), gi, g.multiplicity, types.get(gi, "")])
    return buf.getvalue()


def ratio_table_to_csv(table: RatioTable) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    lv = table.levels
    w.writerow([f"level{m}" for m in lv] + ["type"] + [f"R{m}/R{m + 1}" for m in lv[:-1]])
    for row in table.rows:
        vals = ["" if m not in row.values else f"{row.values[m]:.4f}" for m in lv]
        rats = ["" if row.ratio(m) is None else f"{row.ratio(m):.4f}" for m in lv[:-1]]
        w.writerow(vals + [row.kind] + rats)
    return buf.getvalue()
