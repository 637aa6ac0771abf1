"""Published reference tables shipped as CSV, and diffs against computed data."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from importlib import resources

import numpy as np

FILES = {
    "figure_3_0": "figure_3_0.csv",
    "table_5_0": "table_5_0.csv",
    "table_5_1": "table_5_1.csv",
    "table_5_2": "table_5_2.csv",
}


def _rows(name: str) -> list[list[str]]:
    text = resources.files("octagasket.data").joinpath(FILES[name]).read_text()
    return list(csv.reader(line for line in io.StringIO(text) if not line.startswith("#")))


def source_line(name: str) -> str:
    text = resources.files("octagasket.data").joinpath(FILES[name]).read_text()
    return text.splitlines()[0]


def figure_3_0() -> np.ndarray:
    return np.array([[int(x) for x in r] for r in _rows("figure_3_0")])


def table_5_0() -> dict[int, list[tuple[float, int]]]:
    """level -> [(eigenvalue, multiplicity)] in table order."""
    out: dict[int, list[tuple[float, int]]] = {}
    for r in _rows("table_5_0")[1:]:
        out.setdefault(int(r[0]), []).append((float(r[2]), int(r[3])))
    return out


@dataclass(frozen=True)
class PublishedRatioRow:
    values: dict[int, float]
    kind: str
    ratios: dict[int, float]  # m -> R_m/R_(m+1)


def table_5_1() -> list[PublishedRatioRow]:
    rows = _rows("table_5_1")
    out = []
    for r in rows[1:]:
        vals = {m + 1: float(x) for m, x in enumerate(r[:5]) if x}
        rat = {m + 1: float(x) for m, x in enumerate(r[6:10]) if x}
        out.append(PublishedRatioRow(vals, r[5], rat))
    return out


@dataclass(frozen=True)
class PublishedRenormRow:
    label: str
    multiplicity: int
    values: dict[int, float]


def table_5_2() -> list[PublishedRenormRow]:
    out = []
    for r in _rows("table_5_2")[1:]:
        out.append(PublishedRenormRow(r[0], int(r[1]), {3: float(r[2]), 4: float(r[3]), 5: float(r[4])}))
    return out


# -- diffs -------------------------------------------------------------------


@dataclass(frozen=True)
class DiffEntry:
    table: str
    key: str
    published: str
    computed: str
    ok: bool


def diff_table_5_0(groups_by_level, tol: float = 5e-5) -> list[DiffEntry]:
    """Compare grouped spectra (level -> [(value, multiplicity)]) row by row."""
    pub = table_5_0()
    out = []
    for m, rows in sorted(pub.items()):
        got = groups_by_level.get(m)
        if got is None:
            continue
        for k, (v, mult) in enumerate(rows):
            if k >= len(got):
                out.append(DiffEntry("5.0", f"L{m}#{k}", f"{v} x{mult}", "", False))
                continue
            gv, gm = got[k]
            ok = abs(gv - v) <= tol and gm == mult
            out.append(DiffEntry("5.0", f"L{m}#{k}", f"{v} x{mult}", f"{gv:.6f} x{gm}", ok))
    return out


def diff_table_5_1(table, tol: float = 0.02) -> list[DiffEntry]:
    """Match each published row by its first entry and compare ratios and blanks."""
    out = []
    for p in table_5_1():
        m0 = min(p.values)
        row = table.find(m0, p.values[m0], tol=5e-5)
        key = f"{p.kind}@L{m0}={p.values[m0]}"
        if row is None:
            out.append(DiffEntry("5.1", key, str(p.ratios), "no row", False))
            continue
        ok = row.kind == p.kind
        got = {}
        for m in range(1, 5):
            r = row.ratio(m)
            if m in p.ratios:
                ok &= r is not None and abs(r - p.ratios[m]) <= tol
            elif p.values.get(m) != 0:
                ok &= r is None
            if r is not None:
                got[m] = round(r, 4)
        for m, v in p.values.items():
            ok &= m in row.values and abs(row.values[m] - v) <= 5e-5
        ok &= set(row.values) == set(p.values)
        out.append(DiffEntry("5.1", key, f"{p.kind} {p.ratios}", f"{row.kind} {got}", bool(ok)))
    return out


def diff_table_5_2(rows, tol: float = 1e-4) -> list[DiffEntry]:
    pub = {r.label: r for r in table_5_2()}
    out = []
    for r in rows:
        p = pub.get(r.label)
        if p is None:
            continue
        ok = p.multiplicity == r.multiplicity and all(abs(r.values[m] - p.values[m]) <= tol for m in p.values)
        out.append(DiffEntry("5.2", r.label, str(p.values), str({m: round(v, 8) for m, v in r.values.items()}), ok))
    return out


def diff_to_csv(entries: list[DiffEntry]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["table", "key", "published", "computed", "ok"])
    for e in entries:
        w.writerow([e.table, e.key, e.published, e.computed, int(e.ok)])
    return buf.getvalue()
