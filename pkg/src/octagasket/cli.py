"""Command-line front end.

Every verb writes plain files into ``--out`` plus a ``manifest.json`` listing
them with sha256 hashes.  Exit codes: 0 success, 1 computational failure,
2 usage error.
"""

from __future__ import annotations

import argparse
import dataclasses
import hashlib
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from . import __version__
from . import fixtures
from .addressing import address_to_index, parse_address
from .errors import BadInitSpec, InvalidEntry, OctagasketError
from .geometry import build_embedding, embedding_to_json
from .graphbuild import (
    assemble_laplacian,
    build_graph_geometric,
    build_graph_recursive,
    graph_to_json,
    laplacian_to_matrix_market,
)
from .metric import (
    ball_sizes,
    bfs_distances,
    block_mean_gap,
    check_bounds,
    distance_field_to_csv,
    growth_fit,
    sweep,
)
from .pde import SpectralBasis, heat_solve, solution_to_csv, wave_solve
from .spectral import (
    GROUP_RTOL,
    eigendecompose,
    group_multiplicities,
    match_multiplicity_one,
    ratio_table_to_csv,
    renormalized_table,
    spectrum_to_csv,
    trim_ratio_table,
    weyl_fit,
)
from .symmetry import CLASSIFY_TOL, classify_spectrum, count_types, expected_type_counts

LEVELS = range(1, 6)


@dataclass
class RunConfig:
    levels: list[int] = field(default_factory=lambda: [1, 2, 3])
    builder: str = "recursive"
    mode: str = "full"
    lowest: int = 80
    out: str = "out"
    seed: int = 0
    r: float = 4.4
    decimals: int | None = 4
    group_rtol: float = GROUP_RTOL
    classify_tol: float = CLASSIFY_TOL
    times: list[float] = field(default_factory=lambda: [0.0, 0.1, 0.5, 1.0])

    def validate(self) -> None:
        for m in self.levels:
            if m not in LEVELS:
                raise InvalidEntry(f"level {m} outside 1..5")
        if self.group_rtol <= 0 or self.classify_tol <= 0:
            raise InvalidEntry("tolerances must be positive")
        if self.r <= 0:
            raise InvalidEntry("r must be positive")

    def to_json(self) -> str:
        return json.dumps(dataclasses.asdict(self), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "RunConfig":
        doc = json.loads(text)
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = set(doc) - names
        if unknown:
            raise InvalidEntry(f"unknown config keys {sorted(unknown)}")
        cfg = cls(**doc)
        cfg.validate()
        return cfg


class ReportBundle:
    def __init__(self, out: Path, config: RunConfig):
        self.out = out
        self.config = config
        self.files: dict[str, str] = {}
        out.mkdir(parents=True, exist_ok=True)

    def write(self, name: str, text: str) -> Path:
        path = self.out / name
        path.write_text(text)
        self.files[name] = hashlib.sha256(text.encode()).hexdigest()
        return path

    def write_json(self, name: str, obj) -> Path:
        return self.write(name, json.dumps(obj, indent=2, sort_keys=True) + "\n")

    def finish(self) -> Path:
        manifest = {
            "version": __version__,
            "config": dataclasses.asdict(self.config),
            "files": [{"path": k, "sha256": v} for k, v in sorted(self.files.items())],
        }
        path = self.out / "manifest.json"
        old = {}
        if path.exists():
            try:
                old = {f["path"]: f["sha256"] for f in json.loads(path.read_text())["files"]}
            except (ValueError, KeyError):
                old = {}
        old.update(self.files)
        manifest["files"] = [{"path": k, "sha256": v} for k, v in sorted(old.items()) if (self.out / k).exists()]
        path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
        return path


def verify_manifest(out: Path) -> bool:
    doc = json.loads((out / "manifest.json").read_text())
    for f in doc["files"]:
        p = out / f["path"]
        if not p.exists() or hashlib.sha256(p.read_bytes()).hexdigest() != f["sha256"]:
            return False
    return True


# -- svg ---------------------------------------------------------------------


def _color(t: float) -> str:
    """Diverging blue-white-red for t in [-1, 1]."""
    t = max(-1.0, min(1.0, t))
    if t >= 0:
        rgb = (255, round(255 * (1 - t)), round(255 * (1 - t)))
    else:
        rgb = (round(255 * (1 + t)), round(255 * (1 + t)), 255)
    return "#%02x%02x%02x" % rgb


def render_svg(level: int, values: np.ndarray, title: str, symmetric: bool = True) -> str:
    emb = build_embedding(level)
    vmin, vmax = float(values.min()), float(values.max())
    if symmetric:
        scale = max(abs(vmin), abs(vmax)) or 1.0
        ts = values / scale
    else:
        span = (vmax - vmin) or 1.0
        ts = (values - vmin) / span
    size = 400.0
    lines = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size:.0f}" height="{size + 30:.0f}" viewBox="0 0 {size:.0f} {size + 30:.0f}">',
        f"<title>{title}</title>",
        f'<text x="4" y="{size + 20:.0f}" font-size="12">min {vmin:.6f} max {vmax:.6f}</text>',
    ]
    for i in range(len(emb)):
        pts = " ".join(f"{(x + 1) * size / 2:.6f},{(1 - y) * size / 2:.6f}" for x, y in emb.vertices[i])
        lines.append(f'<polygon points="{pts}" fill="{_color(float(ts[i]))}" stroke="none"/>')
    lines.append("</svg>")
    return "\n".join(lines) + "\n"


# -- helpers -----------------------------------------------------------------


def parse_init(spec: str, m: int) -> np.ndarray:
    """'000:1,001:-1' -> vector over level-m cells."""
    f = np.zeros(8**m)
    if not spec:
        return f
    for item in spec.split(","):
        try:
            addr_s, val_s = item.split(":")
            addr = parse_address(addr_s)
            val = float(val_s)
        except (ValueError, OctagasketError) as exc:
            raise BadInitSpec(f"bad init item {item!r}: {exc}") from exc
        if len(addr) != m:
            raise BadInitSpec(f"address {addr_s} has length {len(addr)}, level is {m}")
        f[address_to_index(addr)] += val
    return f


def _graph(m: int, builder: str):
    return build_graph_geometric(m) if builder == "geometric" else build_graph_recursive(m)


def _spectrum(m: int, cfg: RunConfig, vectors: bool = True):
    lap = assemble_laplacian(_graph(m, cfg.builder))
    if cfg.mode == "lowest" or (m == 5 and vectors):
        return eigendecompose(lap, "lowest", k=cfg.lowest, seed=cfg.seed)
    if m == 5:
        return eigendecompose(lap, "full", method="block")
    return eigendecompose(lap, "full", vectors=vectors)


def _first_difference(a, b) -> list[str]:
    da, db = a.as_dict(), b.as_dict()
    keys = sorted(set(da) | set(db))
    return [f"{k}: {da.get(k, 0)} vs {db.get(k, 0)}" for k in keys if da.get(k, 0) != db.get(k, 0)][:20]


# -- verbs -------------------------------------------------------------------


def cmd_build(cfg: RunConfig, bundle: ReportBundle, method: str) -> None:
    for m in cfg.levels:
        built = {}
        for name in ("recursive", "geometric"):
            if method in (name, "both"):
                built[name] = _graph(m, name)
                bundle.write(f"graph_{m}_{name}.json", graph_to_json(built[name]) + "\n")
        g = next(iter(built.values()))
        bundle.write(f"laplacian_{m}.mtx", laplacian_to_matrix_market(assemble_laplacian(g)))
        if method == "both":
            same = built["recursive"].same_multigraph(built["geometric"])
            text = "identical\n" if same else "\n".join(_first_difference(*built.values())) + "\n"
            bundle.write(f"equivalence_{m}.txt", text)
            print(f"level {m}: builders {'identical' if same else 'DIFFER'}")


def cmd_spectrum(cfg: RunConfig, bundle: ReportBundle) -> None:
    grouped = {}
    for m in cfg.levels:
        s = _spectrum(m, cfg, vectors=(m < 5 or cfg.mode == "lowest"))
        types = {}
        if s.eigenvectors is not None:
            classified, types = classify_spectrum(s, cfg.group_rtol, cfg.classify_tol)
            counts = count_types(classified)
            summary = {"counts": dict(zip("OERC", counts.as_tuple()))}
            if s.mode == "full":
                exp = expected_type_counts(m)
                summary["expected"] = dict(zip("OERC", exp.as_tuple()))
                summary["match"] = counts == exp
            bundle.write_json(f"types_{m}.json", summary)
        bundle.write(f"spectrum_{m}.csv", spectrum_to_csv(s, types, cfg.group_rtol))
        groups = group_multiplicities(s.eigenvalues, cfg.group_rtol)
        if s.mode != "full":
            groups = groups[:-1]
        grouped[m] = [(g.value, g.multiplicity) for g in groups]
        if s.mode == "full":
            w = weyl_fit(s)
            bundle.write_json(f"weyl_{m}.json", {"alpha": round(w.alpha, 10), "fit_range": list(w.fit_range)})
            print(f"level {m}: {len(s)} eigenvalues, alpha = {w.alpha:.4f}")
        else:
            print(f"level {m}: lowest {len(s)} eigenvalues, residual {s.residual_bound:.1e}")
    diff = fixtures.diff_table_5_0(grouped)
    bundle.write("diff_table_5_0.csv", fixtures.diff_to_csv(diff))
    bad = sum(not d.ok for d in diff)
    print(f"Table 5.0 rows compared: {len(diff)}, mismatches: {bad}")


def cmd_ratios(cfg: RunConfig, bundle: ReportBundle) -> None:
    levels = sorted(set(cfg.levels) | {1, 2, 3, 4, 5}) if len(cfg.levels) < 2 else sorted(cfg.levels)
    classified, groups = {}, {}
    for m in levels:
        s = _spectrum(m, cfg)
        classified[m], _ = classify_spectrum(s, cfg.group_rtol, cfg.classify_tol)
        groups[m] = group_multiplicities(s.eigenvalues, cfg.group_rtol)
        if s.mode != "full":
            groups[m] = groups[m][:-1]
    table = trim_ratio_table(match_multiplicity_one(classified, levels), levels[1], 8.0)
    bundle.write("ratios.csv", ratio_table_to_csv(table))
    print(f"r estimate = {table.r_estimate:.4f}")
    diffs = fixtures.diff_table_5_1(table) if levels == [1, 2, 3, 4, 5] else []
    renorm_levels = [m for m in (3, 4, 5) if m in groups]
    if len(renorm_levels) == 3:
        rows = renormalized_table(groups, cfg.r, renorm_levels, decimals=cfg.decimals)
        lines = ["indices,multiplicity," + ",".join(f"level{m}" for m in renorm_levels)]
        for r in rows:
            vals = ",".join(f"{r.values[m]:.10g}" for m in renorm_levels)
            lines.append(f'"{r.label}",{r.multiplicity},{vals}')
        bundle.write("renormalized.csv", "\n".join(lines) + "\n")
        diffs += fixtures.diff_table_5_2(rows)
    bundle.write("diff_tables_5_1_5_2.csv", fixtures.diff_to_csv(diffs))
    bundle.write_json("ratios_summary.json", {"r_estimate": round(table.r_estimate, 10), "flagged_types": table.flagged})


def _times(cfg: RunConfig) -> np.ndarray:
    return np.asarray(cfg.times, dtype=float)


def cmd_pde(cfg: RunConfig, bundle: ReportBundle, kind: str, f: str, f0: str, f1: str, svg: bool) -> None:
    for m in cfg.levels:
        if m > 4:
            raise InvalidEntry("spectral PDE solutions need the full eigenbasis (level <= 4)")
        basis = SpectralBasis(eigendecompose(assemble_laplacian(_graph(m, cfg.builder)), "full"))
        times = _times(cfg)
        if kind == "heat":
            sol = heat_solve(basis, parse_init(f or "0" * m + ":1", m), times)
            values = sol.values
            mass = sol.mass()
            print(f"level {m}: mass drift {np.ptp(mass):.2e}")
        else:
            sol = wave_solve(basis, parse_init(f0, m), parse_init(f1, m), times)
            values = sol.values
            e = sol.energy()
            print(f"level {m}: energy drift {np.ptp(e) / max(abs(e[0]), 1e-300):.2e}")
        bundle.write(f"{kind}_{m}.csv", solution_to_csv(times, values))
        if svg:
            for i, t in enumerate(times):
                bundle.write(f"{kind}_{m}_t{i}.svg", render_svg(m, values[i], f"{kind} level {m} t={t:g}"))


def cmd_metric(cfg: RunConfig, bundle: ReportBundle, what: Sequence[str], svg: bool) -> None:
    diam, balls = {}, {}
    for m in sorted(set(cfg.levels)):
        g = _graph(m, cfg.builder)
        if "diameter" in what or "bounds" in what or "field" in what:
            r = sweep(g)
            diam[m], balls[m] = r.diameter, r.max_ball
            bundle.write_json(f"diameter_{m}.json", {"level": m, "diameter": r.diameter, "pair": list(r.pair)})
            print(f"level {m}: diameter {r.diameter}")
        if "balls" in what:
            bt = ball_sizes(g, 0)
            bundle.write(
                f"balls_{m}.csv",
                "radius,cardinality\n" + "".join(f"{n},{c}\n" for n, c in zip(bt.radii, bt.sizes)),
            )
            try:
                gf = growth_fit(bt)
                bundle.write_json(f"growth_{m}.json", {"exponent": round(gf.exponent, 10), "constant": round(gf.constant, 10), "fit_range": list(gf.fit_range)})
                print(f"level {m}: growth exponent {gf.exponent:.4f} on radii {gf.fit_range}")
            except OctagasketError as exc:
                print(f"level {m}: growth fit skipped ({exc})")
        if "field" in what:
            field_ = bfs_distances(g, 0)
            bundle.write(f"distance_{m}.csv", distance_field_to_csv(field_, diam[m]))
            if svg:
                bundle.write(f"distance_{m}_t0.svg", render_svg(m, field_.normalized(diam[m]), f"distance level {m}", symmetric=False))
    if "bounds" in what:
        rep = check_bounds(diam, balls)
        bundle.write("bounds.json", rep.to_json() + "\n")
        print(f"bounds: {'all pass' if rep.all_passed else 'FAILURES'} (tightest ball constant {rep.tightest_ball_constant:.3f})")
    if "field" in what and len(diam) > 1:
        ms = sorted(diam)
        gaps = {}
        for lo, hi in zip(ms[:-1], ms[1:]):
            a = bfs_distances(_graph(hi, cfg.builder), 0).normalized(diam[hi])
            b = bfs_distances(_graph(lo, cfg.builder), 0).normalized(diam[lo])
            gaps[f"{lo}->{hi}"] = round(block_mean_gap(a, b), 10)
        bundle.write_json("field_convergence.json", gaps)


def cmd_embed(cfg: RunConfig, bundle: ReportBundle) -> None:
    for m in cfg.levels:
        bundle.write(f"embedding_{m}.json", embedding_to_json(build_embedding(m)) + "\n")


def cmd_all(cfg: RunConfig, bundle: ReportBundle) -> None:
    cmd_build(cfg, bundle, "both")
    cmd_embed(cfg, bundle)
    cmd_spectrum(cfg, bundle)
    if len(cfg.levels) >= 2:
        cmd_ratios(cfg, bundle)
    cmd_metric(cfg, bundle, ("diameter", "balls", "bounds", "field"), svg=True)
    for m in (m for m in cfg.levels if m <= 3):
        one = dataclasses.replace(cfg, levels=[m])
        cmd_pde(one, bundle, "heat", "", "", "", svg=True)
        wave_f1 = f"{'0' * m}:1,{'0' * (m - 1)}1:-1"
        cmd_pde(one, bundle, "wave", "", "", wave_f1, svg=True)


# -- argument parsing ----------------------------------------------------------


def _level(text: str) -> int:
    try:
        m = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"level must be an integer, got {text!r}")
    if m not in LEVELS:
        raise argparse.ArgumentTypeError(f"level {m} outside 1..5")
    return m


def _float_list(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad number list {text!r}")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--level", type=_level, action="append", help="level 1..5 (repeatable)")
    common.add_argument("--out", default=None, help="output directory")
    common.add_argument("--seed", type=int, default=None)
    common.add_argument("--config", default=None, help="JSON RunConfig file; flags override it")
    common.add_argument("--builder", choices=("recursive", "geometric"), default=None)
    common.add_argument("--tol-group", type=float, default=None, help="relative eigenvalue grouping tolerance")
    common.add_argument("--tol-classify", type=float, default=None, help="symmetry classification tolerance")
    common.add_argument("--r", type=float, default=None, help="renormalisation factor")

    p = argparse.ArgumentParser(prog="octagasket", description="Cell-graph Laplacians of the projective octagasket")
    sub = p.add_subparsers(dest="verb", required=True)
    b = sub.add_parser("build", parents=[common])
    b.add_argument("--method", choices=("recursive", "geometric", "both"), default="recursive")
    s = sub.add_parser("spectrum", parents=[common])
    s.add_argument("--lowest", type=int, default=None, help="only the k smallest eigenpairs")
    r = sub.add_parser("ratios", parents=[common])
    r.add_argument("--decimals", type=int, default=None, help="round eigenvalues before renormalising")
    r.add_argument("--lowest", type=int, default=None)
    d = sub.add_parser("pde", parents=[common])
    d.add_argument("kind", choices=("heat", "wave"))
    d.add_argument("--f", default="", help="heat initial data, e.g. '00:1'")
    d.add_argument("--f0", default="", help="wave initial position")
    d.add_argument("--f1", default="", help="wave initial velocity, e.g. '000:1,001:-1'")
    d.add_argument("--times", type=_float_list, default=None)
    d.add_argument("--no-svg", action="store_true")
    mt = sub.add_parser("metric", parents=[common])
    mt.add_argument("--what", default="diameter,balls,bounds,field")
    mt.add_argument("--no-svg", action="store_true")
    sub.add_parser("embed", parents=[common])
    sub.add_parser("all", parents=[common])
    return p


def _config(args) -> RunConfig:
    cfg = RunConfig.from_json(Path(args.config).read_text()) if args.config else RunConfig()
    if args.level:
        cfg.levels = sorted(set(args.level))
    if args.out is not None:
        cfg.out = args.out
    if args.seed is not None:
        cfg.seed = args.seed
    if args.builder is not None:
        cfg.builder = args.builder
    if args.tol_group is not None:
        cfg.group_rtol = args.tol_group
    if args.tol_classify is not None:
        cfg.classify_tol = args.tol_classify
    if args.r is not None:
        cfg.r = args.r
    if getattr(args, "lowest", None):
        cfg.mode, cfg.lowest = "lowest", args.lowest
    if getattr(args, "decimals", None) is not None:
        cfg.decimals = args.decimals
    if getattr(args, "times", None):
        cfg.times = args.times
    cfg.validate()
    return cfg


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cfg = _config(args)
    except (OctagasketError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    bundle = ReportBundle(Path(cfg.out), cfg)
    try:
        if args.verb == "build":
            cmd_build(cfg, bundle, args.method)
        elif args.verb == "spectrum":
            cmd_spectrum(cfg, bundle)
        elif args.verb == "ratios":
            cmd_ratios(cfg, bundle)
        elif args.verb == "pde":
            cmd_pde(cfg, bundle, args.kind, args.f, args.f0, args.f1, not args.no_svg)
        elif args.verb == "metric":
            what = [w.strip() for w in args.what.split(",") if w.strip()]
            cmd_metric(cfg, bundle, what, not args.no_svg)
        elif args.verb == "embed":
            cmd_embed(cfg, bundle)
        elif args.verb == "all":
            cmd_all(cfg, bundle)
    except (BadInitSpec, InvalidEntry) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OctagasketError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    bundle.finish()
    return 0


if __name__ == "__main__":
    sys.exit(main())
