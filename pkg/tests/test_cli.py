import json
import subprocess
import sys

import numpy as np
import pytest

from octagasket.cli import RunConfig, main, parse_init, render_svg, verify_manifest
from octagasket.errors import BadInitSpec, InvalidEntry
from octagasket.fixtures import figure_3_0


def run(tmp_path, *args):
    return main([*args, "--out", str(tmp_path)])


def test_build_both(tmp_path):
    assert run(tmp_path, "build", "--level", "1", "--level", "2", "--method", "both") == 0
    files = {p.name for p in tmp_path.iterdir()}
    assert {"laplacian_1.mtx", "graph_2_recursive.json", "graph_2_geometric.json", "manifest.json"} <= files
    assert verify_manifest(tmp_path)
    lines = (tmp_path / "laplacian_1.mtx").read_text().splitlines()
    assert lines[1] == "8 8 20"
    # tamper detection
    (tmp_path / "laplacian_1.mtx").write_text("x")
    assert not verify_manifest(tmp_path)


def test_spectrum(tmp_path):
    assert run(tmp_path, "spectrum", "--level", "1", "--level", "2") == 0
    head = (tmp_path / "spectrum_1.csv").read_text().splitlines()
    assert head[0] == "k,eigenvalue,group,multiplicity,symmetry_type"
    diff = (tmp_path / "diff_table_5_0.csv").read_text().splitlines()
    assert all(line.endswith(",1") for line in diff[1:])


def test_pde_and_metric(tmp_path):
    assert run(tmp_path, "pde", "heat", "--level", "2", "--f", "00:1", "--times", "0,0.5") == 0
    text = (tmp_path / "heat_2.csv").read_text().splitlines()
    assert text[0] == "t,cell_index,value" and len(text) == 1 + 2 * 64
    assert any(p.suffix == ".svg" for p in tmp_path.iterdir())
    assert run(tmp_path, "metric", "--level", "2", "--level", "3", "--no-svg") == 0
    bounds = json.loads((tmp_path / "bounds.json").read_text())
    assert all(c["pass"] for c in bounds)
    assert verify_manifest(tmp_path)


def test_embed(tmp_path):
    assert run(tmp_path, "embed", "--level", "1") == 0
    doc = json.loads((tmp_path / "embedding_1.json").read_text())
    assert len(doc["cells"]) == 8


def test_exit_codes(tmp_path):
    assert run(tmp_path, "build", "--level", "9") == 2
    assert run(tmp_path, "pde", "heat", "--level", "1", "--f", "0:zz") == 2
    assert run(tmp_path, "pde", "heat", "--level", "1", "--f", "00:1") == 2
    assert main(["nonsense"]) == 2


def test_config_roundtrip(tmp_path):
    cfg = RunConfig(levels=[1], r=4.3)
    assert RunConfig.from_json(cfg.to_json()) == cfg
    with pytest.raises(InvalidEntry):
        RunConfig.from_json('{"bogus": 1}')
    p = tmp_path / "cfg.json"
    p.write_text(cfg.to_json())
    out = tmp_path / "o"
    assert main(["build", "--config", str(p), "--out", str(out)]) == 0
    assert json.loads((out / "manifest.json").read_text())["config"]["r"] == 4.3


def test_parse_init():
    f = parse_init("00:1,01:-1,00:0.5", 2)
    assert f[0] == 1.5 and f[1] == -1 and f.sum() == 0.5
    with pytest.raises(BadInitSpec):
        parse_init("0:1", 2)
    assert not parse_init("", 1).any()


def test_svg():
    svg = render_svg(1, np.linspace(-1, 1, 8), "t")
    assert svg.startswith("<svg") and svg.count("<polygon") == 8


def test_module_entry(tmp_path):
    r = subprocess.run([sys.executable, "-m", "octagasket", "build", "--level", "1", "--out", str(tmp_path)], capture_output=True)
    assert r.returncode == 0
    text = (tmp_path / "laplacian_1.mtx").read_text().splitlines()
    dense = np.zeros((8, 8))
    for line in text[2:]:
        i, j, v = map(int, line.split())
        dense[i - 1, j - 1] = dense[j - 1, i - 1] = v
    assert np.array_equal(dense, figure_3_0())
