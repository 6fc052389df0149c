import json

import numpy as np
import pytest

from divdelaunay import quadratic
from divdelaunay.cli import main
from divdelaunay.io import save_diagram, save_dual
from divdelaunay.sites import SiteSet
from divdelaunay.voronoi import GridGeometry, LabelGrid

from oracles import folded_fixture

PTS = [[0.3, 0.3], [0.7, 0.35], [0.5, 0.7], [0.45, 0.45], [0.62, 0.58]]


@pytest.fixture()
def cfg(tmp_path):
    path = tmp_path / "run.json"
    path.write_text(json.dumps({"sites": {"points": PTS}, "grid": {"dims": [96, 96]}}))
    return path


def build_into(cfg, out, *extra):
    assert main(["build", "--config", str(cfg), "--out", str(out), *extra]) == 0
    return out / "diagram.json", out / "dual.json"


def test_build_then_verify(cfg, tmp_path, capsys):
    diag, dual = build_into(cfg, tmp_path / "o")
    out = capsys.readouterr().out
    assert "orphan\torphan-free" in out and "sites\t5" in out
    assert (tmp_path / "o" / "dual.off").read_text().startswith("OFF")
    assert main(["verify", str(diag), str(dual), "--out", str(tmp_path / "r.json")]) == 0
    rep = json.loads((tmp_path / "r.json").read_text())
    assert rep["verdict"] == "pass"


def test_grid_flag_overrides_config(cfg, tmp_path):
    diag, _ = build_into(cfg, tmp_path / "o", "--grid", "48x40")
    assert json.loads(diag.read_text())["grid"]["dims"] == [48, 40]


def test_planted_orphan_fails_verification(cfg, tmp_path):
    _, dual = build_into(cfg, tmp_path / "o")
    geom = GridGeometry.from_rect((0, 0, 1, 1), (32, 32))
    lab = np.zeros((32, 32), dtype=np.int64)
    lab[:, 16:] = 1
    lab[4:8, 20:24] = 0
    sites = SiteSet(np.array([[0.2, 0.5], [0.8, 0.5]]))
    save_diagram(tmp_path / "orph.json", quadratic(), sites, LabelGrid(geom, lab, np.zeros(lab.shape), {}))
    two = tmp_path / "two.json"
    two.write_text(json.dumps({"sites": sites.points.tolist(), "edges": [[0, 1]], "faces": [],
                               "chain": True}))
    assert main(["verify", str(tmp_path / "orph.json"), str(two)]) == 2


def test_folded_dual_fails_verification(tmp_path):
    du, sites = folded_fixture()
    geom = GridGeometry.from_rect((-0.5, -0.5, 4.5, 4.5), (64, 64))
    xy = geom.vertex_xy(np.arange(geom.n_vertices))
    lab = np.argmin(np.hypot(xy[:, None, 0] - sites.points[None, :, 0],
                             xy[:, None, 1] - sites.points[None, :, 1]), axis=1).reshape(64, 64)
    save_diagram(tmp_path / "d.json", quadratic(), sites, LabelGrid(geom, lab, np.zeros(lab.shape), {}, lab))
    save_dual(du, tmp_path / "t.json")
    assert main(["verify", str(tmp_path / "d.json"), str(tmp_path / "t.json")]) == 2


def test_missing_input_names_the_path(tmp_path, capsys):
    missing = tmp_path / "nope.txt"
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"divergence": {"family": "quadratic", "metric": {"kind": "sampled",
                                                                               "path": str(missing)}},
                               "sites": {"points": PTS}}))
    assert main(["build", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 1
    assert "nope.txt" in capsys.readouterr().err


def test_render_is_deterministic(cfg, tmp_path):
    diag, dual = build_into(cfg, tmp_path / "o")
    a, b, c = tmp_path / "a.svg", tmp_path / "b.svg", tmp_path / "c.svg"
    assert main(["render", str(diag), str(dual), "--out", str(a)]) == 0
    assert main(["render", str(diag), str(dual), "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes() and a.read_bytes().lstrip().startswith(b"<?xml")
    assert main(["render", str(diag), str(dual), "--out", str(c), "--no-primal"]) == 0
    assert c.read_bytes() != a.read_bytes()
    assert main(["render", str(diag), str(dual), "--out", str(c), "--layers", "bogus"]) == 1


def test_bench_csv(cfg, tmp_path, capsys):
    assert main(["bench", "--config", str(cfg), "--sizes", "32x32,64x64", "--repeats", "1",
                 "--out", str(tmp_path / "b")]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[0] == "grid,finalize,relax,millis"
    assert [l.split(",")[:3] for l in lines[1:]] == [["32x32", "1024", "6144"], ["64x64", "4096", "24576"]]
    assert (tmp_path / "b" / "bench.svg").exists()


def test_generate(tmp_path, capsys):
    cfg = tmp_path / "g.json"
    cfg.write_text(json.dumps({"sites": {"random": {"n": 7}}, "seed": 5}))
    assert main(["generate", "--config", str(cfg)]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert len(lines) == 7
    assert main(["generate", "--config", str(cfg), "--seed", "6", "--out", str(tmp_path / "s.txt")]) == 0
    assert main(["generate", "--config", str(cfg), "--seed", "5", "--out", str(tmp_path / "t.txt")]) == 0
    data = [l for l in (tmp_path / "t.txt").read_text().splitlines() if not l.startswith("#")]
    assert data == lines
