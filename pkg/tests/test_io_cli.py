import json
import math

import numpy as np
import pytest

from spherefront import __version__
from spherefront.cli import main
from spherefront.config import DEFAULT_TOLERANCES, build_session, load_config_file, parse_key_values
from spherefront.curves import PeriodKind, classify_period, frenet, make_helix
from spherefront.io import (
    csv_text,
    dumps_json,
    fmt,
    obj_text,
    read_curve_csv,
    write_curve_csv,
    write_json,
    write_obj,
)

SQ = math.sqrt
SMALL = ["--grid", "128", "64"]


@pytest.fixture(autouse=True)
def _no_config(monkeypatch):
    monkeypatch.delenv("SPHEREFRONT_CONFIG", raising=False)


def _summary(path):
    return json.loads((path / "summary.json").read_text())["data"]


# ---------------------------------------------------------------------------
# writers
# ---------------------------------------------------------------------------


def test_fmt_special_values():
    assert fmt(-0.0) == "0.0"
    assert fmt(float("nan")) == "nan"
    assert fmt(float("-inf")) == "-inf"
    assert float(fmt(0.1 + 0.2)) == 0.1 + 0.2


def test_json_sorted_and_finite(tmp_path):
    text = dumps_json({"b": np.float64(np.inf), "a": np.arange(3), "c": {"z": True, "y": -0.0}})
    assert text.index('"a"') < text.index('"b"') < text.index('"c"')
    assert "Infinity" not in text and '"inf"' in text
    assert '"y": 0.0' in text
    write_json(tmp_path / "r.json", {"x": 1}, {"command": "demo"})
    body = json.loads((tmp_path / "r.json").read_text())
    assert body == {"data": {"x": 1}, "metadata": {"command": "demo"}}
    with pytest.raises(TypeError):
        dumps_json({"x": object()})


def test_obj_is_one_based():
    text = obj_text(np.eye(3), np.array([[0, 1, 2]]), [np.zeros((2, 3))])
    lines = text.splitlines()
    assert lines[3] == "f 1 2 3"
    assert lines[-1] == "l 4 5"
    assert sum(ln.startswith("v ") for ln in lines) == 5


def test_write_obj_validation(tmp_path):
    with pytest.raises(ValueError):
        write_obj(tmp_path / "x.obj", np.zeros((3, 4)))
    with pytest.raises(ValueError):
        write_obj(tmp_path / "x.obj", np.eye(3), np.array([[0, 1, 3]]))


def test_csv_header_mandatory():
    with pytest.raises(ValueError):
        csv_text([], [[1.0]])
    assert csv_text(["i", "v"], [(1, 0.5), (2, "x")]) == "i,v\n1,0.5\n2,x\n"


def test_curve_csv_round_trip(tmp_path):
    c = make_helix(SQ(5), SQ(5) / 3, 256)
    write_curve_csv(tmp_path / "c.csv", np.append(c.s, c.length), np.vstack([c.samples, c.samples[:1]]))
    r = read_curve_csv(tmp_path / "c.csv")
    assert r.closed and r.m == 256
    assert classify_period(r).kind is PeriodKind.ANTIPERIODIC
    assert np.allclose(frenet(r).tau, 5 / 3, atol=1e-6)


@pytest.mark.parametrize("header,rows", [
    ("t,x_1,x_2,x_3,x_4", "0,1,0,0,0"),
    ("s,x_1,x_2,x_3", "0,1,0,0"),
    ("s,x_2,x_1,x_3,x_4", "0,1,0,0,0"),
    ("s,x_1,x_2,x_3,x_4", "0,2,0,0,0"),
])
def test_curve_csv_rejects(tmp_path, header, rows):
    p = tmp_path / "bad.csv"
    p.write_text(header + "\n" + rows + "\n")
    with pytest.raises(ValueError):
        read_curve_csv(p)


def test_curve_csv_rejects_nonuniform(tmp_path):
    c = make_helix(2, 0.5, 128)
    s = c.s.copy()
    s[5] += 1e-3
    write_curve_csv(tmp_path / "c.csv", s, c.samples)
    with pytest.raises(ValueError):
        read_curve_csv(tmp_path / "c.csv")


# ---------------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------------


def test_parse_key_values():
    assert parse_key_values(["# comment", "m_s = 256  # trailing", "", "helix=2 0.5"]) == \
        {"m_s": "256", "helix": "2 0.5"}
    with pytest.raises(ValueError):
        parse_key_values(["no equals sign"])


def test_config_file_and_cli_override(tmp_path, monkeypatch):
    cfg_file = tmp_path / "sf.cfg"
    cfg_file.write_text("m_s = 256\nm_x = 128\ntol.rank_dnu = 1e-3\nhelix = 2 0.5\nprojection = central\n")
    monkeypatch.setenv("SPHEREFRONT_CONFIG", str(cfg_file))
    values = load_config_file()
    cfg = build_session(values)
    assert (cfg.m_s, cfg.m_x, cfg.projection) == (256, 128, "central")
    assert cfg.tolerances.rank_dnu == 1e-3
    assert cfg.curve == {"helix": "2 0.5"}
    over = build_session(values, m_s=512, curve={"great_circle": True}, tol={"rank_dnu": 1e-5})
    assert over.m_s == 512 and over.curve == {"great_circle": True}
    assert over.tolerances.rank_dnu == 1e-5
    with pytest.raises(KeyError):
        build_session({"colour": "red"})


def test_session_validation():
    with pytest.raises(ValueError):
        build_session({}, n=1)
    with pytest.raises(ValueError):
        build_session({}, m_s=16)
    with pytest.raises(ValueError):
        build_session({}, projection="mercator")
    with pytest.raises(KeyError):
        DEFAULT_TOLERANCES.replace(not_a_tolerance=1.0)
    with pytest.raises(ValueError):
        DEFAULT_TOLERANCES.replace(rank_dnu=-1.0)


# ---------------------------------------------------------------------------
# CLI
# ---------------------------------------------------------------------------


def test_version(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["--version"])
    assert exc.value.code == 0
    assert __version__ in capsys.readouterr().out


def test_cli_exit_codes(tmp_path, capsys):
    assert main(["tube", "--helix", "0.5", "0.2", "--out", str(tmp_path / "a")] + SMALL) == 2
    assert "error" in capsys.readouterr().err
    assert main(["tube", "--out", str(tmp_path / "b")] + SMALL) == 2  # no curve
    assert main(["tube", "--helix", "2", "0.5", "--great-circle", "--out", str(tmp_path / "c")] + SMALL) == 2
    assert main(["tube", "--helix", "2", "0.5", "--tol", "bogus=1", "--out", str(tmp_path / "d")] + SMALL) == 2
    assert main(["verify", "tube", "--helix", "2", "0.5", "--out", str(tmp_path / "e")] + SMALL) == 2
    with pytest.raises(SystemExit) as exc:
        main(["nonsense"])
    assert exc.value.code == 2


def test_cli_config_env(tmp_path, monkeypatch):
    cfg_file = tmp_path / "sf.cfg"
    cfg_file.write_text(f"helix = 2 0.5\nm_s = 128\nm_x = 64\nout = {tmp_path / 'from_file'}\n")
    monkeypatch.setenv("SPHEREFRONT_CONFIG", str(cfg_file))
    assert main(["tube"]) == 0
    s = _summary(tmp_path / "from_file")
    assert s["grid"] == {"m_s": 128, "m_x": 64}
    meta = json.loads((tmp_path / "from_file" / "summary.json").read_text())["metadata"]
    assert meta["config"]["curve"] == {"helix": "2 0.5"}


def test_cli_tol_override_recorded(tmp_path):
    out = tmp_path / "t"
    assert main(["tube", "--helix", "2", "0.5", "--tol", "rank_dnu=1e-3", "--out", str(out)] + SMALL) == 0
    meta = json.loads((out / "summary.json").read_text())["metadata"]
    assert meta["config"]["tolerances"]["rank_dnu"] == 1e-3


@pytest.mark.parametrize("kt,verdict", [((0.75, 1.25), "co-orientable"), ((4 / 3, 5 / 3), "non-co-orientable")])
def test_cli_tube_coorientability(tmp_path, kt, verdict):
    out = tmp_path / "o"
    args = ["tube", "--helix-kappa-tau", str(kt[0]), str(kt[1]), "--out", str(out)] + SMALL
    assert main(args) == 0
    s = _summary(out)
    assert s["coorientability"] == verdict
    assert s["singular_roots_per_slice"]["min"] >= 1
    assert s["umbilic_count"] == 0
    for name in ("mesh.obj", "polylines.obj", "polylines.csv", "field.csv", "summary.json"):
        assert (out / name).exists()
    assert (out / "field.csv").read_text().startswith("i,j,u1,u2,rho,stratum\n")


def test_cli_great_circle(tmp_path):
    out = tmp_path / "gc"
    assert main(["tube", "--great-circle", "--out", str(out)] + SMALL) == 0
    s = _summary(out)
    assert s["totally_geodesic"] and s["umbilic_count"] == "n/a"
    assert s["all_nodes_singular"]


def test_cli_mesh_faces_valid(tmp_path):
    out = tmp_path / "m"
    assert main(["tube", "--helix", "2", "0.5", "--project", "central", "--out", str(out)] + SMALL) == 0
    lines = (out / "mesh.obj").read_text().splitlines()
    nv = sum(ln.startswith("v ") for ln in lines)
    idx = np.array([[int(t) for t in ln.split()[1:]] for ln in lines if ln.startswith("f ")])
    assert idx.min() >= 1 and idx.max() <= nv
    s = _summary(out)
    assert s["mesh"]["dropped_vertices"] + nv == 129 * 64


def test_cli_caustic_summary(tmp_path):
    out = tmp_path / "c"
    assert main(["transform", "caustic", "--helix", str(SQ(5)), str(SQ(5) / 3), "--out", str(out)] + SMALL) == 0
    s = _summary(out)
    assert s["transfer"]["antiperiodic_transfer"] and s["weakly_complete"]
    assert s["umbilic_free"] and s["rank_dnu"]["verdict"] == "pass"


def test_cli_dual_summary(tmp_path):
    out = tmp_path / "d"
    assert main(["transform", "dual", "--helix", "2", "0.5", "--out", str(out)] + SMALL) == 0
    s = _summary(out)
    assert s["self_dual"]["is_self_dual"] and s["flagged_nodes"] == 0
    assert (out / "flagged.csv").read_text().startswith("i,j,s,t,x_1")


def test_cli_curve_round_trips(tmp_path):
    out = tmp_path / "cv"
    assert main(["curve", "--helix", str(SQ(2.5)), str(SQ(5 / 8)), "--out", str(out)] + SMALL) == 0
    s = _summary(out)
    assert s["period"]["kind"] == "periodic"
    back = tmp_path / "back"
    assert main(["curve", "--curve-csv", str(out / "curve.csv"), "--out", str(back)] + SMALL) == 0
    b = _summary(back)
    assert b["period"]["kind"] == "periodic"
    assert b["period"]["period"] == pytest.approx(s["period"]["period"], abs=1e-7)
    assert b["tau_range"] == pytest.approx([1.25, 1.25], abs=1e-6)


def test_cli_verify_small_sphere_expected_fail(tmp_path):
    out = tmp_path / "v"
    assert main(["verify", "small-sphere", "--out", str(out)]) == 0
    s = _summary(out)
    assert s["all_as_expected"]
    assert s["checks"]["rank_dnu"]["status"] == "expected-fail"
    assert s["checks"]["front_criterion"]["status"] == "pass"


def test_cli_verify_tube_passes(tmp_path):
    out = tmp_path / "vt"
    assert main(["verify", "tube", "--helix", "2", "0.5", "--grid", "256", "128", "--out", str(out)]) == 0
    s = _summary(out)
    assert all(v["status"] == "pass" for v in s["checks"].values())
    assert {"caustic_tangency", "asymptotic_ode", "parallel_principal_curvature"} <= set(s["checks"])
