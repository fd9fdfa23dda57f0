import json

import pytest

from ilctiling.cli import RunConfig, main


def run(tmp_path, *args):
    return main(list(args) + ["--out-dir", str(tmp_path)])


def test_verify_algebra(tmp_path, capsys):
    assert run(tmp_path, "verify-algebra", "--n", "13") == 0
    rep = json.loads((tmp_path / "algebra_13.json").read_text())
    assert rep["minimal_poly_str"] == "x^6 - 3x^5 - 6x^4 + 4x^3 + 5x^2 - x - 1"
    assert round(rep["mu2"], 5) == -1.41002
    assert rep["identities"]["ok"]


def test_verify_algebra_17_rows(tmp_path):
    assert run(tmp_path, "verify-algebra", "--n", "17") == 0
    rep = json.loads((tmp_path / "algebra_17.json").read_text())
    assert len(rep["h"]) == 9 and all(r["ok"] for r in rep["h"])


def test_usage_error(tmp_path, capsys):
    assert run(tmp_path, "verify-algebra", "--n", "15") == 2
    assert main(["no-such-command"]) == 2


def test_run_config_validation(tmp_path):
    with pytest.raises(ValueError):
        RunConfig(15, "dissect", tmp_path)
    with pytest.raises(ValueError):
        RunConfig(13, "dissect", tmp_path, budget=0)


def test_verify_ilc_replay(tmp_path):
    assert run(tmp_path, "verify-ilc", "--n", "13") == 0
    d = json.loads((tmp_path / "trace.json").read_text())
    assert d["first_criterion_r"] == 5 and d["monotone_from_first_criterion"]
    assert "first r with ratio above threshold: 5" in (tmp_path / "trace.txt").read_text()


def test_verify_ilc_t_file(tmp_path):
    t = tmp_path / "t.json"
    t.write_text(json.dumps([[1], [3], [], [0, 2], [], [], [0, 2]]))
    assert run(tmp_path, "verify-ilc", "--n", "13", "--t-file", str(t)) == 0


def test_verify_ilc_partial(tmp_path):
    assert run(tmp_path, "verify-ilc", "--n", "21") == 0
    d = json.loads((tmp_path / "trace.json").read_text())
    assert abs(d["seed_abs"] - 0.244876744) < 1e-6


def test_verify_ilc_derive(tmp_path):
    assert run(tmp_path, "verify-ilc", "--n", "13", "--mode", "derive", "--max-r", "20") == 0
    d = json.loads((tmp_path / "trace.json").read_text())
    assert d["first_criterion_r"] is not None and d["derived_t"]


def test_dissect_13(tmp_path):
    assert run(tmp_path, "dissect", "--n", "13") == 0
    assert len(list(tmp_path.glob("dissection_13_*.svg"))) == 6
    rule = json.loads((tmp_path / "rule.json").read_text())
    assert sorted(rule["rule"]) == [str(k) for k in range(1, 7)]


def test_dissect_single_k(tmp_path):
    assert run(tmp_path, "dissect", "--n", "17", "--k", "6") == 0
    assert [p.name for p in tmp_path.glob("*.svg")] == ["dissection_17_6.svg"]
    assert run(tmp_path, "dissect", "--n", "17", "--k", "9") == 2


def test_svg_deterministic(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert run(a, "supertile", "--n", "13", "--k", "2", "--order", "1") == 0
    assert run(b, "supertile", "--n", "13", "--k", "2", "--order", "1") == 0
    name = "supertile_13_2_1.svg"
    assert (a / name).read_bytes() == (b / name).read_bytes()
    assert (a / "patch.json").read_text() == (b / "patch.json").read_text()


def test_supertile_order_zero(tmp_path):
    assert run(tmp_path, "supertile", "--n", "13", "--order", "0") == 0
    d = json.loads((tmp_path / "supertile.json").read_text())
    assert d["tiles"] == 1


def test_supertile_guard(tmp_path):
    assert run(tmp_path, "supertile", "--n", "13", "--order", "5", "--max-tiles", "100") == 1


def test_symmetry(tmp_path):
    code = run(tmp_path, "symmetry", "--n", "13", "--iterations", "3")
    d = json.loads((tmp_path / "symmetry.json").read_text())
    if code == 0:
        assert d["seed"]["symmetry_order"] == 26 and d["nesting"]["ok"]
    else:
        assert code == 3
        assert d["seed"]["failed_stage"] and d["seed"]["reason"]
