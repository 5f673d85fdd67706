import json

import pytest

from qkahler.cli import ConfigError, RunConfig, cmd_cohomology, cmd_serre, main, make_config, parse_bundles

SMALL = ["--lmax", "2", "--bundles=-1..1"]


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_verify_passes(capsys):
    code, out, err = run(capsys, "verify", *SMALL, "--format", "json")
    assert code == 0 and err == ""
    rep = json.loads(out)
    assert set(rep) == {"version", "config", "checks", "cohomology", "certificates"}
    assert rep["version"]["schema"] == 1
    names = {c["name"].split("/", 1)[1] for c in rep["checks"]}
    for check in ("sl2", "lefschetz-triple", "metric", "stokes", "nakano", "akizuki-nakano",
                  "hodge-decomposition", "intertwine", "two-path-cohomology", "kodaira-vanishing"):
        assert check in names
    assert all(c["status"] == "pass" and c["max_residual"] == 0 for c in rep["checks"])
    assert all({"name", "status", "max_residual"} <= set(c) for c in rep["checks"])
    kinds = {c["kind"] for c in rep["certificates"]}
    assert {"positivity", "diagonalizability", "fano"} <= kinds


@pytest.mark.parametrize("inject,failing", [("codifferential", "E_-1/dbar-adjoint"),
                                            ("connection", "E_-1/chern-connection")])
def test_injected_perturbation_fails_by_name(capsys, inject, failing):
    code, out, err = run(capsys, "verify", *SMALL, "--inject-perturbation", inject)
    assert code == 1
    assert f"check failed: {failing}" in err
    assert out.rstrip().endswith(f"FAIL: {failing}")


@pytest.mark.parametrize("argv", [
    ["verify", "--q", "1"],
    ["verify", "--q", "abc"],
    ["verify", "--lmax", "1/3"],
    ["verify", "--tol", "1e-10"],
    ["verify", "--normalization", "unitary"],
    ["cohomology", "--bundles", "3..1"],
    ["cohomology", "--lmax", "1", "--bundles=-9..0"],
    ["serre", "--config", "/nonexistent/config.json"],
])
def test_config_errors_exit_2(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == 2
    assert err.startswith("config error:")


def test_invalid_q_is_named(capsys):
    _, _, err = run(capsys, "verify", "--q", "1")
    assert "InvalidQ" in err


def test_cohomology_table(capsys):
    code, out, _ = run(capsys, "cohomology", "--bundles=-3..3", "--format", "json")
    assert code == 0
    rows = {r["bundle"]: r for r in json.loads(out)["cohomology"]}
    assert [rows[k]["h00"] for k in range(4)] == [1, 2, 3, 4]
    assert all(rows[k]["h01"] == 0 and rows[k]["h11"] == 0 for k in range(1, 4))
    assert rows[-3]["h01"] == 2
    assert all(r["cutoff"] == "3" and r["mode"] == "exact" for r in rows.values())


def test_cohomology_json_is_byte_identical(tmp_path, capsys):
    paths = [tmp_path / "a.json", tmp_path / "b.json"]
    for p in paths:
        assert main(["cohomology", "--bundles=-2..2", "--out", str(p)]) == 0
    capsys.readouterr()
    assert paths[0].read_bytes() == paths[1].read_bytes()


def test_text_output(capsys):
    code, out, _ = run(capsys, "cohomology", "--bundles=0..2")
    lines = out.splitlines()
    assert code == 0
    assert lines[0].startswith("q=4/5 lmax=3 mode=exact")
    assert "(blocks up to l = 3)" in out
    assert lines[-1] == "PASS"


def test_config_file_and_flag_precedence(tmp_path, capsys):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"q": "2/3", "lmax": "3/2", "bundles": "0..1"}))
    code, out, _ = run(capsys, "cohomology", "--config", str(cfg), "--q", "3/4", "--format", "json")
    assert code == 0
    echo = json.loads(out)["config"]
    assert echo["q"] == "3/4" and echo["lmax"] == "3/2" and echo["bundles"] == "0..1"


def test_serre_report():
    rep = cmd_serre(make_config("serre", bundles="-4..4"))
    assert rep.passed
    by = {(c["bundle"], c["bidegree"]): c for c in rep.certificates}
    assert by[(2, "00")]["rank"] == 3
    for c in rep.certificates:
        assert c["dim"] == c["dual_dim"]
    # the dual of E_k is E_{-k}, so the dual side reappears as a row of the table
    for (k, bd), c in by.items():
        a, b = int(bd[0]), int(bd[1])
        assert c["dual_dim"] == by[(-k, f"{1 - a}{1 - b}")]["dim"]


def test_approx_unitary_run(capsys):
    code, out, _ = run(capsys, "verify", "--lmax", "3/2", "--bundles=0..1", "--mode", "approx",
                       "--normalization", "unitary", "--format", "json")
    assert code == 0
    rep = json.loads(out)
    assert rep["config"]["tol"] == 1e-25
    assert all(c["max_residual"] <= 1e-25 for c in rep["checks"])


@pytest.mark.parametrize("text,expected", [("-5..5", (-5, 5)), ("0..0", (0, 0)), ("2..7", (2, 7))])
def test_parse_bundles(text, expected):
    assert parse_bundles(text) == expected


@pytest.mark.parametrize("text", ["5", "a..b", "1..0", "1...2"])
def test_parse_bundles_rejects(text):
    with pytest.raises(ConfigError):
        parse_bundles(text)


def test_run_config_defaults():
    cfg = make_config("verify")
    assert cfg == RunConfig()
    assert list(cfg.ks) == list(range(-5, 6))
    assert make_config("verify", mode="approx").tol == 1e-25


def test_cohomology_rows_are_ordered():
    rep = cmd_cohomology(make_config("cohomology", lmax="3/2", bundles="-2..2"))
    assert [r["bundle"] for r in rep.cohomology] == list(range(-2, 3))
