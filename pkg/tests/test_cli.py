import json

import pytest

from frostman_kit import io
from frostman_kit.cli import main, parse_list
from frostman_kit.geometry import PointCloud
from frostman_kit.measures import cantor_cloud
from conftest import LOG23


def run(argv, tmp_path):
    manifest = tmp_path / "manifest.json"
    code = main(argv + [] if "--manifest" in argv else ["--manifest", str(manifest)] + argv)
    return code, json.loads(manifest.read_text()) if manifest.exists() else None


def write(tmp_path, name, doc):
    path = tmp_path / name
    path.write_text(io.dumps(doc))
    return str(path)


def test_parse_list():
    assert parse_list("4..8", int) == [4, 5, 6, 7, 8]
    assert parse_list("0.5:0.7:0.1") == [0.5, 0.6, 0.7]
    assert parse_list("0.5,0.6") == [0.5, 0.6]


def test_gen_cantor(tmp_path):
    out = tmp_path / "m.json"
    code, manifest = run(["gen", "--kind", "cantor", "--level", "5", "--dim", "1", "--out", str(out)], tmp_path)
    assert code == 0
    assert len(json.loads(out.read_text())["atoms"]) == 32
    assert manifest["command"] == "gen" and manifest["outputs"] == [str(out)]
    assert set(manifest) >= {"command", "args", "seed", "tool_version", "input_hashes", "outputs"}


def test_gen_power_law(tmp_path):
    out = tmp_path / "m.json"
    assert run(["gen", "--kind", "power_law", "--beta", "0.5", "--n", "1000", "--out", str(out)], tmp_path)[0] == 0
    assert len(json.loads(out.read_text())["atoms"]) == 1000


def test_gen_grid_gradient(tmp_path):
    out = tmp_path / "m.json"
    argv = ["gen", "--kind", "grid_gradient", "--f", "x^2", "--m", "2", "--h", "0.1", "--out", str(out)]
    assert run(argv, tmp_path)[0] == 0
    weights = [a["w"] for a in json.loads(out.read_text())["atoms"]]
    assert weights == pytest.approx([0.02] * len(weights), rel=1e-9) and len(weights) == 9


def test_gen_rejects_non_integrable_before_writing(tmp_path):
    out = tmp_path / "m.json"
    code, _ = run(["gen", "--kind", "power_law", "--beta", "1.0", "--out", str(out)], tmp_path)
    assert code == 3 and not out.exists()


def test_usage_error_is_precondition_failure(tmp_path):
    assert main(["gen", "--kind", "nope"]) == 3


def supercover_args(tmp_path, mode, alpha, cloud=None):
    cloud_path = write(tmp_path, "cloud.json", io.cloud_to_json(cloud or cantor_cloud(5)))
    return ["supercover", "--cloud", cloud_path, "--alpha", str(alpha), "--eps", "0.1", "--a", "3",
            "--mode", mode, "--seed", "1"]


def test_supercover_geometric(tmp_path):
    report = tmp_path / "r.json"
    code, manifest = run(supercover_args(tmp_path, "geometric", LOG23) + ["--report", str(report)], tmp_path)
    assert code == 0
    doc = json.loads(report.read_text())
    assert doc["report"]["decay_ratio_q"] == pytest.approx(1 - 9 ** -LOG23)
    assert list(manifest["input_hashes"].values())[0].startswith("sha256:")


def test_supercover_bounded_boundary_alpha(tmp_path):
    cloud = PointCloud(2, [[0.0, 0.0], [0.5, 0.5]], 1e-3)
    report = tmp_path / "r.json"
    code, _ = run(supercover_args(tmp_path, "bounded", 1.0, cloud) + ["--report", str(report)], tmp_path)
    assert code == 3 and not report.exists()


def test_supercover_deterministic(tmp_path):
    outs = []
    for k in range(2):
        fam, rep = tmp_path / f"f{k}.json", tmp_path / f"r{k}.json"
        args = supercover_args(tmp_path, "geometric", LOG23) + ["--out", str(fam), "--report", str(rep)]
        assert run(args, tmp_path)[0] == 0
        outs.append((fam.read_bytes(), rep.read_bytes()))
    assert outs[0] == outs[1]


def test_supercover_out_without_report_rejected(tmp_path):
    fam = tmp_path / "f.json"
    code, _ = run(supercover_args(tmp_path, "geometric", LOG23) + ["--out", str(fam)], tmp_path)
    assert code == 3 and not fam.exists()


def test_supercover_alpha_and_gauge_conflict(tmp_path):
    gauge = write(tmp_path, "g.json", {"kind": "power", "params": [0.5]})
    code, _ = run(supercover_args(tmp_path, "geometric", LOG23) + ["--gauge", gauge], tmp_path)
    assert code == 3


def test_check_dirac_exit_2(tmp_path):
    measure = write(tmp_path, "m.json", {"dim": 1, "atoms": [{"x": [0.0], "w": 1.0}]})
    hyp = write(tmp_path, "h.json", {"profile": {"kind": "plateau"}, "alpha": 0.5, "constant": 1.0})
    out = tmp_path / "o.json"
    code, _ = run(["check", "--measure", measure, "--hypothesis", hyp, "--iters", "200", "--out", str(out)], tmp_path)
    assert code == 2 and json.loads(out.read_text())["violated"]


def test_certify_teor1_cantor(tmp_path):
    mpath = tmp_path / "m.json"
    run(["gen", "--kind", "cantor", "--level", "5", "--out", str(mpath)], tmp_path)
    A = write(tmp_path, "a.json", io.cloud_to_json(cantor_cloud(5)))
    out = tmp_path / "c.json"
    args = ["certify", "--lemma", "teor1", "--measure", str(mpath), "--set", A, "--alpha", str(LOG23),
            "--eps", "0.1", "--iters", "500", "--out", str(out)]
    code, manifest = run(args, tmp_path)
    cert = json.loads(out.read_text())
    assert code == 0 and cert["valid"] and cert["lemma"] == "teor1"
    assert len(manifest["input_hashes"]) == 2
    first = out.read_bytes()
    run(args, tmp_path)
    assert out.read_bytes() == first


def test_certify_teor3_neither_tail_exit_2(tmp_path):
    mpath = write(tmp_path, "m.json", {"dim": 1, "atoms": [{"x": [0.0], "w": 1.0}, {"x": [0.5], "w": 1.0}]})
    A = write(tmp_path, "a.json", {"dim": 1, "points": [[0.0], [0.5]], "resolution": 1e-3})
    hyp = write(tmp_path, "h.json", {"profile": {"kind": "log_power_tail", "params": [0.5]}, "alpha": 0.5})
    code, _ = run(["certify", "--lemma", "teor3", "--measure", mpath, "--set", A, "--alpha", "0.5",
                   "--hypothesis", hyp, "--eps", "0.1"], tmp_path)
    assert code == 2


def test_certify_missing_file_exit_3(tmp_path):
    code, _ = run(["certify", "--lemma", "teor1", "--measure", str(tmp_path / "none.json"), "--set",
                   str(tmp_path / "none.json"), "--alpha", "0.5", "--eps", "0.1"], tmp_path)
    assert code == 3


def test_energy_transition(tmp_path):
    out, table = tmp_path / "e.json", tmp_path / "e.csv"
    code, manifest = run(["energy", "--kind", "cantor", "--levels", "4..8", "--alphas", "0.5,0.6,0.7",
                          "--out", str(out), "--csv", str(table)], tmp_path)
    assert code == 0
    rows = json.loads(out.read_text())["rows"]
    verdicts = [r["verdict"] for r in rows]
    assert verdicts == ["cauchy", "cauchy", "divergent"]
    # the switch lies between 0.6 and 0.7, within 0.08 of log2/log3
    assert abs(0.65 - LOG23) < 0.08
    assert table.read_text().splitlines()[0].startswith("alpha,level_4")
    assert str(table) in manifest["outputs"]


def test_dim_power_law(tmp_path):
    out = tmp_path / "d.json"
    code, _ = run(["dim", "--kind", "power_law", "--beta", "0.3", "--levels", "250,500,1000",
                   "--alphas", "0.5:1.0:0.1", "--iters", "300", "--out", str(out)], tmp_path)
    assert code == 0
    assert json.loads(out.read_text())["estimate"] >= 0.6


def test_threads_env(monkeypatch, tmp_path):
    from frostman_kit.geometry import workers
    monkeypatch.setenv("FROSTMAN_THREADS", "2")
    assert workers() == 2
    monkeypatch.delenv("FROSTMAN_THREADS")
    assert workers() == -1 or workers() >= 1
