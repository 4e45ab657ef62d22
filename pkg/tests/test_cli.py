import csv
import io
import json
import math
import subprocess
import sys

import pytest

from sgt.cli import FORMAT_VERSION, main


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def _csv_rows(text):
    lines = text.splitlines()
    assert lines[0] == f"# format_version: {FORMAT_VERSION}"
    assert lines[1].startswith("# config: ")
    return list(csv.DictReader(io.StringIO("\n".join(lines[2:]))))


# --- validate ----------------------------------------------------------------------

def test_validate_theta(capsys, data_dir):
    code, out, _ = run(capsys, "validate", data_dir / "theta.graph")
    assert code == 0
    report = json.loads(out)
    assert report["ok"] and report["genus"] == 2 and report["format_version"] == FORMAT_VERSION


def test_validate_cycle(capsys, data_dir):
    code, out, _ = run(capsys, "validate", data_dir / "cycle4.graph")
    assert code == 1
    messages = [f["message"] for f in json.loads(out)["failures"]]
    assert "valency 2 at a" in messages and "genus 1" in messages


def test_validate_malformed(capsys, data_dir):
    code, out, err = run(capsys, "validate", data_dir / "malformed.graph")
    assert code == 2 and out == ""
    assert "line 2" in err and "unknown vertex" in err


def test_missing_file(capsys, tmp_path):
    code, _, err = run(capsys, "validate", tmp_path / "nope.graph")
    assert code == 2 and "input error" in err


# --- invariants ----------------------------------------------------------------------

def test_invariants_rose(capsys, data_dir):
    code, out, _ = run(capsys, "invariants", data_dir / "rose2.graph", "--depth", 3)
    data = json.loads(out)
    assert code == 0 and data["g"] == 2
    assert data["delta"] == pytest.approx(math.log(3), abs=1e-10)
    assert data["dims"] == [1, 4, 12, 36] and data["lambdas"] == [1, 64, 1728, 46656]
    assert data["sphere_sizes"] == [1, 4, 12, 36]


def test_invariants_theta_dumbbell(capsys, data_dir):
    for name in ("theta", "dumbbell"):
        _, out, _ = run(capsys, "invariants", data_dir / f"{name}.graph")
        # both are 3-regular, so the Perron value is 2
        assert json.loads(out)["delta"] == pytest.approx(math.log(2), abs=1e-10)


def test_invariants_rejects_cycle(capsys, data_dir):
    code, _, err = run(capsys, "invariants", data_dir / "cycle4.graph")
    assert code == 1 and "hypothesis" in err


# --- measure -----------------------------------------------------------------------------

def test_measure(capsys, data_dir):
    code, out, _ = run(capsys, "measure", data_dir / "theta.graph", "--depth", 2)
    data = json.loads(out)
    assert code == 0
    assert data["tree"]["side"] == "tree" and data["freegroup"]["side"] == "freegroup"
    assert data["config"]["depth"] == 2
    level1 = [e["mass"] for e in data["freegroup"]["entries"] if len(e["word"]) == 1]
    assert sum(level1) == pytest.approx(1.0, abs=1e-12)


def test_measure_methods_and_choice(capsys, data_dir):
    _, a, _ = run(capsys, "measure", data_dir / "dumbbell.graph", "--method", "poincare")
    _, b, _ = run(capsys, "measure", data_dir / "dumbbell.graph", "--method", "perron")
    ta = {tuple(e["path"]): e["mass"] for e in json.loads(a)["tree"]["entries"]}
    tb = {tuple(e["path"]): e["mass"] for e in json.loads(b)["tree"]["entries"]}
    assert max(abs(ta[k] - tb[k]) for k in ta) <= 1e-4
    code, out, _ = run(capsys, "measure", data_dir / "theta.graph", "--choice", 20)
    assert code == 0 and json.loads(out)["origin"] == "A"
    code, _, err = run(capsys, "measure", data_dir / "theta.graph", "--choice", 999)
    assert code == 2 and "out of range" in err
    code, _, err = run(capsys, "measure", data_dir / "theta.graph", "--origin", "Z")
    assert code == 2


# --- zeta ----------------------------------------------------------------------------------

def test_zeta_unit_row(capsys, data_dir):
    code, out, _ = run(capsys, "zeta", data_dir / "rose2.graph", "--s-start", -1.2, "--s-stop", 0,
                       "--s-step", 0.2)
    assert code == 0
    rows = _csv_rows(out)
    by_s = {float(r["s"]): r for r in rows}
    row = by_s[-1.0]
    assert float(row["value"]) == pytest.approx(1 + 5 / 96, abs=1e-12)
    assert abs(float(row["value"]) - float(row["closed_form"])) <= float(row["tail_bound"])
    assert row["N"] == "25" and row["g"] == "2" and row["symbol"] == "1"
    rejected = [r for r in rows if r["status"] != "ok"]
    assert [float(r["s"]) for r in rejected] == [-0.2, 0.0]
    assert all(r["value"] == "" for r in rejected)


def test_zeta_cylinder_recovers_mass(capsys, data_dir):
    _, out, _ = run(capsys, "zeta", data_dir / "theta.graph", "--symbol", "cyl(1)",
                    "--s-start", -30, "--s-stop", -30, "--s-step", 1)
    row = _csv_rows(out)[0]
    assert float(row["value"]) == pytest.approx(1 / 3, abs=1e-8)
    assert row["closed_form"] == ""


def test_zeta_format_guard(capsys, data_dir):
    code, _, err = run(capsys, "zeta", data_dir / "theta.graph", "--format", "json")
    assert code == 2
    code, _, _ = run(capsys, "zeta", data_dir / "theta.graph", "--s-step", -0.1)
    assert code == 2


# --- compare / reconstruct ---------------------------------------------------------------------

def test_compare_exit_codes(capsys, data_dir):
    code, out, _ = run(capsys, "compare", data_dir / "theta.graph", data_dir / "theta_relabeled_L2.graph")
    assert code == 0 and json.loads(out)["outcome"] == "Equal"
    code, out, _ = run(capsys, "compare", data_dir / "theta.graph", data_dir / "dumbbell.graph")
    data = json.loads(out)
    assert code == 3 and data["outcome"] == "Disjoint" and data["genus_pair"] == [2, 2]
    code, out, _ = run(capsys, "compare", data_dir / "theta.graph", data_dir / "dumbbell.graph",
                       "--budget", 1)
    assert code == 3 and json.loads(out)["label"] == "disjoint-at-budget"


def test_reconstruct(capsys, data_dir):
    code, out, _ = run(capsys, "reconstruct", data_dir / "theta.graph", data_dir / "theta.graph",
                       "--radius", 2)
    data = json.loads(out)
    assert code == 0 and data["success"]
    assert all(m["source"] == m["target"] for m in data["mapping"])
    code, out, _ = run(capsys, "reconstruct", data_dir / "theta.graph", data_dir / "dumbbell.graph")
    data = json.loads(out)
    assert code == 3 and not data["success"] and data["witnesses"]


# --- determinism and plumbing --------------------------------------------------------------------

@pytest.mark.parametrize("argv", [
    ["measure", "dumbbell.graph", "--depth", "3"],
    ["zeta", "theta.graph", "--symbol", "0.5*cyl(1)+cyl(2,1)"],
    ["compare", "theta.graph", "theta_relabeled_L2.graph"],
    ["invariants", "rose2.graph"],
])
def test_outputs_byte_identical(argv, data_dir, tmp_path):
    paths = []
    out = tmp_path / "result"
    for _ in range(2):
        args = [argv[0]] + [str(data_dir / a) if a.endswith(".graph") else a for a in argv[1:]]
        assert main(args + ["--out", str(out)]) in (0, 3)
        paths.append(out.read_bytes())
    assert paths[0] == paths[1]
    text = paths[0].decode()
    assert FORMAT_VERSION in text and "config" in text


def test_console_entry_points(data_dir):
    for cmd in (["sgt"], [sys.executable, "-m", "sgt"]):
        res = subprocess.run(cmd + ["validate", str(data_dir / "rose2.graph")],
                             capture_output=True, text=True)
        assert res.returncode == 0 and json.loads(res.stdout)["ok"]
