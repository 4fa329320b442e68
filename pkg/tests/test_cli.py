import json
import os
import subprocess
import sys

import pytest

DISK_SCENARIO = {
    "name": "disk",
    "seed": 3,
    "boundary": {"kind": "circle", "radius": 1.0, "segments": 96},
    "grid": {"lo": [-1.75, -1.75, -0.75], "hi": [1.75, 1.75, 0.75], "h": 0.125},
    "pipeline": [
        {"op": "flat_disk", "radius": 1.0},
        {"op": "prune"},
        {"op": "certify"},
        {"op": "local_search", "budget": 10},
    ],
}


def run_cli(args, cwd):
    return subprocess.run([sys.executable, "-m", "plateau.cli"] + args,
                          capture_output=True, text=True, cwd=cwd)


def load_report(outdir):
    with open(os.path.join(outdir, "report.json")) as fh:
        return json.load(fh)


def strip_clock(rep):
    rep = dict(rep)
    rep.pop("wallclock_s", None)
    return rep


def write_scenario(tmp_path, sc, name="scenario.json"):
    p = tmp_path / name
    p.write_text(json.dumps(sc))
    return str(p)


def test_run_disk_scenario_and_determinism(tmp_path):
    sc = write_scenario(tmp_path, DISK_SCENARIO)
    out1, out2 = str(tmp_path / "o1"), str(tmp_path / "o2")
    r1 = run_cli(["run", sc, "--out", out1], cwd=str(tmp_path))
    assert r1.returncode == 0, r1.stderr
    r2 = run_cli(["run", sc, "--out", out2], cwd=str(tmp_path))
    assert r2.returncode == 0, r2.stderr
    rep1, rep2 = load_report(out1), load_report(out2)
    assert strip_clock(rep1) == strip_clock(rep2)
    assert not rep1["certification_failed"]
    meshes = [e["mesh"] for e in rep1["stages"] if "mesh" in e]
    for name in meshes + ["boundary.obj", "trace.csv"]:
        with open(os.path.join(out1, name)) as a, \
             open(os.path.join(out2, name)) as b:
            assert a.read() == b.read()


def test_run_certification_failure_exit_code(tmp_path):
    sc = dict(DISK_SCENARIO)
    sc["name"] = "disk-bad-expect"
    sc["pipeline"] = [
        {"op": "flat_disk", "radius": 1.0},
        {"op": "prune"},
        {"op": "certify", "expect": "NotSpanning"},
    ]
    p = write_scenario(tmp_path, sc)
    r = run_cli(["run", p, "--out", str(tmp_path / "o")], cwd=str(tmp_path))
    assert r.returncode == 2


def test_expected_notspanning_passes(tmp_path):
    sc = dict(DISK_SCENARIO)
    sc["name"] = "small-disk-notspan"
    sc["pipeline"] = [
        {"op": "flat_disk", "radius": 0.4},
        {"op": "certify", "expect": "NotSpanning"},
    ]
    p = write_scenario(tmp_path, sc)
    r = run_cli(["run", p, "--out", str(tmp_path / "o")], cwd=str(tmp_path))
    assert r.returncode == 0, r.stderr


def test_schema_error_is_machine_readable(tmp_path):
    sc = dict(DISK_SCENARIO)
    sc["name"] = "bad"
    sc["bogus_key"] = 1
    p = write_scenario(tmp_path, sc)
    r = run_cli(["run", p, "--out", str(tmp_path / "o")], cwd=str(tmp_path))
    assert r.returncode == 3
    err = json.loads(r.stdout)
    assert "error" in err and err["error"]["code"] == "schema"


def test_identities_subcommand():
    r = subprocess.run([sys.executable, "-m", "plateau.cli", "identities",
                        "--suite", "boundary", "--trials", "10", "--seed", "1"],
                       capture_output=True, text=True)
    assert r.returncode == 0, r.stderr
    assert "boundary" in r.stdout


def test_export_roundtrip(tmp_path):
    sc = write_scenario(tmp_path, DISK_SCENARIO)
    out = str(tmp_path / "o")
    r = run_cli(["run", sc, "--out", out], cwd=str(tmp_path))
    assert r.returncode == 0, r.stderr
    rep = load_report(out)
    mesh = [e["mesh"] for e in rep["stages"] if "mesh" in e][0]
    src = os.path.join(out, mesh)
    for fmt in ("off", "csv", "txt"):
        dst = str(tmp_path / ("x." + fmt))
        r2 = run_cli(["export", src, "--format", fmt, "--out", dst],
                     cwd=str(tmp_path))
        assert r2.returncode == 0, r2.stderr
        assert os.path.getsize(dst) > 0
