import csv
import json
import shutil
import subprocess
import sys
from pathlib import Path

import pytest

from pclab.cli import main
from pclab.errors import ConfigError
from pclab.reports import config as rc
from pclab.reports.run import combine_exit_codes, fmt, grid_points, run, sweep

import oracles

ROOT = Path(__file__).resolve().parents[1]
CONFIGS = ROOT / "configs"
GOLDEN = json.loads((Path(__file__).with_name("golden_digests.json")).read_text())


def write(tmp_path, name, data):
    p = tmp_path / name
    p.write_text(json.dumps(data))
    return p


def report_of(out_dir):
    (d,) = [p for p in Path(out_dir).iterdir() if p.is_dir()]
    return json.loads((d / "report.json").read_text()), d


# ---------------------------------------------------------------- configs


def test_minimal_heat_config_fills_defaults(tmp_path, capsys):
    p = write(tmp_path, "heat.json", {"experiment": "heat"})
    cfg = rc.load_config(p)
    assert cfg.data["domain"]["grid_points"] == 64
    assert cfg.data["tolerances"]["closed_form"] == 1e-12
    assert cfg.data["seeds"] == [0]
    assert main(["validate", str(p)]) == 0
    echoed = json.loads(capsys.readouterr().out)
    assert echoed == cfg.data


def test_nonpositive_c_is_named(tmp_path, capsys):
    p = write(tmp_path, "prop.json", {"experiment": "proportionality",
                                      "source": {"kind": "constant", "value": 1.0, "bounds": {"c": 0.0, "M": 1.0}}})
    with pytest.raises(ConfigError) as exc:
        rc.load_config(p)
    assert "bounds.c must be > 0" in exc.value.problems
    assert exc.value.exit_code == 3
    assert main(["validate", str(p)]) == 3
    assert "bounds.c must be > 0" in capsys.readouterr().err


def test_every_problem_is_reported():
    data = {"experiment": {"kind": "v_sequence", "eps": 2.0, "iterations": -1},
            "time": {"horizon": -1.0, "steps": 0},
            "source": {"kind": "constant", "value": 1.0, "bounds": {"c": -1.0, "M": 1.0}},
            "bogus": 1}
    with pytest.raises(ConfigError) as exc:
        rc.build_config(data)
    probs = exc.value.problems
    for expected in ("unknown top-level keys: bogus", "time.horizon must be > 0", "time.steps must be an integer >= 1",
                     "bounds.c must be > 0", "experiment.eps must lie in (0, 1)",
                     "experiment.iterations must be an integer >= 0"):
        assert expected in probs
    assert len(probs) >= 6


def test_unknown_kind_and_parse_errors(tmp_path):
    with pytest.raises(ConfigError) as exc:
        rc.build_config({"experiment": "nope"})
    assert exc.value.exit_code == 3
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["validate", str(bad)]) == 2
    assert main(["run", str(tmp_path / "missing.json")]) == 2
    arr = tmp_path / "arr.json"
    arr.write_text("[1, 2]")
    assert main(["validate", str(arr)]) == 2


@pytest.mark.parametrize("name", sorted(GOLDEN))
def test_golden_digests(name):
    assert rc.load_config(CONFIGS / name).digest == GOLDEN[name]


def test_every_golden_config_has_a_recorded_digest():
    assert sorted(p.name for p in CONFIGS.glob("*.json")) == sorted(GOLDEN)


def test_digest_ignores_key_order_and_output_dir():
    a = rc.build_config({"experiment": "heat", "time": {"steps": 10, "horizon": 1.0}, "output_dir": "x"})
    b = rc.build_config({"output_dir": "y", "time": {"horizon": 1.0, "steps": 10}, "experiment": {"kind": "heat"}})
    assert a.digest == b.digest
    assert a.experiment_id == f"heat-{a.digest[:12]}"
    c = rc.build_config({"experiment": "heat", "time": {"steps": 11}})
    assert c.digest != a.digest


# ------------------------------------------------------------------- runs


def test_fmt_uses_17_significant_digits():
    assert fmt(0.1) == "0.10000000000000001"
    assert fmt(1) == "1"
    assert fmt(True) == "true"
    assert fmt(None) == ""


def test_max_principle_golden_passes(tmp_path, capsys):
    assert main(["run", str(CONFIGS / "max_principle_dip.json"), "--output-dir", str(tmp_path)]) == 0
    rep, d = report_of(tmp_path)
    assert rep["verdict"] == "PASS"
    assert rep["ladder"]["agree"]
    assert rep["config_digest"] == GOLDEN["max_principle_dip.json"]
    assert {"series.csv", "plot_z_final.csv", "config.json", "report.json"} <= {p.name for p in d.iterdir()}
    assert not [p for p in d.iterdir() if p.name.endswith(".tmp")]


def test_inadmissible_beta_is_rejected_with_report(tmp_path):
    assert main(["run", str(CONFIGS / "max_principle_bad_beta.json"), "--output-dir", str(tmp_path)]) == 3
    rep, _ = report_of(tmp_path)
    assert rep["verdict"] == "PRECONDITION_REJECTED"
    assert rep["exit_code"] == 3
    assert rep["violated_inequality"] == "max beta = beta(T)"


def test_proportionality_is_report_only(tmp_path):
    cfg = rc.load_config(CONFIGS / "proportionality_u1.json", tmp_path)
    rep = run(cfg)
    assert rep.verdict == "REPORT_ONLY" and rep.exit_code == 0
    r1 = rep.summary["r_T"]
    assert abs(r1 - oracles.R1_U1_SIN) <= 1e-6
    assert r1 > 0


def test_failing_claim_exits_one(tmp_path):
    # the heat closed form cannot meet a zero tolerance on every node
    p = write(tmp_path, "strict.json", {"experiment": {"kind": "heat", "initial": {"modes": [[3, 1.0]]}},
                                        "time": {"horizon": 0.7, "steps": 7},
                                        "tolerances": {"closed_form": -1.0}})
    assert main(["run", str(p), "--output-dir", str(tmp_path / "out")]) == 1
    rep, _ = report_of(tmp_path / "out")
    assert rep["verdict"] == "FAIL" and rep["fail_reason"] == "check"


def test_divergence_exits_four(tmp_path):
    p = write(tmp_path, "blow.json", {"experiment": {"kind": "ns_energy", "nu": 0.01,
                                                     "initial": {"kind": "random", "energy": 1e-3}},
                                      "domain": {"dims": 2, "K": 4},
                                      "time": {"horizon": 1.0, "steps": 10},
                                      "source": {"kind": "random", "amplitude": 1e6}})
    assert main(["run", str(p), "--output-dir", str(tmp_path / "out")]) == 4
    rep, _ = report_of(tmp_path / "out")
    assert rep["verdict"] == "FAIL" and rep["fail_reason"] == "divergence"


def test_list_experiments(capsys):
    assert main(["list-experiments"]) == 0
    kinds = [line.split()[0] for line in capsys.readouterr().out.splitlines()]
    assert kinds == list(rc.EXPERIMENTS)


def test_console_script_is_installed(tmp_path):
    exe = shutil.which("pclab")
    cmd = [exe] if exe else [sys.executable, "-m", "pclab.cli"]
    out = subprocess.run(cmd + ["list-experiments"], capture_output=True, text=True)
    assert out.returncode == 0 and "ns_uniqueness" in out.stdout


# ----------------------------------------------------------------- sweeps


def small_v_sequence():
    return {"experiment": {"kind": "v_sequence", "iterations": 3,
                           "omega": [[0.7853981633974483, 2.356194490192345]]},
            "domain": {"dims": 1, "grid_points": 63},
            "time": {"horizon": 64.0, "steps": 200},
            "source": {"kind": "constant", "value": 1.0, "bounds": {"c": 1.0, "M": 1.0}}}


def test_grid_order_is_lexicographic():
    pts = grid_points({"b": [2, 1], "a": ["y", "x"]})
    assert pts == [{"a": "x", "b": 1}, {"a": "x", "b": 2}, {"a": "y", "b": 1}, {"a": "y", "b": 2}]
    with pytest.raises(ConfigError):
        grid_points({"a": list(range(9)), "b": list(range(8))}, cap=64)
    with pytest.raises(ConfigError):
        grid_points({"a": []})


def test_combined_exit_codes():
    assert combine_exit_codes([0, 0]) == 0
    assert combine_exit_codes([0, 3]) == 3
    assert combine_exit_codes([3, 1, 0]) == 1
    assert combine_exit_codes([1, 4, 3]) == 4


def test_eps_sweep_has_three_rows(tmp_path):
    path, rows, code = sweep(small_v_sequence(), {"experiment.eps": [0.75, 0.25, 0.5]}, ladder=False,
                             output_dir=tmp_path)
    assert len(rows) == 3
    with open(path) as fh:
        table = list(csv.DictReader(fh))
    assert [float(r["param.experiment.eps"]) for r in table] == [0.25, 0.5, 0.75]
    assert code in (0, 1)


def test_one_point_sweep_matches_run(tmp_path):
    tpl = small_v_sequence()
    _, rows, code = sweep(tpl, {"experiment.eps": [0.5]}, output_dir=tmp_path / "s")
    tpl["experiment"]["eps"] = 0.5
    tpl["output_dir"] = str(tmp_path / "r")
    rep = run(rc.build_config(tpl))
    assert rows[0]["experiment_id"] == rep.experiment_id
    assert rows[0]["verdict"] == rep.verdict and code == rep.exit_code
    a = (tmp_path / "s" / rep.experiment_id / "series.csv").read_bytes()
    b = (tmp_path / "r" / rep.experiment_id / "series.csv").read_bytes()
    assert a == b


def test_parallel_sweep_is_byte_identical(tmp_path):
    grid = {"experiment.eps": [0.25, 0.5]}
    p1, _, _ = sweep(small_v_sequence(), grid, workers=1, ladder=False, output_dir=tmp_path / "one")
    p2, _, _ = sweep(small_v_sequence(), grid, workers=2, ladder=False, output_dir=tmp_path / "two")
    assert p1.name == p2.name
    assert p1.read_bytes() == p2.read_bytes()


def test_n_list_sweep_is_monotone(tmp_path):
    tpl = {"experiment": {"kind": "ns_uniqueness", "nu": 0.5},
           "domain": {"dims": 3, "K": 4}, "time": {"horizon": 0.2, "steps": 10}, "seeds": [1]}
    _, rows, code = sweep(tpl, {"experiment.n_list": [[3], [1], [2]]}, ladder=False, output_dir=tmp_path)
    d = [r["summary.D_last"] for r in rows]
    assert len(d) == 3
    assert all(a >= b for a, b in zip(d, d[1:]))


def test_sweep_cli_cap(tmp_path, capsys):
    tpl = write(tmp_path, "tpl.json", small_v_sequence())
    grid = write(tmp_path, "grid.json", {"experiment.eps": [0.1, 0.2, 0.3]})
    assert main(["sweep", str(tpl), "--grid", str(grid), "--cap", "2", "--output-dir", str(tmp_path)]) == 3
    assert "above the cap" in capsys.readouterr().err


def test_invalid_sweep_point_is_a_row(tmp_path):
    _, rows, code = sweep(small_v_sequence(), {"experiment.eps": [0.5, 1.5]}, ladder=False, output_dir=tmp_path)
    assert [r["verdict"] for r in rows][1] == "PRECONDITION_REJECTED"
    assert code == 3
