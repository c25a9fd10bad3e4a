"""
Configs, reports and sweeps
===========================

Every experiment can be described by a JSON config.  Running it writes
``report.json``, ``series.csv`` and any ``plot_*.csv`` files under
``<output_dir>/<kind>-<digest>``.  The same is available on the command
line as ``pclab run``, ``pclab sweep``, ``pclab validate`` and
``pclab list-experiments``.
"""
import tempfile
from pathlib import Path

from pclab.reports import config as rc
from pclab.reports.run import run, sweep

out = Path(tempfile.mkdtemp())
cfg = rc.build_config({"experiment": {"kind": "heat", "initial": {"modes": [[1, 1.0], [4, 0.5]]}},
                       "time": {"horizon": 1.0, "steps": 10}, "output_dir": str(out)})
print("experiment id:", cfg.experiment_id)
rep = run(cfg)
print(rep.verdict, rep.exit_code, [(c["name"], c["value"]) for c in rep.checks])
print(sorted(p.name for p in (out / cfg.experiment_id).iterdir()))

# A sweep varies dotted keys over a lexicographic grid and collects one row per point.
template = {"experiment": {"kind": "proportionality", "initial": {"modes": [[1, 1.0]]}},
            "time": {"horizon": 1.0, "steps": 16},
            "source": {"kind": "constant", "value": 1.0, "bounds": {"c": 1.0, "M": 1.0}}}
path, rows, code = sweep(template, {"time.horizon": [0.5, 1.0, 2.0]}, ladder=False, output_dir=out)
for r in rows:
    print(r["param.time.horizon"], r["verdict"], r["summary.r_T"])
print("summary table:", path.name, "combined exit code", code)
