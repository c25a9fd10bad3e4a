"""Run orchestration: verdicts, the resolution ladder, artifact files and sweeps."""

from __future__ import annotations

import copy
import csv
import io
import itertools
import json
import math
import os
import tempfile
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from ..errors import ConfigError, DivergenceError, InputError, PreconditionError
from .config import (
    EXIT_DIVERGED,
    EXIT_FAIL,
    EXIT_INVALID,
    EXIT_OK,
    ExperimentConfig,
    build_config,
    canonical_json,
    config_digest,
)
from .runners import REPORT_ONLY_KINDS, RUNNERS, Outcome

PASS, FAIL, REPORT_ONLY, REJECTED = "PASS", "FAIL", "REPORT_ONLY", "PRECONDITION_REJECTED"
LADDER_FACTOR = 2
SWEEP_CAP = 64


# ------------------------------------------------------------------ formatting


def fmt(x) -> str:
    """Fixed CSV formatting: 17 significant digits for floats."""
    if x is None:
        return ""
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, int):
        return str(x)
    if isinstance(x, float):
        return f"{x:.17g}"
    if isinstance(x, (list, tuple, dict)):
        return json.dumps(x, sort_keys=True, separators=(",", ":"))
    if hasattr(x, "item"):
        return fmt(x.item())
    return str(x)


def csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([fmt(v) for v in r])
    return buf.getvalue()


def atomic_write(path: Path, text: str):
    """Write to a temporary file in the target directory, then rename over ``path``."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _json_safe(x):
    if isinstance(x, float):
        return x if math.isfinite(x) else None
    if isinstance(x, dict):
        return {str(k): _json_safe(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_json_safe(v) for v in x]
    if hasattr(x, "item"):
        return _json_safe(x.item())
    return x


# -------------------------------------------------------------------- reports


@dataclass
class ClaimReport:
    experiment_id: str
    kind: str
    digest: str
    verdict: str
    exit_code: int
    checks: list = field(default_factory=list)
    summary: dict = field(default_factory=dict)
    ladder: dict | None = None
    wall_time: float = 0.0
    error: str | None = None
    violated: str | None = None
    fail_reason: str | None = None    # "check", "ladder" or "divergence" when the verdict is FAIL
    files: list = field(default_factory=list)

    def as_dict(self) -> dict:
        return _json_safe({
            "experiment_id": self.experiment_id, "kind": self.kind, "config_digest": self.digest,
            "verdict": self.verdict, "exit_code": self.exit_code, "checks": self.checks, "summary": self.summary,
            "ladder": self.ladder, "wall_time_s": self.wall_time, "error": self.error,
            "violated_inequality": self.violated, "fail_reason": self.fail_reason, "files": self.files,
        })

    def flat(self) -> dict:
        """One-level mapping used for sweep rows."""
        out = {"experiment_id": self.experiment_id, "verdict": self.verdict, "exit_code": self.exit_code}
        for c in self.checks:
            out[f"check.{c['name']}"] = c["value"]
        for k, v in sorted(self.summary.items()):
            if isinstance(v, dict):
                for kk, vv in v.items():
                    out[f"summary.{k}.{kk}"] = vv
            else:
                out[f"summary.{k}"] = v
        if self.ladder:
            out["ladder.agree"] = self.ladder["agree"]
        return out


def compare_ladder(coarse: Outcome, fine: Outcome, tol: float | None) -> dict:
    diffs = {}
    for k, v in coarse.decisive.items():
        if k in fine.decisive:
            diffs[k] = abs(float(fine.decisive[k]) - float(v))
    within = True if tol is None else all(d <= tol for d in diffs.values())
    same_keys = set(coarse.decisive) == set(fine.decisive)
    return {"space_factor": LADDER_FACTOR, "time_factor": LADDER_FACTOR, "tolerance": tol, "diffs": diffs,
            "fine_decisive": dict(fine.decisive), "fine_checks": [c.as_dict() for c in fine.checks],
            "fine_asserted_pass": fine.asserted_pass, "same_quantities": same_keys,
            "agree": bool(within and same_keys and fine.asserted_pass)}


def verdict_for(kind: str, outcome: Outcome, ladder: dict | None) -> str:
    if not outcome.asserted or kind in REPORT_ONLY_KINDS:
        return REPORT_ONLY
    if not outcome.asserted_pass:
        return FAIL
    if ladder is not None and not ladder["agree"]:
        return FAIL
    return PASS


def execute(cfg: ExperimentConfig, ladder: bool = True) -> tuple:
    """Run one experiment; return ``(ClaimReport, Outcome | None)`` without writing files."""
    t0 = time.perf_counter()
    kind = cfg.kind
    rep = ClaimReport(cfg.experiment_id, kind, cfg.digest, FAIL, EXIT_FAIL)
    runner = RUNNERS[kind]
    try:
        out = runner(cfg, 1, 1)
        lad = None
        if ladder:
            tol = cfg.data["tolerances"].get("ladder")
            lad = compare_ladder(out, runner(cfg, LADDER_FACTOR, LADDER_FACTOR), tol)
        rep.verdict = verdict_for(kind, out, lad)
        rep.exit_code = EXIT_FAIL if rep.verdict == FAIL else EXIT_OK
        if rep.verdict == FAIL:
            rep.fail_reason = "check" if not out.asserted_pass else "ladder"
        rep.checks = [c.as_dict() for c in out.checks]
        rep.summary = dict(out.summary)
        rep.ladder = lad
    except PreconditionError as exc:
        out = None
        rep.verdict, rep.exit_code = REJECTED, EXIT_INVALID
        rep.error, rep.violated = str(exc), exc.inequality
    except (InputError, ValueError) as exc:
        out = None
        rep.verdict, rep.exit_code = REJECTED, EXIT_INVALID
        rep.error = str(exc)
    except DivergenceError as exc:
        out = None
        rep.verdict, rep.exit_code = FAIL, EXIT_DIVERGED
        rep.error = f"divergence: {exc}"
        rep.fail_reason = "divergence"
    rep.wall_time = time.perf_counter() - t0
    return rep, out


def write_artifacts(cfg: ExperimentConfig, rep: ClaimReport, out: Outcome | None) -> Path:
    """``report.json``, ``series.csv`` and ``plot_<name>.csv`` under ``output_dir/experiment_id``."""
    d = cfg.output_dir / cfg.experiment_id
    files = []
    if out is not None:
        for name, (header, rows) in out.series.items():
            fname = "series.csv" if name == "series" else f"plot_{name}.csv"
            atomic_write(d / fname, csv_text(header, rows))
            files.append(fname)
    atomic_write(d / "config.json", cfg.echo() + "\n")
    files.append("config.json")
    rep.files = files + ["report.json"]
    atomic_write(d / "report.json", json.dumps(rep.as_dict(), indent=2, sort_keys=True, allow_nan=False) + "\n")
    return d


def run(cfg: ExperimentConfig, ladder: bool = True) -> ClaimReport:
    rep, out = execute(cfg, ladder)
    write_artifacts(cfg, rep, out)
    return rep


# ---------------------------------------------------------------------- sweeps


def _set_path(data: dict, dotted: str, value):
    keys = dotted.split(".")
    node = data
    for k in keys[:-1]:
        if isinstance(node.get(k), str) and k == "experiment":
            node[k] = {"kind": node[k]}
        node = node.setdefault(k, {})
    node[keys[-1]] = copy.deepcopy(value)


def _sort_values(values: list) -> list:
    try:
        return sorted(values)
    except TypeError:
        return sorted(values, key=canonical_json)


def grid_points(grid: dict, cap: int = SWEEP_CAP) -> list:
    """Cartesian product in lexicographic parameter order (keys sorted, values sorted)."""
    if not isinstance(grid, dict) or not grid:
        raise ConfigError("sweep grid must be a non-empty object mapping dotted keys to value lists")
    problems = [f"grid entry {k!r} must be a non-empty list" for k, v in grid.items()
                if not isinstance(v, list) or not v]
    if problems:
        raise ConfigError(problems)
    keys = sorted(grid)
    total = math.prod(len(grid[k]) for k in keys)
    if total > cap:
        raise ConfigError(f"sweep has {total} points, above the cap of {cap}")
    axes = [_sort_values(grid[k]) for k in keys]
    return [dict(zip(keys, combo)) for combo in itertools.product(*axes)]


def _sweep_point(args) -> tuple:
    data, ladder = args
    try:
        cfg = build_config(data)
    except ConfigError as exc:
        return {"verdict": REJECTED, "exit_code": exc.exit_code, "error": str(exc)}, exc.exit_code
    rep = run(cfg, ladder)
    row = rep.flat()
    if rep.error:
        row["error"] = rep.error
    return row, rep.exit_code


def combine_exit_codes(codes) -> int:
    codes = set(codes)
    for c in (EXIT_DIVERGED, EXIT_FAIL, EXIT_INVALID):
        if c in codes:
            return c
    return EXIT_OK


def sweep(template: dict, grid: dict, workers: int = 1, cap: int = SWEEP_CAP, ladder: bool = True,
          output_dir=None) -> tuple:
    """Run every grid point; write ``sweep-<digest>.csv``; return ``(path, rows, exit_code)``."""
    points = grid_points(grid, cap)
    base = copy.deepcopy(template)
    if output_dir is not None:
        base["output_dir"] = str(output_dir)
    jobs = []
    for p in points:
        data = copy.deepcopy(base)
        for k, v in p.items():
            _set_path(data, k, v)
        jobs.append((data, ladder))
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_sweep_point, jobs))
    else:
        results = [_sweep_point(j) for j in jobs]
    rows = []
    for p, (row, _) in zip(points, results):
        rows.append({**{f"param.{k}": v for k, v in p.items()}, **row})
    pcols = [f"param.{k}" for k in sorted(grid)]
    fixed = ["experiment_id", "verdict", "exit_code"]
    rest = sorted({k for r in rows for k in r} - set(pcols) - set(fixed))
    header = pcols + fixed + rest
    out_dir = Path(base.get("output_dir", "pclab-out"))
    tag = config_digest({"template": template, "grid": grid})[:12]
    path = out_dir / f"sweep-{tag}.csv"
    atomic_write(path, csv_text(header, [[r.get(c) for c in header] for r in rows]))
    return path, rows, combine_exit_codes(code for _, code in results)
