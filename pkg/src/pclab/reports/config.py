"""Experiment configuration files: parsing, defaults, validation and digests.

A config is a JSON object with top-level keys ``experiment``, ``domain``,
``time``, ``source``, ``tolerances``, ``seeds`` and ``output_dir``.
``experiment`` is either a kind name or an object with a ``kind`` entry plus
kind-specific parameters.  Validation collects every problem before
failing.
"""

from __future__ import annotations

import copy
import hashlib
import json
import math
from dataclasses import dataclass
from pathlib import Path

from ..errors import ConfigError

EXPERIMENTS = (
    "heat", "parabolic", "max_principle", "proportionality", "decomposition", "l4",
    "v_sequence", "mollification", "ns_energy", "ns_uniqueness", "ladyzhenskaya",
)
NS_KINDS = ("ns_energy", "ns_uniqueness", "ladyzhenskaya")
TOP_KEYS = ("experiment", "domain", "time", "source", "tolerances", "seeds", "output_dir")
SOURCE_KINDS = ("zero", "constant", "eigenmode", "banded_random", "inverse_power", "random")

DESCRIPTIONS = {
    "heat": "spectral heat propagator against the closed-form modal decay",
    "parabolic": "Crank-Nicolson against the exponential integrator, observed order",
    "max_principle": "final-time sign of z for weights whose maximum sits at T",
    "proportionality": "residual of y(t) parallel to the heat flow phi(t) (reported)",
    "decomposition": "y = y1 - y2 splitting with multipliers lambda_i(t)",
    "l4": "phi^2 <= Psi pointwise and ||phi||_4^4 <= |Psi|^2",
    "v_sequence": "finite run of the monotone source iteration v_k",
    "mollification": "decomposition under mode truncation of a rough source",
    "ns_energy": "Galerkin Navier-Stokes energy balance, incompressibility, Taylor-Green",
    "ns_uniqueness": "distance between runs from full and truncated initial data",
    "ladyzhenskaya": "ratio ||v||_4 / (sqrt 2 |v|^1/4 ||grad v||^3/4) (reported)",
}

TOLERANCES = {
    "heat": {"closed_form": 1e-12},
    "parabolic": {"order_target": 2.0, "order_band": 0.2},
    "max_principle": {"sign": 1e-8},
    "proportionality": {"ladder": 1e-6},
    "decomposition": {"linearity": 1e-10, "lambda": 1e-10},
    "l4": {"margin": 1e-6},
    "v_sequence": {"monotone": 1e-10, "sign": 1e-6, "ladder": 1e-4},
    "mollification": {"linearity": 1e-10},
    "ns_energy": {"energy": 1e-6, "divergence": 1e-10, "taylor_green": 1e-8,
                  "order_target": 4.0, "order_band": 0.3},
    "ns_uniqueness": {"exact": 1e-10, "ladder": 1e-4},
    "ladyzhenskaya": {"ladder": 1e-6},
}

EXPERIMENT_DEFAULTS = {
    "heat": {"initial": {"modes": [[1, 1.0]]}},
    "parabolic": {"initial": {"modes": [[1, 1.0]]}},
    "max_principle": {"suite": True, "beta": None, "w": None, "z0": None},
    "proportionality": {"initial": {"modes": [[1, 1.0]]}, "oracle": None, "check_bounds": True},
    "decomposition": {"initial": {"modes": [[1, 1.0]]}, "c": 1.0},
    "l4": {"initial": None},
    "v_sequence": {"initial": {"modes": [[1, 1.0]]}, "eps": 0.5, "iterations": 10, "omega": None,
                   "window": None, "v1_mode": "window"},
    "mollification": {"initial": {"modes": [[1, 1.0]]}, "levels": [8, 16, 32], "c": 1.0},
    "ns_energy": {"nu": 0.1, "initial": {"kind": "random", "energy": 1.0, "slope": 1.0}, "order_check": False},
    "ns_uniqueness": {"nu": 0.5, "n_list": [1, 2, 3], "initial": {"kind": "random", "energy": 1.0, "slope": 1.0}},
    "ladyzhenskaya": {"single_mode": True},
}

EXIT_OK, EXIT_FAIL, EXIT_PARSE, EXIT_INVALID, EXIT_DIVERGED = 0, 1, 2, 3, 4


@dataclass(frozen=True)
class ExperimentConfig:
    """Validated configuration with every default filled in."""

    data: dict

    @property
    def kind(self) -> str:
        return self.data["experiment"]["kind"]

    @property
    def digest(self) -> str:
        return config_digest(self.data)

    @property
    def experiment_id(self) -> str:
        return f"{self.kind}-{self.digest[:12]}"

    @property
    def output_dir(self) -> Path:
        return Path(self.data["output_dir"])

    @property
    def seeds(self) -> list:
        s = self.data["seeds"]
        if isinstance(s, dict):
            return list(range(int(s["start"]), int(s["start"]) + int(s["count"])))
        return [int(x) for x in s]

    def section(self, name: str) -> dict:
        return self.data[name]

    def tol(self, name: str) -> float:
        return float(self.data["tolerances"][name])

    def echo(self) -> str:
        return json.dumps(self.data, indent=2, sort_keys=True)


def canonical_json(data: dict) -> str:
    return json.dumps(data, sort_keys=True, separators=(",", ":"), allow_nan=False)


def config_digest(data: dict) -> str:
    """SHA-256 of the canonical JSON, ignoring ``output_dir`` (where results go is not what is computed)."""
    body = {k: v for k, v in data.items() if k != "output_dir"}
    return hashlib.sha256(canonical_json(body).encode()).hexdigest()


def parse_config(path) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}", exit_code=EXIT_PARSE) from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc.msg} at line {exc.lineno})", exit_code=EXIT_PARSE) from exc
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be a JSON object", exit_code=EXIT_PARSE)
    return data


def load_config(path, output_dir=None) -> ExperimentConfig:
    """Parse, fill defaults and validate; ``output_dir`` overrides the file's value."""
    data = parse_config(path)
    if output_dir is not None:
        data["output_dir"] = str(output_dir)
    return build_config(data)


def build_config(raw: dict) -> ExperimentConfig:
    data = fill_defaults(raw)
    problems = validate(data)
    if problems:
        raise ConfigError(problems, exit_code=EXIT_INVALID)
    return ExperimentConfig(data)


def _merge(defaults: dict, given: dict) -> dict:
    out = copy.deepcopy(defaults)
    for k, v in given.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = _merge(out[k], v)
        else:
            out[k] = copy.deepcopy(v)
    return out


def fill_defaults(raw: dict) -> dict:
    """Defaults for every section; unknown kinds are left for :func:`validate` to report."""
    data = copy.deepcopy(raw)
    exp = data.get("experiment")
    if isinstance(exp, str):
        exp = {"kind": exp}
    if not isinstance(exp, dict):
        exp = {"kind": None}
    kind = exp.get("kind")
    data["experiment"] = _merge(EXPERIMENT_DEFAULTS.get(kind, {}), exp)
    if kind in NS_KINDS:
        dom_default = {"dims": 2 if kind == "ns_energy" else 3, "K": 4, "points": None}
        time_default = {"horizon": 1.0, "steps": 200}
        src_default = {"kind": "zero"}
    else:
        dom_default = {"dims": 1, "lengths": math.pi, "grid_points": 64, "mode_cap": None}
        time_default = {"horizon": 1.0, "steps": 64}
        src_default = {"kind": "constant", "value": 1.0, "bounds": {"c": 1.0, "M": 1.0}}
    for key, default in (("domain", dom_default), ("time", time_default)):
        given = data.get(key, {})
        data[key] = _merge(default, given) if isinstance(given, dict) else given
    if "source" not in data:
        data["source"] = src_default
    tol = TOLERANCES.get(kind, {})
    given = data.get("tolerances", {})
    data["tolerances"] = _merge(tol, given) if isinstance(given, dict) else given
    data.setdefault("seeds", [0])
    data.setdefault("output_dir", "pclab-out")
    return data


def _positive(x) -> bool:
    return isinstance(x, (int, float)) and not isinstance(x, bool) and math.isfinite(x) and x > 0


def _int_at_least(x, lo) -> bool:
    return isinstance(x, int) and not isinstance(x, bool) and x >= lo


def _validate_modes(spec, dims, where, problems):
    if spec is None:
        return
    if not isinstance(spec, dict) or not (("modes" in spec) ^ ("random_modes" in spec)):
        problems.append(f"{where} must be an object with exactly one of 'modes' or 'random_modes'")
        return
    if "modes" in spec:
        modes = spec["modes"]
        if not isinstance(modes, list) or not modes:
            problems.append(f"{where}.modes must be a non-empty list")
            return
        for i, m in enumerate(modes):
            ok = isinstance(m, list) and len(m) == dims + 1 and all(_int_at_least(k, 1) for k in m[:-1]) \
                and isinstance(m[-1], (int, float)) and math.isfinite(m[-1])
            if not ok:
                problems.append(f"{where}.modes[{i}] must be [k_1, ..., k_{dims}, amplitude] with k_i >= 1")
    elif not _int_at_least(spec["random_modes"], 1):
        problems.append(f"{where}.random_modes must be an integer >= 1")


def _validate_source(src, kind, dims, requires_bounds, problems):
    if not isinstance(src, dict) or src.get("kind") not in SOURCE_KINDS:
        problems.append(f"source.kind must be one of {', '.join(SOURCE_KINDS)}")
        return
    sk = src["kind"]
    if kind in NS_KINDS:
        if sk not in ("zero", "random"):
            problems.append("source.kind for Navier-Stokes runs must be 'zero' or 'random'")
        if sk == "random" and not isinstance(src.get("amplitude", 1.0), (int, float)):
            problems.append("source.amplitude must be a number")
        return
    if sk == "random":
        problems.append("source.kind 'random' is only for Navier-Stokes forcing")
    if sk in ("constant",) and not isinstance(src.get("value"), (int, float)):
        problems.append("source.value must be a number")
    if sk == "eigenmode":
        k = src.get("k", 1)
        ks = k if isinstance(k, list) else [k]
        if not all(_int_at_least(x, 1) for x in ks) or len(ks) not in (1, dims):
            problems.append("source.k must be an integer >= 1 or one per axis")
    if sk == "banded_random" and not _int_at_least(src.get("modes", 4), 1):
        problems.append("source.modes must be an integer >= 1")
    if sk == "inverse_power":
        if not _int_at_least(src.get("modes"), 1):
            problems.append("source.modes must be an integer >= 1")
        if not isinstance(src.get("power", 1.0), (int, float)):
            problems.append("source.power must be a number")
    bounds = src.get("bounds")
    if bounds is None:
        if requires_bounds or sk == "banded_random":
            problems.append("bounds.c must be > 0")
        return
    if not isinstance(bounds, dict):
        problems.append("source.bounds must be an object {c, M}")
        return
    c, M = bounds.get("c"), bounds.get("M")
    if not _positive(c):
        problems.append("bounds.c must be > 0")
    if not isinstance(M, (int, float)) or (isinstance(c, (int, float)) and M < c):
        problems.append("bounds.M must be >= bounds.c")


def validate(data: dict) -> list:
    """Every violated constraint as a human-readable string (empty when valid)."""
    problems = []
    unknown = sorted(set(data) - set(TOP_KEYS))
    if unknown:
        problems.append(f"unknown top-level keys: {', '.join(unknown)}")
    exp = data["experiment"]
    kind = exp.get("kind")
    if kind not in EXPERIMENTS:
        problems.append(f"experiment.kind must be one of {', '.join(EXPERIMENTS)}; got {kind!r}")
        return problems
    dom = data["domain"]
    tm = data["time"]
    if not isinstance(dom, dict):
        problems.append("domain must be an object")
        dom = {}
    if not isinstance(tm, dict):
        problems.append("time must be an object")
        tm = {}
    if not _positive(tm.get("horizon")):
        problems.append("time.horizon must be > 0")
    if not _int_at_least(tm.get("steps"), 1):
        problems.append("time.steps must be an integer >= 1")
    dims = dom.get("dims")
    if kind in NS_KINDS:
        allowed = (3,) if kind in ("ns_uniqueness", "ladyzhenskaya") else (2, 3)
        if dims not in allowed:
            problems.append(f"domain.dims must be one of {allowed} for {kind}")
            dims = allowed[0]
        if not _int_at_least(dom.get("K"), 1):
            problems.append("domain.K must be an integer >= 1")
        pts = dom.get("points")
        if pts is not None and not _int_at_least(pts, 1):
            problems.append("domain.points must be null or a positive integer")
    else:
        if dims not in (1, 2, 3):
            problems.append("domain.dims must be 1, 2 or 3")
            dims = 1
        lengths = dom.get("lengths")
        ls = lengths if isinstance(lengths, list) else [lengths]
        if not all(_positive(x) for x in ls) or len(ls) not in (1, dims):
            problems.append("domain.lengths must be > 0 (one number or one per axis)")
        gp = dom.get("grid_points")
        gps = gp if isinstance(gp, list) else [gp]
        if not all(_int_at_least(x, 4) for x in gps) or len(gps) not in (1, dims):
            problems.append("domain.grid_points must be integers >= 4")
        cap = dom.get("mode_cap")
        if cap is not None:
            caps = cap if isinstance(cap, list) else [cap]
            if not all(_int_at_least(x, 1) for x in caps) or len(caps) not in (1, dims):
                problems.append("domain.mode_cap must be null or positive integers")
            elif all(_int_at_least(x, 4) for x in gps) and max(caps) > min(gps):
                problems.append("domain.mode_cap must not exceed domain.grid_points")
    requires = kind == "v_sequence" or (kind == "proportionality" and exp.get("check_bounds", True))
    _validate_source(data["source"], kind, dims, requires, problems)
    tol = data["tolerances"]
    if not isinstance(tol, dict) or not all(isinstance(v, (int, float)) and math.isfinite(v) for v in tol.values()):
        problems.append("tolerances must map names to finite numbers")
    seeds = data["seeds"]
    if isinstance(seeds, dict):
        if not (_int_at_least(seeds.get("start"), 0) and _int_at_least(seeds.get("count"), 1)):
            problems.append("seeds must be a list of integers or {start >= 0, count >= 1}")
    elif not (isinstance(seeds, list) and seeds and all(_int_at_least(s, 0) for s in seeds)):
        problems.append("seeds must be a list of integers or {start >= 0, count >= 1}")
    if not isinstance(data["output_dir"], str) or not data["output_dir"]:
        problems.append("output_dir must be a non-empty string")
    _validate_experiment(exp, kind, dims, data, problems)
    return problems


def _validate_experiment(exp, kind, dims, data, problems):
    if kind in ("heat", "parabolic", "proportionality", "decomposition", "v_sequence", "mollification", "l4"):
        _validate_modes(exp.get("initial"), dims, "experiment.initial", problems)
    if kind == "decomposition" or kind == "mollification":
        if not _positive(exp.get("c")):
            problems.append("experiment.c must be > 0")
    if kind == "mollification":
        lv = exp.get("levels")
        if not (isinstance(lv, list) and len(lv) >= 2 and all(_int_at_least(x, 1) for x in lv) and lv == sorted(set(lv))):
            problems.append("experiment.levels must be a strictly ascending list of at least two positive integers")
        if data["source"].get("kind") != "inverse_power":
            problems.append("mollification needs source.kind = 'inverse_power'")
    if kind == "v_sequence":
        eps = exp.get("eps")
        if not (isinstance(eps, (int, float)) and 0 < eps < 1):
            problems.append("experiment.eps must lie in (0, 1)")
        if not _int_at_least(exp.get("iterations"), 0):
            problems.append("experiment.iterations must be an integer >= 0")
        if exp.get("v1_mode") not in ("window", "everywhere"):
            problems.append("experiment.v1_mode must be 'window' or 'everywhere'")
        w = exp.get("window")
        if w is not None and not (isinstance(w, list) and len(w) == 2 and 0 < w[0] < w[1] < data["time"].get("horizon", 0)):
            problems.append("experiment.window must be [a, b] with 0 < a < b < T")
        om = exp.get("omega")
        if om is not None and not (isinstance(om, list) and len(om) == dims):
            problems.append("experiment.omega must hold one [lo, hi] interval per axis")
    if kind == "max_principle" and not exp.get("suite"):
        beta = exp.get("beta")
        if not (isinstance(beta, dict) and isinstance(beta.get("times"), list) and isinstance(beta.get("values"), list)
                and len(beta["times"]) == len(beta["values"]) >= 2):
            problems.append("experiment.beta must give equally long 'times' and 'values' lists")
        w = exp.get("w") or {}
        if not isinstance(w, dict):
            problems.append("experiment.w must be an object")
        _validate_modes(exp.get("z0") or {"modes": [[1] * dims + [0.0]]}, dims, "experiment.z0", problems)
    if kind in ("ns_energy", "ns_uniqueness"):
        if not _positive(exp.get("nu")):
            problems.append("experiment.nu must be > 0")
        init = exp.get("initial")
        if not isinstance(init, dict) or init.get("kind") not in ("random", "taylor_green", "perturbed_taylor_green"):
            problems.append("experiment.initial.kind must be 'random', 'taylor_green' or 'perturbed_taylor_green'")
        elif init["kind"] != "random" and data["domain"].get("dims") != 2:
            problems.append("Taylor-Green initial data needs domain.dims = 2")
    if kind == "ns_uniqueness":
        nl = exp.get("n_list")
        K = data["domain"].get("K")
        if not (isinstance(nl, list) and nl and all(_int_at_least(n, 1) for n in nl) and nl == sorted(set(nl))):
            problems.append("experiment.n_list must be a strictly ascending list of integers >= 1")
        elif isinstance(K, int) and nl[-1] > K:
            problems.append("experiment.n_list entries must not exceed domain.K")
