"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

The golden configurations in ``configs/`` are run once through the report
layer and reused across tests; the determinism test runs them a second time.
Run directly with ``python3 tests/test_acceptance.py`` or through pytest;
either way the PASS/FAIL lines appear in the terminal summary.
"""
from pathlib import Path
from time import perf_counter

import numpy as np
import pytest

from pclab import BoxDomain, SourceSpec, TimeGrid, basis_field, heat_evolve
from pclab.claims import proportionality_series, vtilde_step
from pclab.claims.beta import BetaProfile
from pclab.claims.vsequence import INEQ_WINDOW, VSequenceProblem, _w_nodal, initial_state, w_family
from pclab.errors import FeasibilityError
from pclab.ns import PeriodicBox, random_field, trilinear_b
from pclab.reports import config as rc
from pclab.reports.run import run

import oracles

CONFIGS = Path(__file__).resolve().parents[1] / "configs"
GOLDEN_NAMES = sorted(p.stem for p in CONFIGS.glob("*.json"))

LINES: list = []


def record(label: str, ok: bool, detail: str, elapsed: float):
    LINES.append(f"{'PASS' if ok else 'FAIL'}  {label}: {detail} [{elapsed:.1f} s]")
    assert ok, f"{label}: {detail}"


class Golden:
    """Lazily run each golden config once and keep the report and its directory."""

    def __init__(self, base: Path):
        self.base = base
        self.cache = {}

    def __call__(self, name: str, round_: str = "first"):
        key = (name, round_)
        if key not in self.cache:
            cfg = rc.load_config(CONFIGS / f"{name}.json", self.base / round_)
            t0 = perf_counter()
            rep = run(cfg)
            self.cache[key] = (rep, self.base / round_ / rep.experiment_id, perf_counter() - t0)
        return self.cache[key]


@pytest.fixture(scope="module")
def golden(tmp_path_factory):
    return Golden(tmp_path_factory.mktemp("golden"))


def checks(rep) -> dict:
    return {c["name"]: c for c in rep.checks}


def read_column(path: Path, column: str) -> np.ndarray:
    with open(path) as fh:
        header = fh.readline().strip().split(",")
        j = header.index(column)
        return np.array([float(line.split(",")[j]) for line in fh if line.strip()])


def test_heat_propagator_exact():
    t0 = perf_counter()
    dom = BoxDomain(1, np.pi, 255)
    worst = 0.0
    for k in range(1, 9):
        y0 = basis_field(dom, k, mode_cap=8)
        for t in np.linspace(0.0, 2.0, 21):
            worst = max(worst, abs(heat_evolve(y0, t).coeffs[k - 1] - np.exp(-k * k * t)))
    elapsed = perf_counter() - t0
    record("heat propagator", worst <= 1e-12 and elapsed < 1.0,
           f"max |c_k(t) - exp(-k^2 t)| = {worst:.2e} (<= 1e-12), k <= 8, t <= 2", elapsed)


def test_crank_nicolson_order(golden):
    rep, _, elapsed = golden("parabolic_cn")
    c = checks(rep)
    orders = [c["observed_order_64_128"]["value"], c["observed_order_128_256"]["value"]]
    ok = rep.verdict == "PASS" and all(abs(o - 2.0) <= 0.2 for o in orders) and elapsed < 10
    record("Crank-Nicolson order", ok, f"orders {orders[0]:.4f}, {orders[1]:.4f} (2.0 +- 0.2)", elapsed)


def test_final_time_max_principle_suite(golden):
    r1, _, e1 = golden("max_principle_1d")
    r2, _, e2 = golden("max_principle_2d")
    parts, ok = [], True
    for rep, n in ((r1, 100), (r2, 20)):
        c = checks(rep)
        worst = c["max_normalized_z_T"]["value"]
        fine = {x["name"]: x for x in rep.ladder["fine_checks"]}["max_normalized_z_T"]["value"]
        ok &= (rep.verdict == "PASS" and c["configurations"]["value"] == n and worst <= 1e-8
               and fine <= 1e-8 and rep.ladder["agree"])
        parts.append(f"{n} configs max z(T)/scale {worst:.2e} (2x: {fine:.2e})")
    record("final-time max principle", ok and e1 + e2 < 300, "; ".join(parts), e1 + e2)


def test_l4_comparison(golden):
    rep, _, elapsed = golden("l4_random")
    c = checks(rep)
    pw, nm = c["pointwise_margin"]["value"], c["norm_margin"]["value"]
    ok = rep.verdict == "PASS" and pw >= -1e-6 and nm >= -1e-6 and elapsed < 120
    record("L4 comparison", ok, f"100 draws, margins {pw:.2e}, {nm:.2e} (>= -1e-6 scale)", elapsed)


def test_linearity_identity(golden):
    t0 = perf_counter()
    vals = {}
    for name in ("decomposition_banded", "decomposition_sin", "mollification_inverse"):
        rep, _, _ = golden(name)
        vals[name] = checks(rep)["linearity_residual"]["value"]
    worst = max(vals.values())
    record("linearity identity", worst < 1e-10, f"max relative residual {worst:.2e} over {len(vals)} configs",
           perf_counter() - t0)


def test_lambda_lower_bound(golden):
    t0 = perf_counter()
    mins = []
    for name in ("decomposition_banded", "decomposition_sin"):
        rep, d, _ = golden(name)
        mins.append(checks(rep)["lambda_min"]["value"])
        for col in ("lambda1", "lambda2"):
            mins.append(float(np.nanmin(read_column(d / "series.csv", col))))
    worst = min(mins)
    record("lambda lower bound", worst >= 1 - 1e-10, f"min lambda_i = {worst:.12f}", perf_counter() - t0)


def test_proportionality_oracle(golden):
    rep, d, elapsed = golden("proportionality_u1")
    r1 = rep.summary["r_T"]
    recorded = read_column(d / "series.csv", "r")
    dom = BoxDomain(1, np.pi, 255)
    single = proportionality_series(basis_field(dom, 1, mode_cap=64), SourceSpec.eigenmode(1, 0.7),
                                    TimeGrid(2.0, 32), check_bounds=False).residual.max()
    ok = (abs(r1 - oracles.R1_U1_SIN) <= 1e-6 and single <= 1e-12 and recorded[-1] == r1 and r1 > 0
          and rep.verdict == "REPORT_ONLY")
    record("proportionality oracle", ok,
           f"r(1) = {r1:.12f} vs oracle {oracles.R1_U1_SIN:.12f}; single mode r <= {single:.1e}; "
           f"mixed-mode r recorded", elapsed)


def test_v_sequence_diagnostics(golden):
    rep, _, elapsed = golden("v_sequence_golden")
    c = checks(rep)
    # a named rejection: constant beta leaves no room on the window
    dom = BoxDomain(1, np.pi, 63)
    p = VSequenceProblem(basis_field(dom, 1, mode_cap=63), SourceSpec.constant(1.0, bounds=(1.0, 1.0)),
                         TimeGrid(64.0, 200), omega=((np.pi / 4, 3 * np.pi / 4),), eps=0.5)
    s = initial_state(p)
    _, w = next(iter(w_family(p)))
    try:
        vtilde_step(p, s, BetaProfile.constant(1.0, p.grid.horizon), w, _w_nodal(p, w))
        named = None
    except FeasibilityError as exc:
        named = exc.inequality
    ok = (rep.verdict == "PASS" and c["accepted_steps"]["value"] == 10
          and c["monotonicity_violation"]["value"] <= 1e-10 and c["pinned_on_window"]["passed"]
          and c["max_sign_diagnostic"]["value"] <= 1e-6 and named == INEQ_WINDOW)
    record("v-sequence diagnostics", ok,
           f"{int(c['accepted_steps']['value'])} steps, violation {c['monotonicity_violation']['value']:.1e}, "
           f"pinned, max s_k {c['max_sign_diagnostic']['value']:.2e}, rejection names '{named}'", elapsed)


def test_ns_identities(golden):
    t0 = perf_counter()
    worst = 0.0
    for box in (PeriodicBox(2, 4), PeriodicBox(3, 4)):
        for seed in range(1000):
            u, v = random_field(box, 3 * seed), random_field(box, 3 * seed + 1)
            worst = max(worst, abs(trilinear_b(u, v, v)) / (u.l2_norm() * v.grad_norm() ** 2))
    energy = checks(golden("ns_energy_3d")[0])["energy_balance_relative"]["value"]
    tg = checks(golden("ns_taylor_green")[0])["taylor_green_error"]["value"]
    order = checks(golden("ns_rk4_order")[0])["rk4_observed_order"]["value"]
    ok = worst <= 1e-10 and energy <= 1e-6 and tg < 1e-8 and abs(order - 4.0) <= 0.3
    record("NS identities", ok,
           f"|b(u,v,v)| ratio {worst:.1e} over 2 x 1000 triples; energy {energy:.1e}; "
           f"Taylor-Green {tg:.1e}; RK4 order {order:.3f}", perf_counter() - t0)


def test_gronwall_experiment(golden):
    rep, _, elapsed = golden("ns_uniqueness")
    D = rep.summary["D"]
    C = rep.summary["C"]
    lad = rep.ladder
    d123 = [D["1"], D["2"], D["3"]]
    ok = (rep.verdict == "PASS" and d123[0] > d123[1] > d123[2] and D["4"] <= 1e-10
          and all(np.isfinite(C[n]) for n in ("1", "2", "3"))
          and lad["agree"] and max(lad["diffs"].values()) <= 1e-4 and elapsed < 600)
    record("Gronwall experiment", ok,
           f"D = {', '.join(f'{x:.4f}' for x in d123)}, D_K = {D['4']:.1e}; "
           f"C = {', '.join(f'{C[n]:.3f}' for n in ('1', '2', '3'))}; ladder diff {max(lad['diffs'].values()):.1e}",
           elapsed)


def test_determinism(golden):
    t0 = perf_counter()
    differ, count = [], 0
    for name in GOLDEN_NAMES:
        _, d1, _ = golden(name)
        _, d2, _ = golden(name, "second")
        csvs = sorted(p.name for p in d1.glob("*.csv"))
        if csvs != sorted(p.name for p in d2.glob("*.csv")):
            differ.append(name)
            continue
        for f in csvs:
            count += 1
            if (d1 / f).read_bytes() != (d2 / f).read_bytes():
                differ.append(f"{name}/{f}")
    record("determinism", not differ,
           f"{count} CSVs across {len(GOLDEN_NAMES)} configs" + (f"; differ: {differ}" if differ else " identical"),
           perf_counter() - t0)


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q"]))
