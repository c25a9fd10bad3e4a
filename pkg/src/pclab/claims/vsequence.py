"""Finite runs of the monotone source iteration ``v_1 <= v_2 <= ... <= u``.

Each step picks a weight ``beta_k`` and a supersolution ``w_k`` meeting two
derivative bounds, forms

    vt_k = (|Psi_k(T)| u + beta_k' w_k) / |y(T)|,      v_{k+1} = max(vt_k, v_k),

and records the sign diagnostic

    s_{k+1} = max_x ( |Psi_k(T)| y(T) - |y(T)| Psi_{k+1}(T) ),

where ``Psi_k`` solves the parabolic problem with source ``v_k`` and the
same initial datum as ``y``.  Only the finite iteration is computed; no limit
is taken.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import DegenerateInputError, FeasibilityError, InputError, PreconditionError
from ..evolution import SourceSpec, evolve_coefficients
from ..spectral import BoxDomain, SpectralField, TimeGrid, analyze, coefficient_norms, eigenvalues, synthesize
from .beta import BetaProfile, window_profile
from .maxprinciple import SupersolutionSpec
from .proportionality import parallel_residual

INEQ_GLOBAL = "beta' <= (|y(T)| - |Psi(T)|) c / sup w  on [0,T]"
INEQ_WINDOW = "beta' < -|Psi(T)| sup_{omega x I} u / inf_{omega x I} w  on I"
INEQ_INF_W = "inf_{omega x I} w > 0"
INEQ_NORM_GAP = "|y(T)| > |Psi(T)|"

MONOTONE_TOL = 1e-10
SIGN_TOL = 1e-6

# search ladders for the weight family
DROP_MARGINS = (1.0, 0.5, 0.25, 0.1, 0.03, 0.01, 0.003, 0.001)
TRANSITIONS = (0.02, 0.05, 0.1, 0.2, 0.4)
CLIMB_SHAVE = 1e-6


def _edge_weights(x: np.ndarray, lo: float, hi: float) -> np.ndarray:
    """1 inside ``(lo, hi)``, 1/2 on a node that sits on an edge, 0 outside."""
    tol = 1e-9 * max(abs(lo), abs(hi), 1.0)
    w = ((x > lo + tol) & (x < hi - tol)).astype(float)
    w[np.abs(x - lo) <= tol] = 0.5
    w[np.abs(x - hi) <= tol] = 0.5
    return w


@dataclass
class VSequenceProblem:
    """Fixed data of a run: domain, grid, ``y0``, ``u`` and the window ``omega x I``.

    Every source (``u`` and each ``v_k``) is sampled on the space-time grid
    and expanded with the same discrete sine transform, so ``v = u`` gives
    ``Psi = y`` exactly.
    """

    y0: SpectralField
    u: SourceSpec
    grid: TimeGrid
    omega: tuple = None
    window: tuple = None
    eps: float = 0.5

    def __post_init__(self):
        dom = self.y0.domain
        if not (0 < self.eps < 1):
            raise InputError(f"eps must lie in (0, 1), got {self.eps}")
        if self.u.bounds is None:
            raise PreconditionError("source must declare bounds (c, M) with c > 0", "bounds.c must be > 0")
        self.u.check_bounds(dom, self.grid)
        y0n = synthesize(self.y0.coeffs, dom)
        if y0n.min() < -1e-12 * max(1.0, float(np.abs(y0n).max())) or not np.any(y0n > 0):
            raise PreconditionError("y0 must be nonnegative and not identically zero", "y0 >= 0, y0 != 0")
        T = self.grid.horizon
        if self.omega is None:
            self.omega = tuple((0.25 * L, 0.75 * L) for L in dom.lengths)
        if self.window is None:
            self.window = (0.25 * T, 0.75 * T)
        self.omega = tuple(tuple(float(x) for x in ab) for ab in self.omega)
        self.window = tuple(float(x) for x in self.window)
        if len(self.omega) != dom.dims:
            raise InputError("omega needs one interval per axis")
        for (lo, hi), L in zip(self.omega, dom.lengths):
            if not (0 <= lo < hi <= L) or (lo == 0 and hi == L):
                raise InputError(f"omega interval ({lo}, {hi}) must be a proper subinterval of (0, {L})")
        a, b = self.window
        if not (0 < a < b < T):
            raise InputError(f"window I = ({a}, {b}) must satisfy 0 < a < b < T = {T}")

        self.domain = dom
        self.cap = self.y0.mode_cap
        self.lam = eigenvalues(dom, self.cap)
        self.c, self.M = self.u.bounds
        self.U = self.u.sample_series(dom, self.grid)
        t = self.grid.nodes
        space = np.ones(dom.grid_points, dtype=bool)
        for i, (lo, hi) in enumerate(self.omega):
            x = dom.axis_nodes(i)
            shape = [1] * dom.dims
            shape[i] = -1
            space = space & ((x > lo) & (x < hi)).reshape(shape)
        time = (t > a) & (t < b)
        self.mask = np.multiply.outer(time, space)
        # indicator of the closed window with weight 1/2 on edge nodes per axis
        wt = _edge_weights(t, a, b)
        for i, (lo, hi) in enumerate(self.omega):
            wt = np.multiply.outer(wt, _edge_weights(dom.axis_nodes(i), lo, hi))
        self.window_weight = wt
        self.closed_mask = wt > 0          # extrema over the closure of omega x I
        if not self.mask.any():
            raise InputError("omega x I contains no grid nodes; refine the grid")
        self.y = self.solve(self.U)
        self.yT = SpectralField(dom, self.y[-1])
        self.yT_norm = float(coefficient_norms(self.y[-1:], dom)[0])
        self.yT_nodal = synthesize(self.y[-1], dom)

    def solve(self, V: np.ndarray) -> np.ndarray:
        """Coefficient trajectory of ``Psi_t - Lap Psi = V``, ``Psi(0) = y0``."""
        src = analyze(V, self.domain, self.cap, lead=1)
        return evolve_coefficients(np.asarray(self.y0.coeffs), self.lam, src, self.grid)

    def initial_v(self, mode: str = "window") -> np.ndarray:
        """``v_1``: ``eps u`` on ``omega x I`` and 0 elsewhere, or ``eps u`` everywhere."""
        if mode == "window":
            return self.window_weight * self.eps * self.U
        if mode == "everywhere":
            return self.eps * self.U
        raise InputError(f"unknown v1 mode {mode!r}")

    def spacetime_norm(self, V: np.ndarray) -> float:
        """Discrete L2(Omega x (0, T)) norm (trapezoid in time)."""
        per_t = self.domain.cell_volume * np.sum(V**2, axis=tuple(range(1, V.ndim)))
        return float(np.sqrt(np.trapezoid(per_t, self.grid.nodes)))


@dataclass
class VSequenceState:
    k: int
    v: np.ndarray = field(repr=False)
    psi: np.ndarray = field(repr=False)            # coefficient trajectory of Psi_{v_k}
    psi_T_norm: float = 0.0
    sign: float = float("nan")                     # s_k (nan for the initial state)
    tilde_sign: float = float("nan")               # max z~(T), the max-principle step
    increment: float = float("nan")                # ||v_k - v_{k-1}|| in L2(Omega x (0,T))
    monotone_violation: float = 0.0                # max(v_{k-1} - v_k, -v_k, v_k - u)
    pinned: bool = True
    beta: dict = None
    w: dict = None

    @property
    def psi_T(self) -> np.ndarray:
        return self.psi[-1]


def initial_state(problem: VSequenceProblem, v1_mode: str = "window") -> VSequenceState:
    v = problem.initial_v(v1_mode)
    psi = problem.solve(v)
    st = VSequenceState(1, v, psi, float(coefficient_norms(psi[-1:], problem.domain)[0]))
    st.monotone_violation = float(max(0.0, np.max(-v), np.max(v - problem.U)))
    st.pinned = bool(np.array_equal(v[problem.mask], problem.eps * problem.U[problem.mask]))
    return st


def _w_nodal(problem: VSequenceProblem, w: SupersolutionSpec) -> np.ndarray:
    traj = w.trajectory(problem.grid, problem.cap)
    return synthesize(traj.coeffs, problem.domain, lead=1)


def feasibility_bounds(problem: VSequenceProblem, state: VSequenceState, W: np.ndarray):
    """``(A, B)``: ``beta'`` must stay ``<= A`` on ``[0, T]`` and ``< -B`` on ``I``."""
    gap = problem.yT_norm - state.psi_T_norm
    if gap <= 1e-14 * problem.yT_norm:
        raise DegenerateInputError(f"|y(T)| - |Psi(T)| = {gap:.3e}; the step is degenerate ({INEQ_NORM_GAP})")
    sup_w = float(W.max())
    inf_w = float(W[problem.closed_mask].min())
    if inf_w <= 0:
        raise FeasibilityError(f"supersolution vanishes on the window: inf w = {inf_w:.3e}", INEQ_INF_W)
    A = gap * problem.c / sup_w
    B = state.psi_T_norm * float(problem.U[problem.closed_mask].max()) / inf_w
    return A, B


def check_feasibility(problem: VSequenceProblem, beta: BetaProfile, A: float, B: float):
    """Sample both derivative bounds; raise :class:`FeasibilityError` naming the first failure."""
    ts = np.union1d(beta.samples(), problem.grid.nodes)
    db = beta.derivative(ts)
    if np.max(db) > A * (1 + 1e-12):
        raise FeasibilityError(f"max beta' = {np.max(db):.6g} exceeds {A:.6g}", INEQ_GLOBAL)
    a, b = problem.window
    inside = (ts > a) & (ts < b)
    if inside.any() and np.max(db[inside]) >= -B:
        raise FeasibilityError(f"beta' on I reaches {np.max(db[inside]):.6g}, needs < {-B:.6g}", INEQ_WINDOW)
    bad = beta.violations()
    if bad:
        raise FeasibilityError(f"weight inadmissible: {bad[0]}", bad[0])


def required_climb(horizon: float, window: tuple, drop_rate: float, transition: float) -> float:
    """Smallest climb rate that brings :func:`window_profile` back to ``beta(T) = beta(0)``."""
    a, b = window
    c = b + transition * (horizon - b)
    drop = drop_rate * (b - a) + drop_rate * a / 2 + (c - b) * drop_rate / 2
    return drop / ((horizon - c) + (c - b) / 2)


def search_beta(problem: VSequenceProblem, A: float, B: float) -> BetaProfile:
    """First admissible five-point Hermite weight on the ladders, or :class:`FeasibilityError`.

    The drop rate on ``I`` scans ``B (1 + m)`` over ``DROP_MARGINS`` (smallest
    first) and the climb rate is the least one that restores the maximum at
    ``T``; the candidate is rejected when that rate exceeds ``A``.
    """
    T = problem.grid.horizon
    cap = A * (1 - CLIMB_SHAVE)
    for margin in sorted(DROP_MARGINS):
        for frac in TRANSITIONS:
            D = B * (1 + margin)
            need = required_climb(T, problem.window, D, frac) * (1 + 1e-9)
            if need > cap:
                continue
            beta = window_profile(T, problem.window, D, need, frac, validate=False)
            try:
                check_feasibility(problem, beta, A, B)
                return beta
            except FeasibilityError:
                continue
    raise FeasibilityError(
        f"no weight in the family satisfies both bounds (A={A:.4g}, B={B:.4g}): "
        f"the drop forced on I cannot be recovered at slope <= A", INEQ_WINDOW)


def w_family(problem: VSequenceProblem, amplitudes=(1.0,)):
    """Candidate supersolutions: ``w0 = a e_1`` and ``g`` in {1, e_1}."""
    dom = problem.domain
    c = np.zeros(problem.cap)
    c[(0,) * dom.dims] = 1.0
    for a in amplitudes:
        w0 = SpectralField(dom, a * c)
        yield {"w0_amplitude": a, "g": "constant"}, SupersolutionSpec(w0, SourceSpec.constant(a))
        yield {"w0_amplitude": a, "g": "eigenmode"}, SupersolutionSpec(w0, SourceSpec.eigenmode((1,) * dom.dims, a))


def vtilde_step(problem: VSequenceProblem, state: VSequenceState, beta: BetaProfile,
                w: SupersolutionSpec, W: np.ndarray | None = None) -> VSequenceState:
    """One step ``v_k -> v_{k+1}`` with the given weight and supersolution.

    Both derivative bounds are verified by sampling before anything else.
    """
    if W is None:
        W = _w_nodal(problem, w)
    A, B = feasibility_bounds(problem, state, W)
    check_feasibility(problem, beta, A, B)
    pT = state.psi_T_norm
    yT = problem.yT_norm
    db = beta.derivative(problem.grid.nodes).reshape((-1,) + (1,) * problem.domain.dims)
    vt = (pT * problem.U + db * W) / yT
    v_next = np.maximum(vt, state.v)
    psi_next = problem.solve(v_next)
    psi_tilde_T = problem.solve(vt)[-1]
    dom = problem.domain
    sign = float(np.max(pT * problem.yT_nodal - yT * synthesize(psi_next[-1], dom)))
    tilde = float(np.max(pT * problem.yT_nodal - yT * synthesize(psi_tilde_T, dom)))
    viol = float(max(0.0, np.max(state.v - v_next), np.max(-v_next), np.max(v_next - problem.U)))
    pinned = bool(np.array_equal(v_next[problem.mask], problem.eps * problem.U[problem.mask]))
    return VSequenceState(
        k=state.k + 1, v=v_next, psi=psi_next,
        psi_T_norm=float(coefficient_norms(psi_next[-1:], dom)[0]),
        sign=sign, tilde_sign=tilde, increment=problem.spacetime_norm(v_next - state.v),
        monotone_violation=viol, pinned=pinned, beta=beta.describe(), w=None,
    )


def auto_step(problem: VSequenceProblem, state: VSequenceState, amplitudes=(1.0,)) -> VSequenceState:
    """Pick ``(beta, w)`` from the families and take one step.

    Candidates are tried in order; the first feasible pair is used.  If none
    works the error from the first candidate is re-raised.
    """
    first = None
    for label, w in w_family(problem, amplitudes):
        W = _w_nodal(problem, w)
        try:
            A, B = feasibility_bounds(problem, state, W)
            beta = search_beta(problem, A, B)
        except FeasibilityError as exc:
            first = first or exc
            continue
        nxt = vtilde_step(problem, state, beta, w, W)
        nxt.w = dict(label, sup=float(W.max()), inf_window=float(W[problem.closed_mask].min()), A=A, B=B)
        return nxt
    raise first


@dataclass
class VSequenceReport:
    states: list
    stopped_by: str | None           # None, or the name of the inequality that exhausted the family
    stop_message: str | None
    final_residual: float            # parallel residual between Psi_{v_K}(T) and y(T)
    y_T_norm: float

    @property
    def accepted(self) -> int:
        return len(self.states) - 1

    @property
    def signs(self) -> np.ndarray:
        return np.array([s.sign for s in self.states[1:]])

    @property
    def increments(self) -> np.ndarray:
        return np.array([s.increment for s in self.states[1:]])

    @property
    def increments_monotone(self) -> bool:
        inc = self.increments
        return bool(np.all(np.diff(inc) <= 0)) if inc.size > 1 else True

    @property
    def max_monotone_violation(self) -> float:
        return float(max(s.monotone_violation for s in self.states))

    @property
    def all_pinned(self) -> bool:
        return all(s.pinned for s in self.states)


def v_sequence_run(problem: VSequenceProblem, iterations: int = 10, v1_mode: str = "window",
                   amplitudes=(1.0,)) -> VSequenceReport:
    """Run up to ``iterations`` steps; stop early (and say why) if the families are exhausted."""
    if iterations < 0:
        raise InputError("iterations must be >= 0")
    states = [initial_state(problem, v1_mode)]
    stopped, msg = None, None
    for _ in range(iterations):
        try:
            states.append(auto_step(problem, states[-1], amplitudes))
        except (FeasibilityError, DegenerateInputError) as exc:
            stopped = getattr(exc, "inequality", INEQ_NORM_GAP)
            msg = str(exc)
            break
    weight = float(np.prod(problem.domain.lengths)) / 2.0**problem.domain.dims
    final = parallel_residual(states[-1].psi_T, problem.y[-1], weight)
    return VSequenceReport(states, stopped, msg, final, problem.yT_norm)
