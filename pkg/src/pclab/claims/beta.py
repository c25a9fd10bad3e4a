"""Time weights beta(t) > 0 whose maximum over [0, T] sits at t = T."""

from __future__ import annotations

import numpy as np
from scipy.interpolate import CubicHermiteSpline, CubicSpline, PchipInterpolator

from ..errors import InputError, PreconditionError

KINDS = ("pchip", "natural", "not-a-knot", "clamped", "hermite")
N_CHECK = 1001


class BetaProfile:
    """C^1 piecewise-cubic weight through control points on ``[0, T]``.

    ``kind="pchip"`` (default) never overshoots its control values, so a
    profile whose last control value is the largest is admissible by
    construction.  ``kind="hermite"`` takes explicit ``slopes``; the other
    kinds are classical cubic splines with the named end conditions.

    The constructor checks ``beta > 0`` and ``beta(T) >= beta(t)`` on
    ``N_CHECK`` samples and raises :class:`PreconditionError` naming the
    failed condition; pass ``validate=False`` to build first and call
    :meth:`violations` yourself.
    """

    def __init__(self, times, values, slopes=None, kind="pchip", validate=True):
        t = np.asarray(times, dtype=float)
        v = np.asarray(values, dtype=float)
        if kind not in KINDS:
            raise InputError(f"unknown beta kind {kind!r}; expected one of {KINDS}")
        if t.ndim != 1 or t.shape != v.shape or t.size < 2:
            raise InputError("beta control points need matching 1-D times/values, at least two")
        if t[0] != 0.0 or np.any(np.diff(t) <= 0):
            raise InputError("beta control times must start at 0 and increase strictly")
        self.times = t
        self.values = v
        self.kind = kind
        self.horizon = float(t[-1])
        if kind == "hermite":
            if slopes is None:
                raise InputError("hermite beta needs slopes")
            self.slopes = np.asarray(slopes, dtype=float)
            self._spline = CubicHermiteSpline(t, v, self.slopes)
        else:
            self.slopes = None
            if kind == "pchip":
                self._spline = PchipInterpolator(t, v)
            elif kind == "clamped":
                self._spline = CubicSpline(t, v, bc_type="clamped")
            else:
                self._spline = CubicSpline(t, v, bc_type=kind)
        self._dspline = self._spline.derivative()
        if validate:
            bad = self.violations()
            if bad:
                raise PreconditionError(f"inadmissible beta: {bad[0]}", bad[0])

    @classmethod
    def constant(cls, value: float, horizon: float):
        return cls([0.0, horizon], [value, value])

    def __call__(self, t):
        return self._spline(np.asarray(t, dtype=float))

    def derivative(self, t):
        return self._dspline(np.asarray(t, dtype=float))

    def samples(self, n: int = N_CHECK) -> np.ndarray:
        return np.linspace(0.0, self.horizon, max(int(n), N_CHECK))

    def violations(self, tol: float = 1e-12) -> list:
        """Names of violated admissibility conditions (empty when admissible)."""
        t = self.samples()
        b = self(t)
        out = []
        if np.min(b) <= 0:
            out.append("beta > 0")
        scale = max(1.0, float(np.max(np.abs(b))))
        if np.max(b) > b[-1] + tol * scale:
            out.append("max beta = beta(T)")
        return out

    def describe(self) -> dict:
        d = {"kind": self.kind, "times": self.times.tolist(), "values": self.values.tolist()}
        if self.slopes is not None:
            d["slopes"] = self.slopes.tolist()
        return d


def window_profile(horizon: float, window: tuple, drop_rate: float, climb_rate: float,
                   transition: float, floor: float = 1.0, validate: bool = True) -> BetaProfile:
    """Hermite profile through five control points shaped for a v-sequence step.

    Slopes at ``0, a, b, c, T`` are ``0, -D, -D, A, A`` where ``(a, b)`` is the
    window, ``D = drop_rate``, ``A = climb_rate`` and ``c = b + transition (T - b)``.
    Matching values make every segment at most quadratic, so ``beta' = -D``
    on the whole window and ``beta' <= A`` everywhere.  Values are shifted so
    that ``min beta = floor``.
    """
    a, b = (float(x) for x in window)
    T = float(horizon)
    if not (0 < a < b < T):
        raise InputError(f"window must satisfy 0 < a < b < T, got ({a}, {b}) with T={T}")
    if not (0 < transition < 1):
        raise InputError("transition fraction must lie in (0, 1)")
    D, A = float(drop_rate), float(climb_rate)
    c = b + transition * (T - b)
    times = np.array([0.0, a, b, c, T])
    slopes = np.array([0.0, -D, -D, A, A])
    vals = np.zeros(5)
    vals[1] = -D * a / 2
    vals[2] = vals[1] - D * (b - a)
    vals[3] = vals[2] + (c - b) * (A - D) / 2
    vals[4] = vals[3] + A * (T - c)
    # lowest point: where the slope crosses zero on [b, c]
    s0 = (c - b) * D / (A + D)
    low = vals[2] - D * s0 + (A + D) * s0**2 / (2 * (c - b))
    vals += floor - min(low, vals.min())
    return BetaProfile(times, vals, slopes, kind="hermite", validate=validate)
