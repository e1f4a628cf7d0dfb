"""Numeric shadow of the symbolic results: RK4 trajectories and straightness.

Nothing here feeds a verdict; the numbers only corroborate them.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Callable, Sequence

from .liegroup import FractalLinearMap
from .ode_model import OdeSystem
from .symexpr import Expr, PoleError

__all__ = [
    "Trajectory",
    "compile_expr",
    "integrate",
    "pfaffian_residual",
    "straightness_residual",
]

FIELDS = ("t", "y1", "y2", "v1", "v2")


def compile_expr(e: Expr, names: Sequence[str]) -> Callable:
    """Float evaluator of ``e`` with positional arguments ``names``."""
    order = [e.reg.index[n] for n in names]

    def terms(poly):
        out = []
        for monom, coeff in poly.to_dict().items():
            powers = [(k, int(monom[i])) for k, i in enumerate(order) if monom[i]]
            if len(powers) != sum(1 for d in monom if d):
                raise ValueError(f"{e} depends on variables outside {tuple(names)}")
            out.append((float(int(coeff.p)) / float(int(coeff.q)), powers))
        return out

    num, den = terms(e.num), terms(e.den)

    def evaluate(*args):
        def value(ts):
            total = 0.0
            for c, powers in ts:
                for k, d in powers:
                    c *= args[k] ** d
                total += c
            return total

        d = value(den)
        if d == 0.0:
            raise PoleError(f"pole of {e}")
        return value(num) / d

    return evaluate


@dataclass(frozen=True)
class Trajectory:
    samples: tuple  # (t, y1, y2, v1, v2)
    step: float

    def __post_init__(self):
        ts = [s[0] for s in self.samples]
        if any(b <= a for a, b in zip(ts, ts[1:])):
            raise ValueError("sample times must increase strictly")
        if not all(math.isfinite(x) for s in self.samples for x in s):
            raise ValueError("non-finite sample")

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(FIELDS)
        for s in self.samples:
            w.writerow([repr(float(x)) for x in s])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str, step: float | None = None) -> "Trajectory":
        rows = list(csv.reader(io.StringIO(text)))
        if not rows or tuple(rows[0]) != FIELDS:
            raise ValueError(f"expected header {','.join(FIELDS)}")
        samples = tuple(tuple(float(x) for x in r) for r in rows[1:] if r)
        if step is None:
            step = samples[1][0] - samples[0][0] if len(samples) > 1 else 0.0
        return cls(samples, step)


def integrate(system: OdeSystem, init: Sequence[float], steps: int, h: float) -> Trajectory:
    """Classical RK4 from ``init = (y1, y2, v1, v2, t)``."""
    names = ("y1", "y2", "v1", "v2", "t")
    f = compile_expr(system.f, names)
    g = compile_expr(system.g, names)

    def rhs(t, s):
        y1, y2, v1, v2 = s
        return (v1, v2, f(y1, y2, v1, v2, t), g(y1, y2, v1, v2, t))

    y1, y2, v1, v2, t = (float(x) for x in init)
    state = (y1, y2, v1, v2)
    out = [(t, *state)]
    for _ in range(steps):
        try:
            k1 = rhs(t, state)
            k2 = rhs(t + h / 2, tuple(s + h / 2 * k for s, k in zip(state, k1)))
            k3 = rhs(t + h / 2, tuple(s + h / 2 * k for s, k in zip(state, k2)))
            k4 = rhs(t + h, tuple(s + h * k for s, k in zip(state, k3)))
        except OverflowError:
            raise PoleError(f"trajectory blew up near t={t}") from None
        state = tuple(s + h / 6 * (a + 2 * b + 2 * c + d) for s, a, b, c, d in zip(state, k1, k2, k3, k4))
        t = t + h
        if not all(math.isfinite(x) for x in state):
            raise PoleError(f"trajectory left the domain at t={t}")
        out.append((t, *state))
    return Trajectory(tuple(out), h)


def _map_fn(m) -> Callable:
    if isinstance(m, FractalLinearMap):
        a = [float(x) for x in m.a]
        c = [float(x) for x in m.c]
        b = [[float(x) for x in row] for row in m.b]

        def fn(y1, y2, t):
            den = a[0] + a[1] * y1 + a[2] * y2
            if den == 0.0:
                raise PoleError("pole of the map")
            return ((b[0][0] + b[0][1] * y1 + b[0][2] * y2) / den,
                    (b[1][0] + b[1][1] * y1 + b[1][2] * y2) / den,
                    (t + c[0] + c[1] * y1 + c[2] * y2) / den)

        return fn
    if isinstance(m, (tuple, list)) and all(isinstance(e, Expr) for e in m):
        parts = [compile_expr(e, ("y1", "y2", "t")) for e in m]
        return lambda y1, y2, t: tuple(p(y1, y2, t) for p in parts)
    return m


def straightness_residual(traj: Trajectory, m) -> float:
    """Largest distance of mapped samples from the chord through the mapped endpoints.

    ``m`` is a :class:`FractalLinearMap`, a triple of Exprs ``(Y1, Y2, T)``
    in ``y1, y2, t``, or any callable ``(y1, y2, t) -> (Y1, Y2, T)``.
    """
    fn = _map_fn(m)
    pts = [fn(s[1], s[2], s[0]) for s in traj.samples]
    p0, p1 = pts[0], pts[-1]
    d = [b - a for a, b in zip(p0, p1)]
    norm = math.sqrt(sum(x * x for x in d))
    if norm == 0.0:
        return max(math.dist(p, p0) for p in pts)
    worst = 0.0
    for p in pts[1:-1]:
        r = [x - a for x, a in zip(p, p0)]
        # |r x d| / |d|
        cross = (r[1] * d[2] - r[2] * d[1], r[2] * d[0] - r[0] * d[2], r[0] * d[1] - r[1] * d[0])
        worst = max(worst, math.sqrt(sum(x * x for x in cross)) / norm)
    return worst


def pfaffian_residual(system: OdeSystem, traj: Trajectory) -> float:
    """Largest value of ``omega2..omega5`` on tangents of the lifted trajectory.

    Tangents come from fourth-order central differences of the chart
    coordinates ``(y1, y2, p, q, t)``, so only interior samples are used.
    """
    chart_names = ("y1", "y2", "p", "q", "t")
    forms = system.coframe.forms[1:]
    coeffs = [[compile_expr(f.coeff(j), chart_names) for j in range(5)] for f in forms]
    pts = [(s[1], s[2], -s[3] / s[4], -s[4], s[0]) for s in traj.samples]
    h = traj.step
    worst = 0.0
    for i in range(2, len(pts) - 2):
        tangent = [(-pts[i + 2][k] + 8 * pts[i + 1][k] - 8 * pts[i - 1][k] + pts[i - 2][k]) / (12 * h)
                   for k in range(5)]
        for row in coeffs:
            val = sum(row[j](*pts[i]) * tangent[j] for j in range(5))
            worst = max(worst, abs(val))
    return worst
