"""Pairs of second-order ODEs and their base coframe.

The system ``y1'' = f(y, v, t)``, ``y2'' = g(y, v, t)`` (``v = y'``) is moved to
the chart ``(y1, y2, p, q, t)`` with ``p = -v1/v2`` and ``q = -v2``, where

    omega1 = dy1,  omega2 = dy1 + p dy2,  omega3 = dy2 + q dt,
    omega4 = dp + h dt,  omega5 = dq + g dt,

and ``h = v2^-2 (v2 f - v1 g)``.  The Pfaffian system spanned by
``omega2..omega5`` annihilates the lifted solution curves.  Everything is
local to the open set ``p q != 0``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Mapping, Sequence

from .exterior import Chart, Coframe
from .symexpr import BASE_COORDS, DEFAULT, INPUT_VARS, Expr, ParseError, Registry, parse_expr

__all__ = [
    "OdeSystem",
    "build_base_coframe",
    "chart_point",
    "load_system",
    "load_system_file",
    "parse_system_text",
    "pfaffian_system",
    "prolong_point",
    "total_derivative",
    "transform_system",
]


@dataclass(frozen=True)
class OdeSystem:
    f: Expr
    g: Expr
    chart: Chart
    p_expr: Expr
    q_expr: Expr
    h_expr: Expr
    f_chart: Expr
    g_chart: Expr
    h_chart: Expr
    coframe: Coframe

    @property
    def reg(self) -> Registry:
        return self.chart.reg

    def working_set(self) -> list:
        """Expressions assumed nonzero everywhere on the chart."""
        p, q = self.reg.vars("p", "q")
        return [p, q]

    def __str__(self):
        return f"f = {self.f}\ng = {self.g}\n"


def _chart_bindings(reg: Registry) -> dict:
    p, q = reg.vars("p", "q")
    return {"v1": p * q, "v2": -q}


def load_system(f_text, g_text, registry: Registry = DEFAULT) -> OdeSystem:
    """Build an :class:`OdeSystem` from expression strings (or Exprs) in ``y1, y2, v1, v2, t``."""
    f = _as_input_expr(f_text, registry, "f")
    g = _as_input_expr(g_text, registry, "g")
    v1, v2 = registry.vars("v1", "v2")
    h = (v2 * f - v1 * g) / (v2 * v2)
    sub = _chart_bindings(registry)
    f_chart, g_chart, h_chart = f.subs(sub), g.subs(sub), h.subs(sub)
    chart = Chart(BASE_COORDS, registry)
    return OdeSystem(
        f=f, g=g, chart=chart,
        p_expr=-v1 / v2, q_expr=-v2, h_expr=h,
        f_chart=f_chart, g_chart=g_chart, h_chart=h_chart,
        coframe=_coframe(chart, h_chart, g_chart),
    )


def _as_input_expr(value, reg: Registry, label: str) -> Expr:
    if isinstance(value, Expr):
        extra = set(value.free_vars()) - set(INPUT_VARS)
        if extra:
            raise ValueError(f"{label} uses variables outside {INPUT_VARS}: {sorted(extra)}")
        return value
    try:
        return parse_expr(str(value), reg, allowed=INPUT_VARS)
    except ParseError as exc:
        raise type(exc)(f"{label}: {exc.message}", exc.position, exc.text) from None


def _coframe(chart: Chart, h: Expr, g: Expr) -> Coframe:
    p, q = chart.reg.vars("p", "q")
    dy1, dy2, dp, dq, dt = (chart.d(c) for c in BASE_COORDS)
    return Coframe([dy1, dy1 + dy2 * p, dy2 + dt * q, dp + dt * h, dq + dt * g],
                   labels=[f"omega{i}" for i in range(1, 6)])


def build_base_coframe(system: OdeSystem) -> Coframe:
    return system.coframe


def pfaffian_system(system: OdeSystem) -> list:
    """The four forms ``omega2..omega5`` spanning the Pfaffian system."""
    return list(system.coframe.forms[1:])


def parse_system_text(text: str) -> tuple:
    """Read ``f = <expr>`` and ``g = <expr>`` lines; ``#`` comments and blanks ignored."""
    found = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        name, sep, rhs = line.partition("=")
        name = name.strip()
        if not sep or name not in ("f", "g"):
            raise ParseError(f"line {lineno}: expected 'f = ...' or 'g = ...'", 0, raw)
        if name in found:
            raise ParseError(f"line {lineno}: duplicate definition of {name}", 0, raw)
        found[name] = rhs.strip()
    missing = [n for n in ("f", "g") if n not in found]
    if missing:
        raise ParseError(f"missing definition of {', '.join(missing)}", 0, text)
    return found["f"], found["g"]


def load_system_file(path, registry: Registry = DEFAULT) -> OdeSystem:
    f_text, g_text = parse_system_text(Path(path).read_text(encoding="utf-8"))
    return load_system(f_text, g_text, registry)


def chart_point(y1, y2, v1, v2, t) -> dict:
    """Chart coordinates of a point of ``(y, v, t)`` space."""
    v1, v2 = Fraction(v1), Fraction(v2)
    return {"y1": Fraction(y1), "y2": Fraction(y2), "p": -v1 / v2, "q": -v2, "t": Fraction(t)}


def total_derivative(e: Expr, f: Expr, g: Expr) -> Expr:
    """``d/dt`` of ``e(y, v, t)`` along solutions of ``y'' = (f, g)``."""
    out = e.diff("t") + e.diff("y1") * e.reg.var("v1") + e.diff("y2") * e.reg.var("v2")
    if e.depends_on("v1"):
        out = out + e.diff("v1") * f
    if e.depends_on("v2"):
        out = out + e.diff("v2") * g
    return out


def transform_system(system: OdeSystem, forward: Sequence[Expr], inverse: Sequence[Expr]) -> OdeSystem:
    """Equations satisfied by ``(Y, T) = forward(y, t)`` of the solutions of ``system``.

    ``forward = (Y1, Y2, T)`` with ``Y`` a function of ``y1, y2`` only and
    ``T`` of ``y1, y2, t``; ``inverse`` expresses ``(y1, y2, t)`` back in terms of the new
    variables, which reuse the names ``y1, y2, t``.  The result is written in
    the usual input variables of the new system.
    """
    reg = system.reg
    Y1, Y2, T = forward
    names = ("y1", "y2", "t")
    back = dict(zip(names, inverse))
    for name, fwd in zip(names, forward):
        if fwd.subs(back) != reg.var(name):
            raise ValueError("inverse does not invert the forward map")
    f, g = system.f, system.g
    dT = total_derivative(T, f, f)  # T has no velocity dependence
    V1 = total_derivative(Y1, f, g) / dT
    V2 = total_derivative(Y2, f, g) / dT
    F = total_derivative(V1, f, g) / dT
    G = total_derivative(V2, f, g) / dT
    # velocities of the old system in terms of the new point and velocity
    J = [[Y1.diff("y1"), Y1.diff("y2")], [Y2.diff("y1"), Y2.diff("y2")]]
    det = J[0][0] * J[1][1] - J[0][1] * J[1][0]
    v1n, v2n = reg.vars("v1", "v2")
    w1 = (J[1][1] * v1n - J[0][1] * v2n) / det  # J^-1 V
    w2 = (-J[1][0] * v1n + J[0][0] * v2n) / det
    scale = T.diff("t") / (1 - T.diff("y1") * w1 - T.diff("y2") * w2)
    old_v = {"v1": w1 * scale, "v2": w2 * scale}
    old_v = {k: v.subs(back) for k, v in old_v.items()}
    bindings = dict(back, **old_v)
    return load_system(F.subs(bindings), G.subs(bindings), reg)


def prolong_point(forward: Sequence[Expr], point: Mapping[str, Fraction]) -> dict:
    """Image of ``(y1, y2, v1, v2, t)`` under the velocity prolongation of ``forward``."""
    Y1, Y2, T = forward
    reg = Y1.reg
    v1, v2 = reg.vars("v1", "v2")
    tangent = [T.diff("t") + T.diff("y1") * v1 + T.diff("y2") * v2]
    V1 = (Y1.diff("y1") * v1 + Y1.diff("y2") * v2) / tangent[0]
    V2 = (Y2.diff("y1") * v1 + Y2.diff("y2") * v2) / tangent[0]
    return {
        "y1": Y1.eval_at(point), "y2": Y2.eval_at(point), "t": T.eval_at(point),
        "v1": V1.eval_at(point), "v2": V2.eval_at(point),
    }
