"""Flat branch: second normalization, prolongation and the final constant structure.

After ``A = B = 0`` the residual group is six-dimensional.  Its torsion is
constant, so the problem is prolonged: the coframe is lifted to the group
(coordinates ``u1..u6``) with connection forms ``theta^1..theta^6`` that
carry the two tableau parameters ``s1, s2``.  The prolonged torsion fixes
``s2`` and one more prolongation leaves a twelve-dimensional coframe
``(eta, theta, Phi)`` whose structure functions must be the constants of the
fractal-linear Maurer-Cartan equations.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ..exterior import Chart, Coframe, ext_d, express_in_coframe, pullback
from ..linalg import inverse_and_det
from ..liegroup import STRUCTURE_SIX
from ..symexpr import BASE_COORDS, Expr
from . import groups
from .groups import FLAT_READING, FLAT_TABLEAU, THETA_NAMES, flat_group_element, translation
from .pipeline import Stage1Reduction, TorsionStage2, apply_matrix, normal_form
from .structure import StageError, structure_functions, transform_structure
from .verdict import FLAT, Verdict, dedupe, undetermined

__all__ = ["FlatResult", "ProlongedState", "flat_check", "normalize_flat", "prolong"]

LIFT_COORDS = tuple(f"u{i}" for i in range(1, 7))
PROLONGED_CHART = BASE_COORDS + LIFT_COORDS + ("s1", "s2")
FINAL_CHART = BASE_COORDS + LIFT_COORDS + ("s1",)

_MUST_VANISH = ("A2", "A3", "A4", "A5", "B", "D1", "D2", "F")


@dataclass
class ProlongedState:
    """The lifted coframe ``(eta, theta)`` with tableau parameters ``s1, s2``."""

    chart: Chart
    eta: list
    theta: list
    torsion: dict
    extras: dict
    l: Expr | None = None
    Phi2: object = None


@dataclass
class FlatResult:
    coframe: Coframe
    structure: dict
    mismatches: dict = field(default_factory=dict)
    s2_section: Expr | None = None


def normalize_flat(reduced: Stage1Reduction, t2: TorsionStage2) -> Coframe:
    """Translate the M block so that the stage-2 ``A`` and ``B`` vanish."""
    reg = reduced.system.reg
    half = reg.const(1) / 2
    S = translation(t2.A * half, t2.B * half, reg.zero, reg)
    return apply_matrix(S, reduced.coframe)


def _lift(form, chart: Chart, reg):
    base = len(BASE_COORDS)
    return chart.one_form([form.coeff(j) for j in range(base)] + [reg.zero] * (chart.dim - base))


def _connection_forms(C2: dict, base_forms, chart: Chart, s_values: dict):
    """``eta = g eta_2`` and ``theta`` on ``chart`` for the flat residual group element ``g``."""
    reg = chart.reg
    params = reg.vars(*LIFT_COORDS)
    g = flat_group_element(params, reg)
    ginv, _ = inverse_and_det(g)
    lifted = [_lift(f, chart, reg) for f in base_forms]
    eta = []
    for i in range(5):
        total = chart.zero(1)
        for k in range(5):
            if not g[i][k].is_zero():
                total = total + lifted[k] * g[i][k]
        eta.append(total)
    dg = [[ext_d(chart.scalar(g[i][j])) for j in range(5)] for i in range(5)]

    def mc(i, j):
        total = chart.zero(1)
        for k in range(5):
            if not ginv[k][j].is_zero() and dg[i][k].terms:
                total = total + dg[i][k] * ginv[k][j]
        return total

    rho = {name: mc(*rc) for name, rc in FLAT_READING.items()}
    # dg g^-1 must lie in the residual algebra
    for i in range(5):
        for j in range(5):
            expect = chart.zero(1)
            for name in groups.FLAT_ALGEBRA.names:
                v = groups.FLAT_ALGEBRA.generators[name].get((i, j))
                if v:
                    expect = expect + rho[name] * reg.const(v)
            if not (mc(i, j) - expect).is_zero():
                raise StageError("Maurer-Cartan form leaves the flat residual algebra")
    res = normal_form("flat").solve(transform_structure(C2, g, 5, reg))
    if any(not v.is_zero() for v in list(res.torsion.values()) + list(res.extras.values())):
        raise StageError("flat torsion is not invariant along the group")
    theta = []
    for name in THETA_NAMES:
        form = rho[name]
        for m in range(5):
            c = res.connection[(name, m)]
            for s, direction in FLAT_TABLEAU.items():
                w = direction.get((name, m))
                if w:
                    c = c + s_values[s] * w
            if not c.is_zero():
                form = form + eta[m] * c
        theta.append(form)
    return eta, theta


def _split(forms, cf: Coframe, n: int):
    """Structure functions of ``forms`` in ``cf``, separating the parameter differentials (index >= n)."""
    C, ds = {}, {}
    for i, f in enumerate(forms):
        for (a, b), v in express_in_coframe(ext_d(f), cf).items():
            (ds if b >= n else C)[(i, a, b)] = v
    return C, ds


def _check_tableau(ds: dict, algebra, n: int) -> list:
    expected = {}
    for a, name in enumerate(algebra.names):
        for (r, c), v in algebra.generators[name].items():
            expected[(r, c, n + a)] = -v
    bad = [k for k in set(ds) | set(expected) if ds.get(k) != expected.get(k, 0)]
    return sorted(bad)


def prolong(flat_coframe: Coframe) -> ProlongedState:
    """First prolongation of the flat structure on ``(x, u1..u6, s1, s2)``."""
    reg = flat_coframe.chart.reg
    chart = Chart(PROLONGED_CHART, reg)
    C2 = structure_functions(flat_coframe)
    s1, s2 = reg.vars("s1", "s2")
    eta, theta = _connection_forms(C2, flat_coframe.forms, chart, {"s1": s1, "s2": s2})
    cf = Coframe(eta + theta + [chart.d("s1"), chart.d("s2")])
    C, ds = _split(eta + theta, cf, 11)
    if _check_tableau(ds, groups.PROLONGED_ALGEBRA, 11):
        raise StageError("prolonged connection forms do not follow the tableau")
    res = normal_form("prolonged").solve(C)
    Phi2 = chart.d("s2")
    basis = eta + theta
    for m in range(11):
        c = res.connection[("Phi2", m)]
        if not c.is_zero():
            Phi2 = Phi2 + basis[m] * c
    state = ProlongedState(chart, eta, theta, dict(res.torsion), dict(res.extras), Phi2=Phi2)
    A1 = res.torsion["A1"]
    form = ext_d(chart.scalar(A1)) + (theta[2] + theta[3]) * A1 - Phi2
    comps = express_in_coframe(form, cf)
    # dA1 + A1 (theta^3 + theta^4) - Phi^2 = -l eta^2
    if set(comps) <= {(1,)}:
        state.l = -comps.get((1,), reg.zero)
    return state


def _final(state: ProlongedState, s2_value: Expr) -> FlatResult:
    reg = state.chart.reg
    chart = Chart(FINAL_CHART, reg)
    sub = {"s2": s2_value}
    eta = [pullback(f, sub, chart) for f in state.eta]
    theta = [pullback(f, sub, chart) for f in state.theta]
    cf = Coframe(eta + theta + [chart.d("s1")])
    C, ds = _split(eta + theta, cf, 11)
    if _check_tableau(ds, groups.PROLONGED_FINAL_ALGEBRA, 11):
        raise StageError("final connection forms do not follow the tableau")
    res = normal_form("prolonged_final").solve(C)
    bad = [k for k, v in res.extras.items() if not v.is_zero()]
    Phi = chart.d("s1")
    basis = eta + theta
    for m in range(11):
        c = res.connection[("Phi1", m)]
        if not c.is_zero():
            Phi = Phi + basis[m] * c
    labels = [f"eta{i}" for i in range(1, 6)] + [f"theta{i}" for i in range(1, 7)] + ["Phi"]
    cf12 = Coframe(eta + theta + [Phi], labels)
    S = structure_functions(cf12)
    target = STRUCTURE_SIX.slot_dict()
    mism = {}
    for k in set(S) | set(target):
        diff = S.get(k, reg.zero) - target.get(k, 0)
        if not diff.is_zero():
            mism[k] = diff
    if bad:
        mism["extras"] = bad
    return FlatResult(cf12, S, mism, s2_value)


def flat_check(reduced: Stage1Reduction, t2: TorsionStage2) -> Verdict:
    """Decide whether a flat candidate really has the flat structure equations."""
    conds = list(reduced.conditions)
    if not (t2.C.is_zero() and t2.D.is_zero()):
        return undetermined("stage-2 torsion C or D is nonzero", conds)
    cf2 = normalize_flat(reduced, t2)
    res = normal_form("flat").solve(structure_functions(cf2))
    for name in ("A", "B"):
        if not res.torsion[name].is_zero():
            return undetermined(f"flat normalization: d eta^4 torsion {name} = {res.torsion[name]} is not zero",
                                conds, flat_torsion=dict(res.torsion))
    extra = [k for k, v in res.extras.items() if not v.is_zero()]
    if extra:
        return undetermined(f"flat normalization: unexpected torsion in slot {extra[0]}", conds)
    state = prolong(cf2)
    tor = state.torsion
    for name in _MUST_VANISH:
        if not tor[name].is_zero():
            return undetermined(f"prolonged torsion {name} is not zero", conds)
    if not (tor["C"] - 2 * tor["A1"]).is_zero():
        return undetermined("prolonged torsion violates C = 2 A1", conds)
    extra = [k for k, v in state.extras.items() if not v.is_zero()]
    if extra:
        return undetermined(f"prolonged structure has unexpected torsion in slot {extra[0]}", conds)
    if state.l is None:
        return undetermined("dA1 + A1 (theta^3 + theta^4) - Phi^2 is not a multiple of eta^2", conds)
    coeffs = tor["A1"].poly_coeffs("s2")
    if len(coeffs) != 2 or tor["A1"].denominator().depends_on("s2"):
        return undetermined("prolonged torsion A1 is not affine in s2", conds)
    s2_value = -coeffs[0] / coeffs[1]  # denominators cancel in the ratio
    final = _final(state, s2_value)
    if final.mismatches:
        key = sorted(final.mismatches, key=str)[0]
        return undetermined(f"final structure differs from the fractal-linear constants at {key}", conds)
    details = {"prolonged": state, "final": final}
    return Verdict(FLAT, None, dedupe(conds), None, details)
