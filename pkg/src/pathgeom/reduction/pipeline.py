"""First normalization, stage-2 torsion and the top-level ``check``.

Every stage works "at the identity" of its residual group: the coframe is a
genuine coframe on the base chart, torsion is read off with
:class:`~.structure.NormalForm`, and a section of the group is applied by
multiplying the coframe with a matrix of base functions.  Branch decisions
only test relative invariants for vanishing, so they do not depend on the
gauge.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

from ..exterior import Coframe
from ..linalg import SingularMatrixError
from ..ode_model import OdeSystem
from ..symexpr import Expr
from . import groups
from .groups import GroupParams
from .structure import NormalForm, StageError, structure_functions
from .verdict import Verdict, undetermined

__all__ = [
    "FLAT_CANDIDATE",
    "GENERIC_BRANCH",
    "UNDETERMINED_BRANCH",
    "Stage1Reduction",
    "TorsionStage1",
    "TorsionStage2",
    "apply_matrix",
    "check",
    "classify_branch",
    "lift_coframe",
    "normal_form",
    "stage1_normalize",
    "stage1_torsion",
    "stage2_torsion",
]

FLAT_CANDIDATE = "FlatCandidate"
GENERIC_BRANCH = "Generic"
UNDETERMINED_BRANCH = "Undetermined"

_STAGES = {
    "stage1": ("FULL_ALGEBRA", "STAGE1_TEMPLATE"),
    "stage2": ("STAGE1_RESIDUAL", "STAGE2_TEMPLATE"),
    "generic_start": ("STAGE1_RESIDUAL", "GENERIC_START_TEMPLATE"),
    "flat": ("FLAT_ALGEBRA", "FLAT_TEMPLATE"),
    "prolonged": ("PROLONGED_ALGEBRA", "PROLONGED_TEMPLATE"),
    "prolonged_final": ("PROLONGED_FINAL_ALGEBRA", "PROLONGED_FINAL_TEMPLATE"),
    "generic": ("GENERIC_ALGEBRA", "GENERIC_TEMPLATE"),
}


@lru_cache(maxsize=None)
def normal_form(stage: str) -> NormalForm:
    """Shared solver for a named stage; construction is pure linear algebra over Q."""
    alg, tmpl = _STAGES[stage]
    return NormalForm(getattr(groups, alg), getattr(groups, tmpl))


def apply_matrix(S, coframe: Coframe, labels=None) -> Coframe:
    """The coframe ``S . coframe`` for a matrix of functions ``S``."""
    chart = coframe.chart
    forms = []
    for row in S:
        total = chart.zero(1)
        for k, s in enumerate(row):
            if not s.is_zero():
                total = total + coframe.forms[k] * s
        forms.append(total)
    out = Coframe(forms, labels or [f"eta{i + 1}" for i in range(len(forms))])
    try:
        out.determinant()
    except SingularMatrixError as exc:
        raise StageError("group element is singular") from exc
    return out


def lift_coframe(system: OdeSystem, gp: GroupParams) -> Coframe:
    """``eta = S(gp) omega``; group parameters that are not chart coordinates act as constants."""
    if gp.singular_factors():
        raise StageError("group parameters give a singular element")
    return apply_matrix(gp.matrix(system.reg), system.coframe)


# ------------------------------------------------------------------ stage 1


@dataclass
class TorsionStage1:
    J: Expr
    A: tuple
    B: tuple

    def as_dict(self) -> dict:
        return {"J": self.J, "A1": self.A[0], "A2": self.A[1], "B1": self.B[0], "B2": self.B[1]}


def _require_no_extras(result, what: str):
    bad = [k for k, v in result.extras.items() if not v.is_zero()]
    if bad:
        raise StageError(f"{what}: torsion outside the expected slots at {bad[:3]}")


def stage1_torsion(system: OdeSystem) -> TorsionStage1:
    """``J, A, B`` of the lifted coframe at the identity of G."""
    res = normal_form("stage1").solve(structure_functions(system.coframe))
    _require_no_extras(res, "first structure equations")
    t = res.torsion
    return TorsionStage1(t["J"], (t["A1"], t["A2"]), (t["B1"], t["B2"]))


@dataclass
class Stage1Reduction:
    """Coframe after ``J = 0, A = (0, 1), B = (1, 0)`` and the bookkeeping around it.

    ``coefficients[L][i]`` (``L`` in ``ABCDE``, ``i`` 1-based) are the base
    components of the connection combinations that vanish modulo the base
    after the normalization; ``relations`` holds the residuals of the
    identities they satisfy.
    """

    system: OdeSystem
    section: GroupParams
    coframe: Coframe
    structure: dict
    torsion: TorsionStage1
    coefficients: dict
    relations: dict
    residual_forms: tuple = ("gamma", "beta", "v11", "v12", "v22", "mu11", "mu12", "mu21")
    conditions: list = field(default_factory=list)


def stage1_section(t1: TorsionStage1, reg) -> GroupParams:
    """Element of G carrying ``(J0, A0, B0)`` to ``(0, (0, 1), (1, 0))``.

    ``N`` has rows ``B0`` and ``A0`` so that ``B0 N^-1 = (1, 0)`` and
    ``A0 N^-1 = (0, 1)``; then ``M2 = (0, J0)`` cancels ``J``.
    """
    one, zero = reg.one, reg.zero
    N = [list(t1.B), list(t1.A)]
    det = N[0][0] * N[1][1] - N[0][1] * N[1][0]
    if det.is_zero():
        raise StageError("stage-1 torsion vectors A and B are dependent")
    return GroupParams(one, zero, one, zero, one, [[zero, zero], [zero, t1.J]], N)


def _relation_coefficients(connection: dict, reg) -> dict:
    def co(name, i):
        return connection.get((name, i - 1), reg.zero)

    out = {}
    for letter, weights in zip("ABCDE", groups.STAGE1_RELATIONS.values()):
        out[letter] = {i: sum((co(n, i) * w for n, w in weights.items()), reg.zero) for i in range(1, 6)}
    return out


def stage1_normalize(system: OdeSystem, t1: TorsionStage1 | None = None) -> Stage1Reduction:
    reg = system.reg
    t1 = t1 or stage1_torsion(system)
    section = stage1_section(t1, reg)
    cf = lift_coframe(system, section)
    C = structure_functions(cf)
    res = normal_form("stage1").solve(C)
    _require_no_extras(res, "normalized first structure equations")
    target = {"J": reg.zero, "A1": reg.zero, "A2": reg.one, "B1": reg.one, "B2": reg.zero}
    off = [k for k, v in res.torsion.items() if v != target[k]]
    if off:
        raise StageError(f"first normalization failed for {off}")
    coeffs = _relation_coefficients(res.connection, reg)
    A, B, Cc, D, E = (coeffs[L] for L in "ABCDE")
    relations = {
        "B3=A4": B[3] - A[4],
        "D3=A5": D[3] - A[5],
        "D4=B5": D[4] - B[5],
        "E5=C4+D5": E[5] - Cc[4] - D[5],
    }
    p, q = reg.vars("p", "q")
    return Stage1Reduction(system, section, cf, C, t1, coeffs, relations, conditions=[p, q])


# ------------------------------------------------------------------ stage 2


@dataclass
class TorsionStage2:
    A: Expr
    B: Expr
    C: Expr
    D: Expr

    def as_dict(self) -> dict:
        return {"A": self.A, "B": self.B, "C": self.C, "D": self.D}


def stage2_torsion(reduced: Stage1Reduction | Coframe) -> TorsionStage2:
    """Torsion of the first residual group: ``A, B`` in ``d eta^3`` and ``C, D`` in ``d eta^5``."""
    C = reduced.structure if isinstance(reduced, Stage1Reduction) else structure_functions(reduced)
    res = normal_form("stage2").solve(C)
    _require_no_extras(res, "stage-2 structure equations")
    t = res.torsion
    return TorsionStage2(t["A"], t["B"], t["C"], t["D"])


def classify_branch(t2: TorsionStage2) -> str:
    if t2.D.is_zero():
        return FLAT_CANDIDATE if t2.C.is_zero() else UNDETERMINED_BRANCH
    return GENERIC_BRANCH


def check(system: OdeSystem) -> Verdict:
    """Run the reduction and decide flat, generic or undetermined."""
    from .flat import flat_check
    from .generic import generic_reduce

    t1 = stage1_torsion(system)
    reduced = stage1_normalize(system, t1)
    t2 = stage2_torsion(reduced)
    branch = classify_branch(t2)
    if branch == FLAT_CANDIDATE:
        verdict = flat_check(reduced, t2)
    elif branch == GENERIC_BRANCH:
        verdict = generic_reduce(reduced, t2)
    else:
        verdict = undetermined("D = 0 but C != 0: branch not covered by the flat or generic analysis",
                               reduced.conditions)
    verdict.details.setdefault("stage1", t1.as_dict())
    verdict.details.setdefault("stage2", t2.as_dict())
    verdict.details.setdefault("branch", branch)
    return verdict
