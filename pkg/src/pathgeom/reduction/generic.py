"""Generic branch (stage-2 ``D != 0``): reduction of the group to the identity.

``A = B = C = 0`` is reached with the M-block translation and ``D = 1`` with
the gamma scaling.  The four-dimensional residual group then acts on the
ten torsion functions ``A..J`` and the section ``A = 0, B = 1, C = 1,
I = 0`` removes it entirely.  What remains is a canonical coframe on the
base whose structure functions are the invariants.
"""

from __future__ import annotations

from dataclasses import dataclass

from .groups import gamma_scaling, generic_element, translation
from .pipeline import Stage1Reduction, TorsionStage2, apply_matrix, normal_form
from .structure import StageError, d_squared, structure_functions
from .verdict import GENERIC, INVARIANT_NAMES, InvariantSet, Verdict, dedupe, undetermined

__all__ = ["GenericTorsion", "generic_reduce", "generic_section", "invariants_from_structure"]

TORSION_NAMES = tuple("ABCDEFGHIJ")
# connection generator whose base components give each invariant family
_FAMILIES = {"A": "v11", "B": "v22", "C": "v12", "D": "beta"}
# torsion functions renamed I1..I6 once A, B, C, I are normalized
_I_SLOTS = ("D", "E", "F", "G", "H", "J")


@dataclass
class GenericTorsion:
    values: dict

    def __getattr__(self, name):
        try:
            return self.__dict__["values"][name]
        except KeyError:
            raise AttributeError(name) from None


def _normalize_d(reduced: Stage1Reduction, t2: TorsionStage2):
    reg = reduced.system.reg
    half = reg.const(1) / 2
    m12 = t2.C / t2.D
    S = translation(t2.A * half, m12, m12 - t2.B * half, reg)
    cf = apply_matrix(gamma_scaling(t2.D, reg), apply_matrix(S, reduced.coframe))
    C = structure_functions(cf)
    start = normal_form("generic_start").solve(C)
    bad = [k for k, v in start.torsion.items() if not v.is_zero()]
    bad += [k for k, v in start.extras.items() if not v.is_zero()]
    if bad:
        raise StageError(f"normalization A = B = C = 0, D = 1 failed at {bad[:3]}")
    Z = start.connection
    # B4 = D3 of the first residual group's coefficients
    rel = Z[("mu12", 3)] - (Z[("gamma", 2)] - 2 * Z[("v22", 2)] + Z[("v11", 2)])
    return cf, C, rel


def generic_section(T: GenericTorsion, reg):
    """``(a, b, c, e)`` carrying ``A, B, C, I`` to ``0, 1, 1, 0``; needs ``B0 C0 != 0``."""
    a = T.C
    c = T.B * T.C
    b = -T.I
    e = c * (T.A + T.I) / (2 * a)
    return a, b, c, e


def invariants_from_structure(result) -> dict:
    """Read A1..D5 from the connection decomposition and I1..I6 from the torsion."""
    out = {}
    for letter, gen in _FAMILIES.items():
        for i in range(1, 6):
            out[f"{letter}{i}"] = result.connection[(gen, i - 1)]
    for i, name in enumerate(_I_SLOTS, 1):
        out[f"I{i}"] = result.torsion[name]
    return out


def generic_reduce(reduced: Stage1Reduction, t2: TorsionStage2) -> Verdict:
    reg = reduced.system.reg
    conds = list(reduced.conditions)
    if t2.D.is_zero():
        return undetermined("stage-2 torsion D vanishes", conds)
    conds.append(t2.D)
    cf_start, C_start, rel_b4_d3 = _normalize_d(reduced, t2)
    res = normal_form("generic").solve(C_start)
    if any(not v.is_zero() for v in res.extras.values()):
        raise StageError("generic structure equations have torsion outside A..J")
    T0 = GenericTorsion(dict(res.torsion))
    for name in ("B", "C"):
        if T0.values[name].is_zero():
            return undetermined(f"generic torsion {name}0 vanishes, the final normalization needs it nonzero",
                                conds, generic_torsion=T0.values)
    conds += [T0.B, T0.C]
    a, b, c, e = generic_section(T0, reg)
    cf = apply_matrix(generic_element(a, b, c, e, reg), cf_start)
    C = structure_functions(cf)
    final = normal_form("generic").solve(C)
    if any(not v.is_zero() for v in final.extras.values()):
        raise StageError("final structure equations have torsion outside A..J")
    target = {"A": reg.zero, "B": reg.one, "C": reg.one, "I": reg.zero}
    off = [k for k, v in target.items() if final.torsion[k] != v]
    if off:
        raise StageError(f"final normalization failed for {off}")
    coeffs = invariants_from_structure(final)
    relations = {
        "A5=2D4+C4": coeffs["A5"] - 2 * coeffs["D4"] - coeffs["C4"],
        "B4=A1+A4": coeffs["B4"] - coeffs["A1"] - coeffs["A4"],
    }
    inv = InvariantSet({n: coeffs[n] for n in INVARIANT_NAMES}, relations, C)
    d2 = d_squared(cf, C)
    details = {
        "generic_torsion": T0.values,
        "section": {"a": a, "b": b, "c": c, "e": e},
        "B4=D3": rel_b4_d3,
        "coframe": cf,
        "d_squared_zero": all(v.is_zero() for v in d2.values()),
    }
    return Verdict(GENERIC, None, dedupe(conds), inv, details)
