"""Outcome of the reduction: flat, generic with invariants, or undetermined."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from ..symexpr import Expr

FLAT = "flat"
GENERIC = "generic"
UNDETERMINED = "undetermined"

INVARIANT_NAMES = tuple(f"{L}{i}" for L in "ABCD" for i in range(1, 6)) + tuple(f"I{i}" for i in range(1, 7))

# name -> (dependent coefficient, expression of it in the others)
RELATION_NAMES = ("A5=2D4+C4", "B4=A1+A4")
DEPENDENT_NAMES = ("A5", "B4")


@dataclass
class InvariantSet:
    """Coefficients of the identity-reduced coframe of the generic branch.

    ``coefficients`` holds the 26 names A1..A5, B1..B5, C1..C5, D1..D5,
    I1..I6 as functions on the base chart; ``relations`` holds the residuals
    ``A5 - 2 D4 - C4`` and ``B4 - A1 - A4``.
    """

    coefficients: dict
    relations: dict
    structure: dict = field(default_factory=dict, repr=False)

    @property
    def relations_checked(self) -> dict:
        return {k: v.is_zero() for k, v in self.relations.items()}

    def independent_names(self) -> tuple:
        """The names left after using each relation to eliminate one coefficient."""
        return tuple(n for n in INVARIANT_NAMES if n not in DEPENDENT_NAMES)

    def __getitem__(self, name: str) -> Expr:
        return self.coefficients[name]


@dataclass
class Verdict:
    kind: str
    reason: Optional[str] = None
    genericity_conditions: list = field(default_factory=list)
    invariants: Optional[InvariantSet] = None
    details: dict = field(default_factory=dict, repr=False)

    @property
    def is_flat(self) -> bool:
        return self.kind == FLAT

    def to_json(self) -> dict:
        inv = self.invariants
        return {
            "verdict": self.kind,
            "reason": self.reason,
            "genericity_conditions": [str(e) for e in self.genericity_conditions],
            "invariants": None if inv is None else {n: str(inv.coefficients[n]) for n in INVARIANT_NAMES},
            "relations": None if inv is None else dict(inv.relations_checked),
        }


def dedupe(conditions) -> list:
    out = []
    for c in conditions:
        if not c.is_constant() and c not in out:
            out.append(c)
    return out


def undetermined(reason: str, conditions=(), **details) -> Verdict:
    return Verdict(UNDETERMINED, reason, dedupe(conditions), None, dict(details))
