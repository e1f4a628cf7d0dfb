"""Geodesic-form systems ``y''^i + Gamma^i_jk(y) v^j v^k = 0`` and their curvature.

Indices are 0-based in code: ``gamma[i][j][k]`` is ``Gamma^{i+1}_{j+1 k+1}``
and ``R[i][j][k][l]`` is

    R^i_{jkl} = d_k Gamma^i_{lj} - d_l Gamma^i_{kj}
                + Gamma^i_{km} Gamma^m_{lj} - Gamma^i_{lm} Gamma^m_{kj}.
"""

from __future__ import annotations

from dataclasses import dataclass

from .ode_model import OdeSystem
from .symexpr import Expr

__all__ = ["Christoffel", "CurvatureTensor", "NotQuadratic", "curvature", "extract_christoffel",
           "is_flat_connection"]

COORDS = ("y1", "y2")


class NotQuadratic(ValueError):
    """The right-hand side is not a quadratic form in the velocities with y-dependent coefficients."""


@dataclass(frozen=True)
class Christoffel:
    gamma: tuple  # gamma[i][j][k], symmetric in j, k

    def __post_init__(self):
        for i in range(2):
            if self.gamma[i][0][1] != self.gamma[i][1][0]:
                raise ValueError("Christoffel symbols must be symmetric in the lower indices")

    @classmethod
    def from_entries(cls, reg, entries: dict) -> "Christoffel":
        """``entries[(i, j, k)]`` with 1-based indices; the symmetric partner is filled in."""
        g = [[[reg.zero] * 2 for _ in range(2)] for _ in range(2)]
        for (i, j, k), v in entries.items():
            v = v if isinstance(v, Expr) else reg.const(v)
            g[i - 1][j - 1][k - 1] = v
            g[i - 1][k - 1][j - 1] = v
        return cls(tuple(tuple(tuple(r) for r in m) for m in g))


@dataclass(frozen=True)
class CurvatureTensor:
    R: tuple  # R[i][j][k][l]

    def nonzero_components(self) -> list:
        return [(i + 1, j + 1, k + 1, l + 1)
                for i in range(2) for j in range(2) for k in range(2) for l in range(2)
                if not self.R[i][j][k][l].is_zero()]


def extract_christoffel(system: OdeSystem) -> Christoffel:
    reg = system.reg
    out = []
    for label, rhs in (("f", system.f), ("g", system.g)):
        if rhs.depends_on("t"):
            raise NotQuadratic(f"{label} depends on t")
        den = rhs.denominator()
        if den.depends_on("v1") or den.depends_on("v2"):
            raise NotQuadratic(f"{label} is not polynomial in the velocities")
        num = rhs.numerator()
        by_v1 = num.poly_coeffs("v1")
        terms = {}
        for d1, c in enumerate(by_v1):
            for d2, cc in enumerate(c.poly_coeffs("v2")):
                if cc.is_zero():
                    continue
                if d1 + d2 != 2:
                    raise NotQuadratic(f"{label} has a term of velocity degree {d1 + d2}")
                terms[(d1, d2)] = cc / den
        g11 = -terms.get((2, 0), reg.zero)
        g22 = -terms.get((0, 2), reg.zero)
        g12 = -terms.get((1, 1), reg.zero) / 2
        out.append(((g11, g12), (g12, g22)))
    return Christoffel(tuple(out))


def curvature(chr_: Christoffel) -> CurvatureTensor:
    G = chr_.gamma
    reg = G[0][0][0].reg
    R = [[[[reg.zero] * 2 for _ in range(2)] for _ in range(2)] for _ in range(2)]
    for i in range(2):
        for j in range(2):
            for k in range(2):
                for l in range(2):
                    v = G[i][l][j].diff(COORDS[k]) - G[i][k][j].diff(COORDS[l])
                    for m in range(2):
                        v = v + G[i][k][m] * G[m][l][j] - G[i][l][m] * G[m][k][j]
                    R[i][j][k][l] = v
    return CurvatureTensor(tuple(tuple(tuple(tuple(r) for r in b) for b in a) for a in R))


def is_flat_connection(chr_: Christoffel) -> bool:
    return not curvature(chr_).nonzero_components()
