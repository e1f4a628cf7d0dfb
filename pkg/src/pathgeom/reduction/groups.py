"""Structure groups, torsion templates and group elements of each stage.

Matrices act on the coframe by ``eta -> g . eta`` and the connection part of
``d eta`` is ``pi ^ eta`` with ``pi`` valued in the listed Lie algebra.  All
indices passed to :func:`pattern` are 1-based, the rest is 0-based.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ..symexpr import DEFAULT, Expr, Registry
from .structure import MatrixAlgebra, Template, pattern

# Full structure group G: block lower-triangular matrices of the base coframe.
FULL_ALGEBRA = MatrixAlgebra({
    "alpha": {(0, 0): 1}, "beta": {(0, 1): 1}, "gamma": {(1, 1): 1},
    "eps": {(2, 1): 1}, "phi": {(2, 2): 1},
    "mu11": {(3, 1): 1}, "mu12": {(3, 2): 1}, "mu21": {(4, 1): 1}, "mu22": {(4, 2): 1},
    "v11": {(3, 3): 1}, "v12": {(3, 4): 1}, "v21": {(4, 3): 1}, "v22": {(4, 4): 1},
})

STAGE1_TEMPLATE = Template(patterns={
    "J": pattern((1, 2, 1, 3)),
    "A1": pattern((1, 2, 1, 4)), "A2": pattern((1, 2, 1, 5)),
    "B1": pattern((1, 3, 1, 4)), "B2": pattern((1, 3, 1, 5)),
})

# Residual algebra once J = 0, A = (0, 1), B = (1, 0).
STAGE1_RESIDUAL = MatrixAlgebra({
    "gamma": {(0, 0): 1, (1, 1): 1, (2, 2): 1},
    "beta": {(0, 1): 1},
    "v11": {(2, 2): 1, (3, 3): 1},
    "v12": {(2, 1): 1, (3, 4): 1},
    "v22": {(0, 0): -1, (2, 2): -1, (4, 4): 1},
    "mu11": {(3, 1): 1}, "mu12": {(3, 2): 1}, "mu21": {(4, 1): 1},
})

STAGE2_TEMPLATE = Template(patterns=dict(
    STAGE1_TEMPLATE.patterns,
    A=pattern((1, 3, 1, 2)), B=pattern((1, 3, 1, 3)),
    C=pattern((1, 5, 1, 3)), D=pattern((1, 5, 1, 4)),
))

# Connection-coefficient functionals of the first normalization that must
# vanish ("mod base" relations), as weights on the full-algebra absorption.
STAGE1_RELATIONS = {
    "mu22": {"mu22": 1},
    "v21": {"v21": 1},
    "eps-v12": {"eps": 1, "v12": -1},
    "alpha-gamma+v22": {"alpha": 1, "gamma": -1, "v22": 1},
    "phi-gamma-v11+v22": {"phi": 1, "gamma": -1, "v11": -1, "v22": 1},
}

# ---------------------------------------------------------------- flat branch

FLAT_ALGEBRA = MatrixAlgebra({
    "gamma": {(0, 0): 1, (1, 1): 1, (2, 2): 1},
    "v22": {(0, 0): -1, (2, 2): -1, (4, 4): 1},
    "beta": {(0, 1): 1},
    "v12": {(2, 1): 1, (3, 4): 1},
    "v11": {(2, 2): 1, (3, 3): 1},
    "mu21": {(3, 2): 1, (4, 1): 1},
})

BASE_CONSTANT = pattern((1, 2, 1, 5), (1, 3, 1, 4))

FLAT_TEMPLATE = Template(constant=BASE_CONSTANT, patterns={
    "A": pattern((1, 4, 1, 2)), "B": pattern((1, 4, 1, 3)),
})

# Order of the prolonged connection forms theta^1..theta^6.
THETA_NAMES = ("v11", "v12", "v22", "gamma", "beta", "mu21")

# Tableau directions of the flat prolongation: the s1 and s2 shifts.
FLAT_TABLEAU = {
    "s1": {("v12", 2): 1, ("v22", 1): 1, ("gamma", 1): 2, ("beta", 0): 1, ("mu21", 4): 1},
    "s2": {("beta", 1): 1},
}


def th(k: int) -> int:
    """1-based index of ``theta^k`` in the 11-form coframe (eta, theta)."""
    return 5 + k


PHI = 12  # 1-based index of Phi in the 12-form coframe (eta, theta, Phi)

PROLONGED_ALGEBRA = MatrixAlgebra({
    "Phi1": {(th(2) - 1, 2): 1, (th(3) - 1, 1): 1, (th(4) - 1, 1): 2, (th(5) - 1, 0): 1, (th(6) - 1, 4): 1},
    "Phi2": {(th(5) - 1, 1): 1},
}, n=11)

PROLONGED_FINAL_ALGEBRA = MatrixAlgebra({"Phi1": PROLONGED_ALGEBRA.generators["Phi1"]}, n=11)

# Fixed part of the prolonged structure equations (no Phi, no torsion).
PROLONGED_CONSTANT = pattern(
    (1, 1, th(4), 1), (-1, 1, th(3), 1), (1, 1, th(5), 2),
    (1, 2, th(4), 2), (1, 2, 1, 5),
    (1, 3, th(2), 2), (1, 3, th(4), 3), (1, 3, th(1), 3), (-1, 3, th(3), 3), (1, 3, 1, 4),
    (1, 4, th(6), 3), (1, 4, th(1), 4), (1, 4, th(2), 5),
    (1, 5, th(6), 2), (1, 5, th(3), 5),
    (1, th(1), th(5), 5), (1, th(1), th(6), 1),
    (1, th(2), th(1), th(2)), (-1, th(2), th(3), th(2)), (1, th(2), th(5), 4),
    (2, th(3), th(5), 5), (1, th(3), th(6), 1),
    (1, th(4), th(5), 5), (-1, th(4), th(6), 1),
    (-1, th(5), th(3), th(5)),
    (1, th(6), th(3), th(6)), (-1, th(6), th(4), th(6)),
)

PROLONGED_TEMPLATE = Template(constant=PROLONGED_CONSTANT, patterns={
    "A1": pattern((1, th(1), 5, 2), (1, th(2), 4, 2), (-1, th(4), 5, 2), (-1, th(5), 5, 1)),
    "A2": pattern((1, th(1), 3, 2), (1, th(6), 4, 2)),
    "A3": pattern((1, th(1), 4, 2)),
    "A4": pattern((1, th(1), 4, 3)),
    "A5": pattern((1, th(1), 5, 3), (1, th(2), 4, 3)),
    "B": pattern((1, th(2), 5, 2)),
    "C": pattern((1, th(3), 5, 2), (1, th(4), 5, 2)),
    "D1": pattern((1, th(4), 3, 2), (1, th(5), 3, 1)),
    "D2": pattern((1, th(4), 4, 2), (1, th(5), 4, 1)),
    "F": pattern((1, th(6), 3, 2)),
})

PROLONGED_FINAL_TEMPLATE = Template(constant=PROLONGED_CONSTANT)

# ------------------------------------------------------------- generic branch

GENERIC_ALGEBRA = MatrixAlgebra({
    "v11": {(0, 0): -1, (1, 1): -1, (3, 3): 1},
    "v22": {(0, 0): 1, (1, 1): 2, (2, 2): 1, (4, 4): 1},
    "v12": {(2, 1): 1, (3, 4): 1, (4, 1): 1},
    "beta": {(0, 1): 1},
})

GENERIC_CONSTANT = pattern((1, 2, 1, 5), (1, 3, 1, 4), (1, 5, 1, 4))

GENERIC_PATTERNS = {
    "A": pattern((1, 1, 5, 1), (1, 2, 5, 2), (1, 3, 5, 3)),
    "B": pattern((1, 2, 1, 2), (1, 3, 1, 3)),
    "C": pattern((1, 3, 4, 3)),
    "D": pattern((1, 4, 1, 2)),
    "E": pattern((1, 4, 3, 2)),
    "F": pattern((1, 4, 1, 3)),
    "G": pattern((1, 4, 5, 3)),
    "H": pattern((1, 5, 1, 2)),
    "I": pattern((1, 5, 4, 2)),
    "J": pattern((1, 5, 5, 2)),
}

GENERIC_TEMPLATE = Template(constant=GENERIC_CONSTANT, patterns=GENERIC_PATTERNS)

# Stage-2 torsion after A = B = C = 0, D = 1 (the constants of the generic start).
GENERIC_START_TEMPLATE = Template(constant=GENERIC_CONSTANT, patterns=dict(STAGE1_TEMPLATE.patterns))

# ------------------------------------------------------------- group elements


@dataclass
class GroupParams:
    """An element of the structure group G.

    ``S = [[a, b, 0, 0, 0], [0, c, 0, 0, 0], [0, e, f, 0, 0], [0, M, N]]`` with
    the 2x2 blocks ``M`` (columns M1, M2) and ``N`` in the last two rows.
    """

    a: Expr
    b: Expr
    c: Expr
    e: Expr
    f: Expr
    M: list = field(default_factory=list)
    N: list = field(default_factory=list)

    @classmethod
    def identity(cls, reg: Registry = DEFAULT) -> "GroupParams":
        one, zero = reg.one, reg.zero
        return cls(one, zero, one, zero, one, [[zero, zero], [zero, zero]], [[one, zero], [zero, one]])

    def matrix(self, reg: Registry = DEFAULT) -> list:
        z = reg.zero
        M, N = self.M, self.N
        return [
            [self.a, self.b, z, z, z],
            [z, self.c, z, z, z],
            [z, self.e, self.f, z, z],
            [z, M[0][0], M[0][1], N[0][0], N[0][1]],
            [z, M[1][0], M[1][1], N[1][0], N[1][1]],
        ]

    def det_N(self) -> Expr:
        return self.N[0][0] * self.N[1][1] - self.N[0][1] * self.N[1][0]

    def singular_factors(self) -> list:
        return [x for x in (self.a, self.c, self.f, self.det_N()) if x.is_zero()]


def translation(m11, m12, m21, reg: Registry = DEFAULT) -> list:
    """Unipotent element of the first residual group moving the M block."""
    o, z = reg.one, reg.zero
    return [[o, z, z, z, z], [z, o, z, z, z], [z, z, o, z, z], [z, m11, m12, o, z], [z, m21, z, z, o]]


def gamma_scaling(lam, reg: Registry = DEFAULT) -> list:
    """``exp`` of the gamma direction of the first residual group; D scales by ``1/lam``."""
    o, z = reg.one, reg.zero
    return [[lam if i == j and i < 3 else (o if i == j else z) for j in range(5)] for i in range(5)]


def generic_element(a, b, c, e, reg: Registry = DEFAULT) -> list:
    """Element of the generic residual group.

    The ``(4, 2)`` entry ``b^2 / (2a)`` comes from the square of the v12
    direction; without it the normalized constants are not preserved.
    """
    z = reg.zero
    return [
        [c / a, e, z, z, z],
        [z, c * c / a, z, z, z],
        [z, b * c / a, c, z, z],
        [z, b * b / (2 * a), z, a, b],
        [z, b * c / a, z, z, c],
    ]


def flat_group_element(params, reg: Registry = DEFAULT) -> list:
    """Element of the flat residual group in the rational chart ``params``.

    ``params = (l, m, n, x, y, w)``: diagonal scalings for gamma, v11 and v22
    (identity at 1) followed by the unipotent beta, v12 and mu21 directions
    (identity at 0).
    """
    lam, mu, nu, x, y, w = params
    diag = [lam / nu, lam, lam * mu / nu, mu, nu]
    g = [[diag[i] if i == j else reg.zero for j in range(5)] for i in range(5)]
    for name, t in (("beta", x), ("v12", y), ("mu21", w)):
        g = _matmul(g, _unipotent(name, t, reg), reg)
    return g


def _unipotent(name: str, t, reg: Registry) -> list:
    gen = FLAT_ALGEBRA.generators[name]
    out = [[reg.one if i == j else reg.zero for j in range(5)] for i in range(5)]
    for (r, c), v in gen.items():
        out[r][c] = out[r][c] + t * v
    return out


def _matmul(a, b, reg: Registry):
    n = len(a)
    return [[sum((a[i][k] * b[k][j] for k in range(n) if not a[i][k].is_zero()), reg.zero)
             for j in range(n)] for i in range(n)]


FLAT_READING = {"gamma": (1, 1), "v22": (4, 4), "v11": (3, 3), "beta": (0, 1), "v12": (3, 4), "mu21": (4, 1)}
