"""Fractal-linear maps of the plane with time, and constant structure equations.

A fractal-linear map sends ``(y, t)`` to

    Y^i = (b^i_0 + b^i_1 y1 + b^i_2 y2) / (a0 + a1 y1 + a2 y2)
    T   = (t + c0 + c1 y1 + c2 y2) / (a0 + a1 y1 + a2 y2)

and is identified with the 4x4 matrix :func:`phi` acting on the homogeneous
vector ``(t, 1, y1, y2)``.  Composition and inversion go through that matrix.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import flint

from .ode_model import OdeSystem, load_system
from .symexpr import DEFAULT, PoleError, Registry

__all__ = [
    "ConstantStructure",
    "FractalLinearMap",
    "STRUCTURE_SIX",
    "SplitMix64",
    "compose",
    "inverse",
    "jacobi_check",
    "act",
    "phi",
    "pushforward_trivial",
    "random_map",
]


def _q(x) -> Fraction:
    return x if isinstance(x, Fraction) else Fraction(x)


@dataclass(frozen=True)
class FractalLinearMap:
    a: tuple
    c: tuple
    b: tuple  # ((b10, b11, b12), (b20, b21, b22))

    def __post_init__(self):
        object.__setattr__(self, "a", tuple(_q(x) for x in self.a))
        object.__setattr__(self, "c", tuple(_q(x) for x in self.c))
        object.__setattr__(self, "b", tuple(tuple(_q(x) for x in row) for row in self.b))
        if len(self.a) != 3 or len(self.c) != 3 or len(self.b) != 2 or any(len(r) != 3 for r in self.b):
            raise ValueError("a and c take three entries, b two rows of three")
        if _fmat(phi(self)).det() == 0:
            raise PoleError("singular fractal-linear map")

    @classmethod
    def identity(cls) -> "FractalLinearMap":
        return cls((1, 0, 0), (0, 0, 0), ((0, 1, 0), (0, 0, 1)))

    @classmethod
    def time_translation(cls, c0) -> "FractalLinearMap":
        return cls((1, 0, 0), (c0, 0, 0), ((0, 1, 0), (0, 0, 1)))

    @classmethod
    def from_matrix(cls, M: Sequence[Sequence]) -> "FractalLinearMap":
        M = [[_q(x) for x in row] for row in M]
        if [M[i][0] for i in range(4)] != [1, 0, 0, 0]:
            raise ValueError("first column must be (1, 0, 0, 0)")
        return cls(tuple(M[1][1:]), tuple(M[0][1:]), (tuple(M[2][1:]), tuple(M[3][1:])))

    def to_json(self) -> dict:
        return {"a": [str(x) for x in self.a], "c": [str(x) for x in self.c],
                "b": [[str(x) for x in row] for row in self.b]}

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)

    @classmethod
    def from_json(cls, data) -> "FractalLinearMap":
        if isinstance(data, str):
            data = json.loads(data)
        return cls(tuple(Fraction(x) for x in data["a"]), tuple(Fraction(x) for x in data["c"]),
                   tuple(tuple(Fraction(x) for x in row) for row in data["b"]))

    def exprs(self, reg: Registry = DEFAULT) -> tuple:
        """``(Y1, Y2, T)`` as expressions in ``y1, y2, t``."""
        y1, y2, t = reg.vars("y1", "y2", "t")
        den = self.a[0] + self.a[1] * y1 + self.a[2] * y2
        Y = [(r[0] + r[1] * y1 + r[2] * y2) / den for r in self.b]
        T = (t + self.c[0] + self.c[1] * y1 + self.c[2] * y2) / den
        return Y[0], Y[1], T


def phi(m: FractalLinearMap) -> list:
    return [
        [Fraction(1), m.c[0], m.c[1], m.c[2]],
        [Fraction(0), m.a[0], m.a[1], m.a[2]],
        [Fraction(0), *m.b[0]],
        [Fraction(0), *m.b[1]],
    ]


def _fmat(M) -> flint.fmpq_mat:
    return flint.fmpq_mat(len(M), len(M[0]), [flint.fmpq(x.numerator, x.denominator) for row in M for x in row])


def _from_fmat(F: flint.fmpq_mat) -> list:
    return [[Fraction(int(F[i, j].p), int(F[i, j].q)) for j in range(F.ncols())] for i in range(F.nrows())]


def compose(m1: FractalLinearMap, m2: FractalLinearMap) -> FractalLinearMap:
    """``m1 o m2`` (apply ``m2`` first)."""
    return FractalLinearMap.from_matrix(_from_fmat(_fmat(phi(m1)) * _fmat(phi(m2))))


def inverse(m: FractalLinearMap) -> FractalLinearMap:
    return FractalLinearMap.from_matrix(_from_fmat(_fmat(phi(m)).inv()))


def act(m: FractalLinearMap, point: Sequence) -> tuple:
    """Image of ``(y1, y2, t)``."""
    y1, y2, t = (_q(x) for x in point)
    den = m.a[0] + m.a[1] * y1 + m.a[2] * y2
    if den == 0:
        raise PoleError("point lies on the pole line of the map")
    Y = tuple((r[0] + r[1] * y1 + r[2] * y2) / den for r in m.b)
    return Y[0], Y[1], (t + m.c[0] + m.c[1] * y1 + m.c[2] * y2) / den


def pushforward_trivial(m: FractalLinearMap, reg: Registry = DEFAULT) -> OdeSystem:
    """System whose solutions are carried by ``m`` to straight lines.

    Along a solution, ``J v = alpha tau`` with ``J = dY/dy``,
    ``tau = T_t + T_y v`` and a constant direction ``alpha``.  Differentiating
    once more and eliminating ``alpha`` leaves the linear system

        (J - alpha T_y) y'' = -Y_yy(v, v) + alpha (T_tt + 2 T_ty v + T_yy(v, v))

    which Cramer's rule solves for ``y''``.
    """
    Y1, Y2, T = m.exprs(reg)
    v = reg.vars("v1", "v2")
    ys = ("y1", "y2")
    Ys = (Y1, Y2)
    J = [[Yi.diff(y) for y in ys] for Yi in Ys]
    Ty = [T.diff(y) for y in ys]
    tau = T.diff("t") + Ty[0] * v[0] + Ty[1] * v[1]
    alpha = [(J[i][0] * v[0] + J[i][1] * v[1]) / tau for i in range(2)]

    def quad(e):
        return sum((e.diff(ys[j]).diff(ys[k]) * v[j] * v[k] for j in range(2) for k in range(2)), reg.zero)

    accel_T = T.diff("t").diff("t") + 2 * (T.diff("t").diff("y1") * v[0] + T.diff("t").diff("y2") * v[1]) + quad(T)
    rhs = [-quad(Ys[i]) + alpha[i] * accel_T for i in range(2)]
    L = [[J[i][j] - alpha[i] * Ty[j] for j in range(2)] for i in range(2)]
    det = L[0][0] * L[1][1] - L[0][1] * L[1][0]
    if det.is_zero():
        raise PoleError("degenerate line elimination")
    f = (rhs[0] * L[1][1] - L[0][1] * rhs[1]) / det
    g = (L[0][0] * rhs[1] - L[1][0] * rhs[0]) / det
    return load_system(f, g, reg)


class SplitMix64:
    """The splitmix64 generator (Steele, Lea and Flood), used for reproducible sampling."""

    MASK = (1 << 64) - 1

    def __init__(self, seed: int):
        self.state = seed & self.MASK

    def next(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & self.MASK
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & self.MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & self.MASK
        return z ^ (z >> 31)

    def choice(self, n: int) -> int:
        return self.next() % n


_NUMERATORS = (-2, -1, 0, 1, 2)
_DENOMINATORS = (1, 2)


def random_map(seed: int) -> FractalLinearMap:
    """Deterministic map with entries ``k / d``, ``k`` in ``-2..2``, ``d`` in ``{1, 2}``.

    Entries are drawn in the order ``a0..a2, c0..c2, b10..b22``; singular
    draws are rejected and redrawn from the same stream.
    """
    rng = SplitMix64(seed)
    while True:
        vals = [Fraction(_NUMERATORS[rng.choice(5)], _DENOMINATORS[rng.choice(2)]) for _ in range(12)]
        try:
            return FractalLinearMap(tuple(vals[0:3]), tuple(vals[3:6]), (tuple(vals[6:9]), tuple(vals[9:12])))
        except PoleError:
            continue


# ------------------------------------------------------------ constant structures


@dataclass(frozen=True)
class ConstantStructure:
    """``dE^k = sum_{i<j} c[k][(i, j)] E^i ^ E^j`` with constant ``c``."""

    names: tuple
    constants: tuple  # per k: dict {(i, j): Fraction} with i < j

    @property
    def n(self) -> int:
        return len(self.names)

    @classmethod
    def from_terms(cls, names: Sequence[str], terms: Iterable[tuple]) -> "ConstantStructure":
        """Build from ``(target, coeff, left, right)`` meaning ``d target += coeff * left ^ right``."""
        index = {n: i for i, n in enumerate(names)}
        consts = [dict() for _ in names]
        for target, coeff, left, right in terms:
            i, j = index[left], index[right]
            if i == j:
                raise ValueError("a wedge of a form with itself vanishes")
            sign = 1 if i < j else -1
            key = (min(i, j), max(i, j))
            row = consts[index[target]]
            row[key] = row.get(key, Fraction(0)) + sign * Fraction(coeff)
        return cls(tuple(names), tuple({k: v for k, v in row.items() if v} for row in consts))

    def c(self, k: int, i: int, j: int) -> Fraction:
        """Antisymmetric constant ``c^k_{ij}``."""
        if i == j:
            return Fraction(0)
        if i < j:
            return self.constants[k].get((i, j), Fraction(0))
        return -self.constants[k].get((j, i), Fraction(0))

    def slot_dict(self) -> dict:
        """Constants keyed ``(k, i, j)`` like :func:`~pathgeom.reduction.structure.structure_functions`."""
        return {(k,) + key: v for k, row in enumerate(self.constants) for key, v in row.items()}

    def with_flipped(self, k: int, key: tuple) -> "ConstantStructure":
        rows = [dict(r) for r in self.constants]
        rows[k][key] = -rows[k][key]
        return ConstantStructure(self.names, tuple(rows))


def jacobi_check(s: ConstantStructure) -> bool:
    """``d^2 = 0`` for the constant structure, i.e. the Jacobi identity.

    The ``E^a E^b E^c`` coefficient of ``d dE^k`` is, up to a factor 2, the
    cyclic sum over ``(a, b, c)`` of ``sum_m c^m_{ab} c^k_{mc}``.
    """
    n = s.n
    for k in range(n):
        for a in range(n):
            for b in range(a + 1, n):
                for c in range(b + 1, n):
                    total = Fraction(0)
                    for x, y, z in ((a, b, c), (b, c, a), (c, a, b)):
                        for m in range(n):
                            cm = s.c(m, x, y)
                            if cm:
                                total += cm * s.c(k, m, z)
                    if total:
                        return False
    return True


SIX_NAMES = ("eta1", "eta2", "eta3", "eta4", "eta5",
             "theta1", "theta2", "theta3", "theta4", "theta5", "theta6", "Phi")

# Maurer-Cartan equations of the fractal-linear group in the flat coframe.
STRUCTURE_SIX = ConstantStructure.from_terms(SIX_NAMES, [
    ("eta1", 1, "theta4", "eta1"), ("eta1", -1, "theta3", "eta1"), ("eta1", 1, "theta5", "eta2"),
    ("eta2", 1, "theta4", "eta2"), ("eta2", 1, "eta1", "eta5"),
    ("eta3", 1, "theta2", "eta2"), ("eta3", 1, "theta4", "eta3"), ("eta3", 1, "theta1", "eta3"),
    ("eta3", -1, "theta3", "eta3"), ("eta3", 1, "eta1", "eta4"),
    ("eta4", 1, "theta6", "eta3"), ("eta4", 1, "theta1", "eta4"), ("eta4", 1, "theta2", "eta5"),
    ("eta5", 1, "theta6", "eta2"), ("eta5", 1, "theta3", "eta5"),
    ("theta1", 1, "theta5", "eta5"), ("theta1", 1, "theta6", "eta1"),
    ("theta2", 1, "Phi", "eta3"), ("theta2", 1, "theta1", "theta2"), ("theta2", -1, "theta3", "theta2"),
    ("theta2", 1, "theta5", "eta4"),
    ("theta3", 1, "Phi", "eta2"), ("theta3", 2, "theta5", "eta5"), ("theta3", 1, "theta6", "eta1"),
    ("theta4", 2, "Phi", "eta2"), ("theta4", 1, "theta5", "eta5"), ("theta4", -1, "theta6", "eta1"),
    ("theta5", 1, "Phi", "eta1"), ("theta5", -1, "theta3", "theta5"),
    ("theta6", 1, "Phi", "eta5"), ("theta6", 1, "theta3", "theta6"), ("theta6", -1, "theta4", "theta6"),
    ("Phi", 1, "Phi", "theta4"), ("Phi", 1, "theta5", "theta6"),
])
