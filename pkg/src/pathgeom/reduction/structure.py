"""Structure equations of coframes and their torsion normal forms.

For a coframe ``eta`` the structure functions are the coefficients
``C[(i, j, k)]`` (``j < k``, 0-based) in ``d eta^i = sum C[i,j,k] eta^j ^ eta^k``.

A structure group with Lie algebra spanned by constant matrices ``E_r``
contributes connection terms ``pi_r E_r[i][j] ^ eta^j``.  Shifting ``pi_r``
by multiples of ``eta^m`` moves the structure functions inside the
*absorption space*; what survives modulo that space is the intrinsic
torsion.  :class:`NormalForm` writes arbitrary structure functions as

    C = absorbed part + constant template + sum_t tau_t * pattern_t + extras

where the patterns are the named torsion slots of a reduction stage and the
extras complete them to a complement of the absorption space.  Extras are
forced to vanish by the Bianchi identities for a consistent stage, which the
caller checks.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Mapping, Sequence

import flint

from ..exterior import Chart, Coframe, DiffForm, ext_d, express_in_coframe, wedge
from ..symexpr import DEFAULT, Expr, Registry


def slots(n: int) -> list:
    return [(i, j, k) for i in range(n) for j, k in combinations(range(n), 2)]


def slot(row: int, a: int, b: int) -> tuple:
    """Slot of the ``d eta^row`` coefficient of ``eta^a eta^b`` (1-based).

    Returns ``(key, sign)`` with the 0-based sorted key and the sign relating
    ``eta^a ^ eta^b`` to the sorted wedge.
    """
    if a == b:
        raise ValueError("repeated index in a 2-form slot")
    if a < b:
        return (row - 1, a - 1, b - 1), 1
    return (row - 1, b - 1, a - 1), -1


def pattern(*entries) -> dict:
    """Build a slot vector from ``(coeff, row, a, b)`` tuples with 1-based indices."""
    vec: dict = {}
    for coeff, row, a, b in entries:
        key, sign = slot(row, a, b)
        vec[key] = vec.get(key, Fraction(0)) + sign * Fraction(coeff)
    return {k: v for k, v in vec.items() if v}


def structure_functions(coframe: Coframe) -> dict:
    """``C[(i, j, k)]`` for ``d eta^i`` expressed in the coframe."""
    out = {}
    for i, form in enumerate(coframe.forms):
        for (j, k), c in express_in_coframe(ext_d(form), coframe).items():
            out[(i, j, k)] = c
    return out


class MatrixAlgebra:
    """Linear span of named constant ``n x n`` matrices.

    ``generators[name]`` is a sparse dict ``{(row, col): coeff}`` (0-based).
    """

    def __init__(self, generators: Mapping[str, Mapping[tuple, Fraction]], n: int = 5):
        self.n = n
        self.names = tuple(generators)
        self.generators = {k: {rc: Fraction(v) for rc, v in m.items() if v} for k, m in generators.items()}

    def __len__(self):
        return len(self.names)

    def matrix(self, coeffs: Mapping[str, object], reg: Registry = DEFAULT) -> list:
        out = [[reg.zero] * self.n for _ in range(self.n)]
        for name, c in coeffs.items():
            for (r, col), v in self.generators[name].items():
                out[r][col] = out[r][col] + c * v
        return out

    def absorption_columns(self) -> list:
        """Slot vectors of ``pi_r = eta^m`` for every generator ``r`` and ``m``."""
        cols = []
        for name in self.names:
            gen = self.generators[name]
            for m in range(self.n):
                vec: dict = {}
                for (i, j), v in gen.items():
                    if j == m:
                        continue
                    key = (i, min(m, j), max(m, j))
                    sign = 1 if m < j else -1
                    vec[key] = vec.get(key, 0) + sign * v
                cols.append(((name, m), {k: x for k, x in vec.items() if x}))
        return cols


def _rref_pivots(mat: flint.fmpq_mat):
    rref, rank = mat.rref()
    pivots = []
    row = 0
    for col in range(mat.ncols()):
        if row < rank and rref[row, col] != 0:
            pivots.append(col)
            row += 1
    return rref, rank, pivots


def _matrix(columns: Sequence[Mapping[tuple, Fraction]], rows: Sequence[tuple]) -> flint.fmpq_mat:
    index = {r: i for i, r in enumerate(rows)}
    mat = flint.fmpq_mat(len(rows), len(columns))
    for c, col in enumerate(columns):
        for key, v in col.items():
            row = index.get(key)
            if row is not None:
                mat[row, c] = flint.fmpq(v.numerator, v.denominator)
    return mat


def nullspace(mat: flint.fmpq_mat) -> list:
    rref, rank, pivots = _rref_pivots(mat)
    free = [c for c in range(mat.ncols()) if c not in pivots]
    basis = []
    for fcol in free:
        vec = [Fraction(0)] * mat.ncols()
        vec[fcol] = Fraction(1)
        for r, pcol in enumerate(pivots):
            x = rref[r, fcol]
            vec[pcol] = -Fraction(int(x.p), int(x.q))
        basis.append(vec)
    return basis


class StageError(Exception):
    """A reduction stage could not be set up or solved."""


@dataclass
class Template:
    """Torsion shape of a reduction stage.

    ``constant`` is a fixed slot vector (normalized torsion), ``patterns``
    maps torsion names to slot vectors (a name may span several slots).
    """

    constant: dict = field(default_factory=dict)
    patterns: dict = field(default_factory=dict)


@dataclass
class NormalFormResult:
    torsion: dict
    extras: dict
    connection: dict

    def connection_form(self, name: str, n: int, reg: Registry = DEFAULT) -> list:
        return [self.connection.get((name, m), reg.zero) for m in range(n)]


class NormalForm:
    """Solver for ``C = absorbed + template`` at one reduction stage."""

    def __init__(self, algebra: MatrixAlgebra, template: Template, reg: Registry = DEFAULT):
        self.algebra = algebra
        self.template = template
        self.reg = reg
        n = algebra.n
        self.rows = slots(n)
        absorb = algebra.absorption_columns()
        self.absorb_keys = [k for k, _ in absorb]
        absorb_cols = [v for _, v in absorb]
        pattern_names = list(template.patterns)
        pattern_cols = [template.patterns[p] for p in pattern_names]

        rank_w = _matrix(absorb_cols, self.rows).rank() if absorb_cols else 0
        self.absorption_rank = rank_w
        base_cols = pattern_cols + absorb_cols
        rank_pw = _matrix(base_cols, self.rows).rank() if base_cols else 0
        if rank_pw != rank_w + len(pattern_cols):
            raise StageError("torsion patterns are not independent modulo absorption")

        # Complement of the span by unit slots: pivots of [P | W | I] that
        # land in the identity block, i.e. the greedy choice in slot order.
        columns = pattern_cols + absorb_cols
        k = len(columns)
        aug = flint.fmpq_mat(len(self.rows), k + len(self.rows))
        index = {r: i for i, r in enumerate(self.rows)}
        for c, col in enumerate(columns):
            for key, v in col.items():
                aug[index[key], c] = flint.fmpq(v.numerator, v.denominator)
        for i in range(len(self.rows)):
            aug[i, k + i] = 1
        _, _, aug_pivots = _rref_pivots(aug)
        self.extra_slots = [self.rows[c - k] for c in aug_pivots if c >= k]
        self.pattern_names = pattern_names
        self.unknowns = [("torsion", p) for p in pattern_names] + [("absorb", key) for key in self.absorb_keys]

        # Away from the extra slots the system only involves patterns and
        # absorption; pick independent columns and invert that square block.
        extra_set = set(self.extra_slots)
        inner_rows = [r for r in self.rows if r not in extra_set]
        inner = _matrix(columns, inner_rows)
        _, rank, pivots = _rref_pivots(inner)
        assert rank == len(inner_rows) == rank_pw
        square = flint.fmpq_mat(rank, rank)
        for r in range(rank):
            for c, pc in enumerate(pivots):
                square[r, c] = inner[r, pc]
        inv = square.inv()
        self._solution = {}
        for c, pc in enumerate(pivots):
            combo = []
            for r in range(rank):
                x = inv[c, r]
                if x != 0:
                    combo.append((inner_rows[r], Fraction(int(x.p), int(x.q))))
            self._solution[self.unknowns[pc]] = combo
        # extra = C[slot] - sum over solved unknowns of their column entry
        self._extra_solution = {}
        for key in self.extra_slots:
            combo = {key: Fraction(1)}
            for c, pc in enumerate(pivots):
                coeff = columns[pc].get(key)
                if coeff:
                    for row, x in self._solution[self.unknowns[pc]]:
                        combo[row] = combo.get(row, Fraction(0)) - coeff * x
            self._extra_solution[key] = [(r, x) for r, x in combo.items() if x]
        kernel_mat = _matrix(absorb_cols, self.rows) if absorb_cols else None
        self.kernel = nullspace(kernel_mat) if kernel_mat is not None else []

    def solve(self, C: Mapping[tuple, Expr]) -> NormalFormResult:
        reg = self.reg
        rhs = dict(C)
        for key, v in self.template.constant.items():
            rhs[key] = rhs.get(key, reg.zero) - v
        values = {}
        for unknown, combo in self._solution.items():
            acc = reg.zero
            for key, coeff in combo:
                c = rhs.get(key)
                if c is not None and not c.is_zero():
                    acc = acc + c * coeff
            values[unknown] = acc
        torsion = {p: values.get(("torsion", p), reg.zero) for p in self.pattern_names}
        extras = {}
        for key, combo in self._extra_solution.items():
            acc = reg.zero
            for row, coeff in combo:
                c = rhs.get(row)
                if c is not None and not c.is_zero():
                    acc = acc + c * coeff
            extras[key] = acc
        connection = {k: values.get(("absorb", k), reg.zero) for k in self.absorb_keys}
        return NormalFormResult(torsion, extras, connection)

    def functional_is_well_defined(self, weights: Mapping[tuple, Fraction]) -> bool:
        """True when ``sum weights[(gen, m)] * Z[gen, m]`` ignores the prolongation."""
        for vec in self.kernel:
            total = sum((weights.get(k, 0) * vec[i] for i, k in enumerate(self.absorb_keys)), Fraction(0))
            if total:
                return False
        return True

    def prolongation_dimension(self) -> int:
        return len(self.kernel)


def frame_chart(n: int, reg: Registry = DEFAULT) -> Chart:
    return Chart([f"e{i + 1}" for i in range(n)], reg)


def transform_structure(C: Mapping[tuple, Expr], g: Sequence[Sequence[Expr]], n: int,
                        reg: Registry = DEFAULT) -> dict:
    """Structure functions of ``g . eta`` for a *constant* matrix ``g``."""
    chart = frame_chart(n, reg)
    rows = {}
    for (i, j, k), c in C.items():
        rows.setdefault(i, {})[(j, k)] = c
    d_forms = [DiffForm(chart, 2, rows.get(i, {})) for i in range(n)]
    new_frame = Coframe([chart.one_form(row) for row in g])
    out = {}
    for i in range(n):
        total = DiffForm(chart, 2, {})
        for l in range(n):
            if not g[i][l].is_zero() and d_forms[l].terms:
                total = total + d_forms[l] * g[i][l]
        for (j, k), v in express_in_coframe(total, new_frame).items():
            out[(i, j, k)] = v
    return out


def structure_from_symbols(template: Template, symbols: Mapping[str, Expr], reg: Registry = DEFAULT) -> dict:
    """Structure functions ``constant + sum symbols[name] * pattern[name]``."""
    C: dict = {}
    for key, v in template.constant.items():
        C[key] = C.get(key, reg.zero) + v
    for name, vec in template.patterns.items():
        s = symbols.get(name)
        if s is None:
            continue
        for key, v in vec.items():
            C[key] = C.get(key, reg.zero) + s * v
    return {k: v for k, v in C.items() if not v.is_zero()}


def d_squared(coframe: Coframe, C: Mapping[tuple, Expr]) -> dict:
    """Coefficients of ``d(d eta^i)`` rebuilt from the structure functions.

    Uses ``d C = sum_m X_m(C) eta^m`` with frame derivatives of the coframe,
    so a nonzero entry flags inconsistent structure functions.
    """
    n = coframe.dim
    reg = coframe.chart.reg
    chart = frame_chart(n, reg)
    rows: dict = {}
    for (i, j, k), c in C.items():
        rows.setdefault(i, {})[(j, k)] = c
    d_eta = [DiffForm(chart, 2, rows.get(i, {})) for i in range(n)]
    basis = [chart.one_form([reg.one if m == i else reg.zero for m in range(n)]) for i in range(n)]
    out = {}
    for i in range(n):
        total = DiffForm(chart, 3, {})
        for (j, k), c in rows.get(i, {}).items():
            dc = chart.one_form(coframe.derivatives(c))
            total = total + wedge(wedge(dc, basis[j]), basis[k])
            total = total + wedge(d_eta[j], basis[k]) * c - wedge(basis[j], d_eta[k]) * c
        for key, v in total.terms.items():
            out[(i,) + key] = v
    return out
