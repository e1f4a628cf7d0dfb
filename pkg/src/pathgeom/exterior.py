"""Exterior algebra and calculus on a coordinate chart.

Forms store their coefficients against strictly increasing index tuples of
the chart's coordinates.  Coefficients may mention registry variables that are
not chart coordinates; :func:`ext_d` treats those as constants, which is how
group parameters are frozen when a structure group acts on a coframe.
"""

from __future__ import annotations

from typing import Iterable, Mapping, Sequence

from .linalg import SingularMatrixError, determinant, inverse_and_det
from .symexpr import DEFAULT, Expr, Registry

__all__ = [
    "Chart",
    "Coframe",
    "DiffForm",
    "express_in_coframe",
    "ext_d",
    "pullback",
    "wedge",
]


class Chart:
    """Ordered coordinates; the order fixes every sign convention."""

    def __init__(self, coords: Iterable[str], registry: Registry = DEFAULT):
        self.coords = tuple(coords)
        if len(set(self.coords)) != len(self.coords):
            raise ValueError("chart coordinates must be distinct")
        self.reg = registry
        self.index = {c: i for i, c in enumerate(self.coords)}

    @property
    def dim(self) -> int:
        return len(self.coords)

    def __eq__(self, other):
        return isinstance(other, Chart) and self.coords == other.coords and self.reg is other.reg

    def __hash__(self):
        return hash(self.coords)

    def __repr__(self):
        return f"Chart({list(self.coords)!r})"

    def d(self, name: str) -> "DiffForm":
        return DiffForm(self, 1, {(self.index[name],): self.reg.one})

    def scalar(self, value) -> "DiffForm":
        value = value if isinstance(value, Expr) else self.reg.const(value)
        return DiffForm(self, 0, {(): value} if not value.is_zero() else {})

    def zero(self, degree: int = 0) -> "DiffForm":
        return DiffForm(self, degree, {})

    def one_form(self, coeffs: Sequence) -> "DiffForm":
        terms = {}
        for i, c in enumerate(coeffs):
            c = c if isinstance(c, Expr) else self.reg.const(c)
            if not c.is_zero():
                terms[(i,)] = c
        return DiffForm(self, 1, terms)


def _merge(a: tuple, b: tuple):
    """Sign and sorted tuple of the wedge of two basis monomials."""
    if set(a) & set(b):
        return 0, None
    seq = list(a + b)
    sign = 1
    # insertion sort counting transpositions; tuples are short
    for i in range(1, len(seq)):
        j = i
        while j > 0 and seq[j - 1] > seq[j]:
            seq[j - 1], seq[j] = seq[j], seq[j - 1]
            sign = -sign
            j -= 1
    return sign, tuple(seq)


class DiffForm:
    __slots__ = ("chart", "degree", "terms")

    def __init__(self, chart: Chart, degree: int, terms: Mapping[tuple, Expr]):
        self.chart = chart
        self.degree = degree
        self.terms = {k: v for k, v in terms.items() if not v.is_zero()}

    # -- linear structure ---------------------------------------------------

    def _check(self, other):
        if not isinstance(other, DiffForm):
            raise TypeError("expected a DiffForm")
        if other.chart != self.chart:
            raise ValueError("forms live on different charts")
        if other.degree != self.degree and self.terms and other.terms:
            raise ValueError("cannot add forms of different degree")

    def __add__(self, other):
        self._check(other)
        terms = dict(self.terms)
        for k, v in other.terms.items():
            terms[k] = terms[k] + v if k in terms else v
        degree = self.degree if self.terms else other.degree
        return DiffForm(self.chart, degree, terms)

    def __neg__(self):
        return DiffForm(self.chart, self.degree, {k: -v for k, v in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, scalar):
        if isinstance(scalar, DiffForm):
            return NotImplemented
        if not isinstance(scalar, Expr):
            scalar = self.chart.reg.const(scalar)
        if scalar.is_zero():
            return DiffForm(self.chart, self.degree, {})
        return DiffForm(self.chart, self.degree, {k: v * scalar for k, v in self.terms.items()})

    __rmul__ = __mul__

    def __eq__(self, other):
        if not isinstance(other, DiffForm):
            return NotImplemented
        if not self.terms and not other.terms:
            return self.chart == other.chart
        return self.chart == other.chart and self.degree == other.degree and self.terms == other.terms

    __hash__ = None

    def is_zero(self) -> bool:
        return not self.terms

    def coeff(self, *indices) -> Expr:
        """Coefficient of ``dx_i1 ^ ... ^ dx_ik`` with signs for unsorted input."""
        sign, key = _merge((), tuple(indices)) if len(indices) > 1 else (1, tuple(indices))
        if sign == 0:
            return self.chart.reg.zero
        val = self.terms.get(key, self.chart.reg.zero)
        return val if sign == 1 else -val

    def map_coeffs(self, fn) -> "DiffForm":
        return DiffForm(self.chart, self.degree, {k: fn(v) for k, v in self.terms.items()})

    def wedge(self, other: "DiffForm") -> "DiffForm":
        return wedge(self, other)

    def d(self) -> "DiffForm":
        return ext_d(self)

    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for key in sorted(self.terms):
            basis = "^".join(f"d{self.chart.coords[i]}" for i in key)
            coef = str(self.terms[key])
            parts.append(f"({coef})*{basis}" if basis else f"({coef})")
        return " + ".join(parts)

    def __repr__(self):
        return f"DiffForm<{self.degree}>({self})"


def wedge(a: DiffForm, b: DiffForm) -> DiffForm:
    if a.chart != b.chart:
        raise ValueError("forms live on different charts")
    degree = a.degree + b.degree
    if degree > a.chart.dim:
        return DiffForm(a.chart, degree, {})
    terms: dict = {}
    for ka, va in a.terms.items():
        for kb, vb in b.terms.items():
            sign, key = _merge(ka, kb)
            if not sign:
                continue
            prod = va * vb
            if sign < 0:
                prod = -prod
            terms[key] = terms[key] + prod if key in terms else prod
    return DiffForm(a.chart, degree, terms)


def ext_d(a: DiffForm) -> DiffForm:
    chart = a.chart
    terms: dict = {}
    for key, coeff in a.terms.items():
        for name in coeff.free_vars():
            j = chart.index.get(name)
            if j is None or j in key:
                continue
            deriv = coeff.diff(name)
            if deriv.is_zero():
                continue
            sign, new = _merge((j,), key)
            if sign < 0:
                deriv = -deriv
            terms[new] = terms[new] + deriv if new in terms else deriv
    return DiffForm(chart, a.degree + 1, terms)


class Coframe:
    """``n`` one-forms spanning the cotangent space of an ``n``-chart.

    ``matrix[i][j]`` is the ``dx_j`` coefficient of the ``i``-th form.
    """

    def __init__(self, forms: Sequence[DiffForm], labels: Sequence[str] | None = None):
        forms = list(forms)
        if not forms:
            raise ValueError("empty coframe")
        chart = forms[0].chart
        if len(forms) != chart.dim:
            raise ValueError(f"{len(forms)} forms on a {chart.dim}-dimensional chart")
        for f in forms:
            if f.chart != chart or (f.degree != 1 and f.terms):
                raise ValueError("coframe members must be 1-forms on one chart")
        self.chart = chart
        self.forms = forms
        self.labels = tuple(labels) if labels else tuple(f"e{i + 1}" for i in range(len(forms)))
        self.matrix = [[f.coeff(j) for j in range(chart.dim)] for f in forms]
        self._inverse = None
        self._det = None
        self._frame_chart = Chart(self.labels, chart.reg)
        self._dual = None

    @property
    def dim(self):
        return self.chart.dim

    def inverse(self):
        if self._inverse is None:
            self._inverse, self._det = inverse_and_det(self.matrix)
        return self._inverse

    def determinant(self) -> Expr:
        if self._det is None:
            if self._inverse is not None:
                return self._det
            self._det = determinant(self.matrix)
            if self._det.is_zero():
                raise SingularMatrixError("coframe matrix is singular")
        return self._det

    def _coord_differentials(self):
        """``dx_j`` written as 1-forms on the frame chart."""
        if self._dual is None:
            inv = self.inverse()
            self._dual = [self._frame_chart.one_form(inv[j]) for j in range(self.dim)]
        return self._dual

    def express(self, form: DiffForm) -> dict:
        return express_in_coframe(form, self)

    def frame_form(self, coeffs: Mapping[tuple, Expr], degree: int) -> DiffForm:
        return DiffForm(self._frame_chart, degree, dict(coeffs))

    def expand(self, coeffs: Mapping[tuple, Expr], degree: int | None = None) -> DiffForm:
        """Rebuild ``sum c_I e^I`` as a form on the coordinate chart."""
        total = None
        for key, c in coeffs.items():
            term = self.chart.scalar(c)
            for i in key:
                term = wedge(term, self.forms[i])
            total = term if total is None else total + term
        if total is None:
            return DiffForm(self.chart, degree or 0, {})
        return total

    def derivatives(self, e: Expr) -> list:
        """Frame derivatives: ``de = sum_i (X_i e) e^i``."""
        df = ext_d(self.chart.scalar(e))
        coeffs = self.express(df)
        reg = self.chart.reg
        return [coeffs.get((i,), reg.zero) for i in range(self.dim)]


def express_in_coframe(a: DiffForm, cf: Coframe) -> dict:
    """Coefficients ``c_I`` with ``a = sum_I c_I cf^I`` over increasing ``I``."""
    if a.chart != cf.chart:
        raise ValueError("form and coframe live on different charts")
    if not a.terms:
        return {}
    if a.degree == 0:
        return dict(a.terms)
    dual = cf._coord_differentials()
    cache: dict = {}
    total: dict = {}
    for key, coeff in a.terms.items():
        if key not in cache:
            prod = dual[key[0]]
            for j in key[1:]:
                prod = wedge(prod, dual[j])
            cache[key] = prod
        for k, v in cache[key].terms.items():
            val = v * coeff
            total[k] = total[k] + val if k in total else val
    return {k: v for k, v in total.items() if not v.is_zero()}


def pullback(a: DiffForm, subst: Mapping[str, Expr], source: Chart) -> DiffForm:
    """Pull ``a`` back along the map ``target coord -> subst[coord]``.

    Target coordinates missing from ``subst`` must also be coordinates of
    ``source`` and map identically.
    """
    images = {}
    for name in a.chart.coords:
        if name in subst:
            img = subst[name]
            images[name] = img if isinstance(img, Expr) else source.reg.const(img)
        elif name in source.index:
            images[name] = source.reg.var(name)
        else:
            raise ValueError(f"no image for target coordinate {name!r}")
    diffs = [ext_d(source.scalar(images[name])) for name in a.chart.coords]
    bindings = {n: v for n, v in images.items() if not (n in source.index and v == source.reg.var(n))}
    result = DiffForm(source, a.degree, {})
    for key, coeff in a.terms.items():
        term = source.scalar(coeff.subs(bindings))
        for i in key:
            term = wedge(term, diffs[i])
        if term.terms:
            result = result + term if result.terms else DiffForm(source, a.degree, term.terms)
    return result
