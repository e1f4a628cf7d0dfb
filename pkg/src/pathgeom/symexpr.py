"""Exact multivariate rational functions over Q.

An :class:`Expr` is a reduced fraction ``num/den`` of polynomials with rational
coefficients.  Numerator and denominator are kept coprime and the denominator
is monic under the graded-lexicographic order of its :class:`Registry`, so two
expressions denote the same rational function exactly when their stored
polynomials agree.  Polynomial arithmetic and gcds are delegated to FLINT.
"""

from __future__ import annotations

import re
from fractions import Fraction
from typing import Iterable, Mapping, Union

import flint

Number = Union[int, Fraction, flint.fmpq, flint.fmpz]

__all__ = [
    "DEFAULT",
    "Expr",
    "ExprError",
    "ParseError",
    "PoleError",
    "Registry",
    "UnknownIdentifierError",
    "arith",
    "differentiate",
    "eval_at",
    "is_zero",
    "parse_expr",
    "substitute",
]


class ExprError(Exception):
    """Base class for errors raised by the symbolic kernel."""


class ParseError(ExprError, ValueError):
    def __init__(self, message: str, position: int, text: str = ""):
        self.message = message
        self.position = position
        self.text = text
        super().__init__(f"{message} at position {position}")


class UnknownIdentifierError(ParseError):
    pass


class PoleError(ExprError, ZeroDivisionError):
    """Division by the zero rational function, or evaluation at a pole."""


_IDENT = re.compile(r"[a-zA-Z][a-zA-Z0-9_]*\Z")


class Registry:
    """Ordered set of variable names shared by a family of expressions.

    The order is the variable order of the graded-lexicographic monomial
    order, so it must stay fixed for the lifetime of the expressions.
    """

    def __init__(self, names: Iterable[str]):
        names = tuple(names)
        if len(set(names)) != len(names):
            raise ValueError("registry names must be unique")
        for name in names:
            if not _IDENT.match(name):
                raise ValueError(f"invalid variable name {name!r}")
        self.names = names
        self.index = {name: i for i, name in enumerate(names)}
        self.ctx = flint.fmpq_mpoly_ctx.get(names, "deglex")
        self._gens = self.ctx.gens()
        self._one = self.ctx.from_dict({(0,) * len(names): 1})
        self.zero = Expr._raw(self, self.ctx.from_dict({}), self._one)
        self.one = Expr._raw(self, self._one, self._one)

    def __repr__(self):
        return f"Registry({list(self.names)!r})"

    def __contains__(self, name):
        return name in self.index

    def var(self, name: str) -> "Expr":
        try:
            gen = self._gens[self.index[name]]
        except KeyError:
            raise UnknownIdentifierError(f"unknown identifier {name!r}", 0, name) from None
        return Expr._raw(self, gen, self._one)

    def vars(self, *names: str) -> list:
        return [self.var(n) for n in names]

    def const(self, value: Number) -> "Expr":
        value = _to_fmpq(value)
        if value == 0:
            return self.zero
        return Expr._raw(self, self.ctx.from_dict({(0,) * len(self.names): value}), self._one)

    def parse(self, text: str, allowed: Iterable[str] | None = None) -> "Expr":
        return parse_expr(text, self, allowed)


def _to_fmpq(value) -> flint.fmpq:
    if isinstance(value, flint.fmpq):
        return value
    if isinstance(value, Fraction):
        return flint.fmpq(value.numerator, value.denominator)
    if isinstance(value, (int, flint.fmpz)):
        return flint.fmpq(int(value))
    raise TypeError(f"cannot use {type(value).__name__} as an exact rational")


def _fraction(value: flint.fmpq) -> Fraction:
    return Fraction(int(value.p), int(value.q))


class Expr:
    """Canonical rational function ``num/den`` in the variables of a registry.

    Instances are immutable.  Use the registry helpers (:meth:`Registry.var`,
    :meth:`Registry.const`, :func:`parse_expr`) to build them; Python ints and
    :class:`fractions.Fraction` are coerced in arithmetic.
    """

    __slots__ = ("reg", "num", "den", "_hash")

    def __init__(self, *args, **kwargs):
        raise TypeError("use Registry.var/const or parse_expr to build expressions")

    @classmethod
    def _raw(cls, reg, num, den):
        obj = object.__new__(cls)
        obj.reg = reg
        obj.num = num
        obj.den = den
        obj._hash = None
        return obj

    @classmethod
    def from_polys(cls, reg: Registry, num, den=None) -> "Expr":
        if den is None:
            return cls._raw(reg, num, reg._one)
        return _canonical(reg, num, den)

    # -- coercion ---------------------------------------------------------

    def _coerce(self, other) -> "Expr":
        if isinstance(other, Expr):
            if other.reg is not self.reg:
                raise ValueError("expressions belong to different registries")
            return other
        if isinstance(other, (int, Fraction, flint.fmpq, flint.fmpz)):
            return self.reg.const(other)
        return NotImplemented

    # -- arithmetic -------------------------------------------------------

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        if other.num.is_zero():
            return self
        if self.num.is_zero():
            return other
        if self.den == other.den:
            return _canonical(self.reg, self.num + other.num, self.den)
        if self.den.is_one():
            return Expr._raw(self.reg, self.num * other.den + other.num, other.den)
        if other.den.is_one():
            return Expr._raw(self.reg, self.num + other.num * self.den, self.den)
        g = self.den.gcd(other.den)
        if g.is_one():
            return _canonical(self.reg, self.num * other.den + other.num * self.den,
                              self.den * other.den, coprime_hint=True)
        d1 = self.den / g
        d2 = other.den / g
        return _canonical(self.reg, self.num * d2 + other.num * d1, d1 * other.den)

    __radd__ = __add__

    def __neg__(self):
        return Expr._raw(self.reg, -self.num, self.den)

    def __pos__(self):
        return self

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other + (-self)

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        if self.num.is_zero() or other.num.is_zero():
            return self.reg.zero
        if self.den.is_one() and other.den.is_one():
            return Expr._raw(self.reg, self.num * other.num, self.den)
        # cross-cancel so the products are already reduced
        g1 = self.num.gcd(other.den)
        g2 = other.num.gcd(self.den)
        n1, d2 = (self.num, other.den) if g1.is_one() else (self.num / g1, other.den / g1)
        n2, d1 = (other.num, self.den) if g2.is_one() else (other.num / g2, self.den / g2)
        return _normalize_lc(self.reg, n1 * n2, d1 * d2)

    __rmul__ = __mul__

    def inverse(self) -> "Expr":
        if self.num.is_zero():
            raise PoleError("division by the zero expression")
        return _normalize_lc(self.reg, self.den, self.num)

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self * other.inverse()

    def __rtruediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other * self.inverse()

    def __pow__(self, exponent):
        if not isinstance(exponent, int):
            raise TypeError("only integer powers are supported")
        if exponent < 0:
            return self.inverse() ** (-exponent)
        if exponent == 0:
            return self.reg.one
        return Expr._raw(self.reg, self.num ** exponent, self.den ** exponent)

    # -- comparison -------------------------------------------------------

    def __eq__(self, other):
        if isinstance(other, (int, Fraction, flint.fmpq, flint.fmpz)):
            other = self.reg.const(other)
        if not isinstance(other, Expr):
            return NotImplemented
        return self.reg is other.reg and self.num == other.num and self.den == other.den

    def __ne__(self, other):
        result = self.__eq__(other)
        if result is NotImplemented:
            return result
        return not result

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((tuple(self.num.to_dict().items()), tuple(self.den.to_dict().items())))
        return self._hash

    def __bool__(self):
        return not self.num.is_zero()

    # -- inspection -------------------------------------------------------

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def is_constant(self) -> bool:
        return self.num.is_constant() and self.den.is_constant()

    def constant_value(self) -> Fraction:
        if not self.is_constant():
            raise ValueError(f"{self} is not constant")
        if self.num.is_zero():
            return Fraction(0)
        return _fraction(self.num.leading_coefficient() / self.den.leading_coefficient())

    def is_polynomial(self) -> bool:
        return self.den.is_one()

    def free_vars(self) -> tuple:
        used = set()
        for poly in (self.num, self.den):
            for i, d in enumerate(poly.degrees()):
                if d > 0:  # the zero polynomial reports -1
                    used.add(i)
        return tuple(self.reg.names[i] for i in sorted(used))

    def depends_on(self, name: str) -> bool:
        i = self.reg.index[name]
        return self.num.degrees()[i] > 0 or self.den.degrees()[i] > 0

    def numerator(self) -> "Expr":
        return Expr._raw(self.reg, self.num, self.reg._one)

    def denominator(self) -> "Expr":
        return Expr._raw(self.reg, self.den, self.reg._one)

    def size(self) -> int:
        return len(self.num) + len(self.den)

    def poly_coeffs(self, name: str) -> list:
        """Coefficients of the numerator in powers of ``name``.

        Returns ``[c0, c1, ...]`` with ``num = sum(c_k * name**k)``; the
        denominator is ignored, so callers solving ``self == 0`` for ``name``
        need the denominator to be free of ``name``.
        """
        i = self.reg.index[name]
        buckets: dict[int, dict] = {}
        for monom, coeff in self.num.to_dict().items():
            k = monom[i]
            reduced = monom[:i] + (0,) + monom[i + 1:]
            buckets.setdefault(k, {})[reduced] = coeff
        top = max(buckets, default=0)
        return [Expr._raw(self.reg, self.reg.ctx.from_dict(buckets.get(k, {})), self.reg._one)
                for k in range(top + 1)]

    # -- calculus / substitution -------------------------------------------

    def diff(self, name: str) -> "Expr":
        if name not in self.reg.index:
            raise UnknownIdentifierError(f"unknown identifier {name!r}", 0, name)
        i = self.reg.index[name]
        dn = self.num.derivative(i) if self.num.degrees()[i] else None
        dd = self.den.derivative(i) if self.den.degrees()[i] else None
        if dd is None:
            if dn is None:
                return self.reg.zero
            return _canonical(self.reg, dn, self.den)
        # (n/d)' = (n' d - n d') / d^2; divide through by gcd(d, d') first
        g = self.den.gcd(dd)
        dr = self.den / g
        ddr = dd / g
        top = (dn * dr if dn is not None else self.reg.ctx.from_dict({})) - self.num * ddr
        return _canonical(self.reg, top, dr * self.den)

    def subs(self, bindings: Mapping[str, "Expr | Number"]) -> "Expr":
        if not bindings:
            return self
        images = []
        polynomial = True
        for i, name in enumerate(self.reg.names):
            if name in bindings:
                img = bindings[name]
                img = img if isinstance(img, Expr) else self.reg.const(img)
                if img.reg is not self.reg:
                    raise ValueError("binding belongs to a different registry")
                polynomial = polynomial and img.den.is_one()
                images.append(img)
            else:
                images.append(None)
        for name in bindings:
            if name not in self.reg.index:
                raise UnknownIdentifierError(f"unknown identifier {name!r}", 0, name)
        num = _subs_poly(self.reg, self.num, images, polynomial)
        den = _subs_poly(self.reg, self.den, images, polynomial)
        if den.is_zero():
            raise PoleError("denominator vanishes identically after substitution")
        return num / den

    def eval_at(self, point: Mapping[str, Number]) -> Fraction:
        values = []
        for name in self.reg.names:
            values.append(_to_fmpq(point[name]) if name in point else None)
        missing = [n for n in self.free_vars() if n not in point]
        if missing:
            raise ValueError(f"no value given for {', '.join(missing)}")
        args = [v if v is not None else flint.fmpq(0) for v in values]
        den = self.den(*args)
        if den == 0:
            raise PoleError(f"pole of {self} at {dict(point)}")
        return _fraction(self.num(*args) / den)

    # -- printing ---------------------------------------------------------

    def __str__(self):
        num = _format_poly(self.reg, self.num)
        if self.den.is_one():
            return num
        den = _format_poly(self.reg, self.den)
        if len(self.num) > 1:
            num = f"({num})"
        if len(self.den) > 1 or not _is_monomial_with_unit(self.den):
            den = f"({den})"
        return f"{num}/{den}"

    def __repr__(self):
        return f"Expr({str(self)!r})"


def _is_monomial_with_unit(poly) -> bool:
    # a single power like q^2 needs no parentheses after '/'
    if len(poly) != 1 or poly.leading_coefficient() != 1:
        return False
    return sum(1 for k in poly.monoms()[0] if k) == 1


def _normalize_lc(reg, num, den) -> Expr:
    lc = den.leading_coefficient()
    if lc != 1:
        inv = 1 / lc
        num = num * inv
        den = den * inv
    return Expr._raw(reg, num, den)


def _canonical(reg, num, den, coprime_hint=False) -> Expr:
    if den.is_zero():
        raise PoleError("division by the zero polynomial")
    if num.is_zero():
        return reg.zero
    if not den.is_constant() and not coprime_hint:
        g = num.gcd(den)
        if not g.is_one():
            num = num / g
            den = den / g
    return _normalize_lc(reg, num, den)


def _subs_poly(reg, poly, images, polynomial):
    if polynomial:
        gens = reg._gens
        args = [img.num if img is not None else gens[i] for i, img in enumerate(images)]
        return Expr._raw(reg, poly.compose(*args), reg._one)
    # general case: sum of terms with cached powers of the images
    cache: dict = {}
    total = reg.zero
    gens = reg._gens
    for monom, coeff in poly.to_dict().items():
        fixed = {}
        term = reg.const(coeff)
        for i, k in enumerate(monom):
            if not k:
                continue
            if images[i] is None:
                fixed[i] = k
            else:
                key = (i, k)
                if key not in cache:
                    cache[key] = images[i] ** int(k)
                term = term * cache[key]
        if fixed:
            mono = reg._one
            for i, k in fixed.items():
                mono = mono * gens[i] ** int(k)
            term = term * Expr._raw(reg, mono, reg._one)
        total = total + term
    return total


def _format_coeff(c: Fraction) -> str:
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


def _format_poly(reg, poly) -> str:
    if poly.is_zero():
        return "0"
    pieces = []
    for monom, coeff in poly.terms():
        c = _fraction(coeff)
        factors = []
        for name, k in zip(reg.names, monom):
            if k == 1:
                factors.append(name)
            elif k > 1:
                factors.append(f"{name}^{k}")
        mag = abs(c)
        if factors:
            body = "*".join(factors) if mag == 1 else _format_coeff(mag) + "*" + "*".join(factors)
        else:
            body = _format_coeff(mag)
        if not pieces:
            pieces.append(("-" if c < 0 else "") + body)
        else:
            pieces.append((" - " if c < 0 else " + ") + body)
    return "".join(pieces)


# -- functional API -------------------------------------------------------

def arith(lhs: Expr, rhs, op: str) -> Expr:
    """Apply ``op`` (add, sub, mul, div, pow) to two operands."""
    if op == "add":
        return lhs + rhs
    if op == "sub":
        return lhs - rhs
    if op == "mul":
        return lhs * rhs
    if op == "div":
        return lhs / rhs
    if op == "pow":
        return lhs ** int(rhs)
    raise ValueError(f"unknown operation {op!r}")


def differentiate(e: Expr, v: str) -> Expr:
    return e.diff(v)


def substitute(e: Expr, bindings: Mapping[str, Expr]) -> Expr:
    return e.subs(bindings)


def is_zero(e: Expr) -> bool:
    return e.is_zero()


def eval_at(e: Expr, point: Mapping[str, Number]) -> Fraction:
    return e.eval_at(point)


# -- parser -----------------------------------------------------------------

# integer literals only: "2/3" is a division, so "y^2/3" and "2/3^2" parse conventionally
_TOKEN = re.compile(r"\s*(?:(\d+)|([a-zA-Z][a-zA-Z0-9_]*)|(\S))")


def _tokenize(text: str):
    tokens = []
    pos = 0
    while True:
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos and m.group(0) == "":
            break
        if m.group(0).strip() == "":
            break
        start = m.start(m.lastindex)
        if m.group(1) is not None:
            tokens.append(("num", m.group(1), start))
        elif m.group(2) is not None:
            tokens.append(("id", m.group(2), start))
        else:
            ch = m.group(3)
            if ch not in "+-*/^()":
                raise ParseError(f"unexpected character {ch!r}", start, text)
            tokens.append((ch, ch, start))
        pos = m.end()
    if text[pos:].strip():
        raise ParseError("unexpected input", pos, text)
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text, reg, allowed):
        self.text = text
        self.reg = reg
        self.allowed = None if allowed is None else set(allowed)
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def take(self, kind=None):
        tok = self.tokens[self.i]
        if kind is not None and tok[0] != kind:
            expected = "end of input" if kind == "end" else repr(kind)
            got = "end of input" if tok[0] == "end" else repr(tok[1])
            raise ParseError(f"expected {expected}, got {got}", tok[2], self.text)
        self.i += 1
        return tok

    def parse(self):
        e = self.expr()
        self.take("end")
        return e

    def expr(self):
        e = self.term()
        while self.peek()[0] in "+-" and self.peek()[0] != "end":
            op = self.take()[0]
            rhs = self.term()
            e = e + rhs if op == "+" else e - rhs
        return e

    def term(self):
        e = self.unary()
        while self.peek()[0] in ("*", "/"):
            op, _, pos = self.take()
            rhs = self.unary()
            if op == "*":
                e = e * rhs
            else:
                if rhs.is_zero():
                    raise ParseError("division by zero", pos, self.text)
                e = e / rhs
        return e

    def unary(self):
        if self.peek()[0] == "-":
            self.take()
            return -self.unary()
        if self.peek()[0] == "+":
            self.take()
            return self.unary()
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek()[0] == "^":
            self.take()
            sign = 1
            if self.peek()[0] in ("-", "+"):
                sign = -1 if self.take()[0] == "-" else 1
            if self.peek()[0] != "num":
                raise ParseError("exponent must be an integer literal", self.peek()[2], self.text)
            tok = self.take("num")
            k = sign * int(tok[1])
            if k < 0 and base.is_zero():
                raise ParseError("division by zero", tok[2], self.text)
            base = base ** k
        return base

    def atom(self):
        kind, value, pos = self.peek()
        if kind == "num":
            self.take()
            return self.reg.const(int(value))
        if kind == "id":
            self.take()
            if value not in self.reg.index or (self.allowed is not None and value not in self.allowed):
                raise UnknownIdentifierError(f"unknown identifier {value!r}", pos, self.text)
            return self.reg.var(value)
        if kind == "(":
            self.take()
            e = self.expr()
            self.take(")")
            return e
        got = "end of input" if kind == "end" else repr(value)
        raise ParseError(f"unexpected {got}", pos, self.text)


def parse_expr(text: str, registry: Registry | None = None, allowed: Iterable[str] | None = None) -> Expr:
    """Parse ``text`` into a canonical :class:`Expr`.

    Grammar: identifiers, integer literals (``3/4`` is an ordinary
    division), binary ``+ - * /``, unary ``-``, ``^`` with an integer literal exponent and
    parentheses.  ``allowed`` narrows the identifiers accepted from the
    registry.

    >>> str(parse_expr("(y1+1)^2 - y1^2 - 2*y1 - 1"))
    '0'
    >>> str(parse_expr("(v2)^-2 * (v2*1 - v1*0)"))
    '1/v2'
    """
    return _Parser(text, registry or DEFAULT, allowed).parse()


BASE_COORDS = ("y1", "y2", "p", "q", "t")
INPUT_VARS = ("y1", "y2", "v1", "v2", "t")
GROUP_PARAMS = ("a", "b", "c", "e", "f", "M11", "M12", "M21", "M22", "N11", "N12", "N21", "N22")
LIFT_PARAMS = tuple(f"u{i}" for i in range(1, 9))
PROLONG_PARAMS = ("s1", "s2")
SCRATCH = tuple(f"z{i}" for i in range(1, 13))

#: Registry used throughout the package: base chart, input velocities, group
#: parameters of every reduction stage, prolongation variables and scratch
#: symbols for torsion-action tables and line elimination.
DEFAULT = Registry(BASE_COORDS + ("v1", "v2") + GROUP_PARAMS + LIFT_PARAMS + PROLONG_PARAMS + SCRATCH)
