"""Exact sparse multivariate polynomials over the rationals.

A :class:`PolyExpr` maps exponent tuples to :class:`fractions.Fraction`
coefficients.  Zero coefficients are never stored, so structural equality is
semantic equality.  Values are immutable and hashable.

The string grammar accepted by :func:`parse_poly` is::

    expr     := term (('+'|'-') term)*
    term     := factor ('*' factor)*
    factor   := base ('^' uint)?
    base     := rational | var | '(' expr ')' | '-' factor
    rational := int ('/' uint)?
"""
from __future__ import annotations

import re
from fractions import Fraction
from numbers import Rational as _RationalABC
from typing import Iterable, Mapping, Sequence

import numpy as np

Rational = Fraction

__all__ = [
    "Rational",
    "PolyExpr",
    "PolyParseError",
    "PolySyntaxError",
    "UnknownVariableError",
    "ExponentError",
    "parse_poly",
    "poly_arith",
    "poly_diff",
    "poly_eval",
    "format_poly",
    "divide_exact",
    "mat_zeros",
    "mat_identity",
    "mat_mul",
    "mat_add",
    "mat_sub",
    "mat_neg",
    "mat_transpose",
    "mat_is_zero",
    "mat_eval",
    "mat_format",
]


class PolyExpr:
    """Polynomial in ``nvars`` variables with exact rational coefficients."""

    __slots__ = ("nvars", "_terms", "_hash")

    def __init__(self, nvars: int, terms: Mapping[tuple, object] | None = None):
        if nvars < 0:
            raise ValueError("nvars must be nonnegative")
        self.nvars = nvars
        clean = {}
        if terms:
            for exps, c in terms.items():
                exps = tuple(int(e) for e in exps)
                if len(exps) != nvars:
                    raise ValueError(
                        f"exponent vector {exps} has length {len(exps)}, expected {nvars}")
                if any(e < 0 for e in exps):
                    raise ValueError(f"negative exponent in {exps}")
                c = _to_fraction(c)
                if c:
                    clean[exps] = clean.get(exps, 0) + c
                    if not clean[exps]:
                        del clean[exps]
        self._terms = clean
        self._hash = None

    @classmethod
    def _raw(cls, nvars: int, terms: dict) -> "PolyExpr":
        # terms already canonical
        obj = cls.__new__(cls)
        obj.nvars = nvars
        obj._terms = terms
        obj._hash = None
        return obj

    # constructors
    @classmethod
    def zero(cls, nvars: int) -> "PolyExpr":
        return cls._raw(nvars, {})

    @classmethod
    def const(cls, nvars: int, c) -> "PolyExpr":
        c = _to_fraction(c)
        return cls._raw(nvars, {(0,) * nvars: c} if c else {})

    @classmethod
    def var(cls, nvars: int, index: int) -> "PolyExpr":
        if not 0 <= index < nvars:
            raise IndexError(f"variable index {index} out of range for {nvars} variables")
        exps = [0] * nvars
        exps[index] = 1
        return cls._raw(nvars, {tuple(exps): Fraction(1)})

    @property
    def terms(self) -> dict:
        return dict(self._terms)

    def items(self):
        return self._terms.items()

    def __len__(self):
        return len(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def is_constant(self) -> bool:
        return all(not any(e) for e in self._terms)

    def constant_value(self) -> Fraction:
        return self._terms.get((0,) * self.nvars, Fraction(0))

    def degree(self) -> int:
        if not self._terms:
            return -1
        return max(sum(e) for e in self._terms)

    # arithmetic
    def _coerce(self, other) -> "PolyExpr":
        if isinstance(other, PolyExpr):
            if other.nvars != self.nvars:
                raise ValueError(f"nvars mismatch: {self.nvars} vs {other.nvars}")
            return other
        if isinstance(other, (int, Fraction, _RationalABC)):
            return PolyExpr.const(self.nvars, other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        if len(other._terms) > len(self._terms):
            a, b = other._terms, self._terms
        else:
            a, b = self._terms, other._terms
        out = dict(a)
        for e, c in b.items():
            s = out.get(e, 0) + c
            if s:
                out[e] = s
            else:
                out.pop(e, None)
        return PolyExpr._raw(self.nvars, out)

    __radd__ = __add__

    def __neg__(self):
        return PolyExpr._raw(self.nvars, {e: -c for e, c in self._terms.items()})

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
        out: dict = {}
        for e1, c1 in self._terms.items():
            for e2, c2 in other._terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                s = out.get(e, 0) + c1 * c2
                if s:
                    out[e] = s
                else:
                    out.pop(e, None)
        return PolyExpr._raw(self.nvars, out)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if not isinstance(k, int) or k < 0:
            raise ValueError("exponent must be a nonnegative integer")
        result = PolyExpr.const(self.nvars, 1)
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    def scale(self, c) -> "PolyExpr":
        c = _to_fraction(c)
        if not c:
            return PolyExpr.zero(self.nvars)
        return PolyExpr._raw(self.nvars, {e: v * c for e, v in self._terms.items()})

    def diff(self, index: int) -> "PolyExpr":
        if not 0 <= index < self.nvars:
            raise IndexError(f"variable index {index} out of range for {self.nvars} variables")
        out = {}
        for e, c in self._terms.items():
            k = e[index]
            if k:
                ne = e[:index] + (k - 1,) + e[index + 1:]
                out[ne] = c * k
        return PolyExpr._raw(self.nvars, out)

    def __call__(self, point):
        return poly_eval(self, point)

    def __eq__(self, other):
        if isinstance(other, PolyExpr):
            return self.nvars == other.nvars and self._terms == other._terms
        if isinstance(other, (int, Fraction)):
            return self._terms == PolyExpr.const(self.nvars, other)._terms
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.nvars, frozenset(self._terms.items())))
        return self._hash

    def __repr__(self):
        return f"PolyExpr({format_poly(self)!r}, nvars={self.nvars})"

    def to_string(self, names: Sequence[str] | None = None) -> str:
        return format_poly(self, names)


def _to_fraction(c) -> Fraction:
    if isinstance(c, Fraction):
        return c
    if isinstance(c, bool):
        return Fraction(int(c))
    if isinstance(c, (int, _RationalABC)):
        return Fraction(c)
    if isinstance(c, str):
        return Fraction(c)
    raise TypeError(f"coefficients must be exact rationals, got {type(c).__name__}")


def _sort_key(exps):
    # graded lexicographic, highest first
    return (-sum(exps), tuple(-e for e in exps))


def format_poly(p: PolyExpr, names: Sequence[str] | None = None) -> str:
    """Canonical string form, parseable by :func:`parse_poly`."""
    if names is None:
        names = [f"z{i + 1}" for i in range(p.nvars)]
    if len(names) != p.nvars:
        raise ValueError("number of names does not match nvars")
    if p.is_zero():
        return "0"
    pieces = []
    for exps in sorted(p._terms, key=_sort_key):
        c = p._terms[exps]
        factors = []
        for name, e in zip(names, exps):
            if e == 1:
                factors.append(name)
            elif e > 1:
                factors.append(f"{name}^{e}")
        mag = abs(c)
        if not factors:
            body = str(mag)
        elif mag == 1:
            body = "*".join(factors)
        else:
            body = str(mag) + "*" + "*".join(factors)
        neg = c < 0
        if not pieces:
            pieces.append(("-" if neg else "") + body)
        else:
            pieces.append((" - " if neg else " + ") + body)
    return "".join(pieces)


# --------------------------------------------------------------------------
# parsing

class PolyParseError(ValueError):
    """Base class for polynomial parse failures."""

    def __init__(self, message: str, offset: int | None = None):
        super().__init__(message if offset is None else f"{message} (at byte {offset})")
        self.offset = offset


class PolySyntaxError(PolyParseError):
    pass


class UnknownVariableError(PolyParseError):
    def __init__(self, name: str, offset: int | None = None):
        super().__init__(f"unknown variable {name!r}", offset)
        self.name = name


class ExponentError(PolyParseError):
    pass


_TOKEN = re.compile(r"\s*(?:(\d+)|([A-Za-z_][A-Za-z0-9_]*)|(.))", re.S)
_MINUS_CHARS = {"-", "−"}


class _Parser:
    def __init__(self, src: str, vars: Sequence[str]):
        self.src = src
        self.index = {name: i for i, name in enumerate(vars)}
        self.n = len(vars)
        self.tokens = []  # (kind, value, char offset)
        pos = 0
        while pos < len(src):
            m = _TOKEN.match(src, pos)
            start = m.start(m.lastindex)
            if m.group(1) is not None:
                self.tokens.append(("int", m.group(1), start))
            elif m.group(2) is not None:
                self.tokens.append(("name", m.group(2), start))
            else:
                ch = m.group(3)
                if ch.isspace():
                    pos = m.end()
                    continue
                if ch in _MINUS_CHARS:
                    ch = "-"
                self.tokens.append(("op", ch, start))
            pos = m.end()
        self.tokens.append(("end", None, len(src)))
        self.pos = 0

    def byte_offset(self, char_offset: int) -> int:
        return len(self.src[:char_offset].encode("utf-8"))

    def peek(self):
        return self.tokens[self.pos]

    def take(self):
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def error(self, msg, tok=None):
        tok = tok or self.peek()
        return PolySyntaxError(msg, self.byte_offset(tok[2]))

    def expect_op(self, ch):
        tok = self.take()
        if tok[0] != "op" or tok[1] != ch:
            raise self.error(f"expected {ch!r}", tok)

    def parse(self) -> PolyExpr:
        if self.peek()[0] == "end":
            raise self.error("empty expression")
        p = self.expr()
        tok = self.peek()
        if tok[0] != "end":
            raise self.error(f"unexpected token {tok[1]!r}", tok)
        return p

    def expr(self) -> PolyExpr:
        p = self.term()
        while True:
            tok = self.peek()
            if tok[0] == "op" and tok[1] in "+-":
                self.take()
                q = self.term()
                p = p + q if tok[1] == "+" else p - q
            else:
                return p

    def term(self) -> PolyExpr:
        p = self.factor()
        while self.peek()[0] == "op" and self.peek()[1] == "*":
            self.take()
            p = p * self.factor()
        return p

    def factor(self) -> PolyExpr:
        p = self.base()
        tok = self.peek()
        if tok[0] == "op" and tok[1] == "^":
            self.take()
            etok = self.take()
            if etok[0] != "int":
                raise ExponentError("exponent must be a nonnegative integer",
                                    self.byte_offset(etok[2]))
            nxt = self.peek()
            if nxt[0] == "op" and nxt[1] in "./":
                raise ExponentError("exponent must be a nonnegative integer",
                                    self.byte_offset(nxt[2]))
            p = p ** int(etok[1])
        return p

    def base(self) -> PolyExpr:
        tok = self.take()
        kind, val, off = tok
        if kind == "int":
            num = int(val)
            nxt = self.peek()
            if nxt[0] == "op" and nxt[1] == "/":
                self.take()
                dtok = self.take()
                if dtok[0] != "int":
                    raise self.error("expected unsigned integer denominator", dtok)
                den = int(dtok[1])
                if den == 0:
                    raise self.error("zero denominator", dtok)
                return PolyExpr.const(self.n, Fraction(num, den))
            if nxt[0] == "op" and nxt[1] == ".":
                raise self.error("decimal literals are not supported; use a/b", nxt)
            return PolyExpr.const(self.n, num)
        if kind == "name":
            if val not in self.index:
                raise UnknownVariableError(val, self.byte_offset(off))
            return PolyExpr.var(self.n, self.index[val])
        if kind == "op" and val == "(":
            p = self.expr()
            self.expect_op(")")
            return p
        if kind == "op" and val == "-":
            return -self.factor()
        if kind == "end":
            raise self.error("unexpected end of input", tok)
        raise self.error(f"unexpected token {val!r}", tok)


def parse_poly(src: str, vars: Sequence[str]) -> PolyExpr:
    """Parse ``src`` into a canonical polynomial over the variables ``vars``.

    >>> parse_poly("z1*z2 + 3*z1^2 - 1/2", ["z1", "z2"]).to_string(["z1", "z2"])
    '3*z1^2 + z1*z2 - 1/2'
    """
    if not isinstance(src, str):
        raise PolySyntaxError(f"expected a string, got {type(src).__name__}", 0)
    return _Parser(src, list(vars)).parse()


# --------------------------------------------------------------------------
# functional API

def poly_arith(a: PolyExpr, b: PolyExpr | None, op: str, c=None) -> PolyExpr:
    if op == "add":
        return a + _same(a, b)
    if op == "sub":
        return a - _same(a, b)
    if op == "mul":
        return a * _same(a, b)
    if op == "scale":
        return a.scale(c)
    raise ValueError(f"unknown op {op!r}")


def _same(a, b):
    if not isinstance(b, PolyExpr) or a.nvars != b.nvars:
        raise ValueError("operands must be polynomials over the same number of variables")
    return b


def poly_diff(a: PolyExpr, var_index: int) -> PolyExpr:
    return a.diff(var_index)


def poly_eval(a: PolyExpr, point):
    """Evaluate at ``point``.

    Exact when every coordinate is an ``int``/``Fraction``; otherwise the
    result is a float (or the coordinates' float type, e.g. ``np.longdouble``).
    """
    point = list(point)
    if len(point) != a.nvars:
        raise ValueError(f"point has length {len(point)}, expected {a.nvars}")
    exact = all(isinstance(x, (int, Fraction)) and not isinstance(x, bool) for x in point)
    if exact:
        total = Fraction(0)
        for exps, c in a._terms.items():
            m = c
            for x, e in zip(point, exps):
                if e:
                    m *= Fraction(x) ** e
            total += m
        return total
    ftype = type(point[0]) if point and isinstance(point[0], np.floating) else float
    total = ftype(0)
    for exps, c in a._terms.items():
        m = ftype(c.numerator) / ftype(c.denominator)
        for x, e in zip(point, exps):
            if e:
                m = m * x ** e
        total = total + m
    return total


# --------------------------------------------------------------------------
# matrices of polynomials (tuples of tuples)

def mat_zeros(nvars: int, rows: int, cols: int):
    z = PolyExpr.zero(nvars)
    return tuple(tuple(z for _ in range(cols)) for _ in range(rows))


def mat_identity(nvars: int, n: int):
    one, z = PolyExpr.const(nvars, 1), PolyExpr.zero(nvars)
    return tuple(tuple(one if i == j else z for j in range(n)) for i in range(n))


def mat_mul(a, b, nvars: int | None = None):
    rows = len(a)
    inner = len(b)
    cols = len(b[0]) if inner else 0
    if rows and len(a[0]) != inner:
        raise ValueError(f"shape mismatch: {rows}x{len(a[0])} @ {inner}x{cols}")
    if nvars is None:
        nvars = _mat_nvars(a) if rows and inner else _mat_nvars(b)
    if not inner:
        return mat_zeros(nvars, rows, cols)
    out = []
    for i in range(rows):
        row = []
        for j in range(cols):
            s = PolyExpr.zero(nvars)
            for k in range(inner):
                if a[i][k]._terms and b[k][j]._terms:
                    s = s + a[i][k] * b[k][j]
            row.append(s)
        out.append(tuple(row))
    return tuple(out)


def _mat_nvars(m):
    for row in m:
        for x in row:
            return x.nvars
    raise ValueError("cannot infer nvars from an empty matrix; pass nvars=")


def mat_add(a, b):
    return tuple(tuple(x + y for x, y in zip(ra, rb)) for ra, rb in zip(a, b))


def mat_sub(a, b):
    return tuple(tuple(x - y for x, y in zip(ra, rb)) for ra, rb in zip(a, b))


def mat_neg(a):
    return tuple(tuple(-x for x in row) for row in a)


def mat_transpose(a, cols: int | None = None):
    if not a:
        return tuple(() for _ in range(cols or 0))
    return tuple(tuple(row[j] for row in a) for j in range(len(a[0])))


def mat_is_zero(a) -> bool:
    return all(x.is_zero() for row in a for x in row)


def mat_eval(a, point):
    return [[poly_eval(x, point) for x in row] for row in a]


def mat_format(a, names: Sequence[str] | None = None):
    return [[format_poly(x, names) for x in row] for row in a]


def _grlex(e):
    return (sum(e), e)


def divide_exact(a: PolyExpr, b: PolyExpr) -> PolyExpr | None:
    """Quotient a / b when b divides a exactly, else None."""
    if b.nvars != a.nvars:
        raise ValueError("nvars mismatch")
    if b.is_zero():
        raise ZeroDivisionError("division by the zero polynomial")
    lead_b = max(b._terms, key=_grlex)
    cb = b._terms[lead_b]
    if len(b._terms) == 1:
        out = {}
        for e, c in a._terms.items():
            ne = tuple(x - y for x, y in zip(e, lead_b))
            if any(x < 0 for x in ne):
                return None
            out[ne] = c / cb
        return PolyExpr._raw(a.nvars, out)
    q = PolyExpr.zero(a.nvars)
    r = a
    while not r.is_zero():
        lead_r = max(r._terms, key=_grlex)
        ne = tuple(x - y for x, y in zip(lead_r, lead_b))
        if any(x < 0 for x in ne):
            return None
        t = PolyExpr._raw(a.nvars, {ne: r._terms[lead_r] / cb})
        q = q + t
        r = r - t * b
    return q


def poly_from_iterable(nvars: int, items: Iterable[tuple[tuple, object]]) -> PolyExpr:
    return PolyExpr(nvars, dict(items))
