"""Exact sparse multivariate polynomials over a :class:`FieldConfig`.

A polynomial is a map from exponent tuples to nonzero field scalars.  Values
are immutable; every operation returns a new canonical polynomial.

Text form::

    3*x1^2*x3 + 2*x2 + 5

JSON form: a list of ``{"exponents": [...], "coeff": "..."}`` objects with
coefficients written as decimal (or ``a/b``) strings.
"""

from __future__ import annotations

import random
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, Mapping, Sequence

from .field import FieldConfig, Scalar

Exponent = tuple[int, ...]

#: Degree of the zero polynomial.  Compares below every integer.
MINUS_INF = float("-inf")


class RingMismatch(ValueError):
    pass


class ParseError(ValueError):
    """Malformed text input; ``pos`` is the 0-based character offset."""

    def __init__(self, message: str, pos: int | None = None, text: str | None = None):
        self.message = message
        self.pos = pos
        self.text = text
        where = f" at position {pos}" if pos is not None else ""
        super().__init__(f"{message}{where}")


@dataclass(frozen=True)
class Ring:
    """The polynomial ring F[x1..xn]."""

    field: FieldConfig
    nvars: int

    def __post_init__(self):
        if self.nvars < 0:
            raise ValueError("variable count must be non-negative")

    def zero(self) -> "SparsePoly":
        return SparsePoly._raw(self, {})

    def one(self) -> "SparsePoly":
        return self.const(1)

    def const(self, c) -> "SparsePoly":
        c = self.field.coerce(c)
        return SparsePoly._raw(self, {(0,) * self.nvars: c} if c != 0 else {})

    def var(self, i: int) -> "SparsePoly":
        """The variable x_i, 1-based."""
        if not 1 <= i <= self.nvars:
            raise IndexError(f"variable index {i} out of range 1..{self.nvars}")
        e = [0] * self.nvars
        e[i - 1] = 1
        return SparsePoly._raw(self, {tuple(e): self.field.one})

    def monomial(self, exponents: Sequence[int], coeff=1) -> "SparsePoly":
        return SparsePoly(self, {tuple(exponents): coeff})

    def variables(self) -> list["SparsePoly"]:
        return [self.var(i) for i in range(1, self.nvars + 1)]

    def parse(self, text: str) -> "SparsePoly":
        return parse_poly(text, self)

    def with_vars(self, nvars: int) -> "Ring":
        return Ring(self.field, nvars)

    def __str__(self) -> str:
        return f"{self.field}[x1..x{self.nvars}]"


class SparsePoly:
    __slots__ = ("ring", "_terms", "_hash")

    def __init__(self, ring: Ring, terms: Mapping[Sequence[int], object] | None = None):
        field = ring.field
        out: dict[Exponent, Scalar] = {}
        for exp, c in (terms or {}).items():
            exp = tuple(int(e) for e in exp)
            if len(exp) != ring.nvars:
                raise ValueError(f"exponent {exp} has length {len(exp)}, expected {ring.nvars}")
            if any(e < 0 for e in exp):
                raise ValueError(f"negative exponent in {exp}")
            c = field.add(out.get(exp, field.zero), field.coerce(c))
            if c == 0:
                out.pop(exp, None)
            else:
                out[exp] = c
        self.ring = ring
        self._terms = out
        self._hash = None

    @classmethod
    def _raw(cls, ring: Ring, terms: dict[Exponent, Scalar]) -> "SparsePoly":
        # terms must already be canonical: reduced scalars, no zeros
        p = object.__new__(cls)
        p.ring = ring
        p._terms = terms
        p._hash = None
        return p

    # basic properties

    @property
    def field(self) -> FieldConfig:
        return self.ring.field

    @property
    def nvars(self) -> int:
        return self.ring.nvars

    @property
    def terms(self) -> Mapping[Exponent, Scalar]:
        return dict(self._terms)

    def items(self) -> Iterator[tuple[Exponent, Scalar]]:
        """Terms in graded order: higher total degree first, then lex descending."""
        return iter(sorted(self._terms.items(), key=lambda kv: (-sum(kv[0]), tuple(-e for e in kv[0]))))

    def __len__(self) -> int:
        return len(self._terms)

    @property
    def is_zero(self) -> bool:
        return not self._terms

    @property
    def total_degree(self):
        """Max total degree of a term; :data:`MINUS_INF` for the zero polynomial."""
        if not self._terms:
            return MINUS_INF
        return max(sum(e) for e in self._terms)

    degree = total_degree

    @property
    def is_constant(self) -> bool:
        return self.total_degree <= 0

    @property
    def is_homogeneous(self) -> bool:
        return len({sum(e) for e in self._terms}) <= 1

    def coeff(self, exponents: Sequence[int]) -> Scalar:
        return self._terms.get(tuple(exponents), self.field.zero)

    # arithmetic

    def _check(self, other: "SparsePoly"):
        if not isinstance(other, SparsePoly):
            raise TypeError(f"expected SparsePoly, got {type(other).__name__}")
        if other.ring != self.ring:
            raise RingMismatch(f"ring mismatch: {self.ring} vs {other.ring}")

    def _lift(self, other) -> "SparsePoly":
        if isinstance(other, SparsePoly):
            self._check(other)
            return other
        if isinstance(other, (int, Fraction)):
            return self.ring.const(other)
        return NotImplemented

    def __add__(self, other):
        other = self._lift(other)
        if other is NotImplemented:
            return other
        if not other._terms:
            return self
        if not self._terms:
            return other
        p = self.field.modulus
        out = dict(self._terms)
        for e, c in other._terms.items():
            v = out.get(e)
            if v is None:
                out[e] = c
                continue
            v = v + c
            if p is not None:
                v %= p
            if v == 0:
                del out[e]
            else:
                out[e] = v
        return SparsePoly._raw(self.ring, out)

    __radd__ = __add__

    def __neg__(self):
        f = self.field
        return SparsePoly._raw(self.ring, {e: f.neg(c) for e, c in self._terms.items()})

    def __sub__(self, other):
        other = self._lift(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        other = self._lift(other)
        if other is NotImplemented:
            return other
        return other + (-self)

    def __mul__(self, other):
        other = self._lift(other)
        if other is NotImplemented:
            return other
        if not self._terms or not other._terms:
            return self.ring.zero()
        p = self.field.modulus
        a, b = self._terms, other._terms
        if len(a) < len(b):
            a, b = b, a
        out: dict[Exponent, Scalar] = {}
        get = out.get
        for eb, cb in b.items():
            for ea, ca in a.items():
                e = tuple(x + y for x, y in zip(ea, eb))
                out[e] = get(e, 0) + ca * cb
        if p is not None:
            out = {e: c % p for e, c in out.items() if c % p}
        else:
            out = {e: c for e, c in out.items() if c}
        return SparsePoly._raw(self.ring, out)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if not isinstance(k, int) or k < 0:
            raise ValueError("exponent must be a non-negative integer")
        result = self.ring.one()
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    def scale(self, c) -> "SparsePoly":
        f = self.field
        c = f.coerce(c)
        if c == 0:
            return self.ring.zero()
        return SparsePoly._raw(self.ring, {e: f.mul(v, c) for e, v in self._terms.items()})

    def __eq__(self, other):
        if isinstance(other, SparsePoly):
            return self.ring == other.ring and self._terms == other._terms
        if isinstance(other, (int, Fraction)):
            return self == self.ring.const(other)
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.ring, frozenset(self._terms.items())))
        return self._hash

    # calculus and structure

    def derivative(self, i: int) -> "SparsePoly":
        """Formal partial derivative with respect to x_i (1-based)."""
        if not 1 <= i <= self.nvars:
            raise IndexError(f"variable index {i} out of range 1..{self.nvars}")
        f = self.field
        k = i - 1
        out: dict[Exponent, Scalar] = {}
        for e, c in self._terms.items():
            if e[k] == 0:
                continue
            v = f.mul(c, f.coerce(e[k]))
            if v != 0:
                out[e[:k] + (e[k] - 1,) + e[k + 1:]] = v
        return SparsePoly._raw(self.ring, out)

    def homogeneous_component(self, d: int) -> "SparsePoly":
        if d < 0:
            raise ValueError("degree must be non-negative")
        return SparsePoly._raw(self.ring, {e: c for e, c in self._terms.items() if sum(e) == d})

    def truncate_above(self, d) -> "SparsePoly":
        """Terms of total degree at most ``d``."""
        return SparsePoly._raw(self.ring, {e: c for e, c in self._terms.items() if sum(e) <= d})

    def constant_term(self) -> Scalar:
        return self._terms.get((0,) * self.nvars, self.field.zero)

    def split_constant(self) -> tuple[Scalar, "SparsePoly"]:
        """Return ``(c, q)`` with ``self == q + c`` and ``q(0) == 0``."""
        z = (0,) * self.nvars
        c = self._terms.get(z, self.field.zero)
        if c == 0:
            return c, self
        return c, SparsePoly._raw(self.ring, {e: v for e, v in self._terms.items() if e != z})

    def evaluate(self, point: Sequence) -> Scalar:
        if len(point) != self.nvars:
            raise ValueError(f"point has {len(point)} coordinates, expected {self.nvars}")
        f = self.field
        pt = [f.coerce(v) for v in point]
        p = f.modulus
        total = f.zero
        for e, c in self._terms.items():
            term = c
            for x, k in zip(pt, e):
                if k:
                    term = term * (pow(x, k, p) if p is not None else x**k)
                    if p is not None:
                        term %= p
            total = total + term
        if p is not None:
            total %= p
        return total

    __call__ = evaluate

    def substitute(self, i: int, value: "SparsePoly") -> "SparsePoly":
        """Replace x_i (1-based) by ``value``."""
        self._check(value)
        k = i - 1
        out = self.ring.zero()
        powers = {0: self.ring.one()}
        for e, c in self._terms.items():
            if e[k] not in powers:
                powers[e[k]] = value ** e[k]
            rest = SparsePoly._raw(self.ring, {e[:k] + (0,) + e[k + 1:]: c})
            out = out + rest * powers[e[k]]
        return out

    def extend(self, ring: Ring) -> "SparsePoly":
        """Embed into a ring with at least as many variables (new variables appended)."""
        if ring.field != self.field or ring.nvars < self.nvars:
            raise RingMismatch(f"cannot embed {self.ring} into {ring}")
        pad = (0,) * (ring.nvars - self.nvars)
        return SparsePoly._raw(ring, {e + pad: c for e, c in self._terms.items()})

    def variables_used(self) -> set[int]:
        return {i + 1 for e in self._terms for i, k in enumerate(e) if k}

    # text / JSON

    def __str__(self) -> str:
        return format_poly(self)

    def __repr__(self) -> str:
        return f"SparsePoly({format_poly(self)!r}, {self.ring})"

    def to_json(self) -> list[dict]:
        return [{"exponents": list(e), "coeff": str(c)} for e, c in self.items()]

    @classmethod
    def from_json(cls, ring: Ring, data) -> "SparsePoly":
        if not isinstance(data, list):
            raise ParseError("polynomial JSON must be a list of terms")
        terms: dict[Exponent, Scalar] = {}
        f = ring.field
        for k, item in enumerate(data):
            try:
                exp = tuple(int(x) for x in item["exponents"])
                c = f.coerce(str(item["coeff"]))
            except (KeyError, TypeError, ValueError) as exc:
                raise ParseError(f"bad term #{k}: {exc}") from None
            if len(exp) != ring.nvars:
                raise ParseError(f"term #{k} has {len(exp)} exponents, expected {ring.nvars}")
            terms[exp] = f.add(terms.get(exp, f.zero), c)
        return cls(ring, terms)


# module-level operations


def poly_add(a: SparsePoly, b: SparsePoly) -> SparsePoly:
    a._check(b)
    return a + b


def poly_mul(a: SparsePoly, b: SparsePoly) -> SparsePoly:
    a._check(b)
    return a * b


def partial_derivative(p: SparsePoly, i: int) -> SparsePoly:
    return p.derivative(i)


def homogeneous_component(p: SparsePoly, d: int) -> SparsePoly:
    return p.homogeneous_component(d)


def constant_term(p: SparsePoly) -> Scalar:
    return p.constant_term()


def split_constant(p: SparsePoly) -> tuple[Scalar, SparsePoly]:
    return p.split_constant()


def evaluate(p: SparsePoly, point: Sequence) -> Scalar:
    return p.evaluate(point)


def poly_eq(a: SparsePoly, b: SparsePoly) -> bool:
    """Exact equality of canonical forms."""
    a._check(b)
    return a._terms == b._terms


def probably_equal(a: SparsePoly, b: SparsePoly, trials: int = 8, rng: random.Random | None = None) -> bool:
    """Random-evaluation hint; a ``False`` answer is certain, ``True`` is not.

    Never use this in place of :func:`poly_eq` when verifying.
    """
    a._check(b)
    rng = rng or random.Random(0)
    f = a.field
    bound = f.modulus if f.modulus is not None else 10**9
    for _ in range(trials):
        pt = [rng.randrange(bound) for _ in range(a.nvars)]
        if a.evaluate(pt) != b.evaluate(pt):
            return False
    return True


def sum_polys(ring: Ring, polys: Iterable[SparsePoly]) -> SparsePoly:
    out = ring.zero()
    for p in polys:
        out = out + p
    return out


# text format

_TOKEN = re.compile(r"\s*(?:(?P<num>\d+)|(?P<var>x(?P<idx>\d+))|(?P<op>[-+*/^()]))")


def _fmt_coeff(c: Scalar) -> str:
    return str(c)


def format_poly(p: SparsePoly) -> str:
    if p.is_zero:
        return "0"
    parts = []
    for e, c in p.items():
        factors = []
        for i, k in enumerate(e):
            if k == 1:
                factors.append(f"x{i + 1}")
            elif k > 1:
                factors.append(f"x{i + 1}^{k}")
        coeff = c
        neg = False
        if isinstance(c, Fraction) and c < 0:
            neg, coeff = True, -c
        cs = _fmt_coeff(coeff)
        if not factors:
            body = cs
        elif coeff == 1:
            body = "*".join(factors)
        else:
            body = "*".join([cs] + factors)
        parts.append(("- " if neg else "+ ") + body)
    text = " ".join(parts)
    return text[2:] if text.startswith("+ ") else "-" + text[2:]


class _Parser:
    def __init__(self, text: str, ring: Ring):
        self.text = text
        self.ring = ring
        self.toks: list[tuple[str, str, int]] = []
        pos = 0
        while pos < len(text):
            if text[pos:].strip() == "":
                break
            m = _TOKEN.match(text, pos)
            if not m:
                start = pos + (len(text[pos:]) - len(text[pos:].lstrip()))
                raise ParseError(f"unexpected character {text[start]!r}", start, text)
            if m.group("num") is not None:
                self.toks.append(("num", m.group("num"), m.start("num")))
            elif m.group("var") is not None:
                self.toks.append(("var", m.group("idx"), m.start("var")))
            else:
                self.toks.append(("op", m.group("op"), m.start("op")))
            pos = m.end()
        self.i = 0

    def peek(self):
        return self.toks[self.i] if self.i < len(self.toks) else ("eof", "", len(self.text))

    def take(self):
        tok = self.peek()
        self.i += 1
        return tok

    def expect(self, op: str):
        kind, val, pos = self.take()
        if kind != "op" or val != op:
            raise ParseError(f"expected {op!r}", pos, self.text)

    def parse(self) -> SparsePoly:
        if not self.toks:
            raise ParseError("empty polynomial", 0, self.text)
        p = self.expr()
        kind, val, pos = self.peek()
        if kind != "eof":
            raise ParseError(f"unexpected token {val!r}", pos, self.text)
        return p

    def expr(self) -> SparsePoly:
        kind, val, _ = self.peek()
        neg = False
        if kind == "op" and val in "+-":
            self.take()
            neg = val == "-"
        acc = self.term()
        if neg:
            acc = -acc
        while True:
            kind, val, _ = self.peek()
            if kind == "op" and val in "+-":
                self.take()
                t = self.term()
                acc = acc + t if val == "+" else acc - t
            else:
                return acc

    def term(self) -> SparsePoly:
        acc = self.power()
        while True:
            kind, val, pos = self.peek()
            if kind == "op" and val == "*":
                self.take()
                acc = acc * self.power()
            elif kind == "op" and val == "/":
                self.take()
                kind2, val2, pos2 = self.take()
                if kind2 != "num":
                    raise ParseError("division is only allowed by an integer constant", pos2, self.text)
                d = self.ring.field.coerce(int(val2))
                if d == 0:
                    raise ParseError("division by zero", pos2, self.text)
                acc = acc.scale(self.ring.field.inv(d))
            else:
                return acc

    def power(self) -> SparsePoly:
        base = self.atom()
        kind, val, _ = self.peek()
        if kind == "op" and val == "^":
            self.take()
            kind2, val2, pos2 = self.take()
            if kind2 != "num":
                raise ParseError("exponent must be a non-negative integer", pos2, self.text)
            return base ** int(val2)
        return base

    def atom(self) -> SparsePoly:
        kind, val, pos = self.take()
        if kind == "num":
            return self.ring.const(int(val))
        if kind == "var":
            i = int(val)
            if not 1 <= i <= self.ring.nvars:
                raise ParseError(f"variable x{i} outside x1..x{self.ring.nvars}", pos, self.text)
            return self.ring.var(i)
        if kind == "op" and val == "(":
            inner = self.expr()
            self.expect(")")
            return inner
        if kind == "op" and val == "-":
            return -self.power()
        raise ParseError(f"unexpected {val or 'end of input'!r}", pos, self.text)


def parse_poly(text: str, ring: Ring) -> SparsePoly:
    return _Parser(text, ring).parse()
