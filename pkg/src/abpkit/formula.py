"""Arithmetic formulas and their degree-reduction decomposition.

A formula is a tree of ``Add`` and ``Mul`` gates over ``Var`` and ``Const``
leaves.  Its size counts variable leaves only; scalar leaves are free.  A
vertex is addressed by its path from the root, a tuple of child indices.

The decomposition repeatedly finds a vertex whose formal degree lies in
``[t, 2t-1]`` for ``t = d // 3``, splits it off as a product term recorded
in the ledger, and replaces it by its constant term.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, reduce

from .abp import BoundViolation, ErrorLedger, PreconditionError, TransformReport, nonzero_pair
from .poly import ParseError, Ring, SparsePoly

Path = tuple[int, ...]


class Formula:
    """Base class for formula nodes; instances are immutable."""

    children: tuple = ()

    @cached_property
    def fdeg(self) -> int:
        raise NotImplementedError

    @cached_property
    def size(self) -> int:
        """Number of variable-labelled leaves."""
        return sum(c.size for c in self.children)

    @cached_property
    def total_leaves(self) -> int:
        return sum(c.total_leaves for c in self.children)

    @cached_property
    def depth(self) -> int:
        return 1 + max((c.depth for c in self.children), default=-1)

    def __str__(self) -> str:
        return format_formula(self)


@dataclass(frozen=True, eq=True)
class Var(Formula):
    index: int

    def __post_init__(self):
        if self.index < 1:
            raise ValueError("variable indices are 1-based")

    @cached_property
    def fdeg(self) -> int:
        return 1

    @cached_property
    def size(self) -> int:
        return 1

    @cached_property
    def total_leaves(self) -> int:
        return 1


@dataclass(frozen=True, eq=True)
class Const(Formula):
    value: object

    @cached_property
    def fdeg(self) -> int:
        return 0

    @cached_property
    def size(self) -> int:
        return 0

    @cached_property
    def total_leaves(self) -> int:
        return 1


@dataclass(frozen=True, eq=True)
class Add(Formula):
    children: tuple

    def __post_init__(self):
        object.__setattr__(self, "children", tuple(self.children))
        if len(self.children) < 2:
            raise ValueError("a sum gate needs fan-in at least 2")

    @cached_property
    def fdeg(self) -> int:
        return max(c.fdeg for c in self.children)


@dataclass(frozen=True, eq=True)
class Mul(Formula):
    children: tuple

    def __post_init__(self):
        object.__setattr__(self, "children", tuple(self.children))
        if len(self.children) < 2:
            raise ValueError("a product gate needs fan-in at least 2")

    @cached_property
    def fdeg(self) -> int:
        return sum(c.fdeg for c in self.children)


def add(*parts: Formula) -> Formula:
    return parts[0] if len(parts) == 1 else Add(parts)


def mul(*parts: Formula) -> Formula:
    return parts[0] if len(parts) == 1 else Mul(parts)


# semantics and structure


def formula_expand(f: Formula, ring: Ring) -> SparsePoly:
    """The polynomial computed by ``f`` in ``ring``."""
    if isinstance(f, Var):
        if f.index > ring.nvars:
            raise ValueError(f"x{f.index} is outside a ring with {ring.nvars} variables")
        return ring.var(f.index)
    if isinstance(f, Const):
        return ring.const(f.value)
    parts = [formula_expand(c, ring) for c in f.children]
    if isinstance(f, Add):
        return reduce(lambda a, b: a + b, parts)
    return reduce(lambda a, b: a * b, parts)


def fdeg(f: Formula) -> int:
    return f.fdeg


def max_var_index(f: Formula) -> int:
    if isinstance(f, Var):
        return f.index
    return max((max_var_index(c) for c in f.children), default=0)


def subformula(f: Formula, path: Path) -> Formula:
    for i in path:
        f = f.children[i]
    return f


def replace_at(f: Formula, path: Path, new: Formula) -> Formula:
    if not path:
        return new
    i, rest = path[0], path[1:]
    kids = list(f.children)
    kids[i] = replace_at(kids[i], rest, new)
    return type(f)(tuple(kids))


def vertices(f: Formula, prefix: Path = ()):
    """Every vertex path in pre-order."""
    yield prefix
    for i, c in enumerate(f.children):
        yield from vertices(c, prefix + (i,))


def binarize(f: Formula) -> Formula:
    """Split product gates of fan-in above 2 into balanced binary trees.

    Sum gates keep their fan-in.  Size and formal degree are unchanged.
    """
    if not f.children:
        return f
    kids = [binarize(c) for c in f.children]
    if isinstance(f, Add):
        return Add(kids)
    return _balanced_product(kids)


def _balanced_product(kids: list) -> Formula:
    if len(kids) == 1:
        return kids[0]
    mid = (len(kids) + 1) // 2
    return Mul((_balanced_product(kids[:mid]), _balanced_product(kids[mid:])))


def is_product_binary(f: Formula) -> bool:
    if isinstance(f, Mul) and len(f.children) > 2:
        return False
    return all(is_product_binary(c) for c in f.children)


def check_size_bound(f: Formula) -> bool:
    """Variable-leaf count is at least the formal degree."""
    return f.size >= f.fdeg


# band vertex and splitting


def find_band_vertex(f: Formula, t: int) -> Path:
    """Walk toward the heavier child until the formal degree drops to at most 2t-1.

    Ties go to the leftmost child.  Product gates must have fan-in at most 2
    (see :func:`binarize`), otherwise the walk may skip the band.
    """
    if t < 1:
        raise PreconditionError("the band threshold t must be positive")
    if f.fdeg < 2 * t:
        raise PreconditionError(f"formal degree {f.fdeg} is below 2t = {2 * t}")
    path: list[int] = []
    node = f
    while node.fdeg > 2 * t - 1:
        degs = [c.fdeg for c in node.children]
        i = degs.index(max(degs))
        if degs[i] < t:
            raise PreconditionError("product gate of fan-in above 2 skips the band; binarize first")
        path.append(i)
        node = node.children[i]
    if not t <= node.fdeg <= 2 * t - 1:
        raise BoundViolation(f"walk ended at formal degree {node.fdeg} outside [{t}, {2 * t - 1}]")
    return tuple(path)


@dataclass
class Split:
    """``F = h * G + f0`` where ``G`` is the subformula at ``path``."""

    path: Path
    sub: Formula
    h: SparsePoly
    f0: SparsePoly
    size_without: int


def split_at_vertex(f: Formula, path: Path, ring: Ring) -> Split:
    """Coefficients of ``y`` after replacing the subformula at ``path`` by ``y``."""
    sub = subformula(f, path)

    def walk(node: Formula, rest: Path):
        if not rest:
            return ring.one(), ring.zero()
        i = rest[0]
        h, f0 = walk(node.children[i], rest[1:])
        others = [formula_expand(c, ring) for j, c in enumerate(node.children) if j != i]
        if isinstance(node, Add):
            return h, f0 + reduce(lambda a, b: a + b, others)
        other = reduce(lambda a, b: a * b, others)
        return h * other, f0 * other

    h, f0 = walk(f, path)
    return Split(path, sub, h, f0, f.size - sub.size)


# decomposition


@dataclass
class Decomposition:
    formula: Formula
    pairs: list
    constant: object
    k: int
    threshold: int
    sources: list
    dropped: int = 0

    def ledger(self, ring: Ring) -> ErrorLedger:
        return ErrorLedger(ring, self.pairs, self.constant)


def _require(cond: bool, message: str):
    if not cond:
        raise BoundViolation(message)


def decompose_formula(f: Formula, ring: Ring) -> Decomposition:
    """Rewrite ``f`` as ``f' + sum(g_i * h_i) + c`` with ``fdeg(f') <= 2 * (d // 3)``.

    Products are binarized first.  Each round takes a band vertex ``v`` of the
    current formula, writes its subformula as ``alpha + g`` and its cofactor
    as ``beta + h``, keeps ``beta * f_v`` as a summand of ``f'`` unless
    ``beta`` is zero, and replaces ``f_v`` by the leaf ``alpha``; the
    constant collects ``-alpha * beta``.
    Pairs where ``g`` or ``h`` vanish are dropped.
    """
    field = ring.field
    d, s = f.fdeg, f.size
    t = d // 3
    if d < 3 or d <= 2 * t:
        return Decomposition(f, [], field.zero, 0, t, [])
    current = binarize(f)
    pieces: list[Formula] = []
    pairs: list = []
    sources: list = []
    const = field.zero
    dropped = 0
    removed_leaves = 0
    while current.fdeg > 2 * t:
        path = find_band_vertex(current, t)
        sp = split_at_vertex(current, path, ring)
        g_full = formula_expand(sp.sub, ring)
        alpha, g = g_full.split_constant()
        beta, h = sp.h.split_constant()
        removed_leaves += sp.sub.size
        sources.append(sp.sub)
        if beta != 0:
            pieces.append(Mul((Const(beta), sp.sub)))
        current = replace_at(current, path, Const(alpha))
        const = field.sub(const, field.mul(alpha, beta))
        if nonzero_pair(g, h):
            pairs.append((g, h))
        else:
            dropped += 1
    k = len(sources)
    out = add(*pieces, current)

    _require(removed_leaves + current.size == s, "source subformulas are not disjoint")
    _require(out.size <= s, f"size {out.size} exceeds {s}")
    _require(out.fdeg <= 2 * t, f"formal degree {out.fdeg} exceeds {2 * t}")
    _require(k * t <= s, f"k * floor(d/3) = {k * t} exceeds size {s}")
    for src in sources:
        _require(t <= src.fdeg <= 2 * t - 1, f"source formal degree {src.fdeg} outside band")
    for g, h in pairs:
        _require(g.constant_term() == 0 and h.constant_term() == 0, "pair has a constant term")
    return Decomposition(out, pairs, const, k, t, sources, dropped)


def reduce_formula_degree(f: Formula, target: int, ring: Ring) -> tuple[Formula, ErrorLedger, TransformReport]:
    """Apply :func:`decompose_formula` until the formal degree is at most ``target``."""
    if target < 1:
        raise PreconditionError("target must be at least 1")
    tau = f.size
    report = TransformReport("reduce-formula-degree", {"target": target}, _summary(f))
    ledger = ErrorLedger.empty(ring)
    current = f
    while current.fdeg > target:
        d = current.fdeg
        if d < 3:
            report.warnings.append(f"formal degree {d} is below 3; cannot reduce further")
            break
        dec = decompose_formula(current, ring)
        t = dec.threshold
        _require(dec.formula.size <= tau, "formula size grew")
        _require(3 * dec.formula.fdeg <= 2 * d, f"formal degree {dec.formula.fdeg} exceeds 2d/3")
        report.steps.append({
            "fdeg_before": d,
            "fdeg_after": dec.formula.fdeg,
            "size_after": dec.formula.size,
            "k": dec.k,
            "k_bound": tau / t,
            "dropped_pairs": dec.dropped,
        })
        _require(dec.k <= tau / t, f"k = {dec.k} exceeds tau / floor(d/3)")
        ledger = ledger.merged(dec.ledger(ring))
        current = dec.formula
    report.after = _summary(current)
    report.ledger_size = ledger.r
    report.hypotheses = {"reached_target": current.fdeg <= target}
    return current, ledger, report


def _summary(f: Formula) -> dict:
    return {"kind": "formula", "size": f.size, "fdeg": f.fdeg, "total_leaves": f.total_leaves}


# text and JSON forms


def _fmt_value(v) -> str:
    return str(v)


def format_formula(f: Formula) -> str:
    if isinstance(f, Var):
        return f"x{f.index}"
    if isinstance(f, Const):
        return _fmt_value(f.value)
    sep = " + " if isinstance(f, Add) else " * "
    return "(" + sep.join(format_formula(c) for c in f.children) + ")"


_FTOKEN = re.compile(r"\s*(?:(?P<num>-?\d+(?:/\d+)?)|(?P<var>x(?P<idx>\d+))|(?P<op>[+*()]))")


def _scalar(text: str):
    v = Fraction(text)
    return v.numerator if v.denominator == 1 else v


def parse_formula(text: str) -> Formula:
    """Parse infix text; each parenthesized group becomes one gate."""
    tokens = []
    pos = 0
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _FTOKEN.match(text, pos)
        if not m:
            start = pos + len(text[pos:]) - len(text[pos:].lstrip())
            raise ParseError(f"unexpected character {text[start]!r}", start, text)
        kind = m.lastgroup if m.lastgroup != "idx" else "var"
        start = m.start(kind)
        tokens.append((kind, m.group(kind), m.group("idx"), start))
        pos = m.end()
    tokens.append(("end", None, None, len(text)))
    i = 0

    def peek():
        return tokens[i]

    def take():
        nonlocal i
        tok = tokens[i]
        i += 1
        return tok

    def expr() -> Formula:
        parts = [term()]
        while peek()[1] == "+":
            take()
            parts.append(term())
        return add(*parts)

    def term() -> Formula:
        parts = [atom()]
        while peek()[1] == "*":
            take()
            parts.append(atom())
        return mul(*parts)

    def atom() -> Formula:
        kind, val, idx, at = take()
        if kind == "num":
            return Const(_scalar(val))
        if kind == "var":
            if int(idx) < 1:
                raise ParseError("variable indices start at 1", at, text)
            return Var(int(idx))
        if val == "(":
            inner = expr()
            k2, v2, _, at2 = take()
            if v2 != ")":
                raise ParseError("expected ')'", at2, text)
            return inner
        raise ParseError(f"unexpected {'end of input' if kind == 'end' else repr(val)}", at, text)

    out = expr()
    kind, val, _, at = peek()
    if kind != "end":
        raise ParseError(f"unexpected {val!r}", at, text)
    return out


def formula_to_json(f: Formula) -> dict:
    if isinstance(f, Var):
        return {"op": "var", "index": f.index}
    if isinstance(f, Const):
        return {"op": "const", "value": _fmt_value(f.value)}
    return {"op": "+" if isinstance(f, Add) else "*", "children": [formula_to_json(c) for c in f.children]}


def formula_from_json(data, where: str = "$") -> Formula:
    if not isinstance(data, dict) or "op" not in data:
        raise ParseError(f"{where}: expected an object with an 'op' field")
    op = data["op"]
    try:
        if op == "var":
            return Var(int(data["index"]))
        if op == "const":
            return Const(_scalar(str(data["value"])))
        if op in ("+", "*"):
            kids = [formula_from_json(c, f"{where}.children[{k}]") for k, c in enumerate(data["children"])]
            return Add(kids) if op == "+" else Mul(kids)
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, ParseError):
            raise
        raise ParseError(f"{where}: {exc}") from None
    raise ParseError(f"{where}: unknown op {op!r}")
