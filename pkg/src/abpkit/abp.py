"""Algebraic branching programs: layered, multilayered and unlayered.

An ABP is a DAG with a start vertex ``s`` and an end vertex ``t`` whose edges
carry polynomial labels.  It computes the sum over all s-t paths of the
product of the labels along the path.  Vertices are plain integers; layered
ABPs keep their layers as explicit tuples because the transformations
address layers by index.

Objects are treated as immutable: every transformation builds a new one.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping, Sequence

from .graphs import CyclicGraphError, Dag
from .poly import MINUS_INF, Ring, SparsePoly

log = logging.getLogger(__name__)

Edge = tuple[int, int]


class AbpError(ValueError):
    pass


class PreconditionError(AbpError):
    """An operation was called outside the range where it is defined."""


class BoundViolation(AssertionError):
    """A quoted size/depth/degree bound failed on an actual output."""


class _GraphAbp:
    """Shared behaviour of the single-graph models."""

    ring: Ring
    delta: int
    edges: Mapping[Edge, SparsePoly]

    @property
    def vertices(self) -> tuple[int, ...]:
        raise NotImplementedError

    @property
    def s(self) -> int:
        raise NotImplementedError

    @property
    def t(self) -> int:
        raise NotImplementedError

    @cached_property
    def dag(self) -> Dag:
        return Dag(self.vertices, list(self.edges))

    @cached_property
    def order(self) -> list[int]:
        return self.dag.topological_order()

    @property
    def num_vertices(self) -> int:
        return len(self.vertices)

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    @property
    def size(self) -> int:
        return self.num_vertices

    def successors(self, u: int) -> list[int]:
        return self.dag.succ.get(u, [])

    def predecessors(self, v: int) -> list[int]:
        return self.dag.pred.get(v, [])

    def label(self, u: int, v: int) -> SparsePoly:
        return self.edges.get((u, v), self.ring.zero())


@dataclass(frozen=True, eq=False)
class LayeredAbp(_GraphAbp):
    """Layered ABP; ``layers[0] == (s,)`` and ``layers[-1] == (t,)``."""

    ring: Ring
    delta: int
    layers: tuple[tuple[int, ...], ...]
    edges: Mapping[Edge, SparsePoly] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "layers", tuple(tuple(layer) for layer in self.layers))
        object.__setattr__(self, "edges", dict(self.edges))

    @cached_property
    def vertices(self) -> tuple[int, ...]:
        return tuple(v for layer in self.layers for v in layer)

    @property
    def s(self) -> int:
        return self.layers[0][0]

    @property
    def t(self) -> int:
        return self.layers[-1][0]

    @property
    def num_layers(self) -> int:
        return len(self.layers)

    @cached_property
    def order(self) -> list[int]:
        return list(self.vertices)

    @cached_property
    def layer_of(self) -> dict[int, int]:
        """0-based layer index of each vertex."""
        return {v: j for j, layer in enumerate(self.layers) for v in layer}

    def width(self, j: int) -> int:
        """Vertex count of layer ``j`` (1-based); 0 past the last layer."""
        return len(self.layers[j - 1]) if 1 <= j <= len(self.layers) else 0

    def __eq__(self, other):
        if not isinstance(other, LayeredAbp):
            return NotImplemented
        return (self.ring, self.delta, self.layers, self.edges) == (other.ring, other.delta, other.layers, other.edges)


@dataclass(frozen=True, eq=False)
class UnlayeredAbp(_GraphAbp):
    ring: Ring
    delta: int
    vertex_ids: tuple[int, ...]
    edges: Mapping[Edge, SparsePoly]
    start: int
    end: int

    def __post_init__(self):
        object.__setattr__(self, "vertex_ids", tuple(self.vertex_ids))
        object.__setattr__(self, "edges", dict(self.edges))

    @property
    def vertices(self) -> tuple[int, ...]:
        return self.vertex_ids

    @property
    def s(self) -> int:
        return self.start

    @property
    def t(self) -> int:
        return self.end

    def __eq__(self, other):
        if not isinstance(other, UnlayeredAbp):
            return NotImplemented
        return (self.ring, self.delta, self.vertex_ids, self.edges, self.start, self.end) == (
            other.ring, other.delta, other.vertex_ids, other.edges, other.start, other.end)

    @classmethod
    def from_layered(cls, abp: LayeredAbp) -> "UnlayeredAbp":
        return cls(abp.ring, abp.delta, abp.vertices, abp.edges, abp.s, abp.t)


@dataclass(frozen=True, eq=False)
class MultilayeredAbp:
    """Layered branches placed in parallel with their endpoints identified."""

    branches: tuple[LayeredAbp, ...]

    def __post_init__(self):
        object.__setattr__(self, "branches", tuple(self.branches))
        if not self.branches:
            raise AbpError("a multilayered ABP needs at least one branch")
        r, d = self.branches[0].ring, self.branches[0].delta
        for b in self.branches:
            if b.ring != r:
                raise AbpError("branches live in different rings")
            if b.delta != d:
                raise AbpError("branches have different label-degree bounds")

    @property
    def ring(self) -> Ring:
        return self.branches[0].ring

    @property
    def delta(self) -> int:
        return self.branches[0].delta

    @property
    def num_layers(self) -> int:
        return max(b.num_layers for b in self.branches)

    @property
    def size(self) -> int:
        return 2 + sum(b.size - 2 for b in self.branches)

    @property
    def num_edges(self) -> int:
        return sum(b.num_edges for b in self.branches)

    def width(self, j: int) -> int:
        """Total vertex count of layer ``j`` (1-based) summed over branches."""
        return sum(b.width(j) for b in self.branches)

    def merged(self) -> UnlayeredAbp:
        """Single graph with the shared start (id 0) and end (id 1).

        Parallel s-t edges from different branches are merged by adding labels.
        """
        ids = itertools.count(2)
        vertices = [0, 1]
        edges: dict[Edge, SparsePoly] = {}
        for b in self.branches:
            rename = {b.s: 0, b.t: 1}
            for v in b.vertices:
                if v not in rename:
                    rename[v] = next(ids)
                    vertices.append(rename[v])
            for (u, v), lab in b.edges.items():
                key = (rename[u], rename[v])
                edges[key] = edges[key] + lab if key in edges else lab
        return UnlayeredAbp(self.ring, self.delta, vertices, edges, 0, 1)

    def __eq__(self, other):
        if not isinstance(other, MultilayeredAbp):
            return NotImplemented
        return self.branches == other.branches

    @classmethod
    def single(cls, abp: LayeredAbp) -> "MultilayeredAbp":
        return cls((abp,))


AnyAbp = LayeredAbp | UnlayeredAbp | MultilayeredAbp


# semantics


def forward_sums(abp: _GraphAbp, source: int | None = None) -> dict[int, SparsePoly]:
    """``[source, v]`` for every vertex ``v`` reachable from ``source``."""
    source = abp.s if source is None else source
    one = abp.ring.one()
    val = {source: one}
    started = False
    for u in abp.order:
        if u == source:
            started = True
        if not started or u not in val:
            continue
        pu = val[u]
        if pu.is_zero:
            continue
        for v in abp.successors(u):
            term = pu * abp.edges[(u, v)]
            val[v] = val[v] + term if v in val else term
    return val


def backward_sums(abp: _GraphAbp, sink: int | None = None) -> dict[int, SparsePoly]:
    """``[u, sink]`` for every vertex ``u`` that reaches ``sink``."""
    sink = abp.t if sink is None else sink
    val = {sink: abp.ring.one()}
    started = False
    for v in reversed(abp.order):
        if v == sink:
            started = True
        if not started or v not in val:
            continue
        pv = val[v]
        if pv.is_zero:
            continue
        for u in abp.predecessors(v):
            term = abp.edges[(u, v)] * pv
            val[u] = val[u] + term if u in val else term
    return val


def path_sum(abp: _GraphAbp, u: int, v: int) -> SparsePoly:
    """Sum over u-v paths of the product of edge labels (zero if none)."""
    known = set(abp.vertices)
    for w in (u, v):
        if w not in known:
            raise AbpError(f"unknown vertex {w}")
    return forward_sums(abp, u).get(v, abp.ring.zero())


def computed_polynomial(abp: AnyAbp) -> SparsePoly:
    if isinstance(abp, MultilayeredAbp):
        out = abp.ring.zero()
        for b in abp.branches:
            out = out + computed_polynomial(b)
        return out
    return path_sum(abp, abp.s, abp.t)


def formal_degrees(abp: _GraphAbp) -> dict[int, int]:
    """Formal degree of every vertex that has one.

    Only edges with nonzero labels count; a vertex with no nonzero-labelled
    path from ``s`` has no formal degree and is omitted.
    """
    fdeg = {abp.s: 0}
    for v in abp.order:
        if v == abp.s:
            continue
        best = None
        for u in abp.predecessors(v):
            lab = abp.edges[(u, v)]
            if lab.is_zero or u not in fdeg:
                continue
            cand = fdeg[u] + max(lab.total_degree, 0)
            if best is None or cand > best:
                best = cand
        if best is not None:
            fdeg[v] = best
    return fdeg


def formal_degree(abp: _GraphAbp, v: int | None = None) -> int:
    """Formal degree of vertex ``v``, or of the whole ABP when ``v`` is None."""
    if isinstance(abp, MultilayeredAbp):
        if v is not None:
            raise AbpError("address vertices of a multilayered ABP through its branches")
        return max(formal_degree(b) for b in abp.branches)
    fd = formal_degrees(abp)
    if v is None:
        return max(fd.values())
    if v not in fd:
        raise AbpError(f"vertex {v} has no nonzero path from s; formal degree undefined")
    return fd[v]


def depth_of(abp: _GraphAbp, v: int) -> int:
    d = abp.dag.depths_from(abp.s)
    if v not in d:
        raise AbpError(f"vertex {v} is not reachable from s")
    return d[v]


def vertex_depths(abp: _GraphAbp) -> dict[int, int]:
    return abp.dag.depths_from(abp.s)


def depth(abp: AnyAbp) -> int:
    """Length in edges of a longest s-t path."""
    if isinstance(abp, MultilayeredAbp):
        return abp.num_layers - 1
    return depth_of(abp, abp.t)


# structure checks


def validate(abp: AnyAbp) -> list[str]:
    """Every violated invariant, as human-readable strings; empty if well formed."""
    if isinstance(abp, MultilayeredAbp):
        out = []
        for i, b in enumerate(abp.branches):
            out.extend(f"branch {i}: {msg}" for msg in validate(b))
        return out
    problems: list[str] = []
    ring = abp.ring
    if abp.delta < 1:
        problems.append(f"label degree bound must be >= 1, got {abp.delta}")
    verts = set(abp.vertices)
    if len(verts) != len(abp.vertices):
        problems.append("duplicate vertex ids")
    for (u, v), lab in abp.edges.items():
        if u not in verts or v not in verts:
            problems.append(f"edge ({u}, {v}) references an unknown vertex")
            continue
        if not isinstance(lab, SparsePoly) or lab.ring != ring:
            problems.append(f"edge ({u}, {v}) label is not in {ring}")
            continue
        if lab.total_degree > abp.delta:
            problems.append(f"edge ({u}, {v}) label degree {lab.total_degree} exceeds {abp.delta}")
    if problems:
        return problems
    if isinstance(abp, LayeredAbp):
        if len(abp.layers) < 2:
            problems.append("a layered ABP needs at least two layers")
        if abp.layers and len(abp.layers[0]) != 1:
            problems.append("first layer must be a single start vertex")
        if abp.layers and len(abp.layers[-1]) != 1:
            problems.append("last layer must be a single end vertex")
        if any(len(layer) == 0 for layer in abp.layers):
            problems.append("empty layer")
        lay = abp.layer_of
        for u, v in abp.edges:
            if lay[v] != lay[u] + 1:
                problems.append(f"edge ({u}, {v}) goes from layer {lay[u] + 1} to layer {lay[v] + 1}")
        return problems
    try:
        abp.dag.topological_order()
    except CyclicGraphError as exc:
        return problems + [str(exc)]
    if abp.s == abp.t:
        problems.append("start and end coincide")
    useful = abp.dag.reachable_from(abp.s) & abp.dag.reaching(abp.t)
    for v in abp.vertices:
        if v not in useful:
            problems.append(f"vertex {v} lies on no s-t path")
    return problems


def check(abp: AnyAbp) -> AnyAbp:
    problems = validate(abp)
    if problems:
        raise AbpError("; ".join(problems))
    return abp


def normalize(abp):
    """Drop edges labelled by the zero polynomial."""
    if isinstance(abp, MultilayeredAbp):
        return MultilayeredAbp(tuple(normalize(b) for b in abp.branches))
    edges = {e: lab for e, lab in abp.edges.items() if not lab.is_zero}
    if isinstance(abp, LayeredAbp):
        return LayeredAbp(abp.ring, abp.delta, abp.layers, edges)
    return UnlayeredAbp(abp.ring, abp.delta, abp.vertices, edges, abp.s, abp.t)


def prune(abp: UnlayeredAbp) -> UnlayeredAbp:
    """Remove vertices that lie on no s-t path, logging a warning if any."""
    useful = abp.dag.reachable_from(abp.s) & abp.dag.reaching(abp.t)
    dropped = [v for v in abp.vertices if v not in useful]
    if not dropped:
        return abp
    log.warning("pruning %d vertices off every s-t path: %s", len(dropped), dropped)
    return UnlayeredAbp(
        abp.ring,
        abp.delta,
        [v for v in abp.vertices if v in useful],
        {(u, v): lab for (u, v), lab in abp.edges.items() if u in useful and v in useful},
        abp.s,
        abp.t,
    )


def summary(abp: AnyAbp) -> dict:
    """Sizes and depth facts that transform reports record."""
    if isinstance(abp, MultilayeredAbp):
        return {
            "kind": "multilayered",
            "size": abp.size,
            "layers": abp.num_layers,
            "edges": abp.num_edges,
            "branches": len(abp.branches),
        }
    if isinstance(abp, LayeredAbp):
        return {"kind": "layered", "size": abp.size, "layers": abp.num_layers, "edges": abp.num_edges}
    return {"kind": "unlayered", "size": abp.size, "depth": depth(abp), "edges": abp.num_edges}


# error ledger


@dataclass(frozen=True, eq=False)
class ErrorLedger:
    """Record of how a transformation perturbed the computed polynomial.

    Sign convention, fixed for every transform::

        F_in == F_out + sum(P * Q for P, Q in pairs) + delta + remainder
    """

    ring: Ring
    pairs: tuple[tuple[SparsePoly, SparsePoly], ...] = ()
    delta: object = None
    remainder: SparsePoly | None = None
    degree_bound: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "pairs", tuple((p, q) for p, q in self.pairs))
        object.__setattr__(self, "delta", self.ring.field.coerce(0 if self.delta is None else self.delta))
        if self.remainder is None:
            object.__setattr__(self, "remainder", self.ring.zero())

    @classmethod
    def empty(cls, ring: Ring) -> "ErrorLedger":
        return cls(ring)

    @property
    def r(self) -> int:
        return len(self.pairs)

    def __len__(self) -> int:
        return len(self.pairs)

    def with_pairs(self, pairs: Iterable[tuple[SparsePoly, SparsePoly]], delta=0) -> "ErrorLedger":
        f = self.ring.field
        return ErrorLedger(
            self.ring,
            self.pairs + tuple(pairs),
            f.add(self.delta, f.coerce(delta)),
            self.remainder,
            self.degree_bound,
        )

    def merged(self, other: "ErrorLedger") -> "ErrorLedger":
        if other.ring != self.ring:
            raise AbpError("ledgers live in different rings")
        bound = self.degree_bound
        if other.degree_bound is not None:
            bound = other.degree_bound if bound is None else max(bound, other.degree_bound)
        return ErrorLedger(
            self.ring,
            self.pairs + other.pairs,
            self.ring.field.add(self.delta, other.delta),
            self.remainder + other.remainder,
            bound,
        )

    def contribution(self) -> SparsePoly:
        out = self.remainder + self.ring.const(self.delta)
        for p, q in self.pairs:
            out = out + p * q
        return out

    def violations(self) -> list[str]:
        out = []
        for k, (p, q) in enumerate(self.pairs):
            for name, poly in (("P", p), ("Q", q)):
                if poly.is_zero:
                    out.append(f"pair {k}: {name} is identically zero")
                elif poly.constant_term() != 0:
                    out.append(f"pair {k}: {name} has nonzero constant term {poly.constant_term()}")
        if self.degree_bound is not None and self.remainder.total_degree > self.degree_bound:
            out.append(f"remainder degree {self.remainder.total_degree} exceeds {self.degree_bound}")
        return out

    def __eq__(self, other):
        if not isinstance(other, ErrorLedger):
            return NotImplemented
        return (self.ring, self.pairs, self.delta, self.remainder, self.degree_bound) == (
            other.ring, other.pairs, other.delta, other.remainder, other.degree_bound)


def apply_ledger(F: SparsePoly, ledger: ErrorLedger) -> SparsePoly:
    """``F + sum(P*Q) + delta + R``: the input polynomial, given the output one."""
    return F + ledger.contribution()


def nonzero_pair(p: SparsePoly, q: SparsePoly) -> bool:
    return not p.is_zero and not q.is_zero


@dataclass
class TransformReport:
    """What a pipeline did, step by step, in JSON-ready form."""

    pipeline: str
    params: dict = field(default_factory=dict)
    before: dict = field(default_factory=dict)
    after: dict = field(default_factory=dict)
    steps: list[dict] = field(default_factory=list)
    hypotheses: dict = field(default_factory=dict)
    warnings: list[str] = field(default_factory=list)
    ledger_size: int = 0

    def to_json(self) -> dict:
        return {
            "pipeline": self.pipeline,
            "params": self.params,
            "before": self.before,
            "after": self.after,
            "steps": self.steps,
            "hypotheses": self.hypotheses,
            "warnings": self.warnings,
            "ledger_size": self.ledger_size,
        }


def chain(ring: Ring, labels: Sequence[SparsePoly], delta: int = 1) -> LayeredAbp:
    """A width-one layered ABP whose k edges carry ``labels`` in order."""
    layers = [(j,) for j in range(len(labels) + 1)]
    edges = {(j, j + 1): lab for j, lab in enumerate(labels)}
    return LayeredAbp(ring, delta, layers, edges)
