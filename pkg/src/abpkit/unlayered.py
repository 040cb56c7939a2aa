"""Depth reduction for unlayered ABPs by vertex cuts.

A cut at ``v`` splits it into an in-copy that feeds ``t`` through the
constant ``beta = [v, t](0)`` and an out-copy fed from ``s`` through
``alpha = [s, v](0)``.  The vertices to cut are the heads of a sparse edge
set whose removal halves the depth (Valiant's bit-class argument), filtered
to a middle depth band.

All logarithms are base 2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .abp import (
    BoundViolation,
    ErrorLedger,
    PreconditionError,
    TransformReport,
    UnlayeredAbp,
    _GraphAbp,
    backward_sums,
    forward_sums,
    nonzero_pair,
    summary,
)
from .graphs import Dag

#: ratio |E'| / (4m/log n) at or above which an instance is flagged as tight
TIGHT_RATIO = 0.95


def _require(cond: bool, message: str):
    if not cond:
        raise BoundViolation(message)


def _as_dag(obj) -> Dag:
    if isinstance(obj, Dag):
        return obj
    if isinstance(obj, _GraphAbp):
        return obj.dag
    raise TypeError(f"expected a Dag or an ABP, got {type(obj).__name__}")


def levels(dag: Dag) -> dict:
    """Length of a longest path ending at each vertex: a valid labeling."""
    lvl: dict = {}
    for u in dag.topological_order():
        lvl[u] = max((lvl[w] + 1 for w in dag.pred.get(u, ())), default=0)
    return lvl


def drop_bits(label: int, bits) -> int:
    """Delete the given bit positions from ``label``, closing the gaps."""
    out, k = 0, 0
    for pos in range(label.bit_length()):
        if pos in bits:
            continue
        out |= ((label >> pos) & 1) << k
        k += 1
    return out


def msb_class(a: int, b: int) -> int:
    """Position of the most significant bit where ``a`` and ``b`` differ."""
    return (a ^ b).bit_length() - 1


@dataclass
class EdgeRemoval:
    edges: frozenset
    depth: int
    padded_depth: int
    bits: tuple[int, ...]
    class_sizes: dict[int, int]
    edge_bound: float
    depth_after: int
    labels: dict = field(repr=False, default_factory=dict)

    @property
    def ratio(self) -> float:
        return len(self.edges) / self.edge_bound if self.edge_bound else 0.0

    @property
    def tight(self) -> bool:
        return self.ratio >= TIGHT_RATIO


def _check_depth_precondition(d: int, n: int):
    if n < 4:
        raise PreconditionError(f"ambient parameter n={n} must be at least 4")
    if d * d < n:
        raise PreconditionError(f"depth {d} is below sqrt(n) = {math.sqrt(n):.3f}")


def valiant_edge_set(dag, n: int) -> EdgeRemoval:
    """A set of at most ``4m/log n`` edges whose removal leaves depth at most d/2.

    Vertices are labelled by their level, edges are classed by the most
    significant differing bit of their endpoint labels, and the two smallest
    classes (lowest bit position first on ties) are removed.
    """
    g = _as_dag(dag)
    lvl = levels(g)
    d = max(lvl.values(), default=0)
    _check_depth_precondition(d, n)
    m = len(g.edges)
    k = d.bit_length()
    padded = 1 << k
    classes: dict[int, list] = {i: [] for i in range(k)}
    for u, v in g.edges:
        classes[msb_class(lvl[u], lvl[v])].append((u, v))
    sizes = {i: len(es) for i, es in classes.items()}
    bits = tuple(sorted(sorted(classes, key=lambda i: (sizes[i], i))[:2]))
    removed = frozenset(e for i in bits for e in classes[i])

    relabel = {v: drop_bits(x, set(bits)) for v, x in lvl.items()}
    kept = [e for e in g.edges if e not in removed]
    for u, v in kept:
        _require(relabel[u] < relabel[v], f"relabeling is not valid on edge ({u}, {v})")
    _require(max(relabel.values(), default=0) < padded // 4, "relabeling exceeds d'/4 values")

    bound = 4 * m / math.log2(n)
    after = g.without_edges(removed).longest_path_length()
    _require(len(removed) <= bound, f"|E'| = {len(removed)} exceeds 4m/log n = {bound:.3f}")
    _require(2 * after <= d, f"depth after removal {after} exceeds d/2 = {d / 2}")
    return EdgeRemoval(removed, d, padded, bits, sizes, bound, after, lvl)


@dataclass
class BandVertexSet:
    vertices: tuple
    removal: EdgeRemoval
    kept_edges: frozenset
    depth: int
    residual_depth: int
    residual_bound: float

    def __iter__(self):
        return iter(self.vertices)

    def __len__(self):
        return len(self.vertices)


def residual_depth_bound(d: int) -> float:
    """3d/4 once d >= 36; below that the exact path-splitting sum."""
    return 3 * d / 4 if d >= 36 else d / 9 + d / 2 + d / 9 + 1


def middle_band_vertex_set(dag, n: int) -> BandVertexSet:
    """Heads of Valiant edges whose depth lies strictly inside (d/9, 8d/9)."""
    g = _as_dag(dag)
    removal = valiant_edge_set(g, n)
    lvl, d = removal.labels, removal.depth
    kept = frozenset(e for e in removal.edges if d < 9 * lvl[e[1]] < 8 * d)
    heads = tuple(sorted({v for _, v in kept}))
    residual = g.without_vertices(heads).longest_path_length()
    bound = residual_depth_bound(d)
    _require(len(heads) <= removal.edge_bound, f"|U| = {len(heads)} exceeds 4m/log n")
    for u in heads:
        _require(d <= 9 * lvl[u] <= 8 * d, f"vertex {u} at depth {lvl[u]} outside [d/9, 8d/9]")
    _require(residual <= bound, f"residual depth {residual} exceeds {bound}")
    return BandVertexSet(heads, removal, kept, d, residual, bound)


def cut_vertex(abp: UnlayeredAbp, v: int) -> tuple[UnlayeredAbp, ErrorLedger, dict]:
    """Duplicate ``v`` into an in-copy wired to t and an out-copy wired from s.

    The in-copy keeps the id ``v``; the out-copy gets ``max(id) + 1``.
    """
    if v in (abp.s, abp.t):
        raise PreconditionError("cannot cut the start or end vertex")
    if v not in abp.vertices:
        raise PreconditionError(f"unknown vertex {v}")
    ring, f = abp.ring, abp.ring.field
    zero = ring.zero()
    alpha, p = forward_sums(abp).get(v, zero).split_constant()
    beta, q = backward_sums(abp).get(v, zero).split_constant()
    twin = max(abp.vertices) + 1
    edges = {}
    for (a, b), lab in abp.edges.items():
        if a == v:
            edges[(twin, b)] = lab
        else:
            edges[(a, b)] = lab
    edges[(v, abp.t)] = ring.const(beta)
    edges[(abp.s, twin)] = ring.const(alpha)
    out = UnlayeredAbp(ring, abp.delta, abp.vertices + (twin,), edges, abp.s, abp.t)

    depths = abp.dag.depths_from(abp.s)
    d, dv = depths[abp.t], depths[v]
    without = abp.dag.without_vertices([v]).depths_from(abp.s).get(abp.t, 0)
    bound = max(without, dv + 1, d - dv + 1)
    new_depth = out.dag.depths_from(out.s)[out.t]
    _require(out.num_vertices == abp.num_vertices + 1, "cut must add exactly one vertex")
    _require(out.num_edges == abp.num_edges + 2, "cut must add exactly two edges")
    _require(new_depth <= bound, f"depth after cut {new_depth} exceeds {bound}")

    pairs = [(p, q)] if nonzero_pair(p, q) else []
    ledger = ErrorLedger(ring, pairs, f.neg(f.mul(alpha, beta)))
    info = {"vertex": v, "twin": twin, "alpha": str(alpha), "beta": str(beta),
            "depth_before": d, "depth_after": new_depth, "depth_bound": bound}
    return out, ledger, info


def cut_vertices(abp: UnlayeredAbp, vertices) -> tuple[UnlayeredAbp, ErrorLedger]:
    """Cut each vertex in ascending id order."""
    ledger = ErrorLedger.empty(abp.ring)
    for v in sorted(vertices):
        abp, led, _ = cut_vertex(abp, v)
        ledger = ledger.merged(led)
    return abp, ledger


def _depth(abp: UnlayeredAbp) -> int:
    return abp.dag.depths_from(abp.s)[abp.t]


def depth_reduce_once(abp: UnlayeredAbp, n: int | None = None) -> tuple[UnlayeredAbp, ErrorLedger, TransformReport]:
    """Cut the middle-band vertex set once; depth drops to at most 9d/10 for large d."""
    n = abp.ring.nvars if n is None else n
    d = _depth(abp)
    _check_depth_precondition(d, n)
    tau, m = abp.num_vertices, abp.num_edges
    band = middle_band_vertex_set(abp, n)
    depths = abp.dag.depths_from(abp.s)
    out, ledger = cut_vertices(abp, band.vertices)

    log_n = math.log2(n)
    new_depth = _depth(out)
    exact = max([band.residual_depth] + [depths[u] + 1 for u in band] + [d - depths[u] + 1 for u in band])
    _require(out.num_vertices <= tau + 4 * m / log_n, "vertex growth exceeds 4m/log n")
    _require(out.num_edges <= m + 8 * m / log_n, "edge growth exceeds 8m/log n")
    _require(ledger.r <= len(band), "more ledger pairs than cut vertices")
    _require(new_depth <= exact, f"depth {new_depth} exceeds the cut bound {exact}")
    nine_tenths = 10 * new_depth <= 9 * d
    if d >= 90:
        _require(nine_tenths, f"depth {new_depth} exceeds 9d/10 at d = {d}")

    step = {
        "depth_before": d,
        "depth_after": new_depth,
        "vertices_before": tau,
        "vertices_after": out.num_vertices,
        "edges_before": m,
        "edges_after": out.num_edges,
        "cut_set": list(band.vertices),
        "removed_edges": len(band.removal.edges),
        "edge_bound": band.removal.edge_bound,
        "edge_ratio": band.removal.ratio,
        "tight": band.removal.tight,
        "residual_depth": band.residual_depth,
        "cut_depth_bound": exact,
        "nine_tenths_held": nine_tenths,
        "ledger_added": ledger.r,
    }
    report = TransformReport("depth-reduce-once", {"n": n}, summary(abp), summary(out), [step])
    report.ledger_size = ledger.r
    if not nine_tenths:
        report.warnings.append(f"depth {new_depth} > 9d/10 at d = {d} (below the large-d regime)")
    return out, ledger, report


def depth_reduce_full(
    abp: UnlayeredAbp, n: int | None = None, delta: int | None = None, max_iterations: int = 200
) -> tuple[UnlayeredAbp, ErrorLedger, TransformReport]:
    """Repeat :func:`depth_reduce_once` until depth <= n/delta or depth < sqrt(n).

    Runs regardless of whether the asymptotic hypotheses hold; the report
    records which of them did.
    """
    n = abp.ring.nvars if n is None else n
    delta = abp.delta if delta is None else delta
    if n < 4:
        raise PreconditionError(f"ambient parameter n={n} must be at least 4")
    log_n = math.log2(n)
    loglog = math.log2(log_n) + math.log2(delta)
    k_bound = math.ceil(7 * loglog)
    m0, tau0, d0 = abp.num_edges, abp.num_vertices, _depth(abp)
    big_m = n * log_n / (500 * loglog) if loglog > 0 else math.inf

    report = TransformReport("depth-reduce-unlayered", {"n": n, "delta": delta}, summary(abp))
    ledger = ErrorLedger.empty(abp.ring)
    current = abp
    i = 0
    while True:
        d = _depth(current)
        if d * delta <= n or d * d <= n or i >= max_iterations:
            break
        nxt, led, step_report = depth_reduce_once(current, n)
        i += 1
        step = step_report.steps[0]
        growth_cap = m0 * (1 + 8 / log_n) ** i
        _require(nxt.num_edges <= growth_cap, f"edges {nxt.num_edges} exceed m0(1+8/log n)^{i}")
        step["iteration"] = i
        step["edge_growth_cap"] = growth_cap
        step["depth_ratio"] = step["depth_after"] / d
        report.steps.append(step)
        report.warnings.extend(step_report.warnings)
        ledger = ledger.merged(led)
        if _depth(nxt) >= d:
            report.warnings.append(f"no depth progress at iteration {i}; stopping")
            current = nxt
            break
        current = nxt

    final_depth = _depth(current)
    report.after = summary(current)
    report.ledger_size = ledger.r
    report.hypotheses = {
        "depth_at_least_sqrt_n": d0 * d0 >= n,
        "edge_count_small": m0 <= n * log_n / (1000 * loglog) if loglog > 0 else False,
        "iteration_bound_k": k_bound,
        "within_k_iterations": i <= k_bound,
        "uniform_edge_bound_M": big_m,
        "edges_within_M": all(s["edges_after"] <= big_m for s in report.steps),
        "reached_depth_target": final_depth * delta <= n,
        "ledger_at_most_n_over_10": ledger.r <= n / 10,
        "vertices_within_tau_plus_n_over_10": current.num_vertices <= tau0 + n / 10,
    }
    return current, ledger, report
