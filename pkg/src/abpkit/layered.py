"""Layer-count reduction for layered and multilayered ABPs.

Each transform returns the new ABP together with an :class:`ErrorLedger`
such that ``apply_ledger(computed_polynomial(out), ledger)`` equals the input
polynomial exactly.  Layer indices are 1-based, matching ``width``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .abp import (
    BoundViolation,
    ErrorLedger,
    LayeredAbp,
    MultilayeredAbp,
    PreconditionError,
    TransformReport,
    UnlayeredAbp,
    _GraphAbp,
    backward_sums,
    formal_degrees,
    forward_sums,
    nonzero_pair,
    summary,
)
from .poly import SparsePoly


def _require(cond: bool, message: str):
    if not cond:
        raise BoundViolation(message)


def _remove_vertices(abp: _GraphAbp, gone: set[int]) -> UnlayeredAbp:
    return UnlayeredAbp(
        abp.ring,
        abp.delta,
        [v for v in abp.vertices if v not in gone],
        {(u, v): lab for (u, v), lab in abp.edges.items() if u not in gone and v not in gone},
        abp.s,
        abp.t,
    )


# degree bands


@dataclass
class BandDecomposition:
    """``P == sum(prefix * suffix for prefix, suffix in coeffs) + remainder``.

    ``vertices`` and ``coeffs`` are in peeling order (reverse topological).
    """

    band: int
    formal_degree: int
    vertices: list[int]
    coeffs: list[tuple[SparsePoly, SparsePoly]]
    remainder: SparsePoly

    def reconstruct(self) -> SparsePoly:
        out = self.remainder
        for p, q in self.coeffs:
            out = out + p * q
        return out


def decompose_by_band(abp: _GraphAbp, i: int) -> BandDecomposition:
    """Split the computed polynomial through the vertices of formal-degree band ``i``.

    The band holds the vertices with formal degree in ``[i*delta, (i+1)*delta)``.
    They are peeled off in reverse topological order, so removing one never
    changes ``[s, u]`` for those still to come.
    """
    fd = formal_degrees(abp)
    d = max(fd.values())
    step = abp.delta
    top = d // step
    if not 1 <= i <= top - 1:
        raise PreconditionError(f"band {i} outside 1..{top - 1} (formal degree {d}, delta {step})")
    band = [v for v in abp.order if v in fd and i * step <= fd[v] < (i + 1) * step]
    prefix = forward_sums(abp)
    zero = abp.ring.zero()
    coeffs = []
    current: _GraphAbp = abp
    removed: set[int] = set()
    for u in reversed(band):
        suffix = backward_sums(current).get(u, zero)
        coeffs.append((prefix.get(u, zero), suffix))
        removed.add(u)
        current = _remove_vertices(abp, removed)
    remainder = forward_sums(current).get(abp.t, zero) if abp.t not in removed else zero
    out = BandDecomposition(i, d, list(reversed(band)), coeffs, remainder)
    for _, q in coeffs:
        _require(q.total_degree <= d - 1, f"suffix degree {q.total_degree} exceeds {d - 1}")
    _require(remainder.total_degree <= d - 1, f"remainder degree {remainder.total_degree} exceeds {d - 1}")
    return out


def audit_degree_bands(abp: _GraphAbp, r: int = 0, nvars: int | None = None) -> dict:
    """Vertex counts per formal-degree band and the counting bound they feed.

    Bands ``1..n'-1`` with ``n' = formal_degree // delta`` are audited; the
    lower-bound expression ``(n/2 - r) * (n'' - 1)`` (``n'' = n // delta``) is
    evaluated for the record only.
    """
    fd = formal_degrees(abp)
    step = abp.delta
    d = max(fd.values())
    top = d // step
    hist: dict[int, int] = {}
    for v, k in fd.items():
        hist[k // step] = hist.get(k // step, 0) + 1
    audited = {k: hist.get(k, 0) for k in range(1, top)}
    members = [v for v, k in fd.items() if 1 <= k // step <= top - 1]
    n = abp.ring.nvars if nvars is None else nvars
    nn = n // step
    total = sum(audited.values())
    return {
        "delta": step,
        "formal_degree": d,
        "histogram": {str(k): hist[k] for k in sorted(hist)},
        "audited_bands": {str(k): c for k, c in audited.items()},
        "audited_total": total,
        "size": abp.size,
        "interior_vertices": abp.size - 2,
        "disjoint": len(members) == len(set(members)) == total,
        "within_size": total <= abp.size,
        "r": r,
        "n": n,
        "lower_bound_expression": (n / 2 - r) * (nn - 1),
        "lower_bound_closed_form": (n / 2 - r) * n / (2 * step),
    }


# scalar layer elimination


def _layer_has_scalar_labels(abp: LayeredAbp, edges) -> bool:
    return all(abp.edges[e].total_degree <= 0 for e in edges)


def remove_scalar_last_layer(abp: LayeredAbp) -> LayeredAbp:
    """Fold the penultimate layer into its predecessor when every edge into t is scalar."""
    if abp.num_layers < 3:
        raise PreconditionError("need at least three layers to drop the last interior one")
    t = abp.t
    last = set(abp.layers[-2])
    into_t = [(v, t) for v in last if (v, t) in abp.edges]
    if not _layer_has_scalar_labels(abp, into_t):
        raise PreconditionError("an edge into the end vertex carries a non-scalar label")
    edges = {e: lab for e, lab in abp.edges.items() if e[0] not in last and e[1] not in last}
    zero = abp.ring.zero()
    for u in abp.layers[-3]:
        acc = zero
        for v in abp.successors(u):
            if v in last and (v, t) in abp.edges:
                acc = acc + abp.edges[(u, v)] * abp.edges[(v, t)]
        if not acc.is_zero:
            edges[(u, t)] = acc
    out = LayeredAbp(abp.ring, abp.delta, abp.layers[:-2] + (abp.layers[-1],), edges)
    _require(out.size == abp.size - len(last), "scalar layer removal changed the size unexpectedly")
    return out


def remove_scalar_first_layer(abp: LayeredAbp) -> LayeredAbp:
    """Mirror image of :func:`remove_scalar_last_layer` at the start vertex."""
    if abp.num_layers < 3:
        raise PreconditionError("need at least three layers to drop the first interior one")
    s = abp.s
    first = set(abp.layers[1])
    out_of_s = [(s, v) for v in first if (s, v) in abp.edges]
    if not _layer_has_scalar_labels(abp, out_of_s):
        raise PreconditionError("an edge out of the start vertex carries a non-scalar label")
    edges = {e: lab for e, lab in abp.edges.items() if e[0] not in first and e[1] not in first}
    zero = abp.ring.zero()
    for w in abp.layers[2]:
        acc = zero
        for v in abp.predecessors(w):
            if v in first and (s, v) in abp.edges:
                acc = acc + abp.edges[(s, v)] * abp.edges[(v, w)]
        if not acc.is_zero:
            edges[(s, w)] = acc
    out = LayeredAbp(abp.ring, abp.delta, (abp.layers[0],) + abp.layers[2:], edges)
    _require(out.size == abp.size - len(first), "scalar layer removal changed the size unexpectedly")
    return out


# cuts


def cut_at_layer(abp: LayeredAbp, ell: int) -> tuple[MultilayeredAbp, ErrorLedger, dict]:
    """Cut a layered ABP through layer ``ell`` (1-based, ``1 < ell < d``).

    Returns two branches: the first ``ell`` layers closed off by the constant
    terms of the suffixes, and the last ``d - ell + 1`` layers opened by the
    constant terms of the prefixes.  The output computes
    ``F - sum(P_i Q_i) + sum(alpha_i beta_i)``.
    """
    d = abp.num_layers
    if not 1 < ell < d:
        raise PreconditionError(f"cut layer {ell} outside 2..{d - 1}")
    ring, f = abp.ring, abp.ring.field
    cut = abp.layers[ell - 1]
    prefix = forward_sums(abp)
    suffix = backward_sums(abp)
    zero = ring.zero()
    pairs = []
    shift = f.zero
    alphas, betas = {}, {}
    for u in cut:
        alpha, p = prefix.get(u, zero).split_constant()
        beta, q = suffix.get(u, zero).split_constant()
        alphas[u], betas[u] = alpha, beta
        if nonzero_pair(p, q):
            pairs.append((p, q))
        shift = f.add(shift, f.mul(alpha, beta))

    lay = abp.layer_of
    head_edges = {e: lab for e, lab in abp.edges.items() if lay[e[1]] < ell}
    for u in cut:
        if betas[u] != 0:
            head_edges[(u, abp.t)] = ring.const(betas[u])
    head = LayeredAbp(ring, abp.delta, abp.layers[:ell] + (abp.layers[-1],), head_edges)

    tail_edges = {e: lab for e, lab in abp.edges.items() if lay[e[0]] >= ell - 1}
    for u in cut:
        if alphas[u] != 0:
            tail_edges[(abp.s, u)] = ring.const(alphas[u])
    tail = LayeredAbp(ring, abp.delta, (abp.layers[0],) + abp.layers[ell - 1:], tail_edges)

    out = MultilayeredAbp((remove_scalar_last_layer(head), remove_scalar_first_layer(tail)))
    ledger = ErrorLedger(ring, pairs, f.neg(shift))

    bound = max(ell, d - ell + 1)
    _require(out.num_layers <= bound, f"cut produced {out.num_layers} layers, bound {bound}")
    _require(out.size <= abp.size, f"cut grew the size from {abp.size} to {out.size}")
    info = {
        "layer": ell,
        "cut_width": len(cut),
        "layers_before": d,
        "layers_after": out.num_layers,
        "layer_bound": bound,
        "size_before": abp.size,
        "size_after": out.size,
        "ledger_added": len(pairs),
        "shift": str(shift),
    }
    return out, ledger, info


def middle_layers(d: int) -> list[int]:
    """Cuttable layer indices j with d/3 < j < 2d/3 (empty for d < 4)."""
    return [j for j in range(2, d) if d < 3 * j < 2 * d]


def shrink_multilayered(abp: MultilayeredAbp | LayeredAbp) -> tuple[MultilayeredAbp, ErrorLedger, TransformReport]:
    """One shrinkage step: cut every long branch at the thinnest middle layer."""
    if isinstance(abp, LayeredAbp):
        abp = MultilayeredAbp.single(abp)
    d = abp.num_layers
    cands = middle_layers(d)
    if not cands:
        raise PreconditionError(f"{d} layers: no integer strictly between d/3 and 2d/3; stop iterating")
    widths = {j: abp.width(j) for j in cands}
    j0 = min(cands, key=lambda j: (widths[j], j))
    middle_total = sum(widths.values())

    ledger = ErrorLedger.empty(abp.ring)
    branches: list[LayeredAbp] = []
    cut_width = 0
    cut_branches = []
    for k, b in enumerate(abp.branches):
        if b.num_layers > j0:
            out, led, _ = cut_at_layer(b, j0)
            branches.extend(out.branches)
            ledger = ledger.merged(led)
            cut_width += b.width(j0)
            cut_branches.append(k)
        else:
            branches.append(b)
    out = MultilayeredAbp(tuple(branches))

    layer_cap = math.ceil(2 * d / 3)
    _require(out.num_layers <= layer_cap, f"shrink produced {out.num_layers} layers, cap {layer_cap}")
    _require(out.size <= abp.size, f"shrink grew the size from {abp.size} to {out.size}")
    _require(cut_width * len(cands) <= middle_total, "thinnest middle layer exceeds the average width")
    _require(ledger.r <= cut_width, "more ledger pairs than cut vertices")

    step = {
        "layers_before": d,
        "layers_after": out.num_layers,
        "size_before": abp.size,
        "size_after": out.size,
        "j0": j0,
        "candidates": cands,
        "middle_width": middle_total,
        "cut_width": cut_width,
        "cut_branches": cut_branches,
        "ledger_added": ledger.r,
        "averaging_bound": middle_total / len(cands),
        "analytic_bound": middle_total / (d / 3),
        "floor_bound": middle_total / (d // 3),
    }
    report = TransformReport("shrink-multilayered", {}, summary(abp), summary(out), [step])
    report.ledger_size = ledger.r
    return out, ledger, report


def reduce_layers_below(
    abp: MultilayeredAbp | LayeredAbp, target_layers: int
) -> tuple[MultilayeredAbp, ErrorLedger, TransformReport]:
    """Shrink repeatedly until at most ``target_layers`` layers remain.

    Stops early (and says so in the report) once fewer than four layers are
    left, since no middle layer exists there.
    """
    if target_layers < 2:
        raise PreconditionError("target must be at least 2 layers")
    if isinstance(abp, LayeredAbp):
        abp = MultilayeredAbp.single(abp)
    current = abp
    ledger = ErrorLedger.empty(abp.ring)
    report = TransformReport("reduce-layers", {"target_layers": target_layers}, summary(abp))
    while current.num_layers > target_layers:
        if not middle_layers(current.num_layers):
            report.warnings.append(
                f"stopped at {current.num_layers} layers: no middle layer to cut")
            break
        d = current.num_layers
        current, led, step_report = shrink_multilayered(current)
        step = step_report.steps[0]
        _require(3 * current.num_layers <= 2 * d + 2, "layer count did not shrink geometrically")
        ledger = ledger.merged(led)
        step["ledger_total"] = ledger.r
        report.steps.append(step)
    report.after = summary(current)
    report.ledger_size = ledger.r
    report.hypotheses = {
        "reached_target": current.num_layers <= target_layers,
        "third_width_growth_bound_held": all(s["ledger_added"] <= s["analytic_bound"] for s in report.steps),
    }
    return current, ledger, report
