"""Seeded random instance families for tests and the CLI.

Every generator takes an explicit ``random.Random`` so that a suite is
reproducible from one seed.
"""

from __future__ import annotations

import random

from .abp import LayeredAbp, MultilayeredAbp, UnlayeredAbp
from .formula import Add, Const, Formula, Mul, Var
from .graphs import Dag
from .poly import Ring, SparsePoly


def random_scalar(ring: Ring, rng: random.Random, nonzero: bool = False):
    f = ring.field
    hi = f.characteristic - 1 if f.is_prime else 9
    lo = 1 if nonzero else 0
    return f.coerce(rng.randint(lo, hi))


def random_label(ring: Ring, delta: int, rng: random.Random, nvars: int | None = None,
                 scalar_prob: float = 0.2) -> SparsePoly:
    """A random polynomial of degree at most ``delta``, often with a constant term."""
    nvars = ring.nvars if nvars is None else nvars
    if rng.random() < scalar_prob:
        return ring.const(random_scalar(ring, rng, nonzero=True))
    terms = {}
    for _ in range(rng.randint(1, 3)):
        exps = [0] * ring.nvars
        for _ in range(rng.randint(1, delta)):
            exps[rng.randrange(nvars)] += 1
        terms[tuple(exps)] = random_scalar(ring, rng, nonzero=True)
    if rng.random() < 0.7:
        terms[(0,) * ring.nvars] = random_scalar(ring, rng, nonzero=True)
    return SparsePoly(ring, terms)


def random_layered_abp(ring: Ring, rng: random.Random, delta: int = 1, max_vertices: int = 14,
                       min_layers: int = 3, max_layers: int = 8, max_width: int = 3) -> LayeredAbp:
    """Layered ABP with every vertex on some s-t path."""
    num_layers = rng.randint(min_layers, max_layers)
    budget = max_vertices - 2
    widths = []
    for j in range(num_layers - 2):
        remaining_layers = num_layers - 2 - j - 1
        cap = min(max_width, budget - remaining_layers)
        w = rng.randint(1, max(1, cap))
        widths.append(w)
        budget -= w
    ids = iter(range(10**6))
    layers = [(next(ids),)] + [tuple(next(ids) for _ in range(w)) for w in widths] + [(next(ids),)]
    edges = {}
    for a, b in zip(layers, layers[1:]):
        for u in a:
            edges[(u, rng.choice(b))] = None
        for v in b:
            edges[(rng.choice(a), v)] = None
        for u in a:
            for v in b:
                if rng.random() < 0.3:
                    edges[(u, v)] = None
    labelled = {e: random_label(ring, delta, rng) for e in edges}
    return LayeredAbp(ring, delta, layers, labelled)


def random_multilayered_abp(ring: Ring, rng: random.Random, delta: int = 1, max_vertices: int = 14,
                            max_branches: int = 3) -> MultilayeredAbp:
    """1 to ``max_branches`` branches whose combined size stays within ``max_vertices``."""
    k = rng.randint(1, max_branches)
    branches = []
    budget = max_vertices - 2
    for i in range(k):
        share = budget // (k - i)
        if share < 1:
            break
        b = random_layered_abp(ring, rng, delta, max_vertices=share + 2, min_layers=2,
                               max_layers=min(8, share + 2))
        budget -= b.size - 2
        branches.append(b)
    return MultilayeredAbp(branches)


def random_dag(rng: random.Random, num_vertices: int, extra_edges: int, skip_prob: float = 0.2) -> Dag:
    """DAG on ``0..N-1`` with a long backbone and random forward edges.

    Vertex ids increase along every edge.
    """
    n = num_vertices
    edges = set()
    for v in range(1, n):
        if rng.random() < skip_prob and v >= 2:
            edges.add((rng.randrange(v - 1), v))
        else:
            edges.add((v - 1, v))
    for _ in range(extra_edges):
        a = rng.randrange(n - 1)
        b = rng.randrange(a + 1, n)
        edges.add((a, b))
    return Dag(list(range(n)), sorted(edges))


def random_unlayered_abp(ring: Ring, rng: random.Random, num_vertices: int, extra_edges: int = 0,
                         delta: int = 1, variable_edges: int | None = None, chain: bool = False) -> UnlayeredAbp:
    """DAG ABP from 0 to N-1 where every vertex lies on an s-t path.

    With ``chain`` the backbone 0 -> 1 -> ... -> N-1 is included, fixing the
    depth at N-1.  ``variable_edges`` caps how many edges carry non-scalar
    labels, which keeps the computed polynomial small on deep instances.
    """
    n = num_vertices
    s, t = 0, n - 1
    edges = set()
    if chain:
        edges.update((v, v + 1) for v in range(n - 1))
    else:
        for v in range(1, n - 1):
            edges.add((rng.randrange(v), v))
            edges.add((v, rng.randrange(v + 1, n)))
        if n == 2:
            edges.add((0, 1))
    for _ in range(extra_edges):
        a = rng.randrange(n - 1)
        edges.add((a, rng.randrange(a + 1, n)))
    ordered = sorted(edges)
    if variable_edges is None:
        var_set = set(ordered)
    else:
        var_set = set(rng.sample(ordered, min(variable_edges, len(ordered))))
    labels = {}
    for e in ordered:
        if e in var_set:
            labels[e] = random_label(ring, delta, rng, scalar_prob=0.1)
        else:
            labels[e] = ring.const(random_scalar(ring, rng, nonzero=True))
    return UnlayeredAbp(ring, delta, list(range(n)), labels, s, t)


def random_formula(rng: random.Random, nvars: int, degree: int, positive: bool = True,
                   max_const: int = 9) -> Formula:
    """Random formula of formal degree exactly ``degree``.

    With ``positive`` all scalars are positive integers, so over the
    rationals no cancellation can occur and degree equals formal degree.
    """

    def const():
        lo = 1 if positive else -max_const
        v = 0
        while v == 0:
            v = rng.randint(lo, max_const)
        return Const(v)

    def gen(deg: int) -> Formula:
        if deg == 0:
            return const()
        if deg == 1:
            r = rng.random()
            if r < 0.6:
                return Var(rng.randint(1, nvars))
            return Add((Var(rng.randint(1, nvars)), const()))
        if rng.random() < 0.35:
            k = rng.randint(2, 3)
            heavy = rng.randrange(k)
            kids = [gen(deg) if i == heavy else gen(rng.randint(0, deg)) for i in range(k)]
            return Add(tuple(kids))
        k = rng.randint(2, min(3, deg))
        cuts = sorted(rng.sample(range(1, deg), k - 1))
        parts = [b - a for a, b in zip([0] + cuts, cuts + [deg])]
        kids = [gen(p) for p in parts]
        if rng.random() < 0.2:
            kids.append(const())
        return Mul(tuple(kids))

    return gen(degree)


def random_homogeneous_poly(ring: Ring, rng: random.Random, degree: int, terms: int = 4) -> SparsePoly:
    out = {}
    for _ in range(terms):
        exps = [0] * ring.nvars
        for _ in range(degree):
            exps[rng.randrange(ring.nvars)] += 1
        out[tuple(exps)] = random_scalar(ring, rng, nonzero=True)
    return SparsePoly(ring, out)
