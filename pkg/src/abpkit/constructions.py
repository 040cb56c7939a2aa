"""Builders for the power-sum and elementary symmetric polynomials."""

from __future__ import annotations

import itertools

from .abp import LayeredAbp, PreconditionError
from .field import FieldConfig
from .formula import Add, Const, Formula, Mul, Var, add, mul
from .poly import Ring, SparsePoly, sum_polys


def power_sum_poly(ring: Ring, n: int, k: int) -> SparsePoly:
    """``x1^k + ... + xn^k``."""
    if n < 1 or n > ring.nvars:
        raise PreconditionError(f"need 1 <= n <= {ring.nvars}, got {n}")
    if k < 0:
        raise PreconditionError("exponent must be non-negative")
    return sum_polys(ring, (ring.var(i) ** k for i in range(1, n + 1)))


def power_sum_abp(ring: Ring, n: int, k: int, delta: int = 1) -> LayeredAbp:
    """``n`` parallel chains of ``k`` edges labelled ``x_i``, sharing s and t.

    Layer ``j`` for ``0 < j < k`` holds one vertex per chain, so the ABP has
    ``k + 1`` layers of width ``n``.  For ``k = 1`` the single edge carries
    ``x1 + ... + xn``.
    """
    if n < 1 or n > ring.nvars:
        raise PreconditionError(f"need 1 <= n <= {ring.nvars}, got {n}")
    if k < 1:
        raise PreconditionError("exponent must be at least 1")
    if k == 1:
        return LayeredAbp(ring, delta, [(0,), (1,)], {(0, 1): power_sum_poly(ring, n, 1)})
    ids = itertools.count(1)
    inner = [tuple(next(ids) for _ in range(n)) for _ in range(k - 1)]
    t = next(ids)
    layers = [(0,)] + inner + [(t,)]
    edges = {}
    for i in range(n):
        x = ring.var(i + 1)
        edges[(0, inner[0][i])] = x
        for j in range(k - 2):
            edges[(inner[j][i], inner[j + 1][i])] = x
        edges[(inner[-1][i], t)] = x
    return LayeredAbp(ring, delta, layers, edges)


def power_sum_formula(n: int, k: int) -> Formula:
    """``sum_i x_i * ... * x_i`` with ``k`` factors per term."""
    if n < 1 or k < 1:
        raise PreconditionError("need n >= 1 and k >= 1")
    return add(*(mul(*([Var(i)] * k)) for i in range(1, n + 1)))


def pad_layers(abp: LayeredAbp, extra: int, at_end: bool = True) -> LayeredAbp:
    """Append (or prepend) ``extra`` width-one layers joined by scalar 1-edges."""
    if extra <= 0:
        return abp
    ring = abp.ring
    fresh = itertools.count(max(abp.vertices) + 1)
    layers = list(abp.layers)
    edges = dict(abp.edges)
    for _ in range(extra):
        v = next(fresh)
        if at_end:
            edges[(layers[-1][0], v)] = ring.one()
            layers.append((v,))
        else:
            edges[(v, layers[0][0])] = ring.one()
            layers.insert(0, (v,))
    return LayeredAbp(ring, abp.delta, layers, edges)


def esym_brute(ring: Ring, n: int, d: int) -> SparsePoly:
    """Sum of all products of ``d`` distinct variables among ``x1..xn``."""
    if not 0 <= d <= n <= ring.nvars:
        raise PreconditionError(f"need 0 <= d <= n <= {ring.nvars}")
    terms = {}
    for subset in itertools.combinations(range(n), d):
        exps = [0] * ring.nvars
        for j in subset:
            exps[j] = 1
        terms[tuple(exps)] = 1
    return SparsePoly(ring, terms)


def _poly_mul_linear(coeffs: list, root, field: FieldConfig) -> list:
    """Multiply a dense coefficient list (low degree first) by ``z - root``."""
    out = [field.zero] * (len(coeffs) + 1)
    for e, c in enumerate(coeffs):
        out[e + 1] = field.add(out[e + 1], c)
        out[e] = field.sub(out[e], field.mul(root, c))
    return out


def interpolation_weights(field: FieldConfig, points: list, e: int) -> list:
    """Weights ``lam`` with ``sum_j lam_j * b_j^m == [m == e]`` for ``0 <= m < len(points)``.

    ``lam_j`` is the coefficient of ``z^e`` in the Lagrange basis polynomial of
    the ``j``-th point.
    """
    pts = [field.coerce(b) for b in points]
    if len(set(pts)) != len(pts):
        raise PreconditionError("interpolation points are not distinct in the field; Vandermonde is singular")
    out = []
    for j, bj in enumerate(pts):
        num = [field.one]
        den = field.one
        for m, bm in enumerate(pts):
            if m != j:
                num = _poly_mul_linear(num, bm, field)
                den = field.mul(den, field.sub(bj, bm))
        out.append(field.div(num[e], den))
    return out


def esym_ben_or_formula(field: FieldConfig, n: int, d: int, points=None) -> Formula:
    """Depth-3 formula ``sum_j lam_j * prod_i (x_i + b_j)`` computing esym(n, d).

    Uses ``n + 1`` interpolation points (default ``0..n``); over F_p this
    needs ``p > n``.
    """
    if not 0 <= d <= n or n < 1:
        raise PreconditionError("need 0 <= d <= n and n >= 1")
    if points is None:
        if field.is_prime and field.characteristic <= n:
            raise PreconditionError(f"F_{field.characteristic} has fewer than n+1 = {n + 1} elements")
        points = list(range(n + 1))
    if len(points) != n + 1:
        raise PreconditionError(f"need exactly n+1 = {n + 1} interpolation points")
    pts = [field.coerce(b) for b in points]
    lam = interpolation_weights(field, pts, n - d)
    terms = []
    for lj, bj in zip(lam, pts):
        factors = [Add((Var(i), Const(bj))) for i in range(1, n + 1)]
        terms.append(Mul((Const(lj), *factors)))
    return add(*terms)


def esym_derivative_identity_check(ring: Ring, n: int, d: int) -> bool:
    """``d_i esym(n,d) == esym(n,d-1) - x_i * d_i esym(n,d-1)`` for every ``i``."""
    if not 1 <= d <= n:
        raise PreconditionError("need 1 <= d <= n")
    top, low = esym_brute(ring, n, d), esym_brute(ring, n, d - 1)
    for i in range(1, n + 1):
        if top.derivative(i) != low - ring.var(i) * low.derivative(i):
            return False
    return True


def esym_summed_identity_check(ring: Ring, n: int, d: int) -> bool:
    """``sum_i d_i esym(n,d) == (n-d+1) * esym(n,d-1)``."""
    if not 1 <= d <= n:
        raise PreconditionError("need 1 <= d <= n")
    top = esym_brute(ring, n, d)
    lhs = sum_polys(ring, (top.derivative(i) for i in range(1, n + 1)))
    return lhs == esym_brute(ring, n, d - 1).scale(n - d + 1)
