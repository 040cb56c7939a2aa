"""Independent checks: path enumeration, ledger audits, and F_p point counts.

Point-count checks over F_p are evidence about a variety, not a proof over
the algebraic closure; reports say so in their ``counters``.
"""

from __future__ import annotations

import random
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from .abp import ErrorLedger, MultilayeredAbp, PreconditionError, _GraphAbp, apply_ledger
from .constructions import esym_brute
from .field import FieldConfig
from .poly import Ring, SparsePoly, sum_polys

DEFAULT_POINT_BUDGET = 10**7
DEFAULT_PATH_BUDGET = 10**5
_CHUNK = 1 << 16


class BudgetExceeded(RuntimeError):
    pass


@dataclass
class CheckReport:
    check: str
    params: dict = field(default_factory=dict)
    passed: bool = True
    counters: dict = field(default_factory=dict)
    warnings: list[str] = field(default_factory=list)
    failures: list[str] = field(default_factory=list)

    def __bool__(self) -> bool:
        return self.passed

    def fail(self, message: str):
        self.passed = False
        self.failures.append(message)

    def to_json(self) -> dict:
        return {
            "check": self.check,
            "params": self.params,
            "pass": self.passed,
            "counters": self.counters,
            "warnings": self.warnings,
            "failures": self.failures,
        }


def characteristic_warnings(fld: FieldConfig, n: int | None = None, d: int | None = None) -> list[str]:
    """Flag fields excluded by the results being checked."""
    out = []
    if not fld.is_prime:
        return out
    p = fld.characteristic
    if n is not None and n % p == 0:
        out.append(f"characteristic {p} divides n = {n}")
    if d is not None and p <= d:
        out.append(f"characteristic {p} is at most d = {d}")
    return out


# ledger


def check_ledger(F_in: SparsePoly, F_out: SparsePoly, ledger: ErrorLedger, degree_cap: int | None = None) -> CheckReport:
    report = CheckReport("ledger", {"degree_cap": degree_cap})
    report.counters["r"] = ledger.r
    report.counters["delta"] = str(ledger.delta)
    if apply_ledger(F_out, ledger) != F_in:
        report.fail("F_out + sum(P*Q) + delta + R does not reconstruct F_in")
    for msg in ledger.violations():
        report.fail(msg)
    if degree_cap is not None and ledger.remainder.total_degree > degree_cap:
        report.fail(f"remainder degree {ledger.remainder.total_degree} exceeds cap {degree_cap}")
    return report


# path enumeration


def brute_force_paths(abp, u: int | None = None, v: int | None = None, budget: int = DEFAULT_PATH_BUDGET) -> SparsePoly:
    """Sum over explicitly enumerated u-v paths of the product of labels."""
    if isinstance(abp, MultilayeredAbp):
        if u is not None or v is not None:
            raise PreconditionError("endpoints are fixed for multilayered ABPs")
        total = abp.ring.zero()
        for b in abp.branches:
            total = total + brute_force_paths(b, budget=budget)
        return total
    if not isinstance(abp, _GraphAbp):
        raise TypeError("expected an ABP")
    u = abp.s if u is None else u
    v = abp.t if v is None else v
    out_edges: dict[int, list] = {}
    for (a, b), lab in abp.edges.items():
        out_edges.setdefault(a, []).append((b, lab))
    ring = abp.ring
    total = ring.zero()
    count = 0
    stack = [(u, ring.one())]
    while stack:
        node, prod = stack.pop()
        if node == v:
            count += 1
            if count > budget:
                raise BudgetExceeded(f"more than {budget} paths")
            total = total + prod
            continue
        for nxt, lab in out_edges.get(node, ()):
            stack.append((nxt, prod * lab))
    return total


# point enumeration over F_p


def _grid_chunks(p: int, n: int, budget: int):
    total = p**n
    if total > budget:
        raise BudgetExceeded(f"{p}^{n} = {total} points exceed the budget {budget}")
    for start in range(0, total, _CHUNK):
        idx = np.arange(start, min(start + _CHUNK, total), dtype=np.int64)
        cols = []
        for _ in range(n):
            idx, digit = np.divmod(idx, p)
            cols.append(digit)
        yield np.stack(cols, axis=1)


def eval_grid(poly: SparsePoly, pts: np.ndarray, p: int) -> np.ndarray:
    """Evaluate ``poly`` (coefficients reduced mod p) at each row of ``pts``."""
    if p >= 1 << 31:
        raise PreconditionError("grid evaluation supports primes below 2^31")
    fp = FieldConfig.prime(p)
    out = np.zeros(len(pts), dtype=np.int64)
    for exps, c in poly.items():
        term = np.full(len(pts), fp.coerce(c), dtype=np.int64)
        for i, e in enumerate(exps):
            if e:
                term = term * _powmod(pts[:, i], e, p) % p
        out = (out + term) % p
    return out


def _powmod(col: np.ndarray, e: int, p: int) -> np.ndarray:
    result = np.ones_like(col)
    base = col % p
    while e:
        if e & 1:
            result = result * base % p
        base = base * base % p
        e >>= 1
    return result


def common_zeros(polys: list[SparsePoly], p: int, n: int, budget: int = DEFAULT_POINT_BUDGET):
    """Yield the common zeros in F_p^n, chunk by chunk, in lexicographic index order."""
    for pts in _grid_chunks(p, n, budget):
        mask = np.ones(len(pts), dtype=bool)
        for f in polys:
            mask &= eval_grid(f, pts, p) == 0
        yield pts[mask]


def singular_support_esym(
    n: int, d: int, p: int, budget: int = DEFAULT_POINT_BUDGET, perturb_degree: int | None = None,
    seed: int = 0,
) -> CheckReport:
    """Every common zero of the partials of esym(n, d) has at least n-(d-2) zero coordinates.

    With ``perturb_degree`` set, random perturbations of that degree are
    added to each partial and the zero counts are only reported.
    """
    if not 2 <= d <= n:
        raise PreconditionError(f"need 2 <= d <= n, got d={d}, n={n}")
    fp = FieldConfig.prime(p)
    ring = Ring(fp, n)
    report = CheckReport("esym-singular", {"n": n, "d": d, "p": p, "budget": budget})
    report.warnings.extend(characteristic_warnings(fp, d=d))
    e = esym_brute(ring, n, d)
    partials = [e.derivative(i) for i in range(1, n + 1)]
    if perturb_degree is not None:
        rng = random.Random(seed)
        partials = [q + random_poly(ring, perturb_degree, rng) for q in partials]
        report.params.update({"perturb_degree": perturb_degree, "seed": seed})
    need = n - (d - 2)
    hist: Counter = Counter()
    for zs in common_zeros(partials, p, n, budget):
        for k in (zs == 0).sum(axis=1).tolist():
            hist[k] += 1
    bad = sum(c for k, c in hist.items() if k < need)
    report.counters = {
        "points": p**n,
        "common_zeros": sum(hist.values()),
        "zero_coordinate_histogram": {str(k): hist[k] for k in sorted(hist)},
        "required_zero_coordinates": need,
        "violations": bad,
        "evidence": "enumeration over F_p",
    }
    if perturb_degree is None and bad:
        report.fail(f"{bad} common zeros have fewer than {need} zero coordinates")
    return report


def random_poly(ring: Ring, degree: int, rng: random.Random, terms: int = 4) -> SparsePoly:
    """A few random monomials of total degree at most ``degree``."""
    fld = ring.field
    out = {}
    for _ in range(terms):
        exps = [0] * ring.nvars
        for _ in range(rng.randint(0, degree)):
            exps[rng.randrange(ring.nvars)] += 1
        out[tuple(exps)] = rng.randint(1, (fld.characteristic - 1) if fld.is_prime else 9)
    return SparsePoly(ring, out)


def power_sum_singular_check(
    n: int, D: int, gs: list[SparsePoly], primes: list[int], budget: int = DEFAULT_POINT_BUDGET
) -> CheckReport:
    """Count common zeros of ``x_i^D - g_i`` over each F_p; each count must be at most D^n."""
    if len(gs) != n:
        raise PreconditionError(f"need n = {n} perturbations, got {len(gs)}")
    for g in gs:
        if g.total_degree > D - 1:
            raise PreconditionError(f"perturbation degree {g.total_degree} exceeds D-1 = {D - 1}")
    report = CheckReport("powersum-singular", {"n": n, "D": D, "primes": list(primes), "budget": budget})
    bound = D**n
    counts = {}
    for p in primes:
        ring = Ring(FieldConfig.prime(p), n)
        system = []
        for i, g in enumerate(gs, start=1):
            lifted = SparsePoly(ring, {e: ring.field.coerce(c) for e, c in g.items()}) if g.ring != ring else g
            system.append(ring.var(i) ** D - lifted)
        counts[str(p)] = sum(len(zs) for zs in common_zeros(system, p, n, budget))
        if counts[str(p)] > bound:
            report.fail(f"{counts[str(p)]} common zeros over F_{p} exceed D^n = {bound}")
    report.counters = {"common_zeros": counts, "bound": bound, "evidence": "enumeration over F_p"}
    return report


# identities


def euler_check(A: SparsePoly) -> CheckReport:
    """``sum_i x_i * dA/dx_i == t * A`` for ``A`` homogeneous of degree ``t``."""
    if not A.is_homogeneous:
        raise PreconditionError("Euler's identity needs a homogeneous polynomial")
    ring = A.ring
    t = 0 if A.is_zero else int(A.total_degree)
    report = CheckReport("euler", {"degree": t, "field": str(ring.field)})
    lhs = sum_polys(ring, (ring.var(i) * A.derivative(i) for i in range(1, ring.nvars + 1)))
    rhs = A.scale(t)
    degenerate = ring.field.divides_characteristic(t) and not A.is_zero
    report.counters = {"characteristic_degenerate": degenerate}
    if degenerate:
        report.warnings.append(f"characteristic divides t = {t}; both sides vanish")
    if lhs != rhs:
        report.fail("sum x_i dA/dx_i differs from t*A")
    return report
