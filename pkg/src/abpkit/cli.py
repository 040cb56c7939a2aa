"""Command-line front end: construct, transform, verify, export-dot.

Exit codes: 0 pass, 1 assertion or verification failure, 2 usage or parse error.
"""

from __future__ import annotations

import argparse
import hashlib
import logging
import math
import os
import random
import sys

from . import formats
from .abp import (
    BoundViolation,
    LayeredAbp,
    MultilayeredAbp,
    PreconditionError,
    TransformReport,
    UnlayeredAbp,
    apply_ledger,
    computed_polynomial,
    depth,
    path_sum,
    summary,
    validate,
)
from .constructions import (
    esym_ben_or_formula,
    esym_brute,
    esym_derivative_identity_check,
    power_sum_abp,
    power_sum_formula,
    power_sum_poly,
)
from .field import FieldConfig, FieldError
from .formula import decompose_formula, formula_expand, reduce_formula_degree
from .generators import random_formula, random_layered_abp, random_multilayered_abp, random_unlayered_abp
from .layered import cut_at_layer, reduce_layers_below, shrink_multilayered
from .poly import ParseError, Ring, parse_poly
from .unlayered import cut_vertex, depth_reduce_full, depth_reduce_once, middle_band_vertex_set
from .verify import (
    BudgetExceeded,
    CheckReport,
    brute_force_paths,
    check_ledger,
    euler_check,
    power_sum_singular_check,
    random_poly,
    singular_support_esym,
)

log = logging.getLogger("abpkit")

DEFAULT_SEED = 0
EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _sha256(path: str) -> str:
    with open(path, "rb") as fh:
        return hashlib.sha256(fh.read()).hexdigest()


def _write(path: str | None, text: str):
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    with open(path, "w") as fh:
        fh.write(text)


def _read(path: str) -> str:
    try:
        with open(path) as fh:
            return fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None


def _load(path: str):
    return formats.load_artifact(_read(path))


def _require_n(args, name: str = "--n") -> int:
    if args.n is None:
        raise UsageError(f"{name} is required")
    return args.n


# construct


def cmd_construct(args) -> int:
    fld = FieldConfig.parse(args.field)
    rng = random.Random(args.seed)
    kind = args.kind
    if kind == "powersum":
        n = _require_n(args)
        k = args.k if args.k is not None else n
        ring = Ring(fld, n)
        if args.as_ == "abp":
            obj = formats.abp_to_json(power_sum_abp(ring, n, k, args.delta))
        elif args.as_ == "formula":
            obj = formats.formula_file(power_sum_formula(n, k), ring)
        else:
            obj = formats.poly_file(power_sum_poly(ring, n, k))
    elif kind == "esym-brute":
        n = _require_n(args)
        obj = formats.poly_file(esym_brute(Ring(fld, n), n, args.d))
    elif kind == "esym-benor":
        n = _require_n(args)
        obj = formats.formula_file(esym_ben_or_formula(fld, n, args.d), Ring(fld, n))
    elif kind == "random-layered":
        ring = Ring(fld, _require_n(args))
        obj = formats.abp_to_json(random_layered_abp(ring, rng, args.delta, max_vertices=args.vertices))
    elif kind == "random-multilayered":
        ring = Ring(fld, _require_n(args))
        obj = formats.abp_to_json(random_multilayered_abp(ring, rng, args.delta, max_vertices=args.vertices))
    elif kind == "random-unlayered":
        ring = Ring(fld, _require_n(args))
        abp = random_unlayered_abp(ring, rng, args.vertices, extra_edges=args.vertices // 2,
                                   delta=args.delta, variable_edges=min(6, args.vertices), chain=True)
        obj = formats.abp_to_json(abp)
    elif kind == "random-formula":
        ring = Ring(fld, _require_n(args))
        obj = formats.formula_file(random_formula(rng, ring.nvars, args.d), ring)
    else:
        raise UsageError(f"unknown construction {kind!r}")
    _write(args.out, formats.dumps(obj))
    return EXIT_OK


# transform


def _as_multilayered(obj):
    if isinstance(obj, LayeredAbp):
        return MultilayeredAbp.single(obj)
    if isinstance(obj, MultilayeredAbp):
        return obj
    raise UsageError("this pipeline needs a layered or multilayered ABP")


def _as_unlayered(obj):
    if isinstance(obj, UnlayeredAbp):
        return obj
    if isinstance(obj, LayeredAbp):
        return UnlayeredAbp.from_layered(obj)
    if isinstance(obj, MultilayeredAbp):
        return obj.merged()
    raise UsageError("this pipeline needs an ABP")


def _check_abp(obj):
    problems = validate(obj)
    if problems:
        raise UsageError("invalid ABP: " + "; ".join(problems))


def _side_paths(out: str) -> tuple[str, str]:
    stem = out[:-5] if out.endswith(".json") else out
    return stem + ".ledger.json", stem + ".report.json"


def _artifact_poly(kind: str, obj):
    if kind == "formula":
        f, ring = obj
        return formula_expand(f, ring)
    if kind == "poly":
        return obj
    return computed_polynomial(obj)


def _artifact_summary(kind: str, obj) -> dict:
    if kind == "formula":
        f, _ = obj
        return {"kind": "formula", "size": f.size, "fdeg": f.fdeg, "total_leaves": f.total_leaves}
    return summary(obj)


def run_pipeline(pipeline: str, kind: str, obj, args):
    """Returns ``(output_json, ledger, report)``."""
    if kind == "formula":
        f, ring = obj
        if pipeline == "decompose-formula":
            dec = decompose_formula(f, ring)
            report = TransformReport("decompose-formula", {}, _artifact_summary(kind, obj))
            report.steps.append({"fdeg_before": f.fdeg, "fdeg_after": dec.formula.fdeg, "k": dec.k,
                                 "threshold": dec.threshold, "size_after": dec.formula.size,
                                 "dropped_pairs": dec.dropped})
            report.after = _artifact_summary("formula", (dec.formula, ring))
            ledger = dec.ledger(ring)
            report.ledger_size = ledger.r
            return formats.formula_file(dec.formula, ring), ledger, report
        if pipeline == "reduce-formula-degree":
            if args.target is None:
                raise UsageError("--target is required")
            out, ledger, report = reduce_formula_degree(f, args.target, ring)
            return formats.formula_file(out, ring), ledger, report
        raise UsageError(f"pipeline {pipeline!r} does not accept a formula")
    if kind not in ("layered", "unlayered", "multilayered"):
        raise UsageError(f"pipeline {pipeline!r} needs an ABP or formula input, got {kind}")
    _check_abp(obj)
    if pipeline == "reduce-layers":
        if args.target is None:
            raise UsageError("--target is required")
        out, ledger, report = reduce_layers_below(_as_multilayered(obj), args.target)
    elif pipeline == "shrink":
        out, ledger, report = shrink_multilayered(_as_multilayered(obj))
    elif pipeline == "cut-layer":
        if not isinstance(obj, LayeredAbp) or args.layer is None:
            raise UsageError("cut-layer needs a layered ABP and --layer")
        out, ledger, info = cut_at_layer(obj, args.layer)
        report = TransformReport("cut-layer", {"layer": args.layer}, summary(obj), summary(out), [info])
        report.ledger_size = ledger.r
    elif pipeline == "cut-vertex":
        if args.vertex is None:
            raise UsageError("--vertex is required")
        src = _as_unlayered(obj)
        out, ledger, info = cut_vertex(src, args.vertex)
        report = TransformReport("cut-vertex", {"vertex": args.vertex}, summary(src), summary(out), [info])
        report.ledger_size = ledger.r
    elif pipeline == "depth-reduce-once":
        src = _as_unlayered(obj)
        out, ledger, report = depth_reduce_once(src, args.n or src.ring.nvars)
    elif pipeline == "depth-reduce-unlayered":
        src = _as_unlayered(obj)
        out, ledger, report = depth_reduce_full(src, args.n or src.ring.nvars, args.delta or src.delta)
    else:
        raise UsageError(f"unknown pipeline {pipeline!r}")
    return formats.abp_to_json(out), ledger, report


def cmd_transform(args) -> int:
    kind, obj = _load(args.input)
    out_json, ledger, report = run_pipeline(args.pipeline, kind, obj, args)
    out_path = args.out or "out.json"
    ledger_path, report_path = _side_paths(out_path)
    _write(out_path, formats.dumps(out_json))
    _write(ledger_path, formats.dumps(formats.ledger_to_json(ledger)))

    # reconstruct from the files just written, not from memory
    out_kind, out_obj = _load(out_path)
    _, led_obj = _load(ledger_path)
    f_in = _artifact_poly(kind, obj)
    reconstructs = apply_ledger(_artifact_poly(out_kind, out_obj), led_obj) == f_in
    base = os.path.dirname(os.path.abspath(report_path))
    doc = {
        **report.to_json(),
        "seed": args.seed,
        "field": str(f_in.ring.field),
        "files": {
            "input": os.path.relpath(os.path.abspath(args.input), base),
            "output": os.path.relpath(os.path.abspath(out_path), base),
            "ledger": os.path.relpath(os.path.abspath(ledger_path), base),
        },
        "sha256": {"input": _sha256(args.input), "output": _sha256(out_path), "ledger": _sha256(ledger_path)},
        "input_summary": _artifact_summary(kind, obj),
        "output_summary": _artifact_summary(out_kind, out_obj),
        "ledger_reconstructs_input": reconstructs,
        "input_polynomial_terms": len(f_in),
    }
    _write(report_path, formats.dumps(doc))
    if not args.quiet:
        sys.stdout.write(formats.dumps(doc))
    return EXIT_OK if reconstructs else EXIT_FAIL


# verify


def recheck_report(report_path: str) -> CheckReport:
    """Recompute every fact in a transform report from the files it names."""
    doc = formats.loads(_read(report_path))
    out = CheckReport("report", {"report": report_path, "seed": doc.get("seed")})
    base = os.path.dirname(os.path.abspath(report_path))
    files = {k: os.path.join(base, v) for k, v in doc.get("files", {}).items()}
    for key in ("input", "output", "ledger"):
        if key not in files or not os.path.exists(files[key]):
            out.fail(f"missing {key} file")
            return out
        if _sha256(files[key]) != doc["sha256"][key]:
            out.fail(f"{key} file digest differs from the report")
    in_kind, in_obj = _load(files["input"])
    out_kind, out_obj = _load(files["output"])
    _, ledger = _load(files["ledger"])
    f_in = _artifact_poly(in_kind, in_obj)
    checks = {
        "input_summary": _artifact_summary(in_kind, in_obj) == doc.get("input_summary"),
        "after": _artifact_summary(out_kind, out_obj) == doc.get("output_summary"),
        "ledger_size": ledger.r == doc.get("ledger_size"),
        "reconstruction": apply_ledger(_artifact_poly(out_kind, out_obj), ledger) == f_in,
        "ledger_hygiene": not ledger.violations(),
        "input_polynomial_terms": len(f_in) == doc.get("input_polynomial_terms"),
    }
    if doc.get("pipeline") == "reduce-layers":
        checks["geometric_steps"] = all(
            s["layers_after"] <= math.ceil(2 * s["layers_before"] / 3) for s in doc.get("steps", []))
        checks["step_chain"] = all(
            a["layers_after"] == b["layers_before"] for a, b in zip(doc["steps"], doc["steps"][1:]))
    out.counters = checks
    for name, ok in checks.items():
        if not ok:
            out.fail(f"recomputed {name} does not match")
    return out


def _seeded_gs(n: int, D: int, count: int, rng: random.Random) -> list[list]:
    ring = Ring(FieldConfig.rational(), n)
    return [[random_poly(ring, D - 1, rng) for _ in range(n)] for _ in range(count)]


def cmd_verify(args) -> int:
    check = args.check
    rng = random.Random(args.seed)
    if check == "esym-singular":
        if args.p is None or args.d is None:
            raise UsageError("--p and --d are required")
        rep = singular_support_esym(_require_n(args), args.d, args.p, budget=args.budget,
                                    perturb_degree=args.perturb_degree, seed=args.seed)
    elif check == "powersum-singular":
        n = _require_n(args)
        primes = [int(x) for x in args.primes.split(",")]
        rep = CheckReport("powersum-singular", {"n": n, "D": args.D, "primes": primes, "count": args.count})
        worst = 0
        for gs in _seeded_gs(n, args.D, args.count, rng):
            sub = power_sum_singular_check(n, args.D, gs, primes, budget=args.budget)
            worst = max([worst] + list(sub.counters["common_zeros"].values()))
            for msg in sub.failures:
                rep.fail(msg)
        rep.counters = {"max_common_zeros": worst, "bound": args.D**n, "evidence": "enumeration over F_p"}
    elif check == "euler":
        if args.poly is None:
            raise UsageError("--poly is required")
        fld = FieldConfig.parse(args.field)
        rep = euler_check(parse_poly(args.poly, Ring(fld, _require_n(args))))
    elif check == "esym-identity":
        fld = FieldConfig.parse(args.field)
        n = _require_n(args)
        ok = esym_derivative_identity_check(Ring(fld, n), n, args.d)
        rep = CheckReport("esym-identity", {"n": n, "d": args.d, "field": str(fld)})
        if not ok:
            rep.fail("derivative identity does not hold")
    elif check == "abp":
        if args.input is None:
            raise UsageError("--input is required")
        kind, abp = _load(args.input)
        if kind not in ("layered", "unlayered", "multilayered"):
            raise UsageError("--input must be an ABP")
        rep = CheckReport("abp", {"input": args.input})
        problems = validate(abp)
        for p in problems:
            rep.fail(p)
        if not problems:
            F = computed_polynomial(abp)
            dp = F if isinstance(abp, MultilayeredAbp) else path_sum(abp, abp.s, abp.t)
            if brute_force_paths(abp, budget=args.budget) != dp:
                rep.fail("dynamic programming and path enumeration disagree")
            rep.counters = {**summary(abp), "depth": depth(abp), "polynomial": str(F)}
            if args.expect is not None and F != parse_poly(args.expect, abp.ring):
                rep.fail(f"computed polynomial {F} differs from the expected one")
    elif check == "ledger":
        if not (args.input and args.output and args.ledger):
            raise UsageError("--input, --output and --ledger are required")
        k1, a = _load(args.input)
        k2, b = _load(args.output)
        _, led = _load(args.ledger)
        rep = check_ledger(_artifact_poly(k1, a), _artifact_poly(k2, b), led, args.degree_cap)
    elif check == "report":
        if args.report is None:
            raise UsageError("--report is required")
        rep = recheck_report(args.report)
    else:
        raise UsageError(f"unknown check {check!r}")
    rep.params["seed"] = args.seed
    _write(args.out, formats.dumps(rep.to_json()))
    return EXIT_OK if rep.passed else EXIT_FAIL


# export


def cmd_export_dot(args) -> int:
    kind, obj = _load(args.input)
    if kind == "formula":
        text = formats.formula_to_dot(obj[0])
    elif kind in ("layered", "unlayered", "multilayered"):
        hv, he = (), ()
        if args.highlight_cut:
            src = _as_unlayered(obj)
            band = middle_band_vertex_set(src, args.n or src.ring.nvars)
            hv, he = band.vertices, band.removal.edges
        text = formats.to_dot(obj, hv, he)
    else:
        raise UsageError(f"cannot draw a {kind}")
    _write(args.out, text)
    return EXIT_OK


# parser


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--field", default="p=101", help="p=<prime> or rational (default p=101)")
    common.add_argument("--n", type=int, help="number of variables / ambient parameter")
    common.add_argument("--delta", type=int, help="label degree bound")
    common.add_argument("--seed", type=int, default=DEFAULT_SEED)
    common.add_argument("--budget", type=int, default=10**7, help="enumeration budget")
    common.add_argument("--out", help="output file (default stdout)")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="abpkit", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    c = sub.add_parser("construct", parents=[common], help="build a named instance")
    c.add_argument("kind", choices=["powersum", "esym-brute", "esym-benor", "random-layered",
                                    "random-multilayered", "random-unlayered", "random-formula"])
    c.add_argument("--k", type=int, help="exponent for powersum (default n)")
    c.add_argument("--d", type=int, default=2, help="degree for esym and random formulas")
    c.add_argument("--as", dest="as_", choices=["abp", "formula", "poly"], default="abp")
    c.add_argument("--vertices", type=int, default=14)
    c.set_defaults(func=cmd_construct)

    t = sub.add_parser("transform", parents=[common], help="run a pipeline on an input file")
    t.add_argument("pipeline", choices=["reduce-layers", "shrink", "cut-layer", "cut-vertex",
                                        "depth-reduce-once", "depth-reduce-unlayered",
                                        "decompose-formula", "reduce-formula-degree"])
    t.add_argument("input")
    t.add_argument("--target", type=int)
    t.add_argument("--layer", type=int)
    t.add_argument("--vertex", type=int)
    t.add_argument("-q", "--quiet", action="store_true", help="do not echo the report")
    t.set_defaults(func=cmd_transform)

    v = sub.add_parser("verify", parents=[common], help="run a verification check")
    v.add_argument("check", choices=["esym-singular", "powersum-singular", "euler", "esym-identity",
                                     "abp", "ledger", "report"])
    v.add_argument("--d", type=int)
    v.add_argument("--p", type=int)
    v.add_argument("--D", type=int, default=2)
    v.add_argument("--primes", default="5,7,11,13")
    v.add_argument("--count", type=int, default=5)
    v.add_argument("--perturb-degree", type=int)
    v.add_argument("--poly")
    v.add_argument("--expect")
    v.add_argument("--input")
    v.add_argument("--output")
    v.add_argument("--ledger")
    v.add_argument("--report")
    v.add_argument("--degree-cap", type=int)
    v.set_defaults(func=cmd_verify)

    e = sub.add_parser("export-dot", parents=[common], help="draw an ABP or formula")
    e.add_argument("input")
    e.add_argument("--highlight-cut", action="store_true", help="mark the middle-band cut set")
    e.set_defaults(func=cmd_export_dot)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    if getattr(args, "delta", None) is None and args.command == "construct":
        args.delta = 1
    try:
        return args.func(args)
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (UsageError, PreconditionError, FieldError, BudgetExceeded) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except BoundViolation as exc:
        print(f"bound violated: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
