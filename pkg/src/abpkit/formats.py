"""JSON file formats and DOT export.

Every file is a JSON object with ``field`` (``"p=101"`` or ``"rational"``),
``n`` (number of variables) and ``kind``.  Polynomials are lists of
``{"exponents": [...], "coeff": "..."}`` terms; labels may also be given as
polynomial text.
"""

from __future__ import annotations

import json
from typing import Any

from .abp import ErrorLedger, LayeredAbp, MultilayeredAbp, UnlayeredAbp
from .field import FieldConfig, FieldError
from .formula import Add, Const, Formula, Var, formula_from_json, formula_to_json
from .poly import ParseError, Ring, SparsePoly, parse_poly


def loads(text: str) -> dict:
    """Parse JSON, turning syntax errors into :class:`ParseError` with a position."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc.msg} (line {exc.lineno}, column {exc.colno})", exc.pos, text) from None
    if not isinstance(data, dict):
        raise ParseError("top-level JSON value must be an object", 0, text)
    return data


def dumps(obj: dict) -> str:
    return json.dumps(obj, indent=2, sort_keys=False) + "\n"


def _get(data: dict, key: str, where: str):
    if key not in data:
        raise ParseError(f"{where}: missing field {key!r}")
    return data[key]


def ring_from_json(data: dict) -> Ring:
    try:
        fld = FieldConfig.parse(str(_get(data, "field", "$")))
        n = int(_get(data, "n", "$"))
    except (FieldError, ValueError, TypeError) as exc:
        if isinstance(exc, ParseError):
            raise
        raise ParseError(f"$: {exc}") from None
    return Ring(fld, n)


def _ring_header(ring: Ring) -> dict:
    return {"field": str(ring.field), "n": ring.nvars}


def poly_from_json(ring: Ring, data, where: str) -> SparsePoly:
    try:
        if isinstance(data, str):
            return parse_poly(data, ring)
        return SparsePoly.from_json(ring, data)
    except ParseError as exc:
        raise ParseError(f"{where}: {exc.message}", exc.pos, exc.text) from None


# polynomials


def poly_file(p: SparsePoly) -> dict:
    return {**_ring_header(p.ring), "kind": "poly", "terms": p.to_json()}


def poly_from_file(data: dict) -> SparsePoly:
    ring = ring_from_json(data)
    return poly_from_json(ring, _get(data, "terms", "$"), "$.terms")


# ABPs


def _edges_json(edges) -> list[dict]:
    return [{"from": u, "to": v, "label": lab.to_json()} for (u, v), lab in edges.items()]


def _edges_from_json(ring: Ring, data, where: str) -> dict:
    if not isinstance(data, list):
        raise ParseError(f"{where}: expected a list of edges")
    out = {}
    for k, e in enumerate(data):
        w = f"{where}[{k}]"
        if not isinstance(e, dict):
            raise ParseError(f"{w}: expected an object")
        try:
            key = (int(_get(e, "from", w)), int(_get(e, "to", w)))
        except (TypeError, ValueError) as exc:
            raise ParseError(f"{w}: {exc}") from None
        if key in out:
            raise ParseError(f"{w}: duplicate edge {key}")
        out[key] = poly_from_json(ring, _get(e, "label", w), f"{w}.label")
    return out


def _layers_from_json(data, where: str) -> list:
    if not isinstance(data, list) or not all(isinstance(layer, list) for layer in data):
        raise ParseError(f"{where}: expected a list of vertex lists")
    try:
        return [tuple(int(v) for v in layer) for layer in data]
    except (TypeError, ValueError) as exc:
        raise ParseError(f"{where}: {exc}") from None


def abp_to_json(abp) -> dict:
    head = {**_ring_header(abp.ring), "delta": abp.delta}
    if isinstance(abp, LayeredAbp):
        return {**head, "kind": "layered", "layers": [list(layer) for layer in abp.layers],
                "edges": _edges_json(abp.edges), "s": abp.s, "t": abp.t}
    if isinstance(abp, UnlayeredAbp):
        return {**head, "kind": "unlayered", "vertices": list(abp.vertices),
                "edges": _edges_json(abp.edges), "s": abp.s, "t": abp.t}
    if isinstance(abp, MultilayeredAbp):
        return {**head, "kind": "multilayered", "branches": [
            {"layers": [list(layer) for layer in b.layers], "edges": _edges_json(b.edges)} for b in abp.branches]}
    raise TypeError(f"not an ABP: {type(abp).__name__}")


def abp_from_json(data: dict):
    ring = ring_from_json(data)
    kind = _get(data, "kind", "$")
    try:
        delta = int(_get(data, "delta", "$"))
    except (TypeError, ValueError) as exc:
        raise ParseError(f"$.delta: {exc}") from None
    if kind == "layered":
        layers = _layers_from_json(_get(data, "layers", "$"), "$.layers")
        return LayeredAbp(ring, delta, layers, _edges_from_json(ring, _get(data, "edges", "$"), "$.edges"))
    if kind == "unlayered":
        try:
            vertices = [int(v) for v in _get(data, "vertices", "$")]
            s, t = int(_get(data, "s", "$")), int(_get(data, "t", "$"))
        except (TypeError, ValueError) as exc:
            raise ParseError(f"$: {exc}") from None
        return UnlayeredAbp(ring, delta, vertices, _edges_from_json(ring, _get(data, "edges", "$"), "$.edges"), s, t)
    if kind == "multilayered":
        branches = []
        for k, b in enumerate(_get(data, "branches", "$")):
            w = f"$.branches[{k}]"
            layers = _layers_from_json(_get(b, "layers", w), f"{w}.layers")
            branches.append(LayeredAbp(ring, delta, layers, _edges_from_json(ring, _get(b, "edges", w), f"{w}.edges")))
        return MultilayeredAbp(tuple(branches))
    raise ParseError(f"$.kind: unknown ABP kind {kind!r}")


# ledgers


def ledger_to_json(ledger: ErrorLedger) -> dict:
    return {
        **_ring_header(ledger.ring),
        "kind": "ledger",
        "pairs": [{"P": p.to_json(), "Q": q.to_json()} for p, q in ledger.pairs],
        "delta": str(ledger.delta),
        "remainder": ledger.remainder.to_json(),
        "degree_bound": ledger.degree_bound,
    }


def ledger_from_json(data: dict) -> ErrorLedger:
    ring = ring_from_json(data)
    pairs = []
    for k, pq in enumerate(_get(data, "pairs", "$")):
        w = f"$.pairs[{k}]"
        pairs.append((poly_from_json(ring, _get(pq, "P", w), f"{w}.P"), poly_from_json(ring, _get(pq, "Q", w), f"{w}.Q")))
    try:
        delta = ring.field.coerce(str(data.get("delta", "0")))
    except (FieldError, ValueError) as exc:
        raise ParseError(f"$.delta: {exc}") from None
    remainder = poly_from_json(ring, data.get("remainder", []), "$.remainder")
    return ErrorLedger(ring, pairs, delta, remainder, data.get("degree_bound"))


# formulas


def formula_file(f: Formula, ring: Ring) -> dict:
    return {**_ring_header(ring), "kind": "formula", "formula": formula_to_json(f)}


def formula_from_file(data: dict) -> tuple[Formula, Ring]:
    ring = ring_from_json(data)
    return formula_from_json(_get(data, "formula", "$"), "$.formula"), ring


# generic


def load_artifact(text: str) -> tuple[str, Any]:
    """Decode any supported file; returns ``(kind, object)``.

    Formulas come back as ``(formula, ring)``.
    """
    data = loads(text)
    kind = _get(data, "kind", "$")
    if kind in ("layered", "unlayered", "multilayered"):
        return kind, abp_from_json(data)
    if kind == "poly":
        return kind, poly_from_file(data)
    if kind == "ledger":
        return kind, ledger_from_json(data)
    if kind == "formula":
        return kind, formula_from_file(data)
    raise ParseError(f"$.kind: unknown kind {kind!r}")


# DOT


def _dot_label(p: SparsePoly) -> str:
    return str(p).replace('"', '\\"')


def to_dot(abp, highlight_vertices=(), highlight_edges=()) -> str:
    """Graphviz text; highlighted vertices are filled and edges drawn red."""
    if isinstance(abp, MultilayeredAbp):
        abp = abp.merged()
    hv, he = set(highlight_vertices), set(map(tuple, highlight_edges))
    lines = ["digraph abp {", "  rankdir=LR;"]
    if isinstance(abp, LayeredAbp):
        for j, layer in enumerate(abp.layers):
            members = " ".join(f"v{v};" for v in layer)
            lines.append(f"  {{ rank=same; {members} }}  // layer {j + 1}")
    for v in abp.vertices:
        attrs = [f'label="{"s" if v == abp.s else "t" if v == abp.t else v}"']
        if v in hv:
            attrs.append("style=filled fillcolor=gold")
        lines.append(f"  v{v} [{' '.join(attrs)}];")
    for (u, v), lab in abp.edges.items():
        attrs = [f'label="{_dot_label(lab)}"']
        if (u, v) in he:
            attrs.append("color=red penwidth=2")
        lines.append(f"  v{u} -> v{v} [{' '.join(attrs)}];")
    lines.append("}")
    return "\n".join(lines) + "\n"


def formula_to_dot(f: Formula) -> str:
    lines = ["digraph formula {"]
    counter = iter(range(10**9))

    def emit(node) -> str:
        name = f"n{next(counter)}"
        if isinstance(node, Var):
            text = f"x{node.index}"
        elif isinstance(node, Const):
            text = str(node.value)
        else:
            text = "+" if isinstance(node, Add) else "*"
        lines.append(f'  {name} [label="{text}"];')
        for c in node.children:
            lines.append(f"  {name} -> {emit(c)};")
        return name

    emit(f)
    lines.append("}")
    return "\n".join(lines) + "\n"
