"""JSON model documents.

Shape::

    {
      "nodes": [
        {"id": 1, "name": "rain", "states": ["no", "yes"], "parents": [],
         "cpt": [[0.7, 0.3]]},
        ...
      ],
      "decision": {"id": 9, "name": "act", "states": ["go", "stay"], "information": [1]},
      "utility": {"inputs": [1, 9], "values": [0, -1, -10, 0]}
    }

``cpt`` rows run in odometer order over ``parents`` (last parent fastest);
``utility.values`` likewise over ``utility.inputs``. A ``cpt`` of ``null``
marks a node whose distribution is unknown.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from idq.decision import DecisionProblem
from idq.diagram import ROW_TOL, FUNCTION_NODE, InfluenceDiagram, renormalized
from idq.errors import FormatError, QueryError
from idq.query import FunctionTable


@dataclass
class Model:
    diagram: InfluenceDiagram
    problem: DecisionProblem | None = None


def _read(source):
    if isinstance(source, dict):
        return source
    if isinstance(source, Path) or (isinstance(source, str) and not source.lstrip().startswith("{")):
        try:
            text = Path(source).read_text()
        except OSError as exc:
            raise FormatError(f"{source}: cannot read file ({exc.strerror})") from None
    else:
        text = source
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"line {exc.lineno}: {exc.msg}") from None
    if not isinstance(doc, dict):
        raise FormatError("line 1: top level must be an object")
    return doc


def _int(v, what):
    if isinstance(v, bool) or not isinstance(v, int):
        raise FormatError(f"{what}: expected an integer id, got {v!r}")
    return v


def _node_table(entry, i, cards, own):
    rows = entry.get("cpt")
    if rows is None:
        return None
    if not isinstance(rows, list) or not all(isinstance(r, list) for r in rows):
        raise FormatError(f"node {i}: cpt must be a list of rows")
    if any(len(r) != own for r in rows):
        bad = next(n for n, r in enumerate(rows) if len(r) != own)
        raise FormatError(f"node {i}: cpt row {bad} has {len(rows[bad])} entries, node has {own} states")
    try:
        flat = np.array(rows, dtype=float).reshape(len(rows), own)
    except (TypeError, ValueError):
        raise FormatError(f"node {i}: cpt entries must be numbers") from None
    n_rows = int(np.prod(cards, dtype=np.int64))
    sums = flat.sum(axis=1)
    near = np.abs(sums - 1.0) <= ROW_TOL
    if np.any(near):
        flat[near] = renormalized(flat[near])
    if len(rows) == n_rows and None not in cards:
        return flat.reshape(*cards, own)
    return flat


def load_document(source) -> Model:
    """Parse a model from a path, a JSON string or an already-decoded dict."""
    doc = _read(source)
    entries = doc.get("nodes")
    if not isinstance(entries, list):
        raise FormatError("document needs a 'nodes' array")
    decision = doc.get("decision")
    known = {}
    for n, e in enumerate(entries):
        if not isinstance(e, dict) or "id" not in e:
            raise FormatError(f"nodes[{n}]: each node needs an 'id'")
        i = _int(e["id"], f"nodes[{n}].id")
        if i == FUNCTION_NODE:
            raise FormatError(f"nodes[{n}]: id 0 is reserved")
        if i in known:
            raise FormatError(f"node {i}: duplicate id")
        states = e.get("states")
        if not isinstance(states, list) or not states:
            raise FormatError(f"node {i}: 'states' must be a non-empty list")
        known[i] = [str(s) for s in states]
    if decision is not None:
        dec_id = _int(decision.get("id"), "decision.id")
        if dec_id == FUNCTION_NODE or dec_id in known:
            raise FormatError(f"decision {dec_id}: id reserved or already used")
        alts = decision.get("states")
        if not isinstance(alts, list) or not alts:
            raise FormatError(f"decision {dec_id}: 'states' must be a non-empty list")
        known[dec_id] = [str(s) for s in alts]

    d = InfluenceDiagram()
    for e in entries:
        i = e["id"]
        parents = e.get("parents", [])
        if not isinstance(parents, list):
            raise FormatError(f"node {i}: 'parents' must be a list")
        parents = [_int(p, f"node {i} parent") for p in parents]
        cards = [len(known[p]) if p in known else None for p in parents]
        table = _node_table(e, i, cards, len(known[i]))
        d.add_node(i, known[i], parents, table, e.get("name"))

    problem = None
    if decision is not None:
        d.add_node(dec_id, known[dec_id], (), None, decision.get("name"))
        info = [_int(k, "decision.information") for k in decision.get("information", [])]
        missing = [k for k in info if k not in known]
        if missing:
            raise FormatError(f"decision {dec_id}: unknown information node {missing[0]}")
        utility = doc.get("utility")
        if not isinstance(utility, dict):
            raise FormatError("a decision needs a 'utility' object")
        problem = DecisionProblem(dec_id, tuple(info), _utility(utility, known))
    elif "utility" in doc:
        raise FormatError("'utility' given without a 'decision'")
    return Model(d, problem)


def _utility(utility, known):
    inputs = [_int(k, "utility.inputs") for k in utility.get("inputs", [])]
    for k in inputs:
        if k not in known:
            raise FormatError(f"utility: unknown input node {k}")
    vals = utility.get("values")
    if not isinstance(vals, list) or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in vals):
        raise FormatError("utility: 'values' must be a list of numbers")
    vals = [float(v) for v in vals]
    distinct = sorted(set(vals))
    try:
        return FunctionTable.from_rows(
            inputs,
            tuple(repr(v) for v in distinct),
            [repr(v) for v in vals],
            [len(known[k]) for k in inputs],
            tuple(distinct),
        )
    except QueryError as exc:
        raise FormatError(f"utility: {exc}") from None


def dump_document(d: InfluenceDiagram, problem: DecisionProblem | None = None) -> dict:
    nodes = []
    for i in sorted(d.nodes):
        if problem is not None and i == problem.decision:
            continue
        n = d[i]
        entry = {"id": i}
        if n.name is not None:
            entry["name"] = n.name
        entry["states"] = list(n.states) if n.states is not None else None
        entry["parents"] = list(n.parents)
        entry["cpt"] = None if n.table is None else n.table.reshape(-1, n.table.shape[-1]).tolist()
        nodes.append(entry)
    doc = {"nodes": nodes}
    if problem is not None:
        dn = d[problem.decision]
        dec = {"id": problem.decision}
        if dn.name is not None:
            dec["name"] = dn.name
        dec["states"] = list(dn.states)
        dec["information"] = list(problem.information)
        doc["decision"] = dec
        u = problem.utility
        doc["utility"] = {
            "inputs": list(u.inputs),
            "values": np.asarray(u.values, dtype=float)[u.table].ravel().tolist(),
        }
    return doc


def dumps(d: InfluenceDiagram, problem: DecisionProblem | None = None) -> str:
    return json.dumps(dump_document(d, problem), indent=2) + "\n"


def load_function(source, d: InfluenceDiagram) -> FunctionTable:
    """Function file: ``{"inputs": [...], "states": [...], "table": [...]}``, table in odometer order."""
    doc = _read(source)
    try:
        inputs = [_int(k, "function input") for k in doc["inputs"]]
        states = [str(s) for s in doc["states"]]
        rows = [str(r) for r in doc["table"]]
    except (KeyError, TypeError):
        raise FormatError("function file needs 'inputs', 'states' and 'table'") from None
    for k in inputs:
        if k not in d or d[k].states is None:
            raise FormatError(f"function: unknown input node {k}")
    try:
        return FunctionTable.from_rows(inputs, states, rows, [d[k].card for k in inputs])
    except QueryError as exc:
        raise FormatError(f"function: {exc}") from None
