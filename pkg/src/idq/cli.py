"""``idq`` command-line front end.

Exit status is 0 on success, 1 on a domain error (bad model, bad query,
oracle disagreement) and 2 on a usage error.
"""
from __future__ import annotations

import argparse
import json
import sys

from idq import oracle
from idq.decision import solve_decision, with_placeholder
from idq.diagram import validate
from idq.errors import IdqError
from idq.io import load_document, load_function
from idq.query import Query, plan_only, solve
from idq.requirements import maximal, requirements


def _ids(text):
    if text is None or text.strip() == "":
        return []
    try:
        return [int(t) for t in text.split(",") if t.strip() != ""]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated node ids, got {text!r}") from None


def _fmt_ids(ids):
    return ",".join(str(i) for i in sorted(ids))


def _build_parser():
    p = argparse.ArgumentParser(prog="idq", description="Exact queries on discrete influence diagrams.")
    sub = p.add_subparsers(dest="command", required=True)

    v = sub.add_parser("validate", help="check a model file")
    v.add_argument("file")

    i = sub.add_parser("infer", help="compute P{f(x_J) | x_K}")
    i.add_argument("file")
    i.add_argument("--j", type=_ids, required=True, help="target node ids")
    i.add_argument("--k", type=_ids, default=[], help="conditioning node ids")
    i.add_argument("--f", help="function table file (default: identity on J)")
    i.add_argument("--oracle", action="store_true", help="cross-check against brute-force enumeration")
    i.add_argument("--json", action="store_true")

    pl = sub.add_parser("plan", help="print the transform sequence for a query")
    pl.add_argument("file")
    pl.add_argument("--j", type=_ids, required=True)
    pl.add_argument("--k", type=_ids, default=[])

    r = sub.add_parser("requirements", help="data needed to answer a query")
    r.add_argument("file")
    r.add_argument("--j", type=_ids, required=True)
    r.add_argument("--k", type=_ids, default=[])
    r.add_argument("--missing", type=_ids, default=None, help="nodes whose distributions are unavailable")
    r.add_argument("--json", action="store_true")

    dc = sub.add_parser("decide", help="optimal policy for the model's decision")
    dc.add_argument("file")
    dc.add_argument("--json", action="store_true")
    return p


def _load_valid(path):
    model = load_document(path)
    d = model.diagram
    check = with_placeholder(d, model.problem.decision) if model.problem else d
    report = validate(check)
    if report:
        raise IdqError(str(report.violations[0]))
    return model


def _query(args, d):
    f = load_function(args.f, d) if getattr(args, "f", None) else None
    J = args.j if f is None else f.inputs
    if f is not None and set(args.j) != set(f.inputs):
        raise IdqError(f"--j {_fmt_ids(args.j)} differs from function inputs {_fmt_ids(f.inputs)}")
    return Query(J, args.k, f)


def _result_tsv(d, q, res):
    out = [f"# query J={_fmt_ids(q.J)} K={_fmt_ids(q.K)}"]
    out.append(f"# irrelevant K: {_fmt_ids(res.irrelevant) or '-'}")
    if not res.support_checked:
        out.append("# zero-support: not checked (data missing)")
    elif res.zero_support:
        ctx = [",".join(d[p].states[c] for p, c in zip(res.parents, cfg)) for cfg in sorted(res.zero_support)]
        out.append(f"# zero-support: {' '.join(ctx)}")
    out.append("\t".join([d[p].label() for p in res.parents] + [f"P({s})" for s in res.states]))
    for cfg, row in res.rows():
        labels = [d[p].states[c] for p, c in zip(res.parents, cfg)]
        out.append("\t".join(labels + [f"{x:.9f}" for x in row]))
    return "\n".join(out) + "\n"


def _result_json(d, q, res):
    rows = []
    for cfg, row in res.rows():
        rows.append(
            {
                "context": {str(p): d[p].states[c] for p, c in zip(res.parents, cfg)},
                "p": [round(float(x), 9) for x in row],
            }
        )
    doc = {
        "J": sorted(q.J),
        "K": sorted(q.K),
        "parents": list(res.parents),
        "states": list(res.states),
        "rows": rows,
        "irrelevant": list(res.irrelevant),
        "zero_support": [list(c) for c in sorted(res.zero_support)],
        "support_checked": res.support_checked,
    }
    return json.dumps(doc, indent=2) + "\n"


def _cmd_validate(args, out):
    model = load_document(args.file)
    d = model.diagram
    check = with_placeholder(d, model.problem.decision) if model.problem else d
    report = validate(check)
    if not report:
        out.write(f"ok: {len(d)} nodes, {len(d.arcs)} arcs\n")
        return 0
    for v in report:
        out.write(f"{v}\n")
    return 1


def _cmd_infer(args, out, err):
    model = _load_valid(args.file)
    d = model.diagram
    q = _query(args, d)
    res, _ = solve(d, q)
    text = _result_json(d, q, res) if args.json else _result_tsv(d, q, res)
    if args.oracle:
        ref = oracle.oracle_query(d, q.J, q.K, q.f)
        problems = oracle.matches(res, ref)
        if problems:
            out.write(text)
            err.write(f"idq: oracle mismatch on {len(problems)} context(s)\n")
            for line in problems:
                err.write(f"  {line}\n")
            return 1
        if not args.json:
            text += f"# oracle: agree on {sum(1 for _ in ref.rows()) - len(ref.zero_support)} context(s)\n"
    out.write(text)
    return 0


def _cmd_plan(args, out):
    model = load_document(args.file)
    q = Query(args.j, args.k)
    out.write(plan_only(model.diagram, q).to_text())
    return 0


def _cmd_requirements(args, out):
    model = load_document(args.file)
    g = model.diagram.topology()
    if args.missing is not None:
        rep = maximal(g, args.j, args.k, args.missing).as_dict()
    else:
        rep = requirements(g, args.j, args.k).as_dict()
    if args.json:
        out.write(json.dumps(rep, indent=2) + "\n")
    else:
        for key, val in rep.items():
            shown = str(val).lower() if isinstance(val, bool) else (_fmt_ids(val) or "-")
            out.write(f"{key}\t{shown}\n")
    return 0


def _cmd_decide(args, out):
    model = _load_valid(args.file)
    if model.problem is None:
        raise IdqError("model has no decision block")
    policy = solve_decision(model.diagram, model.problem)
    if args.json:
        out.write(json.dumps(policy.as_dict(model.diagram), indent=2) + "\n")
    else:
        out.write(policy.to_text(model.diagram))
    return 0


def main(argv=None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        if args.command == "validate":
            return _cmd_validate(args, out)
        if args.command == "infer":
            return _cmd_infer(args, out, err)
        if args.command == "plan":
            return _cmd_plan(args, out)
        if args.command == "requirements":
            return _cmd_requirements(args, out)
        return _cmd_decide(args, out)
    except IdqError as exc:
        err.write(f"idq: error: {exc}\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
