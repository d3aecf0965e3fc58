"""Single-decision problems reduced to conditional queries.

The decision node is given a strictly positive placeholder distribution so
the ordinary inference machinery applies, and the query
``P{u(x_J) | x_d, x_I}`` is solved once. Expected utilities per alternative
follow from the utility values attached to the function node's states.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from idq.diagram import InfluenceDiagram, configurations
from idq.errors import QueryError
from idq.query import FunctionTable, Query, solve

# relative slack when deciding that two expected utilities tie
TIE_TOL = 1e-12


@dataclass(frozen=True)
class DecisionProblem:
    decision: int
    information: tuple[int, ...]
    utility: FunctionTable

    def __post_init__(self):
        object.__setattr__(self, "information", tuple(sorted(set(self.information))))
        if self.decision in self.information:
            raise QueryError("the decision cannot be part of its own information set")
        if self.utility.values is None:
            raise QueryError("utility table needs numeric values for its output states")


@dataclass
class Policy:
    decision: int
    information: tuple[int, ...]
    alternatives: tuple[str, ...]
    choice: dict  # information configuration -> alternative index
    expected: dict  # information configuration -> expected utility of that choice
    by_alternative: dict  # information configuration -> array of expected utilities

    def to_text(self, d: InfluenceDiagram) -> str:
        head = [d[i].label() for i in self.information] + ["decision", "expected_utility"]
        lines = ["\t".join(head)]
        for cfg in configurations([d[i].card for i in self.information]):
            labels = [d[i].states[c] for i, c in zip(self.information, cfg)]
            alt = self.alternatives[self.choice[cfg]]
            lines.append("\t".join(labels + [alt, f"{self.expected[cfg]:.9f}"]))
        return "\n".join(lines) + "\n"

    def as_dict(self, d: InfluenceDiagram):
        rows = []
        for cfg in configurations([d[i].card for i in self.information]):
            rows.append(
                {
                    "information": {str(i): d[i].states[c] for i, c in zip(self.information, cfg)},
                    "decision": self.alternatives[self.choice[cfg]],
                    "expected_utility": round(self.expected[cfg], 9),
                }
            )
        return {"decision": self.decision, "information": list(self.information), "policy": rows}


def with_placeholder(d: InfluenceDiagram, decision, placeholder=None) -> InfluenceDiagram:
    node = d[decision]
    if node.parents:
        raise QueryError(f"decision node {decision} must not have parents")
    n = node.card
    if n is None:
        raise QueryError(f"decision node {decision} has no alternatives")
    p = np.full(n, 1.0 / n) if placeholder is None else np.asarray(placeholder, dtype=float)
    if p.shape != (n,) or np.any(p <= 0):
        raise QueryError("placeholder must be a strictly positive vector over the alternatives")
    p = p / p.sum()
    work = d.copy()
    work.remove(decision)
    work.add_node(decision, node.states, (), p, node.name)
    return work


def solve_decision(d: InfluenceDiagram, problem: DecisionProblem, placeholder=None) -> Policy:
    """Best alternative for each information configuration, lowest index winning ties."""
    if problem.decision not in d:
        raise QueryError(f"unknown decision node {problem.decision}")
    unknown = set(problem.information) - d.nodes.keys()
    if unknown:
        raise QueryError(f"unknown information node {min(unknown)}")
    work = with_placeholder(d, problem.decision, placeholder)
    u = problem.utility
    q = Query(u.inputs, {problem.decision, *problem.information}, u)
    result, _ = solve(work, q)
    values = np.asarray(u.values, dtype=float)
    alts = work[problem.decision].states
    choice, expected, table = {}, {}, {}
    for cfg in configurations([work[i].card for i in problem.information]):
        assignment = dict(zip(problem.information, cfg))
        eu = np.empty(len(alts))
        for a in range(len(alts)):
            assignment[problem.decision] = a
            eu[a] = float(result.row(assignment) @ values)
        best = eu.max()
        pick = int(np.flatnonzero(eu >= best - TIE_TOL * max(1.0, abs(best)))[0])
        choice[cfg], expected[cfg], table[cfg] = pick, float(eu[pick]), eu
    return Policy(problem.decision, problem.information, alts, choice, expected, table)
