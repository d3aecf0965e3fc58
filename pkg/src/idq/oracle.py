"""Brute-force reference answers computed from the full joint distribution.

Nothing here shares code with the transform engine: the joint is the plain
product of every node's table, and conditionals come from summing joint
mass. It is meant to stay small enough to audit by eye.
"""
from __future__ import annotations

import string
from dataclasses import dataclass
from itertools import product

import numpy as np

from idq.diagram import InfluenceDiagram, topological_order
from idq.errors import DiagramError, MissingDataError
from idq.query import FunctionTable, QueryResult

DEFAULT_CAP = 2**20


@dataclass(frozen=True, eq=False)
class JointTable:
    variables: tuple[int, ...]
    probabilities: np.ndarray  # one axis per variable, odometer order when flattened

    def axis(self, i) -> int:
        return self.variables.index(i)


def build_joint(d: InfluenceDiagram, cap: int = DEFAULT_CAP, order=None) -> JointTable:
    """Multiply every conditional table together, following a topological order."""
    variables = tuple(sorted(d.nodes))
    for i in variables:
        if d[i].table is None:
            raise MissingDataError(i, "distribution")
    cards = [d[i].card for i in variables]
    size = int(np.prod(cards, dtype=np.int64))
    if size > cap:
        raise DiagramError(f"joint has {size} entries, above the cap of {cap}")
    if len(variables) > len(string.ascii_letters):
        raise DiagramError("too many variables for the oracle")
    letter = {i: string.ascii_letters[n] for n, i in enumerate(variables)}
    out = "".join(letter[i] for i in variables)
    joint = np.ones(cards)
    for i in order if order is not None else topological_order(d):
        node = d[i]
        sub = "".join(letter[p] for p in node.parents) + letter[i]
        joint = np.einsum(f"{out},{sub}->{out}", joint, node.table)
    return JointTable(variables, joint)


def _function_index(t: JointTable, f: FunctionTable) -> np.ndarray:
    """f's output index at every point of the joint's cross product."""
    idx = np.empty(t.probabilities.shape, dtype=np.int64)
    for cfg in product(*(range(c) for c in t.probabilities.shape)):
        idx[cfg] = f.table[tuple(cfg[t.axis(j)] for j in f.inputs)]
    return idx


def oracle_conditional(t: JointTable, f: FunctionTable, K) -> QueryResult:
    """``P{f(x_J) = v | x_K}`` for every configuration of ``sorted(K)``.

    Configurations with zero mass get a uniform row and are listed in
    ``zero_support``.
    """
    K = tuple(sorted(K))
    P = t.probabilities
    idx = _function_index(t, f)
    k_axes = [t.axis(k) for k in K]
    k_cards = [P.shape[a] for a in k_axes]
    n_out = len(f.output_states)
    table = np.zeros((*k_cards, n_out))
    for cfg in product(*(range(c) for c in P.shape)):
        kcfg = tuple(cfg[a] for a in k_axes)
        table[kcfg + (idx[cfg],)] += P[cfg]
    mass = table.sum(axis=-1)
    zero = set()
    for kcfg in product(*(range(c) for c in k_cards)):
        if mass[kcfg] == 0.0:
            zero.add(kcfg)
            table[kcfg] = 1.0 / n_out
        else:
            table[kcfg] /= mass[kcfg]
    return QueryResult(K, f.output_states, table, frozenset(zero), ())


def oracle_query(d: InfluenceDiagram, J, K=(), f: FunctionTable | None = None) -> QueryResult:
    t = build_joint(d)
    if f is None:
        f = FunctionTable.identity(d, J)
    return oracle_conditional(t, f, K)


def matches(engine: QueryResult, oracle: QueryResult, tol=1e-9) -> list[str]:
    """Mismatches between an engine answer and the oracle, on positive-support rows.

    The engine table may omit irrelevant K members; the oracle table has all
    of them, so each oracle row is compared against the engine row at the
    projected configuration.
    """
    problems = []
    if engine.states != oracle.states:
        return [f"output states differ: {engine.states} vs {oracle.states}"]
    K = oracle.parents
    for kcfg, row in oracle.rows():
        if kcfg in oracle.zero_support:
            continue
        assignment = dict(zip(K, kcfg))
        got = engine.row(assignment)
        err = float(np.max(np.abs(got - row)))
        if err > tol:
            problems.append(f"context {kcfg}: engine {got.tolist()} vs oracle {row.tolist()} (|diff| {err:.3g})")
    return problems


# decisions ----------------------------------------------------------------


def policy_value(d: InfluenceDiagram, decision, information, alternatives, utility, policy) -> float:
    """Expected utility when ``decision`` follows ``policy`` deterministically.

    ``policy`` maps each configuration of ``sorted(information)`` to an
    alternative index. The decision node becomes a chance node whose table
    is the point mass the policy prescribes.
    """
    info = tuple(sorted(information))
    cards = [d[i].card for i in info]
    n_alt = len(alternatives)
    table = np.zeros((*cards, n_alt))
    for cfg in product(*(range(c) for c in cards)):
        table[cfg + (policy[cfg],)] = 1.0
    work = d.copy()
    work.remove(decision)
    work.add_node(decision, alternatives, info, table)
    t = build_joint(work)
    idx = _function_index(t, utility)
    vals = np.asarray(utility.values)[idx]
    return float(np.sum(t.probabilities * vals))


def best_policy(d: InfluenceDiagram, decision, information, alternatives, utility):
    """Exhaustive search over every deterministic policy. Returns ``(value, policy)``."""
    info = tuple(sorted(information))
    configs = list(product(*(range(d[i].card) for i in info)))
    best = None
    for choice in product(range(len(alternatives)), repeat=len(configs)):
        policy = dict(zip(configs, choice))
        v = policy_value(d, decision, info, alternatives, utility, policy)
        if best is None or v > best[0]:
            best = (v, policy)
    return best
