"""Random diagrams, queries and decision problems for tests and benchmarks."""
from __future__ import annotations

import numpy as np

from idq.decision import DecisionProblem
from idq.diagram import InfluenceDiagram, weak_successors
from idq.query import FunctionTable, Query


def random_topology(rng: np.random.Generator, n, density=0.5, shuffle_ids=True):
    """A DAG on ids 1..n; each forward pair becomes an arc with probability ``density``."""
    ids = np.arange(1, n + 1)
    if shuffle_ids:
        ids = rng.permutation(ids)
    ids = [int(i) for i in ids]
    topo = {i: [] for i in ids}
    for b in range(n):
        for a in range(b):
            if rng.random() < density:
                topo[ids[b]].append(ids[a])
    return {i: tuple(ps) for i, ps in topo.items()}


def random_table(rng, parent_cards, card, zero_prob=0.0):
    rows = rng.dirichlet(np.ones(card), size=int(np.prod(parent_cards, dtype=np.int64)))
    if zero_prob:
        mask = rng.random(rows.shape) < zero_prob
        # keep at least one positive entry per row
        mask[np.arange(len(rows)), rng.integers(card, size=len(rows))] = False
        rows[mask] = 0.0
        rows /= rows.sum(axis=1, keepdims=True)
    return rows.reshape(*parent_cards, card)


def random_diagram(
    rng: np.random.Generator,
    n,
    states=(2, 3),
    density=None,
    zero_prob=0.0,
    shuffle_ids=True,
) -> InfluenceDiagram:
    if density is None:
        density = rng.uniform(0.0, 0.5)
    topo = random_topology(rng, n, density, shuffle_ids)
    cards = {i: int(rng.choice(states)) for i in topo}
    d = InfluenceDiagram()
    for i, ps in topo.items():
        table = random_table(rng, [cards[p] for p in ps], cards[i], zero_prob)
        d.add_node(i, [f"s{k}" for k in range(cards[i])], ps, table)
    return d


def random_subset(rng, ids, lo, hi):
    ids = sorted(ids)
    size = int(rng.integers(lo, min(hi, len(ids)) + 1))
    return {int(i) for i in rng.choice(ids, size=size, replace=False)} if size else set()


def random_function(rng, d: InfluenceDiagram, J, n_out=None) -> FunctionTable:
    inputs = tuple(int(i) for i in rng.permutation(sorted(J)))
    cards = [d[i].card for i in inputs]
    if n_out is None:
        n_out = int(rng.integers(1, 4))
    table = rng.integers(n_out, size=cards)
    return FunctionTable(inputs, tuple(f"v{k}" for k in range(n_out)), table)


def random_query(rng, d: InfluenceDiagram, max_j=3, max_k=3, identity_prob=0.3, overlap=True) -> Query:
    J = random_subset(rng, d.ids, 1, max_j)
    pool = d.ids if overlap else sorted(set(d.ids) - J)
    K = random_subset(rng, pool, 0, max_k) if pool else set()
    f = None if rng.random() < identity_prob else random_function(rng, d, J)
    return Query(J, K, f)


def random_decision(rng, n_chance=4, max_alternatives=3, max_info_configs=4):
    """A diagram with ``n_chance`` chance nodes plus one decision, and its problem.

    The decision node has no parents; some chance nodes may depend on it.
    Information comes from non-descendants of the decision so that the
    problem is well posed.
    """
    d = random_diagram(rng, n_chance + 1)
    dec = int(rng.choice(d.ids))
    n_alt = int(rng.integers(2, max_alternatives + 1))
    # rebuild the decision as a parentless node with fresh alternatives;
    # its children get new tables sized for them
    d.remove(dec)
    d.add_node(dec, [f"a{k}" for k in range(n_alt)], (), None, "decision")
    for i in list(d.nodes):
        node = d[i]
        if dec in node.parents:
            cards = [d[p].card for p in node.parents]
            d.remove(i)
            d.add_node(i, node.states, node.parents, random_table(rng, cards, node.card), node.name)
    below = weak_successors(d, {dec})
    candidates = sorted(set(d.ids) - below)
    info = set()
    for i in rng.permutation(candidates):
        trial = info | {int(i)}
        if int(np.prod([d[k].card for k in trial])) <= max_info_configs and rng.random() < 0.6:
            info = trial
    J = random_subset(rng, d.ids, 1, 3)
    if rng.random() < 0.7:
        J.add(dec)
    inputs = tuple(sorted(J))
    pool = np.round(rng.normal(size=4) * 10, 3)
    raw = pool[rng.integers(len(pool), size=[d[i].card for i in inputs])]
    # only values that occur, ascending, as the document loader would build them
    values = tuple(float(v) for v in np.unique(raw))
    table = np.searchsorted(values, raw)
    u = FunctionTable(inputs, tuple(repr(v) for v in values), table, values)
    return d, DecisionProblem(dec, tuple(sorted(info)), u)
