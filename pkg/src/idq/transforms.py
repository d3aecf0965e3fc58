"""Barren-node removal, arc reversal and node removal.

Public functions never touch their input: they copy the diagram, apply the
transform to the copy and return it. The underscore-prefixed variants work
in place on a scratch diagram and are what the query engine drives. When
called with ``numeric=False`` they only rewrite parent sets, which is how
plans are derived from a bare topology.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from idq import kernels
from idq.diagram import (
    FUNCTION_NODE,
    InfluenceDiagram,
    direct_successors,
    other_directed_path_exists,
    topological_order,
    weak_predecessors,
)
from idq.errors import DiagramError, MissingDataError, PlanError, TransformError

BARREN = "barren"
REVERSE = "reverse"
EXPECT = "expect"


@dataclass(frozen=True)
class TransformStep:
    kind: str
    node: int
    other: int | None = None
    # parents of (other, node) right after a reversal
    parents_after: tuple | None = field(default=None, compare=False)
    zero_rows: int = field(default=0, compare=False)

    def to_line(self) -> str:
        if self.kind == BARREN:
            return f"BARREN {self.node}"
        if self.kind == REVERSE:
            return f"REVERSE {self.node} {self.other}"
        return f"EXPECT {self.node} INTO {self.other}"

    @classmethod
    def from_line(cls, line: str) -> TransformStep:
        parts = line.split(" ")
        try:
            if parts[0] == "BARREN" and len(parts) == 2:
                return cls(BARREN, int(parts[1]))
            if parts[0] == "REVERSE" and len(parts) == 3:
                return cls(REVERSE, int(parts[1]), int(parts[2]))
            if parts[0] == "EXPECT" and len(parts) == 4 and parts[2] == "INTO":
                return cls(EXPECT, int(parts[1]), int(parts[3]))
        except ValueError:
            pass
        raise PlanError(f"unrecognised plan step {line!r}")

    def __str__(self):
        return self.to_line()


def _successors(work, i):
    return {k for k, n in work.nodes.items() if i in n.parents}


def _card(work, k):
    c = work[k].card
    if c is None:
        raise MissingDataError(k, "sample space")
    return c


def _table(work, k):
    t = work[k].table
    if t is None:
        raise MissingDataError(k, "distribution")
    return t


def aligned(work, k, axes):
    """Broadcast node ``k``'s table onto ``(*axes, k)`` as a contiguous array.

    ``axes`` must contain every parent of ``k``; extra axes are broadcast.
    """
    node = work[k]
    table = _table(work, k)
    labels = list(node.parents) + [k]
    target = list(axes) + [k]
    perm = [labels.index(t) for t in target if t in labels]
    arr = table.transpose(perm)
    shape = [_card(work, t) if t in labels else 1 for t in target]
    full = [_card(work, t) for t in target]
    return np.ascontiguousarray(np.broadcast_to(arr.reshape(shape), full))


def _frozen(arr):
    arr = np.ascontiguousarray(arr, dtype=float)
    arr.setflags(write=False)
    return arr


# in-place primitives ------------------------------------------------------


def _delete(work, i):
    if _successors(work, i):
        raise TransformError(f"node {i} still has successors")
    work.remove(i)
    return TransformStep(BARREN, i)


def _reverse(work, i, j, numeric=True, check=True):
    if check:
        if i not in work or j not in work:
            raise DiagramError(f"unknown node {i if i not in work else j}")
        if i not in work[j].parents:
            raise TransformError(f"arc ({i},{j}) absent")
        if other_directed_path_exists(work, i, j):
            raise TransformError(f"reversing ({i},{j}) would create a cycle")
    ni, nj = work[i], work[j]
    ctx = sorted((set(ni.parents) | set(nj.parents)) - {i})
    j_parents = tuple(ctx)
    i_parents = tuple(sorted(set(ctx) | {j}))
    zero_rows = 0
    if numeric:
        cards = [_card(work, k) for k in ctx]
        ci, cj = _card(work, i), _card(work, j)
        n_ctx = int(np.prod(cards, dtype=np.int64))
        pi_i = aligned(work, i, ctx).reshape(n_ctx, ci)
        pi_j = aligned(work, j, ctx + [i]).reshape(n_ctx, ci, cj)
        new_j, new_i, zero = kernels.reverse(pi_i, pi_j)
        zero_rows = int(np.count_nonzero(zero))
        new_j = new_j.reshape(*cards, cj)
        # new_i axes are (*ctx, j, i); reorder to (*i_parents, i)
        new_i = new_i.reshape(*cards, cj, ci)
        src = ctx + [j]
        perm = [src.index(p) for p in i_parents] + [len(src)]
        new_i = new_i.transpose(perm)
        work.nodes[j] = replace(nj, parents=j_parents, table=_frozen(new_j))
        work.nodes[i] = replace(ni, parents=i_parents, table=_frozen(new_i))
    else:
        work.nodes[j] = replace(nj, parents=j_parents, table=None)
        work.nodes[i] = replace(ni, parents=i_parents, table=None)
    return TransformStep(REVERSE, i, j, parents_after=(j_parents, i_parents), zero_rows=zero_rows)


def _expect(work, i, j, numeric=True):
    succ = _successors(work, i)
    if succ != {j}:
        raise TransformError(f"node {i} must have exactly one successor {j}, has {sorted(succ)}")
    ni, nj = work[i], work[j]
    ctx = sorted((set(ni.parents) | set(nj.parents)) - {i})
    if numeric:
        cards = [_card(work, k) for k in ctx]
        ci, cj = _card(work, i), _card(work, j)
        n_ctx = int(np.prod(cards, dtype=np.int64))
        pi_i = aligned(work, i, ctx).reshape(n_ctx, ci)
        pi_j = aligned(work, j, ctx + [i]).reshape(n_ctx, ci, cj)
        new_j = kernels.marginalize(pi_i, pi_j).reshape(*cards, cj)
        work.nodes[j] = replace(nj, parents=tuple(ctx), table=_frozen(new_j))
    else:
        work.nodes[j] = replace(nj, parents=tuple(ctx), table=None)
    work.remove(i)
    return TransformStep(EXPECT, i, j)


def successor_order(work, i):
    """Successors of ``i`` in the order their arcs get reversed.

    Ascending topological order with id tie-break, except that the function
    node goes last: it is a sink, so that is always legal, and it keeps the
    function node a sink for the whole elimination.
    """
    succ = _successors(work, i)
    rank = {k: n for n, k in enumerate(topological_order(work))}
    return sorted(succ, key=lambda k: (k == FUNCTION_NODE, rank[k]))


def _remove_node(work, i, numeric=True):
    steps = []
    for s in successor_order(work, i):
        steps.append(_reverse(work, i, s, numeric=numeric))
    steps.append(_delete(work, i))
    return steps


# public API ----------------------------------------------------------------


def is_barren(d: InfluenceDiagram, i, J, K) -> bool:
    """True iff ``i`` is not a weak predecessor of ``J | K``."""
    if i not in d:
        raise DiagramError(f"unknown node {i}")
    return i not in weak_predecessors(d, set(J) | set(K))


def remove_barren(d: InfluenceDiagram, i, J, K) -> InfluenceDiagram:
    if not is_barren(d, i, J, K):
        raise TransformError(f"node {i} is not barren with respect to J={sorted(J)}, K={sorted(K)}")
    if direct_successors(d, {i}):
        raise TransformError(f"node {i} has successors; remove them first")
    work = d.copy()
    _delete(work, i)
    return work


def reverse_arc(d: InfluenceDiagram, i, j) -> tuple[InfluenceDiagram, TransformStep]:
    """Replace arc ``i -> j`` by ``j -> i``, preserving the joint distribution.

    Both endpoints inherit each other's parents. The new table of ``j`` is
    the expectation of its old table over ``x_i``; the new table of ``i``
    follows from Bayes' rule. Rows whose Bayes denominator is zero become
    uniform and are counted in ``step.zero_rows``.
    """
    work = d.copy()
    step = _reverse(work, i, j)
    return work, step


def remove_node(d: InfluenceDiagram, i) -> tuple[InfluenceDiagram, list[TransformStep]]:
    """Reverse every outgoing arc of ``i`` and delete it, marginalising ``x_i`` out."""
    if i not in d:
        raise DiagramError(f"unknown node {i}")
    work = d.copy()
    steps = _remove_node(work, i)
    return work, steps


def expect_out(d: InfluenceDiagram, i, j) -> tuple[InfluenceDiagram, TransformStep]:
    """Sum ``x_i`` out into its single successor ``j`` without computing its posterior."""
    if i not in d or j not in d:
        raise DiagramError(f"unknown node {i if i not in d else j}")
    work = d.copy()
    step = _expect(work, i, j)
    return work, step


def apply_step(work: InfluenceDiagram, step: TransformStep, numeric=True) -> TransformStep:
    """Replay one recorded step in place."""
    if step.kind == BARREN:
        if step.node not in work:
            raise PlanError(f"BARREN {step.node}: node absent")
        return _delete(work, step.node)
    if step.kind == REVERSE:
        return _reverse(work, step.node, step.other, numeric=numeric)
    if step.node not in work or step.other not in work:
        raise PlanError(f"{step}: node absent")
    return _expect(work, step.node, step.other, numeric=numeric)


__all__ = [
    "TransformStep",
    "aligned",
    "apply_step",
    "expect_out",
    "is_barren",
    "remove_barren",
    "remove_node",
    "reverse_arc",
    "successor_order",
]
