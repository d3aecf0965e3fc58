"""Influence-diagram representation and the set-to-set graph mappings.

A diagram is a DAG over integer node ids. Each node carries an ordered
tuple of state labels and a dense conditional probability table whose
shape is ``(*parent_cardinalities, own_cardinality)``. Rows are laid out in
odometer order over the parents (last parent varies fastest), which is
exactly numpy's C order after ``table.reshape(-1, own_cardinality)``.

Either the labels or the table of a node may be ``None``. Such partial
diagrams are legal inputs to the topology-only routines and to the query
engine, which raises :class:`MissingDataError` only when it actually needs
the absent data.
"""
from __future__ import annotations

import heapq
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, field, replace
from itertools import product

import numpy as np

from idq.errors import CycleError, DiagramError

ROW_TOL = 1e-9
# rows already this close to 1 are left bit-for-bit alone so that
# load -> dump -> load is a fixed point
_RENORM_SKIP = 1e-12

FUNCTION_NODE = 0


@dataclass(frozen=True)
class Node:
    id: int
    parents: tuple[int, ...] = ()
    states: tuple[str, ...] | None = None
    table: np.ndarray | None = field(default=None, compare=False, repr=False)
    name: str | None = None

    @property
    def card(self) -> int | None:
        if self.states is not None:
            return len(self.states)
        if self.table is not None:
            return self.table.shape[-1]
        return None

    def label(self) -> str:
        return self.name if self.name is not None else f"x{self.id}"


def _freeze(table):
    if table is None:
        return None
    if isinstance(table, np.ndarray) and table.dtype == float and not table.flags.writeable:
        return table
    arr = np.array(table, dtype=float)
    arr.setflags(write=False)
    return arr


class InfluenceDiagram:
    """A mutable-by-replacement collection of :class:`Node` records.

    Tables are frozen numpy arrays, so :meth:`copy` is shallow and cheap
    while still giving value semantics.
    """

    def __init__(self, nodes: Iterable[Node] = ()):
        self.nodes: dict[int, Node] = {}
        for node in nodes:
            self.nodes[node.id] = replace(node, table=_freeze(node.table))

    # construction helpers -------------------------------------------------

    def add_node(self, id, states=None, parents=(), table=None, name=None):
        if id in self.nodes:
            raise DiagramError(f"node {id}: duplicate id")
        parents = tuple(int(p) for p in parents)
        states = None if states is None else tuple(str(s) for s in states)
        self.nodes[id] = Node(int(id), parents, states, _freeze(table), name)
        return self

    def set_node(self, node: Node):
        self.nodes[node.id] = replace(node, table=_freeze(node.table))

    def remove(self, id):
        del self.nodes[id]

    def copy(self) -> InfluenceDiagram:
        out = InfluenceDiagram()
        out.nodes = dict(self.nodes)
        return out

    # accessors -------------------------------------------------------------

    def __contains__(self, id):
        return id in self.nodes

    def __len__(self):
        return len(self.nodes)

    def __getitem__(self, id) -> Node:
        try:
            return self.nodes[id]
        except KeyError:
            raise DiagramError(f"unknown node {id}") from None

    def __eq__(self, other):
        if not isinstance(other, InfluenceDiagram):
            return NotImplemented
        if self.nodes.keys() != other.nodes.keys():
            return False
        for i, a in self.nodes.items():
            b = other.nodes[i]
            if a != b:
                return False
            if (a.table is None) != (b.table is None):
                return False
            if a.table is not None and not np.array_equal(a.table, b.table):
                return False
        return True

    @property
    def ids(self) -> list[int]:
        return sorted(self.nodes)

    @property
    def arcs(self) -> set[tuple[int, int]]:
        return {(k, i) for i, n in self.nodes.items() for k in n.parents}

    def parents(self, i) -> tuple[int, ...]:
        return self[i].parents

    def card(self, i) -> int | None:
        return self[i].card

    def topology(self) -> dict[int, tuple[int, ...]]:
        return {i: n.parents for i, n in self.nodes.items()}

    def __repr__(self):
        body = ", ".join(f"{i}<-{list(n.parents)}" for i, n in sorted(self.nodes.items()))
        return f"InfluenceDiagram({body})"


Topology = Mapping[int, Sequence[int]]


def as_topology(g) -> dict[int, tuple[int, ...]]:
    if isinstance(g, InfluenceDiagram):
        return g.topology()
    return {int(i): tuple(int(p) for p in ps) for i, ps in g.items()}


def _children(topo):
    kids = {i: set() for i in topo}
    for i, ps in topo.items():
        for p in ps:
            if p in kids:
                kids[p].add(i)
    return kids


def _check_ids(topo, J):
    J = set(J)
    unknown = J - topo.keys()
    if unknown:
        raise DiagramError(f"unknown node {min(unknown)}")
    return J


# set-to-set mappings ------------------------------------------------------


def direct_predecessors(g, J) -> set[int]:
    """Union of the parent sets of ``J``."""
    topo = as_topology(g)
    J = _check_ids(topo, J)
    return {p for j in J for p in topo[j]}


def direct_successors(g, J) -> set[int]:
    """Nodes with at least one parent in ``J``."""
    topo = as_topology(g)
    J = _check_ids(topo, J)
    return {i for i, ps in topo.items() if J.intersection(ps)}


def weak_predecessors(g, J) -> set[int]:
    """``J`` together with every node that reaches ``J`` by a directed path."""
    topo = as_topology(g)
    seen = _check_ids(topo, J)
    stack = list(seen)
    while stack:
        for p in topo[stack.pop()]:
            if p not in seen:
                seen.add(p)
                stack.append(p)
    return seen


def weak_successors(g, J) -> set[int]:
    """``J`` together with every node reachable from ``J``."""
    topo = as_topology(g)
    seen = _check_ids(topo, J)
    kids = _children(topo)
    stack = list(seen)
    while stack:
        for c in kids[stack.pop()]:
            if c not in seen:
                seen.add(c)
                stack.append(c)
    return seen


def topological_order(g) -> list[int]:
    """Kahn's algorithm with a min-heap so ties go to the smallest id."""
    topo = as_topology(g)
    kids = _children(topo)
    indeg = {i: sum(1 for p in ps if p in topo) for i, ps in topo.items()}
    heap = [i for i, n in indeg.items() if n == 0]
    heapq.heapify(heap)
    order = []
    while heap:
        i = heapq.heappop(heap)
        order.append(i)
        for c in kids[i]:
            indeg[c] -= 1
            if indeg[c] == 0:
                heapq.heappush(heap, c)
    if len(order) != len(topo):
        stuck = sorted(set(topo) - set(order))
        raise CycleError(f"cycle among nodes {stuck}")
    return order


def other_directed_path_exists(g, i, j) -> bool:
    """True iff ``j`` is reachable from ``i`` by a path of length >= 2."""
    topo = as_topology(g)
    _check_ids(topo, (i, j))
    if i not in topo[j]:
        raise DiagramError(f"arc ({i},{j}) absent")
    kids = _children(topo)
    start = kids[i] - {j}
    seen = set(start)
    stack = list(start)
    while stack:
        k = stack.pop()
        if k == j:
            return True
        for c in kids[k]:
            if c not in seen:
                seen.add(c)
                stack.append(c)
    return False


# validation ----------------------------------------------------------------


@dataclass(frozen=True)
class Violation:
    kind: str
    node: int | None
    detail: str
    magnitude: float = 0.0

    def __str__(self):
        where = "diagram" if self.node is None else f"node {self.node}"
        return f"{where}: {self.kind}: {self.detail}"


@dataclass
class ValidationReport:
    violations: list[Violation] = field(default_factory=list)

    def __bool__(self):
        return bool(self.violations)

    def __iter__(self):
        return iter(self.violations)

    def __len__(self):
        return len(self.violations)

    def kinds(self) -> set[str]:
        return {v.kind for v in self.violations}

    @property
    def ok(self) -> bool:
        return not self.violations


def validate(d: InfluenceDiagram, *, require_data=True) -> ValidationReport:
    """Collect every violated invariant. An empty report means the diagram is valid.

    With ``require_data=False`` absent labels or tables are tolerated.
    """
    out = []
    for i, node in sorted(d.nodes.items()):
        if i == FUNCTION_NODE:
            out.append(Violation("reserved_id", i, "id 0 is reserved for the function node"))
        if i < 0:
            out.append(Violation("bad_id", i, "ids must be non-negative"))
        if i in node.parents:
            out.append(Violation("self_parent", i, "node lists itself as a parent"))
        if len(set(node.parents)) != len(node.parents):
            out.append(Violation("duplicate_parent", i, f"parents {list(node.parents)}"))
        for p in node.parents:
            if p not in d.nodes:
                out.append(Violation("unknown_parent", i, f"parent {p} is not a node"))
        if node.states is None:
            if require_data:
                out.append(Violation("missing_space", i, "no sample space"))
        else:
            if len(node.states) == 0:
                out.append(Violation("empty_space", i, "sample space has no states"))
            if len(set(node.states)) != len(node.states):
                dup = sorted({s for s in node.states if node.states.count(s) > 1})
                out.append(Violation("duplicate_state", i, f"repeated state names {dup}"))
        if node.table is None:
            if require_data:
                out.append(Violation("missing_distribution", i, "no conditional distribution"))
            continue
        out.extend(_table_violations(d, node))
    try:
        topological_order(d)
    except CycleError as exc:
        out.append(Violation("cycle", None, str(exc)))
    return ValidationReport(out)


def _table_violations(d, node):
    out = []
    i = node.id
    cards = []
    for p in node.parents:
        c = d.nodes[p].card if p in d.nodes else None
        cards.append(c)
    own = node.card
    t = node.table
    if None in cards or own is None:
        return out
    expected = (*cards, own)
    if t.shape != expected:
        n_rows = int(np.prod(cards, dtype=np.int64))
        got_rows = int(np.prod(t.shape[:-1], dtype=np.int64)) if t.ndim else 0
        kind = "missing_row" if got_rows < n_rows else "bad_shape"
        out.append(Violation(kind, i, f"table shape {t.shape}, expected {expected}"))
        return out
    if not np.all(np.isfinite(t)):
        out.append(Violation("non_finite", i, "table holds NaN or inf"))
        return out
    if np.any(t < 0) or np.any(t > 1):
        out.append(Violation("out_of_range", i, "entries outside [0, 1]"))
    sums = t.reshape(-1, own).sum(axis=1)
    for r, s in enumerate(sums):
        err = abs(s - 1.0)
        if err > ROW_TOL:
            out.append(Violation("normalization", i, f"row {r} sums to {s:.12g}", err))
    return out


def renormalized(table: np.ndarray) -> np.ndarray:
    """Divide rows by their sums, leaving rows already at 1 untouched."""
    t = np.array(table, dtype=float)
    own = t.shape[-1]
    flat = t.reshape(-1, own)
    sums = flat.sum(axis=1)
    fix = np.abs(sums - 1.0) > _RENORM_SKIP
    flat[fix] /= sums[fix, None]
    return flat.reshape(t.shape)


def configurations(cards: Sequence[int]):
    """Odometer enumeration of a cross product: last position varies fastest."""
    return product(*(range(c) for c in cards))


def require_valid(d: InfluenceDiagram, *, require_data=True):
    report = validate(d, require_data=require_data)
    if report:
        first = report.violations[0]
        if first.kind == "cycle":
            raise CycleError(first.detail)
        raise DiagramError(str(first))
