"""Conditional queries ``P{f(x_J) | x_K}`` on influence diagrams.

A query is answered by attaching a deterministic function node (id 0) below
``J``, dropping nodes that are not ancestors of ``J | K``, and then removing
parents of node 0 that lie outside ``K`` until only ``K`` members remain
as its parents. The table of node 0 is then the answer. Everything left in
the diagram at that point is shielded by ``K`` and is never touched, so it
needs no numbers.
"""
from __future__ import annotations

from collections.abc import Callable, Iterable, Sequence
from dataclasses import dataclass, field
from functools import reduce

import numpy as np

from idq.diagram import (
    FUNCTION_NODE,
    InfluenceDiagram,
    Node,
    as_topology,
    configurations,
    topological_order,
    validate,
    weak_predecessors,
)
from idq.errors import (
    CycleError,
    DiagramError,
    IdqError,
    MissingDataError,
    PlanError,
    QueryError,
)
from idq.transforms import (
    BARREN,
    TransformStep,
    _delete,
    _expect,
    _remove_node,
    _successors,
    aligned,
    apply_step,
)

# -- function tables ----------------------------------------------------------


@dataclass(frozen=True, eq=False)
class FunctionTable:
    """Total map from every configuration of ``inputs`` to an output state.

    ``table`` is an integer array shaped like the input cross product whose
    entries index ``output_states``. ``values`` optionally attaches a real
    number to each output state (used for utilities).
    """

    inputs: tuple[int, ...]
    output_states: tuple[str, ...]
    table: np.ndarray
    values: tuple[float, ...] | None = None

    def __post_init__(self):
        t = np.asarray(self.table)
        if t.ndim != len(self.inputs):
            raise QueryError(
                f"function table has {t.ndim} input axes, expected {len(self.inputs)}"
            )
        if t.size and (t.min() < 0 or t.max() >= len(self.output_states)):
            raise QueryError("function table references an unknown output state")
        if len(set(self.inputs)) != len(self.inputs):
            raise QueryError(f"repeated function input in {list(self.inputs)}")
        if self.values is not None and len(self.values) != len(self.output_states):
            raise QueryError("one value per output state required")
        t = np.array(t, dtype=np.int64)
        t.setflags(write=False)
        object.__setattr__(self, "table", t)

    def __eq__(self, other):
        if not isinstance(other, FunctionTable):
            return NotImplemented
        return (
            self.inputs == other.inputs
            and self.output_states == other.output_states
            and self.values == other.values
            and np.array_equal(self.table, other.table)
        )

    @property
    def cards(self):
        return self.table.shape

    @classmethod
    def from_rows(cls, inputs, output_states, rows, cards, values=None):
        """Build from a flat sequence of output states in odometer order over ``inputs``."""
        inputs = tuple(inputs)
        cards = tuple(cards)
        n = int(np.prod(cards, dtype=np.int64))
        rows = list(rows)
        if len(rows) != n:
            raise QueryError(f"function table has {len(rows)} entries, expected {n}")
        index = {s: k for k, s in enumerate(output_states)}
        flat = []
        for r in rows:
            if isinstance(r, (int, np.integer)) and not isinstance(r, bool):
                flat.append(int(r))
            elif r in index:
                flat.append(index[r])
            else:
                raise QueryError(f"function output {r!r} is not an output state")
        return cls(inputs, tuple(output_states), np.array(flat, dtype=np.int64).reshape(cards), values)

    @classmethod
    def from_callable(cls, d: InfluenceDiagram, inputs, fn: Callable, output_states=None):
        """Tabulate ``fn`` called with the state labels of ``inputs``."""
        inputs = tuple(inputs)
        labels = [d[i].states for i in inputs]
        if any(s is None for s in labels):
            raise MissingDataError(inputs[[s is None for s in labels].index(True)], "sample space")
        cards = tuple(len(s) for s in labels)
        outs = [fn(*(labels[k][c] for k, c in enumerate(cfg))) for cfg in configurations(cards)]
        if output_states is None:
            output_states = tuple(dict.fromkeys(str(o) for o in outs))
        return cls.from_rows(inputs, tuple(output_states), [str(o) for o in outs], cards)

    @classmethod
    def identity(cls, d: InfluenceDiagram, J: Iterable[int]):
        """x_0 = x_J itself; output states are the cross product in ascending-id order."""
        inputs = tuple(sorted(J))
        labels = []
        for i in inputs:
            if d[i].states is None:
                raise MissingDataError(i, "sample space")
            labels.append(d[i].states)
        cards = tuple(len(s) for s in labels)
        names = tuple(
            ",".join(labels[k][c] for k, c in enumerate(cfg)) for cfg in configurations(cards)
        )
        table = np.arange(len(names), dtype=np.int64).reshape(cards)
        return cls(inputs, names, table)

    def cpt(self) -> np.ndarray:
        """One-hot table of the function node, shaped ``(*input cards, n_outputs)``."""
        return np.eye(len(self.output_states))[self.table]


@dataclass(frozen=True)
class Query:
    J: frozenset
    K: frozenset = frozenset()
    f: FunctionTable | None = None

    def __init__(self, J, K=(), f=None):
        object.__setattr__(self, "J", frozenset(int(j) for j in J))
        object.__setattr__(self, "K", frozenset(int(k) for k in K))
        object.__setattr__(self, "f", f)
        if not self.J:
            raise QueryError("target set J must be non-empty")
        if f is not None and set(f.inputs) != self.J:
            raise QueryError(f"function inputs {list(f.inputs)} differ from J={sorted(self.J)}")

    def check(self, g):
        topo = as_topology(g)
        if FUNCTION_NODE in topo:
            raise QueryError("diagram already holds a node with the reserved id 0")
        unknown = (self.J | self.K) - topo.keys()
        if unknown:
            raise QueryError(f"unknown node {min(unknown)} in query")

    def function(self, d: InfluenceDiagram) -> FunctionTable:
        f = self.f if self.f is not None else FunctionTable.identity(d, self.J)
        for i, c in zip(f.inputs, f.cards):
            have = d[i].card
            if have is not None and have != c:
                raise QueryError(
                    f"function table axis for node {i} has {c} states, node has {have}"
                )
        return f


# -- results and plans --------------------------------------------------------


@dataclass(eq=False)
class QueryResult:
    """Distribution of x_0 given the members of K that it ended up depending on.

    ``table`` is shaped ``(*parent cards, n_states)`` with ``parents`` in
    ascending id order. ``irrelevant`` lists K members the answer does not
    depend on. Rows in ``zero_support`` are uniform; their context has
    probability zero. ``support_checked`` is False when the data needed to
    detect such contexts was not available.
    """

    parents: tuple[int, ...]
    states: tuple[str, ...]
    table: np.ndarray
    zero_support: frozenset = frozenset()
    irrelevant: tuple[int, ...] = ()
    support_checked: bool = True

    def row(self, assignment) -> np.ndarray:
        """Distribution of x_0 for ``assignment`` (node id -> state index); extra keys ignored."""
        return self.table[tuple(assignment[p] for p in self.parents)]

    def rows(self):
        flat = self.table.reshape(-1, self.table.shape[-1])
        for cfg, r in zip(configurations(self.table.shape[:-1]), flat):
            yield cfg, r

    def allclose(self, other: QueryResult, tol=1e-9) -> bool:
        return (
            self.parents == other.parents
            and self.states == other.states
            and self.table.shape == other.table.shape
            and bool(np.all(np.abs(self.table - other.table) <= tol))
        )


def _fnv1a64(data: bytes) -> int:
    h = 0xCBF29CE484222325
    for b in data:
        h ^= b
        h = (h * 0x100000001B3) & 0xFFFFFFFFFFFFFFFF
    return h


def topology_fingerprint(g) -> str:
    """64-bit FNV-1a over the sorted ``id:parentlist`` strings, joined by newlines."""
    topo = as_topology(g)
    items = sorted(f"{i}:{','.join(str(p) for p in sorted(ps))}" for i, ps in topo.items())
    return f"{_fnv1a64(chr(10).join(items).encode()):016x}"


@dataclass
class Plan:
    fingerprint: str
    steps: list[TransformStep] = field(default_factory=list)
    terminal_parents: tuple[int, ...] | None = field(default=None, compare=False)

    HEADER = "PLAN v1"

    def to_text(self) -> str:
        lines = [f"{self.HEADER} {self.fingerprint}"]
        lines.extend(s.to_line() for s in self.steps)
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> Plan:
        lines = text.split("\n")
        if lines and lines[-1] == "":
            lines.pop()
        if not lines:
            raise PlanError("empty plan")
        head = lines[0].split(" ")
        if len(head) != 3 or " ".join(head[:2]) != cls.HEADER:
            raise PlanError(f"line 1: bad plan header {lines[0]!r}")
        steps = []
        for n, line in enumerate(lines[1:], start=2):
            try:
                steps.append(TransformStep.from_line(line))
            except PlanError as exc:
                raise PlanError(f"line {n}: {exc}") from None
        return cls(head[2], steps)

    def counts(self):
        out = {"barren": 0, "reverse": 0, "expect": 0}
        for s in self.steps:
            out[s.kind] += 1
        return out


# -- the elimination driver ---------------------------------------------------


def _attach(work: InfluenceDiagram, f: FunctionTable | None, J, numeric):
    if numeric:
        work.nodes[FUNCTION_NODE] = Node(
            FUNCTION_NODE, f.inputs, f.output_states, _readonly(f.cpt()), "f"
        )
    else:
        parents = f.inputs if f is not None else tuple(sorted(J))
        states = f.output_states if f is not None else None
        work.nodes[FUNCTION_NODE] = Node(FUNCTION_NODE, parents, states, None, "f")


def _readonly(a):
    a = np.ascontiguousarray(a, dtype=float)
    a.setflags(write=False)
    return a


def attach_function_node(d: InfluenceDiagram, q: Query) -> InfluenceDiagram:
    """Copy of ``d`` with node 0 added below ``J`` carrying the point-mass table of ``f``."""
    q.check(d)
    f = q.function(d)
    work = d.copy()
    _attach(work, f, q.J, numeric=True)
    return work


def _cards_or_two(work, ids):
    # sizes only steer the heuristic; unknown spaces count as binary
    return [work[k].card or 2 for k in ids]


def elimination_weight(work: InfluenceDiagram, i) -> int:
    """Product of state counts over the parents of ``i`` and of its successors."""
    span = set(work[i].parents)
    for s in _successors(work, i):
        span.update(work[s].parents)
    return int(np.prod(_cards_or_two(work, sorted(span)), dtype=np.int64))


def _eliminate(work, i, numeric):
    succ = _successors(work, i)
    if not succ:
        return [_delete(work, i)]
    if len(succ) == 1:
        return [_expect(work, i, next(iter(succ)), numeric=numeric)]
    return _remove_node(work, i, numeric=numeric)


def _sweep_barren(work, K):
    keep = weak_predecessors(work, {FUNCTION_NODE} | set(K))
    return [_delete(work, i) for i in reversed(topological_order(work)) if i not in keep]


def _drive(work, q: Query, f, numeric, order=None):
    """Run the elimination in place; returns the recorded steps."""
    _attach(work, f, q.J, numeric)
    steps = _sweep_barren(work, q.K)
    if order is None:
        while True:
            candidates = set(work[FUNCTION_NODE].parents) - q.K
            if not candidates:
                break
            i = min(candidates, key=lambda k: (elimination_weight(work, k), k))
            steps.extend(_eliminate(work, i, numeric))
    else:
        order = list(order)
        order += sorted(set(work.nodes) - set(order))
        for i in order:
            if i in work and i not in q.K and i != FUNCTION_NODE:
                steps.extend(_eliminate(work, i, numeric))
                steps.extend(_sweep_barren(work, q.K))
    return steps


def _check_diagram(d):
    report = validate(d, require_data=False)
    if report:
        first = report.violations[0]
        if first.kind == "cycle":
            raise CycleError(first.detail)
        raise DiagramError(str(first))


def _factor_over(work, k, axes):
    rest = [a for a in axes if a != k]
    arr = aligned(work, k, rest)
    return np.moveaxis(arr, -1, axes.index(k))


def _support(work, parents):
    """Marginal mass of each configuration of ``parents`` in the current diagram."""
    sub = work.copy()
    sub.remove(FUNCTION_NODE)
    keep = weak_predecessors(sub, parents)
    for i in reversed(topological_order(sub)):
        if i not in keep:
            _delete(sub, i)
    while True:
        rest = set(sub.nodes) - set(parents)
        if not rest:
            break
        i = min(rest, key=lambda k: (elimination_weight(sub, k), k))
        _eliminate(sub, i, True)
    axes = list(parents)
    return reduce(np.multiply, (_factor_over(sub, k, axes) for k in axes))


def _finish(work, q: Query) -> QueryResult:
    node0 = work[FUNCTION_NODE]
    parents = tuple(sorted(node0.parents))
    if not set(parents) <= q.K:
        raise PlanError(f"function node still depends on {sorted(set(parents) - q.K)}")
    table = np.array(aligned(work, FUNCTION_NODE, parents))
    zero = frozenset()
    checked = True
    if parents:
        try:
            mass = _support(work, parents)
        except MissingDataError:
            checked = False
        else:
            zero = frozenset(tuple(int(c) for c in cfg) for cfg in np.argwhere(mass == 0.0))
            for cfg in zero:
                table[cfg] = 1.0 / table.shape[-1]
    table.setflags(write=False)
    irrelevant = tuple(sorted(q.K - set(parents)))
    return QueryResult(parents, node0.states, table, zero, irrelevant, checked)


# -- public entry points ------------------------------------------------------


def solve(d: InfluenceDiagram, q: Query, order: Sequence[int] | None = None):
    """Answer ``P{f(x_J) | x_K}``; returns ``(QueryResult, Plan)``.

    By default nodes are picked greedily among the parents of node 0 that
    are outside ``K``, smallest :func:`elimination_weight` first. Passing
    ``order`` instead removes every node outside ``K`` in that order (ids not
    listed follow in ascending order), sweeping barren nodes as they appear.
    """
    _check_diagram(d)
    q.check(d)
    f = q.function(d)
    work = d.copy()
    steps = _drive(work, q, f, numeric=True, order=order)
    result = _finish(work, q)
    plan = Plan(topology_fingerprint(d), steps, result.parents)
    return result, plan


def plan_only(g, q: Query, order: Sequence[int] | None = None) -> Plan:
    """The step sequence :func:`solve` would take, derived from topology alone.

    ``g`` is a diagram or a mapping ``id -> parents``. State counts steer the
    ordering heuristic when ``g`` is a diagram; otherwise every node counts as
    binary.
    """
    if isinstance(g, InfluenceDiagram):
        topo = g.topology()
        work = InfluenceDiagram(
            Node(i, n.parents, n.states, None, n.name) for i, n in g.nodes.items()
        )
    else:
        topo = as_topology(g)
        work = InfluenceDiagram(Node(i, ps) for i, ps in topo.items())
    missing = {p for ps in topo.values() for p in ps} - topo.keys()
    if missing:
        raise DiagramError(f"unknown parent {min(missing)}")
    topological_order(topo)
    q.check(topo)
    steps = _drive(work, q, q.f, numeric=False, order=order)
    return Plan(topology_fingerprint(topo), steps, tuple(sorted(work[FUNCTION_NODE].parents)))


def execute_plan(d: InfluenceDiagram, p: Plan, q: Query) -> QueryResult:
    """Replay ``p`` on ``d``; raises :class:`PlanError` on any mismatch."""
    _check_diagram(d)
    q.check(d)
    if topology_fingerprint(d) != p.fingerprint:
        raise PlanError(
            f"plan fingerprint {p.fingerprint} does not match diagram {topology_fingerprint(d)}"
        )
    f = q.function(d)
    work = d.copy()
    _attach(work, f, q.J, numeric=True)
    for n, step in enumerate(p.steps, start=1):
        if step.kind == BARREN and (step.node in q.K or step.node == FUNCTION_NODE):
            raise PlanError(f"step {n} ({step}): node is not removable")
        try:
            apply_step(work, step)
        except MissingDataError:
            raise
        except IdqError as exc:
            raise PlanError(f"step {n} ({step}): {exc}") from None
    return _finish(work, q)
