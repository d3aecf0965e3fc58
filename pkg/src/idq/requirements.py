"""What a query needs, read off the graph alone.

These routines never look at tables or state labels. Because the graph can
hide conditional independence that the numbers would reveal, the sets they
return are upper bounds on what is truly needed.
"""
from __future__ import annotations

import random
from dataclasses import dataclass

from idq.diagram import (
    as_topology,
    direct_predecessors,
    direct_successors,
    weak_predecessors,
)
from idq.errors import DiagramError


@dataclass(frozen=True)
class RequirementReport:
    removal_set: frozenset
    needs_distribution: frozenset
    needs_space_only: frozenset
    ignorable: frozenset
    irrelevant_conditioning: frozenset

    def as_dict(self):
        return {k: sorted(getattr(self, k)) for k in self.__dataclass_fields__}


@dataclass(frozen=True)
class MaximalReport:
    missing: frozenset
    achievable_conditioning: frozenset
    removal_set: frozenset
    ignorable: frozenset
    complete: bool

    def as_dict(self):
        out = {k: sorted(getattr(self, k)) for k in ("missing", "achievable_conditioning", "removal_set", "ignorable")}
        out["complete"] = self.complete
        return out


def _check(topo, *sets):
    for s in sets:
        unknown = set(s) - topo.keys()
        if unknown:
            raise DiagramError(f"unknown node {min(unknown)}")


def _closure(topo, J, K, stop, rng=None):
    """Grow R from the empty set: add any j in W(J|K) minus (stop | R) adjacent to the frontier.

    A node qualifies when it is in J, a parent or child of R, or a parent of a
    K member that is a child of R. ``rng`` picks among qualifying nodes at
    random; the fixpoint does not depend on the choice.
    """
    J, K = set(J), set(K)
    pool = weak_predecessors(topo, J | K) - set(stop)
    R = set()
    while True:
        kids = direct_successors(topo, R)
        frontier = J | direct_predecessors(topo, R) | kids | direct_predecessors(topo, K & kids)
        ready = (pool - R) & frontier
        if not ready:
            return frozenset(R)
        if rng is None:
            R |= ready
        else:
            R.add(rng.choice(sorted(ready)))


def removal_set(g, J, K=(), rng: random.Random | None = None) -> frozenset:
    """Nodes that must be removed to answer ``P{f(x_J) | x_K}``."""
    topo = as_topology(g)
    _check(topo, J, K)
    return _closure(topo, J, K, stop=K, rng=rng)


def requirements(g, J, K=()) -> RequirementReport:
    topo = as_topology(g)
    _check(topo, J, K)
    J, K = set(J), set(K)
    R = _closure(topo, J, K, stop=K)
    n_pi = set(R) | (K & direct_successors(topo, R))
    # J & K members are parents of the function node, so they need a space too
    n_omega = (direct_predecessors(topo, n_pi) | J) - n_pi
    ignorable = set(topo) - R - K
    irrelevant = K - direct_predecessors(topo, n_pi) - J
    return RequirementReport(
        frozenset(R), frozenset(n_pi), frozenset(n_omega), frozenset(ignorable), frozenset(irrelevant)
    )


def achievable_conditioning(g, J, K, L) -> frozenset:
    """The largest conditioning set reachable without tables for ``L``."""
    topo = as_topology(g)
    _check(topo, J, K, L)
    L = set(L)
    return frozenset(weak_predecessors(topo, set(J) | set(K)) & (set(K) | L | direct_predecessors(topo, L)))


def maximal(g, J, K, L, rng: random.Random | None = None) -> MaximalReport:
    """Maximal processing when the tables of ``L`` are unavailable."""
    topo = as_topology(g)
    _check(topo, J, K, L)
    M = achievable_conditioning(topo, J, K, L)
    R = _closure(topo, J, K, stop=M, rng=rng)
    full = requirements(topo, J, K)
    complete = not (set(L) & full.needs_distribution)
    ignorable = frozenset(set(topo) - R - M)
    return MaximalReport(frozenset(L), M, R, ignorable, complete)
