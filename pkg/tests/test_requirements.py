import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from idq import (
    InfluenceDiagram,
    MissingDataError,
    Query,
    maximal,
    removal_set,
    requirements,
    solve,
    weak_predecessors,
)
from idq.generate import random_diagram, random_query
from idq.oracle import matches, oracle_query

from conftest import CHAIN


def strip(d, keep_tables, keep_spaces):
    out = InfluenceDiagram()
    for i, n in d.nodes.items():
        out.add_node(
            i,
            n.states if i in keep_spaces else None,
            n.parents,
            n.table if i in keep_tables else None,
        )
    return out


def test_removal_set_examples():
    assert removal_set(CHAIN, {1}, {3}) == {1, 2}
    assert removal_set(CHAIN, {2}, {2}) == set()
    assert removal_set(CHAIN, {3}, ()) == {1, 2, 3}


def test_requirements_chain():
    rep = requirements(CHAIN, {1}, {3})
    assert rep.needs_distribution == {1, 2, 3}
    assert rep.needs_space_only == set()
    assert rep.ignorable == set()
    rep = requirements(CHAIN, {3}, ())
    assert rep.needs_distribution == {1, 2, 3} and rep.needs_space_only == set()


def test_requirements_independent_pair():
    rep = requirements({1: (), 2: ()}, {1}, {2})
    assert rep.removal_set == {1}
    assert rep.needs_distribution == {1}
    assert rep.needs_space_only == set()
    assert rep.ignorable == set()
    assert rep.irrelevant_conditioning == {2}


def test_shielded_ancestor_ignored():
    # 1 -> 2 -> 3 with K = {2}: node 1 is hidden behind 2
    rep = requirements(CHAIN, {3}, {2})
    assert rep.removal_set == {3}
    assert rep.needs_distribution == {3}
    assert rep.needs_space_only == {2}
    assert rep.ignorable == {1}


def test_target_in_conditioning_needs_space():
    rep = requirements(CHAIN, {2}, {2})
    assert rep.needs_distribution == set()
    assert rep.needs_space_only == {2}


def test_maximal_examples():
    rep = maximal(CHAIN, {3}, (), {1})
    assert rep.achievable_conditioning == {1}
    assert rep.removal_set == {2, 3}
    assert not rep.complete
    assert maximal(CHAIN, {3}, (), ()).complete
    rep = maximal({1: (), 2: (1,), 3: (2,), 4: (3,)}, {2}, (), {4})
    assert rep.complete and rep.achievable_conditioning == set()


seeds = st.integers(0, 2**32 - 1)


def _case(seed, n_max=7):
    rng = np.random.default_rng(seed)
    d = random_diagram(rng, int(rng.integers(2, n_max + 1)))
    return rng, d, random_query(rng, d)


@settings(max_examples=80, deadline=None)
@given(seeds)
def test_fixpoint_order_invariance(seed):
    rng, d, q = _case(seed)
    g = d.topology()
    ref = removal_set(g, q.J, q.K)
    for k in range(10):
        assert removal_set(g, q.J, q.K, rng=random.Random(k)) == ref
    assert removal_set(g, q.J, ()) == weak_predecessors(g, q.J)


@settings(max_examples=60, deadline=None)
@given(seeds)
def test_report_invariants(seed):
    _, d, q = _case(seed)
    rep = requirements(d.topology(), q.J, q.K)
    assert rep.removal_set <= rep.needs_distribution
    assert not rep.needs_space_only & rep.needs_distribution
    assert not rep.ignorable & (rep.removal_set | q.K)


@settings(max_examples=60, deadline=None)
@given(seeds)
def test_solve_removes_exactly_the_removal_set(seed):
    _, d, q = _case(seed)
    _, plan = solve(d, q)
    touched = {s.node for s in plan.steps if s.kind != "barren"}
    deleted_after_reversal = {
        s.node for n, s in enumerate(plan.steps)
        if s.kind == "barren" and any(t.kind == "reverse" and t.node == s.node for t in plan.steps[:n])
    }
    assert touched | deleted_after_reversal == requirements(d.topology(), q.J, q.K).removal_set


@settings(max_examples=60, deadline=None)
@given(seeds)
def test_stripping(seed):
    rng, d, q = _case(seed)
    rep = requirements(d.topology(), q.J, q.K)
    lean = strip(d, rep.needs_distribution, rep.needs_distribution | rep.needs_space_only)
    full, _ = solve(d, q)
    got, _ = solve(lean, q)
    assert got.allclose(full)
    for i in rep.needs_distribution:
        holed = strip(d, rep.needs_distribution - {i}, d.ids)
        with pytest.raises(MissingDataError):
            solve(holed, q)


@settings(max_examples=60, deadline=None)
@given(seeds)
def test_maximal_processing(seed):
    rng, d, q = _case(seed)
    L = {int(i) for i in rng.choice(d.ids, size=int(rng.integers(1, len(d))), replace=False)}
    rep = maximal(d.topology(), q.J, q.K, L)
    assert rep.achievable_conditioning <= weak_predecessors(d, q.J | q.K)
    lean = strip(d, set(d.ids) - L, d.ids)
    res, _ = solve(lean, Query(q.J, rep.achievable_conditioning, q.f))
    assert matches(res, oracle_query(d, q.J, rep.achievable_conditioning, q.f)) == []
    if rep.complete:
        res, _ = solve(lean, q)
        assert matches(res, oracle_query(d, q.J, q.K, q.f)) == []
