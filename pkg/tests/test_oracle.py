import numpy as np
import pytest

from idq import DiagramError, FunctionTable, InfluenceDiagram, topological_order
from idq.generate import random_diagram
from idq.oracle import build_joint, oracle_conditional, oracle_query

from conftest import pair


def test_single_node():
    d = InfluenceDiagram()
    d.add_node(1, "ab", (), [0.3, 0.7])
    np.testing.assert_array_equal(build_joint(d).probabilities, [0.3, 0.7])


def test_pair_joint():
    # products of the two tables, recomputed by hand
    P = build_joint(pair()).probabilities
    np.testing.assert_allclose(P.ravel(), [0.24, 0.06, 0.07, 0.63], atol=1e-15)


def test_fair_coins():
    d = InfluenceDiagram()
    d.add_node(1, "ht", (), [0.5, 0.5])
    d.add_node(2, "ht", (), [0.5, 0.5])
    np.testing.assert_array_equal(build_joint(d).probabilities, np.full((2, 2), 0.25))


def test_bayes_posterior():
    res = oracle_query(pair(), {1}, {2})
    assert res.table[1, 1] == pytest.approx(63 / 69)
    assert res.table[0, 1] == pytest.approx(7 / 31)


def test_marginal_and_zero_flag():
    d = InfluenceDiagram()
    d.add_node(1, "ab", (), [1.0, 0.0])
    d.add_node(2, "ab", (1,), [[0.3, 0.7], [0.6, 0.4]])
    t = build_joint(d)
    res = oracle_conditional(t, FunctionTable.identity(d, {2}), ())
    np.testing.assert_allclose(res.table, [0.3, 0.7])
    res = oracle_conditional(t, FunctionTable.identity(d, {2}), {1})
    assert res.zero_support == {(1,)}


def test_cap():
    d = random_diagram(np.random.default_rng(0), 6, states=(3,))
    with pytest.raises(DiagramError):
        build_joint(d, cap=100)


def random_topological_order(rng, d):
    left = set(d.ids)
    order = []
    while left:
        ready = sorted(i for i in left if not set(d[i].parents) & left)
        i = int(rng.choice(ready))
        order.append(i)
        left.remove(i)
    return order


def test_joint_order_invariant():
    rng = np.random.default_rng(7)
    for _ in range(20):
        d = random_diagram(rng, 6)
        a = build_joint(d).probabilities
        b = build_joint(d, order=random_topological_order(rng, d)).probabilities
        # products regrouped in floating point may differ in the last ulp
        np.testing.assert_allclose(a, b, rtol=1e-14, atol=0)
        order = topological_order(d)
        assert abs(a.sum() - 1) <= 1e-9
        res = oracle_query(d, {order[-1]}, {order[0]})
        for _, row in res.rows():
            assert abs(row.sum() - 1) <= 1e-9
