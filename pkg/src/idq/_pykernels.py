"""Numpy implementations of the table kernels.

Every kernel works on tables already aligned to a shared context axis:

* ``pi_i`` has shape ``(n_ctx, n_i)``: the distribution of the node being
  reversed or summed out, one row per context configuration;
* ``pi_j`` has shape ``(n_ctx, n_i, n_j)``: its successor's distribution,
  one row per (context, state of i).
"""
import numpy as np


def marginalize(pi_i, pi_j):
    """Sum the node out: ``new_j[u, b] = sum_a pi_i[u, a] * pi_j[u, a, b]``."""
    # same arithmetic as the first half of reverse() so both paths agree bitwise
    unnorm = (pi_i[:, :, None] * pi_j).sum(axis=1)
    sums = unnorm.sum(axis=1, keepdims=True)
    return np.divide(unnorm, sums, out=np.zeros_like(unnorm), where=sums > 0)


def reverse(pi_i, pi_j):
    """Bayes step for arc reversal.

    Returns ``(new_j, new_i, zero)`` where ``new_i`` has shape
    ``(n_ctx, n_j, n_i)`` and ``zero`` marks the (context, state of j)
    rows whose denominator vanished; those rows of ``new_i`` are uniform.
    """
    joint = pi_i[:, :, None] * pi_j
    unnorm = joint.sum(axis=1)
    sums = unnorm.sum(axis=1, keepdims=True)
    new_j = np.divide(unnorm, sums, out=np.zeros_like(unnorm), where=sums > 0)
    post = np.swapaxes(joint, 1, 2).copy()
    zero = unnorm == 0.0
    # a zero-mass row can only hold exact zeros, so the sum is the denominator
    denom = post.sum(axis=2, keepdims=True)
    np.divide(post, denom, out=post, where=~zero[:, :, None])
    post[zero] = 1.0 / pi_i.shape[1]
    return new_j, post, zero
