# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the table kernels in ``idq._pykernels``."""
import numpy as np


def marginalize(const double[:, ::1] pi_i, const double[:, :, ::1] pi_j):
    cdef Py_ssize_t nu = pi_j.shape[0], ni = pi_j.shape[1], nj = pi_j.shape[2]
    cdef Py_ssize_t u, a, b
    cdef double w, s
    out = np.zeros((nu, nj))
    cdef double[:, ::1] new_j = out
    for u in range(nu):
        for a in range(ni):
            w = pi_i[u, a]
            if w == 0.0:
                continue
            for b in range(nj):
                new_j[u, b] += w * pi_j[u, a, b]
        s = 0.0
        for b in range(nj):
            s += new_j[u, b]
        if s > 0.0:
            for b in range(nj):
                new_j[u, b] /= s
    return out


def reverse(const double[:, ::1] pi_i, const double[:, :, ::1] pi_j):
    cdef Py_ssize_t nu = pi_j.shape[0], ni = pi_j.shape[1], nj = pi_j.shape[2]
    cdef Py_ssize_t u, a, b
    cdef double s, d, uniform = 1.0 / ni
    out_j = np.zeros((nu, nj))
    out_i = np.empty((nu, nj, ni))
    out_z = np.zeros((nu, nj), dtype=np.bool_)
    cdef double[:, ::1] new_j = out_j
    cdef double[:, :, ::1] post = out_i
    cdef unsigned char[:, ::1] zero = out_z.view(np.uint8)
    for u in range(nu):
        for b in range(nj):
            d = 0.0
            for a in range(ni):
                post[u, b, a] = pi_i[u, a] * pi_j[u, a, b]
                d += post[u, b, a]
            new_j[u, b] = d
            if d == 0.0:
                zero[u, b] = 1
                for a in range(ni):
                    post[u, b, a] = uniform
            else:
                for a in range(ni):
                    post[u, b, a] /= d
        s = 0.0
        for b in range(nj):
            s += new_j[u, b]
        if s > 0.0:
            for b in range(nj):
                new_j[u, b] /= s
    return out_j, out_i, out_z
