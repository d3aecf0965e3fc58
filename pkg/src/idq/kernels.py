"""Backend selection for the table kernels.

The compiled extension is used when it was built; otherwise the numpy
fallback is. Setting ``IDQ_PURE_PYTHON=1`` forces the fallback at import.
"""
import os

from idq import _pykernels

try:
    from idq import _ckernels
except ImportError:  # extension not built
    _ckernels = None

_BACKENDS = {"python": _pykernels}
if _ckernels is not None:
    _BACKENDS["cython"] = _ckernels

if _ckernels is not None and os.environ.get("IDQ_PURE_PYTHON", "") in ("", "0"):
    backend = "cython"
else:
    backend = "python"

_impl = _BACKENDS[backend]


def available():
    return sorted(_BACKENDS)


def use_backend(name):
    """Switch kernels at runtime; returns the previously active backend name."""
    global backend, _impl
    if name not in _BACKENDS:
        raise ValueError(f"backend {name!r} not available (have {available()})")
    prev = backend
    backend, _impl = name, _BACKENDS[name]
    return prev


def marginalize(pi_i, pi_j):
    return _impl.marginalize(pi_i, pi_j)


def reverse(pi_i, pi_j):
    return _impl.reverse(pi_i, pi_j)
