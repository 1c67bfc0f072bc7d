"""Backend selection for the likelihood kernels.

The compiled extension is used when it was built; otherwise the NumPy
fallback. :func:`use_backend` switches explicitly (tests and benchmarks).
"""
import numpy as np

from . import _likelihood_py

try:
    from . import _likelihood as _compiled
except ImportError:  # extension not built
    _compiled = None

_BACKENDS = {"python": _likelihood_py}
if _compiled is not None:
    _BACKENDS["compiled"] = _compiled

_active = _BACKENDS.get("compiled", _likelihood_py)


def available() -> list[str]:
    return sorted(_BACKENDS)


def backend() -> str:
    return "compiled" if _active is _compiled and _compiled is not None else "python"


def use_backend(name: str) -> str:
    """Select ``"compiled"`` or ``"python"``; returns the previous backend name."""
    global _active
    if name not in _BACKENDS:
        raise ValueError(f"backend {name!r} unavailable; have {available()}")
    prev = backend()
    _active = _BACKENDS[name]
    return prev


def loglik_grad(T, V, n):
    return _active.loglik_grad(
        np.ascontiguousarray(T, dtype=complex),
        np.ascontiguousarray(V, dtype=complex),
        np.ascontiguousarray(n, dtype=float),
    )


def projector_probs(rho, V):
    return _active.projector_probs(
        np.ascontiguousarray(rho, dtype=complex), np.ascontiguousarray(V, dtype=complex)
    )
