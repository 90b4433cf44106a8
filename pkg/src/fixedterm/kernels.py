"""Backend selection for the scalar hot kernels.

The compiled extension is used when importable; setting the environment
variable ``FIXEDTERM_KERNEL=python`` forces the pure-Python fallback.
"""
import os

import numpy as np

from . import _kernels_py

_IMPLS = {"python": _kernels_py}

try:
    from . import _kernels as _kernels_c
except ImportError:  # extension not built
    _kernels_c = None
else:
    _IMPLS["cython"] = _kernels_c


def _select(name: str | None):
    if name:
        if name not in _IMPLS:
            raise ImportError(f"kernel backend {name!r} is not available (have {sorted(_IMPLS)})")
        return name, _IMPLS[name]
    if "cython" in _IMPLS:
        return "cython", _IMPLS["cython"]
    return "python", _kernels_py


BACKEND, impl = _select(os.environ.get("FIXEDTERM_KERNEL", "").strip().lower() or None)


def available_backends() -> list[str]:
    return sorted(_IMPLS)


def get_backend(name: str):
    return _select(name)[1]


def quad_rule(n: int, backend=None):
    """Gauss-Legendre rule in the container the backend iterates fastest."""
    from .xi import gauss_legendre

    x, w = gauss_legendre(n)
    if (backend or impl) is _kernels_py:
        return tuple(x.tolist()), tuple(w.tolist())
    return np.ascontiguousarray(x), np.ascontiguousarray(w)
