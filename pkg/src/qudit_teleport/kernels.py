"""Kernel dispatch: the compiled extension when importable, numpy otherwise.

Set ``QT_PURE_PYTHON=1`` to force the numpy path.
"""
import os

import numpy as np

from . import _kernels_py

BACKEND = "python"
_impl = _kernels_py
if os.environ.get("QT_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as _impl  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:
        _impl = _kernels_py


def _resolve(impl):
    if impl is None:
        return _impl
    if isinstance(impl, str):
        try:
            return implementations()[impl]
        except KeyError:
            raise ValueError(f"kernel backend {impl!r} is not available") from None
    return impl


def branch_fidelity_sum(psi, branches, corrections, impl=None):
    impl = _resolve(impl)
    return impl.branch_fidelity_sum(
        np.ascontiguousarray(psi, dtype=np.complex128),
        np.ascontiguousarray(branches, dtype=np.complex128),
        np.ascontiguousarray(corrections, dtype=np.complex128),
    )


def psd_mask(gram, p, tol=1e-10, impl=None):
    impl = _resolve(impl)
    return impl.psd_mask(
        np.ascontiguousarray(gram, dtype=np.complex128),
        np.ascontiguousarray(p, dtype=np.float64),
        float(tol),
    )


def implementations():
    """Available backends by name, for benchmarking and cross-checks."""
    out = {"python": _kernels_py}
    try:
        from . import _kernels

        out["cython"] = _kernels
    except ImportError:
        pass
    return out
