"""Backend selection for the stepping kernel.

The compiled extension is used when it imports; otherwise the numpy twin.
Set ``FORAGESIM_BACKEND=python`` to force the fallback, or ``compiled`` to
make a missing extension an import error.
"""

import os

from . import _kernels_py

_requested = os.environ.get("FORAGESIM_BACKEND", "auto").lower()

compiled_rhs = None
try:
    from ._kernels import explicit_rhs as compiled_rhs
except ImportError:
    if _requested == "compiled":
        raise

python_rhs = _kernels_py.explicit_rhs

if compiled_rhs is not None and _requested != "python":
    BACKEND = "compiled"
    explicit_rhs = compiled_rhs
else:
    BACKEND = "python"
    explicit_rhs = python_rhs


def get_rhs(backend=None):
    """Kernel for ``backend`` ('compiled', 'python'), or the active one."""
    if backend is None:
        return explicit_rhs
    if backend == "python":
        return python_rhs
    if backend == "compiled":
        if compiled_rhs is None:
            raise RuntimeError("compiled kernel is not built")
        return compiled_rhs
    raise ValueError(f"unknown backend {backend!r}")
