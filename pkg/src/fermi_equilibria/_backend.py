"""Select the kernel implementation at import time.

The compiled extension is preferred.  Setting ``FERMI_EQUILIBRIA_BACKEND`` to
``python`` forces the numpy fallback; ``compiled`` makes a missing extension an
ImportError instead of a silent fallback.
"""

import os

from . import _pykernels

python_kernels = _pykernels

try:
    from . import _kernels as compiled_kernels
except ImportError:
    compiled_kernels = None

_requested = os.environ.get("FERMI_EQUILIBRIA_BACKEND", "auto").lower()
if _requested == "python":
    kernels = _pykernels
elif _requested == "compiled":
    if compiled_kernels is None:
        raise ImportError("FERMI_EQUILIBRIA_BACKEND=compiled but the extension is not built")
    kernels = compiled_kernels
else:
    kernels = compiled_kernels if compiled_kernels is not None else _pykernels

BACKEND = "compiled" if kernels is compiled_kernels else "python"


def get_kernels(name=None):
    """Return a kernel module by name (``"compiled"``/``"python"``) or the active one."""
    if name is None:
        return kernels
    if name == "python":
        return _pykernels
    if name == "compiled":
        if compiled_kernels is None:
            raise ImportError("compiled kernels are not available")
        return compiled_kernels
    raise ValueError(f"unknown backend {name!r}")
