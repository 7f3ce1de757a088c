"""Pick the compiled kernel when available, else the pure-Python one.

Set ``LEARNSIM_PURE_PYTHON=1`` to force the fallback.
"""

import os

from learnsim import _pykernels

if os.environ.get("LEARNSIM_PURE_PYTHON"):
    kernels = _pykernels
else:
    try:
        from learnsim import _kernels as kernels
    except ImportError:
        kernels = _pykernels

BACKEND = "python" if kernels is _pykernels else "cython"
