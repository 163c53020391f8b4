"""Pick the compiled trial kernel when available.

Set ``TIECONTAGION_PURE_PYTHON=1`` to force the pure-Python kernel.
"""

import os

from . import _pykernel

python_kernel = _pykernel

if os.environ.get("TIECONTAGION_PURE_PYTHON", "") not in ("", "0"):
    compiled_kernel = None
else:
    try:
        from . import _ckernel as compiled_kernel
    except ImportError:
        compiled_kernel = None

kernel = compiled_kernel if compiled_kernel is not None else python_kernel
BACKEND = "cython" if kernel is compiled_kernel else "python"
