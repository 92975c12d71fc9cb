"""Hot propagation kernels with a compiled core and a numpy fallback.

The compiled extension ``_ckernels`` is used when it imports; otherwise the
pure-numpy module is used. Set ``QSPEED_BACKEND=python`` to force the
fallback (``QSPEED_BACKEND=compiled`` makes a missing extension an error).
"""

from __future__ import annotations

import os

from . import _fallback

try:
    from . import _ckernels
except ImportError:  # extension not built
    _ckernels = None

_choice = os.environ.get("QSPEED_BACKEND", "auto").lower()
if _choice == "compiled" and _ckernels is None:
    raise ImportError("QSPEED_BACKEND=compiled but qspeed._kernels._ckernels is not built")

if _choice == "python" or _ckernels is None:
    backend = _fallback
    BACKEND_NAME = "python"
else:
    backend = _ckernels
    BACKEND_NAME = "compiled"

BACKENDS = {"python": _fallback}
if _ckernels is not None:
    BACKENDS["compiled"] = _ckernels

propagate = backend.propagate
propagate_with_gradient = backend.propagate_with_gradient

__all__ = ["BACKENDS", "BACKEND_NAME", "propagate", "propagate_with_gradient"]
