"""Backend selection for the ODE kernel.

The compiled Cython kernel is used when it imported cleanly; otherwise the
pure-numpy reference implementation takes over.  Set DISKFLOW_BACKEND=pure or
DISKFLOW_BACKEND=native to force a choice (forcing native raises if the
extension is missing, rather than silently falling back).
"""

import os

from . import pure

_requested = os.environ.get("DISKFLOW_BACKEND", "").strip().lower()

if _requested == "pure":
    BACKEND = "pure"
    integrate_batch = pure.integrate_batch
elif _requested == "native":
    from . import _native

    BACKEND = "native"
    integrate_batch = _native.integrate_batch
elif _requested == "":
    try:
        from . import _native
    except ImportError:
        BACKEND = "pure"
        integrate_batch = pure.integrate_batch
    else:
        BACKEND = "native"
        integrate_batch = _native.integrate_batch
else:
    raise ImportError(
        f"DISKFLOW_BACKEND={_requested!r} not recognized (use 'pure' or 'native')"
    )

__all__ = ["BACKEND", "integrate_batch", "pure"]
