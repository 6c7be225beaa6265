"""Pick the kernel implementation at import time.

The compiled extension is used when it imports; ``DKASTAR_BACKEND=python``
forces the numpy fallback.
"""

import os

from . import _fallback

try:
    from . import _kernels as _compiled
except ImportError:
    _compiled = None

_AVAILABLE = {"python": _fallback}
if _compiled is not None:
    _AVAILABLE["cython"] = _compiled


def available() -> list[str]:
    return sorted(_AVAILABLE)


def get(name: str | None = None):
    """Kernel module by name; ``None`` means the process default."""
    if name is None:
        return kernels
    try:
        return _AVAILABLE[name]
    except KeyError:
        raise ValueError(f"backend {name!r} unavailable; have {available()}") from None


_requested = os.environ.get("DKASTAR_BACKEND", "").strip().lower()
if _requested:
    kernels = get(_requested)
else:
    kernels = _compiled if _compiled is not None else _fallback

BACKEND = kernels.NAME
