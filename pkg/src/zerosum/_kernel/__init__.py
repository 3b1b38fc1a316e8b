"""Kernel backend selection.

Imports the compiled Cython kernels when the extension was built, otherwise
falls back to the pure-Python reference implementation.  Set
``ZEROSUM_PURE_KERNEL=1`` to force the fallback (useful for benchmarking and
parity debugging).
"""

from __future__ import annotations

import os

from . import _pure

if os.environ.get("ZEROSUM_PURE_KERNEL"):
    backend = _pure
else:
    try:
        from . import _ckernel as backend  # type: ignore[no-redef]
    except ImportError:
        backend = _pure

BACKEND = backend.BACKEND

zs_fixed_has = backend.zs_fixed_has
zs_any_has = backend.zs_any_has
extremal_subtree = backend.extremal_subtree
d0_subtree = backend.d0_subtree
cap_subtree = backend.cap_subtree

# witness reconstruction always runs on the reference backend
zs_fixed_stages = _pure.zs_fixed_stages


def get_backend(name: str):
    """Return a kernel module by name ('pure' or 'compiled'); for benchmarks."""
    if name == "pure":
        return _pure
    if name == "compiled":
        from . import _ckernel

        return _ckernel
    raise ValueError(f"unknown kernel backend {name!r}")
