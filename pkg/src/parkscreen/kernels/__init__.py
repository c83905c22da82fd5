"""Kernel backend selection.

The jitted backend is the default. Set ``PARKSCREEN_NO_NUMBA=1`` to force
the pure-numpy fallback; it is also used automatically when numba cannot
be imported. ``benchmarks/kernel_bench.py`` compares the two.
"""

import logging
import os

from . import numpy_backend

log = logging.getLogger(__name__)

_DISABLED = os.environ.get("PARKSCREEN_NO_NUMBA", "").strip() not in ("", "0")

if _DISABLED:
    ops = numpy_backend
else:
    try:
        from . import numba_backend as ops
    except ImportError:  # pragma: no cover - depends on environment
        log.warning("numba unavailable, falling back to numpy kernels")
        ops = numpy_backend


def backend_name() -> str:
    return ops.NAME
