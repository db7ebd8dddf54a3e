"""Kernel backend selection.

The hot numeric loops exist twice: numba ``@njit`` versions in
:mod:`clusterboot.kernels.jit` and vectorized pure-numpy fallbacks in
:mod:`clusterboot.kernels.plain`. The active backend is chosen once at
import time from the ``CLUSTERBOOT_BACKEND`` environment variable
(``numba`` or ``numpy``); default is numba when importable, numpy
otherwise. ``benchmarks/bench_kernels.py`` compares the two paths.
"""

import os

from . import plain as _plain

_requested = os.environ.get("CLUSTERBOOT_BACKEND", "").strip().lower()

if _requested not in ("", "numba", "numpy"):
    raise RuntimeError(
        f"CLUSTERBOOT_BACKEND={_requested!r}: expected 'numba' or 'numpy'")

_impl = _plain
if _requested != "numpy":
    try:
        from . import jit as _jit
        _impl = _jit
    except ImportError:
        if _requested == "numba":
            raise

BACKEND = _impl.BACKEND

population_summaries = _impl.population_summaries
estimator_scalars = _impl.estimator_scalars
b1_replicates = _impl.b1_replicates
b2_replicates = _impl.b2_replicates
b3_replicates = _impl.b3_replicates


def backend_name():
    """Name of the active kernel backend ('numba' or 'numpy')."""
    return BACKEND


def get_backend(name):
    """Return a specific backend module by name (for tests and benchmarks)."""
    if name == "numpy":
        return _plain
    if name == "numba":
        from . import jit
        return jit
    raise ValueError(f"unknown backend {name!r}")
