"""Kernel backend selection.

The two hot paths, the pairwise pattern-overlap scan and the per-step
simulation loop, exist twice: a compiled extension (``_ckernels``) and a
pure-Python fallback (``pure``).  The compiled backend is preferred when its
import succeeds; set ``SCANWAIT_PURE=1`` to force the fallback.  Both
backends return identical results for identical inputs, so the choice only
affects speed (see benchmarks/bench_kernels.py).
"""

from __future__ import annotations

import os

_force_pure = os.environ.get("SCANWAIT_PURE", "").strip() not in ("", "0")

if _force_pure:
    from . import pure as _impl

    BACKEND = "pure"
else:
    try:
        from . import _ckernels as _impl  # type: ignore[attr-defined]

        BACKEND = "compiled"
    except ImportError:
        from . import pure as _impl

        BACKEND = "pure"

overlap_structure = _impl.overlap_structure
simulate_batch = _impl.simulate_batch


def backend() -> str:
    """Name of the active kernel backend: 'compiled' or 'pure'."""
    return BACKEND
