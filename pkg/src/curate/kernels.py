"""Backend selection for the hot kernels.

The compiled extension is used when present; otherwise the NumPy fallback.
Set CURATE_PURE_PYTHON=1 to force the fallback (useful for benchmarking and
for debugging backend discrepancies).
"""

from __future__ import annotations

import os

from . import _fallback

if os.environ.get("CURATE_PURE_PYTHON") == "1":
    _impl = _fallback
else:
    try:
        from . import _native as _impl  # type: ignore[no-redef]
    except ImportError:
        _impl = _fallback

BACKEND: str = _impl.BACKEND

cosine_pairs = _impl.cosine_pairs
assign_nearest = _impl.assign_nearest
centroid_sums = _impl.centroid_sums
min_sq_dist_update = _impl.min_sq_dist_update
logistic_epoch = _impl.logistic_epoch
