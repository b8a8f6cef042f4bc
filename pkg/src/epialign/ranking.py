"""Average ranks and the rank correlation built on them.

Correlation is computed as the Pearson coefficient of average ranks, which
handles ties exactly; the textbook 1 - 6*sum(d^2)/(n(n^2-1)) shortcut is
only valid tie-free and is used solely as a test oracle.
"""
from __future__ import annotations

from typing import Sequence

import numpy as np


def rank_average(values: Sequence[float] | np.ndarray) -> np.ndarray:
    """1-based ranks; tied values share the mean of the positions they occupy."""
    v = np.asarray(values, dtype=np.float64)
    if v.ndim != 1 or v.size == 0:
        raise ValueError("expected a nonempty 1-d vector")
    if not np.all(np.isfinite(v)):
        raise ValueError("ranks are undefined for non-finite values")
    order = np.argsort(v, kind="stable")
    ranks = np.empty(v.size, dtype=np.float64)
    i = 0
    while i < v.size:
        j = i
        while j + 1 < v.size and v[order[j + 1]] == v[order[i]]:
            j += 1
        ranks[order[i : j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    return ranks


def spearman(a: Sequence[float] | np.ndarray, b: Sequence[float] | np.ndarray) -> float | None:
    """Rank correlation of two equal-length vectors.

    Returns None (never NaN) when either vector is fully tied, which leaves
    the correlation undefined.
    """
    av = np.asarray(a, dtype=np.float64)
    bv = np.asarray(b, dtype=np.float64)
    if av.shape != bv.shape:
        raise ValueError(f"length mismatch: {av.shape} vs {bv.shape}")
    if av.ndim != 1 or av.size < 2:
        raise ValueError("need at least two paired observations")
    ra = rank_average(av) - (av.size + 1) / 2.0
    rb = rank_average(bv) - (bv.size + 1) / 2.0
    na2 = float(ra @ ra)
    nb2 = float(rb @ rb)
    if na2 == 0.0 or nb2 == 0.0:
        return None
    # one sqrt of the product keeps spearman(a, a) == 1.0 exact
    return float((ra @ rb) / np.sqrt(na2 * nb2))
