"""Two-sample Welch t-test used for the session-time comparisons."""

from __future__ import annotations

import numpy as np
from scipy.stats import t as student_t


def welch_t_test(x, y) -> tuple[float, float]:
    """Two-sided Welch (unequal-variance) t-test.

    Returns ``(t, p)`` with the p-value from a Student-t distribution at the
    Welch-Satterthwaite degrees of freedom.  Requires at least two values per
    sample and nonzero variance in at least one of them.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    nx, ny = len(x), len(y)
    if nx < 2 or ny < 2:
        raise ValueError(f"need >= 2 observations per sample, got {nx} and {ny}")
    vx = x.var(ddof=1) / nx
    vy = y.var(ddof=1) / ny
    denom = vx + vy
    if denom == 0.0:
        raise ValueError("both samples have zero variance")
    t_stat = (x.mean() - y.mean()) / np.sqrt(denom)
    df = denom ** 2 / (
        (vx ** 2 / (nx - 1) if vx > 0 else 0.0)
        + (vy ** 2 / (ny - 1) if vy > 0 else 0.0)
    )
    p = 2.0 * student_t.sf(abs(t_stat), df)
    return float(t_stat), float(min(p, 1.0))
