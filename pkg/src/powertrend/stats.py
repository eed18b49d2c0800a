"""Simple least-squares regression for ranking indicators against P&L."""
from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .errors import DegenerateError


@dataclass(frozen=True)
class RegressionResult:
    slope: float
    intercept: float
    r_squared: float
    n: int
    dropped: int = 0

    def to_dict(self) -> dict:
        return asdict(self)


def ols(x, y) -> RegressionResult:
    """Fit ``y = slope * x + intercept``; R² is the squared Pearson correlation.

    Pairs where either value is NaN are dropped first and counted in
    ``dropped``. Zero variance in either variable raises DegenerateError.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("x and y must be 1-d and of equal length")
    keep = ~(np.isnan(x) | np.isnan(y))
    dropped = int((~keep).sum())
    x, y = x[keep], y[keep]
    n = x.shape[0]
    if n < 2:
        raise DegenerateError(f"need at least 2 points, got {n}")
    dx = x - x.mean()
    dy = y - y.mean()
    sxx = float(dx @ dx)
    syy = float(dy @ dy)
    if sxx == 0:
        raise DegenerateError("x has zero variance")
    if syy == 0:
        raise DegenerateError("y has zero variance")
    sxy = float(dx @ dy)
    slope = sxy / sxx
    intercept = float(y.mean() - slope * x.mean())
    r2 = min(1.0, max(0.0, sxy * sxy / (sxx * syy)))
    return RegressionResult(slope, intercept, r2, n, dropped)
