"""Value-distribution curves backing the violin plots.

Gaussian kernel density estimation on a fixed 100-point grid spanning the
selector's value domain. Bandwidth is Silverman's rule with a floor of 0.01
so single-value and zero-variance inputs stay well defined; the curve is
renormalized so its trapezoidal integral over the grid is exactly 1, which
keeps mass piled at a domain boundary (for example many labels at nPMI -1)
from leaking outside the plotted range.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

GRID_POINTS = 100
BANDWIDTH_FLOOR = 0.01


@dataclass
class DensityCurve:
    grid: np.ndarray  # 100 evenly spaced points over the domain
    densities: np.ndarray  # non-negative, trapezoid-integrates to 1 when nonempty
    sample_count: int
    selector_key: str = ""
    run: str = ""


def silverman_bandwidth(values: np.ndarray) -> float:
    n = values.size
    sigma = float(np.std(values))
    q75, q25 = np.percentile(values, [75, 25])
    iqr = float(q75 - q25)
    spread = min(sigma, iqr / 1.34) if iqr > 0 else sigma
    return max(0.9 * spread * n ** (-1 / 5), BANDWIDTH_FLOOR)


def density(
    values,
    domain: tuple[float, float],
    selector_key: str = "",
    run: str = "",
) -> DensityCurve:
    """KDE of the given values over the domain; all-zero when no values."""
    lo, hi = domain
    if lo >= hi:
        raise ValueError(f"empty domain [{lo}, {hi}]")
    grid = np.linspace(lo, hi, GRID_POINTS)
    values = np.asarray(list(values), dtype=np.float64)
    if values.size == 0:
        return DensityCurve(
            grid=grid,
            densities=np.zeros(GRID_POINTS),
            sample_count=0,
            selector_key=selector_key,
            run=run,
        )
    if np.any(values < lo) or np.any(values > hi):
        raise ValueError("values outside the stated domain")
    bandwidth = silverman_bandwidth(values)
    # (grid, samples) kernel matrix; fine at vocabulary scale
    z = (grid[:, None] - values[None, :]) / bandwidth
    kernel = np.exp(-0.5 * z * z)
    densities = kernel.sum(axis=1) / (values.size * bandwidth * np.sqrt(2 * np.pi))
    integral = np.trapezoid(densities, grid)
    if integral > 0:
        densities = densities / integral
    return DensityCurve(
        grid=grid,
        densities=densities,
        sample_count=int(values.size),
        selector_key=selector_key,
        run=run,
    )
