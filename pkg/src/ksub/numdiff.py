"""Central finite differences with one level of Richardson extrapolation.

These helpers back every numerical oracle in the package. Closed-form paths
never use them; the point is an independent derivative whose only input is
function values.
"""

from __future__ import annotations

__all__ = ["d1", "d2", "partial1", "partial2", "mixed2"]


def d1(f, x: float, h: float, richardson: bool = True) -> float:
    """First derivative of a scalar function of one variable at ``x``."""
    def stencil(step):
        return (f(x + step) - f(x - step)) / (2.0 * step)

    coarse = stencil(h)
    if not richardson:
        return coarse
    fine = stencil(0.5 * h)
    return (4.0 * fine - coarse) / 3.0


def d2(f, x: float, h: float, richardson: bool = True) -> float:
    """Second derivative of a scalar function of one variable at ``x``."""
    center = f(x)

    def stencil(step):
        return (f(x + step) - 2.0 * center + f(x - step)) / (step * step)

    coarse = stencil(h)
    if not richardson:
        return coarse
    fine = stencil(0.5 * h)
    return (4.0 * fine - coarse) / 3.0


def _shift(p, i, step):
    q = list(p)
    q[i] += step
    return q


def partial1(f, p, i: int, h: float, richardson: bool = True) -> float:
    """``df/dp_i`` for a function of a point (sequence of floats)."""
    return d1(lambda t: f(_shift(p, i, t - p[i])), p[i], h, richardson)


def partial2(f, p, i: int, h: float, richardson: bool = True) -> float:
    """``d2f/dp_i^2`` for a function of a point."""
    return d2(lambda t: f(_shift(p, i, t - p[i])), p[i], h, richardson)


def mixed2(f, p, i: int, j: int, h: float, richardson: bool = True) -> float:
    """``d2f/dp_i dp_j`` (i != j) by the 4-point cross stencil."""
    def stencil(step):
        pp = f(_shift(_shift(p, i, step), j, step))
        pm = f(_shift(_shift(p, i, step), j, -step))
        mp = f(_shift(_shift(p, i, -step), j, step))
        mm = f(_shift(_shift(p, i, -step), j, -step))
        return (pp - pm - mp + mm) / (4.0 * step * step)

    coarse = stencil(h)
    if not richardson:
        return coarse
    fine = stencil(0.5 * h)
    return (4.0 * fine - coarse) / 3.0
