"""Adaptive quadrature wrapper shared by the distribution kernels."""

from scipy import integrate as _integrate

_EPSABS = 1e-12
_EPSREL = 1e-10
_LIMIT = 300
_MAX_POINTS = 40

# Infinite supports are cut at quantile(1 - TAIL_PROB); callers add an exact
# tail term where one is available.
TAIL_PROB = 1e-10


def integrate(fn, lo: float, hi: float, points=()) -> float:
    """Integrate ``fn`` over [lo, hi], splitting panels at interior points."""
    if hi <= lo:
        return 0.0
    pts = sorted({float(p) for p in points if lo < p < hi})
    if len(pts) > _MAX_POINTS:
        step = len(pts) / _MAX_POINTS
        pts = [pts[int(i * step)] for i in range(_MAX_POINTS)]
    value, _err = _integrate.quad(
        fn, lo, hi, points=pts or None, limit=_LIMIT, epsabs=_EPSABS, epsrel=_EPSREL
    )
    return value
