"""Small quadrature kernels used across the library.

Only two primitives are needed: an adaptive Simpson rule with an absolute
tolerance and depth cap, and fixed Gauss-Legendre panels for building
cumulative-integral tables.  Both are deliberately plain so that callers can
control window decomposition and termination themselves.
"""

from __future__ import annotations

import math

import numpy as np

# 16-point Gauss-Legendre nodes/weights on [-1, 1].
_GL_X, _GL_W = np.polynomial.legendre.leggauss(16)


def adaptive_simpson(f, a: float, b: float, tol: float, max_depth: int = 40) -> float:
    """Integrate ``f`` over [a, b] to absolute tolerance ``tol``.

    Classic recursive Simpson with Richardson acceptance; recursion depth is
    capped at ``max_depth`` (the interval is then accepted as-is, which keeps
    the routine total even on discontinuous integrands).
    """
    if a == b:
        return 0.0

    def _simpson(x0, x2, f0, f1, f2):
        return (x2 - x0) * (f0 + 4.0 * f1 + f2) / 6.0

    def _recurse(x0, x2, f0, f1, f2, whole, eps, depth):
        xm = 0.5 * (x0 + x2)
        xl = 0.5 * (x0 + xm)
        xr = 0.5 * (xm + x2)
        fl = f(xl)
        fr = f(xr)
        left = _simpson(x0, xm, f0, fl, f1)
        right = _simpson(xm, x2, f1, fr, f2)
        delta = left + right - whole
        if depth >= max_depth or abs(delta) <= 15.0 * eps:
            return left + right + delta / 15.0
        return (
            _recurse(x0, xm, f0, fl, f1, left, 0.5 * eps, depth + 1)
            + _recurse(xm, x2, f1, fr, f2, right, 0.5 * eps, depth + 1)
        )

    fa, fm, fb = f(a), f(0.5 * (a + b)), f(b)
    whole = _simpson(a, b, fa, fm, fb)
    return _recurse(a, b, fa, fm, fb, whole, tol, 0)


def gauss_panel(f, a: float, b: float) -> float:
    """16-point Gauss-Legendre integral of ``f`` over one panel [a, b].

    ``f`` must accept numpy arrays.
    """
    if a == b:
        return 0.0
    mid = 0.5 * (a + b)
    half = 0.5 * (b - a)
    return float(half * np.dot(_GL_W, f(mid + half * _GL_X)))


def cumulative_gauss_table(f, nodes: np.ndarray) -> np.ndarray:
    """Prefix integrals of ``f`` over consecutive panels given by ``nodes``.

    Returns ``F`` with ``F[k] = integral of f over [nodes[0], nodes[k]]``.
    """
    nodes = np.asarray(nodes, dtype=float)
    panels = np.empty(len(nodes) - 1)
    for k in range(len(nodes) - 1):
        panels[k] = gauss_panel(f, nodes[k], nodes[k + 1])
    out = np.empty(len(nodes))
    out[0] = 0.0
    np.cumsum(panels, out=out[1:])
    return out


def bisect_increasing(g, target: float, lo: float, hi: float, tol: float) -> float:
    """Solve ``g(t) = target`` for increasing ``g`` by bisection to ``|t| <= tol``."""
    glo = g(lo) - target
    if glo > 0.0:
        return lo
    ghi = g(hi) - target
    if ghi < 0.0:
        return hi
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if g(mid) < target:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def geometric_grid(lo: float, hi: float, count: int) -> np.ndarray:
    """Geometric grid from ``lo`` to ``hi`` (both positive)."""
    return np.geomspace(lo, hi, count)


def isclose_below(x: float, bound: float, rel: float = 1e-12) -> bool:
    return x <= bound * (1.0 + rel) + rel * 1e-300


def log2_ceil(x: float) -> int:
    return int(math.ceil(math.log2(x)))
