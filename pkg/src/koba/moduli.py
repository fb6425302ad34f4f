"""Calculus of moduli of continuity.

A modulus of continuity is a non-decreasing function ``omega`` on ``[0, eps0)``
with ``omega(0) = 0`` that is continuous at ``0``.  This module provides the
built-in families (Hoelder ``c*t^alpha``, the logarithmic family
``1/|log t|^(1+eps)``, linear, and empirical step moduli estimated from
samples), the Dini integral ``int_0^sigma omega(t)/t dt`` with certified
divergence detection, the cumulative transform ``h(t) = int_0^|t| omega`` with
its inverse, and sub-additivity checks.

Numerical strategy for the Dini integral: substituting ``t = exp(-u)`` turns
the endpoint singularity into an integral of ``omega(exp(-u))`` over
``[u0, oo)``, where the log family decays polynomially and Hoelder moduli
decay exponentially.  The tail is summed over geometrically doubling windows;
each family evaluates ``omega(exp(-u))`` in closed form so the windows can run
far beyond the underflow range of ``exp(-u)`` itself.

All values are immutable after construction and evaluation is pure, so
instances are safe to share across threads.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import (
    EvaluationDomainError,
    InvalidModulusError,
    RangeError,
    ToleranceNotMetError,
)
from .quadrature import adaptive_simpson, cumulative_gauss_table, gauss_panel

__all__ = [
    "Modulus",
    "HoelderModulus",
    "LogFamilyModulus",
    "LinearModulus",
    "EmpiricalModulus",
    "HTransform",
    "DiniResult",
    "SubadditivityReport",
    "dini_integral",
    "h_transform",
    "check_subadditive",
    "empirical_modulus",
    "parse_modulus",
]


class Modulus:
    """Base class: a modulus of continuity on ``[0, radius)``."""

    kind: str = "abstract"
    radius: float = 0.0

    # -- evaluation ---------------------------------------------------------

    def eval(self, t):
        """Evaluate at ``t`` (scalar or array); ``t`` must lie in ``[0, radius)``."""
        arr = np.asarray(t, dtype=float)
        if np.any(arr < 0.0) or np.any(arr >= self.radius):
            raise EvaluationDomainError(
                f"modulus argument outside [0, {self.radius}): {t!r}"
            )
        out = self._value(arr)
        return float(out) if np.isscalar(t) or arr.ndim == 0 else out

    __call__ = eval

    def _value(self, t: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def exp_neg_eval(self, u):
        """Evaluate ``omega(exp(-u))`` for ``u >= -log(radius)``.

        Stays valid far beyond the range where ``exp(-u)`` itself underflows;
        used by the singular Dini quadrature.
        """
        arr = np.asarray(u, dtype=float)
        out = self._exp_neg(arr)
        return float(out) if np.isscalar(u) or arr.ndim == 0 else out

    def _exp_neg(self, u: np.ndarray) -> np.ndarray:
        return self._value(np.exp(-u))

    def exp_neg_breakpoints(self):
        """Breakpoints of ``u -> omega(exp(-u))`` when piecewise constant, else None."""
        return None

    # -- diagnostics --------------------------------------------------------

    def vanishes_at_zero(self, tol: float = 1e-3, depth: int = 50) -> bool:
        """Checkable continuity at 0: does ``omega -> 0`` on a dyadic grid?

        Empirical moduli hold their smallest recorded value below the sampling
        resolution, so they pass only down to that floor.
        """
        ts = self.radius * np.exp2(-np.arange(4, depth, dtype=float))
        return bool(np.min(self._value(ts)) <= tol)

    @property
    def literal(self) -> str:
        return self.kind


@dataclass(frozen=True)
class HoelderModulus(Modulus):
    """``omega(t) = c * t**alpha`` with ``alpha`` in (0, 1], ``c > 0``."""

    alpha: float
    c: float = 1.0
    radius: float = 2.0
    kind: str = field(default="hoelder", init=False)

    def __post_init__(self):
        if not (0.0 < self.alpha <= 1.0):
            raise InvalidModulusError(f"hoelder exponent must be in (0,1]: {self.alpha}")
        if self.c <= 0.0 or self.radius <= 0.0:
            raise InvalidModulusError("hoelder scale and radius must be positive")

    def _value(self, t):
        return self.c * np.power(t, self.alpha)

    def _exp_neg(self, u):
        return self.c * np.exp(-self.alpha * u)

    @property
    def literal(self):
        return f"hoelder:{self.alpha:.17g}:{self.c:.17g}"


@dataclass(frozen=True)
class LogFamilyModulus(Modulus):
    """``omega(t) = 1/|log t|**(1+eps)`` for ``t`` in (0, 1), ``omega(0) = 0``.

    Strictly increasing, continuous at 0, satisfies a Dini condition for every
    ``eps > 0`` yet is not Hoelder continuous for any exponent.
    """

    eps: float
    radius: float = 1.0
    kind: str = field(default="log_family", init=False)

    def __post_init__(self):
        if self.eps <= 0.0:
            raise InvalidModulusError(f"log-family parameter must be positive: {self.eps}")
        if not (0.0 < self.radius <= 1.0):
            raise InvalidModulusError("log-family modulus lives on [0, 1)")

    def _value(self, t):
        t = np.asarray(t, dtype=float)
        with np.errstate(divide="ignore"):
            out = np.where(t > 0.0, np.abs(np.log(np.where(t > 0.0, t, 0.5))) ** (-(1.0 + self.eps)), 0.0)
        return out

    def _exp_neg(self, u):
        return np.power(u, -(1.0 + self.eps))

    @property
    def literal(self):
        return f"log:{self.eps:.17g}"


@dataclass(frozen=True)
class LinearModulus(Modulus):
    """``omega(t) = c * t``."""

    c: float = 1.0
    radius: float = 2.0
    kind: str = field(default="linear", init=False)

    def __post_init__(self):
        if self.c <= 0.0 or self.radius <= 0.0:
            raise InvalidModulusError("linear scale and radius must be positive")

    def _value(self, t):
        return self.c * np.asarray(t, dtype=float)

    def _exp_neg(self, u):
        return self.c * np.exp(-u)

    @property
    def literal(self):
        return f"linear:{self.c:.17g}"


class EmpiricalModulus(Modulus):
    """Step modulus on a grid of ``(t, value)`` nodes.

    Evaluation takes the value of the smallest node at or above the argument
    (so the step is conservative from above), and holds the first node's value
    on ``(0, t_1]``: a finite sample says nothing below its own resolution, so
    the held value is the honest upper estimate there.  A consequence is that
    the Dini integral of an empirical modulus with a positive first value
    diverges, which is exactly what the divergence detector reports.
    """

    kind = "empirical"

    def __init__(self, nodes, values, *, monotonize=False):
        nodes = np.asarray(nodes, dtype=float)
        values = np.asarray(values, dtype=float)
        if nodes.ndim != 1 or nodes.shape != values.shape or len(nodes) == 0:
            raise InvalidModulusError("empirical grid must be one-dimensional and non-empty")
        if np.any(np.diff(nodes) <= 0.0):
            raise InvalidModulusError("empirical grid nodes must be strictly ascending")
        if nodes[0] == 0.0:
            if values[0] != 0.0:
                raise InvalidModulusError("empirical modulus must vanish at t=0")
            nodes, values = nodes[1:], values[1:]
            if len(nodes) == 0:
                raise InvalidModulusError("empirical grid needs at least one positive node")
        if nodes[0] <= 0.0:
            raise InvalidModulusError("empirical grid nodes must be positive")
        if np.any(values < 0.0):
            raise InvalidModulusError("empirical modulus values must be non-negative")
        if monotonize:
            values = np.maximum.accumulate(values)
        elif np.any(np.diff(values) < 0.0):
            raise InvalidModulusError("empirical modulus values must be non-decreasing")
        nodes = np.array(nodes, dtype=float)
        values = np.array(values, dtype=float)
        nodes.setflags(write=False)
        values.setflags(write=False)
        self.nodes = nodes
        self.values = values
        self.radius = float(nodes[-1])

    def _value(self, t):
        t = np.asarray(t, dtype=float)
        idx = np.searchsorted(self.nodes, t, side="left")  # smallest node >= t
        out = self.values[np.minimum(idx, len(self.nodes) - 1)]
        return np.where(t == 0.0, 0.0, out)

    def _exp_neg(self, u):
        u = np.asarray(u, dtype=float)
        # u >= -log(nodes[-1]); beyond -log(nodes[0]) the first value is held.
        breaks = -np.log(self.nodes)  # descending in node index
        idx = len(self.nodes) - np.searchsorted(breaks[::-1], u, side="right")
        idx = np.clip(idx, 0, len(self.nodes) - 1)
        return self.values[idx]

    def exp_neg_breakpoints(self):
        return np.sort(-np.log(self.nodes))

    @classmethod
    def from_grid(cls, pairs, *, monotonize=False):
        """Build from an iterable of ``(t, value)`` pairs (ascending ``t``)."""
        arr = np.asarray(list(pairs), dtype=float)
        if arr.ndim != 2 or arr.shape[1] != 2:
            raise InvalidModulusError("expected (t, value) pairs")
        return cls(arr[:, 0], arr[:, 1], monotonize=monotonize)

    @classmethod
    def from_csv(cls, path):
        """Read a two-column ``t,value`` CSV (header optional, ascending t)."""
        rows = []
        with open(path, newline="") as fh:
            for row in csv.reader(fh):
                if not row:
                    continue
                try:
                    rows.append((float(row[0]), float(row[1])))
                except ValueError:
                    if rows:
                        raise InvalidModulusError(f"bad CSV row in {path}: {row}")
                    # header line
        if not rows:
            raise InvalidModulusError(f"no data rows in {path}")
        return cls.from_grid(rows)

    @property
    def literal(self):
        return f"empirical:{len(self.nodes)}nodes"


# ---------------------------------------------------------------------------
# Dini integral
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DiniResult:
    """Outcome of a Dini integral: a finite value or a divergence verdict."""

    status: str  # "finite" | "diverged"
    value: float | None = None
    windows: int = 0

    @property
    def is_finite(self) -> bool:
        return self.status == "finite"


_RATIO_FLOOR = 1.0 - 1e-3  # windows not decaying faster than this count as divergent
_DIVERGENCE_WINDOWS = 20
_DIVERGENCE_SUM_FACTOR = 1e6
_MAX_WINDOWS = 1000  # u-windows double, so u overflows float range just past this


def _step_integral_u(omega: EmpiricalModulus, u_lo: float, u_hi: float) -> float:
    """Exact integral of ``omega(exp(-u))`` over ``[u_lo, u_hi]`` for step moduli."""
    breaks = omega.exp_neg_breakpoints()
    cuts = np.concatenate(([u_lo], breaks[(breaks > u_lo) & (breaks < u_hi)], [u_hi]))
    mids = 0.5 * (cuts[:-1] + cuts[1:])
    return float(np.dot(omega.exp_neg_eval(mids), np.diff(cuts)))


def dini_integral(omega: Modulus, sigma: float, tol: float = 1e-8) -> DiniResult:
    """Evaluate ``int_0^sigma omega(t)/t dt`` to absolute tolerance ``tol``.

    Returns a finite value, or a ``diverged`` verdict once
    ``_DIVERGENCE_WINDOWS`` successive tail windows each add more than ``tol``
    without decaying (ratio >= ``_RATIO_FLOOR``) and the running total exceeds
    ``_DIVERGENCE_SUM_FACTOR * tol``.  Dini integrals of monotone moduli either
    converge or have non-decaying tails, so the two rules are exhaustive in
    practice; if neither fires within the window budget a
    ``ToleranceNotMetError`` carries the partial sum.
    """
    if not (0.0 < sigma <= omega.radius):
        raise EvaluationDomainError(
            f"sigma must lie in (0, {omega.radius}]: {sigma}"
        )
    if tol <= 0.0:
        raise ValueError(f"tol must be positive: {tol}")

    is_step = isinstance(omega, EmpiricalModulus)
    total = 0.0

    # Split off a proper part so the geometric windows start at u0 >= 1/2.
    t_star = min(sigma, math.exp(-0.5))
    if sigma > t_star:
        if is_step:
            total += _step_integral_u(omega, -math.log(sigma), -math.log(t_star))
        else:
            total += adaptive_simpson(
                lambda t: omega.eval(t) / t, t_star, sigma, 0.25 * tol
            )

    u0 = -math.log(t_star)
    windows_sum = 0.0
    prev = None
    ratios: list[float] = []
    streak = 0
    k = 0
    while k < _MAX_WINDOWS:
        u_lo, u_hi = u0 * 2.0**k, u0 * 2.0 ** (k + 1)
        if is_step:
            ik = _step_integral_u(omega, u_lo, u_hi)
        else:
            # telescoping absolute budget (sums to tol/4) with a relative
            # floor so late tiny windows never demand sub-ulp accuracy
            win_tol = tol / (4.0 * (k + 1) * (k + 2))
            if prev is not None:
                win_tol = max(win_tol, 2.0**-50 * prev)
            ik = adaptive_simpson(omega.exp_neg_eval, u_lo, u_hi, win_tol)
        windows_sum += ik
        if prev is not None:
            ratios.append(ik / prev if prev > 0.0 else 0.0)
            if ik > tol and ik >= _RATIO_FLOOR * prev:
                streak += 1
            else:
                streak = 0
            if (
                streak >= _DIVERGENCE_WINDOWS
                and total + windows_sum > _DIVERGENCE_SUM_FACTOR * tol
            ):
                return DiniResult("diverged", None, windows=k + 1)
            r_hat = max(ratios[-3:])
            if ik == 0.0:
                return DiniResult("finite", total + windows_sum, windows=k + 1)
            if r_hat <= 0.98:
                tail = ik * r_hat / (1.0 - r_hat)
                if tail <= 0.5 * tol:
                    return DiniResult("finite", total + windows_sum + tail, windows=k + 1)
        prev = ik
        k += 1
    raise ToleranceNotMetError(
        f"Dini quadrature undecided after {_MAX_WINDOWS} windows",
        best=total + windows_sum,
    )


# ---------------------------------------------------------------------------
# The cumulative transform h and its inverse
# ---------------------------------------------------------------------------


class HTransform:
    """``h(t) = int_0^|t| omega(y) dy`` on ``(-2r, 2r)``.

    ``h(0) = 0``, ``h`` is strictly increasing on ``[0, 2r)`` and strictly
    decreasing on ``(-2r, 0]``, and ``h(t)/t -> 0`` (the slope vanishes at the
    origin).  Evaluation uses a cached table of Gauss panels whose boundaries
    include the nodes of empirical moduli, so step integrands are integrated
    exactly; the inverse is a bisection against the same evaluation, so the
    round trip ``inverse(eval(t)) = t`` holds to the bisection tolerance.
    """

    def __init__(self, omega: Modulus, r: float, *, panels: int = 480):
        if not (0.0 < 2.0 * r <= omega.radius):
            raise EvaluationDomainError(
                f"need 0 < 2r <= modulus radius ({omega.radius}): r={r}"
            )
        self.omega = omega
        self.r = float(r)
        t_hi = 2.0 * self.r * (1.0 - 1e-12)
        nodes = np.geomspace(2.0 * self.r * 1e-16, t_hi, panels)
        if isinstance(omega, EmpiricalModulus):
            inner = omega.nodes[(omega.nodes > nodes[0]) & (omega.nodes < t_hi)]
            nodes = np.unique(np.concatenate((nodes, inner)))
        self._nodes = np.concatenate(([0.0], nodes))
        self._table = cumulative_gauss_table(self._vec_omega, self._nodes)
        self.max_value = float(self._table[-1])
        self.t_max = float(self._nodes[-1])

    def _vec_omega(self, t):
        return np.asarray(self.omega.eval(t), dtype=float)

    # -- evaluation ---------------------------------------------------------

    def eval(self, t: float) -> float:
        if not (-2.0 * self.r < t < 2.0 * self.r):
            raise EvaluationDomainError(
                f"h-transform argument outside (-{2*self.r}, {2*self.r}): {t}"
            )
        return float(self.eval_many(np.asarray([abs(t)]))[0])

    __call__ = eval

    def eval_many(self, ts: np.ndarray) -> np.ndarray:
        """Vectorized ``h`` on ``|ts| < 2r`` (sign ignored: ``h`` is even)."""
        ts = np.abs(np.asarray(ts, dtype=float))
        if np.any(ts >= 2.0 * self.r):
            raise EvaluationDomainError("h-transform argument outside (-2r, 2r)")
        ts = np.minimum(ts, self.t_max)
        idx = np.searchsorted(self._nodes, ts, side="right") - 1
        idx = np.clip(idx, 0, len(self._nodes) - 2)
        base = self._table[idx]
        lo = self._nodes[idx]
        # partial Gauss panel from the node below each argument
        from .quadrature import _GL_W, _GL_X

        mid = 0.5 * (lo + ts)
        half = 0.5 * (ts - lo)
        pts = mid[:, None] + half[:, None] * _GL_X[None, :]
        vals = self._vec_omega(np.maximum(pts, 0.0))
        return base + half * (vals @ _GL_W)

    def inverse(self, s: float, *, tol: float = 1e-12) -> float:
        """The unique ``t in [0, 2r)`` with ``h(t) = s`` (bisection to ``tol``)."""
        return float(self.inverse_many(np.asarray([s]), tol=tol)[0])

    def inverse_many(self, ss: np.ndarray, *, tol: float = 1e-12) -> np.ndarray:
        ss = np.asarray(ss, dtype=float)
        if np.any(ss < 0.0) or np.any(ss > self.max_value):
            raise RangeError(
                f"h-inverse argument outside [0, {self.max_value:.6g}]"
            )
        lo = np.zeros_like(ss)
        hi = np.full_like(ss, self.t_max)
        steps = max(1, int(math.ceil(math.log2(max(self.t_max / tol, 2.0)))) + 2)
        for _ in range(steps):
            mid = 0.5 * (lo + hi)
            below = self.eval_many(mid) < ss
            lo = np.where(below, mid, lo)
            hi = np.where(below, hi, mid)
        return 0.5 * (lo + hi)

    def slope_ratios(self, count: int = 30) -> np.ndarray:
        """``h(t)/t`` on a dyadic grid; tends to 0, witnessing ``h'(0) = 0``."""
        ts = self.t_max * np.exp2(-np.arange(1, count + 1, dtype=float))
        return self.eval_many(ts) / ts


def h_transform(omega: Modulus, r: float) -> HTransform:
    """Construct the cumulative transform of ``omega`` on ``(-2r, 2r)``."""
    return HTransform(omega, r)


# ---------------------------------------------------------------------------
# Sub-additivity
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SubadditivityReport:
    passed: bool
    worst_pair: tuple[float, float]
    worst_gap: float
    checked: int

    SLACK = 1e-12


def check_subadditive(omega: Modulus, grid: Sequence[tuple[float, float]]) -> SubadditivityReport:
    """Check ``omega(s+t) <= omega(s) + omega(t) + 1e-12`` over the pair grid.

    Reports the worst gap and pair either way; an empty grid is an error.
    """
    pairs = np.asarray(list(grid), dtype=float)
    if pairs.size == 0:
        raise ValueError("sub-additivity grid must be non-empty")
    if pairs.ndim != 2 or pairs.shape[1] != 2:
        raise ValueError("expected (s, t) pairs")
    s, t = pairs[:, 0], pairs[:, 1]
    if np.any(s < 0.0) or np.any(t < 0.0) or np.any(s + t >= omega.radius):
        raise EvaluationDomainError("pairs must satisfy s,t >= 0 and s+t < radius")
    gaps = omega.eval(s + t) - omega.eval(s) - omega.eval(t)
    worst = int(np.argmax(gaps))
    return SubadditivityReport(
        passed=bool(gaps[worst] <= SubadditivityReport.SLACK),
        worst_pair=(float(s[worst]), float(t[worst])),
        worst_gap=float(gaps[worst]),
        checked=len(pairs),
    )


# ---------------------------------------------------------------------------
# Empirical moduli from samples
# ---------------------------------------------------------------------------


def _subadditive_closure(values: np.ndarray) -> np.ndarray:
    """Least-split closure on a uniform index grid: ``v[m] <= v[i] + v[m-i]``.

    Followed by a cumulative max this yields a non-decreasing grid function
    that stays sub-additive under the node-above step evaluation (because
    ``ceil(s+t) <= ceil(s) + ceil(t)``), which is what makes sampled moduli
    honour the sub-additivity of true moduli despite sampling noise.
    """
    v = np.concatenate(([0.0], values)).copy()
    for m in range(2, len(v)):
        splits = v[1:m] + v[m - 1 : 0 : -1]
        best = splits.min()
        if best < v[m]:
            v[m] = best
    return np.maximum.accumulate(v[1:])


def empirical_modulus(
    f: Callable,
    center,
    radius: float,
    budget: int,
    seed: int,
    *,
    grid_size: int = 128,
) -> EmpiricalModulus:
    """Estimate the modulus of continuity of ``f`` on a closed ball by sampling.

    Draws ``budget`` points uniformly from the ball around ``center`` (scalar
    or vector), takes ``max |f(x)-f(y)|`` over all sampled pairs binned by
    distance into a uniform grid on ``(0, 2*radius]``, and post-processes the
    grid (cumulative max + sub-additive closure) so that the result satisfies
    the modulus invariants by construction.  Deterministic for a fixed seed.
    """
    if budget < 2:
        raise ValueError(f"budget must be at least 2: {budget}")
    if radius <= 0.0:
        raise ValueError("radius must be positive")
    c = np.atleast_1d(np.asarray(center, dtype=float))
    d = c.shape[0]
    rng = np.random.default_rng(seed)
    dirs = rng.standard_normal((budget, d))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    radii = radius * rng.random(budget) ** (1.0 / d)
    points = c[None, :] + dirs * radii[:, None]

    scalar_input = d == 1 and np.ndim(center) == 0
    fvals = np.asarray(
        [f(p[0] if scalar_input else p) for p in points], dtype=float
    )
    if not np.all(np.isfinite(fvals)):
        raise ValueError("function returned non-finite values while sampling")

    step = 2.0 * radius / grid_size
    binned = np.zeros(grid_size + 1)
    chunk = max(1, int(2e6) // budget)
    for start in range(0, budget, chunk):
        stop = min(budget, start + chunk)
        diff = points[start:stop, None, :] - points[None, :, :]
        dist = np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))
        gaps = np.abs(fvals[start:stop, None] - fvals[None, :])
        idx = np.ceil(dist / step).astype(int)
        np.clip(idx, 0, grid_size, out=idx)
        np.maximum.at(binned, idx.ravel(), gaps.ravel())
    values = np.maximum.accumulate(binned[1:])
    values = _subadditive_closure(values)
    nodes = step * np.arange(1, grid_size + 1)
    return EmpiricalModulus(nodes, values)


# ---------------------------------------------------------------------------
# Literal syntax
# ---------------------------------------------------------------------------


def parse_modulus(literal: str) -> Modulus:
    """Parse ``hoelder:<alpha>:<c>``, ``log:<eps>``, ``linear:<c>``,
    ``empirical:<path.csv>``."""
    parts = literal.split(":")
    kind = parts[0]
    try:
        if kind == "hoelder" and len(parts) == 3:
            return HoelderModulus(alpha=float(parts[1]), c=float(parts[2]))
        if kind == "log" and len(parts) == 2:
            return LogFamilyModulus(eps=float(parts[1]))
        if kind == "linear" and len(parts) == 2:
            return LinearModulus(c=float(parts[1]))
        if kind == "empirical" and len(parts) == 2:
            return EmpiricalModulus.from_csv(parts[1])
    except (InvalidModulusError, ValueError) as exc:
        raise InvalidModulusError(f"bad modulus literal {literal!r}: {exc}") from exc
    raise InvalidModulusError(f"unknown modulus kind in literal {literal!r}")
