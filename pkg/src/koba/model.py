"""Planar model domains and their embedding into convex domains.

The model attached to a modulus ``omega`` and parameters ``alpha >= 1``,
``tau > 0`` is the planar set

    { s + i t  :  |t| < tau,  alpha * h(t) < s < tau }

where ``h`` is the cumulative transform of ``omega``.  Its defining role: the
affine map ``zeta -> xi + zeta * eta`` along the unit inward normal ``eta`` at
a boundary point ``xi`` sends the whole model into the ambient domain once
``alpha`` beats the reciprocal gradient bound (``2/alpha <= m/4``) and ``tau``
is small enough that the gradient oscillates by at most ``m/2`` across the
model (``sqrt(2) tau < delta_0``) and ``x / h^{-1}(x) <= 1/alpha`` on
``(0, tau)``.  ``select_parameters`` finds such parameters by sampling;
``verify_embedding`` checks the containment directly on a grid that
concentrates near the cusp, where the estimate is tightest.

``boundary_geometry`` exposes the tangent angle ``atan(alpha * omega(|y|))``
and arc length of the model boundary near 0 together with the batch check
that the angle, as a function of arc length, is dominated by
``alpha * omega``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .domains import BoundaryPoint, ConvexDomain, boundary_samples, to_real
from .errors import (
    CertificateFailureError,
    DegenerateDefiningFunctionError,
    EmbeddingViolationError,
    EvaluationDomainError,
    RangeError,
)
from .moduli import HTransform, Modulus

__all__ = [
    "ModelDomain",
    "ParameterCertificate",
    "model_membership",
    "select_parameters",
    "model_from_certificate",
    "verify_embedding",
    "embedding_margin_bound",
    "boundary_geometry",
    "tangent_angle_check",
    "TangentAngleReport",
]

DEFAULT_GRID = (32, 65)
MARGIN_TOLERANCE_FACTOR = 0.05  # acceptance slack on the -m/4 contract


class ModelDomain:
    """The planar domain ``{s + it : |t| < tau, alpha h(t) < s < tau}``."""

    def __init__(self, omega: Modulus, alpha: float, tau: float):
        if alpha < 1.0:
            raise EvaluationDomainError(f"alpha must be at least 1: {alpha}")
        if not (0.0 < tau < omega.radius):
            raise EvaluationDomainError(
                f"tau must lie in (0, modulus radius {omega.radius}): {tau}"
            )
        self.omega = omega
        self.alpha = float(alpha)
        self.tau = float(tau)
        self.h = HTransform(omega, omega.radius / 2.0)

    def contains(self, zeta: complex) -> bool:
        s, t = float(np.real(zeta)), float(np.imag(zeta))
        if not (abs(t) < self.tau and s < self.tau):
            return False
        return self.alpha * self.h.eval(t) < s

    def t_bound(self, s) -> np.ndarray:
        """``h^{-1}(s / alpha)``: members with real part ``s`` have ``|t|`` below it.

        Saturates at the edge of the transform's table when ``s/alpha``
        exceeds the attainable range of ``h`` (mismatched pairings).
        """
        s = np.atleast_1d(np.asarray(s, dtype=float))
        capped = np.minimum(s / self.alpha, self.h.max_value)
        return self.h.inverse_many(capped)

    def __repr__(self):
        return f"ModelDomain({self.omega.literal}, alpha={self.alpha:g}, tau={self.tau:g})"


def model_membership(model: ModelDomain, zeta: complex) -> bool:
    """Pointwise membership test for the planar model."""
    return model.contains(zeta)


@dataclass(frozen=True)
class ParameterCertificate:
    """Evidence that ``(alpha, tau)`` fit a domain/modulus pair.

    ``m`` is the deflated sampled gradient lower bound, ``delta0`` the sampled
    uniform-continuity radius of the gradient (oscillation at most ``m/2``),
    and the invariants ``2/alpha <= m/4``, ``sqrt(2) tau < delta0`` and
    ``x/h^{-1}(x) <= 1/alpha`` on a dense grid in ``(0, tau)`` all hold at
    construction time.
    """

    m: float
    delta0: float
    alpha: float
    tau: float
    boundary_count: int
    pairs_per_radius: int
    ratio_grid_size: int
    seed: int

    def margin_bound(self) -> float:
        return -self.m / 4.0 + MARGIN_TOLERANCE_FACTOR * self.m


def embedding_margin_bound(cert: ParameterCertificate) -> float:
    """The success threshold for the worst normalized embedding margin."""
    return cert.margin_bound()


def _ratio_condition_holds(h: HTransform, alpha: float, tau: float, grid: int) -> bool:
    xs = np.geomspace(tau * 1e-6, tau * (1.0 - 1e-12), grid)
    try:
        ts = h.inverse_many(xs)
    except RangeError:
        return False
    return bool(np.all(xs / ts <= 1.0 / alpha + 1e-15))


def select_parameters(
    domain: ConvexDomain,
    omega: Modulus,
    r: float | None = None,
    boundary_count: int = 400,
    *,
    seed: int = 0,
    pairs_per_radius: int = 1000,
    ratio_grid_size: int = 256,
) -> ParameterCertificate:
    """Sample gradient bounds and pick admissible ``(alpha, tau)``.

    ``m`` is the sampled minimum of ``|grad rho|`` on the boundary deflated by
    10% (sampled minima overestimate true minima), ``delta0`` the largest
    dyadic radius at which sampled gradient oscillation stays below ``m/2``,
    ``alpha = max(1, 8/m)``, and ``tau`` the largest dyadic value satisfying
    both smallness conditions.  For capped domains the sampling is restricted
    to the smooth patch around the marked point: the cap seam is only
    piecewise smooth and the certificate is consumed at the marked point.
    """
    if r is None:
        r = domain.boundary_margin
    rng = np.random.default_rng(seed)

    if domain.seam_guard is None:
        xis, normals = boundary_samples(domain, boundary_count, seed)
    else:
        base = domain.marked_boundary()
        dirs = domain.marked_direction / np.linalg.norm(domain.marked_direction)
        spread = dirs[None, :] + 0.35 * rng.standard_normal(
            (boundary_count, 2 * domain.n)
        )
        spread /= np.linalg.norm(spread, axis=1, keepdims=True)
        from .domains import _ray_hits  # local: shared bisection kernel

        ts = _ray_hits(domain, domain.anchor, spread)
        xis = domain.anchor[None, :] + ts[:, None] * spread
        keep = ~np.asarray(domain.near_seam(xis))
        keep &= np.linalg.norm(xis - base.xi, axis=1) <= 2.0 * r
        xis = xis[keep]
        grads = domain.gradient(xis)
        normals = grads / np.linalg.norm(grads, axis=1, keepdims=True)
    if len(xis) < 8:
        raise CertificateFailureError(
            "too few usable boundary samples", diagnostics={"kept": len(xis)}
        )

    grad_norms = np.linalg.norm(domain.gradient(xis), axis=1)
    m = 0.9 * float(np.min(grad_norms))
    if m < 1e-8:
        raise DegenerateDefiningFunctionError(
            f"sampled gradient lower bound is degenerate: {m:.3e}"
        )

    # delta0: largest dyadic radius with gradient oscillation <= m/2 on pairs
    # drawn in the trusted boundary shell
    shell = xis - normals * (0.25 * r * rng.random((len(xis), 1)))
    delta0 = None
    trace = []
    for j in range(0, 44):
        delta = r * 2.0 ** (-j) / 2.0
        idx = rng.integers(0, len(shell), size=pairs_per_radius)
        offs = rng.standard_normal((pairs_per_radius, 2 * domain.n))
        offs /= np.linalg.norm(offs, axis=1, keepdims=True)
        partners = shell[idx] + delta * offs * rng.random((pairs_per_radius, 1))
        osc = np.linalg.norm(
            domain.gradient(partners) - domain.gradient(shell[idx]), axis=1
        )
        trace.append((delta, float(np.max(osc))))
        if np.max(osc) <= 0.5 * m:
            delta0 = delta
            break
    if delta0 is None:
        raise CertificateFailureError(
            "no dyadic radius keeps the gradient oscillation below m/2",
            diagnostics={"m": m, "trace": trace},
        )

    alpha = max(1.0, 8.0 / m)
    h = HTransform(omega, omega.radius / 2.0)
    tau = None
    for j in range(0, 64):
        cand = 2.0 ** (-j)
        if cand >= omega.radius:
            continue
        if math.sqrt(2.0) * cand >= delta0:
            continue
        if _ratio_condition_holds(h, alpha, cand, ratio_grid_size):
            tau = cand
            break
    if tau is None:
        raise CertificateFailureError(
            "no admissible tau found",
            diagnostics={"m": m, "delta0": delta0, "alpha": alpha},
        )
    return ParameterCertificate(
        m=m,
        delta0=delta0,
        alpha=alpha,
        tau=tau,
        boundary_count=len(xis),
        pairs_per_radius=pairs_per_radius,
        ratio_grid_size=ratio_grid_size,
        seed=seed,
    )


def model_from_certificate(omega: Modulus, cert: ParameterCertificate) -> ModelDomain:
    return ModelDomain(omega, cert.alpha, cert.tau)


def verify_embedding(
    domain: ConvexDomain,
    bp: BoundaryPoint,
    model: ModelDomain,
    cert: ParameterCertificate,
    grid: tuple[int, int] = DEFAULT_GRID,
) -> float:
    """Worst normalized margin ``max rho(xi + zeta eta) / s`` over a model grid.

    The grid is geometric in ``s`` (concentrating near the cusp at 0, where
    the regularity hypothesis bites) and uniform in ``t`` across the
    admissible band at each ``s``.  Any nonnegative ``rho`` value raises an
    ``EmbeddingViolationError`` listing the offending ``zeta``; otherwise the
    returned worst margin should sit below ``-m/4`` up to the 5% sampling
    slack (see ``embedding_margin_bound``).
    """
    ns, nt = grid
    tau, alpha = model.tau, model.alpha
    s_vals = np.geomspace(tau * 2.0**-20, tau * (1.0 - 2.0**-10), ns)
    t_caps = np.minimum(model.t_bound(s_vals), tau) * (1.0 - 2.0**-10)
    offsets = np.linspace(-1.0, 1.0, nt)
    ss = np.repeat(s_vals, nt)
    tt = (t_caps[:, None] * offsets[None, :]).ravel()
    zeta = ss + 1j * tt

    eta = bp.complex_normal
    points = bp.xi[None, :] + to_real(zeta[:, None] * eta[None, :])
    vals = np.asarray(domain.rho(points), dtype=float)
    if np.any(vals >= 0.0):
        bad = zeta[vals >= 0.0]
        raise EmbeddingViolationError(
            f"{len(bad)} grid points left the domain (first: {bad[0]:.6g})",
            points=bad[:10].tolist(),
        )
    margins = vals / ss
    return float(np.max(margins))


# ---------------------------------------------------------------------------
# Boundary geometry of the model: tangent angle and arc length
# ---------------------------------------------------------------------------


class _BoundarySpeed:
    """Adapter exposing ``sqrt(1 + alpha^2 omega^2)`` with a modulus-like API."""

    def __init__(self, omega: Modulus, alpha: float):
        self._omega = omega
        self._alpha = alpha
        self.radius = omega.radius

    def eval(self, t):
        w = self._alpha * np.asarray(self._omega.eval(t), dtype=float)
        return np.sqrt(1.0 + w * w)


def _arclength_table(model: ModelDomain) -> HTransform:
    return HTransform(_BoundarySpeed(model.omega, model.alpha), model.omega.radius / 2.0)


def boundary_geometry(model: ModelDomain, y: float) -> tuple[float, float]:
    """Tangent angle and signed arc length of the model boundary at height ``y``.

    ``theta_hat(y) = atan(alpha * omega(|y|)) * sign(y)`` and
    ``G(y) = int_0^y sqrt(1 + alpha^2 omega(|t|)^2) dt``; both are odd and
    ``|G(y)| >= |y|``.
    """
    limit = min(model.tau, model.omega.radius)
    if not abs(y) < limit:
        raise EvaluationDomainError(f"|y| must be below {limit:g}: {y}")
    theta = math.atan(model.alpha * model.omega.eval(abs(y))) * math.copysign(1.0, y)
    g = _arclength_table(model).eval(abs(y)) * math.copysign(1.0, y)
    if y == 0.0:
        theta, g = 0.0, 0.0
    return theta, g


@dataclass(frozen=True)
class TangentAngleReport:
    max_ratio: float
    checked: int
    zero_angle_ok: bool

    SLACK = 1e-6

    @property
    def passed(self) -> bool:
        return self.max_ratio <= 1.0 + self.SLACK and self.zero_angle_ok


def tangent_angle_check(model: ModelDomain, count: int = 1000) -> TangentAngleReport:
    """Check that the tangent angle as a function of arc length is dominated
    by ``alpha * omega``.

    Evaluates ``|theta(G^{-1}(s))| / (alpha * omega(s))`` on an ``s`` grid;
    points with ``omega(s) = 0`` are skipped after asserting the angle
    vanishes there too.
    """
    table = _arclength_table(model)
    y_max = min(model.tau, model.omega.radius) * (1.0 - 1e-9)
    s_max = min(float(table.eval(y_max)), model.omega.radius * (1.0 - 1e-9))
    s_grid = np.geomspace(s_max * 1e-6, s_max, count)
    ys = table.inverse_many(np.minimum(s_grid, table.max_value))
    angles = np.arctan(model.alpha * np.asarray(model.omega.eval(ys)))
    denom = model.alpha * np.asarray(model.omega.eval(s_grid))
    nonzero = denom > 0.0
    zero_ok = bool(np.all(angles[~nonzero] == 0.0))
    ratios = angles[nonzero] / denom[nonzero]
    return TangentAngleReport(
        max_ratio=float(np.max(ratios)) if ratios.size else 0.0,
        checked=int(np.sum(nonzero)),
        zero_angle_ok=zero_ok,
    )
