"""Bounded convex domains in C^n with boundary queries.

Points live in R^{2n} under the interleaved identification
``z = (z_1, ..., z_n) <-> (Re z_1, Im z_1, ..., Re z_n, Im z_n)``; complex
multiplication by ``i`` is the linear map
``J(x_1, ..., x_{2n}) = (-x_2, x_1, ..., -x_{2n}, x_{2n-1})``.

A domain is described by a defining function ``rho`` (negative inside, zero on
the boundary) with a closed-form gradient or a central-difference fallback,
a membership predicate, and a Euclidean bounding radius.  All boundary
machinery (nearest-point projection, complex tangent hyperplanes, strictness
probes) works through ``rho`` and its gradient only, so custom domains plug in
alongside the built-in gallery.

Every value here is immutable after construction and all queries are pure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from .errors import (
    EvaluationDomainError,
    IllConditionedBoundaryError,
    InvalidModulusError,
    ToleranceNotMetError,
)
from .moduli import HTransform, LogFamilyModulus, Modulus, parse_modulus

__all__ = [
    "multiply_by_i",
    "to_complex",
    "to_real",
    "as_real_point",
    "ConvexDomain",
    "BoundaryPoint",
    "Hyperplane",
    "boundary_project",
    "boundary_point_from_direction",
    "boundary_samples",
    "complex_tangent_hyperplane",
    "complex_hyperplane_distance",
    "c_strict_probe",
    "ball",
    "ellipsoid",
    "profile_domain",
    "graph_domain",
    "parse_domain",
]

_FD_STEP = 1e-6
_RAY_ITERS = 56  # bisection resolution ~ (R+1) * 2^-56, well below 1e-10
_ALIGNMENT_TARGET = 1e-4  # radians
_DIRECTION_SEED = 20240 << 4  # fixed: projection results must be reproducible


# ---------------------------------------------------------------------------
# The R^{2n} <-> C^n identification
# ---------------------------------------------------------------------------


def multiply_by_i(v):
    """Multiplication by ``i`` as an R-linear map on interleaved coordinates.

    Satisfies ``J(J(v)) = -v`` and ``<J v, v> = 0``.
    """
    v = np.asarray(v, dtype=float)
    if v.shape[-1] % 2 != 0:
        raise ValueError(f"expected an even-length vector, got length {v.shape[-1]}")
    out = np.empty_like(v)
    out[..., 0::2] = -v[..., 1::2]
    out[..., 1::2] = v[..., 0::2]
    return out


def to_complex(x):
    """Interleaved real vector(s) ``(..., 2n)`` to complex ``(..., n)``."""
    x = np.asarray(x, dtype=float)
    return x[..., 0::2] + 1j * x[..., 1::2]


def to_real(z):
    """Complex vector(s) ``(..., n)`` to interleaved real ``(..., 2n)``."""
    z = np.asarray(z, dtype=complex)
    out = np.empty(z.shape[:-1] + (2 * z.shape[-1],), dtype=float)
    out[..., 0::2] = z.real
    out[..., 1::2] = z.imag
    return out


def as_real_point(p, n: int | None = None) -> np.ndarray:
    """Coerce a point given as complex ``(n,)`` or real ``(2n,)`` to real form."""
    arr = np.asarray(p)
    if np.iscomplexobj(arr):
        arr = to_real(np.atleast_1d(arr))
    else:
        arr = np.atleast_1d(arr).astype(float)
        if arr.shape[-1] % 2 != 0:
            raise ValueError("real points must have even length (interleaved)")
    if n is not None and arr.shape[-1] != 2 * n:
        raise ValueError(f"expected a point in C^{n}, got shape {arr.shape}")
    return arr


# ---------------------------------------------------------------------------
# Domains
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)  # identity semantics: instances are cache keys
class ConvexDomain:
    """A bounded convex domain ``{rho < 0}`` in C^n.

    ``rho`` must be vectorized over ``(..., 2n)`` arrays.  ``grad`` is the
    closed-form gradient when available; otherwise central differences with
    step 1e-6 are used.  ``boundary_margin`` is the neighborhood radius around
    the boundary (or around the marked point for capped domains) on which
    ``rho`` and its gradient are trusted for certificates.  ``seam_guard``
    flags points near non-smooth gluing seams of capped constructions; such
    points are excluded from samples.
    """

    n: int
    rho: Callable
    bounding_radius: float
    tag: str
    grad: Callable | None = None
    anchor: np.ndarray = None  # interior point used as ray-cast origin
    boundary_margin: float = 0.5
    marked_direction: np.ndarray | None = None
    seam_guard: Callable | None = None

    def __post_init__(self):
        if self.anchor is None:
            object.__setattr__(self, "anchor", np.zeros(2 * self.n))
        a = np.asarray(self.anchor, dtype=float)
        a.setflags(write=False)
        object.__setattr__(self, "anchor", a)

    # -- basic queries -------------------------------------------------------

    def contains(self, x) -> np.ndarray | bool:
        val = self.rho(np.asarray(x, dtype=float))
        return val < 0.0

    def gradient(self, x) -> np.ndarray:
        """Gradient of ``rho``; central differences unless a closed form exists."""
        x = np.asarray(x, dtype=float)
        if self.grad is not None:
            return self.grad(x)
        single = x.ndim == 1
        pts = x[None, :] if single else x
        m, d = pts.shape
        offsets = _FD_STEP * np.eye(d)
        plus = self.rho((pts[:, None, :] + offsets).reshape(-1, d)).reshape(m, d)
        minus = self.rho((pts[:, None, :] - offsets).reshape(-1, d)).reshape(m, d)
        g = (plus - minus) / (2.0 * _FD_STEP)
        return g[0] if single else g

    def near_seam(self, x) -> np.ndarray | bool:
        if self.seam_guard is None:
            x = np.asarray(x)
            return False if x.ndim == 1 else np.zeros(x.shape[:-1], dtype=bool)
        return self.seam_guard(np.asarray(x, dtype=float))

    def marked_boundary(self) -> "BoundaryPoint":
        """The domain's canonical analysis point on the boundary."""
        d = self.marked_direction
        if d is None:
            d = np.zeros(2 * self.n)
            d[0] = 1.0
        return boundary_point_from_direction(self, d)


@dataclass(frozen=True)
class BoundaryPoint:
    """A boundary point with unit inward normal and complex tangent frame.

    ``tangent_frame`` holds ``n-1`` complex unit vectors spanning the complex
    tangent space (empty in dimension one); each is Hermitian-orthogonal to
    the complex normal, hence real-orthogonal to both the normal and its
    ``J``-image.  ``alignment_residual`` is the angle (radians) between the
    outward normal and the ray this point was found along: a first-order
    certificate when it comes from a nearest-point projection.
    """

    xi: np.ndarray
    inward_normal: np.ndarray
    tangent_frame: np.ndarray
    alignment_residual: float = float("nan")

    def __post_init__(self):
        for name in ("xi", "inward_normal", "tangent_frame"):
            arr = np.asarray(getattr(self, name))
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def complex_normal(self) -> np.ndarray:
        return to_complex(self.inward_normal)


@dataclass(frozen=True)
class Hyperplane:
    """An affine complex hyperplane ``{z : <z - xi, normal>_C = 0}``.

    In dimension one the spanning frame is empty and the hyperplane is the
    single point ``xi``.
    """

    xi: np.ndarray
    normal: np.ndarray  # complex (n,), unit
    frame: np.ndarray  # complex (n-1, n)


def _tangent_frame(gradient: np.ndarray) -> np.ndarray:
    """Hermitian-orthonormal basis of the complex orthocomplement of the normal."""
    N = to_complex(gradient)
    n = N.shape[0]
    if n == 1:
        return np.zeros((0, 1), dtype=complex)
    _, _, vh = np.linalg.svd(np.conj(N)[None, :])
    return np.conj(vh[1:])


def complex_hyperplane_distance(z, xi, normal) -> np.ndarray | float:
    """Euclidean distance from ``z`` to the complex hyperplane at ``xi``.

    ``z`` may be a single real point or a batch; ``normal`` is the complex
    normal (any nonzero scale).
    """
    z = np.asarray(z, dtype=float)
    zc = to_complex(z) - to_complex(np.asarray(xi, dtype=float))
    num = np.abs(np.sum(zc * np.conj(normal), axis=-1))
    return num / np.linalg.norm(normal)


# ---------------------------------------------------------------------------
# Ray casting and nearest-point projection
# ---------------------------------------------------------------------------


def _ray_hits(domain: ConvexDomain, origin: np.ndarray, dirs: np.ndarray) -> np.ndarray:
    """Distances along unit rays from an interior origin to the boundary."""
    m = dirs.shape[0]
    hi0 = np.linalg.norm(origin) + domain.bounding_radius + 1e-6
    lo = np.zeros(m)
    hi = np.full(m, hi0)
    for _ in range(_RAY_ITERS):
        mid = 0.5 * (lo + hi)
        inside = domain.rho(origin[None, :] + mid[:, None] * dirs) < 0.0
        lo = np.where(inside, mid, lo)
        hi = np.where(inside, hi, mid)
    return 0.5 * (lo + hi)


def _unit_rows(rows: np.ndarray) -> np.ndarray:
    return rows / np.linalg.norm(rows, axis=1, keepdims=True)


def _direction_set(dim: int, extra: int, seed: int = _DIRECTION_SEED) -> np.ndarray:
    """Signed axes plus a deterministic quasi-random spread of unit directions."""
    axes = np.concatenate((-np.eye(dim), np.eye(dim)))
    rng = np.random.default_rng(seed)
    rand = _unit_rows(rng.standard_normal((extra, dim)))
    return np.concatenate((axes, rand))


def _boundary_point_at(domain: ConvexDomain, xi: np.ndarray, residual: float) -> BoundaryPoint:
    g = domain.gradient(xi)
    ng = np.linalg.norm(g)
    if ng < 1e-8:
        raise IllConditionedBoundaryError(
            f"defining-function gradient degenerate at {xi}: |grad| = {ng:.2e}"
        )
    nhat = g / ng
    return BoundaryPoint(
        xi=xi,
        inward_normal=-nhat,
        tangent_frame=_tangent_frame(nhat),
        alignment_residual=residual,
    )


def boundary_point_from_direction(domain: ConvexDomain, direction) -> BoundaryPoint:
    """Boundary point hit by the ray from the domain anchor along ``direction``."""
    d = as_real_point(direction, domain.n).astype(float)
    d = d / np.linalg.norm(d)
    t = _ray_hits(domain, domain.anchor, d[None, :])[0]
    xi = domain.anchor + t * d
    return _boundary_point_at(domain, xi, residual=float("nan"))


def boundary_samples(domain: ConvexDomain, count: int, seed: int):
    """Quasi-uniform boundary points with unit outward normals.

    Returns ``(xis, normals)`` arrays of shape ``(m, 2n)``; points flagged by
    the domain's seam guard are dropped, so ``m <= count``.
    """
    dim = 2 * domain.n
    rng = np.random.default_rng(seed)
    dirs = _unit_rows(rng.standard_normal((count, dim)))
    ts = _ray_hits(domain, domain.anchor, dirs)
    xis = domain.anchor[None, :] + ts[:, None] * dirs
    keep = ~np.asarray(domain.near_seam(xis))
    xis = xis[keep]
    grads = domain.gradient(xis)
    norms = np.linalg.norm(grads, axis=1, keepdims=True)
    ok = norms[:, 0] > 1e-8
    return xis[ok], grads[ok] / norms[ok]


def boundary_project(
    domain: ConvexDomain, z, tol: float = 1e-8
) -> tuple[BoundaryPoint, float]:
    """Nearest boundary point and the distance to the complement.

    Multi-start ray casting (signed axes + 64 quasi-random directions + the
    gradient direction) followed by normal-alignment iteration.  The result is
    accepted once the angle between ``z - xi`` and the outward normal at
    ``xi`` falls below 1e-4 rad, a first-order optimality certificate that
    convexity turns into global optimality within the located basin.  Exact
    ties (centers of symmetry) resolve to the lexicographically smallest
    direction, which the signed-axis candidates make canonical.
    """
    z = as_real_point(z, domain.n).astype(float)
    if not (domain.rho(z) < 0.0):
        raise EvaluationDomainError(f"point is not inside the domain: {z}")

    dirs = _direction_set(2 * domain.n, extra=64)
    g = domain.gradient(z)
    ng = np.linalg.norm(g)
    if ng > 1e-12:
        dirs = np.concatenate((dirs, (g / ng)[None, :]))
    ts = _ray_hits(domain, z, dirs)

    dmin = ts.min()
    tied = ts <= dmin * (1.0 + 1e-9)
    order = np.lexsort(np.round(dirs[tied], 12).T[::-1])
    best_dir = dirs[tied][order[0]]
    best_t = ts[tied][order[0]]

    direction, dist = best_dir, float(best_t)
    angle = math.pi
    for _ in range(60):
        xi = z + dist * direction
        gx = domain.gradient(xi)
        ngx = np.linalg.norm(gx)
        if ngx < 1e-8:
            raise IllConditionedBoundaryError(
                f"defining-function gradient degenerate near {xi}"
            )
        nhat = gx / ngx
        angle = math.acos(float(np.clip(np.dot(direction, nhat), -1.0, 1.0)))
        if angle <= _ALIGNMENT_TARGET:
            break
        cand = nhat
        t_new = float(_ray_hits(domain, z, cand[None, :])[0])
        if t_new > dist * (1.0 + 1e-12) + tol:
            cand = _unit_rows((direction + nhat)[None, :])[0]
            t_new = float(_ray_hits(domain, z, cand[None, :])[0])
            if t_new > dist * (1.0 + 1e-12) + tol:
                break
        direction, dist = cand, min(t_new, dist)
    xi = z + dist * direction
    bp = _boundary_point_at(domain, xi, residual=angle)
    if angle > _ALIGNMENT_TARGET:
        raise ToleranceNotMetError(
            f"projection alignment stalled at {angle:.2e} rad",
            best=(bp, dist),
        )
    return bp, dist


def complex_tangent_hyperplane(domain: ConvexDomain, bp: BoundaryPoint) -> Hyperplane:
    """The affine complex tangent hyperplane at a boundary point.

    Degenerates to the single point ``xi`` in dimension one.
    """
    if math.isfinite(bp.alignment_residual) and bp.alignment_residual > 1e-2:
        raise IllConditionedBoundaryError(
            f"boundary point certificate too weak: {bp.alignment_residual:.2e} rad"
        )
    normal = bp.complex_normal
    return Hyperplane(
        xi=bp.xi, normal=normal / np.linalg.norm(normal), frame=bp.tangent_frame
    )


# ---------------------------------------------------------------------------
# Complex strict-convexity probe
# ---------------------------------------------------------------------------


def c_strict_probe(
    domain: ConvexDomain,
    bp: BoundaryPoint,
    radii,
    samples_per_radius: int,
    seed: int = 0,
) -> list[tuple[float, float]]:
    """Sampled margins between the complex tangent hyperplane and the domain.

    For each probe distance ``d``, samples points of the affine complex
    tangent hyperplane at distance ``d`` from ``xi`` and reports the minimum
    first-order distance estimate ``rho(p)/|grad rho(p)|`` to the closed
    domain.  Strictly positive margins at every radius certify the sampled
    form of complex strict convexity at ``xi``; in dimension one the
    hyperplane is the single point ``xi`` and the probe is vacuous (empty
    list).
    """
    frame = bp.tangent_frame
    if frame.shape[0] == 0:
        return []
    rng = np.random.default_rng(seed)
    out = []
    k = frame.shape[0]
    for d in radii:
        if d <= 0.0:
            raise ValueError(f"probe radii must be positive: {d}")
        coeff = rng.standard_normal((samples_per_radius, 2 * k))
        coeff = _unit_rows(coeff)
        cplx = coeff[:, 0::2] + 1j * coeff[:, 1::2]
        pts = bp.xi[None, :] + d * to_real(cplx @ frame)
        vals = domain.rho(pts)
        grads = domain.gradient(pts)
        norms = np.maximum(np.linalg.norm(grads, axis=1), 1e-30)
        out.append((float(d), float(np.min(vals / norms))))
    return out


# ---------------------------------------------------------------------------
# Gallery
# ---------------------------------------------------------------------------


def ball(n: int) -> ConvexDomain:
    """The unit Euclidean ball in C^n (the unit disc for n=1)."""
    if n < 1:
        raise ValueError("dimension must be at least 1")

    def rho(x):
        return np.linalg.norm(x, axis=-1) - 1.0

    def grad(x):
        x = np.asarray(x, dtype=float)
        nrm = np.maximum(np.linalg.norm(x, axis=-1, keepdims=True), 1e-300)
        return x / nrm

    e1 = np.zeros(2 * n)
    e1[0] = 1.0
    return ConvexDomain(
        n=n,
        rho=rho,
        grad=grad,
        bounding_radius=1.0,
        tag=f"ball:{n}",
        boundary_margin=0.5,
        marked_direction=e1,
    )


def ellipsoid(semiaxes) -> ConvexDomain:
    """Complex ellipsoid ``{sum |z_j|^2 / a_j^2 < 1}``."""
    a = np.asarray(list(semiaxes), dtype=float)
    if np.any(a <= 0.0):
        raise ValueError("semiaxes must be positive")
    n = len(a)
    w = np.repeat(1.0 / a**2, 2)

    def rho(x):
        x = np.asarray(x, dtype=float)
        return np.sum(w * x * x, axis=-1) - 1.0

    def grad(x):
        return 2.0 * w * np.asarray(x, dtype=float)

    e1 = np.zeros(2 * n)
    e1[0] = 1.0
    return ConvexDomain(
        n=n,
        rho=rho,
        grad=grad,
        bounding_radius=float(np.max(a)),
        tag="ellipsoid:" + ",".join(f"{v:g}" for v in a),
        boundary_margin=0.25 * float(np.min(a)),
        marked_direction=e1,
    )


def _extended_profile(h: HTransform, alpha: float, t_cap: float):
    """``alpha * h(|t|)`` extended linearly past ``t_cap`` (stays convex)."""
    base = float(h.eval(t_cap))
    slope = float(h.omega.eval(min(t_cap, h.omega.radius * (1 - 1e-12))))

    def g(t):
        t = np.abs(np.asarray(t, dtype=float))
        inner = np.minimum(t, t_cap)
        vals = alpha * h.eval_many(np.atleast_1d(inner).ravel()).reshape(inner.shape)
        return vals + alpha * slope * np.maximum(t - t_cap, 0.0)

    return g, alpha * base


def profile_domain(
    omega: Modulus,
    alpha: float = 1.0,
    tau: float = 0.1,
    tau_prime: float | None = None,
    profile: Callable | None = None,
) -> ConvexDomain:
    """Planar domain ``{x + iy : |y| < tau, g(y) < x < tau'}``.

    By default ``g = alpha * h(|y|)`` where ``h`` is the cumulative transform
    of ``omega``, producing a boundary whose flatness at the marked point 0 is
    exactly as regular as ``omega`` allows.  Passing ``profile`` overrides
    ``g`` (used e.g. for corner profiles in negative tests); it must be convex
    with ``profile(0) = 0`` for the result to be a convex domain.
    """
    if tau_prime is None:
        tau_prime = tau
    if profile is None:
        if not (0.0 < tau < omega.radius):
            raise EvaluationDomainError("need 0 < tau < modulus radius")
        h = HTransform(omega, omega.radius / 2.0)
        g, _ = _extended_profile(h, alpha, min(2.0 * tau, h.t_max))
    else:
        g = profile
    scale = max(tau, tau_prime)

    def pieces(x):
        x = np.asarray(x, dtype=float)
        s, t = x[..., 0], x[..., 1]
        return np.stack((g(t) - s, s - tau_prime, np.abs(t) - tau), axis=-1)

    def rho(x):
        return np.max(pieces(x), axis=-1)

    def seam(x):
        p = np.sort(pieces(x), axis=-1)
        return (p[..., -1] - p[..., -2]) < 0.05 * scale

    anchor = np.array([0.6 * tau_prime, 0.0])
    return ConvexDomain(
        n=1,
        rho=rho,
        bounding_radius=math.hypot(tau_prime, tau) + 1e-9,
        tag=f"profile:{getattr(omega, 'literal', 'custom')}:{alpha:g}:{tau:g}",
        anchor=anchor,
        boundary_margin=0.5 * min(tau, tau_prime),
        marked_direction=np.array([-1.0, 0.0]),
        seam_guard=seam,
    )


def graph_domain(omega: Modulus, n: int = 2) -> ConvexDomain:
    """Convex graph domain ``{Im z_n > h(|w|)}`` capped by a ball.

    ``w`` collects the ``2n - 1`` real coordinates other than ``Im z_n`` and
    ``h`` is the cumulative transform of ``omega``, so the boundary near the
    marked point 0 is a C^1 graph whose normal-direction derivative has
    modulus of continuity controlled by ``omega`` (Dini-but-not-Hoelder for
    the log family).  The cap keeps the domain bounded; its gluing seam is far
    from the marked point and flagged by the seam guard.
    """
    if n < 1:
        raise ValueError("dimension must be at least 1")
    h = HTransform(omega, omega.radius / 2.0)
    g, _ = _extended_profile(h, 1.0, 0.9 * h.t_max)
    dim = 2 * n
    im_idx = dim - 1
    w_idx = [k for k in range(dim) if k != im_idx]
    center = np.zeros(dim)
    center[im_idx] = 0.6
    cap_radius = 1.0

    def pieces(x):
        x = np.asarray(x, dtype=float)
        wn = np.linalg.norm(x[..., w_idx], axis=-1)
        p1 = g(wn) - x[..., im_idx]
        p2 = np.linalg.norm(x - center, axis=-1) - cap_radius
        return np.stack((p1, p2), axis=-1)

    def rho(x):
        return np.max(pieces(x), axis=-1)

    def seam(x):
        p = pieces(x)
        return np.abs(p[..., 0] - p[..., 1]) < 0.05 * cap_radius

    inward = np.zeros(dim)
    inward[im_idx] = -1.0  # ray from the anchor (on the Im z_n axis) down to 0
    return ConvexDomain(
        n=n,
        rho=rho,
        bounding_radius=float(np.linalg.norm(center)) + cap_radius,
        tag=f"graph:{getattr(omega, 'literal', 'custom')}:{n}",
        anchor=center,
        boundary_margin=0.3,
        marked_direction=inward,
        seam_guard=seam,
    )


def parse_domain(literal: str) -> ConvexDomain:
    """Parse ``ball:<n>``, ``ellipsoid:<a1,...,an>``,
    ``profile:<modulus>:<alpha>:<tau>``, ``graph:<modulus>:<n>``."""
    parts = literal.split(":")
    kind = parts[0]
    try:
        if kind == "ball" and len(parts) == 2:
            return ball(int(parts[1]))
        if kind == "ellipsoid" and len(parts) == 2:
            return ellipsoid([float(v) for v in parts[1].split(",")])
        if kind == "profile" and len(parts) >= 4:
            omega = parse_modulus(":".join(parts[1:-2]))
            return profile_domain(omega, alpha=float(parts[-2]), tau=float(parts[-1]))
        if kind == "graph" and len(parts) >= 3:
            omega = parse_modulus(":".join(parts[1:-1]))
            return graph_domain(omega, int(parts[-1]))
    except (ValueError, InvalidModulusError, EvaluationDomainError) as exc:
        raise EvaluationDomainError(f"bad domain literal {literal!r}: {exc}") from exc
    raise EvaluationDomainError(f"unknown domain kind in literal {literal!r}")
