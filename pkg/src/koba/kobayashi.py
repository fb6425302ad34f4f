"""Certified two-sided brackets for the Kobayashi metric and distance.

Both sides of every bracket come from sound constructions:

* lower bounds use affine complex hyperplanes disjoint from the domain
  (supporting hyperplanes at boundary projections plus a quasi-uniform
  candidate set): if ``H`` misses the domain then the distance is at least
  ``(1/2) |log(dist(p,H)/dist(q,H))|``;
* upper bounds use holomorphic inclusions: the Graham sandwich
  ``|v|/(2r) <= metric <= |v|/r`` with ``r`` the largest inscribed affine
  disc radius (certified by circle sampling and convexity), integrated along
  the straight segment, and round discs verified inside the complex-line
  slice through the two points, where the distance has the closed Mobius
  form.  Chains of verified discs turn the multiplicative slack of the
  metric integral into an additive one, which is what escape-rate and
  almost-geodesic experiments need.

Everything is bracket-sound by construction: the unknown true value always
lies in ``[lo, hi]``.  Exact closed forms for the disc and the ball are
provided separately as oracles (they double as test references and as an
exact backend for boundary experiments on those domains).
"""

from __future__ import annotations

import math
import weakref
from dataclasses import dataclass, field, replace

import numpy as np

from .domains import (
    BoundaryPoint,
    ConvexDomain,
    as_real_point,
    boundary_project,
    boundary_samples,
    complex_hyperplane_distance,
    to_complex,
    to_real,
)
from .errors import (
    ConditioningError,
    EvaluationDomainError,
    ToleranceNotMetError,
)

__all__ = [
    "DistanceBracket",
    "MetricBracket",
    "BracketOptions",
    "inscribed_disc_radius",
    "metric_bracket",
    "distance_bracket",
    "gromov_product",
    "escape_constant",
    "EscapeReport",
    "exact_oracle",
    "CertifiedBackend",
    "OracleBackend",
    "backend_for",
]


# ---------------------------------------------------------------------------
# Bracket containers
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DistanceBracket:
    """A certified interval ``[lo, hi]`` around a Kobayashi distance."""

    lo: float
    hi: float
    method_lo: str = ""
    method_hi: str = ""
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if not (0.0 <= self.lo <= self.hi):
            raise ValueError(f"invalid bracket [{self.lo}, {self.hi}]")

    @property
    def width(self) -> float:
        return self.hi - self.lo

    def contains(self, value: float, slack: float = 0.0) -> bool:
        return self.lo - slack <= value <= self.hi + slack


@dataclass(frozen=True)
class MetricBracket:
    """Graham sandwich for the infinitesimal metric at ``(p, v)``.

    ``lo = |v| / (2 r_hi)`` and ``hi = |v| / r_lo`` where ``[r_lo, r_hi]``
    brackets the largest inscribed affine disc radius, so
    ``hi/lo = 2 r_hi/r_lo``.
    """

    lo: float
    hi: float
    r_lo: float
    r_hi: float

    def contains(self, value: float, slack: float = 0.0) -> bool:
        return self.lo - slack <= value <= self.hi + slack


@dataclass(frozen=True)
class BracketOptions:
    """Tuning knobs for certified distance brackets."""

    tol: float = 1e-3  # relative refinement target of the upper side
    metric_tol: float = 1e-6  # relative radius tolerance for metric brackets
    boundary_planes: int = 128  # quasi-uniform supporting-hyperplane candidates
    circle_samples: int = 64  # circle resolution inside segment integration
    dense_circle: int = 4096  # circle resolution when verifying candidate discs
    disc_ladder: int = 12  # radii per endpoint in the disc-chain search
    max_segments: int = 2**14
    seed: int = 0


# ---------------------------------------------------------------------------
# Inscribed affine discs and the metric bracket
# ---------------------------------------------------------------------------


def inscribed_disc_radius(
    domain: ConvexDomain,
    p,
    v,
    tol: float = 1e-6,
    n_init: int = 64,
    n_max: int = 1 << 16,
) -> tuple[float, float]:
    """Bracket the largest radius of an affine disc at ``p`` tangent to ``v``.

    The disc ``{p + lam * r * v/|v| : |lam| < 1}`` lies in the domain exactly
    when its boundary circle does (convexity); a circle sampled at ``N``
    points and found inside certifies the radius ``r cos(pi/N)``, while any
    sample outside certifies ``r`` as an upper bound.  Bisection plus sample
    doubling drives ``r_hi - r_lo <= tol * r_hi``.
    """
    p = as_real_point(p, domain.n).astype(float)
    if not (domain.rho(p) < 0.0):
        raise EvaluationDomainError("disc centre must lie inside the domain")
    vc = to_complex(as_real_point(v, domain.n))
    nv = np.linalg.norm(vc)
    if nv == 0.0:
        raise ValueError("direction must be nonzero")
    vhat = vc / nv

    def circle_inside(r: float, n: int) -> bool:
        lam = r * np.exp(2j * math.pi * np.arange(n) / n)
        pts = p[None, :] + to_real(lam[:, None] * vhat[None, :])
        return bool(np.all(domain.rho(pts) <= 0.0))

    n = n_init
    lo, hi = 0.0, 2.0 * domain.bounding_radius + np.linalg.norm(p)
    best_cert = 0.0
    for _ in range(200):
        if hi - lo > 0.25 * tol * hi:
            mid = 0.5 * (lo + hi)
            if circle_inside(mid, n):
                lo = mid
                best_cert = max(best_cert, mid * math.cos(math.pi / n))
            else:
                hi = mid
        elif hi - best_cert > tol * hi and n < n_max:
            n *= 2
            if circle_inside(lo, n):
                best_cert = max(best_cert, lo * math.cos(math.pi / n))
            else:
                hi = lo
                lo = best_cert
        else:
            break
    return best_cert, hi


def metric_bracket(
    domain: ConvexDomain, p, v, tol: float = 1e-6
) -> MetricBracket:
    """Graham bracket for the infinitesimal metric at ``(p, v)``."""
    r_lo, r_hi = inscribed_disc_radius(domain, p, v, tol=tol)
    nv = float(np.linalg.norm(as_real_point(v, domain.n)))
    return MetricBracket(lo=0.5 * nv / r_hi, hi=nv / r_lo, r_lo=r_lo, r_hi=r_hi)


# ---------------------------------------------------------------------------
# Complex-line slices and verified round discs
# ---------------------------------------------------------------------------


class _Slice:
    """The planar slice ``{lam : p + lam * d in domain}`` of a complex line."""

    def __init__(self, domain: ConvexDomain, p: np.ndarray, d: np.ndarray):
        self.domain = domain
        self.p = p
        self.d = d  # complex unit vector
        self.reach = domain.bounding_radius + float(np.linalg.norm(p)) + 1.0

    def ambient(self, lam: np.ndarray) -> np.ndarray:
        lam = np.atleast_1d(np.asarray(lam, dtype=complex))
        return self.p[None, :] + to_real(lam[:, None] * self.d[None, :])

    def rho(self, lam) -> np.ndarray:
        return np.asarray(self.domain.rho(self.ambient(lam)), dtype=float)

    def planar_radius(self, c: complex, rays: int = 32) -> tuple[float, complex]:
        """Distance from ``c`` to the slice boundary and the closest direction."""
        phases = np.exp(2j * math.pi * np.arange(rays) / rays)
        lo = np.zeros(rays)
        hi = np.full(rays, self.reach)
        for _ in range(42):
            mid = 0.5 * (lo + hi)
            inside = self.rho(c + mid * phases) < 0.0
            lo, hi = np.where(inside, mid, lo), np.where(inside, hi, mid)
        k = int(np.argmin(lo))
        return float(lo[k]), complex(phases[k])

    def deep_point(self, anchors, iters: int = 14) -> tuple[complex, float]:
        """Hill-climb toward a large inscribed planar disc (approximate incenter)."""
        best_c, best_r = None, -1.0
        for a in anchors:
            if self.rho(a)[0] >= 0.0:
                continue
            r, _ = self.planar_radius(a)
            if r > best_r:
                best_c, best_r = a, r
        if best_c is None:
            raise EvaluationDomainError("no interior anchor for the slice search")
        step = best_r
        for _ in range(iters):
            moved = False
            for dc in (step, -step, 1j * step, -1j * step):
                cand = best_c + dc
                if self.rho(cand)[0] >= 0.0:
                    continue
                r, _ = self.planar_radius(cand)
                if r > best_r * (1.0 + 1e-6):
                    best_c, best_r, moved = cand, r, True
                    break
            if not moved:
                step *= 0.5
                if step < 1e-6 * best_r:
                    break
        return best_c, best_r


def _mobius_distance_in_disc(c: complex, r: float, u: complex, w: complex) -> float:
    """Poincare distance between ``u`` and ``w`` inside the disc ``D(c, r)``."""
    du, dw = u - c, w - c
    if abs(du) >= r or abs(dw) >= r:
        return math.inf
    arg = abs(u - w) * r / abs(r * r - du * np.conj(dw))
    return math.atanh(min(arg, 1.0 - 1e-16))


_DENSE_CAP = 1 << 17


def _verified_disc_bound(
    sl: _Slice,
    c: complex,
    r: float,
    lam_p: complex,
    lam_q: complex,
    dense: int,
    repairs: int = 4,
) -> float:
    """Upper distance bound from one candidate disc, verified by sampling.

    The circle of radius ``r`` about ``c`` is sampled densely; if any sample
    leaves the closed domain the centre is pushed inward (toward the deeper
    side) and retried.  A verified circle certifies the open disc of radius
    ``r cos(pi/N)``, so ``N`` is chosen to keep that shrink below 2% of the
    points' depths inside the candidate: near the boundary the Mobius bound
    is exponentially sensitive to the radius, and a fixed resolution would
    throw away whole nats there.
    """
    if r <= 0.0:
        return math.inf
    inward = None
    for _ in range(repairs + 1):
        depth = r - max(abs(lam_p - c), abs(lam_q - c))
        if depth <= 0.0:
            return math.inf
        need = math.pi * math.sqrt(r / (0.04 * depth))
        n = int(min(_DENSE_CAP, max(dense, 2 ** math.ceil(math.log2(max(need, 2.0))))))
        phases = np.exp(2j * math.pi * np.arange(n) / n)
        vals = sl.rho(c + r * phases)
        worst = float(np.max(vals))
        if worst <= 0.0:
            r_eff = r * math.cos(math.pi / n)
            return _mobius_distance_in_disc(c, r_eff, lam_p, lam_q)
        k = int(np.argmax(vals))
        bad = sl.ambient(np.asarray([c + r * phases[k]]))[0]
        g = np.linalg.norm(sl.domain.gradient(bad))
        push = worst / max(g, 1e-8) * 1.25 + 1e-12 * r
        if inward is None:
            mid = 0.5 * (lam_p + lam_q)
            inward = mid - c
            inward = -phases[k] if abs(inward) < 1e-15 else inward / abs(inward)
        c = c + push * inward
    return math.inf


def _disc_chain_hi(
    sl: _Slice, lam_p: complex, lam_q: complex, opts: BracketOptions
) -> float:
    """Minimal upper bound over verified round discs in the slice.

    Candidates: the approximate incenter with its full inscribed radius, and
    geometric ladders of tangent-like discs anchored at the planar boundary
    projections of both endpoints (these reach arbitrarily close to the
    boundary, which single deep discs cannot).
    """
    anchors = [lam_p, lam_q, 0.5 * (lam_p + lam_q)]
    deep_c, deep_r = sl.deep_point(anchors)
    best = _verified_disc_bound(
        sl, deep_c, deep_r, lam_p, lam_q, opts.dense_circle
    )
    span = abs(lam_q - lam_p)
    for lam in (lam_p, lam_q):
        delta, toward_bdry = sl.planar_radius(lam)
        xi = lam + delta * toward_bdry
        inward = (deep_c - xi)
        inward = -toward_bdry if abs(inward) < 1e-15 else inward / abs(inward)
        r_top = 2.0 * (deep_r + span + delta)
        for r in np.geomspace(2.0 * delta, r_top, opts.disc_ladder):
            cand = _verified_disc_bound(
                sl, xi + r * inward, r * (1.0 - 1e-12), lam_p, lam_q, opts.dense_circle
            )
            best = min(best, cand)
    return best


# ---------------------------------------------------------------------------
# Upper side: segment integration of the Graham metric
# ---------------------------------------------------------------------------


def _segment_metric_hi(
    domain: ConvexDomain, p: np.ndarray, q: np.ndarray, opts: BracketOptions
) -> float:
    """Trapezoid upper sum of the Graham upper metric along ``[p, q]``.

    The true inscribed radius is concave along segments, so its reciprocal is
    convex and the trapezoid rule overestimates the integral; node values use
    the certified radius lower bound, which only pushes the sum further up.
    """
    length = float(np.linalg.norm(q - p))
    vdir = q - p

    def integrand(t: float) -> float:
        x = p + t * vdir
        r_lo, _ = inscribed_disc_radius(
            domain, x, vdir, tol=1e-3, n_init=opts.circle_samples, n_max=4096
        )
        return length / r_lo

    ts = [0.0, 0.25, 0.5, 0.75, 1.0]
    fs = [integrand(t) for t in ts]
    total = sum(
        0.5 * (fs[i] + fs[i + 1]) * (ts[i + 1] - ts[i]) for i in range(len(ts) - 1)
    )
    while len(ts) < opts.max_segments:
        new_ts, new_fs = [ts[0]], [fs[0]]
        refined = False
        for i in range(len(ts) - 1):
            spread = abs(fs[i + 1] - fs[i]) / max(min(fs[i], fs[i + 1]), 1e-30)
            if spread > 0.10:
                tm = 0.5 * (ts[i] + ts[i + 1])
                new_ts.extend([tm, ts[i + 1]])
                new_fs.extend([integrand(tm), fs[i + 1]])
                refined = True
            else:
                new_ts.append(ts[i + 1])
                new_fs.append(fs[i + 1])
        ts, fs = new_ts, new_fs
        new_total = sum(
            0.5 * (fs[i] + fs[i + 1]) * (ts[i + 1] - ts[i]) for i in range(len(ts) - 1)
        )
        done = not refined or abs(new_total - total) <= opts.tol * new_total
        total = new_total
        if done:
            break
    return total


# ---------------------------------------------------------------------------
# Lower side: supporting hyperplanes
# ---------------------------------------------------------------------------

_PLANE_CACHE: "weakref.WeakKeyDictionary[ConvexDomain, tuple]" = (
    weakref.WeakKeyDictionary()
)


def _hyperplane_pool(domain: ConvexDomain, count: int, seed: int):
    key = (count, seed)
    cached = _PLANE_CACHE.get(domain)
    if cached is not None and cached[0] == key:
        return cached[1], cached[2]
    xis, normals = boundary_samples(domain, count, seed)
    nudge = 1e-9 * domain.bounding_radius
    xis = xis + nudge * normals  # keep the hyperplanes strictly outside
    _PLANE_CACHE[domain] = (key, xis, normals)
    return xis, normals


def _project_best(domain: ConvexDomain, z: np.ndarray):
    try:
        return boundary_project(domain, z)
    except ToleranceNotMetError as err:
        return err.best


def _hyperplane_lo(
    domain: ConvexDomain,
    p: np.ndarray,
    q: np.ndarray,
    endpoints: list[tuple[BoundaryPoint, float]],
    opts: BracketOptions,
) -> float:
    xis, normals = _hyperplane_pool(domain, opts.boundary_planes, opts.seed)
    xi_list = [xis]
    n_list = [normals]
    nudge = 1e-9 * domain.bounding_radius
    for bp, _ in endpoints:
        out = -bp.inward_normal
        xi_list.append((bp.xi + nudge * out)[None, :])
        n_list.append(out[None, :])
    XI = np.concatenate(xi_list)
    NO = to_complex(np.concatenate(n_list))
    pc = to_complex(p)[None, :]
    qc = to_complex(q)[None, :]
    xic = to_complex(XI)
    dp = np.abs(np.sum((pc - xic) * np.conj(NO), axis=1))
    dq = np.abs(np.sum((qc - xic) * np.conj(NO), axis=1))
    ok = (dp > 0.0) & (dq > 0.0)
    if not np.any(ok):
        return 0.0
    vals = 0.5 * np.abs(np.log(dp[ok] / dq[ok]))
    return max(0.0, float(np.max(vals)))


# ---------------------------------------------------------------------------
# The distance bracket
# ---------------------------------------------------------------------------


def distance_bracket(
    domain: ConvexDomain, p, q, opts: BracketOptions | None = None
) -> DistanceBracket:
    """Certified bracket for the Kobayashi distance between interior points.

    Symmetric by construction: the two points are put into a canonical order
    before any computation, so swapping the arguments returns the identical
    bracket.
    """
    if opts is None:
        opts = BracketOptions()
    p = as_real_point(p, domain.n).astype(float)
    q = as_real_point(q, domain.n).astype(float)
    for x in (p, q):
        if not (domain.rho(x) < 0.0):
            raise EvaluationDomainError(f"point outside the domain: {x}")
    if tuple(q.tolist()) < tuple(p.tolist()):
        p, q = q, p
    if np.array_equal(p, q):
        return DistanceBracket(0.0, 0.0, "coincident", "coincident")

    proj_p = _project_best(domain, p)
    proj_q = _project_best(domain, q)
    guard = 1e-9 * domain.bounding_radius
    if proj_p[1] < guard or proj_q[1] < guard:
        raise ConditioningError(
            f"input too close to the boundary: depths {proj_p[1]:.3e}, {proj_q[1]:.3e}"
        )

    lo = _hyperplane_lo(domain, p, q, [proj_p, proj_q], opts)

    hi_seg = _segment_metric_hi(domain, p, q, opts)
    span = float(np.linalg.norm(q - p))
    d = to_complex(q - p) / span
    sl = _Slice(domain, p, d)
    hi_disc = _disc_chain_hi(sl, 0.0 + 0.0j, span + 0.0j, opts)
    if hi_disc < hi_seg:
        hi, method_hi = hi_disc, "slice-disc"
    else:
        hi, method_hi = hi_seg, "segment-metric"
    hi = max(hi, lo)
    return DistanceBracket(
        lo=lo,
        hi=hi,
        method_lo="supporting-hyperplane",
        method_hi=method_hi,
        meta={
            "delta_p": proj_p[1],
            "delta_q": proj_q[1],
            "hi_segment": hi_seg,
            "hi_disc": hi_disc,
            "planes": opts.boundary_planes,
            "seed": opts.seed,
        },
    )


# ---------------------------------------------------------------------------
# Backends: certified brackets or exact oracles
# ---------------------------------------------------------------------------


class CertifiedBackend:
    """Distance backend producing certified brackets on any gallery domain."""

    name = "bracket"

    def __init__(self, domain: ConvexDomain, opts: BracketOptions | None = None):
        self.domain = domain
        self.opts = opts or BracketOptions()

    def distance(self, p, q) -> DistanceBracket:
        return distance_bracket(self.domain, p, q, self.opts)


class OracleBackend:
    """Zero-width brackets from the closed-form disc/ball distances."""

    name = "oracle"

    def __init__(self, kind: str, n: int):
        if kind not in ("disc", "ball"):
            raise ValueError(f"no exact oracle for kind {kind!r}")
        self.kind = kind
        self.n = n

    def distance(self, p, q) -> DistanceBracket:
        val = exact_oracle(self.kind, p, q)
        return DistanceBracket(val, val, "oracle", "oracle")


def backend_for(domain: ConvexDomain, opts: BracketOptions | None = None, *, exact: bool = False):
    """Choose a backend; ``exact=True`` requires a disc/ball gallery domain."""
    if exact:
        if domain.tag == "ball:1":
            return OracleBackend("disc", 1)
        if domain.tag.startswith("ball:"):
            return OracleBackend("ball", domain.n)
        raise ValueError(f"no exact oracle available for domain {domain.tag!r}")
    return CertifiedBackend(domain, opts)


# ---------------------------------------------------------------------------
# Gromov products
# ---------------------------------------------------------------------------


def gromov_product(backend, x, y, o) -> DistanceBracket:
    """Bracket on ``(x|y)_o = (k(x,o) + k(y,o) - k(x,y)) / 2``.

    Sound interval arithmetic over the three distance brackets, intersected
    with ``[0, inf)`` (the product of a metric is nonnegative by the triangle
    inequality).
    """
    bxo = backend.distance(x, o)
    byo = backend.distance(y, o)
    bxy = backend.distance(x, y)
    lo = max(0.0, 0.5 * (bxo.lo + byo.lo - bxy.hi))
    hi = max(lo, 0.5 * (bxo.hi + byo.hi - bxy.lo))
    return DistanceBracket(
        lo, hi, method_lo=backend.name, method_hi=backend.name,
        meta={"k_xo": (bxo.lo, bxo.hi), "k_yo": (byo.lo, byo.hi), "k_xy": (bxy.lo, bxy.hi)},
    )


# ---------------------------------------------------------------------------
# Escape rate toward the boundary
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class EscapeReport:
    """Empirical escape constant: ``hi(z0, z) <= C + (1/2) log(1/delta(z))``.

    ``profile`` holds, per depth, the max over boundary directions of
    ``hi(z0, z) - (1/2) log(1/delta(z))``; ``C`` is its overall max.  The
    profile exhibits stabilization as the depth shrinks.
    """

    C: float
    depths: tuple
    profile: tuple
    samples: tuple
    seed: int


def escape_constant(
    domain: ConvexDomain,
    z0,
    boundary_count: int = 12,
    depth_count: int = 7,
    opts: BracketOptions | None = None,
    *,
    seed: int = 0,
    depth_range: tuple[float, float] = (1e-6, 1e-1),
) -> EscapeReport:
    """Fit the constant in the boundary escape bound by direct sampling.

    Samples ``z = xi + depth * eta`` over quasi-uniform boundary points and a
    geometric depth ladder, evaluates the distance upper bracket from ``z0``,
    and reports ``C = max hi(z0, z) - (1/2) log(1/delta(z))`` with the
    per-depth profile.
    """
    if opts is None:
        opts = BracketOptions()
    z0 = as_real_point(z0, domain.n).astype(float)
    xis, normals = boundary_samples(domain, boundary_count, seed)
    depths = np.geomspace(
        depth_range[0] * domain.bounding_radius,
        depth_range[1] * domain.bounding_radius,
        depth_count,
    )[::-1]
    rows = []
    profile = []
    for depth in depths:
        worst = -math.inf
        for xi, nout in zip(xis, normals):
            z = xi - depth * nout
            if not (domain.rho(z) < 0.0):
                continue
            delta = _project_best(domain, z)[1]
            hi = distance_bracket(domain, z0, z, opts).hi
            value = hi - 0.5 * math.log(1.0 / delta)
            rows.append((float(depth), float(delta), float(hi), float(value)))
            worst = max(worst, value)
        profile.append(worst)
    return EscapeReport(
        C=float(max(profile)),
        depths=tuple(float(d) for d in depths),
        profile=tuple(profile),
        samples=tuple(rows),
        seed=seed,
    )


# ---------------------------------------------------------------------------
# Exact oracles for the disc and the ball
# ---------------------------------------------------------------------------


def exact_oracle(tag: str, p, q) -> float:
    """Closed-form Kobayashi distance on the unit disc or unit ball.

    ``disc``: ``atanh |(p - q) / (1 - conj(q) p)|``.
    ``ball``: reduce one point to the origin by a Mobius automorphism; the
    invariant quotient gives
    ``atanh sqrt(1 - (1-|p|^2)(1-|q|^2) / |1 - <p, q>|^2)``.
    """
    if tag == "disc":
        pc = complex(np.ravel(to_complex(as_real_point(p, 1)))[0])
        qc = complex(np.ravel(to_complex(as_real_point(q, 1)))[0])
        if abs(pc) >= 1.0 or abs(qc) >= 1.0:
            raise EvaluationDomainError("oracle points must lie in the unit disc")
        num = abs(pc - qc)
        den = abs(1.0 - np.conj(qc) * pc)
        return math.atanh(min(num / den, 1.0 - 1e-16))
    if tag == "ball":
        pc = to_complex(np.asarray(as_real_point(p), dtype=float))
        qc = to_complex(np.asarray(as_real_point(q), dtype=float))
        if pc.shape != qc.shape:
            raise ValueError("oracle points must share a dimension")
        np2, nq2 = float(np.vdot(pc, pc).real), float(np.vdot(qc, qc).real)
        if np2 >= 1.0 or nq2 >= 1.0:
            raise EvaluationDomainError("oracle points must lie in the unit ball")
        inner = complex(np.sum(pc * np.conj(qc)))
        ratio = (1.0 - np2) * (1.0 - nq2) / abs(1.0 - inner) ** 2
        arg = math.sqrt(max(0.0, 1.0 - ratio))
        return math.atanh(min(arg, 1.0 - 1e-16))
    raise ValueError(f"unknown oracle tag {tag!r}")
