"""Normal-ray almost-geodesics and Gromov-product boundary experiments.

A normal ray at a boundary point ``xi`` with unit inward normal ``eta`` is the
path ``sigma(t) = xi + eps * exp(-2t) * eta``; its distance to the affine
complex tangent hyperplane at ``xi`` is exactly ``eps * exp(-2t)``, which
makes the supporting-hyperplane lower bound along the ray reproduce ``|s-t|``
to machine precision.  The almost-geodesic report measures, on a time grid,
the least ``K`` for which the two-sided sandwich

    |s-t| - log K <= k(sigma(s), sigma(t)) <= |s-t| + log K,
    k(sigma(s), sigma(t)) <= K |s-t|

is consistent with the distance data (exact oracles on the disc/ball, or
certified brackets tightened by min-plus chaining across the grid).

The boundary experiments drive the two Gromov-product conditions behind
continuous extension: products along sequences into a common boundary point
must diverge, while sequences into boundary points with distinct complex
tangent hyperplanes keep bounded products.  Finite data cannot certify a
limit, so the experiment reports trend classes with explicit criteria
(a threshold ladder crossed permanently, or a cap relative to the early
matrix).  ``boundary_limit_probe`` feeds sequences through a black-box
distance-preserving map and watches image clusters contract, the numerical
shadow of the extension theorem.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .domains import (
    BoundaryPoint,
    ConvexDomain,
    as_real_point,
    complex_hyperplane_distance,
    to_complex,
    to_real,
)
from .errors import (
    EvaluationDomainError,
    MapRangeError,
    RayEscapeError,
    SequenceSpecError,
)

__all__ = [
    "NormalRay",
    "sigma_eval",
    "AlmostGeodesicReport",
    "almost_geodesic_report",
    "default_time_grid",
    "PointSequence",
    "ray_sequence",
    "DivergenceCriteria",
    "GromovExperimentReport",
    "gromov_boundary_experiment",
    "ProbeReport",
    "boundary_limit_probe",
    "disc_automorphism",
    "ball_automorphism",
    "embed_disc_in_ball",
    "identity_map",
]

K_MAX = 100.0


# ---------------------------------------------------------------------------
# Rays
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class NormalRay:
    """The inward normal ray ``t -> xi + eps * exp(-2t) * eta``, ``t >= 0``."""

    domain: ConvexDomain
    bp: BoundaryPoint
    eps: float

    def __post_init__(self):
        if self.eps <= 0.0:
            raise ValueError("ray scale must be positive")

    def point(self, t: float) -> np.ndarray:
        return self.bp.xi + self.eps * math.exp(-2.0 * t) * self.bp.inward_normal

    def tangent_distance(self, t) -> np.ndarray:
        """Distance to the complex tangent hyperplane at ``xi``: ``eps e^{-2t}``."""
        t = np.asarray(t, dtype=float)
        pts = (
            self.bp.xi[None, :]
            + (self.eps * np.exp(-2.0 * t))[..., None] * self.bp.inward_normal[None, :]
        )
        return complex_hyperplane_distance(pts, self.bp.xi, self.bp.complex_normal)


def sigma_eval(ray: NormalRay, t: float) -> np.ndarray:
    """Evaluate the ray at time ``t``, asserting the point stays inside."""
    if t < 0.0:
        raise EvaluationDomainError(f"ray time must be nonnegative: {t}")
    z = ray.point(t)
    if not (ray.domain.rho(z) < 0.0):
        raise RayEscapeError(
            f"ray point left the domain at t={t} (scale eps={ray.eps} not certified)"
        )
    return z


def default_time_grid(T: float = 8.0, count: int = 33) -> np.ndarray:
    return np.linspace(0.0, T, count)


# ---------------------------------------------------------------------------
# Almost-geodesic report
# ---------------------------------------------------------------------------


def _minplus_closure(hi: np.ndarray) -> np.ndarray:
    """All-pairs tightening of upper bounds through the triangle inequality."""
    out = hi.copy()
    m = out.shape[0]
    for k in range(m):
        out = np.minimum(out, out[:, k : k + 1] + out[k : k + 1, :])
    return out


@dataclass(frozen=True)
class AlmostGeodesicReport:
    """Least ``K`` consistent with the sandwich inequalities on the grid.

    ``K_additive`` exponentiates the worst additive defect between the
    bracket data and ``|s-t|`` (both sides); ``K_lipschitz`` is the worst
    ``hi / |s-t|``; ``K`` is their max.  ``violations`` lists pairs whose
    lower bound exceeds ``|s-t| + log(K_MAX)``, which would contradict the
    sandwich for every admissible ``K``.
    """

    K: float
    K_additive: float
    K_lipschitz: float
    additive_defect: float
    worst_pair: tuple[float, float]
    grid: tuple
    lo: np.ndarray = field(repr=False)
    hi: np.ndarray = field(repr=False)
    violations: tuple = ()

    def defect(self, i: int, j: int) -> float:
        gap = abs(self.grid[i] - self.grid[j])
        return max(self.hi[i, j] - gap, gap - self.lo[i, j], 0.0)


def almost_geodesic_report(
    backend,
    ray: NormalRay,
    time_grid=None,
    *,
    chain_width: int = 2,
) -> AlmostGeodesicReport:
    """Measure how close the normal ray is to a unit-speed geodesic.

    With a certified backend, direct brackets are computed for grid pairs at
    most ``chain_width`` apart and the full upper matrix is closed under the
    triangle inequality; the lower matrix uses the tangent-hyperplane bound
    at the ray's own foot point, which is exact for normal rays.  With an
    oracle backend all pairs are evaluated directly.
    """
    ts = default_time_grid() if time_grid is None else np.asarray(time_grid, float)
    m = len(ts)
    pts = [sigma_eval(ray, float(t)) for t in ts]

    exact = getattr(backend, "name", "") == "oracle"
    hi = np.full((m, m), np.inf)
    lo = np.zeros((m, m))
    np.fill_diagonal(hi, 0.0)
    for i in range(m):
        for j in range(i + 1, m):
            if exact or (j - i) <= chain_width:
                br = backend.distance(pts[i], pts[j])
                hi[i, j] = hi[j, i] = br.hi
                lo[i, j] = lo[j, i] = br.lo
    if not exact:
        hi = _minplus_closure(hi)

    dists = np.asarray(ray.tangent_distance(ts), dtype=float)
    ray_lo = 0.5 * np.abs(np.log(dists[:, None] / dists[None, :]))
    lo = np.maximum(lo, ray_lo)

    gaps = np.abs(ts[:, None] - ts[None, :])
    off = ~np.eye(m, dtype=bool)
    additive = np.maximum(hi - gaps, gaps - lo)
    additive = np.maximum(additive, 0.0)
    worst_flat = int(np.argmax(np.where(off, additive, -np.inf)))
    wi, wj = divmod(worst_flat, m)
    k_add = float(np.exp(np.max(additive[off])))
    k_lip = float(np.max(hi[off] / gaps[off]))
    violations = tuple(
        (float(ts[i]), float(ts[j]))
        for i in range(m)
        for j in range(i + 1, m)
        if lo[i, j] > gaps[i, j] + math.log(K_MAX)
    )
    return AlmostGeodesicReport(
        K=max(k_add, k_lip),
        K_additive=k_add,
        K_lipschitz=k_lip,
        additive_defect=float(np.max(additive[off])),
        worst_pair=(float(ts[wi]), float(ts[wj])),
        grid=tuple(float(t) for t in ts),
        lo=lo,
        hi=hi,
        violations=violations,
    )


# ---------------------------------------------------------------------------
# Point sequences toward the boundary
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PointSequence:
    """A sequence of interior points converging to a stated boundary point."""

    points: np.ndarray  # (m, 2n)
    limit: np.ndarray  # (2n,)

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        lim = np.asarray(self.limit, dtype=float)
        gaps = np.linalg.norm(pts - lim[None, :], axis=1)
        if len(pts) < 2 or np.any(np.diff(gaps) > 1e-12) or gaps[-1] >= gaps[0]:
            raise SequenceSpecError(
                "sequence does not converge to the stated boundary point"
            )
        pts.setflags(write=False)
        lim.setflags(write=False)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "limit", lim)

    def __len__(self):
        return len(self.points)


def ray_sequence(domain: ConvexDomain, bp: BoundaryPoint, depths) -> PointSequence:
    """Points ``xi + depth * eta`` for a decreasing ladder of depths."""
    depths = np.asarray(list(depths), dtype=float)
    pts = bp.xi[None, :] + depths[:, None] * bp.inward_normal[None, :]
    inside = np.asarray(domain.rho(pts)) < 0.0
    if not np.all(inside):
        raise RayEscapeError("a sequence depth left the domain")
    return PointSequence(points=pts, limit=bp.xi)


# ---------------------------------------------------------------------------
# Gromov boundary experiment
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DivergenceCriteria:
    """Finite-data trend criteria.

    ``diverging``: the diagonal lower brackets cross every ladder threshold
    and never return below it (suffix minima).  ``bounded``: every upper
    bracket stays below ``cap_factor`` times the largest product seen in the
    first quarter of the matrix (plus an absolute floor for exact zeros).
    """

    ladder: tuple = (1.0, 2.0, 3.0, 4.0)
    cap_factor: float = 1.5
    cap_floor: float = 1e-9


@dataclass(frozen=True)
class GromovExperimentReport:
    classification: str  # "diverging" | "bounded" | "inconclusive"
    lo: np.ndarray = field(repr=False)
    hi: np.ndarray = field(repr=False)
    diagonal_lo: tuple
    cap: float
    worst_pair: tuple
    base_point: np.ndarray = field(repr=False)


def gromov_boundary_experiment(
    backend,
    seq_p: PointSequence,
    seq_q: PointSequence,
    o,
    criteria: DivergenceCriteria | None = None,
) -> GromovExperimentReport:
    """Matrix of Gromov-product brackets with a trend classification."""
    if criteria is None:
        criteria = DivergenceCriteria()
    if len(seq_p) != len(seq_q):
        raise SequenceSpecError("sequences must share a length for classification")
    o = np.asarray(as_real_point(o), dtype=float)
    m = len(seq_p)

    # distances to the base point are shared across rows/columns: cache them
    po = [backend.distance(seq_p.points[i], o) for i in range(m)]
    qo = [backend.distance(seq_q.points[j], o) for j in range(m)]
    lo = np.zeros((m, m))
    hi = np.zeros((m, m))
    for i in range(m):
        for j in range(m):
            pq = backend.distance(seq_p.points[i], seq_q.points[j])
            lo[i, j] = max(0.0, 0.5 * (po[i].lo + qo[j].lo - pq.hi))
            hi[i, j] = max(lo[i, j], 0.5 * (po[i].hi + qo[j].hi - pq.lo))

    diag = np.diagonal(lo)
    suffix_min = np.minimum.accumulate(diag[::-1])[::-1]
    crossed = all(float(np.max(suffix_min)) >= h for h in criteria.ladder)

    quarter = max(1, m // 4)
    cap = criteria.cap_factor * float(np.max(hi[:quarter, :quarter])) + criteria.cap_floor
    stays_bounded = bool(np.max(hi) <= cap)

    if crossed:
        classification = "diverging"
    elif stays_bounded:
        classification = "bounded"
    else:
        classification = "inconclusive"
    worst = np.unravel_index(int(np.argmax(hi)), hi.shape)
    return GromovExperimentReport(
        classification=classification,
        lo=lo,
        hi=hi,
        diagonal_lo=tuple(float(v) for v in diag),
        cap=cap,
        worst_pair=(int(worst[0]), int(worst[1])),
        base_point=o,
    )


# ---------------------------------------------------------------------------
# Black-box boundary-limit probe
# ---------------------------------------------------------------------------


def identity_map(z):
    return np.asarray(z, dtype=complex)


def disc_automorphism(a: complex, theta: float = 0.0):
    """``z -> e^{i theta} (z - a) / (1 - conj(a) z)`` on the unit disc."""
    if abs(a) >= 1.0:
        raise ValueError("automorphism parameter must lie in the unit disc")

    def phi(z):
        z = np.asarray(z, dtype=complex)
        return np.exp(1j * theta) * (z - a) / (1.0 - np.conj(a) * z)

    return phi


def ball_automorphism(a):
    """The Mobius automorphism of the unit ball swapping ``0`` and ``a``."""
    a = np.asarray(a, dtype=complex)
    na2 = float(np.vdot(a, a).real)
    if na2 >= 1.0:
        raise ValueError("automorphism parameter must lie in the unit ball")
    if na2 == 0.0:
        return identity_map
    s = math.sqrt(1.0 - na2)

    def phi(z):
        z = np.asarray(z, dtype=complex)
        inner = complex(np.sum(z * np.conj(a)))
        proj = (inner / na2) * a
        orth = z - proj
        return (a - proj - s * orth) / (1.0 - inner)

    return phi


def embed_disc_in_ball(n: int = 2):
    """The isometric embedding ``z -> (z, 0, ..., 0)`` of the disc."""

    def phi(z):
        z = np.asarray(z, dtype=complex).ravel()
        out = np.zeros(n, dtype=complex)
        out[0] = z[0]
        return out

    return phi


@dataclass(frozen=True)
class ProbeReport:
    """Cluster contraction of an image sequence under a distance-preserving map.

    ``tail_diameters[k]`` is the max pairwise Euclidean diameter of the image
    tail from index ``k`` on; extension evidence is the diameters falling
    below tolerance.  ``isometry_defect`` is the largest bracket-level
    disagreement between source and image distances over sampled pairs
    (zero when the intervals overlap, as they must for an isometry).
    """

    tail_diameters: tuple
    isometry_defect: float
    limit_estimate: np.ndarray = field(repr=False)
    converged: bool = False


def boundary_limit_probe(
    F,
    seq: PointSequence,
    target: ConvexDomain,
    source_backend,
    target_backend,
    *,
    tol: float = 1e-3,
    defect_pairs: int = 10,
) -> ProbeReport:
    """Push a boundary-converging sequence through ``F`` and watch the images.

    ``F`` acts on complex points of the source and must map every sample into
    the target domain (``MapRangeError`` otherwise).  Reports tail diameters
    of the image sequence and the bracket-level isometry defect
    ``max(0, lo_src - hi_img, lo_img - hi_src)`` over sampled pairs.
    """
    zs = to_complex(seq.points)
    images_c = [np.atleast_1d(F(z)) for z in zs]
    images = np.asarray([to_real(w) for w in images_c])
    if not np.all(np.asarray(target.rho(images)) < 0.0):
        raise MapRangeError("the map sent a sample outside the target domain")

    m = len(images)
    tails = []
    for k in range(m - 1):
        block = images[k:]
        diffs = block[:, None, :] - block[None, :, :]
        tails.append(float(np.max(np.linalg.norm(diffs, axis=-1))))

    rng = np.random.default_rng(0)
    idx = rng.choice(m, size=(min(defect_pairs, m * (m - 1) // 2), 2))
    idx = idx[idx[:, 0] != idx[:, 1]]
    defect = 0.0
    for i, j in idx:
        src = source_backend.distance(seq.points[i], seq.points[j])
        img = target_backend.distance(images[i], images[j])
        defect = max(defect, src.lo - img.hi, img.lo - src.hi, 0.0)
    return ProbeReport(
        tail_diameters=tuple(tails),
        isometry_defect=float(defect),
        limit_estimate=images[-1],
        converged=bool(tails and tails[-1] < tol),
    )
