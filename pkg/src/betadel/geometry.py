"""Deterministic computational geometry.

Simplex volumes, internal angles, the downward-paraboloid apex solve, power
function evaluation, and in-paraboloid predicates.  Heights double as Laguerre
weights: pow(w, (v, h)) = |w - v|^2 + h, and the apex (w, t) of the
circumparaboloid of d sites satisfies t - |v_i - w|^2 = h_i for each of them.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import TYPE_CHECKING, Sequence

import numpy as np
import scipy.linalg

if TYPE_CHECKING:  # pragma: no cover
    from .samplers import RandomStream


class DegeneracyError(ValueError):
    """Affinely dependent input where independence is required."""


@dataclass(frozen=True)
class Site:
    v: np.ndarray
    h: float


@dataclass(frozen=True)
class ParaboloidApex:
    w: np.ndarray
    t: float

    @property
    def r(self) -> float:
        # t = kappa r^2; r is the apex "radius" regardless of sign convention
        return math.sqrt(abs(self.t))


def simplex_volume(vertices) -> float:
    """Volume |det[v_2-v_1, ..., v_d-v_1]| / (d-1)! of d points in R^{d-1}."""
    v = np.asarray(vertices, dtype=float)
    d = v.shape[0]
    if v.shape != (d, d - 1):
        raise ValueError(f"expected d points in R^(d-1), got shape {v.shape}")
    edges = v[1:] - v[0]
    return abs(np.linalg.det(edges)) / math.factorial(d - 1)


def simplex_volumes(batch: np.ndarray) -> np.ndarray:
    """Vectorized simplex_volume for a batch of shape (n, d, d-1)."""
    d = batch.shape[1]
    edges = batch[:, 1:, :] - batch[:, :1, :]
    return np.abs(np.linalg.det(edges)) / math.factorial(d - 1)


def embedded_simplex_volumes(batch: np.ndarray) -> np.ndarray:
    """(k-1)-volumes of simplices with k vertices embedded in R^m, m >= k-1.

    Gram-determinant form: sqrt(det(E E^T)) / (k-1)! with edge matrix E.
    """
    edges = batch[:, 1:, :] - batch[:, :1, :]
    gram = edges @ np.swapaxes(edges, -1, -2)
    k = batch.shape[1]
    return np.sqrt(np.abs(np.linalg.det(gram))) / math.factorial(k - 1)


def power_of_point(w, site: Site) -> float:
    """Laguerre power pow(w, (v, h)) = |w - v|^2 + h."""
    w = np.asarray(w, dtype=float)
    return float(np.sum((w - site.v) ** 2) + site.h)


def circumparaboloid(sites: Sequence[Site]) -> ParaboloidApex:
    """Apex of the unique downward paraboloid through d sites.

    Solves 2 <v_i - v_1, w> = |v_i|^2 - |v_1|^2 + h_i - h_1, then
    t = h_1 + |v_1 - w|^2.  Raises DegeneracyError when the spatial
    coordinates are affinely dependent (pivot below 1e-12 x row norm).
    """
    v = np.asarray([s.v for s in sites], dtype=float)
    h = np.asarray([s.h for s in sites], dtype=float)
    d = v.shape[0]
    if v.shape != (d, d - 1):
        raise ValueError(f"expected d sites with spatial dim d-1, got {v.shape}")
    # Eliminating t from t - |v_i - w|^2 = h_i gives
    # 2 <v_i - v_1, w> = |v_i|^2 - |v_1|^2 + h_i - h_1.
    A = 2.0 * (v[1:] - v[0])
    b = (np.sum(v[1:] ** 2, axis=1) - np.sum(v[0] ** 2)) + (h[1:] - h[0])
    lu, piv = scipy.linalg.lu_factor(A, check_finite=False)
    row_norms = np.linalg.norm(A, axis=1)
    pivots = np.abs(np.diag(lu))
    if np.any(pivots < 1e-12 * max(row_norms.max(), 1e-300)):
        raise DegeneracyError("affinely dependent spatial coordinates")
    w = scipy.linalg.lu_solve((lu, piv), b, check_finite=False)
    t = float(h[0] + np.sum((v[0] - w) ** 2))
    return ParaboloidApex(w=w, t=t)


def circumparaboloid_batch(v: np.ndarray, h: np.ndarray):
    """Vectorized apex solve for triples in the plane.

    v: (n, 3, 2) spatial coordinates, h: (n, 3) heights.  Returns
    (w (n, 2), t (n,), ok (n,) bool); ok is False for degenerate triples.
    """
    A = 2.0 * (v[:, 1:, :] - v[:, :1, :])  # (n, 2, 2)
    b = (np.square(v[:, 1:, :]).sum(-1) - np.square(v[:, :1, :]).sum(-1)
         + h[:, 1:] - h[:, :1])  # (n, 2)
    det = A[:, 0, 0] * A[:, 1, 1] - A[:, 0, 1] * A[:, 1, 0]
    scale = np.abs(A).sum((-1, -2)) + 1e-300
    ok = np.abs(det) > 1e-12 * scale ** 2
    det_safe = np.where(ok, det, 1.0)
    w = np.empty((v.shape[0], 2))
    w[:, 0] = (b[:, 0] * A[:, 1, 1] - b[:, 1] * A[:, 0, 1]) / det_safe
    w[:, 1] = (A[:, 0, 0] * b[:, 1] - A[:, 1, 0] * b[:, 0]) / det_safe
    t = h[:, 0] + np.square(v[:, 0, :] - w).sum(-1)
    return w, t, ok


def strictly_inside_paraboloid(site: Site, apex: ParaboloidApex) -> bool:
    """True iff the site lies strictly inside the downward paraboloid.

    Interior: h < t - |v - w|^2; exact ties are NOT inside.
    """
    return site.h < apex.t - float(np.sum((site.v - apex.w) ** 2))


def _face_complement_frame(vertices: np.ndarray, face: Sequence[int]):
    """Orthonormal basis of the orthogonal complement of aff(F) within R^{d-1},
    plus the projections of the off-face vertices onto it (cone generators)."""
    face = list(face)
    others = [i for i in range(vertices.shape[0]) if i not in face]
    x0 = vertices[face].mean(axis=0)
    m = vertices.shape[1]
    if len(face) > 1:
        span = (vertices[face[1:]] - vertices[face[0]]).T  # (m, f-1)
        q_span, _ = np.linalg.qr(span)
        proj = np.eye(m) - q_span @ q_span.T
    else:
        proj = np.eye(m)
    # complement basis from the projector's column space
    u, sv, _ = np.linalg.svd(proj)
    comp = u[:, sv > 0.5]  # (m, c)
    gen = (vertices[others] - x0) @ comp  # (n_others, c)
    return comp, gen


def internal_angle(sx, face: Sequence[int], n_dirs: int = 10 ** 5,
                   s: "RandomStream | None" = None) -> float:
    """Normalized internal angle of the simplex at the face conv(F).

    |F| = d gives 1, |F| = d-1 gives 1/2 exactly; d = 3 vertex angles are
    exact planar angles; all other cases are Monte Carlo over uniform
    directions in the orthogonal complement of aff(F).
    """
    v = np.asarray(sx, dtype=float)
    d = v.shape[0]
    face = sorted(set(face))
    if not 1 <= len(face) <= d:
        raise ValueError("face must select between 1 and d vertices")
    if simplex_volume(v) <= 0:
        raise DegeneracyError("degenerate simplex")
    f = len(face)
    if f == d:
        return 1.0
    if f == d - 1:
        return 0.5
    if d == 3 and f == 1:
        i = face[0]
        others = [j for j in range(3) if j != i]
        e1 = v[others[0]] - v[i]
        e2 = v[others[1]] - v[i]
        cosang = np.dot(e1, e2) / (np.linalg.norm(e1) * np.linalg.norm(e2))
        return math.acos(float(np.clip(cosang, -1.0, 1.0))) / (2 * math.pi)
    if s is None:
        raise ValueError("Monte Carlo angle estimation needs a RandomStream")
    _, gen = _face_complement_frame(v, face)
    c = gen.shape[1]
    if gen.shape[0] != c:
        raise DegeneracyError("tangent cone is not simplicial")
    ainv = np.linalg.inv(gen.T)  # solve gen^T x = u
    g = s.generator.standard_normal((n_dirs, c))
    u = g / np.linalg.norm(g, axis=1, keepdims=True)
    x = u @ ainv.T
    return float(np.mean(np.all(x >= 0, axis=1)))


def angle_sum(sx, k: int, n_dirs: int = 10 ** 5,
              s: "RandomStream | None" = None) -> float:
    """sigma_k: sum of internal angles over all k-vertex faces."""
    v = np.asarray(sx, dtype=float)
    d = v.shape[0]
    if not 1 <= k <= d:
        raise ValueError("k must be in 1..d")
    if k == d:
        return 1.0
    if k == d - 1:
        return d / 2.0
    total = 0.0
    for idx, face in enumerate(itertools.combinations(range(d), k)):
        sub = None if s is None else s.substream(idx)
        total += internal_angle(v, face, n_dirs=n_dirs, s=sub)
    return total


def vertex_angle_sums_batch(batch: np.ndarray, n_dirs: int,
                            s: "RandomStream") -> np.ndarray:
    """sigma_1 for a batch of simplices (n, d, d-1) by Monte Carlo cone tests.

    Shares one direction sample per (simplex chunk, vertex); the tangent cone
    at a vertex is full-dimensional, so u lies in it iff the square system
    [v_j - v_i] x = u has x >= 0.
    """
    n, d, q = batch.shape
    gens = np.empty((n, d, q, q))
    for i in range(d):
        others = [j for j in range(d) if j != i]
        gens[:, i] = batch[:, others, :] - batch[:, i:i + 1, :]
    # x solves gens^T x = u  ->  x = u @ inv(gens)^T ... handle via inv once
    ainv = np.linalg.inv(np.swapaxes(gens, -1, -2))  # (n, d, q, q)
    g = s.generator.standard_normal((n_dirs, q))
    u = g / np.linalg.norm(g, axis=1, keepdims=True)
    sums = np.empty(n)
    chunk = max(1, int(2 * 10 ** 7 / (n_dirs * d * q)))
    for start in range(0, n, chunk):
        a = ainv[start:start + chunk]  # (c, d, q, q)
        x = np.einsum("cdij,nj->cdni", a, u)
        inside = np.all(x >= 0, axis=-1)  # (c, d, n_dirs)
        sums[start:start + chunk] = inside.mean(axis=-1).sum(axis=-1)
    return sums
