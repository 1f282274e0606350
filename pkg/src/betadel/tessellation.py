"""Planar (d=3) beta- and beta'-Delaunay tessellations and their Laguerre duals.

Construction goes through the lifted lower convex hull: a site (v, h) maps to
(v, |v|^2 + h) in R^3, and downward-facing hull facets are exactly the
empty-paraboloid triangles.  A brute-force enumeration of all triples serves
as an independent oracle for small inputs, together with a 1D (d=2) variant.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import ConvexHull, QhullError
from scipy.special import gammaln

from .constants import Family, ModelParams, ParameterError, ball_volume, void_rate
from .geometry import DegeneracyError, circumparaboloid_batch
from .samplers import RandomStream, sample_poisson_process

INTERIOR = "Interior"
BOUNDARY_UNCERTAIN = "BoundaryUncertain"


class EmptySiteSetError(RuntimeError):
    pass


@dataclass(frozen=True)
class WindowConfig:
    """Finite-window truncation of the stationary model.

    target_box: ((x0, x1), (y0, y1)); sites are generated on the box inflated
    by guard_margin.  Beta models truncate heights at h_max; BetaPrime models
    need eps > 0 (points accumulate at h = 0) and a depth h_depth > 0 so that
    heights cover [-h_depth, -eps].
    """

    target_box: tuple
    guard_margin: float
    h_max: float | None = None
    eps: float | None = None
    h_depth: float | None = None
    r_max: float | None = None

    def __post_init__(self):
        if self.guard_margin <= 0:
            raise ParameterError("guard_margin must be > 0")


def default_window(p: ModelParams, target_box, eps: float | None = None,
                   h_depth: float | None = None,
                   tail_tol: float = 1e-6) -> WindowConfig:
    """Window sized so Interior-flagged simplices are certified.

    Beta: r_max from the void-probability bound exp(-m r^q) < 1e-12; heights
    above h_max = r_max^2 cannot invalidate any simplex with r <= r_max.

    BetaPrime: unseen points below -h_depth can in principle invalidate any
    simplex (long-range heights), so certification is probabilistic: h_depth
    is chosen so the expected number of such points inside a candidate
    paraboloid is < tail_tol, and guard_margin = sqrt(h_depth) bounds the
    spatial reach of the sampled depth range.
    """
    m = void_rate(p)
    L = math.log(1e12)
    if p.family is Family.Beta:
        r_max = (L / m) ** (1.0 / p.height_exponent)
        return WindowConfig(target_box=tuple(map(tuple, target_box)),
                            guard_margin=2.0 * r_max, h_max=r_max ** 2,
                            r_max=r_max)
    if p.family is Family.BetaPrime:
        if eps is None or not eps > 0:
            raise ParameterError("BetaPrime window requires eps > 0 "
                                 "(the process accumulates at h = 0)")
        if h_depth is None:
            # gamma kappa_{d-1} c' H^{(d+1)/2-beta} / (beta-(d+1)/2) <= tail_tol
            d, beta = p.d, p.beta
            log_c = (gammaln(beta) - (d / 2) * math.log(math.pi)
                     - gammaln(beta - d / 2))
            pref = p.gamma * ball_volume(d - 1) * math.exp(log_c) \
                / (beta - (d + 1) / 2)
            h_depth = (pref / tail_tol) ** (1.0 / (beta - (d + 1) / 2))
        return WindowConfig(target_box=tuple(map(tuple, target_box)),
                            guard_margin=math.sqrt(h_depth),
                            eps=eps, h_depth=h_depth,
                            r_max=(m / L) ** (1.0 / (2 * p.beta - p.d - 1)))
    raise ParameterError("tessellation windows are defined for Beta/BetaPrime")


def _deep_tail_mass(p: ModelParams, depth: float) -> float:
    """Upper bound on the intensity mass of any downward paraboloid below
    height -depth: gamma kappa_{d-1} c' depth^{(d+1)/2-beta} / (beta-(d+1)/2)."""
    d, beta = p.d, p.beta
    log_c = gammaln(beta) - (d / 2) * math.log(math.pi) - gammaln(beta - d / 2)
    return (p.gamma * ball_volume(d - 1) * math.exp(log_c)
            * depth ** ((d + 1) / 2 - beta) / (beta - (d + 1) / 2))


@dataclass
class TriangulationResult:
    sites_v: np.ndarray          # (n, 2)
    sites_h: np.ndarray          # (n,)
    simplices: np.ndarray        # (m, 3) sorted site indices
    apex_w: np.ndarray           # (m, 2)
    apex_t: np.ndarray           # (m,)
    apex_r: np.ndarray           # (m,)
    flags: np.ndarray            # (m,) bool: True = Interior
    dual_cells: dict = field(default_factory=dict)  # site index -> (k, 2) apexes
    empty_sites: list = field(default_factory=list)
    window: WindowConfig | None = None

    @property
    def interior_simplices(self) -> np.ndarray:
        return self.simplices[self.flags]

    def flag_names(self):
        return np.where(self.flags, INTERIOR, BOUNDARY_UNCERTAIN)


def _lower_hull_triangles(v: np.ndarray, h: np.ndarray) -> np.ndarray:
    """Index triples of downward-facing facets of the lifted hull."""
    n = v.shape[0]
    if n < 3:
        raise EmptySiteSetError(f"need at least 3 sites, got {n}")
    lifted = np.column_stack([v, np.square(v).sum(axis=1) + h])
    if n == 3:
        return np.sort(np.array([[0, 1, 2]]), axis=1)
    try:
        hull = ConvexHull(lifted, qhull_options="Qt")
    except QhullError as exc:
        raise DegeneracyError(f"lifted hull degenerate: {exc}") from exc
    lower = hull.equations[:, 2] < -1e-12
    return np.sort(hull.simplices[lower], axis=1)


def build_tessellation(p: ModelParams, w: WindowConfig,
                       s: RandomStream) -> TriangulationResult:
    """Construct the d=3 tessellation on the window's inflated box."""
    if p.d != 3:
        raise ParameterError("tessellation construction is implemented for d=3")
    (x0, x1), (y0, y1) = w.target_box
    g = w.guard_margin
    box = [(x0 - g, x1 + g), (y0 - g, y1 + g)]
    if p.family is Family.Beta:
        h_range = (0.0, w.h_max)
    elif p.family is Family.BetaPrime:
        if w.eps is None or not w.eps > 0:
            raise ParameterError("BetaPrime tessellation requires eps > 0")
        h_range = (-w.h_depth, -w.eps)
    else:
        raise ParameterError("tessellation requires Beta or BetaPrime family")
    v, h = sample_poisson_process(p, box, h_range, s)
    return triangulate_sites(p, v, h, w)


def triangulate_sites(p: ModelParams, v: np.ndarray, h: np.ndarray,
                      w: WindowConfig) -> TriangulationResult:
    """Lifted-hull triangulation + apexes + flags + dual cells for given sites."""
    tris = _lower_hull_triangles(v, h)
    apex_w, apex_t, ok = circumparaboloid_batch(v[tris], h[tris])
    if not np.all(ok):
        raise DegeneracyError("degenerate triple on the lower hull")
    kappa_t = p.kappa * apex_t
    apex_r = np.sqrt(np.maximum(kappa_t, 0.0))

    (x0, x1), (y0, y1) = w.target_box
    g = w.guard_margin
    dist_boundary = np.minimum.reduce([
        apex_w[:, 0] - (x0 - g), (x1 + g) - apex_w[:, 0],
        apex_w[:, 1] - (y0 - g), (y1 + g) - apex_w[:, 1]])
    flags = kappa_t >= 0
    if p.family is Family.Beta:
        r_reach = apex_r  # unseen spatial sites need |v - w| < r to interfere
        if w.r_max is not None:
            flags &= apex_r <= w.r_max
    else:
        # unseen spatial sites with |h| <= h_depth interfere only within
        # sqrt(h_depth - r^2) of the apex; eps-truncation is exact for r^2 >= eps
        r_reach = np.sqrt(np.maximum(w.h_depth - apex_r ** 2, 0.0))
        flags &= apex_r ** 2 >= w.eps
        if w.r_max is not None:
            flags &= apex_r >= w.r_max
    flags &= dist_boundary >= r_reach

    # dual Laguerre cells: for each site, incident apexes ordered by angle
    dual_cells: dict[int, np.ndarray] = {}
    n = v.shape[0]
    used = np.zeros(n, dtype=bool)
    incident: dict[int, list[int]] = {}
    for t_idx, tri in enumerate(tris):
        for i in tri:
            incident.setdefault(int(i), []).append(t_idx)
            used[i] = True
    for i, t_list in incident.items():
        ws = apex_w[t_list]
        ang = np.arctan2(ws[:, 1] - v[i, 1], ws[:, 0] - v[i, 0])
        dual_cells[i] = ws[np.argsort(ang, kind="stable")]
    empty_sites = np.flatnonzero(~used).tolist()

    return TriangulationResult(sites_v=v, sites_h=h, simplices=tris,
                               apex_w=apex_w, apex_t=apex_t, apex_r=apex_r,
                               flags=flags, dual_cells=dual_cells,
                               empty_sites=empty_sites, window=w)


def brute_force_delaunay(v: np.ndarray, h: np.ndarray, tri) -> bool:
    """True iff the triple's circumparaboloid strictly contains no other site."""
    tri = np.asarray(tri)
    w, t, ok = circumparaboloid_batch(v[tri][None], h[tri][None])
    if not ok[0]:
        raise DegeneracyError("affinely dependent triple")
    others = np.setdiff1d(np.arange(v.shape[0]), tri)
    inside = h[others] < t[0] - np.square(v[others] - w[0]).sum(axis=1)
    return not bool(inside.any())


def brute_force_delaunay_all(v: np.ndarray, h: np.ndarray) -> np.ndarray:
    """All empty-paraboloid triples by O(n^4) enumeration (n <= 500)."""
    n = v.shape[0]
    if n > 500:
        raise ValueError("full enumeration limited to n <= 500")
    if n < 3:
        raise EmptySiteSetError("need at least 3 sites")
    triples = np.array(list(itertools.combinations(range(n), 3)))
    v_sq = np.square(v).sum(axis=1)
    out = []
    chunk = max(1, 2 * 10 ** 7 // max(n, 1))
    for start in range(0, triples.shape[0], chunk):
        tr = triples[start:start + chunk]
        w, t, ok = circumparaboloid_batch(v[tr], h[tr])
        # |v - w|^2 = |v|^2 - 2 v.w + |w|^2, with the cross term via BLAS
        margin = (t - np.square(w).sum(-1))[:, None] + 2.0 * (w @ v.T) \
            - (v_sq + h)[None, :]
        inside = margin > 0.0  # (c, n): strictly inside the paraboloid
        # the triple's own sites sit on the boundary; mask them out
        rows = np.arange(tr.shape[0])[:, None]
        inside[rows, tr] = False
        empty = ok & ~inside.any(axis=1)
        out.append(tr[empty])
    return np.sort(np.concatenate(out), axis=1) if out else np.empty((0, 3), int)


def brute_force_delaunay_1d(v: np.ndarray, h: np.ndarray) -> np.ndarray:
    """d=2 oracle: empty-parabola pairs for sites on the line."""
    n = v.shape[0]
    pairs = np.array(list(itertools.combinations(range(n), 2)))
    v1, v2 = v[pairs[:, 0]], v[pairs[:, 1]]
    h1, h2 = h[pairs[:, 0]], h[pairs[:, 1]]
    dv = 2.0 * (v2 - v1)
    ok = np.abs(dv) > 1e-300
    w = (v2 ** 2 - v1 ** 2 + h2 - h1) / np.where(ok, dv, 1.0)
    t = h1 + (v1 - w) ** 2
    inside = h[None, :] < t[:, None] - (v[None, :] - w[:, None]) ** 2
    rows = np.arange(pairs.shape[0])[:, None]
    inside[rows, pairs] = False
    return np.sort(pairs[ok & ~inside.any(axis=1)], axis=1)


@dataclass
class NormalityReport:
    n_interior_vertices: int
    n_normal: int
    violations: list
    face_to_face: bool

    @property
    def all_normal(self) -> bool:
        return self.n_normal == self.n_interior_vertices and self.face_to_face


def audit_normality(t: TriangulationResult, tol: float = 1e-9) -> NormalityReport:
    """Check that each interior apex has exactly 3 minimal-power sites and
    that interior triangles meet face-to-face (each edge in <= 2 triangles)."""
    idx = np.flatnonzero(t.flags)
    violations = []
    n_normal = 0
    v, h = t.sites_v, t.sites_h
    v_sq = np.square(v).sum(axis=1) + h
    chunk = max(1, 10 ** 7 // max(v.shape[0], 1))
    for start in range(0, idx.shape[0], chunk):
        ids = idx[start:start + chunk]
        w = t.apex_w[ids]
        # pow_i(w) = |v_i|^2 - 2 v_i.w + |w|^2 + h_i
        power = v_sq[None, :] - 2.0 * (w @ v.T) + np.square(w).sum(-1)[:, None]
        pmin = power.min(axis=1)
        n_min = np.sum(power <= (pmin * 1.0 + tol * (1.0 + np.abs(pmin)))[:, None],
                       axis=1)
        n_normal += int(np.sum(n_min == 3))
        for j in np.flatnonzero(n_min != 3):
            violations.append((int(ids[j]), int(n_min[j])))
    edge_count: dict[tuple, int] = {}
    for tri in t.simplices[t.flags]:
        for a, b in itertools.combinations(map(int, tri), 2):
            edge_count[(a, b)] = edge_count.get((a, b), 0) + 1
    face_to_face = all(c <= 2 for c in edge_count.values())
    return NormalityReport(n_interior_vertices=len(idx), n_normal=n_normal,
                           violations=violations, face_to_face=face_to_face)


def empirical_face_intensities(t: TriangulationResult, counting_box):
    """(gamma0_hat, gamma1_hat, gamma2_hat) by centroid-in-box counting of the
    0-, 1- and 2-faces of the Interior triangulation."""
    (x0, x1), (y0, y1) = counting_box
    area = (x1 - x0) * (y1 - y0)
    tris = t.simplices[t.flags]
    if tris.shape[0] == 0:
        return 0.0, 0.0, 0.0
    v = t.sites_v

    def in_box(pts):
        return ((pts[:, 0] >= x0) & (pts[:, 0] < x1)
                & (pts[:, 1] >= y0) & (pts[:, 1] < y1))

    verts = np.unique(tris)
    g0 = in_box(v[verts]).sum() / area
    edges = np.unique(np.concatenate([tris[:, [0, 1]], tris[:, [0, 2]],
                                      tris[:, [1, 2]]]), axis=0)
    mid = 0.5 * (v[edges[:, 0]] + v[edges[:, 1]])
    g1 = in_box(mid).sum() / area
    cent = v[tris].mean(axis=1)
    g2 = in_box(cent).sum() / area
    return float(g0), float(g1), float(g2)
