import math

import numpy as np
import pytest

from betadel.constants import Family, ModelParams, ParameterError
from betadel.samplers import RandomStream
from betadel.tessellation import (BOUNDARY_UNCERTAIN, INTERIOR,
                                  EmptySiteSetError, WindowConfig,
                                  audit_normality, brute_force_delaunay,
                                  brute_force_delaunay_1d,
                                  brute_force_delaunay_all, build_tessellation,
                                  default_window, empirical_face_intensities,
                                  triangulate_sites)


def beta(b=0.0, nu=0.0, gamma=1.0):
    return ModelParams(Family.Beta, 3, b, nu=nu, gamma=gamma)


def bprime(b=4.0, nu=0.0, gamma=1.0):
    return ModelParams(Family.BetaPrime, 3, b, nu=nu, gamma=gamma)


def classical(gamma=1.0):
    return ModelParams(Family.ClassicalDelaunay, 3, -1.0, gamma=gamma)


class TestWindows:
    def test_beta_window_fields(self):
        w = default_window(beta(2.0), [(0, 5), (0, 5)])
        assert w.guard_margin >= 2 * w.r_max
        assert w.h_max == pytest.approx(w.r_max ** 2)
        assert w.eps is None and w.h_depth is None

    def test_beta_prime_window_fields(self):
        w = default_window(bprime(5.0), [(0, 3), (0, 3)], eps=0.1)
        assert w.eps == 0.1 and w.h_depth is not None
        assert w.guard_margin == pytest.approx(math.sqrt(w.h_depth))

    def test_beta_prime_requires_eps(self):
        with pytest.raises(ParameterError):
            default_window(bprime(5.0), [(0, 3), (0, 3)])

    def test_window_immutable(self):
        w = default_window(beta(0.0), [(0, 2), (0, 2)])
        with pytest.raises(Exception):
            w.eps = 1.0


class TestHullVsBruteForce:
    @pytest.mark.parametrize("seed", range(8))
    def test_matches_enumeration_beta_heights(self, seed):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(10, 55))
        v = rng.uniform(0, 4, (n, 2))
        h = rng.uniform(0, 1.5, n)
        t = triangulate_sites(beta(0.0), v, h,
                              default_window(beta(0.0), [(1, 3), (1, 3)]))
        hull_set = {tuple(s) for s in t.simplices}
        bf = brute_force_delaunay_all(v, h)
        assert hull_set == {tuple(s) for s in bf}

    @pytest.mark.parametrize("seed", [100, 101, 102])
    def test_matches_enumeration_negative_heights(self, seed):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(12, 40))
        v = rng.uniform(0, 4, (n, 2))
        h = -rng.uniform(0.05, 3.0, n)
        w = default_window(bprime(4.0), [(1, 3), (1, 3)], eps=0.05)
        t = triangulate_sites(bprime(4.0), v, h, w)
        assert {tuple(s) for s in t.simplices} == \
            {tuple(s) for s in brute_force_delaunay_all(v, h)}

    def test_single_simplex_oracle_agrees(self):
        rng = np.random.default_rng(9)
        v = rng.uniform(0, 3, (25, 2))
        h = rng.uniform(0, 1.0, 25)
        t = triangulate_sites(beta(0.0), v, h,
                              default_window(beta(0.0), [(0, 3), (0, 3)]))
        for s in t.simplices[:10]:
            assert brute_force_delaunay(v, h, tuple(s))

    def test_line_oracle_classical(self):
        # zero heights on the line: neighbours are consecutive sites
        v = np.array([0.3, 1.1, 2.0, 2.9, 4.2])
        h = np.zeros(5)
        pairs = brute_force_delaunay_1d(v, h)
        assert sorted(map(tuple, pairs)) == [(0, 1), (1, 2), (2, 3), (3, 4)]


class TestBuildAndProperties:
    def test_build_beta_deterministic(self):
        p = beta(0.0, gamma=2.0)
        w = default_window(p, [(0, 6), (0, 6)])
        t1 = build_tessellation(p, w, RandomStream(42, 0))
        t2 = build_tessellation(p, w, RandomStream(42, 0))
        assert np.array_equal(t1.simplices, t2.simplices)
        assert np.array_equal(t1.apex_t, t2.apex_t)

    def test_apex_consistency(self):
        p = beta(1.0, gamma=2.0)
        w = default_window(p, [(0, 6), (0, 6)])
        t = build_tessellation(p, w, RandomStream(1, 0))
        # every simplex vertex lies on its apex paraboloid
        for k in range(min(50, len(t.simplices))):
            idx = t.simplices[k]
            resid = (t.apex_t[k]
                     - np.sum((t.sites_v[idx] - t.apex_w[k]) ** 2, axis=1)
                     - t.sites_h[idx])
            assert np.max(np.abs(resid)) < 1e-8
        assert np.allclose(t.apex_r,
                           np.sqrt(np.maximum(p.kappa * t.apex_t, 0.0)))

    def test_flags_and_interior_subset(self):
        p = beta(0.0, gamma=2.0)
        t = build_tessellation(p, default_window(p, [(0, 6), (0, 6)]),
                               RandomStream(2, 0))
        assert t.flags.dtype == bool and t.flags.any()
        assert len(t.interior_simplices) == int(t.flags.sum())
        assert set(t.flag_names()) <= {INTERIOR, BOUNDARY_UNCERTAIN}

    def test_simplices_sorted_rows(self):
        p = beta(0.0, gamma=2.0)
        t = build_tessellation(p, default_window(p, [(0, 5), (0, 5)]),
                               RandomStream(3, 0))
        assert np.all(np.diff(t.simplices, axis=1) > 0)

    def test_dual_cells_angle_ordered(self):
        p = beta(0.0, gamma=3.0)
        t = build_tessellation(p, default_window(p, [(0, 5), (0, 5)]),
                               RandomStream(4, 0))
        assert t.dual_cells  # nonempty
        for site, cell in list(t.dual_cells.items())[:20]:
            ang = np.arctan2(cell[:, 1] - t.sites_v[site, 1],
                             cell[:, 0] - t.sites_v[site, 0])
            assert np.all(np.diff(ang) > 0)

    def test_too_few_sites_raises(self):
        with pytest.raises(EmptySiteSetError):
            triangulate_sites(beta(0.0), np.zeros((2, 2)), np.zeros(2),
                              default_window(beta(0.0), [(0, 1), (0, 1)]))

    def test_beta_prime_build(self):
        p = bprime(4.0, gamma=1.0)
        w = default_window(p, [(0, 2), (0, 2)], eps=0.3)
        t = build_tessellation(p, w, RandomStream(5, 0))
        assert np.all(t.sites_h < 0)
        assert np.all(np.diff(t.sites_h) >= 0)  # deepest first
        assert len(t.simplices) > 0


class TestNormalityAudit:
    def test_interior_vertices_all_normal(self):
        p = beta(0.0, gamma=2.0)
        t = build_tessellation(p, default_window(p, [(0, 8), (0, 8)]),
                               RandomStream(6, 0))
        rep = audit_normality(t)
        assert rep.n_interior_vertices > 10
        assert rep.all_normal and rep.violations == []
        assert rep.face_to_face

    def test_detects_planted_violation(self):
        # a fourth cocircular-ish site strictly inside an apex paraboloid
        # cannot occur in valid output; corrupt heights to force one
        rng = np.random.default_rng(12)
        v = rng.uniform(0, 4, (30, 2))
        h = rng.uniform(0, 1, 30)
        w = default_window(beta(0.0), [(1, 3), (1, 3)])
        t = triangulate_sites(beta(0.0), v, h, w)
        # sink one site far below: it invades paraboloids it doesn't span
        t.sites_h[0] -= 5.0
        rep = audit_normality(t)
        assert not rep.all_normal


class TestFaceIntensities:
    def test_euler_characteristic_per_replica(self):
        p = beta(0.0, gamma=2.0)
        box = [(0, 10), (0, 10)]
        t = build_tessellation(p, default_window(p, box), RandomStream(8, 0))
        g0, g1, g2 = empirical_face_intensities(t, box)
        assert g0 > 0 and g1 > 0 and g2 > 0
        # local Euler relation, exact up to boundary-crossing faces
        assert abs(g0 - g1 + g2) * 100.0 < 0.1 * g2 * 100.0 + 8


class TestRefinementCoupling:
    def test_eps_refinement_preserves_deep_simplices(self):
        p = bprime(4.0)
        box = [(0, 1), (0, 1)]
        w1 = WindowConfig(target_box=tuple(map(tuple, box)), guard_margin=1.0,
                          h_max=None, eps=0.3, h_depth=10.0, r_max=None)
        w2 = WindowConfig(target_box=tuple(map(tuple, box)), guard_margin=1.0,
                          h_max=None, eps=0.03, h_depth=10.0, r_max=None)
        t1 = build_tessellation(p, w1, RandomStream(77, 0))
        t2 = build_tessellation(p, w2, RandomStream(77, 0))
        n1 = len(t1.sites_h)
        assert np.array_equal(t1.sites_v, t2.sites_v[:n1])
        keep1 = {tuple(s) for s, r in zip(t1.simplices, t1.apex_r)
                 if r * r >= 0.3}
        keep2 = {tuple(s) for s, r in zip(t2.simplices, t2.apex_r)
                 if r * r >= 0.3}
        assert keep1 == keep2
