import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from betadel.geometry import (DegeneracyError, ParaboloidApex, Site,
                              angle_sum, circumparaboloid,
                              circumparaboloid_batch,
                              embedded_simplex_volumes, internal_angle,
                              power_of_point, simplex_volume, simplex_volumes,
                              strictly_inside_paraboloid,
                              vertex_angle_sums_batch)
from betadel.samplers import RandomStream

finite = st.floats(-50.0, 50.0, allow_nan=False)


class TestVolumes:
    def test_unit_triangle(self):
        assert simplex_volume([[0, 0], [1, 0], [0, 1]]) == pytest.approx(0.5)

    def test_batch_matches_single(self):
        rng = np.random.default_rng(0)
        b = rng.normal(size=(50, 4, 3))
        vols = simplex_volumes(b)
        for i in range(50):
            assert vols[i] == pytest.approx(simplex_volume(b[i]))

    def test_embedded_matches_flat_case(self):
        rng = np.random.default_rng(1)
        b = rng.normal(size=(30, 3, 2))
        assert np.allclose(embedded_simplex_volumes(b), simplex_volumes(b))

    def test_embedded_rotation_invariant(self):
        rng = np.random.default_rng(2)
        tri = rng.normal(size=(1, 3, 2))
        lifted = np.concatenate([tri, np.zeros((1, 3, 2))], axis=2)  # in R^4
        q, _ = np.linalg.qr(rng.normal(size=(4, 4)))
        rotated = lifted @ q.T
        assert embedded_simplex_volumes(rotated)[0] == pytest.approx(
            simplex_volumes(tri)[0])

    def test_degenerate_is_zero(self):
        assert simplex_volume([[0, 0], [1, 1], [2, 2]]) == 0.0


class TestCircumparaboloid:
    @given(arrays(float, (3, 2), elements=finite),
           arrays(float, (3,), elements=st.floats(-10, 10)))
    @settings(max_examples=200, deadline=None)
    def test_apex_interpolates_all_sites(self, v, h):
        area = simplex_volume(v)
        if area < 1e-6:
            return
        apex = circumparaboloid([Site(v[i], h[i]) for i in range(3)])
        scale = 1 + np.abs(v).max() ** 2 + np.abs(h).max()
        for i in range(3):
            resid = apex.t - np.sum((v[i] - apex.w) ** 2) - h[i]
            assert abs(resid) <= 1e-9 * scale

    def test_known_one_dimensional_analogue_style(self):
        # sites (0,0,h=0) and symmetric: apex centered
        sites = [Site(np.array([0.0, 0.0]), 0.0),
                 Site(np.array([2.0, 0.0]), 0.0),
                 Site(np.array([1.0, 1.0]), 0.0)]
        apex = circumparaboloid(sites)
        assert apex.w == pytest.approx([1.0, 0.0])
        assert apex.t == pytest.approx(1.0)  # circumradius^2 of the triangle

    def test_heights_shift_apex(self):
        # raising one site's weight shrinks its power distance
        sites = [Site(np.array([0.0, 0.0]), 0.0),
                 Site(np.array([2.0, 0.0]), 1.0),
                 Site(np.array([1.0, 2.0]), 0.0)]
        apex = circumparaboloid(sites)
        for s in sites:
            assert power_of_point(apex.w, s) == pytest.approx(apex.t)

    def test_collinear_raises(self):
        sites = [Site(np.array([0.0, 0.0]), 0.0),
                 Site(np.array([1.0, 1.0]), 0.0),
                 Site(np.array([2.0, 2.0]), 0.0)]
        with pytest.raises(DegeneracyError):
            circumparaboloid(sites)

    def test_batch_matches_single(self):
        rng = np.random.default_rng(3)
        v = rng.uniform(-5, 5, (40, 3, 2))
        h = rng.uniform(-1, 3, (40, 3))
        w, t, ok = circumparaboloid_batch(v, h)
        for i in range(40):
            if not ok[i]:
                continue
            apex = circumparaboloid([Site(v[i, j], h[i, j]) for j in range(3)])
            assert np.allclose(w[i], apex.w) and t[i] == pytest.approx(apex.t)

    def test_batch_flags_degenerate(self):
        v = np.array([[[0.0, 0], [1, 1], [2, 2]]])
        h = np.zeros((1, 3))
        _, _, ok = circumparaboloid_batch(v, h)
        assert not ok[0]


class TestInsidePredicate:
    def test_tie_is_not_inside(self):
        apex = ParaboloidApex(w=np.zeros(2), t=1.0)
        on_boundary = Site(np.array([1.0, 0.0]), 0.0)  # h = t - |v-w|^2
        assert not strictly_inside_paraboloid(on_boundary, apex)

    def test_strictly_inside(self):
        apex = ParaboloidApex(w=np.zeros(2), t=1.0)
        assert strictly_inside_paraboloid(Site(np.zeros(2), 0.5), apex)
        assert not strictly_inside_paraboloid(Site(np.zeros(2), 1.5), apex)


class TestAngles:
    def test_full_face_is_one(self):
        tri = [[0, 0], [1, 0], [0, 1]]
        assert internal_angle(tri, [0, 1, 2]) == 1.0

    def test_facet_is_half(self):
        tri = [[0, 0], [1, 0], [0, 1]]
        assert internal_angle(tri, [0, 1]) == 0.5

    def test_right_triangle_vertex_angle(self):
        tri = [[0, 0], [1, 0], [0, 1]]
        assert internal_angle(tri, [0]) == pytest.approx(0.25 / 2 * 2)  # 90deg

    def test_triangle_angles_sum_half(self):
        rng = np.random.default_rng(5)
        tri = rng.normal(size=(3, 2))
        total = sum(internal_angle(tri, [i]) for i in range(3))
        assert total == pytest.approx(0.5, abs=1e-12)

    def test_sigma_k_exact_values(self):
        tri = [[0, 0], [1, 0], [0, 1]]
        assert angle_sum(tri, 3) == 1.0
        assert angle_sum(tri, 2) == 1.5
        assert angle_sum(tri, 1) == pytest.approx(0.5)

    def test_tetrahedron_sigma_exact(self):
        tet = np.array([[0, 0, 0], [1, 0, 0], [0, 1, 0], [0, 0, 1.0]])
        assert angle_sum(tet, 4) == 1.0
        assert angle_sum(tet, 3) == 2.0

    def test_regular_tetrahedron_vertex_angle_mc(self):
        # solid angle of a regular tetrahedron vertex: arccos(23/27)/(4 pi)
        v = np.array([[1, 1, 1], [1, -1, -1], [-1, 1, -1], [-1, -1, 1.0]])
        expected = math.acos(23.0 / 27.0) / (4 * math.pi)
        est = internal_angle(v, [0], n_dirs=200_000, s=RandomStream(7, 0))
        assert est == pytest.approx(expected, abs=0.002)

    def test_batch_vertex_sums_match_exact_planar(self):
        rng = np.random.default_rng(8)
        tris = rng.normal(size=(20, 3, 2))
        sums = vertex_angle_sums_batch(tris, 20_000, RandomStream(9, 0))
        assert np.allclose(sums, 0.5, atol=0.02)

    def test_batch_vertex_sums_tetrahedra(self):
        rng = np.random.default_rng(10)
        tets = rng.normal(size=(10, 4, 3))
        sums = vertex_angle_sums_batch(tets, 50_000, RandomStream(11, 0))
        exact = [sum(internal_angle(t, [i], n_dirs=100_000,
                                    s=RandomStream(12, k * 4 + i))
                     for i in range(4)) for k, t in enumerate(tets)]
        assert np.allclose(sums, exact, atol=0.02)
