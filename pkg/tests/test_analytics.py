import math

import numpy as np
import pytest

from betadel.analytics import (QuadratureConfig, QuadratureError, angle_sum_J,
                               angle_sum_J_prime, expected_angle_sum,
                               face_intensity, gaussian_simplex_moment,
                               volume_moment, voronoi_f_vector)
from betadel.constants import Family, ModelParams, ParameterError


def beta(d=3, b=0.0, nu=0.0, gamma=1.0):
    return ModelParams(Family.Beta, d, b, nu=nu, gamma=gamma)


def bprime(d=3, b=5.0, nu=0.0, gamma=1.0):
    return ModelParams(Family.BetaPrime, d, b, nu=nu, gamma=gamma)


class TestVolumeMoments:
    def test_s_zero_is_one(self):
        assert volume_moment(beta(3, 2.0), 0.0) == 1.0

    def test_classical_d3_known(self):
        p = ModelParams(Family.ClassicalDelaunay, 3, -1.0, gamma=4 * math.pi)
        assert volume_moment(p, 1.0) == pytest.approx(0.5, rel=1e-12)

    def test_out_of_range_s(self):
        with pytest.raises(ParameterError):
            volume_moment(beta(3, 0.0, nu=0.0), -1.5)

    def test_beta_prime_upper_range(self):
        with pytest.raises(ParameterError):
            volume_moment(bprime(3, 4.0, nu=0.0), 5.5)  # needs s < 2b-d-nu

    def test_log_convexity_in_s(self):
        # moment functions are log-convex: ln E V^s midpoint inequality
        p = beta(3, 1.0, nu=0.0)
        for s in (0.5, 1.0, 2.0):
            mid = math.log(volume_moment(p, s))
            ends = 0.5 * (math.log(volume_moment(p, s - 0.25))
                          + math.log(volume_moment(p, s + 0.25)))
            assert mid <= ends + 1e-12

    def test_gamma_scaling(self):
        # Vol scales as gamma^(-(d-1)/(d+1+2b)) in distribution
        p1, p2 = beta(3, 1.0, gamma=1.0), beta(3, 1.0, gamma=3.0)
        expo = -2.0 / 6.0
        assert volume_moment(p2, 1.0) / volume_moment(p1, 1.0) == \
            pytest.approx(3.0 ** expo, rel=1e-12)

    def test_classical_continuity(self):
        p_near = beta(3, -1 + 1e-7, gamma=0.5)
        p_cl = ModelParams(Family.ClassicalDelaunay, 3, -1.0, gamma=1.0)
        assert volume_moment(p_near, 1.0) == pytest.approx(
            volume_moment(p_cl, 1.0), rel=1e-5)


class TestAngleSumQuadrature:
    def test_J31_is_half(self):
        assert angle_sum_J(3, 1, 0.5) == pytest.approx(0.5, abs=1e-6)

    @pytest.mark.parametrize("d", [3, 4, 5])
    @pytest.mark.parametrize("b", [-1.0, -0.5, 0.0, 2.0, 10.0])
    def test_exact_anchors(self, d, b):
        val_d, im_d = angle_sum_J(d, d, b + 0.5, with_residue=True)
        val_f, im_f = angle_sum_J(d, d - 1, b + 0.5, with_residue=True)
        assert val_d == pytest.approx(1.0, abs=1e-6)
        assert val_f == pytest.approx(d / 2.0, abs=1e-6)
        assert abs(im_d) <= 1e-7 and abs(im_f) <= 1e-7

    def test_prime_anchors(self):
        assert angle_sum_J_prime(3, 1, 5.0) == pytest.approx(0.5, abs=1e-6)
        assert angle_sum_J_prime(3, 2, 5.0) == pytest.approx(1.5, abs=1e-6)
        assert angle_sum_J_prime(4, 4, 6.0) == pytest.approx(1.0, abs=1e-6)

    def test_figure_point_d4(self):
        assert angle_sum_J(4, 1, 20.5) == pytest.approx(0.17420, abs=2e-5)

    def test_validity_guards(self):
        with pytest.raises(ParameterError):
            angle_sum_J(5, 1, -1.6)  # alpha < d-3
        with pytest.raises(ParameterError):
            angle_sum_J_prime(3, 1, 1.0)  # alpha' <= 0

    def test_config_validation(self):
        with pytest.raises(ValueError):
            QuadratureConfig(rel_tol=0.0)

    def test_truncation_override(self):
        q = QuadratureConfig(truncation=30.0)
        assert angle_sum_J(3, 1, 0.5, q) == pytest.approx(0.5, abs=1e-6)


class TestExpectedAngleSums:
    def test_requires_integer_nu(self):
        with pytest.raises(ParameterError):
            expected_angle_sum(beta(3, 0.0, nu=0.5), 1)

    def test_sigma_d_is_one(self):
        assert expected_angle_sum(beta(3, 1.0, nu=0), 3) == pytest.approx(
            1.0, abs=1e-6)

    def test_classical_uses_effective_beta(self):
        p = ModelParams(Family.ClassicalDelaunay, 3, -1.0)
        assert expected_angle_sum(p, 1) == pytest.approx(
            angle_sum_J(3, 1, -0.5), abs=1e-9)


class TestIntensitiesAndFVector:
    def test_gamma2_is_reciprocal_mean_area(self):
        p = beta(3, 0.0)
        assert face_intensity(p, 2) * volume_moment(p.with_(nu=0.0), 1.0) == \
            pytest.approx(1.0, abs=1e-12)

    def test_edge_to_cell_ratio_planar(self):
        # sigma_(d-1) = d/2 forces gamma_1 = 1.5 gamma_2 in the plane
        p = beta(3, 2.0)
        assert face_intensity(p, 1) / face_intensity(p, 2) == pytest.approx(
            1.5, abs=1e-6)

    def test_euler_relation(self):
        for p in [beta(3, 0.0), beta(3, 5.0), bprime(3, 5.0)]:
            g = [face_intensity(p, j) for j in range(3)]
            assert g[0] - g[1] + g[2] == pytest.approx(0.0, abs=1e-6)

    def test_planar_voronoi_f_vector(self):
        # any stationary normal planar tessellation: 6 vertices, 6 edges,
        # and the cell itself
        for p in [beta(3, 0.0), beta(3, 3.0), bprime(3, 5.0),
                  ModelParams(Family.ClassicalDelaunay, 3, -1.0)]:
            assert voronoi_f_vector(p, 1) == pytest.approx(1.0, abs=1e-9)
            assert voronoi_f_vector(p, 2) == pytest.approx(6.0, abs=1e-5)
            assert voronoi_f_vector(p, 3) == pytest.approx(6.0, abs=1e-5)

    def test_f_vector_k_range(self):
        with pytest.raises(ValueError):
            voronoi_f_vector(beta(3, 0.0), 0)


class TestGaussianMoment:
    def test_segment_length_d2(self):
        # |G1 - G2| with G ~ N(0, I_1): E = 2/sqrt(pi), E^2 moment = 2
        assert gaussian_simplex_moment(2, -1.0, 1.0) == pytest.approx(
            2.0 / math.sqrt(math.pi), rel=1e-12)
        assert gaussian_simplex_moment(2, -1.0, 2.0) == pytest.approx(2.0,
                                                                      rel=1e-12)

    def test_second_moment_d3(self):
        # E Delta^2 for the Gaussian triangle in R^2 is 3/2 (Wilks-type)
        assert gaussian_simplex_moment(3, -1.0, 2.0) == pytest.approx(
            1.5, rel=1e-12)

    def test_scaled_beta_moment_converges(self):
        vals = []
        for b in (10.0, 100.0, 1000.0):
            p = beta(3, b)
            vals.append(abs((2 * b) * volume_moment(p, 1.0)
                            - gaussian_simplex_moment(3, 0.0, 1.0)))
        assert vals[0] > vals[1] > vals[2]
