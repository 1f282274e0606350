"""Closed-form evaluations.

Volume moments of the nu-weighted typical cell, the expected-angle-sum
integrals J_{d,k} / J'_{d,k} by complex-valued quadrature, expected angle
sums, face intensities, and expected f-vectors of typical Voronoi cells.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import cumulative_simpson, simpson
from scipy.special import gammaln

from .constants import (Family, ModelParams, ParameterError,
                        effective_beta_gamma)


class QuadratureError(RuntimeError):
    pass


@dataclass(frozen=True)
class QuadratureConfig:
    rel_tol: float = 1e-8
    truncation: float | None = None  # None = automatic from the tail bound
    max_refinement: int = 8

    def __post_init__(self):
        if not self.rel_tol > 0:
            raise ValueError("rel_tol must be > 0")


def volume_moment(p: ModelParams, s: float) -> float:
    """E Vol(Z)^s of the nu-weighted typical cell.

    Validity: s > -nu-1 (Beta/Classical), -nu-1 < s < 2*beta-d-nu (BetaPrime).
    ClassicalDelaunay evaluates the Beta formula at its beta = -1 endpoint
    with the effective intensity gamma/2.
    """
    d, nu = p.d, p.nu
    if s == 0:
        return 1.0
    if not s > -nu - 1:
        raise ParameterError(f"moment order s = {s} requires s > -nu-1 = {-nu - 1}")
    sum_i = sum(gammaln((i + nu + s + 1) / 2) - gammaln((i + nu + 1) / 2)
                for i in range(1, d))
    if p.family is Family.BetaPrime:
        beta, gamma = p.beta, p.gamma
        if not s < 2 * beta - d - nu:
            raise ParameterError(
                f"BetaPrime moment requires s < 2*beta-d-nu = {2 * beta - d - nu}")
        qd = d - 2 * beta + 1  # negative in the validity range
        lg = (-s * gammaln(d)
              + (s * (d - 1) / qd) * (0.5 * math.log(math.pi) + gammaln(beta - d / 2)
                                      - math.log(gamma) - gammaln(beta - (d + 1) / 2))
              + gammaln((d * (2 * beta - d) - (nu + s) * (d - 1) + 1) / 2)
              - gammaln((d * (2 * beta - d) - nu * (d - 1) + 1) / 2)
              + gammaln(d * (2 * beta - d - nu) / 2)
              - gammaln(d * (2 * beta - d - nu - s) / 2)
              + gammaln(d + (nu + s - 1) * (d - 1) / qd)
              - gammaln(d + (nu - 1) * (d - 1) / qd)
              + d * (gammaln(beta - (d + nu + s) / 2) - gammaln(beta - (d + nu) / 2))
              + sum_i)
        return math.exp(lg)
    beta, gamma = effective_beta_gamma(p)
    qd = d + 2 * beta + 1
    lg = (-s * gammaln(d)
          + (s * (d - 1) / qd) * (0.5 * math.log(math.pi) + gammaln((d + 1) / 2 + beta + 1)
                                  - math.log(gamma) - gammaln(d / 2 + beta + 1))
          + gammaln((d * (d + 2 * beta) + nu * (d - 1) + 1) / 2)
          - gammaln((d * (d + 2 * beta) + (nu + s) * (d - 1) + 1) / 2)
          + gammaln(d * (d + nu + s + 2 * beta) / 2 + 1)
          - gammaln(d * (d + nu + 2 * beta) / 2 + 1)
          + gammaln(d + (nu + s - 1) * (d - 1) / qd)
          - gammaln(d + (nu - 1) * (d - 1) / qd)
          + d * (gammaln((d + nu) / 2 + beta + 1) - gammaln((d + nu + s) / 2 + beta + 1))
          + sum_i)
    return math.exp(lg)


def _log_cosh(u: np.ndarray) -> np.ndarray:
    au = np.abs(u)
    return au + np.log1p(np.exp(-2 * au)) - math.log(2.0)


def _c_gamma(g: float) -> float:
    """c_gamma = Gamma(gamma+3/2) / (sqrt(pi) Gamma(gamma+1)), gamma > -1."""
    return math.exp(gammaln(g + 1.5) - 0.5 * math.log(math.pi) - gammaln(g + 1))


def _c_gamma_prime(g: float) -> float:
    """c'_gamma = Gamma(gamma) / (sqrt(pi) Gamma(gamma-1/2)), gamma > 1/2."""
    return math.exp(gammaln(g) - 0.5 * math.log(math.pi) - gammaln(g - 0.5))


def _j_quadrature(d: int, k: int, c_out: float, out_exp: float, c_in: float,
                  in_exp: float, decay: float, q: QuadratureConfig):
    """Shared engine for J and J'.

    Evaluates binom(d,k) int_{-U}^{U} c_out cosh(u)^{-out_exp}
    (1/2 + i I(u))^{d-k} du with I(u) = int_0^u c_in cosh(v)^{in_exp} dv,
    on a symmetric Simpson grid refined until the change drops below rel_tol.
    The full symmetric range is integrated (no even/odd shortcut) so the
    residual imaginary part is a genuine quadrature diagnostic.
    """
    if q.truncation is not None:
        U = float(q.truncation)
    else:
        # integrand ~ exp(-decay * u); aim the tail at rel_tol/10
        U = (math.log(10.0 / q.rel_tol) + 5.0) / max(decay, 0.25)
    binom = math.comb(d, k)

    def evaluate(n_points: int, U: float) -> complex:
        # I(u) is odd; accumulate from 0 outward so I near 0 is not a
        # difference of the huge values cosh(v)^in_exp takes at the ends.
        u_half = np.linspace(0.0, U, n_points + 1)
        inner = c_in * np.exp(in_exp * _log_cosh(u_half))
        cum = cumulative_simpson(inner, x=u_half, initial=0.0)
        u = np.concatenate([-u_half[:0:-1], u_half])
        i_u = np.concatenate([-cum[:0:-1], cum])
        g = c_out * np.exp(-out_exp * _log_cosh(u)) * (0.5 + 1j * i_u) ** (d - k)
        return binom * simpson(g, x=u)

    n = 4096
    prev = evaluate(n, U)
    for _ in range(q.max_refinement):
        n *= 2
        cur = evaluate(n, U)
        if abs(cur - prev) <= q.rel_tol * max(1.0, abs(cur)):
            # also guard the truncation: extending U must not move the result
            wide = evaluate(n, U * 1.25)
            if abs(wide - cur) <= 2 * q.rel_tol * max(1.0, abs(cur)):
                if abs(cur.imag) > 10 * q.rel_tol * max(1.0, abs(cur)):
                    raise QuadratureError(
                        f"imaginary residue {cur.imag:.3e} exceeds tolerance")
                return cur.real, cur.imag
            U *= 1.25
            prev = evaluate(n, U)
            continue
        prev = cur
    raise QuadratureError("quadrature failed to converge; increase max_refinement")


def angle_sum_J(d: int, k: int, beta_arg: float,
                q: QuadratureConfig | None = None,
                with_residue: bool = False):
    """Expected angle sum J_{d,k}(beta_arg) of a beta simplex in B^{d-1}.

    Uses the double-integral representation with alpha = 2*beta_arg + d - 1;
    valid for d >= 3 and alpha >= d-3.
    """
    q = q or QuadratureConfig()
    if d < 3 or not 1 <= k <= d:
        raise ValueError("require d >= 3 and 1 <= k <= d")
    alpha = 2 * beta_arg + d - 1
    if alpha < d - 3 - 1e-12:
        raise ParameterError(f"validity requires alpha = {alpha} >= d-3 = {d - 3}")
    decay = alpha * k + 2
    val, im = _j_quadrature(d, k, _c_gamma(alpha * d / 2), alpha * d + 2,
                            _c_gamma((alpha - 1) / 2), alpha, decay, q)
    return (val, im) if with_residue else val


def angle_sum_J_prime(d: int, k: int, beta_arg: float,
                      q: QuadratureConfig | None = None,
                      with_residue: bool = False):
    """Expected angle sum J'_{d,k}(beta_arg) of a beta' simplex.

    alpha' = 2*beta_arg - d + 1; valid for alpha' > 0 and alpha'*d > 1.
    """
    q = q or QuadratureConfig()
    if not 1 <= k <= d:
        raise ValueError("require 1 <= k <= d")
    alpha = 2 * beta_arg - d + 1
    if not (alpha > 0 and alpha * d > 1):
        raise ParameterError(
            f"validity requires alpha' = {alpha} > 0 and alpha'*d > 1")
    decay = alpha * d - 1 - max(alpha - 1, 0.0) * (d - k)
    val, im = _j_quadrature(d, k, _c_gamma_prime(alpha * d / 2), alpha * d - 1,
                            _c_gamma_prime((alpha + 1) / 2), alpha - 1, decay, q)
    return (val, im) if with_residue else val


def expected_angle_sum(p: ModelParams, k: int,
                       q: QuadratureConfig | None = None) -> float:
    """E sigma_k of the nu-weighted typical cell; requires integer nu."""
    nu = p.nu
    if abs(nu - round(nu)) > 1e-9:
        raise ParameterError(
            "expected angle sums are only available for integer nu")
    if p.family is Family.BetaPrime:
        return angle_sum_J_prime(p.d, k, p.beta - (nu + 1) / 2, q)
    beta, _ = effective_beta_gamma(p)
    return angle_sum_J(p.d, k, beta + (nu + 1) / 2, q)


def face_intensity(p: ModelParams, j: int,
                   q: QuadratureConfig | None = None) -> float:
    """Intensity gamma_j of j-dimensional faces of the Delaunay tessellation:
    J_{d,j+1}(beta + 1/2) / E Vol(Z_{beta,0}) (primed analogue for BetaPrime)."""
    if not 0 <= j <= p.d - 1:
        raise ValueError("face dimension j must be in 0..d-1")
    p0 = p.with_(nu=0.0)
    e_vol = volume_moment(p0, 1.0)
    if j == p.d - 1:
        return 1.0 / e_vol  # J_{d,d} = 1 exactly
    if p.family is Family.BetaPrime:
        jval = angle_sum_J_prime(p.d, j + 1, p.beta - 0.5, q)
    else:
        beta, _ = effective_beta_gamma(p)
        jval = angle_sum_J(p.d, j + 1, beta + 0.5, q)
    return jval / e_vol


def voronoi_f_vector(p: ModelParams, k: int,
                     q: QuadratureConfig | None = None) -> float:
    """E f_{d-k}(Y) of the typical Voronoi cell.

    By normality each (d-k)-face of the Voronoi tessellation lies in exactly k
    cells, and by duality gamma_{d-k}(V) = gamma_{k-1}(D), so
    E f_{d-k}(Y) = k * gamma_{k-1}(D) / gamma_cell(V) with
    gamma_cell(V) = gamma_0(D); the E Vol factors cancel, leaving
    k * J_{d,k}(beta+1/2) / J_{d,1}(beta+1/2).
    """
    if not 1 <= k <= p.d:
        raise ValueError("k must be in 1..d")
    if p.family is Family.BetaPrime:
        num = angle_sum_J_prime(p.d, k, p.beta - 0.5, q) if k < p.d else 1.0
        den = angle_sum_J_prime(p.d, 1, p.beta - 0.5, q)
    else:
        beta, _ = effective_beta_gamma(p)
        num = angle_sum_J(p.d, k, beta + 0.5, q) if k < p.d else 1.0
        den = angle_sum_J(p.d, 1, beta + 0.5, q)
    return k * num / den

def gaussian_simplex_moment(d: int, nu: float, s: float) -> float:
    """E Vol^s of the Delta^(nu+1)-weighted Gaussian simplex (the beta -> inf
    scaling limit of sqrt(2 beta) Z): E_phi[Delta^(nu+1+s)] / E_phi[Delta^(nu+1)]
    with E_phi[Delta^t] = d^(t/2) 2^(t(d-1)/2) prod_i Gamma((i+t)/2)/Gamma(i/2)
    / (d-1)!^t for i.i.d. standard Gaussian vertices in R^(d-1)."""
    def log_m(t: float) -> float:
        return ((t / 2) * math.log(d) + (t * (d - 1) / 2) * math.log(2.0)
                - t * gammaln(d)
                + sum(gammaln((i + t) / 2) - gammaln(i / 2) for i in range(1, d)))
    return math.exp(log_m(nu + 1 + s) - log_m(nu + 1))
