"""Model parameters and closed-form constants.

Everything here is a pure function of the model parameters.  All Gamma-ratio
formulas are assembled in log-space (sums/differences of ``gammaln``) and
exponentiated once, so they stay finite for large ``d`` and ``beta``.

Model families
--------------
``Beta``
    Space-time Poisson process on ``R^{d-1} x [0, inf)`` with intensity
    ``gamma * c_{d,beta} * h^beta``, ``beta > -1``.
``BetaPrime``
    Process on ``R^{d-1} x (-inf, 0)`` with intensity
    ``gamma * c'_{d,beta} * (-h)^{-beta}``, ``beta > (d+1)/2``.
``ClassicalDelaunay``
    Degenerate limit ``beta -> -1``: heights collapse to 0 and the spatial
    process is Poisson with intensity ``gamma / omega_d`` on ``R^{d-1}``.
    Closed forms for this family are obtained by evaluating the Beta-family
    formulas at ``beta = -1`` with ``gamma_eff = gamma / 2`` (the half comes
    from matching void probabilities in the limit; see ``void_rate``).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.special import gammaln


class Family(enum.Enum):
    Beta = "beta"
    BetaPrime = "beta-prime"
    ClassicalDelaunay = "classical"


class ParameterError(ValueError):
    """Model parameters outside the validity region."""


@dataclass(frozen=True)
class ModelParams:
    """Parameters of a beta / beta' / classical Delaunay model.

    The tessellation lives in ``R^{d-1}``; ``nu`` is the volume-power weight
    of the typical cell, ``gamma`` the intensity multiplier.  ``kappa`` is the
    sign convention (+1 for Beta/Classical, -1 for BetaPrime) and is derived,
    not stored.
    """

    family: Family
    d: int
    beta: float
    nu: float = 0.0
    gamma: float = 1.0

    def __post_init__(self):
        if not isinstance(self.d, (int, np.integer)) or self.d < 2:
            raise ParameterError(f"d must be an integer >= 2, got {self.d!r}")
        if not (self.gamma > 0) or not math.isfinite(self.gamma):
            raise ParameterError(f"gamma must be > 0, got {self.gamma!r}")
        if not (self.nu >= -1):
            raise ParameterError(f"nu must be >= -1, got {self.nu!r}")
        if self.family is Family.Beta:
            if not (self.beta > -1):
                raise ParameterError(f"Beta family requires beta > -1, got {self.beta!r}")
        elif self.family is Family.ClassicalDelaunay:
            if self.beta != -1:
                raise ParameterError("ClassicalDelaunay requires beta = -1 exactly")
        elif self.family is Family.BetaPrime:
            if not (self.beta > (self.d + 1) / 2):
                raise ParameterError(
                    f"BetaPrime requires beta > (d+1)/2 = {(self.d + 1) / 2}, got {self.beta!r}")
            if not (self.nu < 2 * self.beta - self.d):
                raise ParameterError(
                    f"BetaPrime requires nu < 2*beta - d = {2 * self.beta - self.d}, got {self.nu!r}")
        else:  # pragma: no cover
            raise ParameterError(f"unknown family {self.family!r}")

    @property
    def kappa(self) -> int:
        return -1 if self.family is Family.BetaPrime else +1

    @property
    def height_exponent(self) -> float:
        """Exponent q in the void probability exp(-m r^q): q = d+1+2*kappa*beta."""
        return self.d + 1 + 2 * self.kappa * self.beta

    def with_(self, **kw) -> "ModelParams":
        return replace(self, **kw)


@dataclass(frozen=True)
class ModelConstants:
    c: float
    m: float
    alpha: float
    lambda_nu: float


def log_gamma_fn(x: float) -> float:
    """ln Gamma(x) for x > 0."""
    if not np.all(np.asarray(x) > 0):
        raise ValueError(f"log_gamma_fn requires x > 0, got {x!r}")
    return gammaln(x)


def ball_volume(q: int) -> float:
    """Volume kappa_q of the unit ball in R^q."""
    if q < 0:
        raise ValueError("q must be >= 0")
    return math.pi ** (q / 2) / math.gamma(1 + q / 2)


def sphere_surface(q: int) -> float:
    """Surface content omega_q = 2 pi^{q/2} / Gamma(q/2) of the sphere S^{q-1}."""
    if q < 1:
        raise ValueError("q must be >= 1")
    return 2 * math.pi ** (q / 2) / math.gamma(q / 2)


def effective_beta_gamma(p: ModelParams) -> tuple[float, float]:
    """(beta, gamma) to plug into Beta-family closed forms.

    ClassicalDelaunay maps onto the beta=-1 endpoint run at gamma/2: the
    limiting void rate of the Beta family is 2*gamma*kappa_{d-1}/omega_d while
    the classical one is gamma*kappa_{d-1}/omega_d.
    """
    if p.family is Family.ClassicalDelaunay:
        return -1.0, p.gamma / 2
    return p.beta, p.gamma


def intensity_constant(p: ModelParams) -> float:
    """c_{d,beta} (Beta) or c'_{d,beta} (BetaPrime)."""
    d, beta = p.d, p.beta
    if p.family is Family.Beta:
        return math.exp(gammaln(d / 2 + beta + 1) - (d / 2) * math.log(math.pi)
                        - gammaln(beta + 1))
    if p.family is Family.BetaPrime:
        return math.exp(gammaln(beta) - (d / 2) * math.log(math.pi)
                        - gammaln(beta - d / 2))
    raise ParameterError("intensity_constant is undefined for ClassicalDelaunay "
                         "(heights are degenerate; spatial intensity is gamma/omega_d)")


def void_rate(p: ModelParams) -> float:
    """Rate m with void probability exp(-m r^{d+1+2*kappa*beta}).

    The closed form used is m = gamma * c_{d,beta} / (pi * c_{d+1,beta}) (and the
    primed analogue), which reduces to gamma*Gamma(d/2+beta+1)/(sqrt(pi)*Gamma((d+3)/2+beta))
    for the Beta family.  This is the variant consistent with the quadrature
    oracle for the intensity measure of a downward paraboloid.
    """
    d, beta, gamma = p.d, p.beta, p.gamma
    if p.family is Family.ClassicalDelaunay:
        return gamma * ball_volume(d - 1) / sphere_surface(d)
    if p.family is Family.Beta:
        return gamma * math.exp(gammaln(d / 2 + beta + 1) - 0.5 * math.log(math.pi)
                                - gammaln((d + 3) / 2 + beta))
    # BetaPrime: m' = gamma * Gamma(beta-(d+1)/2) / (sqrt(pi) * Gamma(beta-d/2))
    return gamma * math.exp(gammaln(beta - (d + 1) / 2) - 0.5 * math.log(math.pi)
                            - gammaln(beta - d / 2))


def _log_c(q: int, beta: float, kappa: int) -> float:
    """ln c_{q,beta} (kappa=+1) or ln c'_{q,beta} (kappa=-1) for any q >= 1."""
    if kappa == +1:
        return gammaln(q / 2 + beta + 1) - (q / 2) * math.log(math.pi) - gammaln(beta + 1)
    return gammaln(beta) - (q / 2) * math.log(math.pi) - gammaln(beta - q / 2)


def log_tuple_moment_integral(p: ModelParams, extra: float = 0.0) -> float:
    """ln of the d-point simplex moment integral with weight Delta^{nu+1+extra}.

    Beta family: ln of
        int_{(B^{d-1})^d} Delta^{nu+1+extra} prod (1-|y_i|^2)^beta dy,
    BetaPrime: the analogous integral over (R^{d-1})^d with prod (1+|y_i|^2)^{-beta}.
    ClassicalDelaunay: the integral of Delta^{nu+1+extra} with respect to the
    normalized uniform probability measure on (S^{d-2})^d, i.e. the beta->-1
    limit of c_{d-1,beta}^d times the Beta-family integral.
    """
    d = p.d
    t = p.nu + extra  # effective weight exponent: Delta^{t+1}
    sum_i = sum(gammaln((i + t + 1) / 2) - gammaln(i / 2) for i in range(1, d))
    if p.family in (Family.Beta, Family.ClassicalDelaunay):
        beta = -1.0 if p.family is Family.ClassicalDelaunay else p.beta
        lg = (-(t + 1) * gammaln(d)
              + d * (gammaln((d + 1) / 2 + beta) - gammaln((d + t) / 2 + beta + 1))
              + gammaln(d * (d + t + 2 * beta) / 2 + 1)
              - gammaln((d * (d + t + 2 * beta) - t + 1) / 2)
              + sum_i)
        if p.family is Family.Beta:
            lg -= d * _log_c(d - 1, beta, +1)
        return lg
    beta = p.beta
    if not (2 * beta - d - p.nu > extra):
        raise ParameterError(
            f"tuple moment requires nu + extra < 2*beta - d = {2 * beta - d}")
    return (-(t + 1) * gammaln(d) - d * _log_c(d - 1, beta, -1)
            + gammaln((d * (2 * beta - d - t) + t + 1) / 2)
            - gammaln(d * (2 * beta - d - t) / 2)
            + d * (gammaln(beta - (d + t) / 2) - gammaln(beta - (d - 1) / 2))
            + sum_i)


def radial_gamma_shape(p: ModelParams, extra: float = 0.0) -> float:
    """Shape of the Gamma variable Z in the radial transform R = (Z/m)^{1/(d+1+2*kappa*beta)}.

    For ClassicalDelaunay the height exponent degenerates to d-1 and the shape
    to d+nu-1, matching the classical radial density r^{d^2-2d+nu(d-1)}.
    """
    d, q = p.d, p.height_exponent
    return d + (p.nu + extra - 1) * (d - 1) / q


def log_radial_integral(p: ModelParams, extra: float = 0.0) -> float:
    """ln of int_0^inf r^{2*kappa*d*beta + d^2 + (nu+extra)(d-1)} exp(-m r^{d+1+2*kappa*beta}) dr.

    Equals Gamma(a) * m^{-a} / |d+1+2*kappa*beta| with
    a = d + (nu+extra-1)(d-1)/(d+1+2*kappa*beta).
    """
    q = p.height_exponent
    a = radial_gamma_shape(p, extra)
    if a <= 0:
        raise ParameterError(f"radial integral diverges (shape {a} <= 0)")
    m = void_rate(p)
    return gammaln(a) - a * math.log(m) - math.log(abs(q))


def density_norm_alpha(p: ModelParams) -> float:
    """Normalizing constant of the typical-cell density.

    The typical-cell law is alpha * r^{2*kappa*d*beta + d^2 + nu(d-1)}
    exp(-m r^{d+1+2*kappa*beta}) Delta^{nu+1} prod (1-kappa|y_i|^2)^{kappa*beta}
    dr dy.  For ClassicalDelaunay the tuple measure is the normalized uniform
    probability on (S^{d-2})^d and alpha normalizes the remaining factors.
    """
    return math.exp(-(log_radial_integral(p) + log_tuple_moment_integral(p)))


def cell_intensity_norm(p: ModelParams) -> float:
    """lambda_{beta,nu}: expected sum of Vol^nu over cells centered per unit volume.

    For nu = 0 this is the simplex intensity gamma_{d-1}, the reciprocal of the
    expected typical-cell volume.
    """
    d = p.d
    if p.family is Family.ClassicalDelaunay:
        # c_{d,-1} = 0 formally; the limit folds c_{d,beta}^d against the
        # c_{d-1,beta}^{-d} hidden in the tuple integral:
        # lim (c_d/c_{d-1})^d = (Gamma(d/2)/(sqrt(pi) Gamma((d+1)/2)))^d, and
        # 2*gamma_eff = gamma.
        ratio = math.exp(gammaln(d / 2) - 0.5 * math.log(math.pi) - gammaln((d + 1) / 2))
        lg = d * math.log(p.gamma * ratio)
    else:
        lg = d * math.log(2 * p.gamma * intensity_constant(p))
    lg += -math.log(d) + log_radial_integral(p) + log_tuple_moment_integral(p)
    return math.exp(lg)


def model_constants(p: ModelParams) -> ModelConstants:
    c = math.nan if p.family is Family.ClassicalDelaunay else intensity_constant(p)
    return ModelConstants(c=c, m=void_rate(p), alpha=density_norm_alpha(p),
                          lambda_nu=cell_intensity_norm(p))


def alpha_closed_form(p: ModelParams) -> float:
    """Normalizing constant of the weighted typical-cell density, assembled
    purely from gamma-function products (no radial/tuple integral reuse).

    Independent of density_norm_alpha, which divides out the semi-analytic
    radial x tuple integrals; agreement of the two is a normalization check.
    """
    d, beta, nu, gamma = p.d, p.beta, p.nu, p.gamma
    common = ((nu + 1) * gammaln(d) - (d * (d - 1) / 2) * math.log(math.pi)
              + sum(gammaln(i / 2) - gammaln((i + nu + 1) / 2)
                    for i in range(1, d)))
    if p.family is Family.BetaPrime:
        qd = d - 2 * beta + 1
        a = d + (nu - 1) * (d - 1) / qd
        lg = (common + math.log(abs(qd))
              + gammaln(d * (2 * beta - d - nu) / 2)
              - gammaln((d * (2 * beta - d - nu) + nu + 1) / 2)
              - gammaln(a)
              + a * (math.log(gamma) + gammaln(beta - (d + 1) / 2)
                     - 0.5 * math.log(math.pi) - gammaln(beta - d / 2))
              + d * (gammaln(beta) - gammaln(beta - (d + nu) / 2)))
        return math.exp(lg)
    if p.family is Family.ClassicalDelaunay:
        raise ParameterError("no finite closed-form normalizer at beta = -1; "
                             "use density_norm_alpha")
    qd = d + 2 * beta + 1
    a = d + (nu - 1) * (d - 1) / qd
    lg = (common + math.log(qd)
          + gammaln((d * (d + nu + 2 * beta) - nu + 1) / 2)
          - gammaln(d * (d + nu + 2 * beta) / 2 + 1)
          - gammaln(a)
          + a * (math.log(gamma) + gammaln(d / 2 + beta + 1)
                 - 0.5 * math.log(math.pi) - gammaln((d + 1) / 2 + beta + 1))
          + d * (gammaln((d + nu) / 2 + beta + 1) - gammaln(beta + 1)))
    return math.exp(lg)
