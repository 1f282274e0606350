"""Seeded random generation.

Primitive distributions, beta/beta' point clouds, volume-power-weighted vertex
tuples, the exact typical-cell sampler, and Poisson process realizations.

All draws go through :class:`RandomStream`, a counter-based (Philox) stream
addressed by ``(seed, stream_id)``.  Substreams derived with
:meth:`RandomStream.substream` are statistically independent and make Monte
Carlo aggregates independent of worker parallelism: work is split into
fixed-size chunks, chunk ``j`` always uses substream ``j``.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .constants import (Family, ModelParams, ParameterError, ball_volume,
                        intensity_constant, radial_gamma_shape, sphere_surface,
                        void_rate)

_MASK64 = (1 << 64) - 1

#: Fixed chunk size for parallel Monte Carlo; chunk j always uses substream j,
#: so aggregates are bit-identical for any worker count.
CHUNK_SIZE = 1024


def _splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return (x ^ (x >> 31)) & _MASK64


@dataclass(frozen=True)
class RandomStream:
    """Counter-based random stream addressed by (seed, stream_id)."""

    seed: int
    stream_id: int = 0

    @property
    def generator(self) -> np.random.Generator:
        key = np.array([self.seed & _MASK64, self.stream_id & _MASK64],
                       dtype=np.uint64)
        return np.random.Generator(np.random.Philox(key=key))

    def substream(self, i: int) -> "RandomStream":
        # stream_id mixing must be collision-free in practice and independent
        # of call order; splitmix64 over the (id, i) pair does the job.
        mixed = _splitmix64((_splitmix64(self.stream_id) + i + 1) & _MASK64)
        return RandomStream(self.seed, mixed)


@dataclass
class WeightedTuple:
    points: np.ndarray  # (d, d-1)
    method: str  # "Rejection" | "MCMC"
    diagnostics: dict = field(default_factory=dict)


def sample_gamma(shape: float, rate: float, s: RandomStream, size=None):
    if not (shape > 0 and rate > 0):
        raise ValueError(f"Gamma requires shape, rate > 0, got {shape}, {rate}")
    return s.generator.gamma(shape, size=size) / rate


def sample_beta_rv(a: float, b: float, s: RandomStream, size=None):
    if not (a > 0 and b > 0):
        raise ValueError(f"Beta requires a, b > 0, got {a}, {b}")
    return s.generator.beta(a, b, size=size)


def sample_beta_prime_rv(a: float, b: float, s: RandomStream, size=None):
    if not (a > 0 and b > 0):
        raise ValueError(f"BetaPrime requires a, b > 0, got {a}, {b}")
    x = s.generator.beta(a, b, size=size)
    return x / (1.0 - x)


def _unit_directions(gen: np.random.Generator, n: int, q: int) -> np.ndarray:
    g = gen.standard_normal((n, q))
    return g / np.linalg.norm(g, axis=1, keepdims=True)


def sample_sphere_point(q: int, s: RandomStream, size: int | None = None):
    """Uniform point(s) on the sphere S^{q-1} in R^q."""
    n = 1 if size is None else size
    x = _unit_directions(s.generator, n, q)
    return x[0] if size is None else x


def sample_beta_ball_point(q: int, beta: float, s: RandomStream, size=None):
    """Point(s) in B^q with density c_{q,beta} (1-|x|^2)^beta.

    Radial decomposition: |X|^2 ~ Beta(q/2, beta+1), direction uniform.
    """
    if q < 1:
        raise ValueError("q must be >= 1")
    if not beta > -1:
        raise ValueError(f"beta ball point requires beta > -1, got {beta}")
    n = 1 if size is None else size
    gen = s.generator
    r2 = gen.beta(q / 2, beta + 1, size=n)
    x = _unit_directions(gen, n, q) * np.sqrt(r2)[:, None]
    return x[0] if size is None else x


def sample_beta_prime_point(q: int, beta: float, s: RandomStream, size=None):
    """Point(s) in R^q with density c'_{q,beta} (1+|x|^2)^{-beta}.

    Radial decomposition: |X|^2 ~ BetaPrime(q/2, beta - q/2).
    """
    if q < 1:
        raise ValueError("q must be >= 1")
    if not beta > q / 2:
        raise ValueError(f"beta' point requires beta > q/2 = {q / 2}, got {beta}")
    n = 1 if size is None else size
    gen = s.generator
    b = gen.beta(q / 2, beta - q / 2, size=n)
    r2 = b / (1.0 - b)
    x = _unit_directions(gen, n, q) * np.sqrt(r2)[:, None]
    return x[0] if size is None else x


def _tuple_volumes(pts: np.ndarray) -> np.ndarray:
    """Simplex volumes Delta_{d-1} for a batch of vertex tuples (n, d, d-1)."""
    d = pts.shape[1]
    edges = pts[:, 1:, :] - pts[:, :1, :]
    return np.abs(np.linalg.det(edges)) / math.factorial(d - 1)


def max_simplex_volume_in_ball(q: int) -> float:
    """Largest volume of a q-simplex with vertices in the closed unit ball B^q.

    Attained by the inscribed regular simplex: (q+1)^{(q+1)/2} / (q! q^{q/2}).
    """
    return (q + 1) ** ((q + 1) / 2) / (math.factorial(q) * q ** (q / 2))


def _propose_tuples(p: ModelParams, gen: np.random.Generator, count: int,
                    beta_tilde: float | None = None) -> np.ndarray:
    d = p.d
    q = d - 1
    n = count * d
    if p.family is Family.ClassicalDelaunay:
        pts = _unit_directions(gen, n, q)
    elif p.family is Family.Beta:
        r2 = gen.beta(q / 2, p.beta + 1, size=n)
        pts = _unit_directions(gen, n, q) * np.sqrt(r2)[:, None]
    else:
        b = gen.beta(q / 2, beta_tilde - q / 2, size=n)
        pts = _unit_directions(gen, n, q) * np.sqrt(b / (1.0 - b))[:, None]
    return pts.reshape(count, d, q)


def sample_weighted_tuples(p: ModelParams, s: RandomStream, n: int):
    """n vertex tuples from the density proportional to
    Delta^{nu+1} prod (1 -+ |y_i|^2)^{+-beta}.

    Returns (points (n, d, d-1), method, diagnostics).
    """
    d = p.d
    q = d - 1
    nu = p.nu
    if p.family is Family.BetaPrime:
        beta_tilde = p.beta - q * (nu + 1) / 2
        if not (nu == -1 or beta_tilde > q / 2):
            return _mcmc_weighted_tuples(p, s, n)
    else:
        beta_tilde = None

    # Rejection sampling: i.i.d. proposals, acceptance (Delta/B)^{nu+1}
    # (Beta/Classical, B = inscribed-regular-simplex volume) or the
    # Hadamard-type envelope ratio (BetaPrime with tilted proposals).
    out = np.empty((n, d, q))
    got = 0
    proposed = 0
    batch_no = 0
    log_fact = math.lgamma(d)
    log_B = math.log(max_simplex_volume_in_ball(q))
    acc_est = 0.5
    while got < n:
        count = int(min(5 * 10 ** 5, max(4096, 2 * (n - got) / max(acc_est, 1e-3))))
        gen = s.substream(batch_no).generator
        batch_no += 1
        pts = _propose_tuples(p, gen, count, beta_tilde)
        if nu == -1:
            keep = pts
        else:
            vols = _tuple_volumes(pts)
            with np.errstate(divide="ignore"):
                if p.family is Family.BetaPrime:
                    log_ratio = (nu + 1) * (np.log(vols) + log_fact
                                            - (q / 2) * np.log1p(np.square(pts).sum(-1)).sum(-1))
                else:
                    log_ratio = (nu + 1) * (np.log(vols) - log_B)
            u = gen.random(count)
            keep = pts[np.log(u) < log_ratio]
        take = min(n - got, keep.shape[0])
        out[got:got + take] = keep[:take]
        got += take
        proposed += count
        acc_est = max(got / proposed, 1e-4)
    diags = {"acceptance_rate": n / proposed, "proposals": proposed}
    return out, "Rejection", diags


def _mcmc_weighted_tuples(p: ModelParams, s: RandomStream, n: int,
                          n_chains: int = 256, burn_in: int = 10_000):
    """Metropolis random walk on the joint weighted-tuple density (BetaPrime)."""
    d, q, nu, beta = p.d, p.d - 1, p.nu, p.beta

    def log_target(x):  # x: (C, d, q)
        vols = _tuple_volumes(x)
        with np.errstate(divide="ignore"):
            return ((nu + 1) * np.log(vols)
                    - beta * np.log1p(np.square(x).sum(-1)).sum(-1))

    init = _propose_tuples(p, s.substream(0).generator, n_chains,
                           beta_tilde=max(beta, q + 1.0))
    pts, diags = _run_metropolis(log_target, init, s, n, burn_in)
    return pts, "MCMC", diags


def _run_metropolis(log_target, init: np.ndarray, s: RandomStream, n: int,
                    burn_in: int):
    """Vectorized parallel-chain Metropolis with step adaptation during the
    first half of burn-in and thinning chosen so lag-1 autocorrelation of the
    log-density is < 0.1."""
    state = init.copy()
    n_chains = state.shape[0]
    lp = log_target(state)
    gen = s.substream(1).generator
    step = 0.5
    acc_hist = []

    def sweep(step):
        nonlocal state, lp
        prop = state + step * gen.standard_normal(state.shape)
        lp_prop = log_target(prop)
        acc = np.log(gen.random(n_chains)) < lp_prop - lp
        state[acc] = prop[acc]
        lp[acc] = lp_prop[acc]
        return acc.mean()

    for it in range(burn_in):
        rate = sweep(step)
        if it < burn_in // 2 and (it + 1) % 50 == 0:
            step *= math.exp(0.5 * (rate - 0.3))
        if it >= burn_in - 200:
            acc_hist.append(rate)

    # probe lag-1 autocorrelation of the log-density
    probe = np.empty((200, n_chains))
    for j in range(200):
        sweep(step)
        probe[j] = lp
    x0, x1 = probe[:-1].ravel(), probe[1:].ravel()
    sd = x0.std() * x1.std()
    rho = float(((x0 - x0.mean()) * (x1 - x1.mean())).mean() / sd) if sd > 0 else 0.0
    if rho < 0.1:
        thin = 1
    else:
        thin = min(200, max(1, math.ceil(math.log(0.1) / math.log(min(rho, 0.999)))))

    rounds = math.ceil(n / n_chains)
    out = np.empty((rounds * n_chains,) + state.shape[1:])
    for r in range(rounds):
        for _ in range(thin):
            sweep(step)
        out[r * n_chains:(r + 1) * n_chains] = state
    rho_thinned = rho ** thin
    diags = {"acceptance_rate": float(np.mean(acc_hist)), "thinning": thin,
             "lag1_autocorr": rho, "burn_in": burn_in, "n_chains": n_chains,
             "converged": bool(rho_thinned < 0.1)}
    return out[:n], diags


def sample_weighted_tuple(p: ModelParams, s: RandomStream) -> WeightedTuple:
    pts, method, diags = sample_weighted_tuples(p, s, 1)
    return WeightedTuple(points=pts[0], method=method, diagnostics=diags)


def sample_radius(p: ModelParams, s: RandomStream, size=None):
    """R = (Z/m)^{1/(d+1+2*kappa*beta)} with Z ~ Gamma(shape, 1).

    shape = d + (nu-1)(d-1)/(d+1+2*kappa*beta); the exponent is negative for
    BetaPrime, which the power transform handles as written.
    """
    shape = radial_gamma_shape(p)
    if shape <= 0:
        raise ParameterError(f"radial Gamma shape {shape} <= 0")
    z = sample_gamma(shape, 1.0, s, size=size)
    m = void_rate(p)
    return (z / m) ** (1.0 / p.height_exponent)


def sample_typical_cells(p: ModelParams, s: RandomStream, n: int) -> np.ndarray:
    """n typical-cell simplices conv(R Y_1, ..., R Y_d), shape (n, d, d-1)."""
    tuples, _, _ = sample_weighted_tuples(p, s.substream(0), n)
    r = sample_radius(p, s.substream(1), size=n)
    return tuples * r[:, None, None]


def sample_typical_cell(p: ModelParams, s: RandomStream) -> np.ndarray:
    return sample_typical_cells(p, s, 1)[0]


def sample_typical_cell_volumes(p: ModelParams, s: RandomStream, n: int,
                                workers: int = 1) -> np.ndarray:
    """Volumes of n typical cells, chunked so the result is independent of
    the worker count (chunk j always consumes substream j)."""
    n_chunks = math.ceil(n / CHUNK_SIZE)
    sizes = [CHUNK_SIZE] * (n_chunks - 1) + [n - CHUNK_SIZE * (n_chunks - 1)]

    def work(j):
        return _tuple_volumes(sample_typical_cells(p, s.substream(j), sizes[j]))

    if workers <= 1:
        parts = [work(j) for j in range(n_chunks)]
    else:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            parts = list(ex.map(work, range(n_chunks)))
    return np.concatenate(parts)


def sample_gaussian_limit_simplices(d: int, nu: float, s: RandomStream,
                                    n: int):
    """Simplices from the density prop. to Delta^{nu+1} prod exp(-|g_i|^2/2).

    nu = -1 is exact i.i.d. Gaussian sampling; nu > -1 uses Metropolis (the
    volume weight is unbounded under Gaussian proposals, so rejection has no
    valid envelope).  Returns (points (n, d, d-1), diagnostics).
    """
    if d < 2 or nu < -1:
        raise ValueError("require d >= 2 and nu >= -1")
    q = d - 1
    if nu == -1:
        pts = s.generator.standard_normal((n, d, q))
        return pts, {"method": "iid"}

    def log_target(x):
        vols = _tuple_volumes(x)
        with np.errstate(divide="ignore"):
            return (nu + 1) * np.log(vols) - 0.5 * np.square(x).sum((-1, -2))

    init = s.substream(0).generator.standard_normal((256, d, q))
    pts, diags = _run_metropolis(log_target, init, s, n, burn_in=10_000)
    diags["method"] = "MCMC"
    return pts, diags


def sample_gaussian_limit_simplex(d: int, nu: float, s: RandomStream):
    return sample_gaussian_limit_simplices(d, nu, s, 1)[0][0]


def poisson_height_mass(p: ModelParams, h_range: tuple[float, float]) -> float:
    """Integral of the height intensity profile over h_range (no gamma*c factor)."""
    a, b = h_range
    beta = p.beta
    if p.family is Family.Beta:
        if not (0 <= a < b):
            raise ParameterError("Beta heights require 0 <= a < b")
        return (b ** (beta + 1) - a ** (beta + 1)) / (beta + 1)
    if p.family is Family.BetaPrime:
        if not (a < b < 0):
            raise ParameterError("BetaPrime heights require a < b < 0; "
                                 "b = -eps with eps > 0 (points accumulate at h=0)")
        lo, hi = -b, -a  # t = -h in [lo, hi]
        return (lo ** (1 - beta) - hi ** (1 - beta)) / (beta - 1)
    raise ParameterError("ClassicalDelaunay heights are degenerate (h = 0)")


def _beta_prime_bands(eps: float, h_depth: float):
    """Decade bands [h_depth*10^-(k+1), h_depth*10^-k] on t = -h covering t >= eps.

    Bands are generated in full and filtered to t >= eps afterwards, so
    shrinking eps by a factor 10 only appends one band and leaves every
    previously generated site bit-identical.
    """
    n_bands = max(1, math.ceil(math.log10(h_depth / eps) - 1e-12))
    return [(h_depth * 10.0 ** -(k + 1), h_depth * 10.0 ** -k)
            for k in range(n_bands)]


def sample_poisson_process(p: ModelParams, spatial_box, h_range, s: RandomStream):
    """Sites of the driving Poisson process in spatial_box x h_range.

    spatial_box: sequence of (lo, hi) per spatial coordinate (d-1 entries).
    Returns (v (n, d-1), h (n,)).
    """
    box = np.asarray(spatial_box, dtype=float)
    if box.shape != (p.d - 1, 2) or np.any(box[:, 1] <= box[:, 0]):
        raise ParameterError(f"spatial_box must be {p.d - 1} nonempty intervals")
    vol = float(np.prod(box[:, 1] - box[:, 0]))
    q = p.d - 1

    def uniform_positions(gen, n):
        return box[:, 0] + gen.random((n, q)) * (box[:, 1] - box[:, 0])

    if p.family is Family.ClassicalDelaunay:
        lam = p.gamma / sphere_surface(p.d) * vol
        gen = s.generator
        n = gen.poisson(lam)
        return uniform_positions(gen, n), np.zeros(n)

    c = intensity_constant(p)
    beta = p.beta
    if p.family is Family.Beta:
        a, b = h_range
        lam = p.gamma * c * vol * poisson_height_mass(p, h_range)
        if lam > 5e7:
            raise ParameterError(f"expected site count {lam:.3g} exceeds 5e7; "
                                 "shrink the window or height range")
        gen = s.generator
        n = gen.poisson(lam)
        u = gen.random(n)
        h = (a ** (beta + 1) + u * (b ** (beta + 1) - a ** (beta + 1))) ** (1 / (beta + 1))
        return uniform_positions(gen, n), h

    # BetaPrime: per-decade height bands, each on its own substream, so that
    # tightening the eps-truncation preserves previously generated sites.
    a, b = h_range
    if not (b < 0):
        raise ParameterError("BetaPrime requires h_range = (-depth, -eps) with eps > 0")
    eps, depth = -b, -a
    vs, hs = [], []
    for k, (lo, hi) in enumerate(_beta_prime_bands(eps, depth)):
        gen = s.substream(k).generator
        lam = p.gamma * c * vol * (lo ** (1 - beta) - hi ** (1 - beta)) / (beta - 1)
        if lam > 5e7:
            raise ParameterError(f"expected site count {lam:.3g} in height band "
                                 f"[-{hi:g}, -{lo:g}] exceeds 5e7; increase eps "
                                 "or shrink the window")
        n = gen.poisson(lam)
        u = gen.random(n)
        t = (lo ** (1 - beta) + u * (hi ** (1 - beta) - lo ** (1 - beta))) ** (1 / (1 - beta))
        v = uniform_positions(gen, n)
        keep = t >= eps
        vs.append(v[keep])
        hs.append(-t[keep])
    v = np.concatenate(vs)
    h = np.concatenate(hs)
    # deepest-first ordering: shrinking eps only appends shallower sites, so
    # site indices (and hence simplex index tuples) are stable under refinement
    order = np.argsort(h, kind="stable")
    return v[order], h[order]
