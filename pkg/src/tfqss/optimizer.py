"""Search over source intensities (and optionally the test fraction) for
the operating point maximizing the finite-size key rate.

The work horse is a small genetic algorithm over a 1 to 3 dimensional box,
evaluated in bulk through the same vectorized rate internals the scalar
API uses, followed by a deterministic coordinate-wise golden-section
polish.  Distance sweeps add a cross-seeding pass: every grid point gets
to try every other point's optimum, which keeps the curves smooth where a
single GA run might drop a point.  All randomness is drawn from
counter-based streams keyed by (seed, generation), so results are
reproducible and independent of evaluation order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from ._streams import stream as _stream
from .errors import DomainError
from .finitekey import SecurityParams, RateBreakdown, _rate_values, rate_point
from .model import ChannelParams, SourceParams, _analytic_values, _require

__all__ = [
    "OptimizerConfig",
    "OptimResult",
    "SweepPoint",
    "SweepCurve",
    "ProtocolComparison",
    "optimize_rate",
    "grid_best",
    "sweep_distance",
    "compare_protocols",
]

_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class OptimizerConfig:
    """GA shape and search-space bounds.

    ``sigma_initial``/``sigma_final`` are mutation widths as fractions of
    each coordinate's range; the width decays geometrically between them
    over the generations.  ``symmetric_constraint`` forces mu_a = mu_b
    (the original protocol's source policy).  When
    ``optimize_test_fraction`` is off, ``test_fraction`` is used as-is.
    """

    mu_bounds: tuple[float, float] = (1e-4, 0.499)
    test_fraction_bounds: tuple[float, float] = (0.01, 0.5)
    population: int = 64
    generations: int = 200
    tournament_size: int = 3
    crossover_rate: float = 0.9
    mutation_rate: float = 1.0
    sigma_initial: float = 0.10
    sigma_final: float = 0.005
    rng_seed: int = 0
    symmetric_constraint: bool = False
    optimize_test_fraction: bool = False
    test_fraction: float = 0.1
    refine: bool = True

    def __post_init__(self) -> None:
        lo, hi = self.mu_bounds
        _require(0.0 < lo < hi < 1.0, "mu_bounds must satisfy 0 < lo < hi < 1")
        tlo, thi = self.test_fraction_bounds
        _require(0.0 < tlo < thi < 1.0,
                 "test_fraction_bounds must satisfy 0 < lo < hi < 1")
        _require(self.population >= 4, "population must be >= 4")
        _require(self.generations >= 1, "generations must be >= 1")
        _require(2 <= self.tournament_size <= self.population,
                 "tournament_size must be in [2, population]")
        _require(0.0 <= self.crossover_rate <= 1.0,
                 "crossover_rate must be in [0, 1]")
        _require(0.0 < self.mutation_rate <= 1.0,
                 "mutation_rate must be in (0, 1]")
        _require(0.0 < self.sigma_final <= self.sigma_initial,
                 "need 0 < sigma_final <= sigma_initial")
        _require(0.0 < self.test_fraction < 1.0,
                 "test_fraction must be in (0, 1)")
        _require(0 <= self.rng_seed < 2 ** 64, "rng_seed must fit in 64 bits")


@dataclass(frozen=True)
class OptimResult:
    best_mu_a: float
    best_mu_b: float
    best_test_fraction: float
    best_rate: float
    breakdown: RateBreakdown
    evaluations: int
    converged: bool


# -- genome layout -----------------------------------------------------------
#
# Genes are a flat vector: [mu] or [mu_a, mu_b], plus a trailing [tf] when
# the test fraction is optimized.


def _gene_bounds(oc: OptimizerConfig) -> tuple[np.ndarray, np.ndarray]:
    lo = [oc.mu_bounds[0]] * (1 if oc.symmetric_constraint else 2)
    hi = [oc.mu_bounds[1]] * (1 if oc.symmetric_constraint else 2)
    if oc.optimize_test_fraction:
        lo.append(oc.test_fraction_bounds[0])
        hi.append(oc.test_fraction_bounds[1])
    return np.array(lo), np.array(hi)


def _decode(genes: np.ndarray, oc: OptimizerConfig):
    """Genome columns -> (mu_a, mu_b, test_fraction) arrays."""
    genes = np.atleast_2d(genes)
    if oc.symmetric_constraint:
        mu_a = genes[:, 0]
        mu_b = genes[:, 0]
    else:
        mu_a = genes[:, 0]
        mu_b = genes[:, 1]
    if oc.optimize_test_fraction:
        tf = genes[:, -1]
    else:
        tf = np.full(genes.shape[0], oc.test_fraction)
    return mu_a, mu_b, tf


def _encode(mu_a: float, mu_b: float, tf: float, oc: OptimizerConfig,
            lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    if oc.symmetric_constraint:
        genes = [0.5 * (mu_a + mu_b)]
    else:
        genes = [mu_a, mu_b]
    if oc.optimize_test_fraction:
        genes.append(tf)
    return np.clip(np.array(genes), lo, hi)


def _make_objective(channel: ChannelParams, security: SecurityParams,
                    oc: OptimizerConfig):
    eta_a = channel.eta_a
    eta_b = channel.eta_b

    def evaluate(genes: np.ndarray) -> np.ndarray:
        mu_a, mu_b, tf = _decode(genes, oc)
        q_mu, e_mu = _analytic_values(mu_a, mu_b, eta_a, eta_b,
                                      channel.p_d, channel.e_d)
        out = _rate_values(
            q_mu, e_mu, np.maximum(mu_a, mu_b),
            n_pulses=security.n_pulses, eps_rs=security.eps_rs,
            eps_bar=security.eps_bar, eps_ec=security.eps_ec,
            eps_pa=security.eps_pa, f_e=security.f_e,
            test_fraction=tf, k_test=security.k_test,
            sampling_bound=security.sampling_bound)
        return out["rate"]

    return evaluate


def _seed_candidates(channel: ChannelParams, oc: OptimizerConfig,
                     lo: np.ndarray, hi: np.ndarray,
                     warm_starts) -> list[np.ndarray]:
    """Deterministic starting points worth trying before random search.

    Intensity-matched pairs (mu_a eta_a = mu_b eta_b) equalize the pulse
    amplitudes at the beam splitter, which is where the optimum tends to
    live on asymmetric channels.
    """
    mu_lo, mu_hi = oc.mu_bounds
    ratio = channel.eta_a / channel.eta_b
    tf0 = float(np.clip(oc.test_fraction, oc.test_fraction_bounds[0],
                        oc.test_fraction_bounds[1]))
    # Caller-provided points go first so a small population cannot push
    # them out in favour of the generic heuristics below.
    seeds = [_encode(mu_a, mu_b, tf, oc, lo, hi)
             for mu_a, mu_b, tf in warm_starts]
    for mu in np.geomspace(mu_lo, mu_hi, 8):
        if oc.symmetric_constraint:
            seeds.append(_encode(mu, mu, tf0, oc, lo, hi))
        else:
            seeds.append(_encode(mu, float(np.clip(mu * ratio, mu_lo, mu_hi)),
                                 tf0, oc, lo, hi))
            seeds.append(_encode(float(np.clip(mu / ratio, mu_lo, mu_hi)), mu,
                                 tf0, oc, lo, hi))
    return seeds


def _golden_max(fun, a: float, b: float, tol: float):
    """Golden-section maximization on [a, b]; returns (x, f(x), evals)."""
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc = fun(c)
    fd = fun(d)
    evals = 2
    best_x, best_f = (c, fc) if fc >= fd else (d, fd)
    while b - a > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _GOLDEN * (b - a)
            fc = fun(c)
            x, fx = c, fc
        else:
            a, c, fc = c, d, fd
            d = a + _GOLDEN * (b - a)
            fd = fun(d)
            x, fx = d, fd
        evals += 1
        if fx > best_f:
            best_x, best_f = x, fx
    return best_x, best_f, evals


def _polish(objective, genes: np.ndarray, fit: float, lo: np.ndarray,
            hi: np.ndarray, sweeps: int = 2):
    """Coordinate-wise golden-section improvement from a starting point."""
    x = genes.copy()
    best = fit
    evals = 0
    for _ in range(sweeps):
        for j in range(x.size):
            def along(v, j=j):
                y = x.copy()
                y[j] = v
                return float(objective(y[None, :])[0])

            tol = 1e-8 * (hi[j] - lo[j])
            xj, fj, used = _golden_max(along, float(lo[j]), float(hi[j]), tol)
            evals += used
            if fj > best:
                x[j] = xj
                best = fj
    return x, best, evals


def optimize_rate(channel: ChannelParams, security: SecurityParams,
                  oc: OptimizerConfig, *, warm_starts=()) -> OptimResult:
    """GA plus optional golden-section polish; deterministic per seed.

    ``warm_starts`` is a sequence of (mu_a, mu_b, test_fraction) triples
    injected into the initial population, clipped to bounds.
    """
    if security.k_test is not None and oc.optimize_test_fraction:
        raise DomainError(
            "optimize_test_fraction conflicts with a fixed k_test")
    lo, hi = _gene_bounds(oc)
    dim = lo.size
    pop_n = oc.population
    objective = _make_objective(channel, security, oc)

    rng = _stream(oc.rng_seed, 0)
    pop = lo + (hi - lo) * rng.random((pop_n, dim))
    seeds = _seed_candidates(channel, oc, lo, hi, warm_starts)
    for row, seed_genes in enumerate(seeds[:pop_n // 2]):
        pop[row] = seed_genes

    fit = objective(pop)
    best_idx = int(np.argmax(fit))
    best_genes = pop[best_idx].copy()
    best_fit = float(fit[best_idx])
    evaluations = pop_n

    decay = ((oc.sigma_final / oc.sigma_initial)
             ** (1.0 / max(oc.generations - 1, 1)))
    span = hi - lo
    for gen in range(oc.generations):
        rng = _stream(oc.rng_seed, 1 + gen)
        sigma = span * oc.sigma_initial * decay ** gen

        entrants = rng.integers(0, pop_n, size=(pop_n, oc.tournament_size))
        winners = entrants[np.arange(pop_n), np.argmax(fit[entrants], axis=1)]
        parents = pop[winners]

        mate = np.arange(pop_n) ^ 1  # pair (0,1), (2,3), ...
        mate[mate >= pop_n] = pop_n - 1  # odd population: last pairs with itself
        partner = parents[mate]
        crossed = rng.random(pop_n) < oc.crossover_rate
        take = rng.random((pop_n, dim)) < 0.5
        children = np.where(crossed[:, None] & take, partner, parents)

        mutate = rng.random((pop_n, dim)) < oc.mutation_rate
        noise = rng.normal(0.0, 1.0, (pop_n, dim)) * sigma
        children = np.clip(children + np.where(mutate, noise, 0.0), lo, hi)
        children[0] = best_genes  # elitism

        fit = objective(children)
        pop = children
        evaluations += pop_n
        gen_best = int(np.argmax(fit))
        if float(fit[gen_best]) > best_fit:
            best_fit = float(fit[gen_best])
            best_genes = pop[gen_best].copy()

    if oc.refine:
        best_genes, best_fit, used = _polish(objective, best_genes, best_fit,
                                             lo, hi)
        evaluations += used

    mu_a, mu_b, tf = (float(v[0]) for v in _decode(best_genes, oc))
    source = SourceParams(mu_a=mu_a, mu_b=mu_b)
    breakdown = rate_point(channel, source,
                           replace(security, test_fraction=tf))
    return OptimResult(best_mu_a=mu_a, best_mu_b=mu_b, best_test_fraction=tf,
                       best_rate=breakdown.rate, breakdown=breakdown,
                       evaluations=evaluations,
                       converged=breakdown.rate > 0.0)


def grid_best(channel: ChannelParams, security: SecurityParams,
              oc: OptimizerConfig, n: int = 200):
    """Brute-force oracle: best rate on an n x n intensity grid.

    Returns (mu_a, mu_b, rate).  The test fraction stays at
    ``oc.test_fraction``; the grid is linear over ``oc.mu_bounds``.
    """
    _require(n >= 2, "grid size must be >= 2")
    axis = np.linspace(oc.mu_bounds[0], oc.mu_bounds[1], n)
    mu_a, mu_b = (g.ravel() for g in np.meshgrid(axis, axis, indexing="ij"))
    q_mu, e_mu = _analytic_values(mu_a, mu_b, channel.eta_a, channel.eta_b,
                                  channel.p_d, channel.e_d)
    out = _rate_values(
        q_mu, e_mu, np.maximum(mu_a, mu_b),
        n_pulses=security.n_pulses, eps_rs=security.eps_rs,
        eps_bar=security.eps_bar, eps_ec=security.eps_ec,
        eps_pa=security.eps_pa, f_e=security.f_e,
        test_fraction=oc.test_fraction, k_test=security.k_test,
        sampling_bound=security.sampling_bound)
    idx = int(np.argmax(out["rate"]))
    return float(mu_a[idx]), float(mu_b[idx]), float(out["rate"][idx])


# -- sweeps ------------------------------------------------------------------


@dataclass(frozen=True)
class SweepPoint:
    total_km: float
    l_a: float
    l_b: float
    result: OptimResult


@dataclass(frozen=True)
class SweepCurve:
    delta_km: float
    points: list[SweepPoint]
    skipped: list[tuple[float, str]]


def _point_seed(base: int, index: int) -> int:
    # Golden-ratio stride keeps per-point streams distinct for any base.
    return (base + 0x9E3779B97F4A7C15 * (index + 1)) % (2 ** 64)


def sweep_distance(channel_template: ChannelParams, delta: float,
                   l_grid, security: SecurityParams, oc: OptimizerConfig,
                   *, warm_starts=()) -> SweepCurve:
    """Optimize every total distance L with l_b - l_a fixed at ``delta``.

    Two passes: an independent GA per grid point, then a cross-seeding
    repair where each point evaluates every other point's optimum (plus
    external ``warm_starts``) and re-polishes if that beats its own GA
    result.  The repair uses only pass-one outputs, so the curve does not
    depend on evaluation order.
    """
    _require(delta >= 0.0, "delta must be >= 0")
    points: list[SweepPoint] = []
    skipped: list[tuple[float, str]] = []
    channels: list[ChannelParams] = []
    for i, total in enumerate(l_grid):
        total = float(total)
        if total < delta:
            skipped.append((total, "total length below the channel difference"))
            continue
        channel = replace(channel_template,
                          l_a=(total - delta) / 2.0, l_b=(total + delta) / 2.0)
        oc_point = replace(oc, rng_seed=_point_seed(oc.rng_seed, i))
        result = optimize_rate(channel, security, oc_point,
                               warm_starts=warm_starts)
        points.append(SweepPoint(total_km=total, l_a=channel.l_a,
                                 l_b=channel.l_b, result=result))
        channels.append(channel)

    # Cross-seeding repair.
    candidates = [(p.result.best_mu_a, p.result.best_mu_b,
                   p.result.best_test_fraction)
                  for p in points if p.result.best_rate > 0.0]
    candidates.extend(tuple(w) for w in warm_starts)
    if candidates:
        for i, point in enumerate(points):
            channel = channels[i]
            objective = _make_objective(channel, security, oc)
            lo, hi = _gene_bounds(oc)
            genes = np.stack([_encode(a, b, t, oc, lo, hi)
                              for a, b, t in candidates])
            fits = objective(genes)
            j = int(np.argmax(fits))
            if float(fits[j]) <= point.result.best_rate:
                continue
            best_genes, best_fit, used = _polish(objective, genes[j],
                                                 float(fits[j]), lo, hi)
            mu_a, mu_b, tf = (float(v[0]) for v in _decode(best_genes, oc))
            source = SourceParams(mu_a=mu_a, mu_b=mu_b)
            breakdown = rate_point(channel, source,
                                   replace(security, test_fraction=tf))
            if breakdown.rate <= point.result.best_rate:
                continue
            result = OptimResult(
                best_mu_a=mu_a, best_mu_b=mu_b, best_test_fraction=tf,
                best_rate=breakdown.rate, breakdown=breakdown,
                evaluations=point.result.evaluations + len(candidates) + used,
                converged=breakdown.rate > 0.0)
            points[i] = replace(point, result=result)

    return SweepCurve(delta_km=float(delta), points=points, skipped=skipped)


@dataclass(frozen=True)
class ProtocolComparison:
    """Asymmetric-vs-baseline sweep pair with per-distance rate ratios.

    ``ratios`` holds (L, asymmetric/baseline) for distances where the
    baseline is positive; ``max_ratio`` is their maximum restricted to
    distances where both curves are positive, nan when there are none.
    """

    delta_km: float
    asymmetric: SweepCurve
    baseline: SweepCurve
    ratios: list[tuple[float, float]]
    max_ratio: float


def compare_protocols(channel_template: ChannelParams, delta: float, l_grid,
                      security: SecurityParams,
                      oc: OptimizerConfig) -> ProtocolComparison:
    """Run the sweep with free intensities and with mu_a = mu_b forced.

    The baseline re-optimizes its single intensity per distance, which is
    the charitable reading of the original protocol.
    """
    asym = sweep_distance(channel_template, delta, l_grid, security,
                          replace(oc, symmetric_constraint=False))
    base = sweep_distance(channel_template, delta, l_grid, security,
                          replace(oc, symmetric_constraint=True))
    base_by_l = {p.total_km: p for p in base.points}
    ratios: list[tuple[float, float]] = []
    max_ratio = float("nan")
    for point in asym.points:
        partner = base_by_l.get(point.total_km)
        if partner is None or partner.result.best_rate <= 0.0:
            continue
        ratio = point.result.best_rate / partner.result.best_rate
        ratios.append((point.total_km, ratio))
        if point.result.best_rate > 0.0:
            if math.isnan(max_ratio) or ratio > max_ratio:
                max_ratio = ratio
    return ProtocolComparison(delta_km=float(delta), asymmetric=asym,
                              baseline=base, ratios=ratios,
                              max_ratio=max_ratio)
