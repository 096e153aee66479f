"""End-to-end acceptance checks.

Each test prints one `[acceptance] <name>: PASS/FAIL (...)` line with the
measured numbers, then asserts the stated target.  Two of the checks
measure targets this implementation demonstrably does not reach at the
pinned operating points; they are left failing on purpose, with the
diagnosis in the printed line, rather than weakened to pass.  run
`pytest -m acceptance -v` to execute only this file.
"""

import math
import time
from dataclasses import replace

import numpy as np
import pytest

from tfqss import (
    ChannelParams,
    FLAG_OK,
    GainError,
    OptimizerConfig,
    SecurityParams,
    SimConfig,
    SourceParams,
    analytic_point,
    asymptotic_rate,
    binary_entropy,
    empirical_vs_analytic,
    gamma_upper,
    key_rate,
    optimize_rate,
    port_intensities,
    qber_sampling_experiment,
    rate_point,
    serfling_gamma,
    sweep_distance,
    compare_protocols,
    grid_best,
)
from tfqss import csvio

pytestmark = pytest.mark.acceptance

REF_CHANNEL = ChannelParams(l_a=50.0, l_b=50.0)
REF_SOURCE = SourceParams(mu_a=0.05, mu_b=0.05)

# The sweep-based checks share the lean GA the presets use; the
# cross-seeding pass in sweep_distance compensates for the smaller
# population on these grids.
SWEEP_GA = OptimizerConfig(population=48, generations=60)


def announce(capsys, name, ok, detail):
    with capsys.disabled():
        print(f"\n[acceptance] {name}: {'PASS' if ok else 'FAIL'} ({detail})")


def warm_triples(curve):
    return [(p.result.best_mu_a, p.result.best_mu_b,
             p.result.best_test_fraction)
            for p in curve.points if p.result.best_rate > 0.0]


def test_monte_carlo_matches_analytic_model(capsys):
    """Twenty seeded 1e7-slot runs sit on the closed-form gain and error."""
    t0 = time.perf_counter()
    cfg = SimConfig(channel=REF_CHANNEL, source=REF_SOURCE, n_slots=10 ** 7)
    worst = 0.0
    within4 = 0
    within6 = 0
    for seed in range(20):
        rep = empirical_vs_analytic(replace(cfg, rng_seed=seed))
        dev = max(rep.dev_q_sigma, rep.dev_e_sigma)
        worst = max(worst, dev)
        within4 += dev <= 4.0
        within6 += dev <= 6.0
    elapsed = time.perf_counter() - t0
    ok = within4 >= 19 and within6 == 20 and elapsed <= 120.0
    announce(capsys, "analytic-vs-monte-carlo", ok,
             f"{within4}/20 within 4 sigma, worst {worst:.2f} sigma, "
             f"{elapsed:.1f}s")
    assert within4 >= 19
    assert within6 == 20
    assert elapsed <= 120.0


def test_sampling_bound_empirical_coverage(capsys):
    """Exceedance frequency of the tight tail bound at eps = 1e-2.

    Measured at the pinned split (population 1e4, half tested) the bound
    sits near two sigma of the test/remainder fluctuation, so a few
    percent of repeats exceed it; the target frequency of 1e-2 is not
    met.  The looser classical bound and smaller eps both cover cleanly,
    which the printed line documents.
    """
    t0 = time.perf_counter()
    cfg = SimConfig(channel=REF_CHANNEL, source=REF_SOURCE, n_slots=10 ** 4,
                    test_fraction=0.5, rng_seed=0)
    repeats = 10 ** 4
    tight = qber_sampling_experiment(cfg, repeats, eps_rs=1e-2)
    serf = qber_sampling_experiment(cfg, repeats, eps_rs=1e-2,
                                    sampling_bound="serfling")
    small_eps = qber_sampling_experiment(cfg, repeats, eps_rs=1e-4)
    elapsed = time.perf_counter() - t0
    ok = tight.frequency <= 1e-2 and elapsed <= 300.0
    announce(capsys, "sampling-coverage", ok,
             f"tight bound exceeded {tight.exceedances}/{tight.applicable} "
             f"(freq {tight.frequency:.4f}) vs target 1e-2; "
             f"serfling {serf.exceedances}/{serf.applicable}; "
             f"eps=1e-4 gives {small_eps.exceedances}/{small_eps.applicable}; "
             f"{elapsed:.1f}s")
    assert elapsed <= 300.0
    assert tight.frequency <= 1e-2


def test_intensity_freedom_multiplies_rate_at_fixed_offset(capsys):
    """Free vs equal-intensity rates across L at a 14 km arm offset.

    On the pinned grid (L up to 400 km) the free optimizer beats the
    equal-intensity baseline by a bounded factor: both curves are alive
    and the baseline concedes only its higher interference error floor.
    Ratios of the targeted size appear where the baseline approaches its
    reach limit, beyond this grid; the extension scan in the printed
    line locates them.
    """
    t0 = time.perf_counter()
    sec = SecurityParams()
    template = ChannelParams(l_a=0.0, l_b=0.0)
    grid = np.arange(14.0, 401.0, 2.0)
    comp = compare_protocols(template, 14.0, grid, sec, SWEEP_GA)
    at_l = max(comp.ratios, key=lambda t: t[1])[0] if comp.ratios else None

    # Where does the advantage actually explode?  Follow the baseline to
    # its reach limit past the pinned window.
    ext_grid = np.arange(500.0, 601.0, 10.0)
    ext = compare_protocols(template, 14.0, ext_grid, sec, SWEEP_GA)
    base_reach = max((p.total_km for p in ext.baseline.points
                      if p.result.best_rate > 0.0), default=None)
    elapsed = time.perf_counter() - t0

    ok = comp.max_ratio >= 10.0 and elapsed <= 600.0
    announce(capsys, "distance-ratio-advantage", ok,
             f"max ratio {comp.max_ratio:.3f} at L={at_l:.0f} km over "
             f"L=14..400; target 10; baseline survives to "
             f"L={base_reach:.0f} km where the ratio reaches "
             f"{ext.max_ratio:.0f}, outside the pinned window; "
             f"{elapsed:.1f}s")
    assert elapsed <= 600.0
    assert comp.max_ratio >= 10.0


def test_large_offset_kills_only_the_baseline(capsys):
    """At 50 and 100 km offsets the equal-intensity protocol yields zero
    everywhere while free intensities still distill key."""
    t0 = time.perf_counter()
    sec = SecurityParams()
    template = ChannelParams(l_a=0.0, l_b=0.0)
    parts = []
    ok = True
    for delta in (50.0, 100.0):
        grid = np.arange(delta, 401.0, 2.0)
        comp = compare_protocols(template, delta, grid, sec, SWEEP_GA)
        base_positive = sum(p.result.best_rate > 0.0
                            for p in comp.baseline.points)
        asym_positive = sum(p.result.best_rate > 0.0
                            for p in comp.asymmetric.points)
        n_points = len(comp.baseline.points)
        ok &= base_positive == 0 and asym_positive >= 1
        parts.append(f"delta={delta:.0f}: baseline 0/{n_points} positive, "
                     f"free {asym_positive}/{n_points}")
    elapsed = time.perf_counter() - t0
    announce(capsys, "large-difference-baseline", ok,
             "; ".join(parts) + f"; {elapsed:.1f}s")
    assert ok


def test_block_size_orders_the_rate_curves(capsys):
    """Pointwise R(1e12) >= R(1e10) >= R(1e8) on equal arms.

    Each sweep seeds the next larger block size with its optima, so the
    ordering cannot be lost to optimizer noise.
    """
    t0 = time.perf_counter()
    template = ChannelParams(l_a=0.0, l_b=0.0)
    grid = np.arange(0.0, 401.0, 2.0)

    curves = {}
    warm = ()
    for n_pulses in (1e8, 1e10, 1e12):
        curve = sweep_distance(template, 0.0, grid,
                               SecurityParams(n_pulses=n_pulses), SWEEP_GA,
                               warm_starts=warm)
        curves[n_pulses] = curve
        warm = tuple(warm_triples(curve))

    violations = 0
    for small, large in ((1e8, 1e10), (1e10, 1e12)):
        for a, b in zip(curves[small].points, curves[large].points):
            if b.result.best_rate < a.result.best_rate:
                violations += 1
    at_100 = next(p.result.best_rate for p in curves[1e8].points
                  if p.total_km == 100.0)
    reach = {n: max((p.total_km for p in c.points
                     if p.result.best_rate > 0.0), default=0.0)
             for n, c in curves.items()}
    elapsed = time.perf_counter() - t0
    ok = violations == 0 and at_100 > 0.0
    announce(capsys, "blocksize-ordering", ok,
             f"{violations} ordering violations over {2 * len(grid)} pairs, "
             f"R(1e8)={at_100:.6g} at L=100 km, reach "
             f"{reach[1e8]:.0f}/{reach[1e10]:.0f}/{reach[1e12]:.0f} km, "
             f"{elapsed:.1f}s")
    assert violations == 0
    assert at_100 > 0.0
    assert elapsed <= 600.0


def test_finite_key_converges_to_asymptotic_limit(capsys):
    """rate(N=1e20) agrees with the infinite-block formula to 1e-6."""
    t0 = time.perf_counter()
    rng = np.random.default_rng(123)
    worst = 0.0
    live = 0
    dead_agree = 0
    for _ in range(10):
        l_a = rng.uniform(10.0, 120.0)
        delta = rng.uniform(0.0, 30.0)
        e_d = rng.uniform(0.005, 0.03)
        mu_a = rng.uniform(0.02, 0.2)
        channel = ChannelParams(l_a=l_a, l_b=l_a + delta, e_d=e_d)
        mu_b = float(np.clip(mu_a * channel.eta_a / channel.eta_b,
                             1e-4, 0.499))
        source = SourceParams(mu_a=mu_a, mu_b=mu_b)
        ge = analytic_point(channel, source)
        finite = key_rate(ge, source, SecurityParams(n_pulses=1e20)).rate
        asym = asymptotic_rate(ge, source)
        if asym == 0.0 and finite == 0.0:
            dead_agree += 1
            continue
        live += 1
        worst = max(worst, abs(finite - asym) / asym)
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-6 and live + dead_agree == 10
    announce(capsys, "asymptotic-convergence", ok,
             f"{live} live points, worst relative gap {worst:.2e}, "
             f"{dead_agree} zero on both sides, {elapsed:.1f}s")
    assert live + dead_agree == 10
    assert worst <= 1e-6


def test_optimizer_dominates_dense_grid(capsys):
    """Full-size GA matches or beats a 200 x 200 intensity grid to 1%."""
    t0 = time.perf_counter()
    sec = SecurityParams()
    oc = OptimizerConfig()
    worst_margin = np.inf
    ok = True
    for delta in (0.0, 10.0, 14.0, 50.0, 100.0):
        channel = ChannelParams(l_a=(150.0 - delta) / 2.0,
                                l_b=(150.0 + delta) / 2.0)
        res = optimize_rate(channel, sec, oc)
        _, _, grid_rate = grid_best(channel, sec, oc)
        if grid_rate > 0.0:
            margin = res.best_rate / grid_rate - 1.0
            worst_margin = min(worst_margin, margin)
            ok &= res.best_rate >= grid_rate * (1.0 - 1e-2)
        else:
            ok &= res.best_rate >= 0.0
    elapsed = time.perf_counter() - t0
    announce(capsys, "optimizer-grid-dominance", ok,
             f"worst margin over the grid {worst_margin:+.2e} across 5 "
             f"offsets, {elapsed:.1f}s")
    assert ok


def test_structural_invariants_hold(capsys, tmp_path):
    """Seven families of exact or 1e-12-tight identities."""
    t0 = time.perf_counter()
    rng = np.random.default_rng(2024)
    families = []

    # Sender relabeling is a pure permutation of the arithmetic.
    ok = True
    for _ in range(50):
        l_a, l_b = rng.uniform(0.0, 200.0, 2)
        mu_a, mu_b = rng.uniform(1e-3, 0.499, 2)
        e_d = rng.uniform(0.0, 0.5)
        a = analytic_point(ChannelParams(l_a=l_a, l_b=l_b, e_d=e_d),
                           SourceParams(mu_a=mu_a, mu_b=mu_b))
        b = analytic_point(ChannelParams(l_a=l_b, l_b=l_a, e_d=e_d),
                           SourceParams(mu_a=mu_b, mu_b=mu_a))
        ok &= a.q_mu == b.q_mu and a.e_mu == b.e_mu
    families.append(("sender-swap", ok))

    # The splitter conserves energy: d1 + d2 is the arriving intensity.
    ok = True
    for _ in range(50):
        mu_a, mu_b = rng.uniform(1e-3, 0.499, 2)
        eta_a, eta_b = rng.uniform(1e-3, 1.0, 2)
        for theta in (0.0, math.pi):
            ports = port_intensities(SourceParams(mu_a=mu_a, mu_b=mu_b),
                                     eta_a, eta_b, theta)
            total = (mu_a * eta_a + mu_b * eta_b) / 2.0
            ok &= abs(ports.d1 + ports.d2 - total) <= 1e-12 * total
    families.append(("port-sum", ok))

    # Flipping the relative phase swaps the ports exactly.
    ok = True
    for _ in range(50):
        mu_a, mu_b = rng.uniform(1e-3, 0.499, 2)
        eta_a, eta_b = rng.uniform(1e-3, 1.0, 2)
        src = SourceParams(mu_a=mu_a, mu_b=mu_b)
        zero = port_intensities(src, eta_a, eta_b, 0.0)
        pi = port_intensities(src, eta_a, eta_b, math.pi)
        ok &= (zero.d1, zero.d2) == (pi.d2, pi.d1)
    families.append(("phase-swap", ok))

    # h(x) = h(1 - x), exactly on dyadic points.
    ok = all(binary_entropy(x) == binary_entropy(1.0 - x)
             for x in (0.03125, 0.0625, 0.125, 0.25, 0.375, 0.5))
    families.append(("entropy-symmetry", ok))

    # The deviation bound tightens with more test bits and relaxes with
    # a larger failure budget; the classical form never undercuts it.
    ok = True
    total = 10 ** 6
    last = np.inf
    for frac in (0.05, 0.1, 0.3, 0.5):
        k = int(total * frac)
        g = gamma_upper(total - k, k, 0.02, 1e-10)
        ok &= g < last
        ok &= g <= serfling_gamma(total - k, k, 1e-10)
        last = g
    ok &= gamma_upper(9e5, 1e5, 0.02, 1e-6) < gamma_upper(9e5, 1e5, 0.02,
                                                          1e-10)
    families.append(("sampling-monotonicity", ok))

    # Rates are never negative and the flag matches positivity.
    ok = True
    for _ in range(50):
        l_a = rng.uniform(0.0, 300.0)
        channel = ChannelParams(l_a=l_a, l_b=l_a + rng.uniform(0.0, 100.0))
        source = SourceParams(mu_a=rng.uniform(1e-3, 0.499),
                              mu_b=rng.uniform(1e-3, 0.499))
        bd = rate_point(channel, source,
                        SecurityParams(n_pulses=10 ** rng.integers(6, 14)))
        ok &= bd.rate >= 0.0
        ok &= (bd.rate > 0.0) == (bd.flag == FLAG_OK)
    families.append(("rate-sign", ok))

    # A written CSV row carries enough to recompute itself bit-for-bit.
    ok = True
    for i in range(5):
        l_a = rng.uniform(10.0, 150.0)
        channel = ChannelParams(l_a=l_a, l_b=l_a + rng.uniform(0.0, 50.0))
        source = SourceParams(mu_a=rng.uniform(0.01, 0.3),
                              mu_b=rng.uniform(0.01, 0.3))
        security = SecurityParams()
        bd = rate_point(channel, source, security)
        path = str(tmp_path / f"inv{i}.csv")
        csvio.write_rows(path, [csvio.breakdown_row(
            "rate", channel, source, security, security.test_fraction, bd)])
        r = csvio.read_rows(path)[0]
        bd2 = rate_point(
            ChannelParams(l_a=r["l_a_km"], l_b=r["l_b_km"], alpha=r["alpha"],
                          eta_d=r["eta_d"], p_d=r["p_d"], e_d=r["e_d"]),
            SourceParams(mu_a=r["mu_a"], mu_b=r["mu_b"]),
            SecurityParams(n_pulses=r["N"], eps_rs=r["eps_rs"],
                           eps_bar=r["eps_bar"], eps_ec=r["eps_ec"],
                           eps_pa=r["eps_pa"], f_e=r["f_e"],
                           test_fraction=r["test_fraction"]))
        ok &= bd2.rate == r["rate"] and bd2.flag == r["flag"]
    families.append(("csv-rederive", ok))

    elapsed = time.perf_counter() - t0
    passed = sum(ok for _, ok in families)
    detail = ", ".join(f"{name}:{'ok' if ok else 'BROKEN'}"
                       for name, ok in families)
    announce(capsys, "invariant-suite", passed == len(families),
             f"{passed}/{len(families)} families ({detail}), {elapsed:.1f}s")
    assert passed == len(families), detail
