"""Slot-level Monte Carlo simulation of the protocol.

Serves as an empirical oracle for the analytic model: each pulse slot
draws the two senders' phase bits, samples detector clicks from the
resulting port intensities, applies the parity-dependent bit mapping, and
tallies errors against the XOR of the sender bits.

Slots are processed in fixed-size chunks.  Each chunk owns a
counter-based RNG stream keyed by (rng_seed, chunk index), so the output
is bit-identical no matter how many worker threads run, and the compiled
and numpy kernels consume the same uniforms in the same order.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import _slotkernel_np
from ._streams import round_half_up as _round_half_up
from ._streams import stream as _stream
from .errors import DomainError
from .model import (ChannelParams, SourceParams, _click_values, _port_values,
                    _require, analytic_point)
from .finitekey import _gamma_values, _serfling_values

try:
    from . import _slotkernel as _compiled
except ImportError:   # extension not built; numpy fallback only
    _compiled = None

__all__ = [
    "SimConfig",
    "SlotTally",
    "Detections",
    "SimResult",
    "DeviationReport",
    "CoverageReport",
    "compiled_kernel_available",
    "run_simulation",
    "empirical_vs_analytic",
    "sift_and_xor_check",
    "qber_sampling_experiment",
]

DEFAULT_CHUNK = 1 << 20

# Reserved RNG stream indices.  Chunk streams count up from zero, so the
# extras live at the far end of the 64-bit stream space.
_TEST_PICK_STREAM = (1 << 64) - 1
_EXPERIMENT_STREAM_BASE = 1 << 32

BACKENDS = ("auto", "compiled", "numpy")


def compiled_kernel_available() -> bool:
    return _compiled is not None


@dataclass(frozen=True)
class SimConfig:
    channel: ChannelParams
    source: SourceParams
    n_slots: int
    test_fraction: float = 0.1
    rng_seed: int = 0
    chunk_size: int = DEFAULT_CHUNK
    workers: int = 1
    backend: str = "auto"

    def __post_init__(self) -> None:
        _require(self.n_slots >= 1, "n_slots must be >= 1")
        _require(0.0 < self.test_fraction < 1.0, "test_fraction must be in (0, 1)")
        _require(0 <= self.rng_seed < 2 ** 64, "rng_seed must fit in 64 bits")
        _require(self.chunk_size >= 1, "chunk_size must be >= 1")
        _require(self.workers >= 1, "workers must be >= 1")
        if self.backend not in BACKENDS:
            raise DomainError(f"backend must be one of {BACKENDS}, "
                              f"got {self.backend!r}")


@dataclass(frozen=True)
class SlotTally:
    """Event counts over one run."""

    n_slots: int
    n_click: int
    n_double: int
    n_error: int
    n_test: int
    lone_d1: int
    lone_d2: int

    def __post_init__(self) -> None:
        _require(self.n_error <= self.n_click <= self.n_slots,
                 "tally ordering violated")
        _require(self.n_double <= self.n_click, "tally ordering violated")
        _require(self.lone_d1 + self.lone_d2 + self.n_double == self.n_click,
                 "click conservation violated")


@dataclass(frozen=True)
class Detections:
    """Per-detection record arrays, ordered by slot index.

    ``test_index`` holds the positions (into these arrays) reserved for
    parameter estimation.
    """

    slot: np.ndarray
    detector: np.ndarray
    double: np.ndarray
    alice: np.ndarray
    bob: np.ndarray
    charlie: np.ndarray
    test_index: np.ndarray


@dataclass(frozen=True)
class SimResult:
    config: SimConfig
    tally: SlotTally
    q_emp: float
    e_emp: float
    e_sample: float
    e_remainder: float
    stderr_q: float
    stderr_e: float
    detections: Detections | None = None


def _resolve_kernel(backend: str):
    if backend == "numpy":
        return _slotkernel_np.simulate_chunk
    if backend == "compiled":
        if _compiled is None:
            raise DomainError("compiled kernel requested but not built")
        return _compiled.simulate_chunk
    return (_compiled or _slotkernel_np).simulate_chunk


def run_simulation(cfg: SimConfig, *, keep_detections: bool = False) -> SimResult:
    """Run the Monte Carlo and reduce it to empirical gain and error rates.

    A fraction ``test_fraction`` of the detections (rounded half up) is
    drawn uniformly, without replacement, as the parameter-estimation
    subset; its error rate is reported separately from the remainder's.
    """
    kernel = _resolve_kernel(cfg.backend)
    d_corr, d_wrong = _port_values(cfg.source.mu_a * cfg.channel.eta_a,
                                   cfg.source.mu_b * cfg.channel.eta_b, 1.0)
    q_correct = float(_click_values(d_corr, cfg.channel.p_d))
    q_wrong = float(_click_values(d_wrong, cfg.channel.p_d))
    e_d = cfg.channel.e_d

    starts = range(0, cfg.n_slots, cfg.chunk_size)
    jobs = [(idx, start, min(cfg.chunk_size, cfg.n_slots - start))
            for idx, start in enumerate(starts)]

    def one_chunk(job):
        idx, start, size = job
        u = _stream(cfg.rng_seed, idx).random((6, size))
        return kernel(u, q_correct, q_wrong, e_d, start)

    if cfg.workers == 1:
        parts = [one_chunk(job) for job in jobs]
    else:
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            parts = list(pool.map(one_chunk, jobs))

    slot = np.concatenate([p[0] for p in parts])
    det = np.concatenate([p[1] for p in parts])
    dbl = np.concatenate([p[2] for p in parts])
    alice = np.concatenate([p[3] for p in parts])
    bob = np.concatenate([p[4] for p in parts])
    charlie = np.concatenate([p[5] for p in parts])

    n_click = slot.size
    errors = charlie != (alice ^ bob)
    n_error = int(np.count_nonzero(errors))
    n_double = int(np.count_nonzero(dbl))
    lone_d1 = int(np.count_nonzero((det == 1) & (dbl == 0)))
    lone_d2 = int(np.count_nonzero((det == 2) & (dbl == 0)))

    n_test = _round_half_up(cfg.test_fraction * n_click)
    perm = _stream(cfg.rng_seed, _TEST_PICK_STREAM).permutation(n_click)
    test_index = np.sort(perm[:n_test])
    rest_index = perm[n_test:]
    e_sample = float(np.mean(errors[test_index])) if n_test else float("nan")
    e_remainder = (float(np.mean(errors[rest_index]))
                   if rest_index.size else float("nan"))

    q_emp = n_click / cfg.n_slots
    e_emp = n_error / n_click if n_click else float("nan")
    stderr_q = float(np.sqrt(q_emp * (1.0 - q_emp) / cfg.n_slots))
    stderr_e = (float(np.sqrt(e_emp * (1.0 - e_emp) / n_click))
                if n_click else float("nan"))

    tally = SlotTally(n_slots=cfg.n_slots, n_click=n_click, n_double=n_double,
                      n_error=n_error, n_test=n_test,
                      lone_d1=lone_d1, lone_d2=lone_d2)
    detections = None
    if keep_detections:
        detections = Detections(slot=slot, detector=det, double=dbl,
                                alice=alice, bob=bob, charlie=charlie,
                                test_index=test_index)
    return SimResult(config=cfg, tally=tally, q_emp=q_emp, e_emp=e_emp,
                     e_sample=e_sample, e_remainder=e_remainder,
                     stderr_q=stderr_q, stderr_e=stderr_e,
                     detections=detections)


@dataclass(frozen=True)
class DeviationReport:
    """Side-by-side of analytic and simulated gain/error with significance.

    Deviations are normalized by binomial sigma at the analytic rates
    (observed click count in the error-rate denominator).  ``wide_interval``
    marks runs with too little statistics for the error-rate comparison to
    mean much; such runs do not fail on the error rate.
    """

    q_analytic: float
    e_analytic: float
    result: SimResult
    dev_q_sigma: float
    dev_e_sigma: float
    sigma_threshold: float
    wide_interval: bool
    passed: bool


def empirical_vs_analytic(cfg: SimConfig, sigma_threshold: float = 4.0,
                          result: SimResult | None = None) -> DeviationReport:
    """Compare one simulation against the closed-form model.

    Pass ``result`` to grade an existing run instead of launching a new one.
    """
    _require(sigma_threshold > 0.0, "sigma_threshold must be > 0")
    if result is None:
        result = run_simulation(cfg)
    ge = analytic_point(cfg.channel, cfg.source)
    n_click = result.tally.n_click

    sigma_q = np.sqrt(ge.q_mu * (1.0 - ge.q_mu) / cfg.n_slots)
    dev_q = abs(result.q_emp - ge.q_mu) / sigma_q if sigma_q > 0 else 0.0

    if n_click > 0:
        sigma_e = np.sqrt(ge.e_mu * (1.0 - ge.e_mu) / n_click)
        dev_e = abs(result.e_emp - ge.e_mu) / sigma_e if sigma_e > 0 else 0.0
        wide = n_click < 100 or sigma_threshold * sigma_e >= 0.25
    else:
        dev_e = float("nan")
        wide = True

    passed = bool(dev_q <= sigma_threshold
                  and (wide or dev_e <= sigma_threshold))
    return DeviationReport(q_analytic=ge.q_mu, e_analytic=ge.e_mu,
                           result=result, dev_q_sigma=float(dev_q),
                           dev_e_sigma=float(dev_e),
                           sigma_threshold=sigma_threshold,
                           wide_interval=bool(wide), passed=passed)


def sift_and_xor_check(alice_bits, bob_bits, charlie_bits, detected_slots) -> int:
    """Count detections violating the XOR reconstruction rule.

    With no misalignment and no dark counts the only violations left are
    the fair-coin draws on double clicks.
    """
    alice = np.asarray(alice_bits)
    bob = np.asarray(bob_bits)
    charlie = np.asarray(charlie_bits)
    slots = np.asarray(detected_slots)
    if not (alice.shape == bob.shape == charlie.shape == slots.shape):
        raise DomainError("bit sequences and slot index must have equal length")
    return int(np.count_nonzero(charlie != (alice ^ bob)))


@dataclass(frozen=True)
class CoverageReport:
    """Empirical check of the sampling tail bound.

    ``exceedances`` counts repeats whose untested-subset error rate broke
    above the bound; repeats where the bound was not applicable (its log
    factor non-positive) are counted separately and excluded from the
    frequency.
    """

    repeats: int
    population: int
    test_bits: int
    error_prob: float
    eps_rs: float
    exceedances: int
    applicable: int
    inapplicable: int

    @property
    def frequency(self) -> float:
        return self.exceedances / self.applicable if self.applicable else float("nan")


def qber_sampling_experiment(cfg: SimConfig, repeats: int, *,
                             eps_rs: float = 1e-2,
                             sampling_bound: str = "tight",
                             error_prob: float | None = None) -> CoverageReport:
    """Stress the parameter-estimation bound by direct resampling.

    Each repeat draws a fresh population of ``cfg.n_slots`` sifted bits,
    each in error with the operating point's analytic probability (or
    ``error_prob`` when given), splits off round(test_fraction * n) bits
    uniformly as the test set, and checks whether the remainder's error
    rate exceeds the bound built from the test set.
    """
    _require(repeats >= 1, "repeats must be >= 1")
    _require(0.0 < eps_rs < 1.0, "eps_rs must be in (0, 1)")
    if sampling_bound not in ("tight", "serfling"):
        raise DomainError("sampling_bound must be 'tight' or 'serfling'")
    if error_prob is None:
        error_prob = analytic_point(cfg.channel, cfg.source).e_mu
    _require(0.0 <= error_prob <= 1.0, "error_prob must be in [0, 1]")

    n_pop = cfg.n_slots
    k = _round_half_up(cfg.test_fraction * n_pop)
    exceed = 0
    applicable = 0
    inapplicable = 0
    for r in range(repeats):
        rng = _stream(cfg.rng_seed, _EXPERIMENT_STREAM_BASE + r)
        bits = rng.random(n_pop) < error_prob
        if k >= n_pop:
            # Everything tested: empty remainder, nothing to exceed.
            applicable += 1
            continue
        perm = rng.permutation(n_pop)
        e_samp = float(np.mean(bits[perm[:k]]))
        e_rem = float(np.mean(bits[perm[k:]]))
        n_rem = n_pop - k
        if sampling_bound == "serfling":
            gamma = float(_serfling_values(float(n_rem), float(k), eps_rs))
        else:
            gamma_arr, ok = _gamma_values(float(n_rem), float(k),
                                          e_samp, eps_rs)
            if not ok:
                inapplicable += 1
                continue
            gamma = float(gamma_arr)
        applicable += 1
        if e_rem > e_samp + gamma:
            exceed += 1
    return CoverageReport(repeats=repeats, population=n_pop, test_bits=k,
                          error_prob=float(error_prob), eps_rs=eps_rs,
                          exceedances=exceed, applicable=applicable,
                          inapplicable=inapplicable)
