"""Finite-size key-rate analysis.

Takes the analytic gain and error rate of an operating point and produces
the extractable secret fraction per pulse slot, accounting for parameter
estimation on a random test subset, error-correction leakage, smoothing,
and privacy-amplification costs.  All internals are elementwise over numpy
arrays; the public scalar API routes through the same code so an optimizer
evaluating a vector of candidates and a user evaluating one point get
bit-identical numbers.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, InsufficientSampleError, SamplingBoundError
from .model import GainError, SourceParams, _entropy_values, _require

__all__ = [
    "SecurityParams",
    "RateBreakdown",
    "FLAG_OK",
    "FLAG_ZERO",
    "FLAG_THRESHOLD",
    "FLAG_INSUFFICIENT",
    "FLAG_INAPPLICABLE",
    "E_UPPER_LIMIT",
    "gamma_upper",
    "serfling_gamma",
    "epsilon_total",
    "collision_probability",
    "leakage_fractions",
    "key_rate",
    "rate_point",
    "asymptotic_rate",
]

# Flags attached to a rate evaluation, from most benign to most structural.
FLAG_OK = "ok"
FLAG_ZERO = "zero"                        # formula gave a non-positive rate
FLAG_THRESHOLD = "threshold"              # error bound beyond the provable region
FLAG_INSUFFICIENT = "insufficient-sample" # fewer remaining bits than test bits need
FLAG_INAPPLICABLE = "bound-inapplicable"  # tail bound undefined at these sizes

_CODE_OK = 0
_CODE_ZERO = 1
_CODE_THRESHOLD = 2
_CODE_INSUFFICIENT = 3
_CODE_INAPPLICABLE = 4
_FLAG_NAMES = (FLAG_OK, FLAG_ZERO, FLAG_THRESHOLD, FLAG_INSUFFICIENT,
               FLAG_INAPPLICABLE)

SAMPLING_BOUNDS = ("tight", "serfling")

# The collision expression 1 - e^2 - (1 - 6e)^2 / 2 rises only up to its
# vertex at e = 3/19 and falls past it, so beyond the vertex a larger error
# rate would be credited with MORE extractable randomness per bit.  The
# provable region therefore ends at the vertex; rate evaluations with a
# bounded error rate above it report the threshold flag instead of a rate.
E_UPPER_LIMIT = 3.0 / 19.0


@dataclass(frozen=True)
class SecurityParams:
    """Block size, failure budgets, and test-sampling policy.

    ``n_pulses`` is the number of transmitted pulse slots.  ``k_test``
    fixes the test-set size directly; when None it is ``test_fraction``
    times the expected number of detections, rounded half up, at least 1.
    ``sampling_bound`` selects the tail bound for parameter estimation:
    "tight" is the default closed form, "serfling" the looser classical
    one that is always applicable.
    """

    n_pulses: float = 1e12
    eps_rs: float = 1e-10
    eps_bar: float = 1e-10
    eps_ec: float = 1e-10
    eps_pa: float = 1e-10
    f_e: float = 1.15
    test_fraction: float = 0.1
    k_test: int | None = None
    sampling_bound: str = "tight"

    def __post_init__(self) -> None:
        _require(self.n_pulses >= 1.0, "n_pulses must be >= 1")
        for name in ("eps_rs", "eps_bar", "eps_ec", "eps_pa"):
            value = getattr(self, name)
            _require(0.0 < value < 1.0, f"{name} must be in (0, 1)")
        _require(self.f_e >= 1.0, "error-correction inefficiency f_e must be >= 1")
        _require(0.0 < self.test_fraction < 1.0, "test_fraction must be in (0, 1)")
        if self.k_test is not None:
            _require(self.k_test >= 1, "k_test must be >= 1")
        if self.sampling_bound not in SAMPLING_BOUNDS:
            raise DomainError(
                f"sampling_bound must be one of {SAMPLING_BOUNDS}, "
                f"got {self.sampling_bound!r}")


@dataclass(frozen=True)
class RateBreakdown:
    """One finite-size rate evaluation with every intermediate kept."""

    q_mu: float
    e_mu: float
    e_mu_upper: float
    p_co: float
    leak_internal: float
    leak_external: float
    pen_smooth: float
    pen_ec: float
    pen_pa: float
    rate: float
    flag: str


# -- tail bounds -------------------------------------------------------------


def _gamma_values(n, k, lam, eps):
    """Closed-form sampling deviation, elementwise, with applicability mask.

    ``lam`` is clamped below at 1/(2k) so an all-clean sample still yields a
    positive deviation.  Returns (gamma, ok) where ok marks entries whose
    logarithmic factor is positive; gamma is meaningless where ok is False.
    """
    lam = np.maximum(lam, 0.5 / np.asarray(k, dtype=float))
    total = n + k
    with np.errstate(divide="ignore", invalid="ignore"):
        logfac = (total / (n * k)) * np.log(
            total / (2.0 * np.pi * n * k * lam * (1.0 - lam) * eps * eps))
    ok = logfac > 0.0
    g = np.where(ok, logfac, 1.0)
    big = np.maximum(n, k)
    ag = big * g / total
    gamma = ((1.0 - 2.0 * lam) * ag + np.sqrt(ag * ag + 4.0 * lam * (1.0 - lam) * g)) \
        / (2.0 + 2.0 * big * ag / total)
    return gamma, ok


def _serfling_values(n, k, eps):
    total = n + k
    return np.sqrt(total * (k + 1.0) * np.log(1.0 / eps) / (2.0 * n * k * k))


def gamma_upper(n, k, lam, eps):
    """Upper deviation of the remainder error rate over the tested one.

    Observing error rate ``lam`` on ``k`` randomly chosen bits out of
    ``n + k``, the untested ``n`` bits have error rate at most
    ``lam + gamma_upper(n, k, lam, eps)`` except with probability ``eps``.
    Raises SamplingBoundError where the bound's logarithmic factor is
    non-positive (tiny samples or loose ``eps``); see ``serfling_gamma``
    for a fallback without that restriction.
    """
    n_arr = np.asarray(n, dtype=float)
    k_arr = np.asarray(k, dtype=float)
    lam_arr = np.asarray(lam, dtype=float)
    _require(n_arr >= 1.0, "n must be >= 1")
    _require(k_arr >= 1.0, "k must be >= 1")
    _require((lam_arr >= 0.0) & (lam_arr < 1.0), "lam must be in [0, 1)")
    _require((np.asarray(eps) > 0.0) & (np.asarray(eps) < 1.0),
             "eps must be in (0, 1)")
    gamma, ok = _gamma_values(n_arr, k_arr, lam_arr, eps)
    if not np.all(ok):
        raise SamplingBoundError(
            "sampling bound inapplicable (non-positive log factor); "
            "increase the test set or use the serfling bound")
    scalars = all(np.isscalar(v) for v in (n, k, lam, eps))
    return float(gamma) if scalars else gamma


def serfling_gamma(n, k, eps):
    """Serfling-style deviation bound for sampling without replacement.

    Always applicable, never smaller than ``gamma_upper`` where both exist,
    so it is the safe but pessimistic choice.
    """
    n_arr = np.asarray(n, dtype=float)
    k_arr = np.asarray(k, dtype=float)
    _require(n_arr >= 1.0, "n must be >= 1")
    _require(k_arr >= 1.0, "k must be >= 1")
    _require((np.asarray(eps) > 0.0) & (np.asarray(eps) < 1.0),
             "eps must be in (0, 1)")
    out = _serfling_values(n_arr, k_arr, eps)
    scalars = all(np.isscalar(v) for v in (n, k, eps))
    return float(out) if scalars else out


def epsilon_total(security: SecurityParams) -> float:
    """Overall failure probability: the four budget terms just add."""
    return security.eps_rs + security.eps_bar + security.eps_ec + security.eps_pa


# -- rate assembly -----------------------------------------------------------


def _collision_values(e_upper):
    return 1.0 - e_upper ** 2 - (1.0 - 6.0 * e_upper) ** 2 / 2.0


def collision_probability(e_upper):
    """Per-bit collision probability bound at error rate ``e_upper``.

    Returns the raw closed form over the whole [0, 1/2] domain; it is a
    meaningful bound only up to ``E_UPPER_LIMIT`` (its vertex), and rate
    evaluations treat anything above that as past the security threshold.
    """
    arr = np.asarray(e_upper, dtype=float)
    _require((arr >= 0.0) & (arr <= 0.5), "e_upper must be in [0, 1/2]")
    out = _collision_values(arr)
    return float(out) if np.isscalar(e_upper) else out


def leakage_fractions(source: SourceParams, eta_a: float, eta_b: float
                      ) -> tuple[float, float]:
    """Photon fractions available to the two adversary classes.

    Returns ``(leak_internal, leak_external)``.  The internal bound
    ``2 * mu_max`` is what the rate formula consumes; the external one,
    ``mu_a (1 - eta_a) + mu_b (1 - eta_b)``, counts photons lost in the
    channels and is reported for diagnostics only.
    """
    _require(0.0 < eta_a <= 1.0, "eta_a must be in (0, 1]")
    _require(0.0 < eta_b <= 1.0, "eta_b must be in (0, 1]")
    internal = 2.0 * source.mu_max
    external = source.mu_a * (1.0 - eta_a) + source.mu_b * (1.0 - eta_b)
    return internal, external


def _rate_values(q_mu, e_mu, mu_max, *, n_pulses, eps_rs, eps_bar, eps_ec,
                 eps_pa, f_e, test_fraction, k_test=None,
                 sampling_bound="tight"):
    """Vectorized finite-size rate.  Returns a dict of elementwise arrays.

    Flags are integer codes (see _CODE_*); ``rate`` is already clamped at
    zero and zeroed wherever a structural flag fires.
    """
    q_mu, e_mu, mu_max, tf = np.broadcast_arrays(
        np.asarray(q_mu, dtype=float), np.asarray(e_mu, dtype=float),
        np.asarray(mu_max, dtype=float), np.asarray(test_fraction, dtype=float))
    out_shape = q_mu.shape
    # Masked assignment below needs at least one axis.
    q_mu, e_mu, mu_max, tf = (np.atleast_1d(a) for a in (q_mu, e_mu, mu_max, tf))
    shape = q_mu.shape

    n_mu = n_pulses * q_mu
    if k_test is None:
        k = np.maximum(np.floor(tf * n_mu + 0.5), 1.0)
    else:
        k = np.broadcast_to(np.asarray(k_test, dtype=float), shape).copy()
    n_rem = n_mu - k

    code = np.zeros(shape, dtype=np.int8)
    insufficient = n_rem < 1.0
    code[insufficient] = _CODE_INSUFFICIENT

    # Evaluate the tail bound only on entries where it is well posed.
    safe = ~insufficient & (e_mu < 1.0)
    n_safe = np.where(safe, n_rem, 2.0)
    k_safe = np.where(safe, k, 2.0)
    lam_safe = np.where(safe, e_mu, 0.25)
    if sampling_bound == "serfling":
        gamma = _serfling_values(n_safe, k_safe, eps_rs)
        applicable = np.ones(shape, dtype=bool)
    else:
        gamma, applicable = _gamma_values(n_safe, k_safe, lam_safe, eps_rs)
    inapplicable = safe & ~applicable
    code[inapplicable] = _CODE_INAPPLICABLE

    usable = safe & applicable
    e_upper = np.where(usable, e_mu + gamma, np.nan)
    p_co = _collision_values(e_upper)
    threshold = usable & ((e_upper > E_UPPER_LIMIT) | (p_co <= 0.0))
    code[threshold] = _CODE_THRESHOLD

    live = usable & ~threshold
    p_safe = np.where(live, p_co, 0.5)
    gross = -(1.0 - 2.0 * mu_max) * np.log2(p_safe) - f_e * _entropy_values(e_mu)

    pen_smooth = 7.0 * np.sqrt(n_mu * np.log2(2.0 / eps_bar)) / n_pulses
    pen_ec = np.log2(2.0 / eps_ec) / n_pulses
    pen_pa = 2.0 * np.log2(1.0 / eps_pa) / n_pulses
    raw = q_mu * gross - pen_smooth - pen_ec - pen_pa

    zero = live & (raw <= 0.0)
    code[zero] = _CODE_ZERO
    rate = np.where(live & (raw > 0.0), raw, 0.0)

    out = {
        "n_mu": n_mu,
        "k": k,
        "e_mu_upper": e_upper,
        "p_co": p_co,
        "pen_smooth": pen_smooth,
        "pen_ec": np.broadcast_to(np.asarray(pen_ec), shape),
        "pen_pa": np.broadcast_to(np.asarray(pen_pa), shape),
        "raw": raw,
        "rate": rate,
        "code": code,
    }
    return {name: np.reshape(value, out_shape) for name, value in out.items()}


def _asymptotic_values(q_mu, e_mu, mu_max, f_e):
    """Infinite-block rate: the finite-size gross term with no penalties."""
    p_co = _collision_values(e_mu)
    live = (e_mu <= E_UPPER_LIMIT) & (p_co > 0.0)
    p_safe = np.where(live, p_co, 0.5)
    gross = -(1.0 - 2.0 * mu_max) * np.log2(p_safe) - f_e * _entropy_values(e_mu)
    raw = q_mu * gross
    return np.where(live & (raw > 0.0), raw, 0.0)


def key_rate(gain_error: GainError, source: SourceParams,
             security: SecurityParams, *, eta_a: float | None = None,
             eta_b: float | None = None) -> RateBreakdown:
    """Finite-size secret fraction per pulse slot at one operating point.

    ``eta_a``/``eta_b`` are only needed for the diagnostic external leakage
    field; without them it is reported as nan.  Raises
    InsufficientSampleError when an explicitly supplied ``k_test`` leaves no
    remainder to distill from.
    """
    if security.k_test is not None:
        n_mu = security.n_pulses * gain_error.q_mu
        if security.k_test >= n_mu:
            raise InsufficientSampleError(
                f"k_test={security.k_test} test bits but only about "
                f"{n_mu:.1f} detections at this operating point")
    out = _rate_values(
        gain_error.q_mu, gain_error.e_mu, source.mu_max,
        n_pulses=security.n_pulses, eps_rs=security.eps_rs,
        eps_bar=security.eps_bar, eps_ec=security.eps_ec,
        eps_pa=security.eps_pa, f_e=security.f_e,
        test_fraction=security.test_fraction, k_test=security.k_test,
        sampling_bound=security.sampling_bound)
    if eta_a is not None and eta_b is not None:
        leak_internal, leak_external = leakage_fractions(source, eta_a, eta_b)
    else:
        leak_internal = 2.0 * source.mu_max
        leak_external = float("nan")
    return RateBreakdown(
        q_mu=gain_error.q_mu,
        e_mu=gain_error.e_mu,
        e_mu_upper=float(out["e_mu_upper"]),
        p_co=float(out["p_co"]),
        leak_internal=leak_internal,
        leak_external=leak_external,
        pen_smooth=float(out["pen_smooth"]),
        pen_ec=float(out["pen_ec"]),
        pen_pa=float(out["pen_pa"]),
        rate=float(out["rate"]),
        flag=_FLAG_NAMES[int(out["code"])],
    )


def rate_point(channel, source: SourceParams,
               security: SecurityParams) -> RateBreakdown:
    """Convenience chain: analytic model then finite-size rate."""
    from .model import analytic_point
    ge = analytic_point(channel, source)
    return key_rate(ge, source, security,
                    eta_a=channel.eta_a, eta_b=channel.eta_b)


def asymptotic_rate(gain_error: GainError, source: SourceParams,
                    f_e: float = 1.15) -> float:
    """Rate in the infinite-block limit, for convergence checks."""
    _require(f_e >= 1.0, "f_e must be >= 1")
    return float(_asymptotic_values(gain_error.q_mu, gain_error.e_mu,
                                    source.mu_max, f_e))
