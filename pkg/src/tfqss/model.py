"""Analytic model of the two-sender interferometric secret-sharing link.

Two senders launch phase-encoded weak coherent pulses over fibres of
length ``l_a`` and ``l_b`` into a central beam splitter with two threshold
detectors behind it.  Every function here is a pure function of its
arguments, accepts scalars or numpy arrays elementwise, and is safe to
call from multiple threads.

The convention throughout: detector intensities and click probabilities
are per pulse slot, lengths are in km, attenuation in dB/km.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError

__all__ = [
    "BACKGROUND_ERROR_RATE",
    "ChannelParams",
    "SourceParams",
    "PortIntensities",
    "GainError",
    "transmittance",
    "port_intensities",
    "click_probabilities",
    "gain_and_qber",
    "analytic_point",
    "binary_entropy",
]

# Error rate assigned to a slot whose clicks carry no signal information
# (dark counts only, or a double click resolved by a fair coin).
BACKGROUND_ERROR_RATE = 0.5


def _require(condition, message: str) -> None:
    if not np.all(condition):
        raise DomainError(message)


@dataclass(frozen=True)
class ChannelParams:
    """Fibre lengths and receiver hardware for one link configuration.

    ``l_a`` and ``l_b`` are the sender-to-receiver fibre lengths in km.
    ``alpha`` is the fibre attenuation in dB/km, ``eta_d`` the detector
    efficiency, ``p_d`` the dark-count probability per slot and detector,
    and ``e_d`` the optical misalignment error rate.
    """

    l_a: float
    l_b: float
    alpha: float = 0.165
    eta_d: float = 0.55
    p_d: float = 1e-8
    e_d: float = 0.02

    def __post_init__(self) -> None:
        _require(self.l_a >= 0.0, "fibre length l_a must be >= 0")
        _require(self.l_b >= 0.0, "fibre length l_b must be >= 0")
        _require(self.alpha >= 0.0, "attenuation alpha must be >= 0 dB/km")
        _require(0.0 < self.eta_d <= 1.0, "detector efficiency eta_d must be in (0, 1]")
        _require(0.0 <= self.p_d < 1.0, "dark-count probability p_d must be in [0, 1)")
        _require(0.0 <= self.e_d <= 0.5, "misalignment rate e_d must be in [0, 1/2]")

    @property
    def eta_a(self) -> float:
        """Total transmittance of the sender-A arm, detector included."""
        return transmittance(self.l_a, self.alpha, self.eta_d)

    @property
    def eta_b(self) -> float:
        """Total transmittance of the sender-B arm, detector included."""
        return transmittance(self.l_b, self.alpha, self.eta_d)


@dataclass(frozen=True)
class SourceParams:
    """Mean photon numbers of the two senders' pulses."""

    mu_a: float
    mu_b: float

    def __post_init__(self) -> None:
        _require(0.0 < self.mu_a < 1.0, "intensity mu_a must be in (0, 1)")
        _require(0.0 < self.mu_b < 1.0, "intensity mu_b must be in (0, 1)")

    @property
    def mu_max(self) -> float:
        return max(self.mu_a, self.mu_b)


@dataclass(frozen=True)
class PortIntensities:
    """Mean photon numbers arriving at the two output ports."""

    d1: float
    d2: float

    def __post_init__(self) -> None:
        _require(self.d1 >= 0.0, "port intensity d1 must be >= 0")
        _require(self.d2 >= 0.0, "port intensity d2 must be >= 0")


@dataclass(frozen=True)
class GainError:
    """Per-slot detection probability and the error rate of those detections."""

    q_mu: float
    e_mu: float

    def __post_init__(self) -> None:
        _require(0.0 <= self.q_mu <= 1.0, "gain q_mu must be in [0, 1]")
        _require(0.0 <= self.e_mu <= 1.0, "error rate e_mu must be in [0, 1]")


# -- elementwise internals ---------------------------------------------------
#
# These operate on raw floats/arrays with no validation and are shared by the
# public API, the optimizer, and the simulator, so that a scalar evaluation
# and a vectorized one run the exact same arithmetic.


def _transmittance_values(length, alpha, eta_d):
    return eta_d * 10.0 ** (-alpha * length / 10.0)


def _port_values(mu_eta_a, mu_eta_b, cos_theta):
    sa = np.sqrt(mu_eta_a) / 2.0
    sb = np.sqrt(mu_eta_b) / 2.0
    d1 = (sa + cos_theta * sb) ** 2
    d2 = (sa - cos_theta * sb) ** 2
    return d1, d2


def _click_values(intensity, p_d):
    # 1 - (1 - p_d) exp(-D), written so that tiny D does not cancel to zero.
    return p_d + (1.0 - p_d) * (-np.expm1(-intensity))


def _gain_qber_values(q1, q2, e_d):
    lone1 = q1 * (1.0 - q2)
    lone2 = q2 * (1.0 - q1)
    both = q1 * q2
    q_mu = lone1 + lone2 + both
    numer = e_d * lone1 + (1.0 - e_d) * lone2 + 0.5 * both
    safe = np.where(q_mu > 0.0, q_mu, 1.0)
    e_mu = np.where(q_mu > 0.0, numer / safe, BACKGROUND_ERROR_RATE)
    return q_mu, e_mu


def _analytic_values(mu_a, mu_b, eta_a, eta_b, p_d, e_d):
    """Full chain intensities -> (q_mu, e_mu), elementwise."""
    d1, d2 = _port_values(mu_a * eta_a, mu_b * eta_b, 1.0)
    q1 = _click_values(d1, p_d)
    q2 = _click_values(d2, p_d)
    return _gain_qber_values(q1, q2, e_d)


def _entropy_values(x):
    inner = (x > 0.0) & (x < 1.0)
    xs = np.where(inner, x, 0.5)
    return np.where(inner, -(xs * np.log2(xs)) - (1.0 - xs) * np.log2(1.0 - xs), 0.0)


# -- public operations -------------------------------------------------------


def transmittance(length, alpha, eta_d):
    """Arm transmittance ``eta_d * 10**(-alpha * length / 10)``.

    >>> transmittance(0.0, 0.165, 0.55)
    0.55
    """
    _require(np.asarray(length) >= 0.0, "length must be >= 0")
    _require(np.asarray(alpha) >= 0.0, "alpha must be >= 0")
    eta_d_arr = np.asarray(eta_d)
    _require((eta_d_arr > 0.0) & (eta_d_arr <= 1.0), "eta_d must be in (0, 1]")
    out = _transmittance_values(length, alpha, eta_d)
    if np.isscalar(length) and np.isscalar(alpha) and np.isscalar(eta_d):
        return float(out)
    return out


def port_intensities(source: SourceParams, eta_a: float, eta_b: float,
                     theta: float = 0.0) -> PortIntensities:
    """Mean photon numbers at the two ports for relative phase ``theta``.

    The encoding uses only the two phase values 0 and pi, so ``theta`` must
    be exactly one of them; the cosine is then exactly +1 or -1 and the two
    phase choices map onto each other without rounding error.
    """
    _require(0.0 < eta_a <= 1.0, "eta_a must be in (0, 1]")
    _require(0.0 < eta_b <= 1.0, "eta_b must be in (0, 1]")
    if theta == 0.0:
        cos_theta = 1.0
    elif theta == math.pi:
        cos_theta = -1.0
    else:
        raise DomainError("theta must be exactly 0 or pi")
    d1, d2 = _port_values(source.mu_a * eta_a, source.mu_b * eta_b, cos_theta)
    return PortIntensities(d1=float(d1), d2=float(d2))


def click_probabilities(ports: PortIntensities, p_d: float) -> tuple[float, float]:
    """Per-slot click probability of each threshold detector.

    A detector fires on incident light or on a dark count:
    ``q_i = 1 - (1 - p_d) exp(-D_i)``.
    """
    _require(0.0 <= p_d < 1.0, "p_d must be in [0, 1)")
    q1 = _click_values(ports.d1, p_d)
    q2 = _click_values(ports.d2, p_d)
    return float(q1), float(q2)


def gain_and_qber(q1: float, q2: float, e_d: float) -> GainError:
    """Overall gain and error rate from the two click probabilities.

    Lone clicks of the wrong detector and misaligned clicks of the right one
    contribute errors with weight ``e_d`` and ``1 - e_d``; double clicks are
    kept and assigned by a fair coin, contributing 1/2.  A slot with no
    possible click has gain 0 and error rate 1/2 by convention.
    """
    _require(0.0 <= q1 <= 1.0, "q1 must be in [0, 1]")
    _require(0.0 <= q2 <= 1.0, "q2 must be in [0, 1]")
    _require(0.0 <= e_d <= 0.5, "e_d must be in [0, 1/2]")
    q_mu, e_mu = _gain_qber_values(q1, q2, e_d)
    return GainError(q_mu=float(q_mu), e_mu=float(e_mu))


def analytic_point(channel: ChannelParams, source: SourceParams) -> GainError:
    """Gain and error rate of one (channel, source) operating point.

    Chains transmittance, port intensities at the correct relative phase,
    click probabilities, and the gain/error combination.
    """
    q_mu, e_mu = _analytic_values(source.mu_a, source.mu_b,
                                  channel.eta_a, channel.eta_b,
                                  channel.p_d, channel.e_d)
    return GainError(q_mu=float(q_mu), e_mu=float(e_mu))


def binary_entropy(x):
    """Binary Shannon entropy in bits, with h(0) = h(1) = 0.

    >>> binary_entropy(0.5)
    1.0
    """
    arr = np.asarray(x, dtype=float)
    _require((arr >= 0.0) & (arr <= 1.0), "entropy argument must be in [0, 1]")
    out = _entropy_values(arr)
    return float(out) if np.isscalar(x) else out
