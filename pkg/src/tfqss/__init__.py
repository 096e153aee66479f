"""Key-rate model, finite-size analysis, Monte Carlo validation, and
parameter optimization for a two-sender interferometric secret-sharing
protocol over asymmetric channels."""

from .errors import (ConfigError, DomainError, InsufficientSampleError,
                     SamplingBoundError)
from .model import (BACKGROUND_ERROR_RATE, ChannelParams, GainError,
                    PortIntensities, SourceParams, analytic_point,
                    binary_entropy, click_probabilities, gain_and_qber,
                    port_intensities, transmittance)
from .finitekey import (E_UPPER_LIMIT, FLAG_INAPPLICABLE, FLAG_INSUFFICIENT,
                        FLAG_OK, FLAG_THRESHOLD, FLAG_ZERO, RateBreakdown,
                        SecurityParams, asymptotic_rate,
                        collision_probability, epsilon_total, gamma_upper,
                        key_rate, leakage_fractions, rate_point,
                        serfling_gamma)
from .simulator import (CoverageReport, DeviationReport, Detections,
                        SimConfig, SimResult, SlotTally,
                        compiled_kernel_available, empirical_vs_analytic,
                        qber_sampling_experiment, run_simulation,
                        sift_and_xor_check)
from .optimizer import (OptimizerConfig, OptimResult, ProtocolComparison,
                        SweepCurve, SweepPoint, compare_protocols, grid_best,
                        optimize_rate, sweep_distance)
from .config import (ScenarioConfig, format_config, parse_config, preset,
                     serialize_config)
from .harness import RunOutcome, run_scenario

__version__ = "0.1.0"
