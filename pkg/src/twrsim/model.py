"""Value types for the K-pair, N-relay two-way relay network.

All simulation state is carried by immutable dataclasses so that trials can
be evaluated concurrently without synchronization.  Transmit power is
normalized to P = 1 and the noise variance is N0 = 1/SNR, so only the ratio
SNR = P/N0 ever enters a formula.  SNR is stored in dB at the interface
because every experiment sweeps a dB axis.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

MAX_SEED = 2**64 - 1


class Protocol(enum.Enum):
    """Relaying protocol, i.e. how the relay turns its Time-1 observation
    into the Time-2 broadcast.  Rates come from the matching closed-form
    bound; no symbol-level encoding is ever simulated."""

    AF = "AF"
    DF = "DF"
    LC_CF = "LC-CF"


class Selector(enum.Enum):
    """Relay selection rule."""

    ORS = "ORS"
    MAX_MIN_SNR = "max-min-SNR"
    RANDOM = "random"


@dataclass(frozen=True)
class NetworkConfig:
    """Independent variables of one experiment.

    k:      number of communication-node pairs.
    n:      number of candidate relays.
    snr_db: SNR = P/N0 in decibels.
    epsilon: maximum allowable total interference level for ORS; math.inf
             disables the threshold.
    t_max:  maximum back-off duration (abstract time units).
    seed:   64-bit master seed; every trial derives its own keyed stream.
    outage_fallback: when True, ORS assigns the min-TIL relay to pairs whose
             every candidate is at or above epsilon (sensitivity studies).
    """

    k: int
    n: int
    snr_db: float
    epsilon: float = 1.0
    t_max: float = 1.0
    seed: int = 0
    outage_fallback: bool = False

    @property
    def snr_linear(self) -> float:
        return db_to_linear(self.snr_db)

    @property
    def noise_power(self) -> float:
        """N0 under the P = 1 normalization."""
        return 1.0 / self.snr_linear


@dataclass(frozen=True)
class ValidationOutcome:
    """Result of validate_config: violations block a run, warnings do not."""

    violations: tuple[str, ...] = ()
    warnings: tuple[str, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.violations


def validate_config(cfg: NetworkConfig) -> ValidationOutcome:
    """Check field ranges; never raises.

    N < K is allowed (some pairs will then be in outage) but is flagged with
    a warning so sweeps do not silently mix regimes.
    """
    violations = []
    warnings = []
    if not isinstance(cfg.k, int) or cfg.k < 1:
        violations.append("K must be >= 1")
    if not isinstance(cfg.n, int) or cfg.n < 1:
        violations.append("N must be >= 1")
    if not math.isfinite(cfg.snr_db):
        violations.append("snr_db must be finite")
    if not (cfg.epsilon > 0):  # also catches NaN
        violations.append("epsilon must be > 0")
    if not (cfg.t_max > 0):
        violations.append("t_max must be > 0")
    if not isinstance(cfg.seed, int) or not (0 <= cfg.seed <= MAX_SEED):
        violations.append("seed must be an unsigned 64-bit integer")
    if not violations and cfg.n < cfg.k:
        warnings.append("N < K, outage possible")
    return ValidationOutcome(tuple(violations), tuple(warnings))


def db_to_linear(snr_db: float) -> float:
    return 10.0 ** (snr_db / 10.0)


def linear_to_db(snr_linear: float) -> float:
    return 10.0 * math.log10(snr_linear)


@dataclass(frozen=True)
class ChannelRealization:
    """One block-fading draw of all 2*K*N channel coefficients.

    gains[n, i, j] is the complex amplitude between the i-th node of group n
    (n = 0, 1) and relay j.  TDD reciprocity makes the same coefficient valid
    in both time slots, so no second array exists.  seed_tag records the
    trial index that produced the draw.
    """

    gains: np.ndarray = field(repr=False)
    seed_tag: int = 0

    def __post_init__(self):
        gains = np.asarray(self.gains, dtype=np.complex128)
        if gains.ndim != 3 or gains.shape[0] != 2:
            raise ValueError(f"gains must have shape (2, K, N), got {gains.shape}")
        if not np.all(np.isfinite(gains.view(np.float64))):
            raise ValueError("gains must be finite")
        object.__setattr__(self, "gains", gains)

    @property
    def k(self) -> int:
        return self.gains.shape[1]

    @property
    def n(self) -> int:
        return self.gains.shape[2]
