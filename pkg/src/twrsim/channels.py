"""Rayleigh block-fading channel generation with keyed per-trial streams.

Each coefficient is circularly-symmetric complex Gaussian with zero mean and
unit total variance (real and imaginary parts carry variance 1/2 each), so
|h|^2 is Exp(1).  Streams are derived from (master seed, trial index) through
a counter-based Philox generator keyed via SeedSequence spawn keys: trials
can run in any order, or in parallel, and reproduce bit-identically.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import ChannelRealization, NetworkConfig

# Sub-stream ids: channel draws and selector randomness never share a stream.
STREAM_CHANNELS = 0
STREAM_SELECTION = 1

_SQRT_HALF = np.sqrt(0.5)


@dataclass(frozen=True)
class TrialRng:
    """Deterministic randomness source for one (master seed, trial) pair."""

    master_seed: int
    trial: int

    def generator(self, stream: int = STREAM_CHANNELS) -> np.random.Generator:
        """Fresh generator for the given sub-stream; same arguments always
        reproduce the same sequence."""
        seq = np.random.SeedSequence(
            entropy=self.master_seed, spawn_key=(self.trial, stream)
        )
        return np.random.Generator(np.random.Philox(seq))


def generate_channels(cfg: NetworkConfig, trial: int) -> ChannelRealization:
    """Draw the (2, K, N) coefficient block for one fading trial.

    Coefficients are constant for the whole trial (block fading).  Calling
    twice with the same (cfg, trial) returns identical arrays.
    """
    rng = TrialRng(cfg.seed, trial).generator(STREAM_CHANNELS)
    z = rng.standard_normal((2, cfg.k, cfg.n, 2))
    gains = (z[..., 0] + 1j * z[..., 1]) * _SQRT_HALF
    return ChannelRealization(gains=gains, seed_tag=trial)


def gain_power(c: ChannelRealization, group: int, pair: int, relay: int) -> float:
    """Squared magnitude |h|^2 of one coefficient; indices are 0-based."""
    if not (0 <= group < 2 and 0 <= pair < c.k and 0 <= relay < c.n):
        raise IndexError(
            f"index (group={group}, pair={pair}, relay={relay}) out of range "
            f"for shape (2, {c.k}, {c.n})"
        )
    h = c.gains[group, pair, relay]
    return float(h.real**2 + h.imag**2)
