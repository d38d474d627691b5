"""Closed-form achievable rates for AF, DF and lattice-code CF relaying.

Conventions shared by every formula here:

* P = 1 and N0 = 1/SNR, so a channel power g becomes the received SNR g*SNR.
* Interference enters through its expected symbol power E|I|^2 (transmit
  symbols are unit power), stored normalized by N0.  With i = E|I|^2/N0 a
  denominator E|I|^2 + N0 turns into (i + 1) * N0.
* Rates are log2, in bits per channel use, and carry the 1/2 pre-log of the
  two-slot protocol.  A pair with no serving relay contributes zero rate.
* For pair i, direction n is the stream transmitted by the group-n node and
  decoded at the opposite node (group 1-n) in Time 2.

The *_rate helpers at the top are array-aware and broadcast, so the scalar
per-realization operations and the batched experiment kernels share one
implementation of each formula.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .model import ChannelRealization, Protocol
from .selection import SelectionResult


def af_amplify_gain(g1, g2, i_relay, snr):
    """Amplifying coefficient meeting the relay power constraint with
    equality: gamma = sqrt(P) / sqrt((g1 + g2) P + E|I_R|^2 + N0).

    i_relay is normalized (E|I_R|^2 / N0), hence the division by snr.
    """
    return 1.0 / np.sqrt(g1 + g2 + i_relay / snr + 1.0 / snr)


def af_direction_rate(g_n, g_t, gamma, i_relay, i_cn_t, snr):
    """AF rate of direction n: the relay forwards gamma * y, the receiving
    node cancels its own echo, and the remaining noise-plus-interference is
    the amplified relay-side term plus the local term plus both noises."""
    g2t = gamma**2 * g_t
    num = g2t * g_n * snr
    den = g2t * i_relay + i_cn_t + g2t + 1.0
    return 0.5 * np.log2(1.0 + num / den)


def lccf_direction_rate(g_n, g_t, tau_n, i_relay, i_cn_t, snr):
    """Lattice-code CF rate of direction n: the Time-1 computation bound
    (clamped at zero) against the Time-2 broadcast bound.

    tau_n = g_n / (g1 + g2) is the power fraction of direction n inside the
    decoded lattice combination.
    """
    arg = tau_n + g_n * snr / (i_relay + 1.0)
    time1 = np.where(arg > 1.0, 0.5 * np.log2(np.maximum(arg, 1.0)), 0.0)
    time2 = 0.5 * np.log2(1.0 + g_t * snr / (i_cn_t + 1.0))
    return np.minimum(time1, time2)


def df_pair_rates(g1, g2, i_relay, i_cn_1, i_cn_2, snr):
    """DF pair sum rate and its individual side terms.

    The sum is the smaller of (a) both directions' individual bounds summed,
    where each direction is limited by the weaker of the two per-node terms,
    and (b) the multiple-access sum bound at the relay.  Returns
    (pair_sum, t1, t2, mac); only the pair sum is contractual.
    """
    t1 = 0.5 * np.log2(1.0 + g1 * snr / (i_cn_1 + 1.0))
    t2 = 0.5 * np.log2(1.0 + g2 * snr / (i_cn_2 + 1.0))
    mac = 0.5 * np.log2(1.0 + (g1 + g2) * snr / (i_relay + 1.0))
    pair_sum = np.minimum(2.0 * np.minimum(t1, t2), mac)
    return pair_sum, t1, t2, mac


@dataclass(frozen=True)
class InterferenceProfile:
    """Expected interference powers of one (realization, assignment) pair,
    normalized by N0.

    i_relay[i]: received interference at pair i's relay in Time 1.
    i_cn[n, i]: interference at the group-n node of pair i in Time 2, from
                the other pairs' serving relays.
    delta[i]:   i_relay[i] + i_cn[0, i] + i_cn[1, i].

    Pairs in outage have all-zero entries.
    """

    i_relay: np.ndarray = field(repr=False)
    i_cn: np.ndarray = field(repr=False)
    delta: np.ndarray = field(repr=False)

    @property
    def k(self) -> int:
        return self.i_relay.shape[0]

    @classmethod
    def zeros(cls, k: int) -> "InterferenceProfile":
        return cls(np.zeros(k), np.zeros((2, k)), np.zeros(k))


def interference_profile(
    c: ChannelRealization, sel: SelectionResult, snr: float
) -> InterferenceProfile:
    """Normalized expected interference powers under a given assignment.

    Every pair's nodes transmit in Time 1, so the relay-side sum runs over
    all other pairs; only assigned relays transmit in Time 2, so the
    node-side sums skip pairs in outage.  An outage pair itself gets all-zero
    entries (it has no relay to receive at, and no rate to compute).
    """
    p = np.abs(c.gains) ** 2
    per_pair = p[0] + p[1]
    k = c.k
    i_relay = np.zeros(k)
    i_cn = np.zeros((2, k))
    for i in range(k):
        ji = sel.assignment[i]
        if ji is None:
            continue
        for m in range(k):
            if m == i:
                continue
            i_relay[i] += per_pair[m, ji] * snr
            jm = sel.assignment[m]
            if jm is None:
                continue
            i_cn[0, i] += p[0, i, jm] * snr
            i_cn[1, i] += p[1, i, jm] * snr
    return InterferenceProfile(i_relay=i_relay, i_cn=i_cn, delta=i_relay + i_cn[0] + i_cn[1])


@dataclass(frozen=True)
class RateReport:
    """Achievable rates of one (realization, protocol, selector) triple.

    per_pair[i, n] is the rate of direction n of pair i in bits per channel
    use; sum_rate is the total.  amplify_gains holds the AF coefficients
    (NaN on outage) and is None for the other protocols.  For DF the split
    of the pair sum into directions is diagnostic only.
    """

    per_pair: np.ndarray = field(repr=False)
    sum_rate: float
    protocol: Protocol
    outage_pairs: frozenset
    amplify_gains: np.ndarray | None = field(default=None, repr=False)


def af_gamma(c: ChannelRealization, sel: SelectionResult, i: int, snr: float) -> float:
    """Amplifying coefficient of pair i's relay under this assignment."""
    ji = sel.assignment[i]
    if ji is None:
        raise ValueError(f"pair {i} has no assigned relay")
    p = np.abs(c.gains) ** 2
    i_relay = 0.0
    for m in range(c.k):
        if m != i:
            i_relay += (p[0, m, ji] + p[1, m, ji]) * snr
    return float(af_amplify_gain(p[0, i, ji], p[1, i, ji], i_relay, snr))


def _own_powers(c: ChannelRealization, sel: SelectionResult, i: int):
    ji = sel.assignment[i]
    h1 = c.gains[0, i, ji]
    h2 = c.gains[1, i, ji]
    return float(h1.real**2 + h1.imag**2), float(h2.real**2 + h2.imag**2)


def rate_af(
    c: ChannelRealization,
    sel: SelectionResult,
    profile: InterferenceProfile,
    snr: float,
) -> RateReport:
    per_pair = np.zeros((c.k, 2))
    gammas = np.full(c.k, np.nan)
    for i in range(c.k):
        if sel.assignment[i] is None:
            continue
        g1, g2 = _own_powers(c, sel, i)
        gamma = af_amplify_gain(g1, g2, profile.i_relay[i], snr)
        gammas[i] = gamma
        per_pair[i, 0] = af_direction_rate(
            g1, g2, gamma, profile.i_relay[i], profile.i_cn[1, i], snr
        )
        per_pair[i, 1] = af_direction_rate(
            g2, g1, gamma, profile.i_relay[i], profile.i_cn[0, i], snr
        )
    return RateReport(
        per_pair=per_pair,
        sum_rate=float(per_pair.sum()),
        protocol=Protocol.AF,
        outage_pairs=sel.outage_pairs,
        amplify_gains=gammas,
    )


def rate_lccf(
    c: ChannelRealization,
    sel: SelectionResult,
    profile: InterferenceProfile,
    snr: float,
) -> RateReport:
    per_pair = np.zeros((c.k, 2))
    for i in range(c.k):
        if sel.assignment[i] is None:
            continue
        g1, g2 = _own_powers(c, sel, i)
        total = g1 + g2
        tau1 = g1 / total if total > 0 else 0.0
        per_pair[i, 0] = lccf_direction_rate(
            g1, g2, tau1, profile.i_relay[i], profile.i_cn[1, i], snr
        )
        per_pair[i, 1] = lccf_direction_rate(
            g2, g1, 1.0 - tau1 if total > 0 else 0.0,
            profile.i_relay[i], profile.i_cn[0, i], snr,
        )
    return RateReport(
        per_pair=per_pair,
        sum_rate=float(per_pair.sum()),
        protocol=Protocol.LC_CF,
        outage_pairs=sel.outage_pairs,
    )


def rate_df(
    c: ChannelRealization,
    sel: SelectionResult,
    profile: InterferenceProfile,
    snr: float,
) -> RateReport:
    per_pair = np.zeros((c.k, 2))
    for i in range(c.k):
        if sel.assignment[i] is None:
            continue
        g1, g2 = _own_powers(c, sel, i)
        pair_sum, t1, t2, _ = df_pair_rates(
            g1, g2, profile.i_relay[i], profile.i_cn[0, i], profile.i_cn[1, i], snr
        )
        # diagnostic split, proportional to the unconstrained individual terms
        total = t1 + t2
        if total > 0:
            per_pair[i, 0] = pair_sum * t1 / total
            per_pair[i, 1] = pair_sum * t2 / total
    return RateReport(
        per_pair=per_pair,
        sum_rate=float(per_pair.sum()),
        protocol=Protocol.DF,
        outage_pairs=sel.outage_pairs,
    )


RATE_FUNCTIONS = {
    Protocol.AF: rate_af,
    Protocol.DF: rate_df,
    Protocol.LC_CF: rate_lccf,
}


def compute_rates(
    protocol: Protocol,
    c: ChannelRealization,
    sel: SelectionResult,
    profile: InterferenceProfile,
    snr: float,
) -> RateReport:
    return RATE_FUNCTIONS[protocol](c, sel, profile, snr)
