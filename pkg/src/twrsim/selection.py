"""Relay selection: the interference-based ORS rule and the two baselines.

The scheduling metric for pair i at relay j is the total interference level

    til[i, j] = 2 * sum_{m != i} (|h_{1(m),j}|^2 + |h_{2(m),j}|^2),

the interference relay j would receive in Time 1 plus the interference it
would leak in Time 2 if it served pair i (reciprocity makes both sums equal,
hence the factor 2).  ORS runs one back-off timer per (pair, relay) with
til < epsilon, proportional to the TIL; the first timer to fire claims the
relay for the pair and deactivates every competing timer for that pair and
that relay.  Processing timers in ascending TIL order therefore reproduces
the distributed outcome exactly, and equals the greedy rule "repeatedly take
the globally smallest remaining TIL".

Ties have probability zero under continuous fading but are broken
deterministically (lowest relay index, then lowest pair index) so that runs
reproduce bit-identically.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .channels import STREAM_SELECTION, TrialRng
from .model import ChannelRealization, Selector


@dataclass(frozen=True)
class TilMatrix:
    """K x N matrix of total interference levels (nonnegative)."""

    til: np.ndarray = field(repr=False)

    def __post_init__(self):
        til = np.asarray(self.til, dtype=np.float64)
        if til.ndim != 2:
            raise ValueError(f"til must be a 2-d (K, N) array, got shape {til.shape}")
        if not np.all(np.isfinite(til)) or np.any(til < 0):
            raise ValueError("til entries must be finite and >= 0")
        object.__setattr__(self, "til", til)

    @property
    def k(self) -> int:
        return self.til.shape[0]

    @property
    def n(self) -> int:
        return self.til.shape[1]


@dataclass(frozen=True)
class SelectionResult:
    """Outcome of one selection round.

    assignment[i] is the relay serving pair i, or None on outage.  Assigned
    relays are pairwise distinct.  selected_til[i] is the TIL of the chosen
    relay (NaN on outage).  order[i] is the 1-based rank at which pair i was
    served (None on outage); ranks form a bijection onto 1..#assigned.
    elapsed is the largest back-off time that actually fired (0 for the
    baselines, which have no timers).
    """

    assignment: tuple
    selected_til: np.ndarray = field(repr=False)
    order: tuple
    selector: Selector
    elapsed: float = 0.0

    def __post_init__(self):
        if not (len(self.assignment) == len(self.selected_til) == len(self.order)):
            raise ValueError("assignment, selected_til and order lengths differ")
        assigned = [j for j in self.assignment if j is not None]
        if len(set(assigned)) != len(assigned):
            raise ValueError("a relay may serve at most one pair")

    @property
    def k(self) -> int:
        return len(self.assignment)

    @property
    def outage_pairs(self) -> frozenset:
        return frozenset(i for i, j in enumerate(self.assignment) if j is None)

    @property
    def num_assigned(self) -> int:
        return sum(1 for j in self.assignment if j is not None)


def compute_til(c: ChannelRealization) -> TilMatrix:
    """Evaluate the scheduling metric for every (pair, relay) combination.

    Entry (i, j) depends only on the channels of pairs m != i at relay j;
    for K = 1 the matrix is identically zero.
    """
    p = np.abs(c.gains) ** 2
    per_pair = p[0] + p[1]  # (K, N): both groups' power of each pair at each relay
    return TilMatrix(til=til_batch(per_pair))


def til_batch(per_pair_power: np.ndarray) -> np.ndarray:
    """compute_til over a (..., K, N) stack of per-pair powers
    |h_1|^2 + |h_2|^2; broadcasts over any leading axes."""
    til = 2.0 * (per_pair_power.sum(axis=-2, keepdims=True) - per_pair_power)
    np.maximum(til, 0.0, out=til)
    return til


def select_ors(
    til: TilMatrix,
    epsilon: float,
    t_max: float,
    outage_fallback: bool = False,
) -> SelectionResult:
    """Distributed back-off relay selection on a TIL matrix.

    Timers lambda = (til/epsilon) * t_max exist only where til < epsilon and
    fire in ascending order; a firing timer claims its relay for its pair if
    both are still free.  Pairs left without a firing timer are in outage
    unless outage_fallback assigns them the smallest-TIL free relay anyway.
    """
    if not (epsilon > 0):
        raise ValueError("epsilon must be > 0")
    if not (t_max > 0):
        raise ValueError("t_max must be > 0")
    m = til.til
    k, n = m.shape
    candidates = sorted(
        (m[i, j], j, i) for i in range(k) for j in range(n) if m[i, j] < epsilon
    )
    assignment: list = [None] * k
    order: list = [None] * k
    selected = np.full(k, np.nan)
    relay_taken = np.zeros(n, dtype=bool)
    elapsed = 0.0
    rank = 0
    for value, j, i in candidates:
        if assignment[i] is None and not relay_taken[j]:
            rank += 1
            assignment[i] = j
            order[i] = rank
            selected[i] = value
            relay_taken[j] = True
            elapsed = (value / epsilon) * t_max  # ascending, so last fired is max
            if rank == k:
                break
    if outage_fallback:
        for i in range(k):
            if assignment[i] is not None:
                continue
            free = np.flatnonzero(~relay_taken)
            if free.size == 0:
                break
            j = int(free[np.argmin(m[i, free])])
            rank += 1
            assignment[i] = j
            order[i] = rank
            selected[i] = m[i, j]
            relay_taken[j] = True
    return SelectionResult(
        assignment=tuple(assignment),
        selected_til=selected,
        order=tuple(order),
        selector=Selector.ORS,
        elapsed=elapsed,
    )


def select_max_min_snr(c: ChannelRealization) -> SelectionResult:
    """Baseline: globally greedy on the weaker of the two link gains.

    Repeatedly assigns the (pair, relay) combination maximizing
    min(|h_1|^2, |h_2|^2) over free pairs and relays; with symmetric powers
    this maximizes the minimum of the two link SNRs at each selection.
    """
    p = np.abs(c.gains) ** 2
    metric = np.minimum(p[0], p[1])
    til = compute_til(c).til
    k, n = metric.shape
    work = metric.copy()
    assignment: list = [None] * k
    order: list = [None] * k
    selected = np.full(k, np.nan)
    for rank in range(1, min(k, n) + 1):
        # argmax of the relay-major layout resolves ties to the lowest relay
        # index, then the lowest pair index
        flat = int(np.argmax(work.T))
        j, i = divmod(flat, k)
        if not np.isfinite(work[i, j]):
            break
        assignment[i] = j
        order[i] = rank
        selected[i] = til[i, j]
        work[i, :] = -np.inf
        work[:, j] = -np.inf
    return SelectionResult(
        assignment=tuple(assignment),
        selected_til=selected,
        order=tuple(order),
        selector=Selector.MAX_MIN_SNR,
        elapsed=0.0,
    )


def random_assignment(k: int, n: int, rng: np.random.Generator) -> list:
    """Uniformly random matching of pairs to distinct relays.

    With N >= K every pair receives a relay (a uniform random injection);
    otherwise all N relays are used and a uniform random subset of N pairs
    is served.  Returns assignment in draw order semantics: the t-th drawn
    pair has rank t + 1.
    """
    assignment = [None] * k
    if n >= k:
        relays = rng.choice(n, size=k, replace=False)
        for i in range(k):
            assignment[i] = int(relays[i])
        ranked = list(range(k))
    else:
        pairs = rng.permutation(k)[:n]
        relays = rng.permutation(n)
        for t in range(n):
            assignment[int(pairs[t])] = int(relays[t])
        ranked = [int(i) for i in pairs]
    return assignment, ranked


def select_random(c: ChannelRealization, rng: TrialRng) -> SelectionResult:
    """Baseline: channel-oblivious uniformly random relay matching."""
    til = compute_til(c).til
    gen = rng.generator(STREAM_SELECTION)
    assignment, ranked = random_assignment(c.k, c.n, gen)
    order: list = [None] * c.k
    selected = np.full(c.k, np.nan)
    for t, i in enumerate(ranked):
        order[i] = t + 1
        selected[i] = til[i, assignment[i]]
    return SelectionResult(
        assignment=tuple(assignment),
        selected_til=selected,
        order=tuple(order),
        selector=Selector.RANDOM,
        elapsed=0.0,
    )


# ---------------------------------------------------------------------------
# Batched kernels used by the experiment runner.  They reproduce the scalar
# functions above, trial for trial, including tie-breaking; the test suite
# checks that equivalence directly.


def ors_assign_batch(til: np.ndarray, epsilon: float, t_max: float):
    """Vectorized select_ors over a (B, K, N) stack of TIL matrices.

    Returns (assignment, selected_til, order, elapsed) with shapes
    (B, K), (B, K), (B, K), (B,); assignment and order hold -1 on outage.
    """
    b, k, n = til.shape
    # relay-major layout: flat index j*K + i, so argmin tie-breaks on
    # (value, relay, pair) like the scalar scan
    work = np.where(til < epsilon, til, np.inf).transpose(0, 2, 1).reshape(b, n * k)
    assignment = np.full((b, k), -1, dtype=np.int64)
    order = np.full((b, k), -1, dtype=np.int64)
    selected = np.full((b, k), np.nan)
    elapsed = np.zeros(b)
    ranks = np.zeros(b, dtype=np.int64)
    rows = np.arange(b)
    cols = np.arange(k)
    for _ in range(k):
        flat = np.argmin(work, axis=1)
        value = work[rows, flat]
        fired = np.isfinite(value)
        if not fired.any():
            break
        j, i = np.divmod(flat, k)
        fr = rows[fired]
        fi = i[fired]
        fj = j[fired]
        ranks[fired] += 1
        assignment[fr, fi] = fj
        order[fr, fi] = ranks[fired]
        selected[fr, fi] = value[fired]
        elapsed[fired] = (value[fired] / epsilon) * t_max
        work[fr[:, None], fj[:, None] * k + cols[None, :]] = np.inf
        work[fr[:, None], fi[:, None] + k * np.arange(n)[None, :]] = np.inf
    return assignment, selected, order, elapsed


def ors_fallback_batch(til, assignment, selected, order):
    """Apply the outage_fallback rule in place on batch results."""
    b, k, n = til.shape
    rows = np.arange(b)
    taken = np.zeros((b, n), dtype=bool)
    for i in range(k):
        v = assignment[:, i] >= 0
        taken[rows[v], assignment[v, i]] = True
    ranks = (assignment >= 0).sum(axis=1)
    for i in range(k):
        need = assignment[:, i] < 0
        if not need.any():
            continue
        cand = np.where(taken, np.inf, til[:, i, :])
        j = np.argmin(cand, axis=1)
        val = cand[rows, j]
        ok = need & np.isfinite(val)
        assignment[ok, i] = j[ok]
        selected[ok, i] = val[ok]
        ranks[ok] += 1
        order[ok, i] = ranks[ok]
        taken[rows[ok], j[ok]] = True
    return assignment, selected, order


def max_min_assign_batch(power: np.ndarray, til: np.ndarray):
    """Vectorized select_max_min_snr over (B, 2, K, N) powers."""
    b, _, k, n = power.shape
    work = np.minimum(power[:, 0], power[:, 1]).transpose(0, 2, 1).reshape(b, n * k)
    assignment = np.full((b, k), -1, dtype=np.int64)
    order = np.full((b, k), -1, dtype=np.int64)
    selected = np.full((b, k), np.nan)
    rows = np.arange(b)
    cols = np.arange(k)
    for rank in range(1, min(k, n) + 1):
        flat = np.argmax(work, axis=1)
        value = work[rows, flat]
        live = np.isfinite(value)
        if not live.any():
            break
        j, i = np.divmod(flat, k)
        lr = rows[live]
        li = i[live]
        lj = j[live]
        assignment[lr, li] = lj
        order[lr, li] = rank
        selected[lr, li] = til[lr, li, lj]
        work[lr[:, None], lj[:, None] * k + cols[None, :]] = -np.inf
        work[lr[:, None], li[:, None] + k * np.arange(n)[None, :]] = -np.inf
    return assignment, selected, order
