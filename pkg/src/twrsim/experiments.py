"""Monte Carlo sweep orchestration.

A sweep point is one (SNR, N) combination; every point runs `trials`
independent fading realizations through selection and rate computation for
each requested protocol and selector, then aggregates means, normal 95%
confidence halfwidths, outage and decoupling statistics.

Determinism contract: results depend only on (spec, cfg.seed), never on the
execution schedule.  Trials are processed in fixed-size chunks; each chunk
reduces its own trials in index order, and chunk partials are combined in
chunk order, so serial and parallel runs produce bit-identical rows.
"""

from __future__ import annotations

import enum
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import __version__
from .channels import STREAM_SELECTION, TrialRng, generate_channels
from .model import (
    ChannelRealization,
    NetworkConfig,
    Protocol,
    Selector,
    db_to_linear,
    validate_config,
)
from .rates import (
    InterferenceProfile,
    RateReport,
    af_amplify_gain,
    af_direction_rate,
    df_pair_rates,
    lccf_direction_rate,
    rate_lccf,
)
from .selection import (
    SelectionResult,
    max_min_assign_batch,
    ors_assign_batch,
    ors_fallback_batch,
    random_assignment,
    til_batch,
)

CHUNK_TRIALS = 1024
DEFAULT_WORK_BUDGET = 1_000_000_000
DEFAULT_MAX_SCALED_N = 100_000
Z95 = 1.959964

# extra row emitted when include_no_interference_bound is set: the LC-CF rate
# with every interference power forced to zero
NO_INTERFERENCE_LABEL = "LC-CF-no-interference"


class SweepKind(enum.Enum):
    SNR_SCALING_N = "snr-scaling-n"
    SNR_FIXED_N = "snr-fixed-n"
    N_SWEEP = "n-sweep"
    LEMMA_VERIFY = "lemma-verify"


class WorkBudgetError(RuntimeError):
    """A sweep point exceeds the configured work budget."""


@dataclass(frozen=True)
class SweepSpec:
    """What to sweep and how hard.

    For SNR_SCALING_N the relay count is derived per point as
    N = round(SNR_linear ** (n_exponent_factor * (K - 1))); the factor 2
    tracks the full scaling condition, 1 gives the under-scaled comparison.
    The other kinds take explicit n_points (falling back to cfg.n if empty).
    """

    kind: SweepKind
    snr_points_db: tuple = ()
    n_points: tuple = ()
    protocols: frozenset = frozenset(Protocol)
    selectors: frozenset = frozenset(Selector)
    trials: int = 10_000
    include_no_interference_bound: bool = False
    n_exponent_factor: float = 2.0
    work_budget: int = DEFAULT_WORK_BUDGET
    max_scaled_n: int = DEFAULT_MAX_SCALED_N

    def __post_init__(self):
        object.__setattr__(self, "snr_points_db", tuple(float(s) for s in self.snr_points_db))
        object.__setattr__(self, "n_points", tuple(int(n) for n in self.n_points))
        object.__setattr__(self, "protocols", frozenset(self.protocols))
        object.__setattr__(self, "selectors", frozenset(self.selectors))


@dataclass(frozen=True)
class SweepRow:
    """Aggregate of one (point, protocol, selector) cell.

    outage_prob is the fraction of (trial, pair) slots left unserved;
    mean_selected_til averages the scheduling metric over served slots;
    p_c_estimate is the fraction of trials whose total normalized
    interference stayed below cfg.epsilon under this selector.
    """

    kind: str
    protocol: str
    selector: str
    k: int
    n: int
    snr_db: float
    trials: int
    mean_sum_rate: float
    ci95_halfwidth: float
    outage_prob: float
    mean_selected_til: float
    p_c_estimate: float


@dataclass(frozen=True)
class SweepResult:
    rows: tuple
    seed: int
    version: str = __version__


def validate_sweep_spec(spec: SweepSpec) -> None:
    if not spec.snr_points_db:
        raise ValueError("snr_points_db must not be empty")
    if spec.trials < 1:
        raise ValueError("trials must be >= 1")
    if not spec.protocols:
        raise ValueError("protocols must not be empty")
    if not spec.selectors:
        raise ValueError("selectors must not be empty")
    if spec.kind is SweepKind.SNR_SCALING_N and spec.n_points:
        raise ValueError("n_points is derived for snr-scaling sweeps; leave it empty")


def expand_points(spec: SweepSpec, cfg: NetworkConfig):
    """Resolve the (snr_db, n) grid of a sweep, enforcing the work budget."""
    points = []
    if spec.kind is SweepKind.SNR_SCALING_N:
        exponent = spec.n_exponent_factor * (cfg.k - 1)
        for db in spec.snr_points_db:
            n = max(1, round(db_to_linear(db) ** exponent))
            if n > spec.max_scaled_n:
                raise WorkBudgetError(
                    f"point (snr_db={db}, derived n={n}) exceeds max_scaled_n="
                    f"{spec.max_scaled_n}"
                )
            points.append((db, n))
    else:
        n_list = spec.n_points if spec.n_points else (cfg.n,)
        points = [(db, n) for db in spec.snr_points_db for n in n_list]
    for db, n in points:
        work = cfg.k * n * spec.trials
        if work > spec.work_budget:
            raise WorkBudgetError(
                f"point (snr_db={db}, n={n}) needs K*N*trials={work}, over the "
                f"work budget {spec.work_budget}"
            )
    return points


def _sum_rates_batch(protocol, g, i_relay, i_cn, snr, assigned):
    """Per-trial network sum rates, (B,), for one protocol.

    g: (B, 2, K) own-link powers (zero on outage); i_relay: (B, K);
    i_cn: (B, 2, K); assigned: (B, K) bool.
    """
    g1 = g[:, 0, :]
    g2 = g[:, 1, :]
    if protocol is Protocol.AF:
        gamma = af_amplify_gain(g1, g2, i_relay, snr)
        per = af_direction_rate(
            g1, g2, gamma, i_relay, i_cn[:, 1, :], snr
        ) + af_direction_rate(g2, g1, gamma, i_relay, i_cn[:, 0, :], snr)
    elif protocol is Protocol.LC_CF:
        total = g1 + g2
        tau1 = np.divide(g1, total, out=np.zeros_like(g1), where=total > 0)
        tau2 = np.divide(g2, total, out=np.zeros_like(g2), where=total > 0)
        per = lccf_direction_rate(
            g1, g2, tau1, i_relay, i_cn[:, 1, :], snr
        ) + lccf_direction_rate(g2, g1, tau2, i_relay, i_cn[:, 0, :], snr)
    else:
        per, _, _, _ = df_pair_rates(
            g1, g2, i_relay, i_cn[:, 0, :], i_cn[:, 1, :], snr
        )
    return (per * assigned).sum(axis=1)


def _profile_and_gains(p, per_pair, assignment, snr):
    """Batched interference_profile plus own-link power gathering.

    Returns (i_relay (B,K), i_cn (B,2,K), g (B,2,K)).  Relay-side sums count
    every other pair (all nodes transmit in Time 1); node-side sums count
    assigned relays only; outage pairs get all-zero entries.
    """
    b, _, k, _ = p.shape
    rows = np.arange(b)
    mask = assignment >= 0
    safe = np.where(mask, assignment, 0)
    g = np.zeros((b, 2, k))
    i_relay = np.zeros((b, k))
    i_cn = np.zeros((b, 2, k))
    for i in range(k):
        g[:, 0, i] = p[rows, 0, i, safe[:, i]] * mask[:, i]
        g[:, 1, i] = p[rows, 1, i, safe[:, i]] * mask[:, i]
        col_i = per_pair[rows, :, safe[:, i]]  # (B, K) power of each pair at pair-i's relay
        for m in range(k):
            if m == i:
                continue
            i_relay[:, i] += col_i[:, m]
            i_cn[:, 0, i] += p[rows, 0, i, safe[:, m]] * mask[:, m]
            i_cn[:, 1, i] += p[rows, 1, i, safe[:, m]] * mask[:, m]
        i_relay[:, i] *= mask[:, i]
        i_cn[:, :, i] *= mask[:, i][:, None]
    i_relay *= snr
    i_cn *= snr
    return i_relay, i_cn, g


def _random_assign_batch(cfg, til, start, stop):
    b = stop - start
    k = til.shape[1]
    assignment = np.full((b, k), -1, dtype=np.int64)
    selected = np.full((b, k), np.nan)
    for offset, t in enumerate(range(start, stop)):
        gen = TrialRng(cfg.seed, t).generator(STREAM_SELECTION)
        asn, _ = random_assignment(cfg.k, cfg.n, gen)
        for i, j in enumerate(asn):
            if j is not None:
                assignment[offset, i] = j
                selected[offset, i] = til[offset, i, j]
    return assignment, selected


def _run_chunk(args):
    """Aggregate one contiguous block of trials; pure function of args."""
    cfg, protocols, selectors, include_nib, start, stop = args
    gains = np.stack([generate_channels(cfg, t).gains for t in range(start, stop)])
    p = np.abs(gains) ** 2
    per_pair = p[:, 0] + p[:, 1]
    til = til_batch(per_pair)
    snr = cfg.snr_linear
    out = {}
    for sel in selectors:
        if sel is Selector.ORS:
            assignment, sel_til, order, _ = ors_assign_batch(til, cfg.epsilon, cfg.t_max)
            if cfg.outage_fallback:
                ors_fallback_batch(til, assignment, sel_til, order)
        elif sel is Selector.MAX_MIN_SNR:
            assignment, sel_til, _ = max_min_assign_batch(p, til)
        else:
            assignment, sel_til = _random_assign_batch(cfg, til, start, stop)
        assigned = assignment >= 0
        til_vals = np.where(assigned, sel_til, 0.0)
        full = assigned.all(axis=1)
        total_til = np.where(full, til_vals.sum(axis=1), np.inf)
        out[("sel", sel.value)] = (
            int((~assigned).sum()),
            float(til_vals.sum()),
            int(assigned.sum()),
            int((snr * total_til < cfg.epsilon).sum()),
        )
        i_relay, i_cn, g = _profile_and_gains(p, per_pair, assignment, snr)
        for proto in protocols:
            sums = _sum_rates_batch(proto, g, i_relay, i_cn, snr, assigned)
            out[("rate", proto.value, sel.value)] = (
                float(sums.sum()),
                float((sums * sums).sum()),
            )
        if include_nib:
            sums = _sum_rates_batch(
                Protocol.LC_CF, g, np.zeros_like(i_relay), np.zeros_like(i_cn), snr, assigned
            )
            out[("rate", NO_INTERFERENCE_LABEL, sel.value)] = (
                float(sums.sum()),
                float((sums * sums).sum()),
            )
    return out


def _run_point(cfg, spec, n_jobs):
    protocols = tuple(sorted(spec.protocols, key=lambda x: x.value))
    selectors = tuple(sorted(spec.selectors, key=lambda x: x.value))
    tasks = [
        (cfg, protocols, selectors, spec.include_no_interference_bound,
         start, min(start + CHUNK_TRIALS, spec.trials))
        for start in range(0, spec.trials, CHUNK_TRIALS)
    ]
    if n_jobs <= 1 or len(tasks) == 1:
        partials = map(_run_chunk, tasks)
    else:
        with ProcessPoolExecutor(max_workers=n_jobs) as executor:
            partials = list(executor.map(_run_chunk, tasks))
    merged = {}
    for part in partials:  # chunk order fixes the reduction order
        for key, values in part.items():
            if key in merged:
                merged[key] = tuple(a + b for a, b in zip(merged[key], values))
            else:
                merged[key] = values
    return merged


def run_sweep(spec: SweepSpec, cfg: NetworkConfig, n_jobs: int = 1) -> SweepResult:
    """Run every sweep point and return one row per (point, protocol,
    selector), plus no-interference rows when requested.

    Raises ValueError on an invalid spec or config and WorkBudgetError when
    a point is too large; identical (spec, cfg) always produce identical
    rows, for any n_jobs.
    """
    validate_sweep_spec(spec)
    outcome = validate_config(cfg)
    if not outcome.ok:
        raise ValueError("invalid config: " + "; ".join(outcome.violations))
    points = expand_points(spec, cfg)
    rows = []
    for snr_db, n in points:
        point_cfg = replace(cfg, snr_db=float(snr_db), n=int(n))
        merged = _run_point(point_cfg, spec, n_jobs)
        trials = spec.trials
        for key, values in merged.items():
            if key[0] != "rate":
                continue
            _, proto_label, sel_label = key
            rate_sum, rate_sqsum = values
            outage, til_sum, til_count, pc_hits = merged[("sel", sel_label)]
            mean = rate_sum / trials
            var = max(rate_sqsum / trials - mean * mean, 0.0)
            rows.append(
                SweepRow(
                    kind=spec.kind.value,
                    protocol=proto_label,
                    selector=sel_label,
                    k=cfg.k,
                    n=int(n),
                    snr_db=float(snr_db),
                    trials=trials,
                    mean_sum_rate=mean,
                    ci95_halfwidth=float(Z95 * np.sqrt(var / trials)),
                    outage_prob=outage / (cfg.k * trials),
                    mean_selected_til=til_sum / til_count if til_count else 0.0,
                    p_c_estimate=pc_hits / trials,
                )
            )
    rows.sort(key=lambda r: (r.kind, r.protocol, r.selector, r.snr_db, r.n))
    return SweepResult(rows=tuple(rows), seed=cfg.seed)


def no_interference_bound(
    c: ChannelRealization, sel: SelectionResult, snr: float
) -> RateReport:
    """LC-CF rates with every interference power forced to zero: the
    interference-free upper reference curve."""
    return rate_lccf(c, sel, InterferenceProfile.zeros(c.k), snr)


def crossover_snr(result: SweepResult, protocol, selector_a, selector_b):
    """Smallest grid SNR from which selector_a's mean sum rate stays strictly
    above selector_b's for the rest of the grid; None if there is none.

    Both selectors must have been swept on the same (snr, n) grid for the
    given protocol.
    """
    proto_label = protocol.value if isinstance(protocol, Protocol) else str(protocol)
    label_a = selector_a.value if isinstance(selector_a, Selector) else str(selector_a)
    label_b = selector_b.value if isinstance(selector_b, Selector) else str(selector_b)

    def series(label):
        rows = [r for r in result.rows if r.protocol == proto_label and r.selector == label]
        rows.sort(key=lambda r: (r.snr_db, r.n))
        return rows

    rows_a = series(label_a)
    rows_b = series(label_b)
    grid_a = [(r.snr_db, r.n) for r in rows_a]
    grid_b = [(r.snr_db, r.n) for r in rows_b]
    if not grid_a or grid_a != grid_b:
        raise ValueError(
            f"selectors {label_a!r} and {label_b!r} were not swept on a common grid"
        )
    means_a = [r.mean_sum_rate for r in rows_a]
    means_b = [r.mean_sum_rate for r in rows_b]
    for idx in range(len(grid_a)):
        if all(a > b for a, b in zip(means_a[idx:], means_b[idx:])):
            return grid_a[idx][0]
    return None
