"""Command-line front end: config loading, sweep dispatch, CSV output.

Commands map one-to-one onto sweep kinds, plus `single` for a one-realization
report.  Every configurable field can come from three places with the
precedence CLI flag > config file > built-in default.  Config files are JSON
with a flat network section and an optional "sweep" object, e.g.

    {
      "k": 2, "n": 50, "snr_db": 20.0, "epsilon": 1.0, "seed": 7,
      "sweep": {
        "snr_points_db": [0, 2, 4], "n_points": [50], "trials": 10000,
        "protocols": ["LC-CF"], "selectors": ["ORS", "max-min-SNR"]
      }
    }

Result CSV files are written atomically (temp file, then rename) so a
crashed run never leaves a truncated file behind.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile

from .experiments import (
    DEFAULT_MAX_SCALED_N,
    DEFAULT_WORK_BUDGET,
    SweepKind,
    SweepResult,
    SweepRow,
    SweepSpec,
    WorkBudgetError,
    run_sweep,
)
from .channels import TrialRng, generate_channels
from .model import NetworkConfig, Protocol, Selector, validate_config
from .rates import compute_rates, interference_profile
from .selection import compute_til, select_max_min_snr, select_ors, select_random

OUTPUT_DIR_ENV = "TWRSIM_OUTPUT_DIR"

CSV_HEADER = (
    "kind,protocol,selector,k,n,snr_db,trials,mean_sum_rate,ci95,"
    "outage_prob,mean_selected_til,p_c,seed"
)

_COMMAND_KINDS = {
    "sweep-snr-scaling": SweepKind.SNR_SCALING_N,
    "sweep-snr-fixed-n": SweepKind.SNR_FIXED_N,
    "sweep-n": SweepKind.N_SWEEP,
    "verify-lemma": SweepKind.LEMMA_VERIFY,
}


class ConfigError(Exception):
    pass


def _fmt(x: float) -> str:
    return format(float(x), ".10g")


def write_csv(result: SweepResult, path: str) -> None:
    """Write the sweep rows as UTF-8 CSV with 10-significant-digit floats.

    Rows are sorted by (kind, protocol, selector, snr_db, n); the write is
    atomic via a temp file in the destination directory.
    """
    rows = sorted(result.rows, key=lambda r: (r.kind, r.protocol, r.selector, r.snr_db, r.n))
    lines = [CSV_HEADER]
    for r in rows:
        lines.append(
            ",".join(
                [
                    r.kind,
                    r.protocol,
                    r.selector,
                    str(r.k),
                    str(r.n),
                    _fmt(r.snr_db),
                    str(r.trials),
                    _fmt(r.mean_sum_rate),
                    _fmt(r.ci95_halfwidth),
                    _fmt(r.outage_prob),
                    _fmt(r.mean_selected_til),
                    _fmt(r.p_c_estimate),
                    str(result.seed),
                ]
            )
        )
    payload = "\n".join(lines) + "\n"
    directory = os.path.dirname(os.path.abspath(path))
    try:
        fd, tmp_path = tempfile.mkstemp(prefix=".twrsim-", suffix=".csv", dir=directory)
        try:
            with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as handle:
                handle.write(payload)
            os.replace(tmp_path, path)
        except BaseException:
            os.unlink(tmp_path)
            raise
    except OSError as exc:
        raise OSError(f"cannot write CSV to {path!r}: {exc}") from exc


def read_sweep_csv(path: str) -> SweepResult:
    """Parse a CSV produced by write_csv back into a SweepResult."""
    with open(path, encoding="utf-8") as handle:
        lines = [line.rstrip("\n") for line in handle if line.strip()]
    if not lines or lines[0] != CSV_HEADER:
        raise ConfigError(f"{path!r} is not a twrsim sweep CSV")
    rows = []
    seed = 0
    for line in lines[1:]:
        parts = line.split(",")
        if len(parts) != 13:
            raise ConfigError(f"malformed CSV row in {path!r}: {line!r}")
        rows.append(
            SweepRow(
                kind=parts[0],
                protocol=parts[1],
                selector=parts[2],
                k=int(parts[3]),
                n=int(parts[4]),
                snr_db=float(parts[5]),
                trials=int(parts[6]),
                mean_sum_rate=float(parts[7]),
                ci95_halfwidth=float(parts[8]),
                outage_prob=float(parts[9]),
                mean_selected_til=float(parts[10]),
                p_c_estimate=float(parts[11]),
            )
        )
        seed = int(parts[12])
    return SweepResult(rows=tuple(rows), seed=seed)


def _parse_float_list(text: str):
    return tuple(float(v) for v in text.split(",") if v.strip() != "")


def _parse_int_list(text: str):
    return tuple(int(v) for v in text.split(",") if v.strip() != "")


def _parse_enum_list(text, enum_cls, what):
    if isinstance(text, str):
        items = [v.strip() for v in text.split(",") if v.strip()]
    else:
        items = list(text)
    values = []
    valid = [e.value for e in enum_cls]
    for item in items:
        try:
            values.append(enum_cls(item))
        except ValueError:
            raise ConfigError(f"unknown {what} {item!r}; valid: {', '.join(valid)}")
    if not values:
        raise ConfigError(f"at least one {what} is required")
    return frozenset(values)


def load_config_file(path: str) -> dict:
    if not os.path.exists(path):
        raise ConfigError(f"config file not found: {path}")
    try:
        with open(path, encoding="utf-8") as handle:
            data = json.load(handle)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"config file {path} must hold a JSON object")
    return data


def _pick(cli_value, file_data, key, default):
    if cli_value is not None:
        return cli_value
    if key in file_data:
        return file_data[key]
    return default


def build_network_config(args, file_data: dict) -> NetworkConfig:
    cfg = NetworkConfig(
        k=int(_pick(args.k, file_data, "k", 2)),
        n=int(_pick(args.n, file_data, "n", 50)),
        snr_db=float(_pick(args.snr_db, file_data, "snr_db", 10.0)),
        epsilon=float(_pick(args.epsilon, file_data, "epsilon", 1.0)),
        t_max=float(_pick(args.t_max, file_data, "t_max", 1.0)),
        seed=int(_pick(args.seed, file_data, "seed", 0)),
        outage_fallback=bool(
            _pick(args.outage_fallback, file_data, "outage_fallback", False)
        ),
    )
    outcome = validate_config(cfg)
    if not outcome.ok:
        raise ConfigError("invalid configuration: " + "; ".join(outcome.violations))
    for warning in outcome.warnings:
        print(f"warning: {warning}", file=sys.stderr)
    return cfg


def build_sweep_spec(kind: SweepKind, args, file_data: dict) -> SweepSpec:
    sweep = file_data.get("sweep", {})
    if not isinstance(sweep, dict):
        raise ConfigError('"sweep" section must be a JSON object')
    if "kind" in sweep and sweep["kind"] != kind.value:
        raise ConfigError(
            f'config sweep kind {sweep["kind"]!r} does not match command '
            f"({kind.value!r})"
        )
    snr_grid = _pick(args.snr_grid, sweep, "snr_points_db", None)
    if snr_grid is None:
        raise ConfigError("an SNR grid is required (--snr-grid or sweep.snr_points_db)")
    if isinstance(snr_grid, str):
        snr_grid = _parse_float_list(snr_grid)
    n_grid = _pick(args.n_grid, sweep, "n_points", ())
    if isinstance(n_grid, str):
        n_grid = _parse_int_list(n_grid)
    protocols = _parse_enum_list(
        _pick(args.protocols, sweep, "protocols", [p.value for p in Protocol]),
        Protocol,
        "protocol",
    )
    selectors = _parse_enum_list(
        _pick(args.selectors, sweep, "selectors", [s.value for s in Selector]),
        Selector,
        "selector",
    )
    return SweepSpec(
        kind=kind,
        snr_points_db=tuple(float(v) for v in snr_grid),
        n_points=tuple(int(v) for v in n_grid),
        protocols=protocols,
        selectors=selectors,
        trials=int(_pick(args.trials, sweep, "trials", 10_000)),
        include_no_interference_bound=bool(
            _pick(args.include_no_interference, sweep, "include_no_interference_bound", False)
        ),
        n_exponent_factor=float(
            _pick(args.n_exponent_factor, sweep, "n_exponent_factor", 2.0)
        ),
        work_budget=int(_pick(args.work_budget, sweep, "work_budget", DEFAULT_WORK_BUDGET)),
        max_scaled_n=int(_pick(args.max_scaled_n, sweep, "max_scaled_n", DEFAULT_MAX_SCALED_N)),
    )


def run_single_report(cfg: NetworkConfig, trial: int) -> str:
    """One-realization text report across all selectors and protocols."""
    c = generate_channels(cfg, trial)
    til = compute_til(c)
    snr = cfg.snr_linear
    lines = [
        f"single realization: K={cfg.k} N={cfg.n} snr_db={cfg.snr_db:g} "
        f"epsilon={cfg.epsilon:g} seed={cfg.seed} trial={trial}"
    ]
    selections = {
        Selector.ORS: select_ors(til, cfg.epsilon, cfg.t_max, cfg.outage_fallback),
        Selector.MAX_MIN_SNR: select_max_min_snr(c),
        Selector.RANDOM: select_random(c, TrialRng(cfg.seed, trial)),
    }
    for selector, sel in selections.items():
        assigned = [
            f"pair{i}->relay{j}" if j is not None else f"pair{i}->OUTAGE"
            for i, j in enumerate(sel.assignment)
        ]
        lines.append(f"[{selector.value}] {'  '.join(assigned)}")
        tils = ", ".join(
            "-" if sel.assignment[i] is None else f"{sel.selected_til[i]:.4g}"
            for i in range(cfg.k)
        )
        lines.append(f"  selected TIL: {tils}   elapsed: {sel.elapsed:.4g}")
        profile = interference_profile(c, sel, snr)
        for protocol in Protocol:
            report = compute_rates(protocol, c, sel, profile, snr)
            per_pair = "  ".join(
                f"pair{i}:({report.per_pair[i, 0]:.4f},{report.per_pair[i, 1]:.4f})"
                for i in range(cfg.k)
            )
            lines.append(
                f"  {protocol.value:<6} sum_rate={report.sum_rate:.4f}  {per_pair}"
            )
    return "\n".join(lines)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="twr-sim",
        description="Monte Carlo experiments for relay selection in "
        "interfering two-way relay networks",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config file")
    common.add_argument("--k", type=int, help="number of node pairs")
    common.add_argument("--n", type=int, help="number of relays")
    common.add_argument("--snr-db", type=float, help="SNR in dB")
    common.add_argument("--epsilon", type=float, help="max allowable interference level")
    common.add_argument("--t-max", type=float, help="max back-off duration")
    common.add_argument("--seed", type=int, help="master RNG seed")
    common.add_argument(
        "--outage-fallback",
        action=argparse.BooleanOptionalAction,
        default=None,
        help="assign min-TIL relay even at/above epsilon",
    )

    sweep_common = argparse.ArgumentParser(add_help=False)
    sweep_common.add_argument("--snr-grid", help="comma list of SNR points in dB")
    sweep_common.add_argument("--n-grid", help="comma list of relay counts")
    sweep_common.add_argument("--trials", type=int, help="Monte Carlo trials per point")
    sweep_common.add_argument("--protocols", help="comma list, e.g. AF,DF,LC-CF")
    sweep_common.add_argument(
        "--selectors", help="comma list, e.g. ORS,max-min-SNR,random"
    )
    sweep_common.add_argument(
        "--include-no-interference",
        action=argparse.BooleanOptionalAction,
        default=None,
        help="also emit the interference-free LC-CF bound rows",
    )
    sweep_common.add_argument(
        "--n-exponent-factor",
        type=float,
        help="m in N = SNR^(m*(K-1)) for scaling sweeps (2 = full, 1 = under-scaled)",
    )
    sweep_common.add_argument("--work-budget", type=int, help="max K*N*trials per point")
    sweep_common.add_argument("--max-scaled-n", type=int, help="cap on derived N")
    sweep_common.add_argument(
        "--output-dir",
        default=None,
        help=f"output directory (default ${OUTPUT_DIR_ENV} or '.')",
    )
    sweep_common.add_argument("--out", help="output CSV filename")
    sweep_common.add_argument("--jobs", type=int, default=1, help="worker processes")

    single = sub.add_parser("single", parents=[common], help="report one realization")
    single.add_argument("--trial", type=int, default=0, help="trial index to draw")

    for name, kind in _COMMAND_KINDS.items():
        sub.add_parser(
            name,
            parents=[common, sweep_common],
            help=f"run a {kind.value} sweep and write CSV",
        )
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        file_data = load_config_file(args.config) if args.config else {}
        cfg = build_network_config(args, file_data)
        if args.command == "single":
            print(run_single_report(cfg, args.trial))
            return 0
        kind = _COMMAND_KINDS[args.command]
        spec = build_sweep_spec(kind, args, file_data)
        result = run_sweep(spec, cfg, n_jobs=max(1, args.jobs))
        output_dir = args.output_dir or os.environ.get(OUTPUT_DIR_ENV) or "."
        os.makedirs(output_dir, exist_ok=True)
        out_name = args.out or f"{args.command}.csv"
        out_path = os.path.join(output_dir, out_name)
        write_csv(result, out_path)
        print(f"wrote {len(result.rows)} rows to {out_path}")
        return 0
    except (ConfigError, WorkBudgetError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
