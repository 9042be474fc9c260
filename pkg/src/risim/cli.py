"""Command-line front end: sweeps, conditional experiments, analytic tables.

Subcommands
    sweep         outage probability versus SNR for one configuration
    levels-sweep  outage probability versus codebook size at fixed SNRs
    conditional   boundary-strip conditional estimates and the lower bound
    analytic      channel-law CDF tables and reference decay lines

Every CSV is written with a locale-independent format and an accompanying
``<name>.manifest`` key=value file carrying the resolved configuration and
a digest of everything that determines the output bytes.

Exit codes: 0 success, 2 usage error, 3 all points censored, 4 numeric or
domain failure.
"""

from __future__ import annotations

import argparse
import hashlib
import math
import os
import sys
import time

from ._version import __version__
from .channel import PERFECT, SystemConfig
from .analysis import (
    AllCensoredError,
    SweepResult,
    db_to_linear,
    reference_curves,
    sweep,
)
from .montecarlo import (
    DEFAULT_BLOCK_SIZE,
    EventSpec,
    ResourceGuardError,
    estimate_conditional_outage,
    event_probability,
)
from .specfun import SeriesConvergenceError, cdf_gsq

__all__ = ["main"]

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_ALL_CENSORED = 3
EXIT_NUMERIC = 4

SEED_ENV_VAR = "RIS_SIM_SEED"


class UsageError(Exception):
    pass


def _fmt(value: float) -> str:
    return format(float(value), ".12g")


def _parse_levels(text: str) -> int | str:
    if text.strip().lower() == PERFECT:
        return PERFECT
    try:
        levels = int(text)
    except ValueError as exc:
        raise UsageError(f"--levels must be an integer or '{PERFECT}'") from exc
    return levels


def _resolve_seed(args: argparse.Namespace) -> int:
    if args.seed is not None:
        return args.seed
    env = os.environ.get(SEED_ENV_VAR)
    if env is not None:
        try:
            return int(env)
        except ValueError as exc:
            raise UsageError(f"{SEED_ENV_VAR} must be an integer, got {env!r}") from exc
    return 0


def _build_config(args: argparse.Namespace) -> SystemConfig:
    if args.omega_d is not None and not args.direct_link:
        raise UsageError("--omega-d requires --direct-link")
    if args.direct_link and args.omega_d is None:
        raise UsageError("--direct-link requires --omega-d")
    try:
        return SystemConfig(
            n_elements=args.n_elements,
            levels=_parse_levels(args.levels),
            eta=args.eta,
            omega_s=args.omega_s,
            omega_i=args.omega_i,
            rate_bpcu=args.rate_bpcu,
            direct_link=args.direct_link,
            omega_d=args.omega_d,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _snr_grid(args: argparse.Namespace) -> list[float]:
    lo, hi, step = args.snr_db_min, args.snr_db_max, args.snr_db_step
    if step <= 0 or hi < lo:
        raise UsageError("need snr-db-min <= snr-db-max and a positive step")
    count = int(math.floor((hi - lo) / step + 1e-9)) + 1
    return [lo + k * step for k in range(count)]


def _config_items(cfg: SystemConfig) -> list[tuple[str, str]]:
    return [
        ("n_elements", str(cfg.n_elements)),
        ("levels", str(cfg.levels)),
        ("eta", _fmt(cfg.eta)),
        ("omega_s", _fmt(cfg.omega_s)),
        ("omega_i", _fmt(cfg.omega_i)),
        ("rate_bpcu", _fmt(cfg.rate_bpcu)),
        ("direct_link", "1" if cfg.direct_link else "0"),
        ("omega_d", _fmt(cfg.omega_d) if cfg.omega_d is not None else ""),
        ("epsilon0", _fmt(cfg.epsilon0)),
    ]


def _write_manifest(
    out_path: str,
    command: str,
    items: list[tuple[str, str]],
    duration: float,
) -> None:
    digest_src = "\n".join(f"{k}={v}" for k, v in items)
    digest = hashlib.sha256(digest_src.encode()).hexdigest()
    lines = [("command", command), *items]
    lines.append(("config_digest", digest))
    lines.append(("output", out_path))
    lines.append(("duration_s", f"{duration:.3f}"))
    lines.append(("version", __version__))
    with open(out_path + ".manifest", "w", encoding="utf-8", newline="") as fh:
        for key, value in lines:
            fh.write(f"{key}={value}\n")


def _write_csv(path: str, header: str, rows: list[list[str]]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(header + "\n")
        for row in rows:
            fh.write(",".join(row) + "\n")


# --- subcommands ------------------------------------------------------------


def _cmd_sweep(args: argparse.Namespace) -> int:
    started = time.monotonic()
    cfg = _build_config(args)
    seed = _resolve_seed(args)
    grid = _snr_grid(args)
    result = sweep(
        cfg,
        grid,
        args.trials,
        seed,
        block_size=args.block_size,
        workers=args.threads,
        min_failures=args.min_failures,
    )
    rows = []
    for point in result.points:
        est = point.estimate
        if point.censored:
            rows.append([_fmt(point.rho_db), str(est.trials), str(est.failures), "", "", "", "1"])
        else:
            rows.append(
                [
                    _fmt(point.rho_db),
                    str(est.trials),
                    str(est.failures),
                    _fmt(est.p_hat),
                    _fmt(est.ci_low),
                    _fmt(est.ci_high),
                    "0",
                ]
            )
    _write_csv(args.out, "rho_db,trials,failures,p_hat,ci_low,ci_high,censored", rows)
    items = _config_items(cfg) + [
        ("seed", str(seed)),
        ("trials", str(args.trials)),
        ("block_size", str(args.block_size)),
        ("min_failures", str(args.min_failures)),
        ("snr_db_grid", ";".join(_fmt(g) for g in grid)),
    ]
    _write_manifest(args.out, "sweep", items, time.monotonic() - started)
    return EXIT_OK


def _parse_snr_list(text: str) -> list[float]:
    try:
        values = [float(v) for v in text.split(",") if v.strip() != ""]
    except ValueError as exc:
        raise UsageError("--snr-db must be a comma-separated list of dB values") from exc
    if not values:
        raise UsageError("--snr-db must contain at least one value")
    return values


def _cmd_levels_sweep(args: argparse.Namespace) -> int:
    started = time.monotonic()
    if args.levels_min < 2 or args.levels_max < args.levels_min:
        raise UsageError("need 2 <= levels-min <= levels-max")
    snrs = _parse_snr_list(args.snr_db)
    base = _build_config(
        argparse.Namespace(**{**vars(args), "levels": str(args.levels_min)})
    )
    level_cases: list[int | str] = list(range(args.levels_min, args.levels_max + 1))
    level_cases.append(PERFECT)
    seed = _resolve_seed(args)
    rows = []
    from dataclasses import replace
    from .montecarlo import estimate_outage

    all_censored = True
    for i, snr_db in enumerate(snrs):
        rho = db_to_linear(snr_db)
        for j, levels in enumerate(level_cases):
            cfg = replace(base, levels=levels)
            point_seed = seed + i * len(level_cases) + j
            try:
                est = estimate_outage(
                    cfg,
                    rho,
                    args.trials,
                    point_seed,
                    block_size=args.block_size,
                    workers=args.threads,
                    min_failures=args.min_failures,
                )
                censored = False
                all_censored = False
            except ResourceGuardError as guard:
                est = guard.estimate
                censored = True
            label = str(levels)
            if censored:
                rows.append([_fmt(snr_db), label, "", "", "", "1"])
            else:
                rows.append(
                    [
                        _fmt(snr_db),
                        label,
                        _fmt(est.p_hat),
                        _fmt(est.ci_low),
                        _fmt(est.ci_high),
                        "0",
                    ]
                )
    if all_censored:
        raise AllCensoredError("every (snr, levels) cell fell below the failure guard")
    _write_csv(args.out, "snr_db,levels,p_hat,ci_low,ci_high,censored", rows)
    items = _config_items(base) + [
        ("seed", str(seed)),
        ("trials", str(args.trials)),
        ("block_size", str(args.block_size)),
        ("min_failures", str(args.min_failures)),
        ("snr_db_list", ";".join(_fmt(s) for s in snrs)),
        ("levels_range", f"{args.levels_min}..{args.levels_max}+{PERFECT}"),
    ]
    _write_manifest(args.out, "levels-sweep", items, time.monotonic() - started)
    return EXIT_OK


def _cmd_conditional(args: argparse.Namespace) -> int:
    started = time.monotonic()
    if _parse_levels(args.levels) != 2:
        raise UsageError("conditional experiments require --levels 2")
    cfg = _build_config(args)
    seed = _resolve_seed(args)
    grid = _snr_grid(args)
    rows = []
    for k, rho_db in enumerate(grid):
        rho = db_to_linear(rho_db)
        event = EventSpec(args.event, cfg.n_elements, args.theta)
        est = estimate_conditional_outage(
            cfg,
            event,
            rho,
            args.trials,
            seed + k,
            block_size=args.block_size,
            workers=args.threads,
            allow_sparse=True,
        )
        prob = event_probability(event, rho)
        rows.append(
            [
                _fmt(rho_db),
                _fmt(prob),
                _fmt(est.p_hat),
                _fmt(prob * est.p_hat),
                _fmt(est.ci_low),
                _fmt(est.ci_high),
            ]
        )
    _write_csv(
        args.out, "rho_db,event_prob,cond_p_hat,lower_bound,ci_low,ci_high", rows
    )
    items = _config_items(cfg) + [
        ("seed", str(seed)),
        ("trials", str(args.trials)),
        ("block_size", str(args.block_size)),
        ("event", args.event),
        ("theta", _fmt(args.theta) if args.theta is not None else "rho^-1/2"),
        ("snr_db_grid", ";".join(_fmt(g) for g in grid)),
    ]
    _write_manifest(args.out, "conditional", items, time.monotonic() - started)
    return EXIT_OK


def _cmd_analytic(args: argparse.Namespace) -> int:
    started = time.monotonic()
    rows: list[list[str]]
    if args.ref_kind is not None:
        if args.anchor_db is None or args.anchor_value is None:
            raise UsageError("reference lines need --anchor-db and --anchor-value")
        grid = _snr_grid(args)
        curve = reference_curves(
            args.n_elements, args.ref_kind, grid, args.anchor_db, args.anchor_value
        )
        rows = [[_fmt(db), _fmt(v)] for db, v in curve]
        _write_csv(args.out, "rho_db,value", rows)
        items = [
            ("n_elements", str(args.n_elements)),
            ("ref_kind", args.ref_kind),
            ("anchor_db", _fmt(args.anchor_db)),
            ("anchor_value", _fmt(args.anchor_value)),
            ("snr_db_grid", ";".join(_fmt(g) for g in grid)),
        ]
        _write_manifest(args.out, "analytic", items, time.monotonic() - started)
        return EXIT_OK

    if args.snr_mode:
        # CDF of the outage event for a single error-free element over an
        # SNR grid: the exact analytic curve that N=1 sweeps must match
        cfg = _build_config(args)
        grid = _snr_grid(args)
        rows = []
        for rho_db in grid:
            x = cfg.epsilon0 / db_to_linear(rho_db)
            approx = -x * math.log(x) if x > 0 else 0.0
            rows.append([_fmt(rho_db), _fmt(x), _fmt(cdf_gsq(x)), _fmt(approx)])
        _write_csv(args.out, "rho_db,x,cdf,approx", rows)
        items = _config_items(cfg) + [
            ("snr_db_grid", ";".join(_fmt(g) for g in grid)),
        ]
        _write_manifest(args.out, "analytic", items, time.monotonic() - started)
        return EXIT_OK

    if args.x_min is None or args.x_max is None:
        raise UsageError("analytic needs --x-min/--x-max, --snr-mode, or --ref-kind")
    if args.x_min < 0 or args.x_max < args.x_min or args.points < 2:
        raise UsageError("need 0 <= x-min <= x-max and points >= 2")
    rows = []
    for k in range(args.points):
        x = args.x_min + (args.x_max - args.x_min) * k / (args.points - 1)
        approx = -x * math.log(x) if x > 0 else 0.0
        rows.append([_fmt(x), _fmt(cdf_gsq(x)), _fmt(approx)])
    _write_csv(args.out, "x,cdf,approx", rows)
    items = [
        ("x_min", _fmt(args.x_min)),
        ("x_max", _fmt(args.x_max)),
        ("points", str(args.points)),
    ]
    _write_manifest(args.out, "analytic", items, time.monotonic() - started)
    return EXIT_OK


# --- parser wiring ----------------------------------------------------------


def _add_config_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--n-elements", type=int, default=2)
    parser.add_argument("--levels", type=str, default="3",
                        help=f"codebook size (integer >= 2) or '{PERFECT}'")
    parser.add_argument("--rate-bpcu", type=float, default=1.0)
    parser.add_argument("--eta", type=float, default=1.0)
    parser.add_argument("--omega-s", type=float, default=1.0)
    parser.add_argument("--omega-i", type=float, default=1.0)
    parser.add_argument("--direct-link", action="store_true")
    parser.add_argument("--omega-d", type=float, default=None)


def _add_run_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--trials", type=int, default=1_000_000)
    parser.add_argument("--seed", type=int, default=None,
                        help=f"defaults to ${SEED_ENV_VAR} or 0")
    parser.add_argument("--block-size", type=int, default=DEFAULT_BLOCK_SIZE)
    parser.add_argument("--threads", type=int, default=1)
    parser.add_argument("--min-failures", type=int, default=10)
    parser.add_argument("--config", type=str, default=None,
                        help="flat key=value file; explicit flags take precedence")
    parser.add_argument("--out", type=str, required=True)


def _add_snr_flags(parser: argparse.ArgumentParser, lo: float, hi: float, step: float) -> None:
    parser.add_argument("--snr-db-min", type=float, default=lo)
    parser.add_argument("--snr-db-max", type=float, default=hi)
    parser.add_argument("--snr-db-step", type=float, default=step)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="risim",
        description="Monte-Carlo outage curves for surface-assisted links "
        "with quantized phase shifts",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_sweep = sub.add_parser("sweep", help="outage probability versus SNR")
    _add_config_flags(p_sweep)
    _add_snr_flags(p_sweep, 0.0, 40.0, 2.5)
    _add_run_flags(p_sweep)
    p_sweep.set_defaults(func=_cmd_sweep)

    p_levels = sub.add_parser("levels-sweep", help="outage probability versus codebook size")
    _add_config_flags(p_levels)
    p_levels.add_argument("--levels-min", type=int, default=2)
    p_levels.add_argument("--levels-max", type=int, default=8)
    p_levels.add_argument("--snr-db", type=str, default="20,30",
                          help="comma-separated SNR values in dB")
    _add_run_flags(p_levels)
    p_levels.set_defaults(func=_cmd_levels_sweep)

    p_cond = sub.add_parser("conditional", help="boundary-strip conditional experiment")
    _add_config_flags(p_cond)
    p_cond.set_defaults(levels="2")
    p_cond.add_argument("--event", choices=["eps1", "eps2"], default="eps2")
    p_cond.add_argument("--theta", type=float, default=None,
                        help="strip width override; defaults to rho^-1/2 per point")
    _add_snr_flags(p_cond, 20.0, 40.0, 10.0)
    _add_run_flags(p_cond)
    p_cond.set_defaults(func=_cmd_conditional)

    p_an = sub.add_parser("analytic", help="channel-law tables and reference lines")
    _add_config_flags(p_an)
    p_an.add_argument("--x-min", type=float, default=None)
    p_an.add_argument("--x-max", type=float, default=None)
    p_an.add_argument("--points", type=int, default=101)
    p_an.add_argument("--snr-mode", action="store_true",
                      help="emit the exact single-element outage curve over the SNR grid")
    p_an.add_argument("--ref-kind", choices=["full", "l2-bound"], default=None)
    p_an.add_argument("--anchor-db", type=float, default=None)
    p_an.add_argument("--anchor-value", type=float, default=None)
    _add_snr_flags(p_an, 0.0, 40.0, 2.5)
    p_an.add_argument("--seed", type=int, default=None)
    p_an.add_argument("--config", type=str, default=None)
    p_an.add_argument("--out", type=str, required=True)
    p_an.set_defaults(func=_cmd_analytic)

    return parser


def _load_config_file(path: str) -> dict[str, str]:
    values: dict[str, str] = {}
    try:
        with open(path, "r", encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if not line or line.startswith("#"):
                    continue
                if "=" not in line:
                    raise UsageError(f"bad config line (expected key=value): {line!r}")
                key, _, value = line.partition("=")
                values[key.strip().replace("-", "_")] = value.strip()
    except OSError as exc:
        raise UsageError(f"cannot read config file {path}: {exc}") from exc
    return values


_CONFIG_TYPES = {
    "n_elements": int,
    "levels": str,
    "rate_bpcu": float,
    "eta": float,
    "omega_s": float,
    "omega_i": float,
    "omega_d": float,
    "trials": int,
    "seed": int,
    "block_size": int,
    "threads": int,
    "min_failures": int,
    "snr_db_min": float,
    "snr_db_max": float,
    "snr_db_step": float,
    "snr_db": str,
    "theta": float,
}


def _apply_config_file(parser: argparse.ArgumentParser, argv: list[str]) -> list[str]:
    """Turn --config file values into parser defaults (flags still win)."""
    probe = argparse.ArgumentParser(add_help=False)
    probe.add_argument("--config", type=str, default=None)
    known, _ = probe.parse_known_args(argv)
    if known.config is None:
        return argv
    raw = _load_config_file(known.config)
    defaults: dict[str, object] = {}
    for key, text in raw.items():
        if key == "direct_link":
            defaults[key] = text.strip() in ("1", "true", "yes")
            continue
        caster = _CONFIG_TYPES.get(key)
        if caster is None:
            raise UsageError(f"unknown config key {key!r}")
        try:
            defaults[key] = caster(text)
        except ValueError as exc:
            raise UsageError(f"bad value for config key {key!r}: {text!r}") from exc
    for action in parser._subparsers._group_actions:  # type: ignore[union-attr]
        for sub in action.choices.values():
            usable = {
                k: v for k, v in defaults.items()
                if any(a.dest == k for a in sub._actions)
            }
            sub.set_defaults(**usable)
    return argv


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = _build_parser()
    try:
        argv = _apply_config_file(parser, argv)
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except AllCensoredError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ALL_CENSORED
    except (ValueError, ArithmeticError, SeriesConvergenceError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    raise SystemExit(main())
