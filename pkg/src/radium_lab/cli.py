"""Command-line front end.

Each subcommand resolves its flags into an experiment configuration, runs
it, prints a one-line summary, and (when ``--out`` is given) writes the
result table as CSV or JSON with a ``<out>.manifest.json`` sidecar echoing
the full configuration, seed, and tool version.  Re-running a manifest's
configuration reproduces the result file byte for byte.

Exit codes: 0 on success, 2 on argument errors (with usage text), 1 on
runtime errors (with a diagnostic).
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from dataclasses import asdict, dataclass
from datetime import datetime, timezone
from pathlib import Path

from . import __version__, analysis, core_model, sim_engine

DEFAULT_SEED = 1
DEFAULT_T_STAR_GRID = tuple(float(t) for t in range(60, 1801, 60))
DEFAULT_Q_GRID = (0.1, 0.2, 0.3, 0.4)
DEFAULT_Z_GRID = (1, 2, 3, 4, 5, 6)


@dataclass(frozen=True)
class RunManifest:
    """Provenance sidecar written next to every result file."""

    subcommand: str
    config: dict
    output: str
    format: str
    created_utc: str
    version: str


def _float_list(text: str) -> list[float]:
    try:
        return [float(part) for part in text.split(",") if part.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from exc


def _int_list(text: str) -> list[int]:
    try:
        return [int(part) for part in text.split(",") if part.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from exc


def _fmt(value):
    """Render numbers with 6 significant digits; anything else verbatim."""
    if isinstance(value, bool):
        return str(value)
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return f"{value:.6g}"
    return str(value)


def write_results(rows: list[dict], columns: list[str], path: Path, fmt: str,
                  manifest: RunManifest) -> None:
    """Write the result table and its manifest sidecar.

    CSV carries exactly the documented header; JSON mirrors the same fields
    with numbers rounded to the same 6 significant digits.
    """
    path = Path(path)
    if fmt == "csv":
        with path.open("w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(columns)
            for row in rows:
                writer.writerow([_fmt(row[c]) for c in columns])
    else:
        payload = {
            "columns": columns,
            "rows": [
                {c: (float(_fmt(row[c])) if isinstance(row[c], float) else row[c])
                 for c in columns}
                for row in rows
            ],
        }
        path.write_text(json.dumps(payload, indent=2) + "\n")
    sidecar = path.with_name(path.name + ".manifest.json")
    sidecar.write_text(json.dumps(asdict(manifest), indent=2, default=str) + "\n")


def _params(args, k: float | None = None) -> core_model.ProtocolParams:
    return core_model.ProtocolParams(
        k=args.k if k is None else k,
        target_time=args.target_time,
        base_reward=getattr(args, "reward", core_model.DEFAULT_BASE_REWARD),
    )


def _check(parser, condition: bool, message: str) -> None:
    if not condition:
        parser.error(message)


def _validate_common(parser, args) -> None:
    ks = args.k if isinstance(getattr(args, "k", 2.0), list) else [getattr(args, "k", 2.0)]
    _check(parser, all(k >= 1 for k in ks), "--k must be >= 1")
    _check(parser, args.target_time > 0, "--target-time must be positive")
    _check(parser, 0 <= args.seed < 2 ** 64, "--seed must fit in 64 bits")
    if hasattr(args, "trials"):
        _check(parser, args.trials >= 1, "--trials must be >= 1")
    if hasattr(args, "reward"):
        _check(parser, args.reward > 0, "--reward must be positive")


# ---------------------------------------------------------------------------
# subcommand handlers: validate(parser, args); run(args) -> (columns, rows, summary)
# ---------------------------------------------------------------------------

def _validate_future_mine(parser, args):
    _validate_common(parser, args)
    _check(parser, all(0 < q < 1 for q in args.q), "--q values must be in (0, 1)")
    _check(parser, all(t > 0 for t in args.t_star), "--t-star values must be positive")


def _run_future_mine(args):
    params = _params(args)
    columns = ["q", "t_star", "trials", "successes", "success_rate", "bound"]
    rows = []
    for q in args.q:
        for t_star in args.t_star:
            stats = sim_engine.run_future_mine_attack(q, t_star, params, args.trials, args.seed)
            rows.append({
                "q": q, "t_star": t_star, "trials": stats.trial_count,
                "successes": stats.successes, "success_rate": stats.success_rate,
                "bound": analysis.future_mine_bound(q, t_star, params),
            })
    best = max(rows, key=lambda r: r["success_rate"])
    summary = (f"future-mine: {len(rows)} grid points x {args.trials} trials, "
               f"peak success {best['success_rate']:.4f} at q={best['q']} t*={_fmt(best['t_star'])}")
    return columns, rows, summary


def _validate_defacto(parser, args):
    _validate_common(parser, args)
    _check(parser, all(t > 0 for t in args.tau), "--tau values must be positive")
    _check(parser, all(0 < f <= 1 for f in args.fractions), "--fractions must be in (0, 1]")
    _check(parser, abs(sum(args.fractions) - 1.0) <= 1e-9, "--fractions must sum to 1")
    _check(parser, 0 <= args.preemptor < len(args.fractions), "--preemptor index out of range")


def _run_defacto(args):
    params = _params(args)
    columns = ["tau", "trials", "race_rate", "preemptor", "preemptor_fraction",
               "preemptor_win_rate", "preemption_advantage", "p5", "median", "p95"]
    rows = []
    for tau in args.tau:
        res = sim_engine.run_defacto_future_mine(
            tau, args.fractions, params, args.trials, args.seed, preemptor=args.preemptor)
        rows.append({
            "tau": tau, "trials": args.trials, "race_rate": res.race_rate,
            "preemptor": res.preemptor,
            "preemptor_fraction": args.fractions[res.preemptor],
            "preemptor_win_rate": res.preemptor_win_rate,
            "preemption_advantage": res.preemption_advantage,
            "p5": res.block_time.p5, "median": res.block_time.median,
            "p95": res.block_time.p95,
        })
    summary = (f"defacto: {len(rows)} tau values x {args.trials} trials, "
               f"race rate {rows[0]['race_rate']:.4f} at tau={_fmt(rows[0]['tau'])}")
    return columns, rows, summary


def _validate_daa(parser, args):
    _validate_common(parser, args)
    _check(parser, args.blocks >= 1, "--blocks must be >= 1")
    _check(parser, args.window >= 1, "--window must be >= 1")


def _run_daa(args):
    params = _params(args)
    res = sim_engine.run_daa_experiment(
        args.protocol, params, blocks_per_trial=args.blocks, trials=args.trials,
        window=args.window, seed=args.seed)
    columns = ["block_index", "p5", "median", "p95"]
    rows = [
        {"block_index": b, "p5": res.p5[b], "median": res.median[b], "p95": res.p95[b]}
        for b in range(res.blocks)
    ]
    ov = res.overall
    summary = (f"daa-sim [{args.protocol}]: {args.trials} trials x {args.blocks} blocks, "
               f"median-of-medians {ov.median:.1f}s (p5 {ov.p5:.1f}s, p95 {ov.p95:.1f}s)")
    return columns, rows, summary


def _validate_orphan(parser, args):
    _validate_common(parser, args)
    _check(parser, args.blocks >= 1, "--blocks must be >= 1")
    _check(parser, args.orphan_window > 0, "--orphan-window must be positive")


def _run_orphan(args):
    params = _params(args)
    protocols = sim_engine.PROTOCOLS if args.protocol == "both" else (args.protocol,)
    columns = ["protocol", "blocks", "orphan_window", "orphans", "orphan_rate"]
    rows = []
    for protocol in protocols:
        res = sim_engine.run_orphan_experiment(
            protocol, params, blocks=args.blocks, orphan_window=args.orphan_window,
            seed=args.seed)
        rows.append({
            "protocol": protocol, "blocks": res.blocks,
            "orphan_window": res.orphan_window, "orphans": res.orphans,
            "orphan_rate": res.orphan_rate,
        })
    parts = ", ".join(f"{r['protocol']} {100 * r['orphan_rate']:.3f}%" for r in rows)
    return columns, rows, f"orphan: {args.blocks} blocks, rate {parts}"


def _validate_doublespend(parser, args):
    _validate_common(parser, args)
    _check(parser, all(0 < q < 1 for q in args.q), "--q values must be in (0, 1)")
    _check(parser, all(z >= 0 for z in args.z), "--z values must be >= 0")
    _check(parser, args.horizon >= 1, "--horizon must be >= 1")
    _check(parser, args.deficit >= 1, "--deficit must be >= 1")


def _run_doublespend(args):
    params = _params(args)
    protocols = sim_engine.PROTOCOLS if args.protocol == "both" else (args.protocol,)
    columns = ["protocol", "q", "z", "trials", "successes", "success_rate"]
    rows = []
    for protocol in protocols:
        for q in args.q:
            for z in args.z:
                stats = sim_engine.run_doublespend(
                    q, z, protocol, params, args.trials, args.seed,
                    horizon=args.horizon, horizon_deficit=args.deficit)
                rows.append({
                    "protocol": protocol, "q": q, "z": z, "trials": stats.trial_count,
                    "successes": stats.successes, "success_rate": stats.success_rate,
                })
    summary = (f"doublespend: {len(rows)} points x {args.trials} trials "
               f"({' and '.join(protocols)})")
    return columns, rows, summary


def _validate_switch(parser, args):
    _validate_common(parser, args)
    _check(parser, all(x >= 1 for x in args.x), "--x values must be >= 1")


def _run_switch(args):
    columns = ["k", "x", "trials", "reward_per_second", "baseline"]
    rows = []
    for k in args.k:
        params = _params(args, k=k)
        for x in args.x:
            res = sim_engine.run_switch_mine(x, params, args.trials, args.seed)
            rows.append({
                "k": k, "x": x, "trials": res.trials,
                "reward_per_second": res.reward_per_second, "baseline": res.baseline,
            })
    summary = (f"switch-mine: {len(rows)} points x {args.trials} episodes, "
               f"baseline {rows[0]['baseline']:.6g} coins/s")
    return columns, rows, summary


def _validate_variance(parser, args):
    _validate_common(parser, args)
    _check(parser, args.samples == 0 or args.samples >= 2, "--samples must be 0 or >= 2")


def _run_variance(args):
    ratio = core_model.variance_ratio(args.k)
    columns = ["k", "variance_ratio"]
    row = {"k": args.k, "variance_ratio": ratio}
    summary = f"{ratio:.4f}"
    if args.samples:
        probe = sim_engine.run_variance_probe(_params(args), args.samples, args.seed)
        columns += ["mc_estimate", "samples"]
        row.update(mc_estimate=probe, samples=args.samples)
        summary += f" (monte carlo {probe:.4f} over {args.samples} draws)"
    return columns, [row], summary


def _validate_bounds(parser, args):
    _validate_common(parser, args)
    _check(parser, all(0 < q < 1 for q in args.q), "--q values must be in (0, 1)")
    _check(parser, all(t > 0 for t in args.t_star), "--t-star values must be positive")


def _run_bounds(args):
    params = _params(args)
    columns = ["q", "t_star", "attacker_mean_time", "compliant_survival", "bound"]
    rows = []
    for q in args.q:
        for t_star in args.t_star:
            b = analysis.attack_bound(q, t_star, params)
            rows.append({
                "q": q, "t_star": t_star, "attacker_mean_time": b.attacker_mean_time,
                "compliant_survival": b.compliant_survival, "bound": b.bound,
            })
    if len(rows) == 1:
        summary = f"{rows[0]['bound']:.4f}"
    else:
        best = max(rows, key=lambda r: r["bound"])
        summary = (f"bounds: {len(rows)} points, max {best['bound']:.4f} "
                   f"at q={best['q']} t*={_fmt(best['t_star'])}")
    return columns, rows, summary


# ---------------------------------------------------------------------------
# parser assembly
# ---------------------------------------------------------------------------

def _add_common(sub, trials_default: int):
    sub.add_argument("--target-time", type=float, default=core_model.DEFAULT_TARGET_TIME,
                     help="target block time in seconds")
    sub.add_argument("--seed", type=int, default=DEFAULT_SEED, help="64-bit master seed")
    sub.add_argument("--trials", type=int, default=trials_default)
    sub.add_argument("--out", type=Path, default=None, help="result file path")
    sub.add_argument("--format", choices=("csv", "json"), default="csv")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="radium-lab",
        description="Mining simulations and closed-form analysis for dynamic-target PoW.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    subs = parser.add_subparsers(dest="subcommand", required=True)

    sub = subs.add_parser("future-mine", help="future-mining attack success sweep")
    sub.add_argument("--q", type=_float_list, default=list(DEFAULT_Q_GRID))
    sub.add_argument("--t-star", type=_float_list, default=list(DEFAULT_T_STAR_GRID))
    sub.add_argument("--k", type=float, default=2.0)
    _add_common(sub, trials_default=500)
    sub.set_defaults(validate=_validate_future_mine, run=_run_future_mine)

    sub = subs.add_parser("defacto", help="all miners future-mine to a common time")
    sub.add_argument("--tau", type=_float_list, default=[600.0])
    sub.add_argument("--fractions", type=_float_list, default=[0.5, 0.5])
    sub.add_argument("--preemptor", type=int, default=0,
                     help="miner index winning all release ties")
    sub.add_argument("--k", type=float, default=2.0)
    _add_common(sub, trials_default=10_000)
    sub.set_defaults(validate=_validate_defacto, run=_run_defacto)

    sub = subs.add_parser("daa-sim", help="closed-loop difficulty adjustment block times")
    sub.add_argument("--protocol", choices=sim_engine.PROTOCOLS, default="radium")
    sub.add_argument("--k", type=float, default=2.0)
    sub.add_argument("--blocks", type=int, default=30)
    sub.add_argument("--window", type=int, default=2)
    _add_common(sub, trials_default=1000)
    sub.set_defaults(validate=_validate_daa, run=_run_daa)

    sub = subs.add_parser("orphan", help="fork-coincidence rate of two network halves")
    sub.add_argument("--protocol", choices=sim_engine.PROTOCOLS + ("both",), default="both")
    sub.add_argument("--k", type=float, default=2.0)
    sub.add_argument("--blocks", type=int, default=850_000)
    sub.add_argument("--orphan-window", type=float, default=3.0)
    _add_common(sub, trials_default=1)
    sub.set_defaults(validate=_validate_orphan, run=_run_orphan)

    sub = subs.add_parser("doublespend", help="private-chain doublespend race sweep")
    sub.add_argument("--protocol", choices=sim_engine.PROTOCOLS + ("both",), default="both")
    sub.add_argument("--q", type=_float_list, default=list(DEFAULT_Q_GRID))
    sub.add_argument("--z", type=_int_list, default=list(DEFAULT_Z_GRID))
    sub.add_argument("--k", type=float, default=2.0)
    sub.add_argument("--horizon", type=int, default=500)
    sub.add_argument("--deficit", type=int, default=20)
    _add_common(sub, trials_default=1000)
    sub.set_defaults(validate=_validate_doublespend, run=_run_doublespend)

    sub = subs.add_parser("switch-mine", help="two-block hash-rate excursion profitability")
    sub.add_argument("--k", type=_float_list, default=[1.0, 2.0, 4.0])
    sub.add_argument("--x", type=_float_list, default=[float(x) for x in range(1, 11)])
    sub.add_argument("--reward", type=float, default=core_model.DEFAULT_BASE_REWARD)
    _add_common(sub, trials_default=100_000)
    sub.set_defaults(validate=_validate_switch, run=_run_switch)

    sub = subs.add_parser("variance", help="block-time variance relative to conventional PoW")
    sub.add_argument("--k", type=float, default=2.0)
    sub.add_argument("--samples", type=int, default=0,
                     help="optional Monte Carlo check with this many draws")
    _add_common(sub, trials_default=1)
    sub.set_defaults(validate=_validate_variance, run=_run_variance)

    sub = subs.add_parser("bounds", help="closed-form future-mining success bound")
    sub.add_argument("--q", type=_float_list, default=[0.3])
    sub.add_argument("--t-star", type=_float_list, default=[600.0])
    sub.add_argument("--k", type=float, default=2.0)
    _add_common(sub, trials_default=1)
    sub.set_defaults(validate=_validate_bounds, run=_run_bounds)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    args.validate(parser, args)  # range checks before any computation
    try:
        columns, rows, summary = args.run(args)
        if args.out is not None:
            config = {
                key: (str(value) if isinstance(value, Path) else value)
                for key, value in vars(args).items()
                if key not in ("validate", "run", "out", "format")
            }
            manifest = RunManifest(
                subcommand=args.subcommand,
                config=config,
                output=str(args.out),
                format=args.format,
                created_utc=datetime.now(timezone.utc).isoformat(),
                version=__version__,
            )
            write_results(rows, columns, args.out, args.format, manifest)
        print(summary)
        return 0
    except Exception as exc:  # runtime failure: diagnostic on stderr, exit 1
        print(f"radium-lab: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
