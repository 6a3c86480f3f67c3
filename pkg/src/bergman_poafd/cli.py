"""Command line entry point.

    bergman-poafd run config.json [--out DIR] [--seed N] [--threads N] [--verbose]
    bergman-poafd probe membership --beta 0 --alpha 3
    bergman-poafd probe inclusion --alpha1 0 --alpha2 1
    bergman-poafd probe classify --beta -1.5

Exit status: 0 success, 2 configuration error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys

from .experiments import ConfigError, emit_report, load_config, run_experiment

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3

log = logging.getLogger("bergman_poafd")


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="bergman-poafd", description="Adaptive rational decompositions in weighted Bergman spaces.")
    p.add_argument("--verbose", "-v", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run an experiment described by a JSON config")
    run.add_argument("config")
    run.add_argument("--out", help="output directory (default: config 'output' or ./out)")
    run.add_argument("--seed", type=int, help="override the config seed")
    run.add_argument("--threads", type=int, default=None, help="threads for selection grids")
    run.add_argument("--no-figures", action="store_true", help="skip PNG rendering")
    run.add_argument("--verbose", "-v", action="store_true", default=argparse.SUPPRESS)

    probe = sub.add_parser("probe", help="membership analytics, printed as tables")
    probe.add_argument("kind", choices=["membership", "inclusion", "classify"])
    probe.add_argument("--beta", type=float, default=0.0)
    probe.add_argument("--alpha", type=float, default=3.0)
    probe.add_argument("--alpha1", default="0")
    probe.add_argument("--alpha2", type=float, default=1.0)
    probe.add_argument("--witness-exponent", type=float, default=None)
    probe.add_argument("--json", action="store_true", help="print the JSON report instead of a table")
    return p


def _cmd_run(args) -> int:
    cfg = load_config(args.config)
    if args.seed is not None:
        if args.seed < 0:
            raise ConfigError("--seed must be nonnegative")
        cfg["seed"] = args.seed
    if args.threads is not None and args.threads < 1:
        raise ConfigError("--threads must be at least 1")
    out = args.out or cfg.get("output") or "out"
    result = run_experiment(cfg, threads=args.threads)
    paths = emit_report(result, out, figures=False if args.no_figures else None)
    for p in paths:
        print(p)
    return EXIT_OK


def _table(rows, header) -> str:
    cells = [header] + [[str(c) for c in r] for r in rows]
    widths = [max(len(r[i]) for r in cells) for i in range(len(header))]
    return "\n".join("  ".join(c.ljust(w) for c, w in zip(r, widths)) for r in cells)


def _cmd_probe(args) -> int:
    from . import analysis

    if args.kind == "classify":
        report = analysis.classify_f_beta(args.beta).to_json()
        print(json.dumps(report, indent=2) if args.json else _table(
            [[report["beta"], report["hardy"], report["bergman_alphas"]]], ["beta", "hardy", "bergman"]))
        return EXIT_OK
    if args.kind == "membership":
        r = analysis.membership_probe(args.beta, args.alpha)
        if args.json:
            print(json.dumps(r.to_json(), indent=2))
            return EXIT_OK
        rows = [[f"{rad:.6f}", f"{p:.6g}", f"{inc:.6g}"] for rad, p, inc in zip(r.radii, r.partial_integrals, r.increments)]
        print(_table(rows, ["r", "integral", "shell"]))
        print(f"slope {r.fitted_slope:.4f} (predicted {r.predicted_slope:.4f}) -> {r.verdict}; expected member: {r.expected}")
        return EXIT_OK
    a1 = "hardy" if args.alpha1 == "hardy" else float(args.alpha1)
    r = analysis.inclusion_probe(a1, args.alpha2, args.witness_exponent)
    if args.json:
        print(json.dumps(r.to_json(), indent=2))
        return EXIT_OK
    rows = [[s.level, f"{s.partial_sum:.6g}", f"{s.term_exponent:.4f}", s.verdict, s.crossed_threshold, f"{s.cauchy_gap:.3g}"]
            for s in (r.lower, r.upper)]
    print(_table(rows, ["level", "partial_sum", "term_exponent", "verdict", "crossed", "cauchy_gap"]))
    print(f"separates: {r.separates}")
    for n in r.notes:
        print(f"note: {n}")
    return EXIT_OK


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "run":
            return _cmd_run(args)
        return _cmd_probe(args)
    except (ConfigError, FileNotFoundError, IsADirectoryError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ArithmeticError, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        # malformed target documents, out-of-domain centres
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
