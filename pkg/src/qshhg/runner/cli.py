"""Command line entry point: run, figure, validate-config, convergence-check."""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import replace
from pathlib import Path

from ..fockspace import RefusedStage
from ..sfa import ConfigurationError
from .config import ConfigValidationError, load_config
from .figures import FIGURES, UnknownFigure, reproduce_figure
from .pipeline import convergence_check, run_scenario

EXIT_OK, EXIT_VALIDATION, EXIT_REFUSED, EXIT_NONCONVERGENCE = 0, 2, 3, 4
THREADS_ENV = "QSHHG_THREADS"


def _default_threads() -> int:
    raw = os.environ.get(THREADS_ENV, "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="qshhg", description="HHG and quantum-sideband HHG simulator")
    sub = p.add_subparsers(dest="verb", required=True)

    def common(sp, config=True):
        if config:
            sp.add_argument("--config", required=True, type=Path, help="scenario file (key = value)")
        sp.add_argument("--out", type=Path, default=Path("qshhg-out"), help="output directory")
        sp.add_argument("--threads", type=int, default=None,
                        help=f"worker threads (default ${THREADS_ENV} or 1)")
        sp.add_argument("--allow-expensive", action="store_true",
                        help="permit exact Fock-space work at large squeezing")

    common(sub.add_parser("run", help="run a scenario file"))
    fig = sub.add_parser("figure", help="reproduce a figure from its canned scenario")
    fig.add_argument("--figure", required=True, help="one of: " + ", ".join(FIGURES))
    common(fig, config=False)
    val = sub.add_parser("validate-config", help="check a scenario file without running it")
    val.add_argument("--config", required=True, type=Path)
    conv = sub.add_parser("convergence-check", help="compare band photons on the grid and a refined grid")
    common(conv)
    return p


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    threads = getattr(args, "threads", None) or _default_threads()
    try:
        if args.verb == "validate-config":
            load_config(args.config)
            print(f"{args.config}: ok")
            return EXIT_OK
        if args.verb == "figure":
            manifest = reproduce_figure(args.figure, args.out, threads, args.allow_expensive)
            print(f"wrote {len(manifest.outputs)} files to {args.out}")
            return EXIT_OK
        cfg = load_config(args.config)
        if args.allow_expensive:
            cfg = replace(cfg, allow_expensive=True)
        if args.verb == "run":
            manifest = run_scenario(cfg, args.out, threads)
            for note in manifest.notes:
                print("note:", note)
            print(f"wrote {len(manifest.outputs)} files to {args.out}")
            return EXIT_OK
        result = convergence_check(cfg, threads)
        args.out.mkdir(parents=True, exist_ok=True)
        (args.out / "convergence.json").write_text(json.dumps(result, indent=2, sort_keys=True) + "\n")
        print(json.dumps({k: result[k] for k in ("hhg_max_relative_change", "qshhg_max_relative_change",
                                                  "passed")}))
        return EXIT_OK if result["passed"] else EXIT_NONCONVERGENCE
    except (UnknownFigure, ConfigValidationError, ConfigurationError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except RefusedStage as exc:
        print(f"refused: {exc}", file=sys.stderr)
        return EXIT_REFUSED


if __name__ == "__main__":
    sys.exit(main())
