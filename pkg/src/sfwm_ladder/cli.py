"""Command-line driver: ``sfwm-ladder simulate|sweep|events``.

Exit codes: 0 success, 2 configuration error, 3 numerical failure, 1 any
other simulator error.
"""

from __future__ import annotations

import argparse
import json
import sys

from .config import PRESETS, load_config
from .errors import ConfigError, NumericalError, SFWMError
from .sweeps import PARAMETERS, SweepSpec, run_events, run_scenario, run_sweep_files

EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


def _u64(text):
    value = int(text, 0)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return value


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="sfwm-ladder", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("config", help="JSON config or a run_manifest.json from an earlier run")
        p.add_argument("--out", default="out", help="output directory (default: out)")
        p.add_argument("--preset", choices=PRESETS, help="base preset under the config")
        p.add_argument("--seed", type=_u64, help="overrides the config seed")
        p.add_argument("--threads", type=int, default=None, help="worker threads")

    common(sub.add_parser("simulate", help="G2 trace, noise floor and calibrated g2"))

    sw = sub.add_parser("sweep", help="one-dimensional parameter sweep")
    common(sw)
    units = ", ".join(f"{k} [{u}]" for k, (u, _) in PARAMETERS.items())
    sw.add_argument("--param", choices=tuple(PARAMETERS), help=f"swept parameter: {units}")
    sw.add_argument("--from", dest="start", type=float)
    sw.add_argument("--to", dest="stop", type=float)
    sw.add_argument("--points", type=int)

    ev = sub.add_parser("events", help="Monte Carlo detection events and coincidence histogram")
    common(ev)
    ev.add_argument("--duration", type=float, help="simulated seconds (overrides config)")
    return ap


def _sweep_spec(args):
    given = [args.param, args.start, args.stop, args.points]
    if all(v is not None for v in given):
        return SweepSpec.linspace(args.param, args.start, args.stop, args.points)
    if any(v is not None for v in given):
        raise ConfigError("--param, --from, --to and --points go together")
    # re-running a sweep manifest: take the recorded grid
    with open(args.config, encoding="utf-8") as fh:
        recorded = json.load(fh).get("sweep")
    if not recorded:
        raise ConfigError("sweep needs --param, --from, --to and --points")
    return SweepSpec(recorded["param"], tuple(recorded["values"]))


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        scn = load_config(args.config, preset=args.preset, seed=args.seed)
        if args.command == "simulate":
            summary = run_scenario(scn, args.out)
            print(f"g2 peak {summary['g2_zero']:.4g} at {summary['tau_peak_ns']:.3f} ns, "
                  f"B = {summary['B']:.4g}; wrote {args.out}")
            for w in summary["warnings"]:
                print(f"warning: {w}", file=sys.stderr)
        elif args.command == "sweep":
            try:
                spec = _sweep_spec(args)
            except ValueError as exc:
                raise ConfigError(str(exc), field="sweep") from None
            rows = run_sweep_files(spec, scn, args.out, threads=args.threads)
            print(f"{len(rows)} sweep points over {spec.parameter}; wrote {args.out}")
        else:
            summary = run_events(scn, args.out, duration=args.duration, threads=args.threads)
            line = f"S1 {summary['S1']:.1f}/s, S2 {summary['S2']:.1f}/s"
            if "R" in summary:
                line += f", R = {summary['R']:.3g} +- {summary['sigma_R']:.2g}"
            print(f"{line}; wrote {args.out}")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except SFWMError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
