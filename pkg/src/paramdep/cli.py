"""Command-line entry point: ``paramdep synthesize | verify | experiment``.

Exit codes: 0 success, 1 claim failure, 2 usage error, 3 I/O or corrupt
file, 4 region search infeasible.
"""
import argparse
import json
import math
import sys

import numpy as np

from .claims import verify_model
from .kernels import CHSH_ANGLES, SettingMap
from .locality import chsh_from_table
from .outcomes import build_outcome_functions, load_model, model_correlations, save_model
from .regions import SETTING_PAIRS, TIERS, Infeasible, synthesize_regions
from .stations import (
    CLOCK_MODES,
    CYCLIC,
    bit_error_rate,
    blind_decode,
    estimate_correlation,
    random_schedule,
    run_experiment,
    signal_decode,
    write_records,
)

EXIT_OK = 0
EXIT_CLAIM = 1
EXIT_USAGE = 2
EXIT_IO = 3
EXIT_INFEASIBLE = 4


def _angles(text):
    try:
        values = [float(s) for s in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"angles must be numbers: {text!r}")
    if len(values) != 4 or not all(math.isfinite(v) for v in values):
        raise argparse.ArgumentTypeError("expected four finite angles a0,a1,b0,b1 in degrees")
    return tuple(values)


def _positive(text):
    try:
        n = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}")
    if n < 1:
        raise argparse.ArgumentTypeError("run count must be at least 1")
    return n


def _seed(text):
    n = int(text)
    if n < 0:
        raise argparse.ArgumentTypeError("seed must be nonnegative")
    return n


def _output_format(args):
    if args.structured:
        return "structured"
    if args.csv:
        return "csv"
    return "table"


def _add_format_flags(p):
    p.add_argument("--csv", action="store_true", help="comma-delimited output")
    p.add_argument("--structured", "--json-like-structured-output", dest="structured",
                   action="store_true", help="JSON output")


def build_parser():
    parser = argparse.ArgumentParser(prog="paramdep", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synthesize", help="search for a region config")
    p.add_argument("--tier", choices=TIERS, default="PER-M")
    p.add_argument("--output", "-o", help="config file to write (default: stdout)")
    p.add_argument("--angles", type=_angles, default=CHSH_ANGLES,
                   help="a0,a1,b0,b1 in degrees for the outcome thresholds")
    p.add_argument("--no-identifiability", action="store_true")
    p.add_argument("--no-uniformity", action="store_true")

    p = sub.add_parser("verify", help="check every claim against a config")
    p.add_argument("--config", required=True)
    p.add_argument("--angles", type=_angles, default=CHSH_ANGLES)
    p.add_argument("--seed", type=_seed, default=0)
    p.add_argument("--runs", type=_positive, default=10_000)
    _add_format_flags(p)

    p = sub.add_parser("experiment", help="simulate runs and report correlations and signalling")
    p.add_argument("--config", help="config file (default: synthesize PER-M)")
    p.add_argument("--runs", type=_positive, default=1_000_000)
    p.add_argument("--seed", type=_seed, default=0)
    p.add_argument("--angles", type=_angles, default=None,
                   help="a0,a1,b0,b1 in degrees (default: thresholds from the config, "
                        "else 0,90,45,135)")
    p.add_argument("--clock", choices=CLOCK_MODES, default=CYCLIC)
    p.add_argument("--hide-m", action="store_true", help="decode without the clock index")
    p.add_argument("--records", help="write the run records to this file")
    _add_format_flags(p)
    return parser


def _emit_rows(header, rows, fmt, out):
    if fmt == "csv":
        out.write(",".join(header) + "\n")
        for r in rows:
            out.write(",".join(str(x) for x in r) + "\n")
        return
    widths = [max(len(str(x)) for x in col) for col in zip(header, *rows)]
    out.write("  ".join(h.ljust(w) for h, w in zip(header, widths)) + "\n")
    for r in rows:
        out.write("  ".join(str(x).ljust(w) for x, w in zip(r, widths)) + "\n")


def cmd_synthesize(args, out):
    try:
        rc = synthesize_regions(
            args.tier,
            identifiability=not args.no_identifiability,
            uniformity=not args.no_uniformity,
        )
    except Infeasible as exc:
        text = exc.certificate.to_text()
        if args.output:
            with open(args.output, "w") as fh:
                fh.write(text)
        out.write(text)
        return EXIT_INFEASIBLE
    fns = None
    if rc.is_valid():
        fns = build_outcome_functions(rc, SettingMap.from_angles(*args.angles))
    if args.output:
        save_model(args.output, rc, fns)
        out.write(f"wrote {args.tier} config to {args.output} ({rc.search_nodes} search nodes)\n")
    else:
        out.write(rc.to_text())
        if fns is not None:
            out.write("\n" + fns.to_text())
    return EXIT_OK


def cmd_verify(args, out):
    rc, fns = load_model(args.config)
    reports = verify_model(rc, fns, SettingMap.from_angles(*args.angles),
                           seed=args.seed, runs=args.runs)
    fmt = _output_format(args)
    if fmt == "structured":
        json.dump([r.to_dict() for r in reports], out, indent=2)
        out.write("\n")
    else:
        rows = [(r.claim, r.expected, r.observed, "PASS" if r.passed else "FAIL") for r in reports]
        _emit_rows(("claim", "expected", "observed", "result"), rows, fmt, out)
    return EXIT_OK if all(r.passed for r in reports) else EXIT_CLAIM


def cmd_experiment(args, out):
    if args.config:
        rc, fns = load_model(args.config)
    else:
        rc, fns = synthesize_regions(), None
    if fns is None or args.angles is not None:
        fns = build_outcome_functions(rc, SettingMap.from_angles(*(args.angles or CHSH_ANGLES)))
    exact = model_correlations(fns, rc)

    sched = random_schedule(args.runs, args.seed, clock=args.clock)
    rec = run_experiment(args.runs, sched, args.seed, fns, rc)
    if args.records:
        write_records(rec, args.records)

    table = np.zeros((2, 2))
    var = 0.0
    rows = []
    for a, b in SETTING_PAIRS:
        try:
            est = estimate_correlation(rec, a, b)
        except ValueError:
            rows.append((a, b, "nan", "nan", 0, f"{exact[a, b]:.12f}"))
            table[a, b] = np.nan
            continue
        table[a, b] = est.estimate
        var += est.stderr ** 2
        rows.append((a, b, f"{est.estimate:.6f}", f"{est.stderr:.6f}", est.n, f"{exact[a, b]:.12f}"))
    s = chsh_from_table(table) if np.all(np.isfinite(table)) else float("nan")
    s_exact = chsh_from_table(exact)

    view = rec.station1_view(hide_clock=args.hide_m)
    decoded = blind_decode(view, rc) if args.hide_m else signal_decode(view, rc)
    ber = bit_error_rate(decoded, rec.b)
    decoder = "blind (clock hidden)" if args.hide_m else "clock observed"

    fmt = _output_format(args)
    if fmt == "structured":
        json.dump({
            "runs": args.runs, "seed": args.seed, "targets": fns.targets.tolist(),
            "correlations": [dict(zip(("a", "b", "estimate", "stderr", "n", "exact"), r)) for r in rows],
            "chsh": s, "chsh_stderr": math.sqrt(var), "chsh_exact": s_exact,
            "decoder": decoder, "ber": ber,
        }, out, indent=2)
        out.write("\n")
        return EXIT_OK
    _emit_rows(("a", "b", "estimate", "stderr", "n", "exact"), rows, fmt, out)
    if fmt == "csv":
        out.write(f"chsh,{s},{math.sqrt(var)},{s_exact}\n")
        out.write(f"ber,{decoder},{ber}\n")
    else:
        out.write(f"\nCHSH S = {s:.6f} +/- {math.sqrt(var):.6f}   (exact {s_exact:.12f})\n")
        out.write(f"signalling BER, {decoder}: {ber:.6f}\n")
    return EXIT_OK


COMMANDS = {"synthesize": cmd_synthesize, "verify": cmd_verify, "experiment": cmd_experiment}


def main(argv=None, out=None):
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        return COMMANDS[args.command](args, out)
    except (OSError, ValueError) as exc:
        sys.stderr.write(f"paramdep: {exc}\n")
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
