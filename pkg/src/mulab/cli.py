"""labctl: command-line front end.

Subcommands: sieve, sum, entropy, pieces, dirichlet, correlate, experiment.
Exit codes: 0 success, 2 usage, 3 I/O, 4 precision/resource, 5 internal.
All flags are long-form; a `--config` file (one `key = value` per line,
strictly validated against the command's flags) supplies defaults that
explicit flags override.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .errors import (
    CacheFormatError,
    InvariantError,
    ParseError,
    PrecisionError,
    ResourceBudgetError,
)
from .arrangements import (
    count_report,
    load_arrangement_csv,
    load_arrangement_json,
)
from .experiments import PRESETS, run_preset, write_json
from .phases import parse_phase, parse_real_token
from .phase_sums import (
    ap_correlation,
    dirichlet_approx,
    phase_table,
    residue_masked,
    shift_self_correlation,
    unit_weights,
    weighted_average,
    weights_from_table,
)
from .sieves import (
    load_cache,
    mertens,
    save_cache,
    sieve_liouville,
    sieve_mobius,
    sieve_phi,
)
from .symbolic_blocks import (
    entropy_curve,
    indicator_set,
    load_symbols,
    write_entropy_csv,
)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_IO = 3
EXIT_PRECISION = 4
EXIT_INTERNAL = 5


def _load_config(path: str, allowed: set[str]) -> dict[str, str]:
    values: dict[str, str] = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ParseError(f"{path}:{lineno}: expected 'key = value'")
        key, _, value = line.partition("=")
        key = key.strip().replace("-", "_")
        if key not in allowed:
            raise ParseError(
                f"{path}:{lineno}: unknown key {key!r}; allowed: "
                + ", ".join(sorted(allowed))
            )
        values[key] = value.strip()
    return values


def _apply_config(args: argparse.Namespace, parser_keys: set[str]) -> None:
    if not getattr(args, "config", None):
        return
    values = _load_config(args.config, parser_keys)
    for key, text in values.items():
        if getattr(args, key, None) in (None, False):
            current = getattr(args, key, None)
            if isinstance(current, bool):
                setattr(args, key, text.lower() in ("1", "true", "yes"))
            else:
                setattr(args, key, text)


def _resolve_weights(spec: str, needed: int):
    """'path.bin' | 'mu:N' | 'lambda:N' | 'one:N', optionally '...%q,a' mask."""
    mask = None
    if "%" in spec:
        spec, _, mask_text = spec.partition("%")
        try:
            q_text, a_text = mask_text.split(",")
            mask = (int(q_text), int(a_text))
        except ValueError:
            raise ParseError(
                f"bad residue mask {mask_text!r}; expected '%q,a'"
            ) from None
    kind, _, arg = spec.partition(":")
    if kind in ("mu", "lambda", "one") and arg:
        n = int(arg)
        if kind == "one":
            w = unit_weights(n)
        elif kind == "mu":
            w = weights_from_table(sieve_mobius(n))
        else:
            w = weights_from_table(sieve_liouville(n))
    else:
        w = weights_from_table(load_cache(spec))
    if w.n_max < needed:
        raise ParseError(
            f"weights {spec!r} cover n <= {w.n_max}, need {needed}"
        )
    if mask is not None:
        w = residue_masked(w, *mask)
    return w


# ---------------------------------------------------------------------------
# subcommands


def _cmd_sieve(args: argparse.Namespace) -> int:
    if args.n < 1:
        raise ParseError("--n must be >= 1")
    table = (sieve_liouville(args.n, segment_size=args.segment_size)
             if args.fn == "lambda"
             else sieve_mobius(args.n, segment_size=args.segment_size))
    save_cache(table, args.out)
    size = Path(args.out).stat().st_size
    print(f"{args.fn} table on [1, {args.n}] -> {args.out}")
    print(f"  bytes={size} crc32={table.checksum:08x} "
          f"M({args.n})={mertens(table, args.n)}")
    if args.phi_out:
        import numpy as np

        phi = sieve_phi(args.n)
        np.save(args.phi_out, phi.values)
        print(f"  phi values -> {args.phi_out}")
    return EXIT_OK


def _cmd_sum(args: argparse.Namespace) -> int:
    phase = parse_phase(args.phase)
    weights = _resolve_weights(args.weights, args.n)
    report = weighted_average(weights, phase, args.n, args.checkpoints)
    last = report.rows[-1]
    print(f"average over [1, {args.n}] of {weights.label} * e({report.phase}):")
    print(f"  {last.real:+.6e} {last.imag:+.6e}i  |.|={last.modulus:.6e}")
    if args.out_csv:
        report.write_csv(args.out_csv)
        print(f"  checkpoints -> {args.out_csv}")
    if args.out_json:
        report.write_json(args.out_json)
        print(f"  metadata -> {args.out_json}")
    return EXIT_OK


def _cmd_entropy(args: argparse.Namespace) -> int:
    if args.seq:
        seq = load_symbols(args.seq)
        label = args.seq
    elif args.p1 and args.p2:
        if not args.length:
            raise ParseError("--length is required with --p1/--p2")
        seq, report = indicator_set(
            parse_phase(args.p1), parse_phase(args.p2), args.length
        )
        label = f"1_{{{args.p1} < {args.p2}}}"
        if report.tie_count:
            print(f"  note: {report.tie_count} near-ties flagged")
    else:
        raise ParseError("need --seq or both --p1 and --p2")
    rows = entropy_curve(seq, args.jmax, args.threshold, args.tail_start)
    print(f"finite-prefix block counts for {label} (P={len(seq)}):")
    for r in rows:
        print(f"  J={r.J:3d} all={r.count_all:8d} reg={r.count_regular:8d} "
              f"eff={r.count_effective:8d} regeff={r.count_reg_effective:8d} "
              f"log|B_J|/J={r.entropy_estimate:.5f}")
    if args.out_csv:
        write_entropy_csv(rows, args.out_csv)
        print(f"  rows -> {args.out_csv}")
    if args.out_json:
        write_json(Path(args.out_json), {
            "schema_version": 1,
            "sequence": label,
            "prefix_len": len(seq),
            "threshold": args.threshold,
            "tail_start": args.tail_start,
            "note": "finite-prefix estimates of a limit quantity",
            "rows": [r.__dict__ for r in rows],
        })
        print(f"  metadata -> {args.out_json}")
    return EXIT_OK


def _cmd_pieces(args: argparse.Namespace) -> int:
    path = Path(args.arrangement)
    arr = (load_arrangement_json(path) if path.suffix == ".json"
           else load_arrangement_csv(path))
    report = count_report(arr)
    text = json.dumps(report, indent=2, sort_keys=True)
    print(text)
    if args.out_json:
        write_json(Path(args.out_json), {"schema_version": 1, **report})
    return EXIT_OK


def _cmd_dirichlet(args: argparse.Namespace) -> int:
    thetas = [
        parse_real_token(t, f" at position {i} of --theta")
        for i, t in enumerate(args.theta.split(","))
    ]
    wit = dirichlet_approx(thetas, args.q, args.budget)
    print(f"t={wit.t} nearest={wit.nearest} max_err={wit.max_err:.10f} "
          f"(<= 1/{args.q}{'' if wit.strict else ', boundary case'})")
    return EXIT_OK


def _cmd_correlate(args: argparse.Namespace) -> int:
    phase = parse_phase(args.phase)
    if args.mode == "ap":
        weights = _resolve_weights(args.weights, args.n + args.h * args.s)
        rep = ap_correlation(weights, phase, args.s, args.h, args.n)
        print(f"progression correlation s={args.s} h={args.h} N={args.n}:")
        print(f"  value={rep.value:.6e} comparison={rep.comparison:.6e}")
        doc = {"mode": "ap", "phase": phase.describe(),
               "weights": weights.label, "s": args.s, "h": args.h,
               "n": args.n, "value": rep.value,
               "comparison": rep.comparison}
    else:
        table = phase_table(phase, args.n + args.shift)
        v = shift_self_correlation(table, args.shift, args.n)
        print(f"shift self-correlation shift={args.shift} N={args.n}: "
              f"{v:.6e}")
        doc = {"mode": "shift", "phase": phase.describe(),
               "shift": args.shift, "n": args.n, "value": v}
    if args.out_json:
        write_json(Path(args.out_json), {"schema_version": 1, **doc})
        print(f"  metadata -> {args.out_json}")
    return EXIT_OK


def _coerce_scalar(raw: str) -> object:
    try:
        return int(raw)
    except ValueError:
        try:
            return float(raw)
        except ValueError:
            return raw


def _parse_override(text: str) -> tuple[str, object]:
    if "=" not in text:
        raise ParseError(f"--set expects key=value, got {text!r}")
    key, _, raw = text.partition("=")
    raw = raw.strip()
    if "," in raw:
        return key.strip(), tuple(_coerce_scalar(v) for v in raw.split(","))
    return key.strip(), _coerce_scalar(raw)


def _cmd_experiment(args: argparse.Namespace) -> int:
    overrides: dict[str, object] = {}
    for text in args.set or []:
        key, value = _parse_override(text)
        overrides[key] = value
    for flag in ("n", "m", "k", "trials", "jmax", "p", "x", "h"):
        v = getattr(args, flag, None)
        if v is not None:
            overrides[flag] = v
    manifest = run_preset(args.preset, args.out_dir, args.seed, overrides)
    results = manifest["results"]
    print(f"experiment {args.preset}: "
          f"{'PASS' if results.get('passed', True) else 'FAIL'}")
    for key, value in results.items():
        if key == "passed":
            continue
        text = json.dumps(value) if isinstance(value, (list, dict)) else value
        print(f"  {key} = {text}")
    if args.out_dir:
        print(f"  bundle -> {args.out_dir}/manifest.json")
    return EXIT_OK if results.get("passed", True) else EXIT_INTERNAL


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="labctl",
        description="experiments on weighted exponential sums, block "
                    "entropy, and hyperplane pieces",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    required = {
        "sieve": ("n", "out"),
        "sum": ("weights", "phase", "n"),
        "entropy": ("jmax",),
        "pieces": ("arrangement",),
        "dirichlet": ("theta", "q"),
        "correlate": ("mode", "phase", "n"),
        "experiment": (),
    }
    parser.set_defaults(_required=required)

    p = sub.add_parser("sieve", help="build and persist a packed value table")
    p.add_argument("--n", type=int)
    p.add_argument("--out")
    p.add_argument("--fn", choices=("mu", "lambda"), default="mu")
    p.add_argument("--segment-size", type=int, default=1 << 20)
    p.add_argument("--phi-out", default=None)
    p.set_defaults(run=_cmd_sieve)

    p = sub.add_parser("sum", help="weighted average of a phase")
    p.add_argument("--weights",
                   help="cache path or mu:N / lambda:N / one:N, "
                        "optionally %%q,a residue mask")
    p.add_argument("--phase")
    p.add_argument("--n", type=int)
    p.add_argument("--checkpoints", type=int, default=20)
    p.add_argument("--out-csv", default=None)
    p.add_argument("--out-json", default=None)
    p.set_defaults(run=_cmd_sum)

    p = sub.add_parser("entropy", help="block families of a symbol sequence")
    p.add_argument("--seq", default=None, help="JSON header of a raw sequence")
    p.add_argument("--p1", default=None, help="phase for 1_{ {p1} < {p2} }")
    p.add_argument("--p2", default=None)
    p.add_argument("--length", type=int, default=None)
    p.add_argument("--jmax", type=int)
    p.add_argument("--threshold", type=int, default=2)
    p.add_argument("--tail-start", type=int, default=0)
    p.add_argument("--out-csv", default=None)
    p.add_argument("--out-json", default=None)
    p.set_defaults(run=_cmd_entropy)

    p = sub.add_parser("pieces", help="count pieces of an arrangement")
    p.add_argument("--arrangement")
    p.add_argument("--out-json", default=None)
    p.set_defaults(run=_cmd_pieces)

    p = sub.add_parser("dirichlet", help="simultaneous approximation witness")
    p.add_argument("--theta")
    p.add_argument("--q", type=int)
    p.add_argument("--budget", type=int, default=10 ** 7)
    p.set_defaults(run=_cmd_dirichlet)

    p = sub.add_parser("correlate", help="correlation functionals")
    p.add_argument("--mode", choices=("ap", "shift"))
    p.add_argument("--phase")
    p.add_argument("--weights", default=None)
    p.add_argument("--s", type=int, default=1)
    p.add_argument("--h", type=int, default=10)
    p.add_argument("--shift", type=int, default=1)
    p.add_argument("--n", type=int)
    p.add_argument("--out-json", default=None)
    p.set_defaults(run=_cmd_correlate)

    p = sub.add_parser("experiment", help="run a named preset")
    p.add_argument("preset", choices=sorted(PRESETS))
    p.add_argument("--out-dir", default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--set", action="append", metavar="KEY=VALUE")
    for flag in ("n", "m", "k", "trials", "jmax", "p", "x", "h"):
        p.add_argument(f"--{flag}", type=int, default=None)
    p.set_defaults(run=_cmd_experiment)

    for sp in sub.choices.values():
        sp.add_argument("--config", default=None,
                        help="key = value defaults file")
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        keys = {
            a.dest for a in parser._subparsers._group_actions[0]
            .choices[args.command]._actions
            if a.dest not in ("help", "config")
        }
        _apply_config(args, keys)
        for dest in args._required[args.command]:
            if getattr(args, dest, None) is None:
                raise ParseError(
                    f"--{dest.replace('_', '-')} is required "
                    f"(flag or config file)"
                )
        for key in ("n", "q", "jmax", "length", "checkpoints", "threshold",
                    "tail_start", "segment_size", "budget", "s", "h",
                    "shift", "seed", "m", "k", "trials", "p", "x"):
            v = getattr(args, key, None)
            if isinstance(v, str):
                setattr(args, key, int(v))
        return args.run(args)
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (PrecisionError, ResourceBudgetError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PRECISION
    except CacheFormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except InvariantError as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except Exception as exc:  # pragma: no cover - last resort
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
