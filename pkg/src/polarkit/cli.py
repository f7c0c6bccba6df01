"""Command-line front end.

Subcommands: construct (frozen-set file), analyze (cover census and
latency), thresholds (hard-decision constants), decode (single frame),
simulate (Monte Carlo sweep).  Codes come either from a frozen-set JSON
file or from the built-in mean-propagation construction; the two
sources are mutually exclusive.  Exit code 2 flags usage errors.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import __version__
from .codes import (
    CodeSpec,
    bits_to_hex,
    construct_frozen_set,
    crc_spec,
    load_frozen_json,
    save_frozen_json,
)
from .gaussian import build_ta_config, compute_means, eligibility_bound, min_c
from .sc import decode_sc
from .sim import DECODERS, StopRule, emit_report, run_sweep
from .srfsc import decode_srfsc
from .ta import decode_multistage, decode_ta_srfsc
from .tree import identify_sr_cover, node_census, schedule_time_steps, semi_parallel_cycles

__all__ = ["main", "parse_ebno_grid"]


def parse_ebno_grid(text: str) -> list[float]:
    """`start:step:stop` (inclusive) or a single value."""
    parts = text.split(":")
    if len(parts) == 1:
        return [float(parts[0])]
    if len(parts) != 3:
        raise ValueError("grid must be 'start:step:stop' or a single value")
    start, step, stop = (float(p) for p in parts)
    if step <= 0:
        raise ValueError("grid step must be positive")
    if stop < start:
        raise ValueError("grid stop must not precede start")
    out = []
    k = 0
    while True:
        value = start + k * step
        if value > stop + 1e-9:
            break
        out.append(round(value, 12))
        k += 1
    return out


def _add_code_source(p: argparse.ArgumentParser) -> None:
    p.add_argument("--code", help="frozen-set JSON file")
    p.add_argument("--n", type=int, help="log2 of the code length")
    p.add_argument("--k", type=int, help="input bits carrying data (CRC included)")
    p.add_argument("--sigma", type=float, default=1.0,
                   help="design noise deviation for construction (default 1.0)")
    p.add_argument("--crc", type=int, choices=(6, 11, 16),
                   help="append a CRC of this length inside k")


def _build_spec(args, parser: argparse.ArgumentParser) -> CodeSpec:
    crc = crc_spec(args.crc) if args.crc else None
    if args.code:
        if args.n is not None or args.k is not None:
            parser.error("--code conflicts with --n/--k")
        try:
            n_bits, d = load_frozen_json(args.code)
        except (OSError, ValueError, KeyError) as exc:
            parser.error(f"cannot load {args.code}: {exc}")
        n = n_bits.bit_length() - 1
        return CodeSpec(n=n, K=int(d.sum()), d=d, crc=crc, design_sigma=args.sigma)
    if args.n is None or args.k is None:
        parser.error("either --code or both --n and --k are required")
    return construct_frozen_set(args.n, args.k, args.sigma, crc=crc)


def _check_epsilon(args, parser: argparse.ArgumentParser) -> None:
    needs = args.decoder in ("ta", "multistage")
    if needs and args.epsilon is None:
        parser.error(f"--decoder {args.decoder} requires --epsilon")
    if not needs and args.epsilon is not None:
        parser.error(f"--decoder {args.decoder} does not accept --epsilon")
    if needs and not 0.0 < args.epsilon < 1.0:
        parser.error("--epsilon must lie in (0, 1)")


def _write_text(path: str | None, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    tmp = f"{path}.tmp"
    with open(tmp, "w") as fh:
        fh.write(text)
    os.replace(tmp, path)


def _read_llr_file(path: str) -> np.ndarray:
    values = []
    with open(path) as fh:
        for line in fh:
            token = line.strip()
            if not token:
                continue
            try:
                values.append(float(token))
            except ValueError:
                values.append(float.fromhex(token))
    return np.array(values, dtype=np.float64)


def _cmd_construct(args, parser) -> int:
    spec = _build_spec(args, parser)
    save_frozen_json(spec, args.out)
    return 0


def _cmd_analyze(args, parser) -> int:
    spec = _build_spec(args, parser)
    cover = identify_sr_cover(spec)
    census = node_census(spec, cover)
    sc_rep = schedule_time_steps(spec, None, "sc", pe=args.pe)
    fast_rep = schedule_time_steps(spec, cover, "srfsc", pe=args.pe)
    payload = {
        "N": spec.N,
        "K": spec.K,
        "sr_total": census.sr_total,
        "general_total": census.general_total,
        "by_num_sequences": {str(k): v for k, v in census.by_num_sequences.items()},
        "sr_levels": {str(k): v for k, v in census.sr_levels.items()},
        "sc_time_steps": sc_rep.time_steps,
        "srfsc_time_steps": fast_rep.time_steps,
        "sc_cycles": sc_rep.cycles,
        "srfsc_cycles": semi_parallel_cycles(spec, cover, args.pe, overhead=args.overhead),
        "pe": args.pe,
    }
    _write_text(args.out, json.dumps(payload, indent=2) + "\n")
    if args.per_node:
        lines = ["level,index,kind,steps"]
        for node, kind, steps in fast_rep.per_node:
            lines.append(f"{node.j},{node.i},{kind},{steps}")
        _write_text(args.per_node, "\n".join(lines) + "\n")
    return 0


def _cmd_thresholds(args, parser) -> int:
    if not 0.0 < args.epsilon < 1.0:
        parser.error("--epsilon must lie in (0, 1)")
    c = args.c if args.c is not None else min_c(args.epsilon, args.n)
    bound = eligibility_bound(args.epsilon, c, args.n)
    lines = [f"c={c:g}", f"m_bound={bound:.6f}"]
    if args.sigma is not None:
        table = compute_means(args.n, args.sigma)
        cfg = build_ta_config(table, args.epsilon, c)
        lines.append(f"eligible_nodes={len(cfg.thresholds)}")
        for level, count in sorted(cfg.eligible_by_level().items()):
            lines.append(f"eligible_level_{level}={count}")
    _write_text(args.out, "\n".join(lines) + "\n")
    return 0


def _cmd_decode(args, parser) -> int:
    _check_epsilon(args, parser)
    spec = _build_spec(args, parser)
    try:
        llr = _read_llr_file(args.llr_file)
    except (OSError, ValueError) as exc:
        parser.error(f"cannot read {args.llr_file}: {exc}")
    if llr.size != spec.N:
        parser.error(f"LLR file holds {llr.size} values, expected {spec.N}")
    cover = identify_sr_cover(spec)
    extra = {}
    if args.decoder == "sc":
        u_hat, rep = decode_sc(spec, llr, mode=args.mode, pe=args.pe)
        steps, cycles = rep.time_steps, rep.cycles
    elif args.decoder == "srfsc":
        u_hat, rep = decode_srfsc(spec, cover, llr, mode=args.mode, pe=args.pe)
        steps, cycles = rep.time_steps, rep.cycles
    else:
        table = compute_means(spec.n, args.sigma)
        cfg = build_ta_config(table, args.epsilon)
        if args.decoder == "ta":
            out = decode_ta_srfsc(spec, cover, cfg, llr, mode=args.mode, pe=args.pe)
            u_hat, steps, cycles = out.u_hat, out.time_steps, out.cycles
            extra = {
                "hard_decided": out.hard_decided_count,
                "comparisons": out.comparisons,
                "crc_pass": out.crc_pass,
            }
        else:
            out = decode_multistage(spec, cover, cfg, llr, mode=args.mode, pe=args.pe)
            u_hat, steps, cycles = out.u_hat, out.time_steps, out.cycles
            extra = {"attempts": out.attempts, "crc_pass": out.crc_pass}
    payload = {
        "u_hat_hex": bits_to_hex(u_hat),
        "info_bits_hex": bits_to_hex(u_hat[spec.info_positions]),
        "time_steps": steps,
        "cycles": cycles,
    }
    payload.update(extra)
    _write_text(args.out, json.dumps(payload, indent=2) + "\n")
    return 0


def _cmd_simulate(args, parser) -> int:
    _check_epsilon(args, parser)
    if args.decoder == "multistage" and args.crc is None:
        parser.error("--decoder multistage requires --crc")
    spec = _build_spec(args, parser)
    try:
        grid = parse_ebno_grid(args.ebno)
    except ValueError as exc:
        parser.error(str(exc))
    stop = StopRule(min_errors=args.stop_errors, max_frames=args.max_frames)
    points = run_sweep(
        spec,
        args.decoder,
        grid,
        stop=stop,
        seed=args.seed,
        mode=args.mode,
        pe=args.pe,
        epsilon=args.epsilon,
        c=args.c,
        workers=args.workers,
        batch=args.batch,
    )
    emit_report(points, args.out, format=args.format)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="polarkit", description="polar-code decoding toolkit"
    )
    parser.add_argument("--version", action="version", version=f"polarkit {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("construct", help="build and save a frozen set")
    _add_code_source(p)
    p.add_argument("--out", required=True, help="output JSON path")
    p.set_defaults(func=_cmd_construct)

    p = sub.add_parser("analyze", help="cover census and latency models")
    _add_code_source(p)
    p.add_argument("--pe", type=int, default=64, help="processing elements (default 64)")
    p.add_argument("--overhead", type=int, default=0,
                   help="pipeline cycles charged per cover subtree")
    p.add_argument("--out", default=None, help="output path (default stdout)")
    p.add_argument("--per-node", default=None, help="optional per-node CSV path")
    p.set_defaults(func=_cmd_analyze)

    p = sub.add_parser("thresholds", help="hard-decision constants")
    p.add_argument("--epsilon", type=float, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--c", type=float, default=None, help="override the grid-derived constant")
    p.add_argument("--sigma", type=float, default=None,
                   help="also list eligible nodes for this noise level")
    p.add_argument("--out", default=None, help="output path (default stdout)")
    p.set_defaults(func=_cmd_thresholds)

    p = sub.add_parser("decode", help="decode one LLR frame from a file")
    _add_code_source(p)
    p.add_argument("--decoder", choices=DECODERS, default="sc")
    p.add_argument("--llr-file", required=True, help="one LLR per line (decimal or hex float)")
    p.add_argument("--mode", choices=("minsum", "exact"), default="minsum")
    p.add_argument("--pe", type=int, default=64)
    p.add_argument("--epsilon", type=float, default=None)
    p.add_argument("--out", default=None, help="output path (default stdout)")
    p.set_defaults(func=_cmd_decode)

    p = sub.add_parser("simulate", help="Monte Carlo sweep")
    _add_code_source(p)
    p.add_argument("--decoder", choices=DECODERS, required=True)
    p.add_argument("--ebno", required=True, help="start:step:stop or a single value, in dB")
    p.add_argument("--epsilon", type=float, default=None)
    p.add_argument("--c", type=float, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--mode", choices=("minsum", "exact"), default="minsum")
    p.add_argument("--pe", type=int, default=64)
    p.add_argument("--stop-errors", type=int, default=100)
    p.add_argument("--max-frames", type=int, default=10**6)
    p.add_argument("--batch", type=int, default=256)
    p.add_argument("--workers", type=int, default=None,
                   help="worker processes (default: POLARKIT_WORKERS or 1)")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--out", required=True, help="report path")
    p.set_defaults(func=_cmd_simulate)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args, parser)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
