"""Command-line front end.

Subcommands: extract-pixels, match, eval, synth, plot. Every run with the
same flags and inputs writes byte-identical files; timing only goes to
stdout.
"""

from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

from . import backend
from .accel import AccelParams, match_accelerated
from .descriptor import (
    DescriptorSet,
    PixelDescriptorConfig,
    load_descriptor_file,
    pixel_descriptor,
    read_pgm,
    save_descriptor_file,
)
from .errors import SeqLcdError
from .evaluate import (
    GroundTruth,
    emit_plot,
    pr_curve,
    read_curve_csv,
    render_pr_svg,
)
from .online import OnlineParams, match_online
from .seqmatch import MatcherParams, MatchResult, match_all
from .synth import SynthConfig, write_dataset


def _add_match_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--ref", required=True, help="reference descriptor file")
    p.add_argument("--query", required=True, help="query descriptor file")
    p.add_argument("--out", required=True, help="match result CSV")
    p.add_argument("--mode", choices=["full", "accel", "online"], default="full")
    p.add_argument("--ds", type=int, required=True, help="sequence length (even)")
    p.add_argument("--v-min", type=float, default=0.8)
    p.add_argument("--v-max", type=float, default=1.2)
    p.add_argument("--v-step", type=float, default=0.1)
    p.add_argument("--r-window", type=int, default=10)
    p.add_argument("--same-traversal", action="store_true",
                   help="exclude recent templates around the query frame")
    p.add_argument("--k", type=int, default=10, help="matching ranges (accel mode)")
    p.add_argument("--num", type=int, default=None,
                   help="range width; default 6 for accel, 16 for online")
    p.add_argument("--l-reinit", type=int, default=450)
    p.add_argument("--initial-k", type=int, default=30, help="starting K (online mode)")
    p.add_argument("--t-window", type=int, default=10)
    p.add_argument("--cd-low", type=float, default=0.9)
    p.add_argument("--cd-high", type=float, default=1.1)
    p.add_argument("--k-trace", default=None, help="write the online K trace CSV here")
    p.add_argument("--instrumentation", default=None, help="write per-frame work counters here")
    p.add_argument("--threads", type=int, default=None,
                   help="worker cap for the full sweep (default SEQLCD_THREADS or 1)")


def _cmd_extract_pixels(args) -> int:
    images = sorted(Path(args.images).glob("*.pgm"))
    if not images:
        print(f"error: no .pgm files in {args.images}", file=sys.stderr)
        return 2
    config = PixelDescriptorConfig(args.width, args.height, args.patch)
    descriptors = []
    for path in images:
        descriptors.append(pixel_descriptor(read_pgm(path), config))
    dset = DescriptorSet.from_descriptors(
        descriptors, source_tag="pixel-patch", frame_names=[p.name for p in images]
    )
    save_descriptor_file(dset, args.out)
    print(f"extracted {dset.count} descriptors of dim {dset.dim} -> {args.out}")
    return 0


def _cmd_match(args) -> int:
    reference = load_descriptor_file(args.ref)
    query = load_descriptor_file(args.query)
    base = MatcherParams(
        ds=args.ds,
        v_min=args.v_min,
        v_max=args.v_max,
        v_step=args.v_step,
        r_window=args.r_window,
        same_traversal=args.same_traversal,
    )
    threads = args.threads if args.threads is not None else backend.default_threads()
    want_instr = True
    trace = None
    t0 = time.perf_counter()
    if args.mode == "full":
        result = match_all(reference, query, base, threads=threads, instrument=want_instr)
    elif args.mode == "accel":
        num = args.num if args.num is not None else 6
        params = AccelParams(base=base, k=args.k, num=num, l_reinit=args.l_reinit)
        result = match_accelerated(reference, query, params, instrument=want_instr)
    else:
        num = args.num if args.num is not None else 16
        params = OnlineParams(
            initial_k=args.initial_k,
            num=num,
            t_window=args.t_window,
            cd_low=args.cd_low,
            cd_high=args.cd_high,
        )
        result, trace = match_online(
            reference, query, base, params, l_reinit=args.l_reinit, instrument=want_instr
        )
    elapsed = time.perf_counter() - t0

    result.to_csv(args.out)
    if trace is not None and args.k_trace:
        trace.to_csv(args.k_trace)
    if args.instrumentation and result.instrumentation is not None:
        result.instrumentation.to_csv(args.instrumentation)

    instr = result.instrumentation
    kname = backend.get_kernels().BACKEND_NAME
    print(f"matched {len(result)} frames in {elapsed:.3f}s ({args.mode}, {kname} kernels)")
    if instr is not None:
        print(
            f"work: {instr.total_evals} sequence evaluations, "
            f"{instr.total_entries} matrix entries"
        )
    return 0


def _cmd_eval(args) -> int:
    result = MatchResult.from_csv(args.matches)
    if args.gt_identity:
        gt = GroundTruth.identity(result.query_indices, tolerance=args.tolerance)
    elif args.gt:
        gt = GroundTruth.from_csv(args.gt, tolerance=args.tolerance)
    else:
        print("error: provide --gt FILE or --gt-identity", file=sys.stderr)
        return 2
    report = pr_curve(result, gt)
    csv_path, svg_path = emit_plot(report, args.out_prefix)
    print(f"curve: {csv_path} plot: {svg_path}")
    print(f"max recall at 100% precision: {report.max_recall_at_full_precision:.4f}")
    if args.min_recall is not None and report.max_recall_at_full_precision < args.min_recall:
        print(
            f"FAIL: recall {report.max_recall_at_full_precision:.4f} "
            f"below floor {args.min_recall:.4f}",
            file=sys.stderr,
        )
        return 1
    return 0


def _cmd_synth(args) -> int:
    config = SynthConfig(
        n_frames=args.n_frames,
        dim=args.dim,
        condition_noise=args.condition_noise,
        viewpoint_shift=args.viewpoint_shift,
        speed_ratio=args.speed_ratio,
        seed=args.seed,
        step_angle=args.step_angle,
    )
    ref_path, query_path, gt_path = write_dataset(config, args.out_dir)
    print(f"wrote {ref_path} {query_path} {gt_path}")
    return 0


def _cmd_plot(args) -> int:
    series = []
    for spec in args.curve:
        if ":" in spec:
            path, label = spec.rsplit(":", 1)
        else:
            path, label = spec, Path(spec).stem
        recalls, precisions = read_curve_csv(path)
        series.append((label, recalls, precisions))
    render_pr_svg(series, args.out)
    print(f"plot: {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="seqlcd",
        description="Sequence-matching loop closure detection over descriptor files",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("extract-pixels", help="pixel-patch descriptors from PGM images")
    p.add_argument("--images", required=True, help="directory of .pgm files (lexicographic order)")
    p.add_argument("--out", required=True)
    p.add_argument("--width", type=int, default=64)
    p.add_argument("--height", type=int, default=32)
    p.add_argument("--patch", type=int, default=8)
    p.set_defaults(func=_cmd_extract_pixels)

    p = sub.add_parser("match", help="match a query traversal against a reference")
    _add_match_flags(p)
    p.set_defaults(func=_cmd_match)

    p = sub.add_parser("eval", help="precision/recall against ground truth")
    p.add_argument("--matches", required=True, help="match result CSV")
    p.add_argument("--gt", default=None, help="ground truth CSV (query_index,ref_index)")
    p.add_argument("--gt-identity", action="store_true",
                   help="aligned datasets: frame i matches frame i")
    p.add_argument("--tolerance", type=int, default=2)
    p.add_argument("--out-prefix", required=True)
    p.add_argument("--min-recall", type=float, default=None,
                   help="exit 1 if max recall at 100%% precision falls below this")
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("synth", help="generate a synthetic descriptor pair + ground truth")
    p.add_argument("--n-frames", type=int, required=True)
    p.add_argument("--dim", type=int, required=True)
    p.add_argument("--condition-noise", type=float, default=0.0)
    p.add_argument("--viewpoint-shift", type=float, default=0.0)
    p.add_argument("--speed-ratio", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--step-angle", type=float, default=0.05)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=_cmd_synth)

    p = sub.add_parser("plot", help="overlay stored PR curves into one SVG")
    p.add_argument("--curve", action="append", required=True,
                   help="curve CSV, optionally PATH:LABEL (repeatable)")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_plot)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except SeqLcdError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
