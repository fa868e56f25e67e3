"""Command-line entry points: encode, decode, rdcurve, bd, synth."""

from __future__ import annotations

import argparse
import io
import json
import logging
import sys
from pathlib import Path

from .codec import SequenceHeader, decode_sequence, encode_sequence
from .errors import NlmrpError
from .io import SequenceSource, Video, load_sequence, write_y4m
from .metrics import RdCurve, bd_psnr, bd_rate, collect_rd_curve, psnr, write_csv_rows
from .nlm import DEFAULT_DM, DEFAULT_H, NlmParams
from .synthetic import SyntheticSpec, generate_synthetic

DEFAULT_QPS = "16,19,22,25,28,31,34,37,40,43"

log = logging.getLogger("nlmrp")


def resolve_source(args) -> SequenceSource:
    text = args.input
    if text.startswith("synth:"):
        spec = SyntheticSpec.parse(text[len("synth:"):])
        fields = {k: getattr(spec, k) for k in spec.__dataclass_fields__}
        return SequenceSource("synthetic", frame_count=spec.frames, fps=args.fps, synthetic=fields)
    if text.lower().endswith(".y4m"):
        return SequenceSource("y4m", path=text, frame_count=args.frames)
    if not (args.width and args.height):
        raise NlmrpError("raw input needs --width and --height")
    return SequenceSource("raw", path=text, width=args.width, height=args.height,
                          frame_count=args.frames, fps=args.fps)


def _load(args) -> Video:
    video = load_sequence(resolve_source(args))
    if args.frames is not None:
        video.frames = video.frames[:args.frames]
    return video


def _params(args) -> NlmParams:
    return NlmParams(args.dm, args.h)


def cmd_encode(args) -> int:
    video = _load(args)
    enc = encode_sequence(video.frames, args.qp, _params(args), refine=not args.no_refine, fps=video.fps)
    Path(args.output).write_bytes(enc.data)
    if args.recon:
        write_y4m(args.recon, enc.recon, fps=video.fps)
    per_frame = [
        {"psnr": round(psnr(o, r, video.crop), 6), "bits": s.bits, "refined_mbs": s.refined_mbs}
        for o, r, s in zip(video.frames, enc.recon, enc.stats)
    ]
    stats = {"total_bits": enc.total_bits, "frames": len(enc.recon), "per_frame": per_frame}
    json.dump(stats, sys.stdout, indent=2)
    sys.stdout.write("\n")
    return 0


def cmd_decode(args) -> int:
    data = Path(args.input).read_bytes()
    frames = decode_sequence(data)
    write_y4m(args.output, frames, fps=SequenceHeader.from_bytes(data).fps)
    return 0


def _parse_qps(text: str) -> list[int]:
    try:
        qps = [int(q) for q in text.split(",") if q.strip()]
    except ValueError:
        raise NlmrpError(f"bad QP list {text!r}") from None
    if not qps:
        raise NlmrpError("empty QP list")
    return qps


def cmd_rdcurve(args) -> int:
    video = _load(args)
    qps = _parse_qps(args.qps)
    modes = {"mc": [False], "nlmrp": [True], "both": [False, True]}[args.mode]
    curves = []
    for refine in modes:
        curve = collect_rd_curve(video.frames, qps, _params(args), refine, fps=video.fps, crop=video.crop)
        curves.append((refine, curve))
        for p in curve:
            log.info("%s qp=%d rate=%.3f kbit/s psnr=%.3f dB flags=%d",
                     "nlmrp" if refine else "mc", p.qp, p.rate, p.psnr, p.flags_set)
    out = Path(args.csv)
    with open(out, "w", newline="") as fh:
        # one header; in "both" mode the MC block precedes the NLM-RP block
        _write_blocks(fh, [c.points for _, c in curves])
    if args.mode == "both":
        for refine, curve in curves:
            sibling = out.with_suffix(f".{'nlmrp' if refine else 'mc'}.csv")
            curve.to_csv(sibling)
    return 0


def _write_blocks(fh, blocks) -> None:
    for i, block in enumerate(blocks):
        buf = io.StringIO()
        write_csv_rows(buf, block)
        text = buf.getvalue()
        fh.write(text if i == 0 else text.split("\n", 1)[1])


def cmd_bd(args) -> int:
    anchor = RdCurve.from_csv(args.anchor)
    test = RdCurve.from_csv(args.test)
    print(f"BD-rate: {bd_rate(anchor, test):.2f}%")
    print(f"BD-PSNR: {bd_psnr(anchor, test):.2f} dB")
    return 0


def cmd_synth(args) -> int:
    spec = SyntheticSpec.parse(args.spec)
    write_y4m(args.output, generate_synthetic(spec), fps=args.fps)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="nlmrp", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_input(p):
        p.add_argument("--input", required=True,
                       help="y4m file, raw 4:2:0 file (with --width/--height) or synth:<spec>")
        p.add_argument("--width", type=int, default=0)
        p.add_argument("--height", type=int, default=0)
        p.add_argument("--frames", type=int, default=None, help="limit the number of frames")
        p.add_argument("--fps", type=int, default=30)

    def add_nlm(p):
        p.add_argument("--dm", type=int, default=DEFAULT_DM, help="neighborhood half-width")
        p.add_argument("--h", type=float, default=DEFAULT_H, help="averaging strength")

    p = sub.add_parser("encode", help="encode a sequence, print stats JSON")
    add_input(p)
    add_nlm(p)
    p.add_argument("--qp", type=int, required=True)
    p.add_argument("--no-refine", action="store_true", help="plain motion compensation only")
    p.add_argument("--output", required=True)
    p.add_argument("--recon", help="also write the encoder reconstruction as y4m")
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("decode", help="decode a bitstream to y4m")
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.set_defaults(func=cmd_decode)

    p = sub.add_parser("rdcurve", help="sweep QPs and write RD points as CSV")
    add_input(p)
    add_nlm(p)
    p.add_argument("--qps", default=DEFAULT_QPS)
    p.add_argument("--mode", choices=("mc", "nlmrp", "both"), default="both")
    p.add_argument("--csv", required=True)
    p.set_defaults(func=cmd_rdcurve)

    p = sub.add_parser("bd", help="Bjontegaard deltas between two RD CSV files")
    p.add_argument("--anchor", required=True)
    p.add_argument("--test", required=True)
    p.set_defaults(func=cmd_bd)

    p = sub.add_parser("synth", help="write a synthetic sequence as y4m")
    p.add_argument("--spec", required=True, help="kind[,key=value...], e.g. occlusion,size=64,frames=30")
    p.add_argument("--output", required=True)
    p.add_argument("--fps", type=int, default=30)
    p.set_defaults(func=cmd_synth)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (NlmrpError, ValueError, OSError) as exc:
        print(f"nlmrp {args.command}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
