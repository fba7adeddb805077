"""``wbmark`` command line: embed, extract, attack, wbmask, measure.

Every subcommand writes a report of ``key=value`` lines (to ``--report`` or
stdout) whose content depends only on the inputs and flags.
"""

from __future__ import annotations

import argparse
import math
import re
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from .attack import CodecAttackSpec, codec_attack, requant_attack
from .embed import DEFAULT_BETA, EmbedParams, embed
from .errors import (
    AttackExecutionError,
    CapacityError,
    FormatError,
    ParameterError,
    SyncError,
    WatermarkError,
)
from .extract import ExtractParams, extract
from .keystream import DEFAULT_MIDRANGE
from .metrics import MetricsReport, ber, normalized_correlation, psnr
from .selection import DEFAULT_ETH, load_wbmap, save_wbmap, select_wbs, wb_mask
from .video_io import Payload, load_pbm, load_video, save_pbm, save_video, write_pgm

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_FORMAT = 3
EXIT_SYNC = 4
EXIT_CAPACITY = 5
EXIT_ATTACK = 6

_EXIT_CODES = [
    (FormatError, EXIT_FORMAT, "format"),
    (SyncError, EXIT_SYNC, "sync"),
    (CapacityError, EXIT_CAPACITY, "capacity"),
    (AttackExecutionError, EXIT_ATTACK, "attack"),
    (ParameterError, EXIT_ERROR, "parameter"),
]


# --------------------------------------------------------------------------- arg types


def parse_geometry(text):
    """``WxH@FPS`` with FPS as ``30``, ``25:1`` or ``30000/1001``."""
    m = re.fullmatch(r"(\d+)x(\d+)(?:@(\d+(?:[:/]\d+)?))?", text.strip())
    if not m:
        raise argparse.ArgumentTypeError(f"expected WxH@FPS, got {text!r}")
    fps = Fraction(m.group(3).replace(":", "/")) if m.group(3) else Fraction(30)
    return int(m.group(1)), int(m.group(2)), fps


def parse_size(text):
    m = re.fullmatch(r"(\d+)x(\d+)", text.strip())
    if not m:
        raise argparse.ArgumentTypeError(f"expected WxH, got {text!r}")
    return int(m.group(1)), int(m.group(2))


def parse_midrange(text):
    m = re.fullmatch(r"(\d+):(\d+)", text.strip())
    if not m:
        raise argparse.ArgumentTypeError(f"expected lo:hi, got {text!r}")
    return int(m.group(1)), int(m.group(2))


def parse_key(text):
    try:
        key = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"key must be an integer, got {text!r}") from None
    if not 0 <= key < 1 << 64:
        raise argparse.ArgumentTypeError("key must fit in an unsigned 64-bit integer")
    return key


def parse_eth_list(text):
    try:
        vals = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad threshold list {text!r}") from None
    if not vals or any(v < 0 for v in vals):
        raise argparse.ArgumentTypeError("thresholds must be non-negative")
    return vals


def parse_attack(text):
    kind, sep, arg = text.partition(":")
    if not sep or kind not in ("requant", "codec"):
        raise argparse.ArgumentTypeError("attack must be requant:<s> or codec:<template-file>")
    if kind == "requant":
        try:
            return kind, float(arg)
        except ValueError:
            raise argparse.ArgumentTypeError(f"bad requant strength {arg!r}") from None
    return kind, arg


# --------------------------------------------------------------------------- helpers


def _fmt(v):
    if isinstance(v, float):
        if math.isinf(v):
            return "inf"
        return str(int(v)) if v.is_integer() else f"{v:.6f}"
    if isinstance(v, (list, tuple)):
        return ",".join(str(x) for x in v)
    return str(v)


def emit_report(pairs, path=None):
    text = "".join(f"{k}={_fmt(v)}\n" for k, v in pairs)
    if path:
        Path(path).write_text(text)
    else:
        sys.stdout.write(text)


def _load_input(args):
    return load_video(args.input, args.raw_geometry)


# --------------------------------------------------------------------------- commands


def cmd_embed(args):
    seq = _load_input(args)
    logo = load_pbm(args.logo)
    wbmap = select_wbs(seq, args.eth)
    if len(wbmap) == 0:
        raise CapacityError("zero capacity: no WBs above threshold")
    params = EmbedParams(args.key, args.beta, args.midrange)
    marked, rep = embed(seq, wbmap, logo, params)
    save_video(marked, args.output)
    map_path = args.map or f"{args.output}.wbmap"
    save_wbmap(wbmap, map_path)
    emit_report(
        [
            ("command", "embed"),
            ("width", seq.width),
            ("height", seq.height),
            ("frames", seq.frame_count),
            ("eth", float(args.eth)),
            ("beta", float(args.beta)),
            ("midrange", f"{params.midrange[0]}:{params.midrange[1]}"),
            ("logo_width", logo.width),
            ("logo_height", logo.height),
            ("payload_bits", len(logo)),
            ("wb_count", rep.wb_count),
            ("repetitions_min", rep.min_repetitions),
            ("repetitions_max", rep.max_repetitions),
            ("uncovered_bits", len(rep.uncovered_bits)),
            ("coverage_complete", int(rep.complete)),
            ("failed_bits", rep.failed_bits),
            ("failed_payload_bits", rep.failed_payload_bits),
            ("psnr_db", psnr(seq, marked)),
            ("map", map_path),
        ],
        args.report,
    )
    return EXIT_OK


def cmd_extract(args):
    seq = _load_input(args)
    reference = load_pbm(args.logo) if args.logo else None
    if args.logo_size:
        lw, lh = args.logo_size
    elif reference is not None:
        lw, lh = reference.width, reference.height
    else:
        raise ParameterError("extract needs --logo-size WxH or a reference --logo")
    params = ExtractParams(args.key, lw, lh, args.midrange, args.sync, args.eth)
    wbmap = None
    if args.sync == "map":
        if not args.map:
            raise ParameterError("--sync map requires --map <path>")
        wbmap = load_wbmap(args.map)
    payload, tally = extract(seq, params, wbmap)
    if args.output:
        save_pbm(payload, args.output)
    pairs = [
        ("command", "extract"),
        ("sync", args.sync),
        ("logo_width", lw),
        ("logo_height", lh),
        ("wb_count", tally.total),
        ("empty", int(tally.empty)),
        ("unanimous", int(tally.unanimous())),
    ]
    if reference is not None:
        pairs += [("nc", normalized_correlation(reference, payload)), ("ber", ber(reference, payload))]
    emit_report(pairs, args.report)
    return EXIT_OK


def cmd_attack(args):
    seq = _load_input(args)
    kind, arg = args.attack
    if kind == "requant":
        out = seq
        for _ in range(args.repeat):
            out = requant_attack(out, arg)
    else:
        out = codec_attack(seq, CodecAttackSpec.from_file(arg, repeat=args.repeat))
    save_video(out, args.output)
    emit_report(
        [
            ("command", "attack"),
            ("attack", kind),
            ("parameter", arg if kind == "requant" else Path(arg).name),
            ("repeat", args.repeat),
            ("psnr_db", psnr(seq, out)),
        ],
        args.report,
    )
    return EXIT_OK


def cmd_wbmask(args):
    seq = _load_input(args)
    outdir = Path(args.output)
    outdir.mkdir(parents=True, exist_ok=True)
    frames = args.frames if args.frames is not None else range(seq.frame_count)
    pairs = [("command", "wbmask"), ("grid_width", seq.width // 8), ("grid_height", seq.height // 8)]
    for eth in args.eth:
        wbmap = select_wbs(seq, eth)
        white = 0
        for k in frames:
            if not 0 <= k < seq.frame_count:
                raise ParameterError(f"frame {k} outside 0..{seq.frame_count - 1}")
            mask = wb_mask(wbmap, k)
            white += int(mask.sum())
            if args.scale > 1:
                mask = np.kron(mask, np.ones((args.scale, args.scale), dtype=bool))
            stem = outdir / f"mask_eth{eth:g}_f{k:04d}"
            if args.pgm:
                with open(f"{stem}.pgm", "wb") as fh:
                    write_pgm(mask.astype(np.uint8) * 255, fh)
            else:
                # PBM 1 = black, so WBs (white) are written as 0.
                save_pbm(Payload.from_image(~mask), f"{stem}.pbm")
        pairs.append((f"white_blocks_eth{eth:g}", white))
    emit_report(pairs, args.report)
    return EXIT_OK


def cmd_measure(args):
    if not (args.reference or args.reference_logo):
        raise ParameterError("measure needs --reference and/or --reference-logo")
    rep = MetricsReport()
    if args.reference:
        if not args.input:
            raise ParameterError("--reference requires --input")
        a = _load_input(args)
        b = load_video(args.reference, args.raw_geometry)
        rep = MetricsReport.compute(a, b)
    if args.reference_logo:
        if not args.logo:
            raise ParameterError("--reference-logo requires --logo")
        got = MetricsReport.compute(logo=load_pbm(args.reference_logo), extracted=load_pbm(args.logo))
        rep.nc, rep.ber = got.nc, got.ber
    lines = ["command=measure"] + rep.lines()
    if args.per_frame and rep.per_frame_psnr:
        lines += [f"psnr_frame_{i}={_fmt(v)}" for i, v in enumerate(rep.per_frame_psnr)]
    text = "\n".join(lines) + "\n"
    if args.report:
        Path(args.report).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


# --------------------------------------------------------------------------- parser


def build_parser():
    p = argparse.ArgumentParser(prog="wbmark", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, output_help="output path"):
        sp.add_argument("--input", required=True, help="input Y4M (or raw I420 with --raw-geometry)")
        sp.add_argument("--raw-geometry", type=parse_geometry, metavar="WxH@FPS")
        sp.add_argument("--report", help="write key=value report here instead of stdout")
        return sp

    def keyed(sp):
        sp.add_argument("--key", type=parse_key, required=True, help="64-bit key (decimal or 0x hex)")
        sp.add_argument("--midrange", type=parse_midrange, default=DEFAULT_MIDRANGE, metavar="LO:HI")
        sp.add_argument("--eth", type=float, default=DEFAULT_ETH, help="residual energy threshold")

    sp = common(sub.add_parser("embed", help="watermark a video with a PBM logo"))
    keyed(sp)
    sp.add_argument("--logo", required=True, help="PBM logo (P1/P4)")
    sp.add_argument("--output", required=True, help="watermarked Y4M")
    sp.add_argument("--map", help="WB map sidecar path (default: <output>.wbmap)")
    sp.add_argument("--beta", type=float, default=DEFAULT_BETA, help="embedding margin")
    sp.set_defaults(func=cmd_embed)

    sp = common(sub.add_parser("extract", help="recover the logo from a video"))
    keyed(sp)
    sp.add_argument("--sync", choices=("map", "blind"), default="map")
    sp.add_argument("--map", help="WB map sidecar (map mode)")
    sp.add_argument("--logo", help="reference logo; gives size and enables nc/ber")
    sp.add_argument("--logo-size", type=parse_size, metavar="WxH")
    sp.add_argument("--output", help="recovered logo PBM")
    sp.set_defaults(func=cmd_extract)

    sp = common(sub.add_parser("attack", help="apply a compression attack"))
    sp.add_argument("--attack", type=parse_attack, required=True, metavar="requant:S|codec:FILE")
    sp.add_argument("--repeat", type=int, default=1, help="number of successive passes")
    sp.add_argument("--output", required=True)
    sp.set_defaults(func=cmd_attack)

    sp = common(sub.add_parser("wbmask", help="write per-frame WB masks (WBs white)"))
    sp.add_argument("--eth", type=parse_eth_list, default=[DEFAULT_ETH], help="threshold or comma list")
    sp.add_argument("--output", required=True, help="output directory")
    sp.add_argument("--frames", type=lambda s: [int(v) for v in s.split(",")], help="frame indices")
    sp.add_argument("--scale", type=int, default=1, help="pixels per block in the mask image")
    sp.add_argument("--pgm", action="store_true", help="write PGM instead of PBM")
    sp.set_defaults(func=cmd_wbmask)

    sp = sub.add_parser("measure", help="PSNR between videos and/or NC/BER between logos")
    sp.add_argument("--input")
    sp.add_argument("--reference")
    sp.add_argument("--raw-geometry", type=parse_geometry, metavar="WxH@FPS")
    sp.add_argument("--logo")
    sp.add_argument("--reference-logo")
    sp.add_argument("--per-frame", action="store_true")
    sp.add_argument("--report")
    sp.set_defaults(func=cmd_measure)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    if getattr(args, "repeat", 1) < 1:
        print("wbmark: error: parameter: --repeat must be >= 1", file=sys.stderr)
        return EXIT_ERROR
    try:
        return args.func(args)
    except WatermarkError as exc:
        for cls, code, label in _EXIT_CODES:
            if isinstance(exc, cls):
                break
        else:
            code, label = EXIT_ERROR, "error"
        print(f"wbmark: error: {label}: {exc}", file=sys.stderr)
        return code
    except OSError as exc:
        print(f"wbmark: error: io: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
