"""Time the numba and numpy kernel flavours on a synthetic CIF clip.

    python3 benchmarks/bench_kernels.py [--frames 50] [--repeat 5]

Both flavours are imported side by side, so ``WBMARK_BACKEND`` does not
matter here.  The numba column excludes the first (compiling) call.
"""

import argparse
import time

import numpy as np

from wbmark import kernels
from wbmark._accel import NUMBA_AVAILABLE
from wbmark.attack import JPEG_LUMA_QTABLE
from wbmark.embed import pair_positions
from wbmark.selection import select_wbs
from wbmark.synth import moving_objects_clip
from wbmark.transform import DCT_MATRIX


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--frames", type=int, default=50)
    ap.add_argument("--width", type=int, default=352)
    ap.add_argument("--height", type=int, default=288)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)

    seq = moving_objects_clip(args.frames, args.width, args.height, seed=7, objects=6, size=(24, 64))
    luma = np.ascontiguousarray(seq.luma)
    refs = np.ascontiguousarray(select_wbs(seq).refs)
    pos1, pos2 = (np.ascontiguousarray(p) for p in pair_positions(1234, len(refs), (10, 36)))
    bits = (np.arange(len(refs)) % 2).astype(np.uint8)
    steps = np.ascontiguousarray(JPEG_LUMA_QTABLE)

    cases = {
        "block_energies": lambda f: f(luma),
        "embed_blocks": lambda f: f(luma.copy(), refs, pos1, pos2, bits, 2.0, DCT_MATRIX),
        "extract_blocks": lambda f: f(luma, refs, pos1, pos2, DCT_MATRIX),
        "requant_luma": lambda f: f(luma, steps, DCT_MATRIX),
    }

    print(f"clip {args.width}x{args.height}x{args.frames}, {len(refs)} WBs, best of {args.repeat}")
    print(f"{'kernel':<16}{'numpy [ms]':>12}{'numba [ms]':>12}{'speedup':>10}")
    for name, call in cases.items():
        t_np = best_of(lambda: call(getattr(kernels, name + "_np")), args.repeat)
        if NUMBA_AVAILABLE:
            nb = getattr(kernels, name + "_nb")
            call(nb)  # compile / load cache
            t_nb = best_of(lambda: call(nb), args.repeat)
            print(f"{name:<16}{t_np * 1e3:>12.2f}{t_nb * 1e3:>12.2f}{t_np / t_nb:>9.1f}x")
        else:
            print(f"{name:<16}{t_np * 1e3:>12.2f}{'n/a':>12}{'':>10}")


if __name__ == "__main__":
    main()
