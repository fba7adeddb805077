"""Compression attacks: built-in DCT requantization and external codecs."""

from __future__ import annotations

import logging
import shlex
import shutil
import subprocess
import tempfile
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import kernels
from .errors import AttackExecutionError, FormatError, ParameterError, SyncError
from .transform import DCT_MATRIX
from .video_io import load_video, save_video

log = logging.getLogger(__name__)

# JPEG (ITU-T T.81 Annex K) luminance quantization table, raster order.
JPEG_LUMA_QTABLE = np.array(
    [
        [16, 11, 10, 16, 24, 40, 51, 61],
        [12, 12, 14, 19, 26, 58, 60, 55],
        [14, 13, 16, 24, 40, 57, 69, 56],
        [14, 17, 22, 29, 51, 87, 80, 62],
        [18, 22, 37, 56, 68, 109, 103, 77],
        [24, 35, 55, 64, 81, 104, 113, 92],
        [49, 64, 78, 87, 103, 121, 120, 101],
        [72, 92, 95, 98, 112, 100, 103, 99],
    ],
    dtype=np.float64,
)
JPEG_LUMA_QTABLE.setflags(write=False)


def requant_attack(seq, strength: float = 1.0):
    """Quantize every full 8x8 luma block with ``strength * JPEG_LUMA_QTABLE``.

    Chroma and partial edge blocks pass through unchanged.
    """
    if not strength > 0:
        raise ParameterError(f"requantization strength must be positive, got {strength}")
    steps = np.ascontiguousarray(JPEG_LUMA_QTABLE * float(strength))
    luma = kernels.requant_luma(np.ascontiguousarray(seq.luma), steps, DCT_MATRIX)
    return seq.with_luma(luma)


# --------------------------------------------------------------------------- codecs

_PLACEHOLDERS = ("input", "output", "width", "height", "fps")


@dataclass(frozen=True)
class CodecAttackSpec:
    """Encode/decode command templates run through a Y4M hand-off.

    Templates use ``{input}``, ``{output}``, ``{width}``, ``{height}`` and
    ``{fps}`` (as ``num/den``).  The decoder must write Y4M to ``{output}``.
    ``suffix`` names the intermediate bitstream file (e.g. ``.mp4``, ``.264``).
    """

    encode: str
    decode: str
    repeat: int = 1
    suffix: str = ".bin"
    workdir: str | None = None

    def __post_init__(self):
        for name in ("encode", "decode"):
            tpl = getattr(self, name)
            if "{input}" not in tpl or "{output}" not in tpl:
                raise ParameterError(f"{name} template must contain {{input}} and {{output}}")
        if self.repeat < 1:
            raise ParameterError(f"repeat count must be >= 1, got {self.repeat}")

    @classmethod
    def from_file(cls, path, repeat=None) -> "CodecAttackSpec":
        """Parse a ``key = value`` template file (keys: encode, decode, suffix, repeat)."""
        fields = {}
        for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            key, sep, value = line.partition("=")
            if not sep:
                raise FormatError(f"{path}:{lineno}: expected 'key = value'")
            fields[key.strip()] = value.strip()
        unknown = set(fields) - {"encode", "decode", "suffix", "repeat"}
        if unknown:
            raise FormatError(f"{path}: unknown keys {sorted(unknown)}")
        if "encode" not in fields or "decode" not in fields:
            raise FormatError(f"{path}: both 'encode' and 'decode' are required")
        n = repeat if repeat is not None else int(fields.get("repeat", 1))
        return cls(fields["encode"], fields["decode"], n, fields.get("suffix", ".bin"))


def _render(template, values):
    # Split first so substituted paths never get re-tokenized.
    return [tok.format(**values) for tok in shlex.split(template)]


def _run(argv, cwd, runner):
    log.debug("running %s", shlex.join(argv))
    try:
        proc = runner(argv, cwd=cwd, capture_output=True)
    except FileNotFoundError as exc:
        raise AttackExecutionError(f"executable not found: {argv[0]}") from exc
    if proc.returncode != 0:
        stderr = proc.stderr.decode(errors="replace") if isinstance(proc.stderr, bytes) else proc.stderr or ""
        tail = stderr.strip().splitlines()[-1:] or [""]
        raise AttackExecutionError(
            f"{argv[0]} exited with status {proc.returncode}: {tail[0]}", stderr
        )


def codec_attack(seq, spec: CodecAttackSpec, runner=subprocess.run):
    """Round-trip ``seq`` through the external codec ``spec.repeat`` times.

    ``runner`` has the ``subprocess.run`` signature; tests inject a recorder.
    """
    tmp = tempfile.mkdtemp(prefix="wbmark-attack-", dir=spec.workdir)
    try:
        current = Path(tmp) / "input.y4m"
        save_video(seq, current)
        values = {
            "width": seq.width,
            "height": seq.height,
            "fps": f"{seq.meta.fps_num}/{seq.meta.fps_den}",
        }
        for step in range(spec.repeat):
            coded = Path(tmp) / f"pass{step}{spec.suffix}"
            decoded = Path(tmp) / f"pass{step}.y4m"
            _run(_render(spec.encode, {**values, "input": current, "output": coded}), tmp, runner)
            _run(_render(spec.decode, {**values, "input": coded, "output": decoded}), tmp, runner)
            if not decoded.exists():
                raise AttackExecutionError(f"decoder produced no output at {decoded}")
            current = decoded
        out = load_video(current)
    finally:
        shutil.rmtree(tmp, ignore_errors=True)

    if (out.width, out.height) != (seq.width, seq.height):
        raise SyncError(
            f"codec changed frame size {seq.width}x{seq.height} -> {out.width}x{out.height}"
        )
    if out.frame_count != seq.frame_count:
        raise SyncError(f"codec changed frame count {seq.frame_count} -> {out.frame_count}")
    return out


def find_ffmpeg():
    """Path to an ffmpeg executable (PATH first, then imageio-ffmpeg), or None."""
    exe = shutil.which("ffmpeg")
    if exe:
        return exe
    try:
        import imageio_ffmpeg
    except ImportError:
        return None
    try:
        return imageio_ffmpeg.get_ffmpeg_exe()
    except RuntimeError:
        return None


def ffmpeg_spec(encoder="libx264", crf=23, repeat=1, ffmpeg=None, preset="medium"):
    """Template pair for a CRF encode with ffmpeg and a Y4M decode."""
    exe = shlex.quote(ffmpeg or find_ffmpeg() or "ffmpeg")
    extra = "-x265-params log-level=error " if encoder == "libx265" else ""
    encode = (
        f"{exe} -nostdin -loglevel error -y -i {{input}} -c:v {encoder} "
        f"-preset {preset} -crf {crf} {extra}-pix_fmt yuv420p {{output}}"
    )
    decode = (
        f"{exe} -nostdin -loglevel error -y -i {{input}} "
        f"-pix_fmt yuv420p -f yuv4mpegpipe {{output}}"
    )
    return CodecAttackSpec(encode, decode, repeat, ".mkv")
