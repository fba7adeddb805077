"""Readers and writers for Y4M, headerless I420 and PBM.

All parsing happens on in-memory buffers.  Luma planes are exposed as a
``(frames, height, width)`` uint8 array; chroma bytes are kept opaque and
written back unchanged.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import FormatError, SinkError, TruncationError, UnsupportedFormatError

Y4M_MAGIC = b"YUV4MPEG2"
FRAME_TAG = b"FRAME"

# 8-bit 4:2:0 variants; anything else (420p10, 422, 444, mono) is refused.
_SUPPORTED_COLORSPACES = {"420", "420jpeg", "420paldv", "420mpeg2"}


@dataclass(frozen=True)
class VideoMeta:
    width: int
    height: int
    fps_num: int = 30
    fps_den: int = 1
    frame_count: int = 0
    # Header tokens other than W/H/F, kept verbatim (e.g. "Ip", "A1:1", "C420jpeg").
    extra_tokens: tuple[str, ...] = ()

    def __post_init__(self):
        if self.width < 16 or self.height < 16:
            raise FormatError(f"frame size {self.width}x{self.height} below 16x16 minimum")
        if self.fps_num <= 0 or self.fps_den <= 0:
            raise FormatError(f"invalid frame rate {self.fps_num}:{self.fps_den}")
        if self.frame_count < 0:
            raise FormatError("negative frame count")

    @property
    def luma_size(self) -> int:
        return self.width * self.height

    @property
    def chroma_size(self) -> int:
        # Two subsampled planes; equals width*height/2 for even dimensions.
        return 2 * ((self.width + 1) // 2) * ((self.height + 1) // 2)

    @property
    def frame_size(self) -> int:
        return self.luma_size + self.chroma_size

    @property
    def fps(self) -> Fraction:
        return Fraction(self.fps_num, self.fps_den)


@dataclass
class LumaSequence:
    """Luma planes of an 8-bit 4:2:0 video plus its untouched chroma."""

    meta: VideoMeta
    luma: np.ndarray
    chroma: np.ndarray = field(default=None)

    def __post_init__(self):
        m = self.meta
        self.luma = np.asarray(self.luma)
        if self.luma.dtype != np.uint8:
            raise FormatError(f"luma must be uint8, got {self.luma.dtype}")
        if self.luma.ndim != 3 or self.luma.shape[1:] != (m.height, m.width):
            raise FormatError(
                f"luma shape {self.luma.shape} does not match {m.width}x{m.height}"
            )
        if self.luma.shape[0] != m.frame_count:
            raise FormatError(
                f"{self.luma.shape[0]} luma planes but frame_count={m.frame_count}"
            )
        if self.chroma is None:
            self.chroma = np.full((m.frame_count, m.chroma_size), 128, dtype=np.uint8)
        self.chroma = np.asarray(self.chroma, dtype=np.uint8)
        if self.chroma.shape != (m.frame_count, m.chroma_size):
            raise FormatError(
                f"chroma shape {self.chroma.shape}, expected {(m.frame_count, m.chroma_size)}"
            )

    @property
    def frames(self) -> list[np.ndarray]:
        return list(self.luma)

    @property
    def frame_count(self) -> int:
        return self.meta.frame_count

    @property
    def width(self) -> int:
        return self.meta.width

    @property
    def height(self) -> int:
        return self.meta.height

    def with_luma(self, luma: np.ndarray) -> "LumaSequence":
        """Copy of this sequence with replaced luma and the same chroma."""
        return LumaSequence(self.meta, luma, self.chroma.copy())

    def copy(self) -> "LumaSequence":
        return LumaSequence(self.meta, self.luma.copy(), self.chroma.copy())

    def __eq__(self, other):
        if not isinstance(other, LumaSequence):
            return NotImplemented
        return (
            self.meta == other.meta
            and np.array_equal(self.luma, other.luma)
            and np.array_equal(self.chroma, other.chroma)
        )

    @classmethod
    def from_luma(cls, luma, fps=(30, 1), chroma=None) -> "LumaSequence":
        """Wrap a ``(n, h, w)`` uint8 array; chroma defaults to neutral grey."""
        luma = np.asarray(luma, dtype=np.uint8)
        n, h, w = luma.shape
        num, den = _fps_pair(fps)
        return cls(VideoMeta(w, h, num, den, n), luma, chroma)


@dataclass
class Payload:
    """Binary logo: bits in row-major order, 1 = black pixel."""

    bits: np.ndarray
    width: int
    height: int

    def __post_init__(self):
        self.bits = np.asarray(self.bits, dtype=np.uint8).reshape(-1)
        if self.bits.size < 1:
            raise FormatError("payload must contain at least one bit")
        if self.bits.size != self.width * self.height:
            raise FormatError(
                f"{self.bits.size} bits do not fill a {self.width}x{self.height} logo"
            )
        if np.any(self.bits > 1):
            raise FormatError("payload bits must be 0 or 1")

    def __len__(self):
        return int(self.bits.size)

    def __eq__(self, other):
        if not isinstance(other, Payload):
            return NotImplemented
        return (
            self.width == other.width
            and self.height == other.height
            and np.array_equal(self.bits, other.bits)
        )

    def as_image(self) -> np.ndarray:
        return self.bits.reshape(self.height, self.width)

    @classmethod
    def from_image(cls, img) -> "Payload":
        img = np.asarray(img, dtype=np.uint8)
        return cls(img.reshape(-1), img.shape[1], img.shape[0])


def _fps_pair(fps) -> tuple[int, int]:
    if isinstance(fps, Fraction):
        return fps.numerator, fps.denominator
    if isinstance(fps, (tuple, list)):
        return int(fps[0]), int(fps[1])
    fr = Fraction(fps).limit_denominator(1001)
    return fr.numerator, fr.denominator


def _read_all(stream) -> bytes:
    if isinstance(stream, (bytes, bytearray, memoryview)):
        return bytes(stream)
    return stream.read()


def _write(sink, chunks) -> int:
    written = 0
    try:
        for chunk in chunks:
            n = sink.write(chunk)
            written += len(chunk) if n is None else n
    except OSError as exc:
        raise SinkError(f"write failed: {exc}", written) from exc
    return written


# --------------------------------------------------------------------------- Y4M


def _parse_ratio(text: str, offset: int) -> tuple[int, int]:
    m = re.fullmatch(r"(\d+):(\d+)", text)
    if not m:
        raise FormatError(f"bad frame-rate token F{text!r}", offset)
    return int(m.group(1)), int(m.group(2))


def read_y4m(stream) -> LumaSequence:
    """Parse a YUV4MPEG2 stream (bytes or binary file object)."""
    data = _read_all(stream)
    if not data.startswith(Y4M_MAGIC):
        # Report the first byte that diverges from the signature.
        bad = next(
            (i for i, (a, b) in enumerate(zip(data, Y4M_MAGIC)) if a != b),
            min(len(data), len(Y4M_MAGIC)),
        )
        raise FormatError("missing YUV4MPEG2 signature", bad)
    eol = data.find(b"\n")
    if eol < 0:
        raise FormatError("unterminated stream header", len(data))
    header = data[len(Y4M_MAGIC):eol]
    if header and not header.startswith(b" "):
        raise FormatError("malformed YUV4MPEG2 signature", len(Y4M_MAGIC))

    width = height = None
    fps = (30, 1)
    extra = []
    pos = len(Y4M_MAGIC)
    for tok in header.split(b" "):
        tok_offset = pos
        pos += len(tok) + 1
        if not tok:
            continue
        try:
            text = tok.decode("ascii")
        except UnicodeDecodeError:
            raise FormatError("non-ASCII header token", tok_offset) from None
        key, val = text[0], text[1:]
        if key in "WH":
            if not val.isdigit():
                raise FormatError(f"bad dimension token {text!r}", tok_offset)
            if key == "W":
                width = int(val)
            else:
                height = int(val)
        elif key == "F":
            fps = _parse_ratio(val, tok_offset)
        else:
            if key == "C" and val not in _SUPPORTED_COLORSPACES:
                raise UnsupportedFormatError(f"unsupported colorspace C{val}")
            extra.append(text)
    if width is None or height is None:
        raise FormatError("header lacks W or H token", eol)

    probe = VideoMeta(width, height, fps[0], fps[1], 0, tuple(extra))
    fsize = probe.frame_size
    luma, chroma = [], []
    pos = eol + 1
    index = 0
    while pos < len(data):
        if not data.startswith(FRAME_TAG, pos):
            if len(data) - pos < len(FRAME_TAG) and FRAME_TAG.startswith(data[pos:]):
                raise TruncationError("stream ends inside FRAME marker", index)
            raise FormatError("expected FRAME marker", pos)
        nl = data.find(b"\n", pos)
        if nl < 0:
            raise TruncationError("unterminated FRAME header", index)
        start = nl + 1
        end = start + fsize
        if end > len(data):
            raise TruncationError("stream ends inside frame data", index)
        buf = np.frombuffer(data, dtype=np.uint8, count=fsize, offset=start)
        luma.append(buf[: probe.luma_size].reshape(height, width))
        chroma.append(buf[probe.luma_size:])
        pos = end
        index += 1

    meta = VideoMeta(width, height, fps[0], fps[1], index, tuple(extra))
    return LumaSequence(meta, _stack(luma, meta), _stack_chroma(chroma, meta))


def _stack(planes, meta):
    if not planes:
        return np.zeros((0, meta.height, meta.width), dtype=np.uint8)
    return np.stack(planes).copy()


def _stack_chroma(planes, meta):
    if not planes:
        return np.zeros((0, meta.chroma_size), dtype=np.uint8)
    return np.stack(planes).copy()


def y4m_header(meta: VideoMeta) -> bytes:
    tokens = [f"W{meta.width}", f"H{meta.height}", f"F{meta.fps_num}:{meta.fps_den}"]
    tokens.extend(meta.extra_tokens)
    return b"YUV4MPEG2 " + " ".join(tokens).encode("ascii") + b"\n"


def write_y4m(seq: LumaSequence, sink) -> int:
    """Write *seq* as Y4M; returns the number of bytes written."""

    def chunks():
        yield y4m_header(seq.meta)
        for y, c in zip(seq.luma, seq.chroma):
            yield FRAME_TAG + b"\n"
            yield np.ascontiguousarray(y).tobytes()
            yield c.tobytes()

    return _write(sink, chunks())


def read_raw_i420(stream, width: int, height: int, fps=(30, 1)) -> LumaSequence:
    data = _read_all(stream)
    num, den = _fps_pair(fps)
    probe = VideoMeta(width, height, num, den, 0)
    fsize = probe.frame_size
    count, rest = divmod(len(data), fsize)
    if rest:
        raise TruncationError(
            f"{len(data)} bytes is not a multiple of the {fsize}-byte frame size", count
        )
    meta = VideoMeta(width, height, num, den, count)
    buf = np.frombuffer(data, dtype=np.uint8).reshape(count, fsize)
    luma = buf[:, : meta.luma_size].reshape(count, height, width).copy()
    return LumaSequence(meta, luma, buf[:, meta.luma_size:].copy())


def write_raw_i420(seq: LumaSequence, sink) -> int:
    def chunks():
        for y, c in zip(seq.luma, seq.chroma):
            yield np.ascontiguousarray(y).tobytes()
            yield c.tobytes()

    return _write(sink, chunks())


# --------------------------------------------------------------------------- PBM

_WS = b" \t\r\n\v\f"


class _HeaderScanner:
    """Netpbm header tokenizer: whitespace separated, '#' comments to EOL."""

    def __init__(self, data: bytes, pos: int):
        self.data = data
        self.pos = pos

    def skip(self):
        d = self.data
        while self.pos < len(d):
            ch = d[self.pos]
            if ch in _WS:
                self.pos += 1
            elif ch == ord("#"):
                nl = d.find(b"\n", self.pos)
                self.pos = len(d) if nl < 0 else nl + 1
            else:
                break

    def integer(self, what: str) -> int:
        self.skip()
        start = self.pos
        while self.pos < len(self.data) and self.data[self.pos:self.pos + 1].isdigit():
            self.pos += 1
        if start == self.pos:
            raise FormatError(f"missing {what} in PBM header", start)
        return int(self.data[start:self.pos])


def read_pbm(stream) -> Payload:
    data = _read_all(stream)
    magic = data[:2]
    if magic not in (b"P1", b"P4"):
        raise FormatError(f"not a bitmap PBM (magic {magic!r})", 0)
    sc = _HeaderScanner(data, 2)
    width = sc.integer("width")
    height = sc.integer("height")
    if width < 1 or height < 1:
        raise FormatError(f"empty bitmap {width}x{height}", sc.pos)

    if magic == b"P1":
        body = data[sc.pos:]
        body = re.sub(rb"#[^\n]*", b"", body)
        digits = re.sub(rb"\s+", b"", body)
        need = width * height
        if len(digits) < need:
            raise TruncationError(f"P1 raster has {len(digits)} of {need} pixels")
        raster = digits[:need]
        if raster.strip(b"01"):
            raise FormatError("P1 raster contains characters other than 0/1", sc.pos)
        bits = np.frombuffer(raster, dtype=np.uint8) - ord("0")
        return Payload(bits, width, height)

    # P4: exactly one whitespace byte separates header from raster.
    if sc.pos >= len(data) or data[sc.pos] not in _WS:
        raise FormatError("missing whitespace after PBM header", sc.pos)
    start = sc.pos + 1
    row_bytes = (width + 7) // 8
    need = row_bytes * height
    raster = data[start:start + need]
    if len(raster) < need:
        raise TruncationError(f"P4 raster has {len(raster)} of {need} bytes")
    rows = np.frombuffer(raster, dtype=np.uint8).reshape(height, row_bytes)
    bits = np.unpackbits(rows, axis=1)[:, :width]
    return Payload(bits.reshape(-1), width, height)


def write_pbm(p: Payload, sink, ascii: bool = False) -> int:
    """Write a PBM (binary P4 by default, P1 when ``ascii``)."""
    img = p.as_image()
    if ascii:
        lines = [f"P1\n{p.width} {p.height}\n".encode("ascii")]
        lines += [b" ".join(b"1" if v else b"0" for v in row) + b"\n" for row in img]
        return _write(sink, lines)
    header = f"P4\n{p.width} {p.height}\n".encode("ascii")
    return _write(sink, [header, np.packbits(img, axis=1).tobytes()])


def write_pgm(img: np.ndarray, sink) -> int:
    img = np.asarray(img, dtype=np.uint8)
    header = f"P5\n{img.shape[1]} {img.shape[0]}\n255\n".encode("ascii")
    return _write(sink, [header, np.ascontiguousarray(img).tobytes()])


# --------------------------------------------------------------------------- paths


def load_video(path, geometry=None) -> LumaSequence:
    """Read a Y4M file, or raw I420 when ``geometry=(w, h, fps)`` is given."""
    with open(path, "rb") as fh:
        if geometry is not None:
            w, h, fps = geometry
            return read_raw_i420(fh, w, h, fps)
        return read_y4m(fh)


def save_video(seq: LumaSequence, path) -> int:
    with open(path, "wb") as fh:
        return write_y4m(seq, fh)


def load_pbm(path) -> Payload:
    with open(path, "rb") as fh:
        return read_pbm(fh)


def save_pbm(p: Payload, path) -> int:
    with open(path, "wb") as fh:
        return write_pbm(p, fh)
