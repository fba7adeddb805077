"""Watermarking-block (WB) search by two-sided temporal residual energy.

A block of frame ``k`` qualifies when the summed squared difference to the
co-located blocks of frames ``k-1`` and ``k+1`` exceeds a threshold.  Only
full 8x8 blocks of interior frames are candidates.
"""

from __future__ import annotations

import io
import warnings
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from . import kernels
from .errors import FormatError, ParameterError, SyncError

DEFAULT_ETH = 1000.0
MAP_MAGIC = "WBMAP 1"


class BlockRef(NamedTuple):
    frame: int
    row: int
    col: int


@dataclass
class WbMap:
    """Ordered WB locations plus the geometry and threshold that produced them."""

    e_th: float
    width: int
    height: int
    refs: np.ndarray = field(default_factory=lambda: np.zeros((0, 3), dtype=np.int64))
    warning: str | None = None

    def __post_init__(self):
        if self.e_th < 0:
            raise ParameterError(f"e_th must be non-negative, got {self.e_th}")
        refs = np.asarray(self.refs, dtype=np.int64).reshape(-1, 3)
        if len(refs) > 1:
            # Lexicographic strictly increasing == unique and sorted.
            d = np.diff(refs, axis=0)
            first = np.argmax(d != 0, axis=1)
            lead = d[np.arange(len(d)), first]
            if np.any(lead <= 0):
                raise ParameterError("WB refs must be strictly increasing (frame, row, col)")
        if len(refs) and (
            refs[:, 0].min() < 1
            or refs[:, 1].min() < 0
            or refs[:, 2].min() < 0
            or refs[:, 1].max() >= self.height // 8
            or refs[:, 2].max() >= self.width // 8
        ):
            raise ParameterError("WB ref outside the block grid")
        self.refs = refs

    def __len__(self):
        return len(self.refs)

    def __iter__(self):
        return (BlockRef(*map(int, r)) for r in self.refs)

    def __eq__(self, other):
        if not isinstance(other, WbMap):
            return NotImplemented
        return (
            self.e_th == other.e_th
            and self.width == other.width
            and self.height == other.height
            and np.array_equal(self.refs, other.refs)
        )

    def as_set(self) -> set[BlockRef]:
        return set(self)

    def check_against(self, seq) -> None:
        """Raise SyncError unless this map can address blocks of ``seq``."""
        if (self.width, self.height) != (seq.width, seq.height):
            raise SyncError(
                f"WB map is for {self.width}x{self.height}, video is {seq.width}x{seq.height}"
            )
        if len(self.refs) and self.refs[:, 0].max() > seq.frame_count - 2:
            raise SyncError(
                f"WB map references frame {int(self.refs[:, 0].max())} "
                f"but video has {seq.frame_count} frames"
            )


def residual_energy(seq, ref) -> int:
    """Exact integer energy of the two residual blocks of ``ref``."""
    k, r, c = ref
    if not 1 <= k <= seq.frame_count - 2:
        raise ParameterError(f"frame {k} lacks a previous or next frame")
    if not (0 <= r < seq.height // 8 and 0 <= c < seq.width // 8):
        raise ParameterError(f"block ({r}, {c}) outside the full-block grid")
    win = seq.luma[k - 1 : k + 2, r * 8 : r * 8 + 8, c * 8 : c * 8 + 8].astype(np.int64)
    prev = win[1] - win[0]
    nxt = win[1] - win[2]
    return int((prev * prev).sum() + (nxt * nxt).sum())


def energy_grid(seq) -> np.ndarray:
    """Energies for frames 1..n-2 as an ``(n-2, h//8, w//8)`` int64 array."""
    return kernels.block_energies(np.ascontiguousarray(seq.luma))


def select_from_energies(energies, e_th, width, height) -> WbMap:
    f, r, c = np.nonzero(energies > e_th)
    # np.nonzero walks C order, so the refs come out lexicographically sorted.
    refs = np.stack([f + 1, r, c], axis=1).astype(np.int64)
    return WbMap(float(e_th), width, height, refs)


def select_wbs(seq, e_th: float = DEFAULT_ETH) -> WbMap:
    if e_th < 0:
        raise ParameterError(f"e_th must be non-negative, got {e_th}")
    if seq.frame_count < 3:
        msg = f"need at least 3 frames to search WBs, got {seq.frame_count}"
        warnings.warn(msg, stacklevel=2)
        return WbMap(float(e_th), seq.width, seq.height, warning=msg)
    return select_from_energies(energy_grid(seq), e_th, seq.width, seq.height)


def wb_mask(wbmap: WbMap, frame: int) -> np.ndarray:
    """Boolean ``(h//8, w//8)`` grid of the WBs in one frame."""
    mask = np.zeros((wbmap.height // 8, wbmap.width // 8), dtype=bool)
    sel = wbmap.refs[wbmap.refs[:, 0] == frame]
    mask[sel[:, 1], sel[:, 2]] = True
    return mask


# --------------------------------------------------------------------------- sidecar


def write_wbmap(m: WbMap, sink) -> int:
    """Text sidecar: header lines then one ``k row col`` triple per line."""
    buf = io.StringIO()
    buf.write(f"{MAP_MAGIC}\n")
    buf.write(f"width {m.width}\nheight {m.height}\n")
    buf.write(f"eth {m.e_th!r}\n")
    buf.write(f"count {len(m)}\n")
    for k, r, c in m.refs:
        buf.write(f"{k} {r} {c}\n")
    data = buf.getvalue().encode("ascii")
    sink.write(data)
    return len(data)


def read_wbmap(stream) -> WbMap:
    raw = stream if isinstance(stream, (bytes, bytearray)) else stream.read()
    if isinstance(raw, (bytes, bytearray)):
        raw = raw.decode("ascii")
    lines = raw.splitlines()
    if not lines or lines[0].strip() != MAP_MAGIC:
        raise FormatError("not a WB map (missing 'WBMAP 1' header)", 0)
    header = {}
    i = 1
    for key in ("width", "height", "eth", "count"):
        if i >= len(lines):
            raise FormatError(f"WB map header ends before '{key}'")
        parts = lines[i].split()
        if len(parts) != 2 or parts[0] != key:
            raise FormatError(f"WB map line {i + 1}: expected '{key} <value>'")
        header[key] = parts[1]
        i += 1
    try:
        width, height = int(header["width"]), int(header["height"])
        e_th, count = float(header["eth"]), int(header["count"])
    except ValueError as exc:
        raise FormatError(f"WB map header: {exc}") from None
    body = [ln for ln in lines[i:] if ln.strip()]
    if len(body) != count:
        raise FormatError(f"WB map declares {count} blocks but lists {len(body)}")
    try:
        refs = np.array([[int(t) for t in ln.split()] for ln in body], dtype=np.int64)
    except ValueError as exc:
        raise FormatError(f"WB map entry: {exc}") from None
    if count and refs.shape[1] != 3:
        raise FormatError("WB map entries must be 'k row col' triples")
    try:
        return WbMap(e_th, width, height, refs.reshape(-1, 3))
    except ParameterError as exc:
        raise FormatError(f"invalid WB map: {exc}") from None


def save_wbmap(m: WbMap, path) -> int:
    with open(path, "wb") as fh:
        return write_wbmap(m, fh)


def load_wbmap(path) -> WbMap:
    with open(path, "rb") as fh:
        return read_wbmap(fh)
