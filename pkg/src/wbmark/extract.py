"""Blind payload recovery with majority voting over repeated WBs."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .embed import assign_bits, pair_positions
from .errors import ParameterError
from .keystream import DEFAULT_MIDRANGE, MASK64, check_midrange
from .selection import DEFAULT_ETH, select_wbs
from .transform import DCT_MATRIX, ZIGZAG_RASTER
from .video_io import Payload

SYNC_MODES = ("map", "blind")


@dataclass(frozen=True)
class ExtractParams:
    key: int
    logo_width: int
    logo_height: int
    midrange: tuple[int, int] = DEFAULT_MIDRANGE
    sync_mode: str = "map"
    e_th: float = DEFAULT_ETH

    def __post_init__(self):
        if not 0 <= self.key <= MASK64:
            raise ParameterError(f"key must be an unsigned 64-bit integer, got {self.key}")
        if self.logo_width < 1 or self.logo_height < 1:
            raise ParameterError("logo dimensions must be positive")
        if self.sync_mode not in SYNC_MODES:
            raise ParameterError(f"sync mode must be one of {SYNC_MODES}, got {self.sync_mode!r}")
        object.__setattr__(self, "midrange", check_midrange(self.midrange))

    @property
    def payload_length(self) -> int:
        return self.logo_width * self.logo_height


@dataclass
class VoteTally:
    ones: np.ndarray
    zeros: np.ndarray

    @property
    def total(self) -> int:
        return int(self.ones.sum() + self.zeros.sum())

    @property
    def empty(self) -> bool:
        return self.total == 0

    def decide(self) -> np.ndarray:
        """Majority per bit; ties (including no votes) resolve to 0."""
        return (self.ones > self.zeros).astype(np.uint8)

    def unanimous(self) -> bool:
        return bool(np.all((self.ones == 0) | (self.zeros == 0)))

    @classmethod
    def from_votes(cls, wb_bits, payload_length):
        which = assign_bits(len(wb_bits), payload_length)
        wb_bits = np.asarray(wb_bits, dtype=np.int64)
        ones = np.bincount(which, weights=wb_bits, minlength=payload_length).astype(np.int64)
        reps = np.bincount(which, minlength=payload_length).astype(np.int64)
        return cls(ones, reps - ones)


def extract_bit(coeffs, z1, z2) -> int:
    if z1 == z2:
        raise ParameterError("coefficient positions must differ")
    flat = np.asarray(coeffs, dtype=np.float64).reshape(-1)
    return int(abs(flat[ZIGZAG_RASTER[z1]]) > abs(flat[ZIGZAG_RASTER[z2]]))


def extract_wb_bits(seq, wbmap, key, midrange=DEFAULT_MIDRANGE) -> np.ndarray:
    """Raw per-WB decisions, before voting."""
    pos1, pos2 = pair_positions(key, len(wbmap), check_midrange(midrange))
    luma = np.ascontiguousarray(seq.luma)
    return kernels.extract_blocks(luma, wbmap.refs, pos1, pos2, DCT_MATRIX)


def extract(seq, params: ExtractParams, wbmap=None):
    """Recover the payload; returns ``(Payload, VoteTally)``.

    In ``map`` mode the WB locations come from ``wbmap``; in ``blind`` mode
    they are searched again on ``seq`` with ``params.e_th``.
    """
    if params.sync_mode == "map":
        if wbmap is None:
            raise ParameterError("map sync mode needs a WB map")
        wbmap.check_against(seq)
    else:
        wbmap = select_wbs(seq, params.e_th)
    wb_bits = extract_wb_bits(seq, wbmap, params.key, params.midrange)
    tally = VoteTally.from_votes(wb_bits, params.payload_length)
    payload = Payload(tally.decide(), params.logo_width, params.logo_height)
    return payload, tally
