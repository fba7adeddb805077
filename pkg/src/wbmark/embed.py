"""Bit embedding by keyed magnitude swap of two mid-band DCT coefficients."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import ParameterError
from .keystream import DEFAULT_MIDRANGE, MASK64, check_midrange, draw_pairs
from .transform import DCT_MATRIX, ZIGZAG_RASTER

DEFAULT_BETA = 2.0


@dataclass(frozen=True)
class EmbedParams:
    key: int
    beta: float = DEFAULT_BETA
    midrange: tuple[int, int] = DEFAULT_MIDRANGE

    def __post_init__(self):
        if not 0 <= self.key <= MASK64:
            raise ParameterError(f"key must be an unsigned 64-bit integer, got {self.key}")
        if self.beta < 0:
            raise ParameterError(f"margin beta must be non-negative, got {self.beta}")
        object.__setattr__(self, "midrange", check_midrange(self.midrange))


@dataclass
class EmbedReport:
    wb_count: int
    payload_length: int
    repetitions: np.ndarray      # WBs carrying each payload bit
    failed_bits: int             # WBs whose bit does not survive rounding/clipping
    failed_payload_bits: int     # payload bits lost after majority vote

    @property
    def uncovered_bits(self) -> list[int]:
        return np.flatnonzero(self.repetitions == 0).tolist()

    @property
    def complete(self) -> bool:
        return self.wb_count >= self.payload_length

    @property
    def min_repetitions(self) -> int:
        return int(self.repetitions.min())

    @property
    def max_repetitions(self) -> int:
        return int(self.repetitions.max())


def embed_bit(coeffs, z1, z2, bit, beta=0.0):
    """Return a copy of an 8x8 coefficient block carrying ``bit`` at (z1, z2).

    Bit 1 raises ``|c(z1)|`` to ``max(|c1|, |c2|) + beta``; bit 0 lowers it to
    ``max(min(|c1|, |c2|) - beta, 0)``.  The sign of ``c(z1)`` is kept and
    ``c(z2)`` is left alone.
    """
    if z1 == z2:
        raise ParameterError("coefficient positions must differ")
    out = np.array(coeffs, dtype=np.float64, copy=True)
    flat = out.reshape(-1)
    p1, p2 = ZIGZAG_RASTER[z1], ZIGZAG_RASTER[z2]
    c1 = flat[p1]
    a1, a2 = abs(c1), abs(flat[p2])
    mag = max(a1, a2) + beta if bit else max(min(a1, a2) - beta, 0.0)
    flat[p1] = -mag if c1 < 0 else mag
    return out


def pair_positions(key, count, midrange):
    """Raster offsets of the keyed coefficient pairs for ``count`` WBs."""
    pairs = draw_pairs(key, count, midrange)
    return ZIGZAG_RASTER[pairs[:, 0]], ZIGZAG_RASTER[pairs[:, 1]]


def assign_bits(wb_count, payload_length):
    """Payload bit index carried by each WB: cyclic repetition in map order."""
    return np.arange(wb_count, dtype=np.int64) % payload_length


def embed(seq, wbmap, payload, params: EmbedParams):
    """Watermark ``seq``; returns the new sequence and an :class:`EmbedReport`."""
    wbmap.check_against(seq)
    L = len(payload)
    m = len(wbmap)
    which = assign_bits(m, L)
    bits = payload.bits[which].astype(np.uint8)
    pos1, pos2 = pair_positions(params.key, m, params.midrange)

    luma = np.ascontiguousarray(seq.luma).copy()
    kernels.embed_blocks(luma, wbmap.refs, pos1, pos2, bits, float(params.beta), DCT_MATRIX)

    # Verification pass over the rounded, clipped output.
    got = kernels.extract_blocks(luma, wbmap.refs, pos1, pos2, DCT_MATRIX)
    wrong = got != bits
    ones = np.bincount(which, weights=got, minlength=L)
    reps = np.bincount(which, minlength=L)
    voted = (2 * ones > reps).astype(np.uint8)
    lost = int(np.count_nonzero((voted != payload.bits) & (reps > 0)))

    report = EmbedReport(
        wb_count=m,
        payload_length=L,
        repetitions=reps,
        failed_bits=int(np.count_nonzero(wrong)),
        failed_payload_bits=lost,
    )
    return seq.with_luma(luma), report
