"""Transparency (PSNR) and robustness (NC, BER) measures."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ParameterError

PSNR_CAP = 99.0


def _check_videos(a, b):
    if a.luma.shape != b.luma.shape:
        raise ParameterError(f"video shapes differ: {a.luma.shape} vs {b.luma.shape}")


def _psnr_from_mse(mse):
    if mse == 0:
        return math.inf
    return 10.0 * math.log10(255.0**2 / mse)


def mse(a, b) -> float:
    _check_videos(a, b)
    d = a.luma.astype(np.int64) - b.luma.astype(np.int64)
    return float((d * d).mean()) if d.size else 0.0


def psnr(a, b) -> float:
    """Luma PSNR in dB over all frames; ``math.inf`` for identical videos."""
    return _psnr_from_mse(mse(a, b))


def psnr_per_frame(a, b) -> list[float]:
    _check_videos(a, b)
    d = a.luma.astype(np.int64) - b.luma.astype(np.int64)
    return [_psnr_from_mse(float((f * f).mean())) for f in d]


def cap_db(value: float) -> float:
    return min(value, PSNR_CAP)


def _bits(p):
    return np.asarray(getattr(p, "bits", p), dtype=np.int64).reshape(-1)


def _check_bits(w, w_hat):
    a, b = _bits(w), _bits(w_hat)
    if a.shape != b.shape:
        raise ParameterError(f"payload lengths differ: {a.size} vs {b.size}")
    if a.size == 0:
        raise ParameterError("empty payload")
    return a, b


def agreement_counts(w, w_hat) -> tuple[int, int, int]:
    """Integer ``(bipolar_sum, mismatches, length)`` behind NC and BER."""
    a, b = _check_bits(w, w_hat)
    bipolar = int(((2 * a - 1) * (2 * b - 1)).sum())
    return bipolar, int(np.count_nonzero(a != b)), int(a.size)


def normalized_correlation(w, w_hat) -> float:
    """Mean product of the bipolar (+1/-1) versions of two bit vectors."""
    s, _, n = agreement_counts(w, w_hat)
    return s / n


def ber(w, w_hat) -> float:
    _, m, n = agreement_counts(w, w_hat)
    return m / n


@dataclass
class MetricsReport:
    psnr_db: float | None = None
    nc: float | None = None
    ber: float | None = None
    per_frame_psnr: list[float] = field(default_factory=list)

    @classmethod
    def compute(cls, original=None, marked=None, logo=None, extracted=None):
        rep = cls()
        if original is not None and marked is not None:
            rep.psnr_db = psnr(original, marked)
            rep.per_frame_psnr = psnr_per_frame(original, marked)
        if logo is not None and extracted is not None:
            rep.nc = normalized_correlation(logo, extracted)
            rep.ber = ber(logo, extracted)
        return rep

    def lines(self) -> list[str]:
        out = []
        if self.psnr_db is not None:
            shown = "inf" if math.isinf(self.psnr_db) else f"{self.psnr_db:.6f}"
            out.append(f"psnr_db={shown}")
            out.append(f"psnr_db_capped={cap_db(self.psnr_db):.6f}")
        if self.nc is not None:
            out.append(f"nc={self.nc:.6f}")
            out.append(f"ber={self.ber:.6f}")
        return out
