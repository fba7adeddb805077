"""Orthonormal 8x8 DCT-II and the JPEG zig-zag scan."""

import numpy as np

from .errors import ParameterError

N = 8


def _dct_matrix(n=N):
    k = np.arange(n)[:, None]
    x = np.arange(n)[None, :]
    m = np.sqrt(2.0 / n) * np.cos(np.pi * (2 * x + 1) * k / (2 * n))
    m[0, :] = 1.0 / np.sqrt(n)
    return m


# Row u holds basis vector u; dct2d(b) = C @ b @ C.T.
DCT_MATRIX = _dct_matrix()
DCT_MATRIX.setflags(write=False)


def _zigzag_order(n=N):
    order = []
    for s in range(2 * n - 1):
        diag = [(r, s - r) for r in range(n) if 0 <= s - r < n]
        # Odd anti-diagonals run top-right to bottom-left, even ones the reverse.
        order.extend(diag if s % 2 else diag[::-1])
    return order


ZIGZAG = np.array(_zigzag_order(), dtype=np.int64)
ZIGZAG.setflags(write=False)
# Raster (row*8 + col) offset of each zig-zag position.
ZIGZAG_RASTER = ZIGZAG[:, 0] * N + ZIGZAG[:, 1]
ZIGZAG_RASTER.setflags(write=False)


def zigzag_index(z):
    """(row, col) of zig-zag position ``z`` in [0, 63]."""
    if not 0 <= z < N * N:
        raise ParameterError(f"zig-zag index {z} outside [0, 63]")
    r, c = ZIGZAG[z]
    return int(r), int(c)


def _check_block(b):
    b = np.asarray(b, dtype=np.float64)
    if b.shape != (N, N):
        raise ParameterError(f"expected an 8x8 block, got shape {b.shape}")
    return b


def dct2d(block):
    """Forward 2-D DCT of one 8x8 block (rows, then columns)."""
    b = _check_block(block)
    return (DCT_MATRIX @ b) @ DCT_MATRIX.T


def idct2d(coeffs):
    c = _check_block(coeffs)
    return (DCT_MATRIX.T @ c) @ DCT_MATRIX


def to_zigzag(coeffs):
    """Flatten an 8x8 coefficient block into zig-zag order."""
    return _check_block(coeffs).reshape(-1)[ZIGZAG_RASTER]


def from_zigzag(vec):
    vec = np.asarray(vec, dtype=np.float64)
    if vec.shape != (N * N,):
        raise ParameterError(f"expected 64 coefficients, got shape {vec.shape}")
    out = np.empty(N * N)
    out[ZIGZAG_RASTER] = vec
    return out.reshape(N, N)


def round_half_away(x):
    """Round to nearest integer, ties away from zero."""
    x = np.asarray(x, dtype=np.float64)
    return np.sign(x) * np.floor(np.abs(x) + 0.5)
