"""Block-level inner loops, each in a numba and a pure-numpy flavour.

The public names at the bottom dispatch on ``_accel.USE_NUMBA``.  Both
flavours stay importable (``*_nb`` / ``*_np``) so tests can cross-check them
and ``benchmarks/bench_kernels.py`` can time them side by side.

Conventions shared by every kernel:

* ``luma`` is a C-contiguous ``(frames, height, width)`` uint8 array;
* ``refs`` is an ``(m, 3)`` int64 array of ``(frame, block_row, block_col)``;
* ``pos1``/``pos2`` are raster offsets (``row*8 + col``) inside the block;
* ``cmat`` is the orthonormal 8x8 DCT matrix (``dct = C @ b @ C.T``).
"""

import numpy as np

from ._accel import USE_NUMBA, njit

# --------------------------------------------------------------------------- numba


@njit
def _round_half_away_nb(x):
    if x < 0.0:
        return -np.floor(-x + 0.5)
    return np.floor(x + 0.5)


@njit
def _fdct_nb(blk, cmat, tmp, out):
    for u in range(8):
        for x in range(8):
            s = 0.0
            for y in range(8):
                s += cmat[u, y] * blk[y, x]
            tmp[u, x] = s
    for u in range(8):
        for v in range(8):
            s = 0.0
            for x in range(8):
                s += tmp[u, x] * cmat[v, x]
            out[u, v] = s


@njit
def _idct_nb(coef, cmat, tmp, out):
    for y in range(8):
        for v in range(8):
            s = 0.0
            for u in range(8):
                s += cmat[u, y] * coef[u, v]
            tmp[y, v] = s
    for y in range(8):
        for x in range(8):
            s = 0.0
            for v in range(8):
                s += tmp[y, v] * cmat[v, x]
            out[y, x] = s


@njit
def _store_block_nb(luma, k, y0, x0, pix):
    for y in range(8):
        for x in range(8):
            v = _round_half_away_nb(pix[y, x])
            if v < 0.0:
                v = 0.0
            elif v > 255.0:
                v = 255.0
            luma[k, y0 + y, x0 + x] = np.uint8(v)


@njit
def block_energies_nb(luma):
    n, h, w = luma.shape
    nbr = h // 8
    nbc = w // 8
    out = np.zeros((max(n - 2, 0), nbr, nbc), dtype=np.int64)
    for k in range(1, n - 1):
        for br in range(nbr):
            for bc in range(nbc):
                acc = 0
                for y in range(br * 8, br * 8 + 8):
                    for x in range(bc * 8, bc * 8 + 8):
                        cur = np.int64(luma[k, y, x])
                        dp = cur - np.int64(luma[k - 1, y, x])
                        dn = cur - np.int64(luma[k + 1, y, x])
                        acc += dp * dp + dn * dn
                out[k - 1, br, bc] = acc
    return out


@njit
def embed_blocks_nb(luma, refs, pos1, pos2, bits, beta, cmat):
    blk = np.empty((8, 8))
    tmp = np.empty((8, 8))
    coef = np.empty((8, 8))
    for j in range(refs.shape[0]):
        k, y0, x0 = refs[j, 0], refs[j, 1] * 8, refs[j, 2] * 8
        for y in range(8):
            for x in range(8):
                blk[y, x] = luma[k, y0 + y, x0 + x]
        _fdct_nb(blk, cmat, tmp, coef)
        flat = coef.reshape(64)
        c1 = flat[pos1[j]]
        a1 = abs(c1)
        a2 = abs(flat[pos2[j]])
        if bits[j]:
            mag = max(a1, a2) + beta
        else:
            mag = max(min(a1, a2) - beta, 0.0)
        flat[pos1[j]] = -mag if c1 < 0.0 else mag
        _idct_nb(coef, cmat, tmp, blk)
        _store_block_nb(luma, k, y0, x0, blk)


@njit
def extract_blocks_nb(luma, refs, pos1, pos2, cmat):
    out = np.zeros(refs.shape[0], dtype=np.uint8)
    blk = np.empty((8, 8))
    tmp = np.empty((8, 8))
    coef = np.empty((8, 8))
    for j in range(refs.shape[0]):
        k, y0, x0 = refs[j, 0], refs[j, 1] * 8, refs[j, 2] * 8
        for y in range(8):
            for x in range(8):
                blk[y, x] = luma[k, y0 + y, x0 + x]
        _fdct_nb(blk, cmat, tmp, coef)
        flat = coef.reshape(64)
        if abs(flat[pos1[j]]) > abs(flat[pos2[j]]):
            out[j] = 1
    return out


@njit
def requant_luma_nb(luma, steps, cmat):
    out = luma.copy()
    n, h, w = luma.shape
    blk = np.empty((8, 8))
    tmp = np.empty((8, 8))
    coef = np.empty((8, 8))
    for k in range(n):
        for y0 in range(0, h - 7, 8):
            for x0 in range(0, w - 7, 8):
                for y in range(8):
                    for x in range(8):
                        blk[y, x] = luma[k, y0 + y, x0 + x]
                _fdct_nb(blk, cmat, tmp, coef)
                for u in range(8):
                    for v in range(8):
                        q = steps[u, v]
                        coef[u, v] = _round_half_away_nb(coef[u, v] / q) * q
                _idct_nb(coef, cmat, tmp, blk)
                _store_block_nb(out, k, y0, x0, blk)
    return out


# --------------------------------------------------------------------------- numpy


def _round_half_away_np(x):
    return np.sign(x) * np.floor(np.abs(x) + 0.5)


def _block_index(refs):
    off = np.arange(8)
    k = refs[:, 0][:, None, None]
    rows = (refs[:, 1] * 8)[:, None, None] + off[None, :, None]
    cols = (refs[:, 2] * 8)[:, None, None] + off[None, None, :]
    return k, rows, cols


def _to_pixels(x):
    return np.clip(_round_half_away_np(x), 0, 255).astype(np.uint8)


def block_energies_np(luma):
    n, h, w = luma.shape
    nbr, nbc = h // 8, w // 8
    if n < 3:
        return np.zeros((max(n - 2, 0), nbr, nbc), dtype=np.int64)
    x = luma[:, : nbr * 8, : nbc * 8].astype(np.int64)
    dp = x[1:-1] - x[:-2]
    dn = x[1:-1] - x[2:]
    e = dp * dp + dn * dn
    return e.reshape(n - 2, nbr, 8, nbc, 8).sum(axis=(2, 4))


def embed_blocks_np(luma, refs, pos1, pos2, bits, beta, cmat):
    if refs.shape[0] == 0:
        return
    idx = _block_index(refs)
    blocks = luma[idx].astype(np.float64)
    coef = (cmat @ blocks @ cmat.T).reshape(-1, 64)
    j = np.arange(refs.shape[0])
    c1 = coef[j, pos1]
    a1, a2 = np.abs(c1), np.abs(coef[j, pos2])
    mag = np.where(
        bits.astype(bool), np.maximum(a1, a2) + beta, np.maximum(np.minimum(a1, a2) - beta, 0.0)
    )
    coef[j, pos1] = np.where(c1 < 0.0, -mag, mag)
    pix = cmat.T @ coef.reshape(-1, 8, 8) @ cmat
    luma[idx] = _to_pixels(pix)


def extract_blocks_np(luma, refs, pos1, pos2, cmat):
    if refs.shape[0] == 0:
        return np.zeros(0, dtype=np.uint8)
    blocks = luma[_block_index(refs)].astype(np.float64)
    coef = (cmat @ blocks @ cmat.T).reshape(-1, 64)
    j = np.arange(refs.shape[0])
    return (np.abs(coef[j, pos1]) > np.abs(coef[j, pos2])).astype(np.uint8)


def requant_luma_np(luma, steps, cmat):
    out = luma.copy()
    n, h, w = luma.shape
    nbr, nbc = h // 8, w // 8
    for k in range(n):
        x = luma[k, : nbr * 8, : nbc * 8].astype(np.float64)
        blocks = x.reshape(nbr, 8, nbc, 8).transpose(0, 2, 1, 3)
        coef = cmat @ blocks @ cmat.T
        coef = _round_half_away_np(coef / steps) * steps
        pix = (cmat.T @ coef @ cmat).transpose(0, 2, 1, 3).reshape(nbr * 8, nbc * 8)
        out[k, : nbr * 8, : nbc * 8] = _to_pixels(pix)
    return out


# --------------------------------------------------------------------------- dispatch

if USE_NUMBA:
    block_energies = block_energies_nb
    embed_blocks = embed_blocks_nb
    extract_blocks = extract_blocks_nb
    requant_luma = requant_luma_nb
else:
    block_energies = block_energies_np
    embed_blocks = embed_blocks_np
    extract_blocks = extract_blocks_np
    requant_luma = requant_luma_np
