"""Deterministic synthetic test clips: textured objects moving over a textured backdrop."""

import numpy as np

from .video_io import LumaSequence


def _texture(rng, h, w, coarse=8, grain=12.0, lo=40, hi=215):
    ch, cw = -(-h // coarse) + 1, -(-w // coarse) + 1
    base = rng.uniform(lo, hi, size=(ch, cw))
    # Bilinear upsampling of the coarse lattice gives smooth structure.
    yy = np.linspace(0, ch - 1, h, endpoint=False)
    xx = np.linspace(0, cw - 1, w, endpoint=False)
    y0, x0 = yy.astype(int), xx.astype(int)
    fy, fx = (yy - y0)[:, None], (xx - x0)[None, :]
    smooth = (
        base[y0][:, x0] * (1 - fy) * (1 - fx)
        + base[y0 + 1][:, x0] * fy * (1 - fx)
        + base[y0][:, x0 + 1] * (1 - fy) * fx
        + base[y0 + 1][:, x0 + 1] * fy * fx
    )
    return smooth + rng.normal(0.0, grain, size=(h, w))


def moving_objects_clip(
    frames=16,
    width=64,
    height=64,
    seed=0,
    objects=3,
    size=(12, 28),
    speed=4.0,
    sensor_noise=0.0,
    fps=(30, 1),
):
    """Clip with ``objects`` textured rectangles bouncing around a static scene."""
    rng = np.random.default_rng(seed)
    bg = _texture(rng, height, width)
    sprites = []
    for _ in range(objects):
        sh, sw = rng.integers(size[0], size[1] + 1, size=2)
        sh, sw = min(sh, height - 1), min(sw, width - 1)
        tex = _texture(rng, sh, sw, coarse=4, grain=20.0)
        pos = rng.uniform([0, 0], [height - sh, width - sw])
        ang = rng.uniform(0, 2 * np.pi)
        vel = speed * np.array([np.sin(ang), np.cos(ang)])
        sprites.append([tex, pos, vel])

    luma = np.empty((frames, height, width), dtype=np.uint8)
    for k in range(frames):
        img = bg.copy()
        for spr in sprites:
            tex, pos, vel = spr
            sh, sw = tex.shape
            y, x = int(round(pos[0])), int(round(pos[1]))
            img[y:y + sh, x:x + sw] = tex
            pos += vel
            for d, lim in ((0, height - sh), (1, width - sw)):
                if pos[d] < 0 or pos[d] > lim:
                    vel[d] = -vel[d]
                    pos[d] = min(max(pos[d], 0), lim)
        if sensor_noise:
            img = img + rng.normal(0.0, sensor_noise, size=img.shape)
        luma[k] = np.clip(np.rint(img), 0, 255).astype(np.uint8)
    return LumaSequence.from_luma(luma, fps=fps)


def random_payload(length, seed=0, width=None):
    from .video_io import Payload

    rng = np.random.default_rng(seed)
    width = width or length
    return Payload(rng.integers(0, 2, size=length, dtype=np.uint8), width, length // width)
