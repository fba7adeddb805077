import numpy as np
import pytest

from wbmark.synth import moving_objects_clip, random_payload
from wbmark.video_io import LumaSequence


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(scope="session")
def motion_clip():
    return moving_objects_clip(frames=16, width=64, height=64, seed=11)


@pytest.fixture(scope="session")
def payload32():
    return random_payload(32, seed=5, width=8)


def static_clip(frames=5, width=32, height=32, value=100):
    return LumaSequence.from_luma(np.full((frames, height, width), value, dtype=np.uint8))
