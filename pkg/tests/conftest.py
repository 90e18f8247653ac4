import pytest

from binotm import synthetic
from binotm.image_io import HdrImage, LdrImage


@pytest.fixture(scope="session")
def window_scene() -> HdrImage:
    return synthetic.hdr_scene("window", 96, 72, seed=1)


@pytest.fixture(scope="session")
def scene_160() -> HdrImage:
    return synthetic.hdr_scene("window", 160, 120, seed=5)


def random_ldr(rng, height=16, width=16) -> LdrImage:
    return LdrImage(rng.random((height, width, 3)))


def random_hdr(rng, height=16, width=16, scale=100.0) -> HdrImage:
    return HdrImage(scale * rng.random((height, width, 3)) + 1e-4)
