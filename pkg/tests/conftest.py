import numpy as np
import pytest

from ballastvision.image import GrayImage, RgbImage


def make_disk_field(h, w, centers, radius, bright=0.9, dark=0.1):
    """Bright disks on a dark field as a raw float array."""
    yy, xx = np.mgrid[0:h, 0:w]
    a = np.full((h, w), dark)
    for cy, cx in centers:
        a[(yy - cy) ** 2 + (xx - cx) ** 2 <= radius * radius] = bright
    return a


def gray_disks(h, w, centers, radius, bright=0.9, dark=0.1) -> GrayImage:
    return GrayImage(make_disk_field(h, w, centers, radius, bright, dark))


def rgb_disks(h, w, centers, radius, bright=0.9, dark=0.1) -> RgbImage:
    a = make_disk_field(h, w, centers, radius, bright, dark)
    return RgbImage(np.stack([a, a, a], axis=-1))


@pytest.fixture
def rng():
    return np.random.default_rng(20260809)
