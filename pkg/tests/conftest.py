# tests/conftest.py

import os

# Keep test runs off the rotating log files and on a single worker.
os.environ.setdefault("LOCSCALE_LOG_TO_FILE", "0")
os.environ.setdefault("LOCSCALE_THREADS", "1")

import pytest

from locscale.scalespace.grid import ScaleGrid
from locscale.synth.fixtures import FixtureKind, FixtureSpec, generate


@pytest.fixture
def octave_grid():
    """Base-2 grid from t = 1/4096 to t = 4, eight steps per octave."""
    return ScaleGrid.from_t_range(2.0, 1.0 / 4096, 4.0, per_octave=8)


@pytest.fixture
def sine_field():
    def make(m: int = 1, h: float = 1.0 / 128):
        return generate(FixtureSpec(kind=FixtureKind.SINE_SIGNAL, m=m, h=h)).data
    return make


@pytest.fixture
def tent_graph():
    def make(slope: float = 1.0, teeth: int = 4, h: float = 1.0 / 256):
        return generate(FixtureSpec(kind=FixtureKind.TENT_GRAPH, slope=slope, teeth=teeth, h=h)).data
    return make


@pytest.fixture
def circle():
    def make(radius: float = 1.0, samples: int = 256):
        return generate(FixtureSpec(kind=FixtureKind.CIRCLE, radius=radius, samples=samples)).data
    return make

