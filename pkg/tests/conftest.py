from __future__ import annotations

import pytest

from orscene.synth import apply_time_warp, load_script, random_warp, synth_procedure


@pytest.fixture(scope="session")
def demo_timeline():
    return synth_procedure(load_script("default"), seed=7)


@pytest.fixture(scope="session")
def warped_demo(demo_timeline):
    warp = random_warp(len(demo_timeline), seed=3)
    return apply_time_warp(demo_timeline, warp)
