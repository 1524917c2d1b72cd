"""Shared fixtures: every gallery system is built once per session."""
import numpy as np
import pytest

import config
from services import gallery, lsystem

GALLERY_NAMES = sorted(gallery.GALLERY)


@pytest.fixture(scope="session")
def systems():
    return {name: gallery.system(name) for name in GALLERY_NAMES}


@pytest.fixture(scope="session", params=GALLERY_NAMES)
def system(request, systems):
    return systems[request.param]


@pytest.fixture(scope="session")
def b2_system(systems):
    return systems["trivial-b2"]


@pytest.fixture(scope="session")
def t1_auto():
    """Ad(diag(1, -1)) on M_2 over T_1."""
    return lsystem.build_system(gallery.zk_crossed(1))


@pytest.fixture
def rng():
    return np.random.default_rng(config.SEED)
