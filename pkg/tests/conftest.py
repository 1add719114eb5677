"""
Pytest configuration and shared fixtures for testing
"""
import numpy as np
import pytest

from gaple.house.generate import HouseParams, generate_house
from gaple.house.layout import parse_layout
from gaple.house.render import RenderConfig
from gaple.state import StateTensor
from gaple.training.tasks import build_pair

CORRIDOR = """gaple-house v1
T=television

#######
#....T#
#######
"""

ROOM = """gaple-house v1
T=television
S=sofa

#######
#....T#
#.....#
#.....#
#.....#
#S....#
#######
"""

SPLIT = """gaple-house v1

#######
#..#..#
#######
"""


@pytest.fixture(name="corridor_layout")
def corridor_layout_fixture():
    """One-cell-high corridor ending at a television"""
    return parse_layout(CORRIDOR, name="corridor")


@pytest.fixture(name="room_layout")
def room_layout_fixture():
    """Open 5x5 room with a television and a sofa in opposite corners"""
    return parse_layout(ROOM, name="room")


@pytest.fixture(name="split_layout")
def split_layout_fixture():
    """Two floor pockets separated by a wall"""
    return parse_layout(SPLIT, name="split")


@pytest.fixture(name="small_cfg")
def small_cfg_fixture():
    """Small render size keeping tests fast"""
    return RenderConfig(width=32, height=32)


@pytest.fixture(name="room_pair")
def room_pair_fixture(room_layout, small_cfg):
    """Television task in the open room"""
    return build_pair(room_layout, room_layout.label_id("television"), small_cfg)


@pytest.fixture(name="sofa_pair")
def sofa_pair_fixture(room_layout, small_cfg):
    """Sofa task in the open room"""
    return build_pair(room_layout, room_layout.label_id("sofa"), small_cfg)


@pytest.fixture(name="small_house_params")
def small_house_params_fixture():
    """11x11 house with two rooms"""
    return HouseParams(width=11, height=11, rooms=2, min_room=3, max_room=5, objects=3)


@pytest.fixture(name="small_house")
def small_house_fixture(small_house_params):
    """Generated 11x11 house"""
    return generate_house(7, small_house_params)


@pytest.fixture(name="rng")
def rng_fixture():
    """Seeded generator"""
    return np.random.default_rng(1234)


def random_state(rng: np.random.Generator) -> StateTensor:
    return StateTensor(mask10=(rng.random((10, 10)) < 0.3).astype(float), depth10=rng.random((10, 10)))


@pytest.fixture(name="state_factory")
def state_factory_fixture():
    """Builds random policy states from a generator"""
    return random_state
