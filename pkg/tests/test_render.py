"""
Tests for the raycast renderer and image writers
"""
import numpy as np
import pytest

from gaple.errors import DimensionError
from gaple.house.pgm import encode_pgm, write_render
from gaple.house.render import RenderConfig, label_color, render
from gaple.models import Heading, Pose


def test_frame_shapes_and_ranges(room_layout, small_cfg):
    """Images match the config and stay in range"""
    frame = render(room_layout, Pose(3, 3, Heading.N), small_cfg)
    assert frame.semantic.shape == (32, 32)
    assert frame.depth.shape == (32, 32)
    assert frame.rgb.shape == (32, 32, 3)
    assert np.all(frame.depth > 0) and np.all(frame.depth <= small_cfg.max_range)
    assert np.all((frame.rgb >= 0) & (frame.rgb <= 1))


def test_adjacent_wall_depth(corridor_layout, small_cfg):
    """A wall one cell ahead reads 0.2 m and is background"""
    frame = render(corridor_layout, Pose(1, 1, Heading.W), small_cfg)
    assert frame.depth[16, 16] == pytest.approx(0.2)
    assert np.all(frame.semantic == 0)


def test_object_ahead_is_labelled(corridor_layout, small_cfg):
    """The television fills the centre of the view when adjacent"""
    frame = render(corridor_layout, Pose(4, 1, Heading.E), small_cfg)
    assert frame.semantic[16, 16] == 1
    assert frame.depth[16, 16] == pytest.approx(0.2)


def test_nearer_object_is_taller(corridor_layout, small_cfg):
    """Band height shrinks with distance"""
    near = render(corridor_layout, Pose(4, 1, Heading.E), small_cfg)
    far = render(corridor_layout, Pose(1, 1, Heading.E), small_cfg)
    assert (near.semantic[:, 16] == 1).sum() == 32
    assert (far.semantic[:, 16] == 1).sum() == 8
    assert far.depth[16, 16] == pytest.approx(0.8)


def test_render_is_pure(room_layout, small_cfg):
    """Same pose, same images"""
    a = render(room_layout, Pose(2, 2, Heading.E), small_cfg)
    b = render(room_layout, Pose(2, 2, Heading.E), small_cfg)
    assert np.array_equal(a.semantic, b.semantic)
    assert np.array_equal(a.depth, b.depth)
    assert np.array_equal(a.rgb, b.rgb)


def test_too_small_render(room_layout):
    """Renders below 8x8 are rejected"""
    with pytest.raises(DimensionError):
        render(room_layout, Pose(2, 2, Heading.E), RenderConfig(width=4, height=4))


def test_label_colors_differ():
    """Object labels get distinct fixed colours"""
    assert label_color(1) == label_color(1)
    assert label_color(1) != label_color(2)


def test_pgm_header_and_size():
    """16-bit images are written big-endian after a P5 header"""
    data = encode_pgm(np.array([[1, 256]]), 65535)
    assert data == b"P5\n2 1\n65535\n" + b"\x00\x01\x01\x00"


def test_write_render(tmp_path, room_layout, small_cfg):
    """Semantic, depth and RGB files are written"""
    frame = render(room_layout, Pose(3, 3, Heading.N), small_cfg)
    paths = write_render(frame, tmp_path, stem="view")
    assert paths["semantic"].read_bytes().startswith(b"P5\n32 32\n255\n")
    depth = paths["depth"].read_bytes()
    assert depth.startswith(b"P5\n32 32\n65535\n")
    assert len(depth) == len(b"P5\n32 32\n65535\n") + 32 * 32 * 2
    assert paths["rgb"].read_bytes().startswith(b"P6\n32 32\n255\n")


def test_grazing_wall_hits_stay_inside_their_cell(corridor_layout, small_cfg):
    """Side walls seen at a shallow angle never read deeper than the television ending the corridor"""
    frame = render(corridor_layout, Pose(1, 1, Heading.E), small_cfg)
    horizon = frame.depth[16]
    assert np.all(horizon <= 0.8 + 1e-9)
    # column 18 grazes the south wall of the last corridor cell, whose far edge is 3.5 cells ahead
    assert frame.semantic[16, 18] == 0
    assert horizon[18] == pytest.approx(0.7)
