"""
Tests for layout parsing and formatting
"""
import numpy as np
import pytest

from gaple.errors import EmptyGridError, HeaderError, OpenBorderError, RaggedRowError, UnknownSymbolError
from gaple.house.layout import format_layout, parse_layout
from gaple.models import FLOOR, WALL, CellKind

from .conftest import ROOM


def test_parse_corridor(corridor_layout):
    """Grid size, labels and cell codes come from the file"""
    assert corridor_layout.width == 7
    assert corridor_layout.height == 3
    assert corridor_layout.labels == {0: "background", 1: "television"}
    assert corridor_layout.cells[1, 5] == 1
    assert corridor_layout.cells[1, 1] == FLOOR
    assert corridor_layout.cells[0, 0] == WALL
    assert corridor_layout.kind(5, 1) is CellKind.OBJECT
    assert corridor_layout.kind(0, 0) is CellKind.WALL


def test_floor_cells_row_major(corridor_layout):
    """Floor cells are listed by row then column"""
    assert corridor_layout.floor_cells() == [(1, 1), (2, 1), (3, 1), (4, 1)]


def test_is_floor_out_of_bounds(corridor_layout):
    """Cells outside the grid are never floor"""
    assert not corridor_layout.is_floor(-1, 1)
    assert not corridor_layout.is_floor(7, 1)


def test_objects_found(room_layout):
    """Each object label forms one unique instance"""
    labels = sorted(obj.label_id for obj in room_layout.objects)
    assert labels == [1, 2]
    assert all(obj.unique_in_house for obj in room_layout.objects)
    assert room_layout.target_labels() == [1, 2]
    assert room_layout.label_id("sofa") == 2


def test_repeated_instances_not_targets():
    """A label with two separate instances is not a target"""
    text = "gaple-house v1\nS=sofa\n\n#####\n#S.S#\n#...#\n#####\n"
    layout = parse_layout(text)
    assert [obj.unique_in_house for obj in layout.objects] == [False, False]
    assert layout.target_labels() == []


def test_shared_legend_name_shares_id():
    """Two characters naming the same label map to one id"""
    text = "gaple-house v1\nS=sofa\nZ=sofa\n\n#####\n#S.Z#\n#####\n"
    layout = parse_layout(text)
    assert layout.labels == {0: "background", 1: "sofa"}
    assert layout.cells[1, 3] == 1


def test_missing_header():
    """First line must be the header"""
    with pytest.raises(HeaderError) as exc:
        parse_layout("#####\n#...#\n#####\n")
    assert exc.value.line == 1


def test_ragged_row():
    """Rows of different length name the offending line"""
    with pytest.raises(RaggedRowError) as exc:
        parse_layout("gaple-house v1\n\n#####\n#..#\n#####\n")
    assert exc.value.line == 4
    assert "row 2" in str(exc.value)


def test_unknown_symbol():
    """Characters missing from the legend are reported with line and column"""
    with pytest.raises(UnknownSymbolError) as exc:
        parse_layout("gaple-house v1\n\n#####\n#.X.#\n#####\n")
    assert (exc.value.line, exc.value.column) == (4, 3)


def test_open_border():
    """Floor on the border is rejected"""
    with pytest.raises(OpenBorderError) as exc:
        parse_layout("gaple-house v1\n\n#####\n....#\n#####\n")
    assert (exc.value.line, exc.value.column) == (4, 1)


def test_empty_grid():
    """A header without rows has no grid"""
    with pytest.raises(EmptyGridError):
        parse_layout("gaple-house v1\nT=television\n\n")


def test_format_is_inverse_of_parse():
    """A written layout parses back to the same cells and labels"""
    layout = parse_layout(ROOM)
    text = format_layout(layout)
    again = parse_layout(text)
    assert text.splitlines()[:3] == ["gaple-house v1", "A=television", "B=sofa"]
    assert np.array_equal(again.cells, layout.cells)
    assert again.labels == layout.labels
    assert format_layout(again) == text
