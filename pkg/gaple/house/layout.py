"""Layout file reading and writing (gaple-house v1)"""
import re
from typing import Dict, List, Tuple

import numpy as np
from scipy import ndimage

from ..errors import (
    EmptyGridError,
    HeaderError,
    LayoutParseError,
    OpenBorderError,
    RaggedRowError,
    UnknownSymbolError,
)
from ..models import BACKGROUND, FLOOR, WALL, HouseLayout, ObjectInstance

HEADER = 'gaple-house v1'
LEGEND_CHARS = 'ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789'
_LEGEND_LINE = re.compile(r'^(?P<char>[^#.=\s])=(?P<name>\S.*)$')


def parse_layout(text: str, name: str = 'house') -> HouseLayout:
    """
    Parse layout file contents

    Args:
        text: file contents; header, legend lines `c=label`, a blank line, grid rows
        name: identifier stored on the layout

    Returns:
        HouseLayout with label ids assigned in legend order (first new name gets 1)

    Raises:
        LayoutParseError subclass naming the offending line and column
    """
    lines = text.splitlines()
    if not lines or lines[0].strip() != HEADER:
        raise HeaderError(f'expected header "{HEADER}"', line=1)

    legend: Dict[str, int] = {}
    labels: Dict[int, str] = {BACKGROUND: 'background'}
    idx = 1
    while idx < len(lines):
        match = _LEGEND_LINE.match(lines[idx].strip())
        if not match:
            break
        label_name = match.group('name').strip()
        label_id = next((k for k, v in labels.items() if v == label_name and k != BACKGROUND), None)
        if label_id is None:
            label_id = len(labels)
            labels[label_id] = label_name
        legend[match.group('char')] = label_id
        idx += 1

    while idx < len(lines) and not lines[idx].strip():
        idx += 1

    rows: List[Tuple[int, str]] = []
    for line_no in range(idx, len(lines)):
        row = lines[line_no].rstrip('\r\n')
        if not row.strip():
            break
        rows.append((line_no + 1, row))
    if not rows:
        raise EmptyGridError('layout has no grid rows', line=idx + 1)

    width = len(rows[0][1])
    cells = np.full((len(rows), width), WALL, dtype=np.int16)
    for row_idx, (line_no, row) in enumerate(rows):
        if len(row) != width:
            raise RaggedRowError(f'row {row_idx + 1} has {len(row)} cells, expected {width}',
                                 line=line_no, column=min(len(row), width) + 1)
        for col, char in enumerate(row):
            if char == '#':
                code = WALL
            elif char == '.':
                code = FLOOR
            elif char in legend:
                code = legend[char]
            else:
                raise UnknownSymbolError(f'unknown symbol {char!r}', line=line_no, column=col + 1)
            cells[row_idx, col] = code

    height = len(rows)
    for row_idx, (line_no, row) in enumerate(rows):
        for col in range(width):
            on_border = row_idx in (0, height - 1) or col in (0, width - 1)
            if on_border and cells[row_idx, col] != WALL:
                raise OpenBorderError('border cell is not a wall', line=line_no, column=col + 1)

    return HouseLayout(cells=cells, labels=labels, objects=find_objects(cells), name=name)


def find_objects(cells: np.ndarray) -> Tuple[ObjectInstance, ...]:
    """Split object cells into 4-connected instances, one label each"""
    found: List[Tuple[int, Tuple[Tuple[int, int], ...]]] = []
    for label_id in sorted(int(v) for v in np.unique(cells) if v > FLOOR):
        components, count = ndimage.label(cells == label_id)
        for component in range(1, count + 1):
            ys, xs = np.nonzero(components == component)
            found.append((label_id, tuple(sorted(zip(xs.tolist(), ys.tolist())))))

    counts: Dict[int, int] = {}
    for label_id, _ in found:
        counts[label_id] = counts.get(label_id, 0) + 1
    return tuple(ObjectInstance(label_id=lid, cells=c, unique_in_house=counts[lid] == 1) for lid, c in found)


def format_layout(layout: HouseLayout) -> str:
    """Inverse of parse_layout for layouts whose label ids are 1..n"""
    label_ids = sorted(k for k in layout.labels if k != BACKGROUND)
    if label_ids != list(range(1, len(label_ids) + 1)):
        raise LayoutParseError('label ids must be contiguous from 1 to be written')
    if len(label_ids) > len(LEGEND_CHARS):
        raise LayoutParseError(f'at most {len(LEGEND_CHARS)} labels can be written')

    lines = [HEADER]
    lines += [f'{LEGEND_CHARS[lid - 1]}={layout.labels[lid]}' for lid in label_ids]
    lines.append('')
    for y in range(layout.height):
        row = []
        for x in range(layout.width):
            code = int(layout.cells[y, x])
            row.append('#' if code == WALL else '.' if code == FLOOR else LEGEND_CHARS[code - 1])
        lines.append(''.join(row))
    return '\n'.join(lines) + '\n'
