"""
Procedural house generation

Rooms come from a binary space partition of the interior, are chained together
with L-shaped corridors, and single-cell objects are set against room walls
wherever doing so keeps every floor cell connected.
"""
import logging
import random
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy import ndimage

from ..errors import GenerationError
from ..models import BACKGROUND, FLOOR, WALL, HouseLayout
from .layout import find_objects

logger = logging.getLogger(__name__)

MAX_SIDE = 64
DEFAULT_LABELS = (
    'television', 'sofa', 'bed', 'fridge', 'toilet', 'bathtub', 'piano', 'desk',
    'plant', 'fireplace', 'dresser', 'sink',
)


@dataclass(frozen=True)
class HouseParams:
    width: int = 16
    height: int = 16
    rooms: int = 3
    min_room: int = 3
    max_room: int = 8
    objects: int = 5
    labels: Tuple[str, ...] = field(default=DEFAULT_LABELS)

    def validate(self) -> None:
        if not (5 <= self.width <= MAX_SIDE and 5 <= self.height <= MAX_SIDE):
            raise GenerationError(f'width and height must be within 5..{MAX_SIDE}')
        if self.rooms < 1 or self.min_room < 1 or self.max_room < self.min_room:
            raise GenerationError('need rooms >= 1 and 1 <= min_room <= max_room')
        if self.objects < 0:
            raise GenerationError('objects must be >= 0')
        if len(set(self.labels)) != len(self.labels):
            raise GenerationError('label pool contains duplicates')


@dataclass
class Room:
    x: int
    y: int
    width: int
    height: int

    @property
    def center(self) -> Tuple[int, int]:
        return self.x + self.width // 2, self.y + self.height // 2

    def cells(self) -> List[Tuple[int, int]]:
        return [(x, y) for y in range(self.y, self.y + self.height) for x in range(self.x, self.x + self.width)]


def generate_house(seed: int, params: Optional[HouseParams] = None, name: Optional[str] = None) -> HouseLayout:
    """
    Generate a walled, fully connected house

    Label ids follow the pool order (pool[i] has id i + 1) in every house, so
    houses built from the same pool share one label space.

    Raises:
        GenerationError: if the requested rooms cannot fit
    """
    params = params or HouseParams()
    params.validate()
    rng = random.Random(seed)

    rooms = _partition(rng, params)
    cells = np.full((params.height, params.width), WALL, dtype=np.int16)
    for room in rooms:
        for x, y in room.cells():
            cells[y, x] = FLOOR
    for prev, cur in zip(rooms, rooms[1:]):
        _carve_corridor(rng, cells, prev.center, cur.center)

    room_cells = {c for room in rooms for c in room.cells()}
    placed = _place_objects(rng, cells, room_cells, params)
    logger.debug('house seed=%d: %d rooms, %d objects', seed, len(rooms), placed)

    labels = {BACKGROUND: 'background'}
    labels.update({i + 1: label for i, label in enumerate(params.labels)})
    return HouseLayout(cells=cells, labels=labels, objects=find_objects(cells), name=name or f'house_{seed}')


def _partition(rng: random.Random, params: HouseParams) -> List[Room]:
    # leaves cover interior cells; each keeps one cell on its right/bottom for the wall
    leaves = [(1, 1, params.width - 2, params.height - 2)]
    need = params.min_room + 1
    while len(leaves) < params.rooms:
        splittable = [leaf for leaf in leaves if leaf[2] >= 2 * need or leaf[3] >= 2 * need]
        if not splittable:
            raise GenerationError(f'{params.rooms} rooms of size >= {params.min_room} do not fit '
                                  f'in {params.width}x{params.height}')
        leaf = max(splittable, key=lambda r: (r[2] * r[3], -r[1], -r[0]))
        leaves.remove(leaf)
        x, y, w, h = leaf
        vertical = w >= h if (w >= 2 * need and h >= 2 * need) else w >= 2 * need
        if vertical:
            cut = rng.randint(need, w - need)
            leaves += [(x, y, cut, h), (x + cut, y, w - cut, h)]
        else:
            cut = rng.randint(need, h - need)
            leaves += [(x, y, w, cut), (x, y + cut, w, h - cut)]

    rooms = []
    for x, y, w, h in sorted(leaves, key=lambda r: (r[1], r[0])):
        max_w = max(1, min(params.max_room, w - 1 if w > params.min_room else w))
        max_h = max(1, min(params.max_room, h - 1 if h > params.min_room else h))
        if max_w < params.min_room or max_h < params.min_room:
            raise GenerationError(f'room of size {params.min_room} does not fit in a {w}x{h} region')
        rw = rng.randint(params.min_room, max_w)
        rh = rng.randint(params.min_room, max_h)
        rooms.append(Room(x + rng.randint(0, max_w - rw), y + rng.randint(0, max_h - rh), rw, rh))
    return rooms


def _carve_corridor(rng: random.Random, cells: np.ndarray, a: Tuple[int, int], b: Tuple[int, int]) -> None:
    (x1, y1), (x2, y2) = a, b
    if rng.random() < 0.5:
        path = [(x, y1) for x in _span(x1, x2)] + [(x2, y) for y in _span(y1, y2)]
    else:
        path = [(x1, y) for y in _span(y1, y2)] + [(x, y2) for x in _span(x1, x2)]
    for x, y in path:
        cells[y, x] = FLOOR


def _span(a: int, b: int) -> range:
    return range(a, b + 1) if a <= b else range(a, b - 1, -1)


def _place_objects(rng: random.Random, cells: np.ndarray, room_cells: set, params: HouseParams) -> int:
    pool: Sequence[int] = list(range(1, len(params.labels) + 1))
    wanted = rng.sample(pool, min(params.objects, len(pool)))
    placed: List[Tuple[int, int]] = []
    for label_id in wanted:
        candidates = [(x, y) for (x, y) in sorted(room_cells, key=lambda c: (c[1], c[0]))
                      if cells[y, x] == FLOOR and _touches_wall(cells, x, y)]
        rng.shuffle(candidates)
        for x, y in candidates:
            cells[y, x] = label_id
            if _floor_connected(cells) and all(_has_floor_neighbour(cells, ox, oy) for ox, oy in placed + [(x, y)]):
                placed.append((x, y))
                break
            cells[y, x] = FLOOR
        else:
            logger.debug('no room left for label %d', label_id)
    return len(placed)


def _neighbours(x: int, y: int) -> List[Tuple[int, int]]:
    return [(x + 1, y), (x - 1, y), (x, y + 1), (x, y - 1)]


def _touches_wall(cells: np.ndarray, x: int, y: int) -> bool:
    return any(cells[ny, nx] == WALL for nx, ny in _neighbours(x, y))


def _has_floor_neighbour(cells: np.ndarray, x: int, y: int) -> bool:
    return any(cells[ny, nx] == FLOOR for nx, ny in _neighbours(x, y))


def _floor_connected(cells: np.ndarray) -> bool:
    _, count = ndimage.label(cells == FLOOR)
    return count <= 1
