from dataclasses import dataclass, field
from enum import Enum, IntEnum
from typing import Dict, List, Optional, Tuple

import numpy as np

CELL_SIZE = 0.2         # meters per grid cell
WALL = -1               # cell codes in HouseLayout.cells; >= 1 is an object label
FLOOR = 0
BACKGROUND = 0          # semantic label for walls, floor and ceiling


class CellKind(str, Enum):
    FLOOR = 'floor'
    WALL = 'wall'
    OBJECT = 'object'


class Heading(IntEnum):
    """Cardinal orientations, clockwise from north (y grows southwards)"""
    N = 0
    E = 1
    S = 2
    W = 3

    @property
    def vector(self) -> Tuple[int, int]:
        return _HEADING_VECTORS[self]

    def left(self) -> 'Heading':
        return Heading((self - 1) % 4)

    def right(self) -> 'Heading':
        return Heading((self + 1) % 4)


_HEADING_VECTORS = {
    Heading.N: (0, -1),
    Heading.E: (1, 0),
    Heading.S: (0, 1),
    Heading.W: (-1, 0),
}


class Action(IntEnum):
    """The six discrete actions; values are the policy's output indices"""
    MOVE_FORWARD = 0
    MOVE_BACKWARD = 1
    STRAFE_LEFT = 2
    STRAFE_RIGHT = 3
    ROTATE_LEFT = 4
    ROTATE_RIGHT = 5


class TerminalFlag(str, Enum):
    GOAL_REACHED = 'goal_reached'
    STEP_CAP_HIT = 'step_cap_hit'


@dataclass(frozen=True, order=True)
class Pose:
    x: int
    y: int
    heading: Heading

    def __str__(self) -> str:
        return f'({self.x},{self.y},{self.heading.name})'


@dataclass(frozen=True)
class ObjectInstance:
    """One connected group of cells sharing an object label"""
    label_id: int
    cells: Tuple[Tuple[int, int], ...]
    unique_in_house: bool


@dataclass(frozen=True, eq=False)
class HouseLayout:
    """
    Discrete house model

    cells is an int array indexed [y, x] holding WALL, FLOOR or an object label id.
    labels maps label ids to names; id 0 is always "background".
    """
    cells: np.ndarray
    labels: Dict[int, str]
    objects: Tuple[ObjectInstance, ...] = ()
    name: str = 'house'

    @property
    def width(self) -> int:
        return int(self.cells.shape[1])

    @property
    def height(self) -> int:
        return int(self.cells.shape[0])

    @property
    def cell_size(self) -> float:
        return CELL_SIZE

    def kind(self, x: int, y: int) -> CellKind:
        code = int(self.cells[y, x])
        if code == WALL:
            return CellKind.WALL
        if code == FLOOR:
            return CellKind.FLOOR
        return CellKind.OBJECT

    def is_floor(self, x: int, y: int) -> bool:
        if not (0 <= x < self.width and 0 <= y < self.height):
            return False
        return int(self.cells[y, x]) == FLOOR

    def floor_cells(self) -> List[Tuple[int, int]]:
        ys, xs = np.nonzero(self.cells == FLOOR)
        return sorted(zip(xs.tolist(), ys.tolist()), key=lambda c: (c[1], c[0]))

    def label_id(self, name: str) -> int:
        for label_id, label_name in self.labels.items():
            if label_name == name:
                return label_id
        raise KeyError(name)

    def target_labels(self) -> List[int]:
        """Labels of objects that have a single instance in this house"""
        return sorted({obj.label_id for obj in self.objects if obj.unique_in_house})


@dataclass(frozen=True, eq=False)
class RenderOutput:
    """One observation: arrays are indexed [row, column]"""
    semantic: np.ndarray    # int labels, (H, W)
    depth: np.ndarray       # meters in (0, max_range], (H, W)
    rgb: np.ndarray         # floats in [0, 1], (H, W, 3)
    max_range: float

    @property
    def width(self) -> int:
        return int(self.semantic.shape[1])

    @property
    def height(self) -> int:
        return int(self.semantic.shape[0])


@dataclass(frozen=True)
class StepRecord:
    """Action taken at pose; reward and area are observed after it"""
    index: int
    pose: Pose
    action: Action
    reward: float
    area: float


@dataclass
class EpisodeTrace:
    """Ordered per-step record of one episode"""
    pair_id: str
    start: Pose
    start_area: float
    records: List[StepRecord] = field(default_factory=list)
    terminal: Optional[TerminalFlag] = None

    @property
    def length(self) -> int:
        return len(self.records)

    @property
    def rewards(self) -> List[float]:
        return [r.reward for r in self.records]

    def to_csv(self) -> str:
        lines = ['index,x,y,heading,action,reward,area']
        for r in self.records:
            lines.append(f'{r.index},{r.pose.x},{r.pose.y},{r.pose.heading.name},{r.action.name},'
                         f'{r.reward!r},{r.area!r}')
        lines.append(f'# terminal={self.terminal.value if self.terminal else "none"}')
        return '\n'.join(lines) + '\n'
