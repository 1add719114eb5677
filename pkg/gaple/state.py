"""
Policy state representation and reward

The target's label turns a semantic image into a binary attention mask. The
mask and a second channel (normalized depth, or grayscale for the appearance
ablation) are block-averaged to 10x10 to form the policy input, and the
fraction of image covered by the mask drives both reward and goal detection.
"""
from dataclasses import dataclass, replace
from typing import Dict, FrozenSet, Iterable, NamedTuple, Optional, Sequence

import numpy as np

from .errors import DimensionError, TaskInfeasibleError
from .house.motion import reachable_poses
from .house.render import RenderConfig, render
from .models import HouseLayout, Pose, RenderOutput

STATE_SIDE = 10
GOAL_RANK = 5
CHANNELS = ('depth', 'gray')


@dataclass(frozen=True, eq=False)
class AttentionMask:
    mask: np.ndarray    # uint8 (H, W), 1 where the target's label is seen

    @property
    def width(self) -> int:
        return int(self.mask.shape[1])

    @property
    def height(self) -> int:
        return int(self.mask.shape[0])


@dataclass(frozen=True, eq=False)
class StateTensor:
    mask10: np.ndarray
    depth10: np.ndarray     # second channel; grayscale when channel == 'gray'
    channel: str = 'depth'

    def vector(self) -> np.ndarray:
        """Flattened mask then second channel (200 values)"""
        return np.concatenate([self.mask10.ravel(), self.depth10.ravel()])


@dataclass(frozen=True)
class GoalSpec:
    target_label: int
    area_threshold: float
    goal_poses: FrozenSet[Pose]


@dataclass(frozen=True)
class RewardTracker:
    running_max: float
    gamma: float = 0.99


class PoseObservation(NamedTuple):
    state: StateTensor
    area: float


def attention_mask(semantic: np.ndarray, target_label: int) -> AttentionMask:
    return AttentionMask(mask=(np.asarray(semantic) == target_label).astype(np.uint8))


def attention_area(mask: AttentionMask) -> float:
    """Fraction of pixels set in the mask"""
    return float(mask.mask.sum()) / float(mask.mask.size)


def _bin_edges(n: int, out: int) -> np.ndarray:
    return np.array([(b * n) // out for b in range(out)])


def downsample(grid: np.ndarray, out: int = STATE_SIDE) -> np.ndarray:
    """
    Block-average pooling to out x out

    Bin b along an axis of length n covers indices floor(b*n/out) through
    floor((b+1)*n/out) - 1.
    """
    grid = np.asarray(grid, dtype=np.float64)
    if grid.ndim != 2 or grid.shape[0] < out or grid.shape[1] < out:
        raise DimensionError(f'cannot downsample {grid.shape} to {out}x{out}')
    rows, cols = grid.shape
    row_edges, col_edges = _bin_edges(rows, out), _bin_edges(cols, out)
    sums = np.add.reduceat(np.add.reduceat(grid, row_edges, axis=0), col_edges, axis=1)
    row_counts = np.diff(np.append(row_edges, rows))
    col_counts = np.diff(np.append(col_edges, cols))
    return sums / np.outer(row_counts, col_counts)


def grayscale(rgb: np.ndarray) -> np.ndarray:
    return np.asarray(rgb, dtype=np.float64) @ np.array([0.299, 0.587, 0.114])


def make_state(frame: RenderOutput, target_label: int, max_range: float, channel: str = 'depth') -> StateTensor:
    mask10 = downsample(attention_mask(frame.semantic, target_label).mask)
    if channel == 'depth':
        second = downsample(np.clip(frame.depth / max_range, 0.0, 1.0))
    elif channel == 'gray':
        second = downsample(grayscale(frame.rgb))
    else:
        raise ValueError(f'unknown state channel {channel!r}, expected one of {CHANNELS}')
    return StateTensor(mask10=mask10, depth10=second, channel=channel)


def survey(layout: HouseLayout, target_label: int, cfg: RenderConfig,
           channel: str = 'depth') -> Dict[Pose, PoseObservation]:
    """Ground-truth state and attention area at every reachable pose"""
    observations = {}
    for pose in sorted(reachable_poses(layout)):
        frame = render(layout, pose, cfg)
        area = attention_area(attention_mask(frame.semantic, target_label))
        observations[pose] = PoseObservation(make_state(frame, target_label, cfg.max_range, channel), area)
    return observations


def goal_threshold(areas: Iterable[float]) -> float:
    """Fifth largest area counting ties, or the smallest positive area if fewer poses see the target"""
    positive = sorted((a for a in areas if a > 0.0), reverse=True)
    if not positive:
        raise TaskInfeasibleError('target is not visible from any pose')
    if len(positive) < GOAL_RANK:
        return positive[-1]
    return positive[GOAL_RANK - 1]


def compute_goal_spec(layout: HouseLayout, target_label: int, cfg: RenderConfig,
                      observations: Optional[Dict[Pose, PoseObservation]] = None) -> GoalSpec:
    """
    Goal poses for a target: every pose whose attention area reaches the threshold

    Raises:
        TaskInfeasibleError: if no pose sees the target
    """
    if observations is None:
        observations = survey(layout, target_label, cfg)
    try:
        threshold = goal_threshold(obs.area for obs in observations.values())
    except TaskInfeasibleError:
        name = layout.labels.get(target_label, str(target_label))
        raise TaskInfeasibleError(f'target {name!r} is not visible from any pose in {layout.name}')
    goals = frozenset(p for p, obs in observations.items() if obs.area >= threshold)
    return GoalSpec(target_label=target_label, area_threshold=threshold, goal_poses=goals)


def reward_step(tracker: RewardTracker, a_t: float) -> tuple[float, RewardTracker]:
    """Reward a_t only when it beats every area seen so far this episode"""
    if a_t > tracker.running_max:
        return a_t, replace(tracker, running_max=a_t)
    return 0.0, tracker


def discounted_return(rewards: Sequence[float], gamma: float) -> float:
    total = 0.0
    for r in reversed(list(rewards)):
        total = r + gamma * total
    return total


def n_step_returns(rewards: Sequence[float], bootstrap: float, gamma: float) -> np.ndarray:
    """R_t = r_t + gamma * R_{t+1}, seeded with the bootstrap value"""
    returns = np.empty(len(rewards))
    running = bootstrap
    for t in range(len(rewards) - 1, -1, -1):
        running = rewards[t] + gamma * running
        returns[t] = running
    return returns
