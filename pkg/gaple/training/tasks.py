"""Environment-target pairs and episode starts"""
from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, List, Sequence

import numpy as np

from ..errors import TaskInfeasibleError
from ..house.motion import distance_to_goals
from ..house.render import RenderConfig
from ..models import HouseLayout, Pose
from ..state import GoalSpec, PoseObservation, compute_goal_spec, survey


@dataclass(eq=False)
class TaskPair:
    """
    One (house, target) task with its goal set and ground-truth observations

    observations holds the state and attention area of every reachable pose;
    rendering is pure, so it is computed once per pair.
    """
    pair_id: str
    layout: HouseLayout
    target_label: int
    goal: GoalSpec
    observations: Dict[Pose, PoseObservation]
    render_cfg: RenderConfig
    channel: str = 'depth'
    episodes_completed: int = 0
    start_poses: List[Pose] = field(default_factory=list)

    @cached_property
    def goal_distance(self) -> Dict[Pose, int]:
        return distance_to_goals(self.layout, self.goal.goal_poses)

    def area(self, pose: Pose) -> float:
        return self.observations[pose].area

    def is_goal(self, pose: Pose) -> bool:
        return self.observations[pose].area >= self.goal.area_threshold


def build_pair(layout: HouseLayout, target_label: int, cfg: RenderConfig, channel: str = 'depth') -> TaskPair:
    """
    Survey a house for one target

    Raises:
        TaskInfeasibleError: if the target is never visible
    """
    observations = survey(layout, target_label, cfg, channel)
    goal = compute_goal_spec(layout, target_label, cfg, observations)
    starts = sorted(p for p, obs in observations.items() if obs.area > 0.0 and p not in goal.goal_poses)
    name = layout.labels.get(target_label, str(target_label))
    return TaskPair(pair_id=f'{layout.name}:{name}', layout=layout, target_label=target_label, goal=goal,
                    observations=observations, render_cfg=cfg, channel=channel, start_poses=starts)


def build_pairs(layouts: Sequence[HouseLayout], targets: Dict[str, Sequence[int]], cfg: RenderConfig,
                channel: str = 'depth') -> List[TaskPair]:
    by_name = {layout.name: layout for layout in layouts}
    return [build_pair(by_name[name], label, cfg, channel) for name, labels in targets.items() for label in labels]


def start_episode(pair: TaskPair, rng: np.random.Generator) -> Pose:
    """
    Uniform draw over poses that see the target but are not goals

    Raises:
        TaskInfeasibleError: if every pose that sees the target is already a goal
    """
    if not pair.start_poses:
        raise TaskInfeasibleError(f'{pair.pair_id}: every pose that sees the target is a goal pose')
    return pair.start_poses[int(rng.integers(len(pair.start_poses)))]
