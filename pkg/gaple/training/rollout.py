from typing import TYPE_CHECKING, List, NamedTuple, Optional

import numpy as np

from ..house.motion import step
from ..models import Action, Pose, StepRecord
from ..policynet import N_ACTIONS, PolicyParams, RolloutEntry, forward
from ..state import RewardTracker, n_step_returns, reward_step
from .tasks import TaskPair

if TYPE_CHECKING:
    from ..observe import ObservationSource


class RolloutResult(NamedTuple):
    segment: List[RolloutEntry]
    pose: Pose
    done: bool
    tracker: RewardTracker
    records: List[StepRecord]


def sample_action(probs: np.ndarray, rng: np.random.Generator) -> int:
    """Inverse-CDF draw; one uniform per call"""
    cdf = np.cumsum(probs)
    return min(int(np.searchsorted(cdf, rng.random() * cdf[-1], side='right')), N_ACTIONS - 1)


def run_rollout(snapshot: PolicyParams, pair: TaskPair, pose: Pose, rng: np.random.Generator, rollout_len: int,
                tracker: RewardTracker, source: Optional['ObservationSource'] = None,
                step_offset: int = 0, reward_scale: float = 1.0) -> RolloutResult:
    """
    Act for up to rollout_len steps from pose

    Stops early once the ground-truth attention area reaches the goal threshold.
    Returns are n-step returns bootstrapped with V of the last state unless the
    segment ended at a goal. Returns are computed on rewards times reward_scale;
    the step records keep the raw rewards.
    """
    if pair.is_goal(pose):
        return RolloutResult([], pose, True, tracker, [])

    states, actions, rewards = [], [], []
    records: List[StepRecord] = []
    done = False
    for i in range(rollout_len):
        state = _state(pair, pose, rng, source)
        action = Action(sample_action(forward(snapshot, state).action_probs, rng))
        prev, pose = pose, step(pair.layout, pose, action)
        area = pair.area(pose)
        reward, tracker = reward_step(tracker, area)
        states.append(state)
        actions.append(int(action))
        rewards.append(reward)
        records.append(StepRecord(index=step_offset + i, pose=prev, action=action, reward=reward, area=area))
        if pair.is_goal(pose):
            done = True
            break

    bootstrap = 0.0 if done else forward(snapshot, _state(pair, pose, rng, source)).value
    returns = n_step_returns([r * reward_scale for r in rewards], bootstrap, tracker.gamma)
    segment = [RolloutEntry(s, a, float(r)) for s, a, r in zip(states, actions, returns)]
    return RolloutResult(segment, pose, done, tracker, records)


def _state(pair: TaskPair, pose: Pose, rng: np.random.Generator, source: Optional['ObservationSource']):
    if source is None:
        return pair.observations[pose].state
    return source.state(pair, pose, rng)
