"""
Navigation evaluation

An episode starts at a pose that sees the target and ends when the
ground-truth attention area reaches the goal threshold (success) or the step
cap is hit (failure). success_rate[k] counts successes that took at most k
times the minimal number of steps.
"""
import logging
import math
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import TYPE_CHECKING, Dict, List, Optional, Protocol, Sequence, Tuple

import numpy as np

from .errors import DimensionError, TaskInfeasibleError
from .house.motion import best_action, step
from .models import Action, EpisodeTrace, Pose, StepRecord, TerminalFlag
from .policynet import N_ACTIONS, PolicyParams, forward
from .state import RewardTracker, reward_step
from .training.rollout import sample_action
from .training.tasks import TaskPair, start_episode

if TYPE_CHECKING:
    from .observe import ObservationSource

logger = logging.getLogger(__name__)

DEFAULT_CAP = 1000
DEFAULT_K_MAX = 5


class ActionSource(Protocol):
    def act(self, pair: TaskPair, pose: Pose, rng: np.random.Generator) -> Action:
        ...


class RandomPolicy:
    """Uniform over the six actions; uses its own generator when given one"""

    def __init__(self, rng: Optional[np.random.Generator] = None):
        self.rng = rng

    def act(self, pair: TaskPair, pose: Pose, rng: np.random.Generator) -> Action:
        return Action(int((self.rng or rng).integers(N_ACTIONS)))


def random_policy(rng: Optional[np.random.Generator] = None) -> RandomPolicy:
    return RandomPolicy(rng)


class FixedActionPolicy:
    def __init__(self, action: Action):
        self.action = action

    def act(self, pair: TaskPair, pose: Pose, rng: np.random.Generator) -> Action:
        return self.action


class OraclePolicy:
    """Follows the distance-to-goal table"""

    def act(self, pair: TaskPair, pose: Pose, rng: np.random.Generator) -> Action:
        return best_action(pair.layout, pose, pair.goal_distance)


class LearnedPolicy:
    def __init__(self, params: PolicyParams, source: Optional['ObservationSource'] = None, greedy: bool = False):
        self.params = params
        self.source = source
        self.greedy = greedy

    def act(self, pair: TaskPair, pose: Pose, rng: np.random.Generator) -> Action:
        state = pair.observations[pose].state if self.source is None else self.source.state(pair, pose, rng)
        probs = forward(self.params, state).action_probs
        if self.greedy:
            return Action(int(np.argmax(probs)))
        return Action(sample_action(probs, rng))


@dataclass(frozen=True)
class EvalOutcome:
    pair_id: str
    start: Pose
    minimal: int
    taken: int
    success: bool
    trace: Optional[EpisodeTrace] = field(default=None, compare=False)


@dataclass(frozen=True)
class EvalReport:
    success_rate: Tuple[float, ...]     # index k-1 holds the rate at k x minimal steps
    avg_steps_success: float            # nan when nothing succeeded
    n_episodes: int

    def gap(self, other: 'EvalReport') -> Tuple[float, ...]:
        return generalization_gap(self, other)


@dataclass
class EvalResult:
    per_pair: Dict[str, EvalReport]
    aggregate: EvalReport
    outcomes: List[EvalOutcome]


def run_episode(policy: ActionSource, pair: TaskPair, start: Pose, cap: int = DEFAULT_CAP,
                rng: Optional[np.random.Generator] = None, record: bool = False) -> EvalOutcome:
    """
    Roll out one evaluation episode

    Raises:
        TaskInfeasibleError: if the start does not see the target or cannot reach a goal
    """
    if rng is None:
        rng = np.random.default_rng()
    if pair.area(start) <= 0.0:
        raise TaskInfeasibleError(f'{pair.pair_id}: start {start} does not see the target')
    minimal = pair.goal_distance.get(start)
    if minimal is None:
        raise TaskInfeasibleError(f'{pair.pair_id}: no goal pose is reachable from {start}')

    trace = EpisodeTrace(pair.pair_id, start, pair.area(start)) if record else None
    tracker = RewardTracker(running_max=pair.area(start))
    pose, taken = start, 0
    while not pair.is_goal(pose) and taken < cap:
        action = policy.act(pair, pose, rng)
        prev, pose = pose, step(pair.layout, pose, action)
        if trace is not None:
            reward, tracker = reward_step(tracker, pair.area(pose))
            trace.records.append(StepRecord(taken, prev, action, reward, pair.area(pose)))
        taken += 1

    success = pair.is_goal(pose)
    if trace is not None:
        trace.terminal = TerminalFlag.GOAL_REACHED if success else TerminalFlag.STEP_CAP_HIT
    return EvalOutcome(pair.pair_id, start, minimal, taken, success, trace)


def summarize(outcomes: Sequence[EvalOutcome], k_max: int = DEFAULT_K_MAX) -> EvalReport:
    n = len(outcomes)
    if n == 0:
        return EvalReport(tuple(0.0 for _ in range(k_max)), math.nan, 0)
    rates = tuple(sum(1 for o in outcomes if o.success and o.taken <= k * o.minimal) / n
                  for k in range(1, k_max + 1))
    wins = [o.taken for o in outcomes if o.success]
    return EvalReport(rates, float(np.mean(wins)) if wins else math.nan, n)


def _episode(policy: ActionSource, pair: TaskPair, pair_idx: int, start_idx: int, cap: int, seed: int,
             record: bool) -> EvalOutcome:
    rng = np.random.default_rng([seed, pair_idx, start_idx])
    return run_episode(policy, pair, start_episode(pair, rng), cap, rng, record)


def evaluate(policy: ActionSource, pairs: Sequence[TaskPair], n_starts: int = 100, cap: int = DEFAULT_CAP,
             seed: int = 0, k_max: int = DEFAULT_K_MAX, workers: int = 1, record: bool = False) -> EvalResult:
    """
    n_starts episodes per pair

    Each episode draws its start and its actions from a generator seeded with
    (seed, pair index, start index), so results do not depend on workers.
    """
    jobs = [(pair, i, j) for i, pair in enumerate(pairs) for j in range(n_starts)]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(lambda job: _episode(policy, *job, cap, seed, record), jobs))
    else:
        outcomes = [_episode(policy, *job, cap, seed, record) for job in jobs]

    per_pair = {pair.pair_id: summarize([o for o in outcomes if o.pair_id == pair.pair_id], k_max)
                for pair in pairs}
    aggregate = summarize(outcomes, k_max)
    logger.info('evaluated %d episodes over %d pairs: sr=%s', aggregate.n_episodes, len(pairs),
                ','.join(f'{r:.3f}' for r in aggregate.success_rate))
    return EvalResult(per_pair, aggregate, outcomes)


def generalization_gap(trained: EvalReport, new: EvalReport) -> Tuple[float, ...]:
    """Elementwise trained - new success rates"""
    if len(trained.success_rate) != len(new.success_rate):
        raise DimensionError(f'k grids differ: {len(trained.success_rate)} vs {len(new.success_rate)}')
    return tuple(a - b for a, b in zip(trained.success_rate, new.success_rate))


def _fmt(value: float) -> str:
    return 'nan' if math.isnan(value) else f'{value:.6f}'


def report_csv(result: EvalResult, aggregate_name: str = 'ALL') -> str:
    k_max = len(result.aggregate.success_rate)
    lines = ['pair,' + ','.join(f'sr{k}' for k in range(1, k_max + 1)) + ',avg_steps,n']
    rows = list(result.per_pair.items()) + [(aggregate_name, result.aggregate)]
    for name, report in rows:
        rates = ','.join(f'{r:.6f}' for r in report.success_rate)
        lines.append(f'{name},{rates},{_fmt(report.avg_steps_success)},{report.n_episodes}')
    return '\n'.join(lines) + '\n'


def gap_csv(trained: EvalReport, new: EvalReport) -> str:
    gaps = generalization_gap(trained, new)
    header = ','.join(f'gap{k}' for k in range(1, len(gaps) + 1))
    return header + '\n' + ','.join(f'{g:.6f}' for g in gaps) + '\n'


def write_traces(result: EvalResult, out_dir: Path) -> List[Path]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written: List[Path] = []
    seen: Dict[str, int] = {}
    for outcome in result.outcomes:
        if outcome.trace is None:
            continue
        stem = re.sub(r'[^A-Za-z0-9_.-]', '_', outcome.pair_id)
        index = seen.get(stem, 0)
        seen[stem] = index + 1
        path = out_dir / f'{stem}_{index:03d}.csv'
        path.write_text(outcome.trace.to_csv())
        written.append(path)
    return written
