"""
Asynchronous advantage actor-critic training

Workers repeatedly take a pair from the scheduler, run one episode in
rollout_len segments, and after each segment compute the gradient on the
snapshot they acted with and apply it to the shared store. The environment
step budget is checked before each episode starts; an episode in flight runs
to its goal or step cap.
"""
import logging
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import TYPE_CHECKING, Dict, List, NamedTuple, Optional, Sequence

import numpy as np

from ..checkpoint import POLICY_TAG, save_checkpoint
from ..errors import ConfigError
from ..policynet import PolicyParams, backward, init_params
from ..state import RewardTracker, discounted_return
from .rollout import run_rollout
from .scheduler import WorkStealingScheduler
from .shared import SharedParams
from .tasks import TaskPair, start_episode

if TYPE_CHECKING:
    from ..observe import ObservationSource

logger = logging.getLogger(__name__)

LOG_HEADER = 'step,pair_id,episode_return,episode_len,version'


@dataclass(frozen=True)
class TrainConfig:
    n_workers: int = 1
    rollout_len: int = 5
    max_env_steps: int = 200_000
    lr: float = 0.01
    gamma: float = 0.99
    beta_entropy: float = 0.01
    value_coeff: float = 0.5
    episode_step_cap: int = 200
    normalize_returns: bool = True  # returns in units of the pair's goal threshold
    seed: int = 0
    grad_clip: float = 40.0
    log_interval: int = 10_000
    checkpoint_interval: int = 0    # 0 disables periodic checkpoints

    def validate(self) -> None:
        for key in ('n_workers', 'rollout_len', 'episode_step_cap', 'log_interval'):
            if getattr(self, key) < 1:
                raise ConfigError(f'policy.{key} must be >= 1, got {getattr(self, key)}', key=key)
        for key in ('lr', 'grad_clip'):
            if getattr(self, key) <= 0:
                raise ConfigError(f'policy.{key} must be > 0, got {getattr(self, key)}', key=key)
        for key in ('max_env_steps', 'beta_entropy', 'value_coeff', 'checkpoint_interval'):
            if getattr(self, key) < 0:
                raise ConfigError(f'policy.{key} must be >= 0, got {getattr(self, key)}', key=key)
        if not 0.0 < self.gamma < 1.0:
            raise ConfigError(f'policy.gamma must lie in (0, 1), got {self.gamma}', key='gamma')


class LogRecord(NamedTuple):
    step: int
    pair_id: str
    episode_return: float
    episode_len: int
    version: int


@dataclass
class TrainingLog:
    records: List[LogRecord] = field(default_factory=list)

    def to_csv(self) -> str:
        lines = [LOG_HEADER]
        lines.extend(f'{r.step},{r.pair_id},{r.episode_return!r},{r.episode_len},{r.version}' for r in self.records)
        return '\n'.join(lines) + '\n'

    def write(self, path: Path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(self.to_csv())
        return path


class TrainResult(NamedTuple):
    params: PolicyParams
    log: TrainingLog
    episode_counts: Dict[str, int]
    version: int
    env_steps: int


class _Progress:
    """Step budget, episode bookkeeping and periodic log/checkpoint triggers"""

    def __init__(self, config: TrainConfig, pairs: Sequence[TaskPair], shared: SharedParams,
                 checkpoint_dir: Optional[Path]):
        self.config = config
        self.shared = shared
        self.checkpoint_dir = checkpoint_dir
        self.env_steps = 0
        self.log = TrainingLog()
        self.counts = {pair.pair_id: 0 for pair in pairs}
        self._pairs = {pair.pair_id: pair for pair in pairs}
        self._lock = threading.Lock()
        self._next_log = config.log_interval
        self._next_checkpoint = config.checkpoint_interval or None
        self._since_log: List[LogRecord] = []

    def budget_left(self) -> bool:
        with self._lock:
            return self.env_steps < self.config.max_env_steps

    def add_steps(self, n: int) -> None:
        with self._lock:
            self.env_steps += n

    def finish_episode(self, pair: TaskPair, episode_return: float, length: int, version: int) -> None:
        with self._lock:
            record = LogRecord(self.env_steps, pair.pair_id, episode_return, length, version)
            self.log.records.append(record)
            self._since_log.append(record)
            self.counts[pair.pair_id] += 1
            pair.episodes_completed += 1
            if self.env_steps >= self._next_log:
                self._report()
                while self._next_log <= self.env_steps:
                    self._next_log += self.config.log_interval
            if self._next_checkpoint is not None and self.env_steps >= self._next_checkpoint:
                self._checkpoint()
                while self._next_checkpoint <= self.env_steps:
                    self._next_checkpoint += self.config.checkpoint_interval

    def _report(self) -> None:
        recent = self._since_log
        logger.info('steps=%d episodes=%d mean_return=%.4f mean_len=%.1f version=%d counts=%s',
                    self.env_steps, len(recent), float(np.mean([r.episode_return for r in recent])),
                    float(np.mean([r.episode_len for r in recent])), self.shared.version, self.counts)
        self._since_log = []

    def _checkpoint(self) -> None:
        if self.checkpoint_dir is None:
            return
        path = Path(self.checkpoint_dir) / f'policy_{self.env_steps:09d}.ckpt'
        save_checkpoint(path, POLICY_TAG, self.shared.params.flat)
        logger.info('checkpoint written to %s', path)


def _run_episode(worker_id: int, pair: TaskPair, rng: np.random.Generator, config: TrainConfig,
                 shared: SharedParams, progress: _Progress, source: Optional['ObservationSource']) -> None:
    pose = start_episode(pair, rng)
    tracker = RewardTracker(running_max=pair.area(pose), gamma=config.gamma)
    scale = 1.0 / pair.goal.area_threshold if config.normalize_returns else 1.0
    rewards: List[float] = []
    version = shared.version
    while len(rewards) < config.episode_step_cap:
        snap = shared.snapshot()
        horizon = min(config.rollout_len, config.episode_step_cap - len(rewards))
        result = run_rollout(snap.params, pair, pose, rng, horizon, tracker, source, step_offset=len(rewards),
                             reward_scale=scale)
        if result.segment:
            grad = backward(snap.params, result.segment, config.beta_entropy, config.value_coeff)
            version = shared.apply(grad, config.lr, config.grad_clip)
        progress.add_steps(len(result.records))
        rewards.extend(r.reward for r in result.records)
        pose, tracker = result.pose, result.tracker
        if result.done:
            break
    progress.finish_episode(pair, discounted_return(rewards, config.gamma), len(rewards), version)
    logger.debug('worker %d finished %s in %d steps', worker_id, pair.pair_id, len(rewards))


def _worker(worker_id: int, scheduler: WorkStealingScheduler, config: TrainConfig, shared: SharedParams,
            progress: _Progress, source: Optional['ObservationSource']) -> None:
    rng = np.random.default_rng([config.seed, worker_id])
    while progress.budget_left():
        pair = scheduler.next_task(worker_id)
        _run_episode(worker_id, pair, rng, config, shared, progress, source)


def train(config: TrainConfig, pairs: Sequence[TaskPair], init: Optional[PolicyParams] = None,
          source: Optional['ObservationSource'] = None, checkpoint_dir: Optional[Path] = None) -> TrainResult:
    """
    Train one policy over all pairs

    With n_workers == 1 everything runs on the calling thread and the result is
    a deterministic function of the config seed.

    Raises:
        ConfigError: if the config is invalid or no pair has a valid start pose
    """
    config.validate()
    feasible = [pair for pair in pairs if pair.start_poses]
    for pair in pairs:
        if not pair.start_poses:
            logger.warning('skipping %s: no start pose sees the target outside the goal set', pair.pair_id)
    if not feasible:
        raise ConfigError('no feasible environment-target pairs to train on')

    shared = SharedParams(init if init is not None else init_params(config.seed))
    scheduler = WorkStealingScheduler(feasible, config.n_workers)
    progress = _Progress(config, feasible, shared, checkpoint_dir)
    logger.info('training on %d pairs with %d workers for %d steps', len(feasible), config.n_workers,
                config.max_env_steps)

    if config.n_workers == 1:
        _worker(0, scheduler, config, shared, progress, source)
    else:
        with ThreadPoolExecutor(max_workers=config.n_workers, thread_name_prefix='gaple-worker') as pool:
            futures = [pool.submit(_worker, i, scheduler, config, shared, progress, source)
                       for i in range(config.n_workers)]
            for future in futures:
                future.result()

    logger.info('training done: %d steps, %d updates, %d steals', progress.env_steps, shared.version,
                scheduler.steals)
    return TrainResult(shared.params, progress.log, dict(progress.counts), shared.version, progress.env_steps)
