"""Asynchronous actor-critic training over environment-target pairs"""

from .rollout import RolloutResult, run_rollout, sample_action
from .scheduler import WorkStealingScheduler, steal_task
from .shared import ParamSnapshot, SharedParams, params_checksum
from .tasks import TaskPair, build_pair, build_pairs, start_episode
from .trainer import TrainConfig, TrainingLog, TrainResult, train

__all__ = [
    'RolloutResult', 'run_rollout', 'sample_action', 'WorkStealingScheduler', 'steal_task', 'ParamSnapshot',
    'SharedParams', 'params_checksum', 'TaskPair', 'build_pair', 'build_pairs', 'start_episode', 'TrainConfig',
    'TrainingLog', 'TrainResult', 'train',
]
