"""
Tests for task pairs, work stealing, the shared parameter store and the trainer
"""
import random
from collections import Counter, deque

import numpy as np
import pytest

from gaple.errors import ConfigError, TaskInfeasibleError
from gaple.house.layout import parse_layout
from gaple.models import Heading, Pose
from gaple.policynet import LAYOUT, PolicyGradient, init_params, zero_params
from gaple.state import RewardTracker
from gaple.training import (
    SharedParams,
    TrainConfig,
    WorkStealingScheduler,
    build_pair,
    params_checksum,
    run_rollout,
    sample_action,
    start_episode,
    steal_task,
    train,
)

CLOSET = """gaple-house v1
T=television

####
#.T#
####
"""


@pytest.fixture(name="closet_pair")
def closet_pair_fixture(small_cfg):
    """A single floor cell beside a television"""
    layout = parse_layout(CLOSET, name="closet")
    return build_pair(layout, layout.label_id("television"), small_cfg)


def _spread(counts):
    return max(counts.values()) - min(counts.values())


def test_pair_identity(room_pair):
    """Pairs are named after house and target"""
    assert room_pair.pair_id == "room:television"
    assert room_pair.start_poses


def test_start_episode_draws_valid_starts(room_pair, rng):
    """Starts see the target and are not goals"""
    for _ in range(200):
        pose = start_episode(room_pair, rng)
        assert room_pair.area(pose) > 0
        assert not room_pair.is_goal(pose)


def test_closet_has_no_starts(closet_pair, rng):
    """With four poses every visible one is a goal"""
    assert closet_pair.start_poses == []
    with pytest.raises(TaskInfeasibleError):
        start_episode(closet_pair, rng)


def test_steal_from_longest():
    """The longest peer deque loses its back element; ties go to the lowest id"""
    queues = [deque(["a"]), deque(["b", "c"]), deque(["d", "e"])]
    assert steal_task(queues, 0) == "c"
    assert list(queues[1]) == ["b"]
    assert steal_task(queues, 0) == "e"


def test_steal_nothing_left():
    """Only the thief's own deque has work"""
    queues = [deque(["a"]), deque()]
    assert steal_task(queues, 0) is None
    assert steal_task(queues, 1) == "a"


def test_scheduler_rejects_bad_input():
    """No pairs or no workers is an error"""
    with pytest.raises(ValueError):
        WorkStealingScheduler([], 2)
    with pytest.raises(ValueError):
        WorkStealingScheduler(["p"], 0)


def test_scheduler_fairness_under_interleaving():
    """Hand-out counts per pair never differ by more than one"""
    pairs = [f"pair{i}" for i in range(8)]
    scheduler = WorkStealingScheduler(pairs, 2)
    order = random.Random(5)
    counts = Counter({p: 0 for p in pairs})
    for _ in range(1000):
        # worker 0 is three times as fast as worker 1
        worker = 0 if order.random() < 0.75 else 1
        counts[scheduler.next_task(worker)] += 1
        assert _spread(counts) <= 1
    assert scheduler.steals > 0


def test_single_worker_round_robin():
    """One worker sees every pair once per round in order"""
    scheduler = WorkStealingScheduler(["a", "b", "c"], 1)
    assert [scheduler.next_task(0) for _ in range(6)] == ["a", "b", "c", "a", "b", "c"]
    assert scheduler.rounds == 2


def test_shared_params_versions():
    """Each update bumps the version and old snapshots stay intact"""
    shared = SharedParams(init_params(0))
    before = shared.snapshot()
    grad = PolicyGradient(np.ones(LAYOUT.size))
    assert shared.apply(grad, lr=0.1) == 1
    after = shared.snapshot()
    assert before.version == 0 and after.version == 1
    assert before.checksum == params_checksum(before.params.flat)
    assert after.checksum == params_checksum(after.params.flat)
    assert np.allclose(before.params.flat - after.params.flat, 0.1)


def test_snapshot_is_read_only():
    """Snapshots cannot be written through"""
    snap = SharedParams(init_params(0)).snapshot()
    with pytest.raises(ValueError):
        snap.params.flat[0] = 1.0


def test_sample_action(rng):
    """Draws follow the distribution"""
    assert sample_action(np.array([0, 0, 1.0, 0, 0, 0]), rng) == 2
    draws = Counter(sample_action(np.full(6, 1 / 6), rng) for _ in range(6000))
    assert all(800 < draws[a] < 1200 for a in range(6))


def test_rollout_from_goal(room_pair, rng):
    """Starting on a goal gives an empty, finished segment"""
    pose = next(iter(room_pair.goal.goal_poses))
    result = run_rollout(init_params(0), room_pair, pose, rng, 5, RewardTracker(room_pair.area(pose)))
    assert result.segment == [] and result.done and result.pose == pose


def test_rollout_segment(room_pair, rng):
    """Segments are at most rollout_len long and end at a goal when done"""
    pose = room_pair.start_poses[0]
    result = run_rollout(init_params(0), room_pair, pose, rng, 5, RewardTracker(room_pair.area(pose)))
    assert 1 <= len(result.segment) <= 5
    assert len(result.records) == len(result.segment)
    assert result.done == room_pair.is_goal(result.pose)
    assert [r.index for r in result.records] == list(range(len(result.records)))


def test_rollout_confined_to_single_cell(closet_pair, rng):
    """Movement into walls leaves the agent in its only cell"""
    pose = Pose(1, 1, Heading.W)
    assert not closet_pair.is_goal(pose)
    result = run_rollout(init_params(0), closet_pair, pose, rng, 50, RewardTracker(closet_pair.area(pose)))
    assert all((r.pose.x, r.pose.y) == (1, 1) for r in result.records)
    assert (result.pose.x, result.pose.y) == (1, 1)


def test_rollout_reward_scale(room_pair):
    """Scaled rewards scale the returns and leave the recorded rewards raw"""
    pose = room_pair.start_poses[0]
    tracker = RewardTracker(room_pair.area(pose))
    raw = run_rollout(zero_params(), room_pair, pose, np.random.default_rng(3), 5, tracker)
    scaled = run_rollout(zero_params(), room_pair, pose, np.random.default_rng(3), 5, tracker, reward_scale=4.0)
    assert scaled.records == raw.records
    assert [e.ret for e in scaled.segment] == pytest.approx([4.0 * e.ret for e in raw.segment])


def test_config_validation():
    """Out-of-range training settings are rejected"""
    with pytest.raises(ConfigError):
        TrainConfig(lr=0).validate()
    with pytest.raises(ConfigError):
        TrainConfig(gamma=1.0).validate()
    with pytest.raises(ConfigError):
        TrainConfig(n_workers=0).validate()


def test_zero_budget_leaves_params(room_pair):
    """No environment steps means no updates"""
    result = train(TrainConfig(max_env_steps=0, seed=3), [room_pair])
    assert np.array_equal(result.params.flat, init_params(3).flat)
    assert result.version == 0 and result.env_steps == 0
    assert result.log.records == []


def test_single_worker_is_deterministic(room_layout, small_cfg):
    """Same seed, same parameters and log"""
    def run():
        pairs = [build_pair(room_layout, room_layout.label_id(name), small_cfg) for name in ("television", "sofa")]
        return train(TrainConfig(max_env_steps=300, seed=9), pairs)

    a, b = run(), run()
    assert np.array_equal(a.params.flat, b.params.flat)
    assert a.log.to_csv() == b.log.to_csv()
    assert a.episode_counts == b.episode_counts


def test_training_log(room_pair, sofa_pair, tmp_path):
    """Every finished episode is logged once"""
    result = train(TrainConfig(max_env_steps=300, seed=1), [room_pair, sofa_pair])
    assert sum(result.episode_counts.values()) == len(result.log.records)
    assert _spread(result.episode_counts) <= 1
    assert result.env_steps >= 300
    path = result.log.write(tmp_path / "train_log.csv")
    assert path.read_text().splitlines()[0] == "step,pair_id,episode_return,episode_len,version"


def test_multi_worker_training(room_pair, sofa_pair):
    """Threads share one store and pairs stay balanced"""
    config = TrainConfig(n_workers=3, max_env_steps=400, seed=2, episode_step_cap=50)
    result = train(config, [room_pair, sofa_pair])
    assert result.version >= 1
    assert result.env_steps >= 400
    # each worker may finish the episode it started before the budget ran out
    assert result.env_steps < 400 + config.n_workers * config.episode_step_cap
    assert _spread(result.episode_counts) <= config.n_workers
    assert all(r.version <= result.version for r in result.log.records)
    assert room_pair.episodes_completed == result.episode_counts[room_pair.pair_id]


def test_periodic_checkpoints(room_pair, tmp_path):
    """Checkpoints are written as the step count crosses each interval"""
    train(TrainConfig(max_env_steps=300, checkpoint_interval=100), [room_pair], checkpoint_dir=tmp_path)
    assert len(list(tmp_path.glob("policy_*.ckpt"))) >= 2


def test_no_feasible_pairs(closet_pair):
    """Training refuses when no pair has a start"""
    with pytest.raises(ConfigError):
        train(TrainConfig(max_env_steps=10), [closet_pair])


def test_infeasible_pairs_are_skipped(room_pair, closet_pair):
    """Pairs without starts are left out of training"""
    result = train(TrainConfig(max_env_steps=50), [room_pair, closet_pair])
    assert closet_pair.pair_id not in result.episode_counts
