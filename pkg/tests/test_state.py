"""
Tests for the policy state, goal detection and reward
"""
import math

import numpy as np
import pytest

from gaple.errors import DimensionError, TaskInfeasibleError
from gaple.house.render import render
from gaple.models import Heading, Pose
from gaple.state import (
    RewardTracker,
    attention_area,
    attention_mask,
    compute_goal_spec,
    discounted_return,
    downsample,
    goal_threshold,
    make_state,
    n_step_returns,
    reward_step,
)


def test_attention_mask_and_area():
    """Mask marks the target label; area is the covered fraction"""
    semantic = np.array([[0, 1], [1, 2]])
    mask = attention_mask(semantic, 1)
    assert mask.mask.tolist() == [[0, 1], [1, 0]]
    assert attention_area(mask) == 0.5


def test_downsample_constant():
    """Block averages of a constant grid are that constant"""
    assert np.allclose(downsample(np.full((13, 17), 0.25)), 0.25)


def test_downsample_bins():
    """Uneven sides split as floor(b*n/10)"""
    grid = np.zeros((15, 10))
    grid[0, 0] = 1.0
    out = downsample(grid)
    # bin 0 of 15 rows covers rows 0..0
    assert out[0, 0] == pytest.approx(1.0)
    assert out.sum() == pytest.approx(1.0)


def test_downsample_too_small():
    """Grids smaller than the output are rejected"""
    with pytest.raises(DimensionError):
        downsample(np.zeros((8, 8)))


def test_make_state_channels(room_layout, small_cfg):
    """Depth and grayscale states both give 200 values in [0, 1]"""
    frame = render(room_layout, Pose(3, 3, Heading.N), small_cfg)
    depth = make_state(frame, 1, small_cfg.max_range)
    gray = make_state(frame, 1, small_cfg.max_range, channel="gray")
    assert depth.vector().shape == (200,)
    assert gray.channel == "gray"
    assert np.all((depth.vector() >= 0) & (depth.vector() <= 1))
    assert np.all((gray.vector() >= 0) & (gray.vector() <= 1))
    assert np.array_equal(depth.mask10, gray.mask10)
    with pytest.raises(ValueError):
        make_state(frame, 1, small_cfg.max_range, channel="color")


def test_goal_threshold_fifth_largest():
    """Threshold is the fifth largest positive area"""
    assert goal_threshold([0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7]) == 0.3


def test_goal_threshold_ties():
    """Ties count toward the rank"""
    assert goal_threshold([0.5, 0.5, 0.5, 0.5, 0.5, 0.5, 0.4]) == 0.5


def test_goal_threshold_few_positive():
    """With fewer than five positive areas the smallest positive one is used"""
    assert goal_threshold([0.0, 0.2, 0.6, 0.0]) == 0.2


def test_goal_threshold_invisible():
    """No positive area means no task"""
    with pytest.raises(TaskInfeasibleError):
        goal_threshold([0.0, 0.0])


def test_goal_spec(room_layout, small_cfg, room_pair):
    """Goal poses are exactly those at or above the threshold"""
    spec = room_pair.goal
    assert len(spec.goal_poses) >= 5
    for pose, obs in room_pair.observations.items():
        assert (pose in spec.goal_poses) == (obs.area >= spec.area_threshold)
    assert compute_goal_spec(room_layout, 1, small_cfg) == spec


def test_goal_spec_missing_label(room_layout, small_cfg):
    """A label that never appears is infeasible"""
    with pytest.raises(TaskInfeasibleError):
        compute_goal_spec(room_layout, 9, small_cfg)


def test_reward_step_examples():
    """Reward is paid only on a new maximum"""
    reward, tracker = reward_step(RewardTracker(0.30), 0.50)
    assert (reward, tracker.running_max) == (0.50, 0.50)
    reward, tracker = reward_step(RewardTracker(0.30), 0.20)
    assert (reward, tracker.running_max) == (0.0, 0.30)
    reward, tracker = reward_step(RewardTracker(0.30), 0.30)
    assert reward == 0.0


def test_reward_only_on_strict_records():
    """Over random sequences, rewards appear exactly at strict running-max records"""
    rng = np.random.default_rng(0)
    for _ in range(10_000):
        areas = np.round(rng.random(8), 1)
        tracker = RewardTracker(float(areas[0]))
        best = areas[0]
        for a in areas[1:]:
            reward, tracker = reward_step(tracker, float(a))
            if a > best:
                assert reward == a
                best = a
            else:
                assert reward == 0.0
            assert tracker.running_max == best


def test_discounted_return_matches_sum():
    """Horner evaluation equals the direct discounted sum"""
    rng = np.random.default_rng(1)
    for _ in range(200):
        rewards = rng.random(rng.integers(0, 30)).tolist()
        naive = sum(0.99 ** t * r for t, r in enumerate(rewards))
        assert math.isclose(discounted_return(rewards, 0.99), naive, rel_tol=0, abs_tol=1e-12)


def test_n_step_returns_bootstrap():
    """Returns fold the bootstrap value in from the end"""
    returns = n_step_returns([1.0, 0.0, 2.0], bootstrap=5.0, gamma=0.5)
    assert returns.tolist() == [2.125, 2.25, 4.5]


def test_downsample_stays_in_range(rng):
    """Block averages never leave the range of the input"""
    for _ in range(20):
        rows, cols = rng.integers(10, 70, size=2)
        grid = rng.normal(size=(rows, cols))
        out = downsample(grid)
        assert out.min() >= grid.min() - 1e-12
        assert out.max() <= grid.max() + 1e-12


def test_downsample_matches_per_bin_sums(rng):
    """A 64x64 grid pools exactly as summing each pixel into its floor(b*64/10) bin"""
    grid = rng.random((64, 64))
    edges = [math.floor(b * 64 / 10) for b in range(10)]
    bin_of = [max(b for b in range(10) if edges[b] <= i) for i in range(64)]
    sums = np.zeros((10, 10))
    counts = np.zeros((10, 10))
    for r in range(64):
        for c in range(64):
            sums[bin_of[r], bin_of[c]] += grid[r, c]
            counts[bin_of[r], bin_of[c]] += 1
    assert np.allclose(downsample(grid), sums / counts)
    assert counts[0, 0] == 36 and counts[2, 2] == 49
