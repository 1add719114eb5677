"""
Where the policy's state comes from

Ground truth reads the pair's cached observations. The noisy source corrupts
a fresh ground-truth render; the predicted sources run the perception network
on the rendered RGB and substitute its segmentation and/or depth.
"""
from dataclasses import replace
from typing import Dict, Protocol, Tuple

import numpy as np

from .house.render import render
from .models import Pose, RenderOutput
from .perception.network import PerceptionParams, predict_batch
from .perception.noise import corrupt_observation
from .state import StateTensor, make_state
from .training.tasks import TaskPair

INPUT_MODES = ('gt', 'noisy', 'gt_seg_pred_depth', 'predicted')


class ObservationSource(Protocol):
    def state(self, pair: TaskPair, pose: Pose, rng: np.random.Generator) -> StateTensor:
        ...


class GroundTruthSource:
    def state(self, pair: TaskPair, pose: Pose, rng: np.random.Generator) -> StateTensor:
        return pair.observations[pose].state


class NoisySource:
    def __init__(self, flip_p: float, depth_sigma: float, n_labels: int):
        self.flip_p = flip_p
        self.depth_sigma = depth_sigma
        self.n_labels = n_labels

    def state(self, pair: TaskPair, pose: Pose, rng: np.random.Generator) -> StateTensor:
        frame = render(pair.layout, pose, pair.render_cfg)
        noisy = corrupt_observation(frame, self.flip_p, self.depth_sigma, rng, self.n_labels)
        return make_state(noisy, pair.target_label, pair.render_cfg.max_range, pair.channel)


class PredictedSource:
    """Perception output in place of ground truth; results are cached per pose"""

    def __init__(self, params: PerceptionParams, resolution: int, predict_semantic: bool = True):
        self.params = params
        self.resolution = resolution
        self.predict_semantic = predict_semantic
        self._cache: Dict[Tuple[str, Pose], StateTensor] = {}

    def state(self, pair: TaskPair, pose: Pose, rng: np.random.Generator) -> StateTensor:
        key = (pair.pair_id, pose)
        if key not in self._cache:
            cfg = replace(pair.render_cfg, width=self.resolution, height=self.resolution)
            frame = render(pair.layout, pose, cfg)
            labels, depth = predict_batch(self.params, frame.rgb[None])
            predicted = RenderOutput(
                semantic=labels[0] if self.predict_semantic else frame.semantic,
                depth=np.clip(depth[0], 1e-3, 1.0) * cfg.max_range,
                rgb=frame.rgb,
                max_range=cfg.max_range,
            )
            self._cache[key] = make_state(predicted, pair.target_label, cfg.max_range, pair.channel)
        return self._cache[key]


def make_source(mode: str, n_labels: int, flip_p: float = 0.1, depth_sigma: float = 0.1,
                perception: PerceptionParams | None = None, resolution: int = 32) -> ObservationSource:
    if mode == 'gt':
        return GroundTruthSource()
    if mode == 'noisy':
        return NoisySource(flip_p, depth_sigma, n_labels)
    if mode in ('gt_seg_pred_depth', 'predicted'):
        if perception is None:
            raise ValueError(f'input mode {mode!r} needs a perception checkpoint')
        return PredictedSource(perception, resolution, predict_semantic=mode == 'predicted')
    raise ValueError(f'unknown input mode {mode!r}, expected one of {INPUT_MODES}')
