"""Calibrated recognition noise standing in for predicted inputs"""
import numpy as np

from ..models import RenderOutput

MIN_DEPTH = 1e-3


def corrupt_observation(frame: RenderOutput, flip_p: float, depth_sigma: float, rng: np.random.Generator,
                        n_labels: int) -> RenderOutput:
    """
    Flip labels and perturb depth

    Each semantic pixel is replaced, with probability flip_p, by a label drawn
    uniformly from the other n_labels - 1 labels; depth is multiplied by
    exp(N(0, depth_sigma^2)) and clamped to (0, max_range].
    """
    if not 0.0 <= flip_p <= 1.0:
        raise ValueError(f'flip_p must lie in [0, 1], got {flip_p}')
    if depth_sigma < 0.0:
        raise ValueError(f'depth_sigma must be >= 0, got {depth_sigma}')

    semantic = frame.semantic
    if flip_p > 0.0 and n_labels > 1:
        flip = rng.random(semantic.shape) < flip_p
        shift = rng.integers(1, n_labels, size=semantic.shape)
        semantic = np.where(flip, (semantic + shift) % n_labels, semantic)

    depth = frame.depth
    if depth_sigma > 0.0:
        depth = np.clip(depth * np.exp(rng.normal(0.0, depth_sigma, size=depth.shape)), MIN_DEPTH, frame.max_range)

    return RenderOutput(semantic=semantic, depth=depth, rgb=frame.rgb, max_range=frame.max_range)
