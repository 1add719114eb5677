"""Joint semantic segmentation and depth prediction"""

from .dataset import build_dataset, load_dataset, save_dataset
from .metrics import depth_rmse, mean_iou, pixel_accuracy
from .network import (
    PerceptionParams,
    PerceptionSample,
    PixelPrediction,
    init_perception,
    joint_loss,
    perception_backward,
    perception_forward,
)
from .noise import corrupt_observation
from .train import train_perception

__all__ = [
    'build_dataset', 'load_dataset', 'save_dataset', 'depth_rmse', 'mean_iou', 'pixel_accuracy',
    'PerceptionParams', 'PerceptionSample', 'PixelPrediction', 'init_perception', 'joint_loss',
    'perception_backward', 'perception_forward', 'corrupt_observation', 'train_perception',
]
