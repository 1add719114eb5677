import numpy as np

from ..errors import DimensionError


def _check(a: np.ndarray, b: np.ndarray) -> None:
    if np.shape(a) != np.shape(b):
        raise DimensionError(f'shapes differ: {np.shape(a)} vs {np.shape(b)}')


def mean_iou(pred_labels: np.ndarray, gt_labels: np.ndarray, n_classes: int) -> float:
    """Intersection over union averaged over the classes present in the ground truth"""
    _check(pred_labels, gt_labels)
    pred, gt = np.asarray(pred_labels), np.asarray(gt_labels)
    ious = []
    for c in range(n_classes):
        in_gt = gt == c
        if not in_gt.any():
            continue
        in_pred = pred == c
        ious.append((in_gt & in_pred).sum() / (in_gt | in_pred).sum())
    return float(np.mean(ious)) if ious else 0.0


def depth_rmse(pred: np.ndarray, gt: np.ndarray) -> float:
    _check(pred, gt)
    return float(np.sqrt(np.mean((np.asarray(pred) - np.asarray(gt)) ** 2)))


def pixel_accuracy(pred_labels: np.ndarray, gt_labels: np.ndarray) -> float:
    _check(pred_labels, gt_labels)
    return float((np.asarray(pred_labels) == np.asarray(gt_labels)).mean())


def majority_frequency(gt_labels: np.ndarray) -> float:
    """Accuracy of always predicting the most common ground-truth label"""
    counts = np.bincount(np.asarray(gt_labels).ravel())
    return float(counts.max() / counts.sum())
