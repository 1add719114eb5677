import logging
from typing import List, Optional, Sequence, Tuple

import numpy as np

from ..errors import DatasetError
from ..params import clip_and_step
from .network import DEFAULT_LAMBDA, PerceptionParams, PerceptionSample, batch_loss_and_grad, init_perception

logger = logging.getLogger(__name__)


def train_perception(dataset: Sequence[PerceptionSample], epochs: int, lr: float, batch_size: int,
                     lam: float = DEFAULT_LAMBDA, seed: int = 0, n_classes: Optional[int] = None,
                     params: Optional[PerceptionParams] = None, clip: float = 40.0) -> Tuple[PerceptionParams, List[float]]:
    """
    Mini-batch SGD over a shuffled dataset

    Returns the trained parameters and the mean loss of each epoch (the loss of
    every batch is measured before that batch's update).
    """
    if not dataset:
        raise DatasetError('cannot train on an empty dataset')
    if params is None:
        if n_classes is None:
            n_classes = int(max(s.gt_semantic.max() for s in dataset)) + 1
        params = init_perception(n_classes, seed)

    rng = np.random.default_rng(seed)
    flat = params.flat.copy()
    curve: List[float] = []
    for epoch in range(epochs):
        order = rng.permutation(len(dataset))
        losses, weights = [], []
        for start in range(0, len(order), batch_size):
            batch = [dataset[i] for i in order[start:start + batch_size]]
            loss, grad = batch_loss_and_grad(PerceptionParams(flat, params.n_classes), batch, lam)
            flat = clip_and_step(flat, grad, lr, clip)
            losses.append(loss)
            weights.append(len(batch))
        curve.append(float(np.average(losses, weights=weights)))
        logger.info('perception epoch %d/%d: mean loss %.5f', epoch + 1, epochs, curve[-1])
    return PerceptionParams(flat, params.n_classes), curve
