"""Flat parameter vectors with named per-layer views"""
import math
from dataclasses import dataclass
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from .errors import DimensionError

# U(-g/sqrt(n), g/sqrt(n)) with g = sqrt(6) has variance 2/n, which keeps
# activation scale steady through a ReLU layer
RELU_GAIN = math.sqrt(6.0)


@dataclass(frozen=True)
class ParamLayout:
    """Ordered (name, shape) entries packed back to back into one vector"""
    entries: Tuple[Tuple[str, Tuple[int, ...]], ...]

    @property
    def size(self) -> int:
        return sum(int(np.prod(shape)) for _, shape in self.entries)

    def offsets(self) -> Dict[str, Tuple[int, int]]:
        spans, start = {}, 0
        for name, shape in self.entries:
            end = start + int(np.prod(shape))
            spans[name] = (start, end)
            start = end
        return spans

    def views(self, flat: np.ndarray) -> Dict[str, np.ndarray]:
        """Reshaped views into flat; writing to a view writes to flat"""
        if flat.shape != (self.size,):
            raise DimensionError(f'expected {self.size} parameters, got {flat.shape}')
        spans = self.offsets()
        return {name: flat[slice(*spans[name])].reshape(shape) for name, shape in self.entries}

    def names(self) -> List[str]:
        return [name for name, _ in self.entries]


def uniform_init(layout: ParamLayout, seed: int, fan_in: Mapping[str, int], biases: Sequence[str],
                 gain: Optional[Mapping[str, float]] = None) -> np.ndarray:
    """Weights ~ U(-g/sqrt(fan_in), g/sqrt(fan_in)) with g = gain[name] or 1; biases zero"""
    gain = gain or {}
    rng = np.random.default_rng(seed)
    flat = np.zeros(layout.size)
    views = layout.views(flat)
    for name, _ in layout.entries:
        if name in biases:
            continue
        bound = gain.get(name, 1.0) / np.sqrt(fan_in[name])
        views[name][...] = rng.uniform(-bound, bound, size=views[name].shape)
    return flat


def clip_and_step(flat: np.ndarray, grad: np.ndarray, lr: float, clip: float) -> np.ndarray:
    """params - lr * clip(grad, -clip, clip), as a new array"""
    if flat.shape != grad.shape:
        raise DimensionError(f'gradient shape {grad.shape} does not match parameters {flat.shape}')
    return flat - lr * np.clip(grad, -clip, clip)
