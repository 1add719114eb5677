"""
Small fully-convolutional encoder-decoder for joint segmentation and depth

    enc1  3->16  3x3 s1      dec1  up2 + 32->16 3x3
    enc2 16->32  3x3 s2      dec2  up2 + 16->16 3x3
    enc3 32->32  3x3 s2      seg   16->C 1x1 (softmax per pixel)
                             depth 16->1 1x1 (linear)

Arrays are (batch, channels, rows, cols). Forward and backward are written by
hand so the gradient can be checked against finite differences.
"""
from dataclasses import dataclass
from functools import lru_cache
from typing import Dict, NamedTuple, Sequence, Tuple

import numpy as np

from ..errors import DimensionError, NumericError
from ..params import RELU_GAIN, ParamLayout, uniform_init

CONV_LAYERS = (
    # name, in, out, stride, upsample first
    ('enc1', 3, 16, 1, False),
    ('enc2', 16, 32, 2, False),
    ('enc3', 32, 32, 2, False),
    ('dec1', 32, 16, 1, True),
    ('dec2', 16, 16, 1, True),
)
N_FEATURES = 16
DEFAULT_LAMBDA = 0.01


@lru_cache(maxsize=32)
def perception_layout(n_classes: int) -> ParamLayout:
    entries = []
    for name, c_in, c_out, _, _ in CONV_LAYERS:
        entries += [(f'{name}.W', (c_out, c_in, 3, 3)), (f'{name}.b', (c_out,))]
    entries += [('seg.W', (n_classes, N_FEATURES)), ('seg.b', (n_classes,)),
                ('depth.W', (1, N_FEATURES)), ('depth.b', (1,))]
    return ParamLayout(tuple(entries))


@dataclass(frozen=True, eq=False)
class PerceptionParams:
    flat: np.ndarray
    n_classes: int

    def views(self) -> Dict[str, np.ndarray]:
        return perception_layout(self.n_classes).views(self.flat)


class PixelPrediction(NamedTuple):
    probs: np.ndarray   # (H, W, C)
    depth: np.ndarray   # (H, W), normalized units


@dataclass(frozen=True, eq=False)
class PerceptionSample:
    rgb: np.ndarray             # (H, W, 3) in [0, 1]
    gt_semantic: np.ndarray     # (H, W) label ids
    gt_depth: np.ndarray        # (H, W) depth / max_range


def init_perception(n_classes: int, seed: int) -> PerceptionParams:
    layout = perception_layout(n_classes)
    fan_in = {f'{name}.W': c_in * 9 for name, c_in, _, _, _ in CONV_LAYERS}
    fan_in.update({'seg.W': N_FEATURES, 'depth.W': N_FEATURES})
    gain = {f'{name}.W': RELU_GAIN for name, _, _, _, _ in CONV_LAYERS}
    biases = [name for name, _ in layout.entries if name.endswith('.b')]
    return PerceptionParams(uniform_init(layout, seed, fan_in, biases, gain), n_classes)


def _window(x: np.ndarray, i: int, j: int, stride: int, rows: int, cols: int) -> Tuple[slice, slice]:
    return slice(i, i + stride * (rows - 1) + 1, stride), slice(j, j + stride * (cols - 1) + 1, stride)


def conv3x3(x: np.ndarray, W: np.ndarray, b: np.ndarray, stride: int) -> np.ndarray:
    """3x3 convolution with zero padding 1"""
    n, _, h, w = x.shape
    rows, cols = (h - 1) // stride + 1, (w - 1) // stride + 1
    xp = np.pad(x, ((0, 0), (0, 0), (1, 1), (1, 1)))
    out = np.zeros((n, W.shape[0], rows, cols))
    for i in range(3):
        for j in range(3):
            rs, cs = _window(xp, i, j, stride, rows, cols)
            out += np.tensordot(xp[:, :, rs, cs], W[:, :, i, j], axes=([1], [1])).transpose(0, 3, 1, 2)
    return out + b[None, :, None, None]


def conv3x3_backward(d_out: np.ndarray, x: np.ndarray, W: np.ndarray, stride: int):
    """Gradients (dx, dW, db) of conv3x3"""
    _, _, rows, cols = d_out.shape
    xp = np.pad(x, ((0, 0), (0, 0), (1, 1), (1, 1)))
    dxp = np.zeros_like(xp)
    dW = np.zeros_like(W)
    for i in range(3):
        for j in range(3):
            rs, cs = _window(xp, i, j, stride, rows, cols)
            dW[:, :, i, j] = np.tensordot(d_out, xp[:, :, rs, cs], axes=([0, 2, 3], [0, 2, 3]))
            dxp[:, :, rs, cs] += np.tensordot(d_out, W[:, :, i, j], axes=([1], [0])).transpose(0, 3, 1, 2)
    return dxp[:, :, 1:-1, 1:-1], dW, d_out.sum(axis=(0, 2, 3))


def upsample2(x: np.ndarray) -> np.ndarray:
    return x.repeat(2, axis=2).repeat(2, axis=3)


def upsample2_backward(d: np.ndarray) -> np.ndarray:
    n, c, h, w = d.shape
    return d.reshape(n, c, h // 2, 2, w // 2, 2).sum(axis=(3, 5))


def conv1x1(x: np.ndarray, W: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.tensordot(x, W, axes=([1], [1])).transpose(0, 3, 1, 2) + b[None, :, None, None]


def _to_batch(rgb: np.ndarray) -> np.ndarray:
    rgb = np.asarray(rgb, dtype=np.float64)
    if rgb.ndim == 3:
        rgb = rgb[None]
    if rgb.ndim != 4 or rgb.shape[-1] != 3:
        raise DimensionError(f'expected (H, W, 3) or (N, H, W, 3) images, got {rgb.shape}')
    if rgb.shape[1] % 4 or rgb.shape[2] % 4:
        raise DimensionError(f'image sides must be multiples of 4, got {rgb.shape[1]}x{rgb.shape[2]}')
    return rgb.transpose(0, 3, 1, 2)


def _forward(p: Dict[str, np.ndarray], x: np.ndarray):
    cache = []
    a = x
    for name, _, _, stride, up in CONV_LAYERS:
        inp = upsample2(a) if up else a
        z = conv3x3(inp, p[f'{name}.W'], p[f'{name}.b'], stride)
        cache.append((inp, z))
        a = np.maximum(z, 0.0)
    logits = conv1x1(a, p['seg.W'], p['seg.b'])
    depth = conv1x1(a, p['depth.W'], p['depth.b'])[:, 0]
    shifted = logits - logits.max(axis=1, keepdims=True)
    log_probs = shifted - np.log(np.exp(shifted).sum(axis=1, keepdims=True))
    if not (np.all(np.isfinite(log_probs)) and np.all(np.isfinite(depth))):
        raise NumericError('non-finite perception output')
    return a, log_probs, depth, cache


def perception_forward(params: PerceptionParams, rgb: np.ndarray) -> PixelPrediction:
    """Per-pixel class distributions and normalized depth for one (H, W, 3) image"""
    _, log_probs, depth, _ = _forward(params.views(), _to_batch(rgb))
    return PixelPrediction(probs=np.exp(log_probs[0]).transpose(1, 2, 0), depth=depth[0])


def predict_batch(params: PerceptionParams, rgb: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Argmax labels (N, H, W) and depth (N, H, W) for a stack of images"""
    _, log_probs, depth, _ = _forward(params.views(), _to_batch(rgb))
    return log_probs.argmax(axis=1), depth


def joint_loss(pred: PixelPrediction, sample: PerceptionSample, lam: float = DEFAULT_LAMBDA) -> float:
    """Mean per-pixel cross entropy plus lam times mean squared depth error"""
    labels = np.asarray(sample.gt_semantic)
    if pred.probs.shape[:2] != labels.shape or pred.depth.shape != labels.shape:
        raise DimensionError('prediction and sample sizes differ')
    rows, cols = np.indices(labels.shape)
    picked = pred.probs[rows, cols, labels]
    ce = -np.log(np.maximum(picked, np.finfo(float).tiny)).mean()
    mse = ((pred.depth - sample.gt_depth) ** 2).mean()
    return float(ce + lam * mse)


def batch_loss_and_grad(params: PerceptionParams, samples: Sequence[PerceptionSample],
                        lam: float = DEFAULT_LAMBDA) -> Tuple[float, np.ndarray]:
    """Joint loss and its exact gradient, both averaged over the samples"""
    p = params.views()
    x = _to_batch(np.stack([s.rgb for s in samples]))
    labels = np.stack([np.asarray(s.gt_semantic, dtype=np.int64) for s in samples])
    gt_depth = np.stack([s.gt_depth for s in samples])
    n, n_pix = len(samples), labels.shape[1] * labels.shape[2]

    features, log_probs, depth, cache = _forward(p, x)
    onehot = np.moveaxis(np.eye(params.n_classes)[labels], -1, 1)
    err = depth - gt_depth
    ce = -(log_probs * onehot).sum(axis=1).mean(axis=(1, 2))
    loss = float((ce + lam * (err ** 2).mean(axis=(1, 2))).mean())

    grad = np.zeros_like(params.flat)
    g = perception_layout(params.n_classes).views(grad)
    d_logits = (np.exp(log_probs) - onehot) / (n * n_pix)
    d_depth = (2.0 * lam * err / (n * n_pix))[:, None]

    g['seg.W'][...] = np.tensordot(d_logits, features, axes=([0, 2, 3], [0, 2, 3]))
    g['seg.b'][...] = d_logits.sum(axis=(0, 2, 3))
    g['depth.W'][...] = np.tensordot(d_depth, features, axes=([0, 2, 3], [0, 2, 3]))
    g['depth.b'][...] = d_depth.sum(axis=(0, 2, 3))
    d_a = (np.tensordot(d_logits, p['seg.W'], axes=([1], [0])) +
           np.tensordot(d_depth, p['depth.W'], axes=([1], [0]))).transpose(0, 3, 1, 2)

    for (name, _, _, stride, up), (inp, z) in zip(reversed(CONV_LAYERS), reversed(cache)):
        d_z = d_a * (z > 0)
        d_inp, g[f'{name}.W'][...], g[f'{name}.b'][...] = conv3x3_backward(d_z, inp, p[f'{name}.W'], stride)
        d_a = upsample2_backward(d_inp) if up else d_inp

    if not np.all(np.isfinite(grad)):
        raise NumericError('non-finite perception gradient')
    return loss, grad


def perception_backward(params: PerceptionParams, sample: PerceptionSample, lam: float = DEFAULT_LAMBDA) -> np.ndarray:
    """Exact gradient of joint_loss for one sample"""
    return batch_loss_and_grad(params, [sample], lam)[1]
