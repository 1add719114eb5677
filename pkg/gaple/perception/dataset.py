"""Perception dataset: rendering, background filtering, persistence"""
import logging
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

import numpy as np

from ..errors import DatasetError
from ..house.motion import reachable_poses
from ..house.render import RenderConfig, render
from ..models import BACKGROUND, HouseLayout, Pose
from .network import PerceptionSample

logger = logging.getLogger(__name__)

FRAME_TAG = 'gaple-frame v1'


def background_fraction(semantic: np.ndarray) -> float:
    return float((np.asarray(semantic) == BACKGROUND).mean())


def frame_sample(layout: HouseLayout, pose: Pose, cfg: RenderConfig) -> PerceptionSample:
    frame = render(layout, pose, cfg)
    return PerceptionSample(rgb=frame.rgb, gt_semantic=frame.semantic.astype(np.int64),
                            gt_depth=np.clip(frame.depth / cfg.max_range, 0.0, 1.0))


def build_dataset(layouts: Sequence[HouseLayout], cfg: RenderConfig, background_frac_cap: float = 0.8,
                  sample_cap: Optional[int] = None, seed: int = 0, workers: int = 1) -> List[PerceptionSample]:
    """
    Frames from every reachable pose of every layout, minus mostly-background ones

    Frames whose background fraction exceeds background_frac_cap are dropped,
    then a uniform subsample of at most sample_cap frames is kept in render order.

    Raises:
        DatasetError: if no frame survives filtering
    """
    if not layouts:
        raise DatasetError('no layouts given')
    jobs: List[Tuple[HouseLayout, Pose]] = [(layout, pose) for layout in layouts
                                            for pose in sorted(reachable_poses(layout))]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            samples = list(pool.map(lambda job: frame_sample(job[0], job[1], cfg), jobs))
    else:
        samples = [frame_sample(layout, pose, cfg) for layout, pose in jobs]

    kept = [s for s in samples if background_fraction(s.gt_semantic) <= background_frac_cap]
    logger.info('rendered %d frames, %d within background cap %.2f', len(samples), len(kept), background_frac_cap)
    if not kept:
        raise DatasetError(f'no frame has background fraction <= {background_frac_cap}')
    if sample_cap is not None and len(kept) > sample_cap:
        rng = np.random.default_rng(seed)
        chosen = np.sort(rng.choice(len(kept), size=sample_cap, replace=False))
        kept = [kept[i] for i in chosen]
    return kept


def split_holdout(samples: Sequence[PerceptionSample], fraction: float, seed: int):
    """Shuffle and split into (train, held-out)"""
    order = np.random.default_rng(seed).permutation(len(samples))
    n_hold = int(round(len(samples) * fraction))
    if len(samples) > 1:
        n_hold = min(max(n_hold, 1), len(samples) - 1)
    else:
        n_hold = 0
    held = [samples[i] for i in order[:n_hold]]
    train = [samples[i] for i in order[n_hold:]]
    return train, held


def encode_frame(sample: PerceptionSample) -> bytes:
    height, width = sample.gt_semantic.shape
    rgb = np.clip(np.round(sample.rgb * 255.0), 0, 255).astype('u1').transpose(2, 0, 1)
    return (f'{FRAME_TAG} {width} {height}\n'.encode('ascii') + rgb.tobytes() +
            np.asarray(sample.gt_semantic).astype('u1').tobytes() +
            np.asarray(sample.gt_depth).astype('<f4').tobytes())


def decode_frame(data: bytes) -> PerceptionSample:
    header, _, body = data.partition(b'\n')
    parts = header.decode('ascii', errors='replace').split()
    if len(parts) != 4 or ' '.join(parts[:2]) != FRAME_TAG:
        raise DatasetError(f'not a frame record: {header[:40]!r}')
    width, height = int(parts[2]), int(parts[3])
    n = width * height
    if len(body) != 3 * n + n + 4 * n:
        raise DatasetError('truncated frame record')
    rgb = np.frombuffer(body[:3 * n], dtype='u1').reshape(3, height, width).transpose(1, 2, 0) / 255.0
    semantic = np.frombuffer(body[3 * n:4 * n], dtype='u1').reshape(height, width).astype(np.int64)
    depth = np.frombuffer(body[4 * n:], dtype='<f4').reshape(height, width).astype(np.float64)
    return PerceptionSample(rgb=rgb, gt_semantic=semantic, gt_depth=depth)


def save_dataset(samples: Sequence[PerceptionSample], out_dir: Path) -> Path:
    out_dir.mkdir(parents=True, exist_ok=True)
    for i, sample in enumerate(samples):
        (out_dir / f'frame_{i:05d}.bin').write_bytes(encode_frame(sample))
    return out_dir


def load_dataset(in_dir: Path) -> List[PerceptionSample]:
    files = sorted(in_dir.glob('frame_*.bin'))
    if not files:
        raise DatasetError(f'no frame records in {in_dir}')
    return [decode_frame(f.read_bytes()) for f in files]
