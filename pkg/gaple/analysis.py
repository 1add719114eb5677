"""
Feature distance versus physical distance

Pairs of same-heading poses are binned by their Manhattan distance in cells,
sampled evenly across bins, and the L1 distance between their mass-normalized
feature maps is averaged per bin. Depth features should grow with physical distance; the grayscale
appearance baseline is reported next to them.
"""
import logging
import math
from dataclasses import dataclass
from typing import Callable, Dict, List, Sequence, Tuple

import numpy as np
from scipy.stats import spearmanr

from .errors import AnalysisError, DimensionError
from .house.render import RenderConfig, render
from .models import Heading, HouseLayout, Pose, RenderOutput
from .state import downsample, grayscale

logger = logging.getLogger(__name__)

EXTRACTORS: Dict[str, Callable[[RenderOutput], np.ndarray]] = {
    'depth10': lambda frame: downsample(np.clip(frame.depth / frame.max_range, 0.0, 1.0)),
    'gray10': lambda frame: downsample(grayscale(frame.rgb)),
}


@dataclass(frozen=True)
class DistanceCurve:
    bins: Tuple[int, ...]
    mean_feat_dist: Tuple[float, ...]
    count: Tuple[int, ...]
    extractor: str = 'depth10'

    def to_csv(self) -> str:
        lines = ['bin,mean_dist,count']
        lines.extend(f'{b},{m:.8f},{c}' for b, m, c in zip(self.bins, self.mean_feat_dist, self.count))
        return '\n'.join(lines) + '\n'


def physical_distance(layout: HouseLayout, p1: Pose, p2: Pose) -> int:
    if p1.heading != p2.heading:
        raise AnalysisError(f'poses {p1} and {p2} face different headings')
    return abs(p1.x - p2.x) + abs(p1.y - p2.y)


def normalize_l1(feature: np.ndarray) -> np.ndarray:
    feature = np.asarray(feature, dtype=np.float64)
    mass = np.abs(feature).sum()
    return np.zeros_like(feature) if mass == 0.0 else feature / mass


def feature_distance(f1: np.ndarray, f2: np.ndarray) -> float:
    """L1 distance between unit-mass versions of two maps"""
    if np.shape(f1) != np.shape(f2):
        raise DimensionError(f'feature maps differ in shape: {np.shape(f1)} vs {np.shape(f2)}')
    return float(np.abs(normalize_l1(f1) - normalize_l1(f2)).sum())


def _candidate_pairs(poses: Sequence[Pose], max_steps: int) -> Dict[int, List[Tuple[Pose, Pose]]]:
    by_bin: Dict[int, List[Tuple[Pose, Pose]]] = {d: [] for d in range(1, max_steps + 1)}
    for i, a in enumerate(poses):
        for b in poses[i + 1:]:
            if a.heading != b.heading:
                continue
            d = abs(a.x - b.x) + abs(a.y - b.y)
            if 1 <= d <= max_steps:
                by_bin[d].append((a, b))
    return by_bin


def sample_pairs(poses: Sequence[Pose], max_steps: int, sample_cap: int,
                 seed: int) -> List[Tuple[Pose, Pose, int]]:
    """
    Same-heading pose pairs, at most sample_cap // max_steps per distance bin

    Bins with fewer candidates keep all of them.
    """
    per_bin = max(1, sample_cap // max_steps)
    rng = np.random.default_rng(seed)
    chosen = []
    for d, pairs in _candidate_pairs(poses, max_steps).items():
        if len(pairs) > per_bin:
            keep = np.sort(rng.choice(len(pairs), size=per_bin, replace=False))
            pairs = [pairs[i] for i in keep]
        chosen.extend((a, b, d) for a, b in pairs)
    return chosen


def build_curve(layout: HouseLayout, extractor: str = 'depth10', max_steps: int = 9, sample_cap: int = 2000,
                seed: int = 0, cfg: RenderConfig = RenderConfig()) -> DistanceCurve:
    """
    Mean feature distance per physical distance bin

    Bins with no sampled pair are left out.

    Raises:
        AnalysisError: for an unknown extractor or a layout with fewer than two floor cells
    """
    if extractor not in EXTRACTORS:
        raise AnalysisError(f'unknown extractor {extractor!r}, expected one of {sorted(EXTRACTORS)}')
    cells = layout.floor_cells()
    if len(cells) < 2:
        raise AnalysisError(f'{layout.name} needs at least two floor cells')

    poses = sorted(Pose(x, y, h) for x, y in cells for h in Heading)
    candidates = sample_pairs(poses, max_steps, sample_cap, seed)

    extract = EXTRACTORS[extractor]
    features: Dict[Pose, np.ndarray] = {}
    sums = np.zeros(max_steps + 1)
    counts = np.zeros(max_steps + 1, dtype=int)
    for a, b, d in candidates:
        for pose in (a, b):
            if pose not in features:
                features[pose] = extract(render(layout, pose, cfg))
        sums[d] += feature_distance(features[a], features[b])
        counts[d] += 1

    bins = tuple(d for d in range(1, max_steps + 1) if counts[d] > 0)
    curve = DistanceCurve(bins, tuple(float(sums[d] / counts[d]) for d in bins), tuple(int(counts[d]) for d in bins),
                          extractor)
    logger.debug('%s curve for %s from %d pairs', extractor, layout.name, len(candidates))
    return curve


def curve_trend(curve: DistanceCurve) -> float:
    """Spearman rank correlation between bin and bin mean; nan with fewer than two bins"""
    if len(curve.bins) < 2:
        return math.nan
    rho = spearmanr(curve.bins, curve.mean_feat_dist)[0]
    return float(rho)


def merge_curves(curves: Sequence[DistanceCurve]) -> DistanceCurve:
    """Count-weighted combination of curves built with one extractor"""
    if not curves:
        raise AnalysisError('no curves to merge')
    sums: Dict[int, float] = {}
    counts: Dict[int, int] = {}
    for curve in curves:
        for b, m, c in zip(curve.bins, curve.mean_feat_dist, curve.count):
            sums[b] = sums.get(b, 0.0) + m * c
            counts[b] = counts.get(b, 0) + c
    bins = tuple(sorted(counts))
    return DistanceCurve(bins, tuple(sums[b] / counts[b] for b in bins), tuple(counts[b] for b in bins),
                         curves[0].extractor)
