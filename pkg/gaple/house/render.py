"""
2.5D column raycaster

One ray per image column is marched through the grid (DDA). The first
non-floor cell fixes that column's hit distance and label; the hit is drawn
as a vertical band centred on the horizon with the eye at half wall height,
and the rows above/below it see ceiling/floor at the distance implied by
their elevation angle.
"""
import colorsys
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Tuple

import numpy as np

from ..errors import DimensionError
from ..models import BACKGROUND, CELL_SIZE, FLOOR, WALL, HouseLayout, Pose, RenderOutput

WALL_COLOR = np.array([0.62, 0.62, 0.60])
FLOOR_COLOR = np.array([0.45, 0.33, 0.22])
CEILING_COLOR = np.array([0.85, 0.85, 0.82])


@dataclass(frozen=True)
class RenderConfig:
    width: int = 64
    height: int = 64
    fov: float = 90.0           # horizontal, degrees
    max_range: float = 6.4      # meters (32 cells)
    wall_height: float = 0.4    # meters

    def validate(self) -> None:
        if self.width < 8 or self.height < 8:
            raise DimensionError(f'render size must be at least 8x8, got {self.width}x{self.height}')


def render(layout: HouseLayout, pose: Pose, cfg: RenderConfig = RenderConfig()) -> RenderOutput:
    """Render semantic labels, depth (meters) and shaded RGB from a pose"""
    cfg.validate()
    W, H = cfg.width, cfg.height
    tan_half = math.tan(math.radians(cfg.fov) / 2.0)
    dx, dy = pose.heading.vector
    px, py = pose.heading.right().vector

    hit_depth = np.full(W, cfg.max_range)
    hit_label = np.full(W, BACKGROUND, dtype=np.int32)
    hit_code = np.full(W, FLOOR, dtype=np.int32)
    hit_side = np.zeros(W, dtype=np.int32)
    for col in range(W):
        camera_x = 2.0 * (col + 0.5) / W - 1.0
        ray_x = dx + px * tan_half * camera_x
        ray_y = dy + py * tan_half * camera_x
        perp, code, side = _cast(layout, pose.x, pose.y, ray_x, ray_y)
        distance = perp * CELL_SIZE
        if distance <= cfg.max_range:
            hit_depth[col] = distance
            hit_code[col] = code
            hit_label[col] = BACKGROUND if code == WALL else code
            hit_side[col] = side
    hit = hit_code != FLOOR

    # vertical focal length chosen so pixels are square
    focal = (W / 2.0) / tan_half
    offset = np.abs(np.arange(H) + 0.5 - H / 2.0)
    eye = cfg.wall_height / 2.0
    surface_depth = np.minimum(eye * focal / offset, cfg.max_range)
    half_band = np.where(hit, eye * focal / hit_depth, 0.0)
    band = (offset[:, None] < half_band[None, :]) & hit[None, :]

    semantic = np.where(band, hit_label[None, :], BACKGROUND).astype(np.int32)
    depth = np.where(band, hit_depth[None, :], surface_depth[:, None])
    depth[:, ~hit] = cfg.max_range
    depth = np.clip(depth, 1e-6, cfg.max_range)

    rgb = _shade(band, hit_code, hit_side, depth, H)
    return RenderOutput(semantic=semantic, depth=depth, rgb=rgb, max_range=cfg.max_range)


def _cast(layout: HouseLayout, cx: int, cy: int, ray_x: float, ray_y: float) -> Tuple[float, int, int]:
    """
    March a ray from the centre of cell (cx, cy)

    Returns the perpendicular distance (cells) to the centre plane of the first
    non-floor cell, that cell's code, and the side crossed (0 = x, 1 = y). A
    grazing ray whose centre plane lies beyond the hit cell reads the point
    where it leaves the cell instead.
    """
    delta_x = abs(1.0 / ray_x) if abs(ray_x) > 1e-12 else math.inf
    delta_y = abs(1.0 / ray_y) if abs(ray_y) > 1e-12 else math.inf
    step_x = 1 if ray_x > 0 else -1
    step_y = 1 if ray_y > 0 else -1
    side_x = 0.5 * delta_x
    side_y = 0.5 * delta_y
    mx, my = cx, cy
    while True:
        if side_x < side_y:
            side_x += delta_x
            mx += step_x
            side = 0
        else:
            side_y += delta_y
            my += step_y
            side = 1
        if not (0 <= mx < layout.width and 0 <= my < layout.height):
            code = WALL
        else:
            code = int(layout.cells[my, mx])
        if code != FLOOR:
            perp = (mx - cx) / ray_x if side == 0 else (my - cy) / ray_y
            return min(perp, side_x, side_y), code, side


@lru_cache(maxsize=256)
def label_color(label_id: int) -> Tuple[float, float, float]:
    """Fixed saturated colour per object label"""
    hue = (label_id * 0.618033988749895) % 1.0
    return colorsys.hsv_to_rgb(hue, 0.75, 0.95)


def _shade(band: np.ndarray, hit_code: np.ndarray, hit_side: np.ndarray, depth: np.ndarray, H: int) -> np.ndarray:
    base = np.empty((len(hit_code), 3))
    for col, code in enumerate(hit_code):
        base[col] = WALL_COLOR if code in (WALL, FLOOR) else label_color(int(code))
    base[hit_side == 1] *= 0.8

    lower = (np.arange(H) + 0.5 > H / 2.0)[:, None]
    surface = np.where(lower[..., None], FLOOR_COLOR, CEILING_COLOR)
    rgb = np.where(band[..., None], base[None, :, :], surface)
    shade = 1.0 / (1.0 + depth)
    return np.clip(rgb * shade[..., None], 0.0, 1.0)
