"""Grid-house world: layouts, generation, motion, rendering"""

from .generate import HouseParams, generate_house
from .layout import format_layout, parse_layout
from .motion import best_action, distance_to_goals, min_steps, reachable_poses, step
from .render import RenderConfig, render

__all__ = [
    'HouseParams', 'generate_house', 'format_layout', 'parse_layout', 'best_action',
    'distance_to_goals', 'min_steps', 'reachable_poses', 'step', 'RenderConfig', 'render',
]
