"""
Generalization settings

objects: one house; some of its objects are trained on, the rest are held out.
environments: targets in some houses are trained on, targets in other houses
are held out.
"""
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Sequence

from .config import HousesSection, RunConfig
from .errors import ConfigError, TaskInfeasibleError
from .house.generate import generate_house
from .house.layout import parse_layout
from .house.render import RenderConfig
from .models import HouseLayout
from .training.tasks import TaskPair, build_pair

logger = logging.getLogger(__name__)


@dataclass
class SettingPairs:
    name: str
    train: List[TaskPair] = field(default_factory=list)
    test: List[TaskPair] = field(default_factory=list)


def load_houses(houses: HousesSection, count: int | None = None) -> List[HouseLayout]:
    """Layouts from houses.files, or generated from consecutive seeds"""
    if houses.files:
        paths = [Path(p) for p in houses.files]
        for path in paths:
            if not path.is_file():
                raise FileNotFoundError(f'layout file not found: {path}')
        layouts = [parse_layout(path.read_text(), name=path.stem) for path in paths]
    else:
        params = houses.house_params()
        layouts = [generate_house(houses.seed + i, params) for i in range(count or houses.count)]
    return layouts if count is None else layouts[:count]


def feasible_pairs(layout: HouseLayout, labels: Sequence[int], cfg: RenderConfig, channel: str,
                   limit: int) -> List[TaskPair]:
    """Up to limit pairs in label order, skipping targets with no usable start"""
    pairs: List[TaskPair] = []
    for label in labels:
        if len(pairs) == limit:
            break
        try:
            pair = build_pair(layout, label, cfg, channel)
        except TaskInfeasibleError as exc:
            logger.warning('skipping infeasible task: %s', exc)
            continue
        if not pair.start_poses:
            logger.warning('skipping %s: every pose that sees the target is a goal', pair.pair_id)
            continue
        pairs.append(pair)
    return pairs


def build_setting(config: RunConfig, layouts: Sequence[HouseLayout] | None = None) -> SettingPairs:
    """
    Train and held-out pairs for the configured setting

    Raises:
        ConfigError: if the houses cannot supply a single training pair
    """
    setting = config.setting
    cfg = config.render.render_config()
    channel = config.policy.channel
    if setting.name == 'objects':
        layouts = list(layouts) if layouts is not None else load_houses(config.houses, 1)
        house = layouts[0]
        pairs = feasible_pairs(house, house.target_labels(), cfg, channel, setting.train_targets + setting.test_targets)
        result = SettingPairs('objects', pairs[:setting.train_targets], pairs[setting.train_targets:])
    else:
        wanted = setting.train_houses + setting.test_houses
        layouts = list(layouts) if layouts is not None else load_houses(config.houses, wanted)
        if len(layouts) < wanted:
            raise ConfigError(f'environments setting needs {wanted} houses, got {len(layouts)}', key='houses.count')
        result = SettingPairs('environments')
        for i, house in enumerate(layouts[:wanted]):
            pairs = feasible_pairs(house, house.target_labels(), cfg, channel, setting.targets_per_house)
            (result.train if i < setting.train_houses else result.test).extend(pairs)

    if not result.train:
        raise ConfigError(f'setting {setting.name!r} produced no feasible training pair', key='setting.name')
    logger.info('setting %s: %d train pairs, %d held-out pairs', result.name, len(result.train), len(result.test))
    return result


def analysis_houses(config: RunConfig) -> List[HouseLayout]:
    """Layout files when configured, otherwise houses generated with the analysis room geometry"""
    section = config.analysis
    houses = config.houses if config.houses.files else section.house_section(config.houses)
    return load_houses(houses, section.houses)
