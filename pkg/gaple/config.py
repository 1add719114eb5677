"""
Run configuration

Defaults live in config.toml next to this module. A user file overlays them
section by section; every section is validated by its SQLModel model, and
keys the models do not declare are rejected with their line number.
"""
import os
import re
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Dict, List, Mapping, Optional, Type, Union

import toml
from pydantic import ValidationError
from sqlmodel import Field, SQLModel

from .analysis import EXTRACTORS
from .errors import ConfigError
from .evaluation import DEFAULT_CAP, DEFAULT_K_MAX
from .house.generate import DEFAULT_LABELS, MAX_SIDE, HouseParams
from .house.render import RenderConfig
from .observe import INPUT_MODES
from .state import CHANNELS
from .training.trainer import TrainConfig

DEFAULT_CONFIG_PATH = Path(__file__).with_name('config.toml')
THREADS_ENV = 'GAPLE_THREADS'
SETTINGS = ('objects', 'environments')


class RenderSection(SQLModel):
    width: int = Field(default=64, ge=10)
    height: int = Field(default=64, ge=10)
    fov: float = Field(default=90.0, gt=0, lt=180)
    max_range: float = Field(default=6.4, gt=0)
    wall_height: float = Field(default=0.4, gt=0)

    def render_config(self) -> RenderConfig:
        return RenderConfig(self.width, self.height, self.fov, self.max_range, self.wall_height)


class HousesSection(SQLModel):
    count: int = Field(default=5, ge=1)
    seed: int = 0
    width: int = Field(default=16, ge=5, le=MAX_SIDE)
    height: int = Field(default=16, ge=5, le=MAX_SIDE)
    rooms: int = Field(default=3, ge=1)
    min_room: int = Field(default=3, ge=1)
    max_room: int = Field(default=8, ge=1)
    objects: int = Field(default=5, ge=0)
    labels: List[str] = Field(default_factory=lambda: list(DEFAULT_LABELS))
    files: List[str] = Field(default_factory=list)

    def house_params(self) -> HouseParams:
        return HouseParams(self.width, self.height, self.rooms, self.min_room, self.max_room, self.objects,
                           tuple(self.labels))


class SettingSection(SQLModel):
    name: str = 'objects'               # objects | environments
    train_targets: int = Field(default=3, ge=1)
    test_targets: int = Field(default=2, ge=0)
    train_houses: int = Field(default=3, ge=1)
    test_houses: int = Field(default=2, ge=0)
    targets_per_house: int = Field(default=2, ge=1)


class PerceptionSection(SQLModel):
    resolution: int = Field(default=32, ge=12, multiple_of=4)
    houses: int = Field(default=24, ge=1)
    epochs: int = Field(default=20, ge=1)
    lr: float = Field(default=0.1, gt=0)
    batch_size: int = Field(default=16, ge=1)
    lambda_depth: float = Field(default=0.01, ge=0)
    sample_cap: int = Field(default=500, ge=1)
    background_frac_cap: float = Field(default=0.8, ge=0, le=1)
    holdout_frac: float = Field(default=0.1, ge=0, lt=1)


class PolicySection(SQLModel):
    workers: int = Field(default=1, ge=1)
    rollout_len: int = Field(default=5, ge=1)
    max_env_steps: int = Field(default=200_000, ge=0)
    lr: float = Field(default=0.01, gt=0)
    gamma: float = Field(default=0.99, gt=0, lt=1)
    beta_entropy: float = Field(default=0.01, ge=0)
    value_coeff: float = Field(default=0.5, ge=0)
    episode_step_cap: int = Field(default=200, ge=1)
    normalize_returns: bool = True
    grad_clip: float = Field(default=40.0, gt=0)
    channel: str = 'depth'              # depth | gray
    log_interval: int = Field(default=10_000, ge=1)
    checkpoint_interval: int = Field(default=0, ge=0)

    def train_config(self, seed: int) -> TrainConfig:
        return TrainConfig(n_workers=self.workers, rollout_len=self.rollout_len, max_env_steps=self.max_env_steps,
                           lr=self.lr, gamma=self.gamma, beta_entropy=self.beta_entropy,
                           value_coeff=self.value_coeff, episode_step_cap=self.episode_step_cap,
                           normalize_returns=self.normalize_returns, seed=seed,
                           grad_clip=self.grad_clip, log_interval=self.log_interval,
                           checkpoint_interval=self.checkpoint_interval)


class EvalSection(SQLModel):
    n_starts: int = Field(default=100, ge=1)
    cap: int = Field(default=DEFAULT_CAP, ge=1)
    k_max: int = Field(default=DEFAULT_K_MAX, ge=1)
    inputs: str = 'gt'                  # gt | noisy | gt_seg_pred_depth | predicted
    flip_p: float = Field(default=0.1, ge=0, le=1)
    depth_sigma: float = Field(default=0.1, ge=0)
    greedy: bool = False
    workers: int = Field(default=1, ge=1)
    checkpoint: str = ''
    perception_checkpoint: str = ''
    write_traces: bool = False


class AnalysisSection(SQLModel):
    extractors: List[str] = Field(default_factory=lambda: ['depth10', 'gray10'])
    max_steps: int = Field(default=9, ge=1)
    sample_cap: int = Field(default=2000, ge=1)
    houses: int = Field(default=5, ge=1)
    # generated analysis houses use larger rooms than the training houses
    width: int = Field(default=24, ge=5, le=MAX_SIDE)
    height: int = Field(default=24, ge=5, le=MAX_SIDE)
    rooms: int = Field(default=2, ge=1)
    min_room: int = Field(default=8, ge=1)
    max_room: int = Field(default=14, ge=1)

    def house_section(self, houses: HousesSection) -> HousesSection:
        """The houses section with this section's room geometry"""
        return houses.model_copy(update={'width': self.width, 'height': self.height, 'rooms': self.rooms,
                                          'min_room': self.min_room, 'max_room': self.max_room})


class LoggingSection(SQLModel):
    level: str = 'INFO'


SECTIONS: Dict[str, Type[SQLModel]] = {
    'render': RenderSection,
    'houses': HousesSection,
    'setting': SettingSection,
    'perception': PerceptionSection,
    'policy': PolicySection,
    'eval': EvalSection,
    'analysis': AnalysisSection,
    'logging': LoggingSection,
}

_CHOICES = {
    ('setting', 'name'): SETTINGS,
    ('policy', 'channel'): CHANNELS,
    ('eval', 'inputs'): INPUT_MODES,
    ('logging', 'level'): ('DEBUG', 'INFO', 'WARNING', 'ERROR', 'CRITICAL'),
}
_LIST_CHOICES = {
    ('analysis', 'extractors'): tuple(EXTRACTORS),
}


@dataclass(frozen=True)
class RunConfig:
    seed: int
    render: RenderSection
    houses: HousesSection
    setting: SettingSection
    perception: PerceptionSection
    policy: PolicySection
    eval: EvalSection
    analysis: AnalysisSection
    logging: LoggingSection


def find_line(text: str, key: str, section: Optional[str] = None) -> Optional[int]:
    """1-based line of `key = ...` (inside [section] when given), or of the [key] header"""
    current = None
    assignment = re.compile(rf'^\s*["\']?{re.escape(key)}["\']?\s*=')
    header = re.compile(r'^\s*\[\s*([^\]]+?)\s*\]')
    for number, line in enumerate(text.splitlines(), start=1):
        match = header.match(line)
        if match:
            current = match.group(1)
            if section is None and current == key:
                return number
            continue
        if current == section and assignment.match(line):
            return number
    return None


def _check_keys(user: Mapping, text: str) -> None:
    for key, value in user.items():
        if key == 'seed':
            continue
        if key not in SECTIONS:
            raise ConfigError(f'unknown config key {key!r}', key=key, line=find_line(text, key))
        if not isinstance(value, dict):
            raise ConfigError(f'{key!r} must be a [section]', key=key, line=find_line(text, key))
        fields = SECTIONS[key].model_fields
        for sub in value:
            if sub not in fields:
                raise ConfigError(f"unknown config key '{key}.{sub}'", key=f'{key}.{sub}',
                                  line=find_line(text, sub, key))


def _build_section(name: str, values: Mapping, text: str) -> SQLModel:
    model = SECTIONS[name]
    try:
        section = model.model_validate(dict(values))
    except ValidationError as exc:
        error = exc.errors()[0]
        field = str(error['loc'][0]) if error['loc'] else name
        raise ConfigError(f'invalid value for {name}.{field}: {error["msg"]}', key=f'{name}.{field}',
                          line=find_line(text, field, name))
    for (sec, field), choices in _CHOICES.items():
        if sec == name and getattr(section, field) not in choices:
            raise ConfigError(f'{name}.{field} must be one of {list(choices)}, got {getattr(section, field)!r}',
                              key=f'{name}.{field}', line=find_line(text, field, name))
    for (sec, field), choices in _LIST_CHOICES.items():
        if sec != name:
            continue
        for item in getattr(section, field):
            if item not in choices:
                raise ConfigError(f'{name}.{field} entries must be among {list(choices)}, got {item!r}',
                                  key=f'{name}.{field}', line=find_line(text, field, name))
    return section


def load_config(path: Optional[Union[str, Path]] = None, env: Optional[Mapping[str, str]] = None) -> RunConfig:
    """
    Load defaults, overlay a user file, then apply GAPLE_THREADS

    Raises:
        ConfigError: on malformed TOML, unknown keys or invalid values
        FileNotFoundError: if path does not exist
    """
    defaults = toml.load(DEFAULT_CONFIG_PATH)
    user: Dict = {}
    text = ''
    if path is not None:
        path = Path(path)
        if not path.is_file():
            raise FileNotFoundError(f'config file not found: {path}')
        text = path.read_text()
        try:
            user = toml.loads(text)
        except toml.TomlDecodeError as exc:
            raise ConfigError(f'malformed config {path}: {exc.msg}', line=exc.lineno)
        _check_keys(user, text)

    seed = user.get('seed', defaults.get('seed', 0))
    if not isinstance(seed, int) or isinstance(seed, bool):
        raise ConfigError(f'seed must be an integer, got {seed!r}', key='seed', line=find_line(text, 'seed'))
    sections = {name: _build_section(name, {**defaults.get(name, {}), **user.get(name, {})}, text)
                for name in SECTIONS}
    config = RunConfig(seed=seed, **sections)

    env = os.environ if env is None else env
    if env.get(THREADS_ENV):
        try:
            threads = int(env[THREADS_ENV])
        except ValueError:
            threads = 0
        if threads < 1:
            raise ConfigError(f'{THREADS_ENV} must be a positive integer, got {env[THREADS_ENV]!r}',
                              key=THREADS_ENV)
        config = with_workers(config, threads)
    return config


def with_workers(config: RunConfig, workers: int) -> RunConfig:
    policy = config.policy.model_copy(update={'workers': workers})
    return replace(config, policy=policy)


def with_overrides(config: RunConfig, seed: Optional[int] = None, workers: Optional[int] = None,
                   setting: Optional[str] = None) -> RunConfig:
    """Apply command-line overrides on top of a loaded config"""
    if seed is not None:
        config = replace(config, seed=seed)
    if workers is not None:
        if workers < 1:
            raise ConfigError(f'--workers must be >= 1, got {workers}', key='workers')
        config = with_workers(config, workers)
    if setting is not None:
        if setting not in SETTINGS:
            raise ConfigError(f'--setting must be one of {list(SETTINGS)}, got {setting!r}', key='setting')
        config = replace(config, setting=config.setting.model_copy(update={'name': setting}))
    return config
