"""
Checkpoint files

Format: a tag line (e.g. `gaple-policy v1`), a line with the parameter count,
then the parameters as little-endian float64.
"""
from pathlib import Path
from typing import Optional, Union

import numpy as np

from .errors import CheckpointError

POLICY_TAG = 'gaple-policy v1'
PERCEPTION_TAG = 'gaple-percep v1'


def encode_checkpoint(tag: str, flat: np.ndarray) -> bytes:
    header = f'{tag}\n{flat.size}\n'.encode('ascii')
    return header + np.ascontiguousarray(flat, dtype='<f8').tobytes()


def decode_checkpoint(data: bytes, tag: str, expected_size: Optional[int] = None) -> np.ndarray:
    try:
        tag_line, count_line, payload = data.split(b'\n', 2)
    except ValueError:
        raise CheckpointError('checkpoint header is incomplete')
    if tag_line.decode('ascii', errors='replace') != tag:
        raise CheckpointError(f'expected checkpoint tag {tag!r}, got {tag_line[:40]!r}')
    try:
        count = int(count_line)
    except ValueError:
        raise CheckpointError(f'bad parameter count {count_line[:40]!r}')
    if expected_size is not None and count != expected_size:
        raise CheckpointError(f'checkpoint holds {count} parameters, expected {expected_size}')
    if len(payload) != 8 * count:
        raise CheckpointError(f'checkpoint payload is {len(payload)} bytes, expected {8 * count}')
    return np.frombuffer(payload, dtype='<f8').astype(np.float64)


def save_checkpoint(path: Union[str, Path], tag: str, flat: np.ndarray) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(encode_checkpoint(tag, flat))
    return path


def load_checkpoint(path: Union[str, Path], tag: str, expected_size: Optional[int] = None) -> np.ndarray:
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f'checkpoint not found: {path}')
    return decode_checkpoint(path.read_bytes(), tag, expected_size)
