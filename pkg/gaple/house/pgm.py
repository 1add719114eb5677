"""Netpbm writers for rendered frames"""
from pathlib import Path
from typing import Dict

import numpy as np

from ..models import RenderOutput


def encode_pgm(image: np.ndarray, maxval: int) -> bytes:
    """Binary P5 image; 16-bit samples are big-endian as the format requires"""
    height, width = image.shape
    dtype = '>u2' if maxval > 255 else 'u1'
    body = np.clip(image, 0, maxval).astype(dtype).tobytes()
    return f'P5\n{width} {height}\n{maxval}\n'.encode('ascii') + body


def encode_ppm(rgb: np.ndarray) -> bytes:
    height, width, _ = rgb.shape
    body = np.clip(np.round(rgb * 255.0), 0, 255).astype('u1').tobytes()
    return f'P6\n{width} {height}\n255\n'.encode('ascii') + body


def write_render(frame: RenderOutput, out_dir: Path, stem: str = 'frame') -> Dict[str, Path]:
    """Write semantic (label indices), depth (millimetres, 16-bit) and RGB images"""
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = {
        'semantic': out_dir / f'{stem}_semantic.pgm',
        'depth': out_dir / f'{stem}_depth.pgm',
        'rgb': out_dir / f'{stem}_rgb.ppm',
    }
    paths['semantic'].write_bytes(encode_pgm(frame.semantic, 255))
    paths['depth'].write_bytes(encode_pgm(np.round(frame.depth * 1000.0), 65535))
    paths['rgb'].write_bytes(encode_ppm(frame.rgb))
    return paths
