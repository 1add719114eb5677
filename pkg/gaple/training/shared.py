"""Global parameter store shared by training workers"""
import hashlib
import threading
from typing import NamedTuple

import numpy as np

from ..policynet import DEFAULT_CLIP, PolicyGradient, PolicyParams, apply_gradient


class ParamSnapshot(NamedTuple):
    version: int
    params: PolicyParams
    checksum: str


def params_checksum(flat: np.ndarray) -> str:
    return hashlib.sha256(np.ascontiguousarray(flat).tobytes()).hexdigest()


def _record(version: int, params: PolicyParams) -> ParamSnapshot:
    flat = params.flat.copy()
    flat.setflags(write=False)
    return ParamSnapshot(version, PolicyParams(flat), params_checksum(flat))


class SharedParams:
    """
    Versioned global PolicyParams

    Readers get the current immutable record without locking; writers build the
    next record under a lock and swap the reference, so a snapshot is always one
    whole version whose checksum matches its parameters.
    """

    def __init__(self, params: PolicyParams):
        self._lock = threading.Lock()
        self._current = _record(0, params)

    def snapshot(self) -> ParamSnapshot:
        return self._current

    @property
    def version(self) -> int:
        return self._current.version

    @property
    def params(self) -> PolicyParams:
        return self._current.params

    def apply(self, grad: PolicyGradient, lr: float, clip: float = DEFAULT_CLIP) -> int:
        """Apply one gradient batch; returns the new version"""
        with self._lock:
            current = self._current
            self._current = _record(current.version + 1, apply_gradient(current.params, grad, lr, clip))
            return self._current.version
