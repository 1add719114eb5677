"""
Two-branch actor-critic network

A fusion layer embeds the 200-value state; an actor branch (two layers)
produces action probabilities and a critic branch (two layers) the state
value. Forward and backward passes are written out by hand in numpy.
"""
from dataclasses import dataclass
from typing import Dict, NamedTuple, Sequence, Tuple

import numpy as np

from .errors import ActionIndexError, NumericError
from .models import Action
from .params import RELU_GAIN, ParamLayout, clip_and_step, uniform_init
from .state import StateTensor

N_INPUT = 200
N_FUSE = 128
N_HIDDEN = 64
N_ACTIONS = len(Action)

LAYOUT = ParamLayout((
    ('fuse.W', (N_FUSE, N_INPUT)), ('fuse.b', (N_FUSE,)),
    ('actor1.W', (N_HIDDEN, N_FUSE)), ('actor1.b', (N_HIDDEN,)),
    ('actor2.W', (N_ACTIONS, N_HIDDEN)), ('actor2.b', (N_ACTIONS,)),
    ('critic1.W', (N_HIDDEN, N_FUSE)), ('critic1.b', (N_HIDDEN,)),
    ('critic2.W', (1, N_HIDDEN)), ('critic2.b', (1,)),
))
FAN_IN = {'fuse.W': N_INPUT, 'actor1.W': N_FUSE, 'actor2.W': N_HIDDEN, 'critic1.W': N_FUSE, 'critic2.W': N_HIDDEN}
BIASES = ('fuse.b', 'actor1.b', 'actor2.b', 'critic1.b', 'critic2.b')
# ReLU layers get RELU_GAIN; the two heads keep 1/sqrt(fan_in) so the initial policy is near uniform
GAIN = {'fuse.W': RELU_GAIN, 'actor1.W': RELU_GAIN, 'critic1.W': RELU_GAIN}

DEFAULT_BETA_ENTROPY = 0.01
DEFAULT_VALUE_COEFF = 0.5
DEFAULT_CLIP = 40.0


@dataclass(frozen=True, eq=False)
class PolicyParams:
    flat: np.ndarray

    def views(self) -> Dict[str, np.ndarray]:
        return LAYOUT.views(self.flat)

    def copy(self) -> 'PolicyParams':
        return PolicyParams(self.flat.copy())


@dataclass(frozen=True, eq=False)
class PolicyGradient:
    flat: np.ndarray


class PolicyOutput(NamedTuple):
    action_probs: np.ndarray
    value: float


class RolloutEntry(NamedTuple):
    state: StateTensor
    action: int
    ret: float


def init_params(seed: int) -> PolicyParams:
    return PolicyParams(uniform_init(LAYOUT, seed, FAN_IN, BIASES, GAIN))


def zero_params() -> PolicyParams:
    return PolicyParams(np.zeros(LAYOUT.size))


def _relu(x: np.ndarray) -> np.ndarray:
    return np.maximum(x, 0.0)


def _forward_batch(p: Dict[str, np.ndarray], X: np.ndarray) -> Dict[str, np.ndarray]:
    z1 = X @ p['fuse.W'].T + p['fuse.b']
    h = _relu(z1)
    za = h @ p['actor1.W'].T + p['actor1.b']
    ha = _relu(za)
    logits = ha @ p['actor2.W'].T + p['actor2.b']
    zc = h @ p['critic1.W'].T + p['critic1.b']
    hc = _relu(zc)
    value = (hc @ p['critic2.W'].T + p['critic2.b'])[:, 0]

    shifted = logits - logits.max(axis=1, keepdims=True)
    log_probs = shifted - np.log(np.exp(shifted).sum(axis=1, keepdims=True))
    probs = np.exp(log_probs)
    if not (np.all(np.isfinite(probs)) and np.all(np.isfinite(value))):
        raise NumericError('non-finite policy output; parameters are corrupted')
    return {'X': X, 'z1': z1, 'h': h, 'za': za, 'ha': ha, 'zc': zc, 'hc': hc,
            'log_probs': log_probs, 'probs': probs, 'value': value}


def forward(params: PolicyParams, s: StateTensor) -> PolicyOutput:
    cache = _forward_batch(params.views(), s.vector()[None, :])
    return PolicyOutput(action_probs=cache['probs'][0], value=float(cache['value'][0]))


def _unpack(rollout: Sequence[RolloutEntry]) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    if not rollout:
        raise ValueError('rollout must not be empty')
    actions = np.array([int(e.action) for e in rollout])
    if np.any((actions < 0) | (actions >= N_ACTIONS)):
        raise ActionIndexError(f'action indices must lie in 0..{N_ACTIONS - 1}, got {actions.tolist()}')
    X = np.stack([e.state.vector() for e in rollout])
    returns = np.array([float(e.ret) for e in rollout])
    return X, actions, returns


def rollout_loss(params: PolicyParams, rollout: Sequence[RolloutEntry],
                 beta_entropy: float = DEFAULT_BETA_ENTROPY, value_coeff: float = DEFAULT_VALUE_COEFF,
                 advantages: np.ndarray | None = None) -> float:
    """
    Mean actor-critic loss over a rollout

    advantages, when given, replace R - V in the policy term (the term treats
    them as constants); by default they are computed from these params.
    """
    X, actions, returns = _unpack(rollout)
    cache = _forward_batch(params.views(), X)
    value = cache['value']
    if advantages is None:
        advantages = returns - value
    chosen = cache['log_probs'][np.arange(len(actions)), actions]
    entropy = -(cache['probs'] * cache['log_probs']).sum(axis=1)
    per_step = -chosen * advantages + value_coeff * (returns - value) ** 2 - beta_entropy * entropy
    return float(per_step.mean())


def backward(params: PolicyParams, rollout: Sequence[RolloutEntry],
             beta_entropy: float = DEFAULT_BETA_ENTROPY, value_coeff: float = DEFAULT_VALUE_COEFF) -> PolicyGradient:
    """Gradient of rollout_loss with the advantage held constant"""
    X, actions, returns = _unpack(rollout)
    p = params.views()
    c = _forward_batch(p, X)
    T = len(actions)
    probs, log_probs, value = c['probs'], c['log_probs'], c['value']
    advantage = returns - value

    onehot = np.zeros_like(probs)
    onehot[np.arange(T), actions] = 1.0
    entropy = -(probs * log_probs).sum(axis=1, keepdims=True)
    d_logits = ((probs - onehot) * advantage[:, None] + beta_entropy * probs * (log_probs + entropy)) / T
    d_value = (-2.0 * value_coeff * advantage / T)[:, None]

    grad = np.zeros(LAYOUT.size)
    g = LAYOUT.views(grad)

    g['actor2.W'][...] = d_logits.T @ c['ha']
    g['actor2.b'][...] = d_logits.sum(axis=0)
    d_za = (d_logits @ p['actor2.W']) * (c['za'] > 0)
    g['actor1.W'][...] = d_za.T @ c['h']
    g['actor1.b'][...] = d_za.sum(axis=0)

    g['critic2.W'][...] = d_value.T @ c['hc']
    g['critic2.b'][...] = d_value.sum(axis=0)
    d_zc = (d_value @ p['critic2.W']) * (c['zc'] > 0)
    g['critic1.W'][...] = d_zc.T @ c['h']
    g['critic1.b'][...] = d_zc.sum(axis=0)

    d_z1 = (d_za @ p['actor1.W'] + d_zc @ p['critic1.W']) * (c['z1'] > 0)
    g['fuse.W'][...] = d_z1.T @ X
    g['fuse.b'][...] = d_z1.sum(axis=0)

    if not np.all(np.isfinite(grad)):
        raise NumericError('non-finite policy gradient')
    return PolicyGradient(grad)


def apply_gradient(params: PolicyParams, grad: PolicyGradient, lr: float, clip: float = DEFAULT_CLIP) -> PolicyParams:
    return PolicyParams(clip_and_step(params.flat, grad.flat, lr, clip))


def entropy(probs: np.ndarray) -> float:
    probs = np.asarray(probs)
    return float(-(probs * np.log(probs)).sum())
