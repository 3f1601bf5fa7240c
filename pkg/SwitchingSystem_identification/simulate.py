__all__ = ['SamplingSpec', 'Trajectory', 'vector_field', 'integrate',
           'generate_dataset']

import logging
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .common import SamplingScheme, DivergenceError, ConfigError
from .config import Config
from .core import Dataset, eval_mode, region_mode, region_modes


def _array(values, ndmin=1):
    if values is None:
        return None
    return np.array(values, dtype=float, ndmin=ndmin)


@dataclass
class SamplingSpec:
    """how a dataset is drawn from a switching system

    :param scheme: uniform-box or trajectory sampling
    :param n_samples: number of samples N
    :param lower: lower box corner (uniform-box)
    :param upper: upper box corner (uniform-box)
    :param initial_conditions: list of initial states (trajectory)
    :param dt: integration step (trajectory)
    :param horizon: integration horizon T (trajectory)
    :param noise_std: standard deviation of Gaussian noise on zdot
    :param seed: seed of the random number generator
    """
    scheme: SamplingScheme = SamplingScheme.UNIFORM_BOX
    n_samples: int = 2000
    lower: Optional[np.ndarray] = None
    upper: Optional[np.ndarray] = None
    initial_conditions: Optional[np.ndarray] = None
    dt: float = 0.01
    horizon: float = 10.
    noise_std: float = 0.
    seed: int = 0

    def __post_init__(self):
        try:
            self.scheme = SamplingScheme(self.scheme)
        except ValueError:
            raise ConfigError(f'unknown sampling scheme {self.scheme}',
                              field='sampling.scheme')
        self.n_samples = int(self.n_samples)
        self.lower = _array(self.lower)
        self.upper = _array(self.upper)
        self.initial_conditions = _array(self.initial_conditions, ndmin=2)
        self.dt = float(self.dt)
        self.horizon = float(self.horizon)
        self.noise_std = float(self.noise_std)
        self.seed = int(self.seed)

        if self.n_samples < 1:
            raise ConfigError('need at least one sample',
                              field='sampling.n_samples')
        if self.noise_std < 0:
            raise ConfigError('noise standard deviation must be >= 0',
                              field='sampling.noise_std')
        if self.scheme == SamplingScheme.UNIFORM_BOX:
            if self.lower is None or self.upper is None or \
                    self.lower.shape != self.upper.shape:
                raise ConfigError('uniform-box sampling needs lower and '
                                  'upper corners of equal length',
                                  field='sampling.lower')
            if np.any(self.lower >= self.upper):
                raise ConfigError('empty sampling box',
                                  field='sampling.upper')
        else:
            if self.initial_conditions is None or \
                    self.initial_conditions.size == 0:
                raise ConfigError('trajectory sampling needs initial '
                                  'conditions',
                                  field='sampling.initial_conditions')
            if self.dt <= 0 or self.horizon <= 0 or self.dt > self.horizon:
                raise ConfigError('need 0 < dt <= horizon',
                                  field='sampling.dt')

    @property
    def to_dict(self):
        d = {'scheme': self.scheme.value,
             'n_samples': self.n_samples,
             'noise_std': self.noise_std,
             'seed': self.seed}
        if self.scheme == SamplingScheme.UNIFORM_BOX:
            d['lower'] = self.lower.tolist()
            d['upper'] = self.upper.tolist()
        else:
            d['initial_conditions'] = self.initial_conditions.tolist()
            d['dt'] = self.dt
            d['horizon'] = self.horizon
        return d


class Trajectory(object):
    """states and active modes on a uniform time grid"""

    def __init__(self, times, states, modes):
        self.times = np.asarray(times)
        self.states = np.asarray(states)
        self.modes = np.asarray(modes, dtype=int)
        if not (len(self.times) == len(self.states) == len(self.modes)):
            raise ValueError('trajectory arrays of different lengths')

    def __len__(self):
        return len(self.times)

    @property
    def n(self):
        return self.states.shape[1]

    @property
    def switches(self):
        return int(np.sum(self.modes[1:] != self.modes[:-1]))


def _active_mode(model, z):
    if model.M == 1:
        return 0
    return region_mode(model.surfaces, model.modebook, z)


def vector_field(model):
    """f(z) of the switching system, the mode resolved pointwise"""
    if model.M > 1 and model.surfaces is None:
        raise LookupError('model has no switching surfaces and cannot be '
                          'simulated')

    def f(z):
        return eval_mode(model.modes[_active_mode(model, z)], model.basis, z)
    return f


def integrate(model, z0, dt, T):
    """classical fourth order Runge-Kutta with a fixed step

    The step is T / ceil(T / dt) so that the grid ends at T. The active
    mode is re-resolved at every stage.

    :param model: the switching system
    :param z0: initial state
    :param dt: requested step size
    :param T: horizon
    """
    if dt <= 0 or T <= 0 or dt > T:
        raise ValueError(f'need 0 < dt <= T, got dt={dt}, T={T}')
    f = vector_field(model)
    steps = max(1, math.ceil(T / dt - 1e-9))
    h = T / steps
    times = h * np.arange(steps + 1)
    states = np.empty((steps + 1, model.n))
    z = np.asarray(z0, dtype=float).copy()
    states[0] = z
    for s in range(steps):
        k1 = f(z)
        k2 = f(z + 0.5 * h * k1)
        k3 = f(z + 0.5 * h * k2)
        k4 = f(z + h * k3)
        z = z + h * (k1 + 2. * k2 + 2. * k3 + k4) / 6.
        if not np.all(np.isfinite(z)):
            raise DivergenceError(
                f'state diverged after t={times[s]}', last_time=times[s])
        states[s + 1] = z
    if model.M == 1:
        modes = np.zeros(steps + 1, dtype=int)
    else:
        modes = region_modes(model.surfaces, model.modebook, states)
    traj = Trajectory(times, states, modes)
    if steps > 1 and traj.switches > Config.CHATTER_FRACTION * steps:
        logging.warning(f'trajectory from {np.asarray(z0).tolist()} '
                        f'switches mode on {traj.switches} of {steps} '
                        'steps, possible chattering')
    return traj


def _derivatives(model, states, modes):
    Phi = model.basis.evaluate_many(states)
    coeffs = np.array([m.coeffs for m in model.modes])
    return np.einsum('inp,ip->in', coeffs[modes], Phi)


def generate_dataset(model, spec):
    """draw a labelled dataset from a switching system

    :param model: the ground-truth switching system
    :param spec: the sampling specification
    :type spec: SamplingSpec
    """
    rng = np.random.default_rng(spec.seed)
    if spec.scheme == SamplingScheme.UNIFORM_BOX:
        if spec.lower.shape[0] != model.n:
            raise ConfigError(f'sampling box has dimension '
                              f'{spec.lower.shape[0]}, system has '
                              f'{model.n}', field='sampling.lower')
        states = rng.uniform(spec.lower, spec.upper,
                             size=(spec.n_samples, model.n))
        generator = f'uniform box {spec.lower.tolist()} x ' \
            f'{spec.upper.tolist()}'
    else:
        pool = [integrate(model, z0, spec.dt, spec.horizon).states
                for z0 in spec.initial_conditions]
        pool = np.concatenate(pool)
        idx = np.linspace(0, len(pool) - 1, spec.n_samples).round()
        states = pool[idx.astype(int)]
        generator = f'{len(spec.initial_conditions)} trajectories, ' \
            f'dt={spec.dt}, T={spec.horizon}'
    if model.M == 1:
        modes = np.zeros(len(states), dtype=int)
    else:
        modes = region_modes(model.surfaces, model.modebook, states)
    derivatives = _derivatives(model, states, modes)
    if spec.noise_std > 0:
        derivatives = derivatives + rng.normal(0., spec.noise_std,
                                               size=derivatives.shape)
    balance = np.bincount(modes, minlength=model.M) / len(modes)
    logging.info(f'generated {len(states)} samples, mode balance '
                 f'{np.round(balance, 3).tolist()}')
    provenance = {'seed': spec.seed, 'generator': generator,
                  'scheme': spec.scheme.value}
    return Dataset(states, derivatives, labels=modes, provenance=provenance)
