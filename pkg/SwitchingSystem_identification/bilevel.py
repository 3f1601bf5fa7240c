__all__ = ['BilevelConfig', 'IterationRecord', 'init_dynamics', 'identify',
           'reseed_unassigned', 'blockwise_optimality_check']

import logging
import time
from dataclasses import dataclass, asdict
from typing import Optional

import numpy as np

from .assign import assign_modes, identification_cost, tightness_ratio
from .common import (Relaxation, InitScheme, LambdaMode, ConfigError,
                     SolverError, DimensionError)
from .config import Config
from .core import (MonomialBasis, ModeDynamics, ModeAssignment, Dataset,
                   SwitchingSystemModel, mode_values_many)
from .evaluate import align_labels, apply_alignment
from .fit import fit_dynamics, lambda_weights


def _enum(cls, value, field):
    try:
        return cls(value)
    except ValueError:
        choices = ', '.join(c.value for c in cls)
        raise ConfigError(f'{value} is not one of {choices}', field=field)


@dataclass
class BilevelConfig:
    """parameters of the alternating identification

    :param M: number of modes
    :param degree: degree of the monomial basis of the dynamics
    :param eta: box bound on the mode coefficients
    :param relaxation: how the mode assignment is solved
    :param max_iters: maximum number of alternations
    :param cost_tol: stop once the cost decreases by less than this
    :param init: identity or random initial dynamics
    :param init_seed: seed of the random initial dynamics
    :param init_scale: random coefficients are uniform in [-scale, scale]
    :param lambda_mode: feed soft or hardened indicators to the fit
    :param rank_tol: rank-one tolerance of the tightness ratio
    :param reseed_unassigned: refit modes left without samples on the
                              worst explained samples
    """
    M: int
    degree: int
    eta: float = 10.
    relaxation: Relaxation = Relaxation.LP
    max_iters: int = 25
    cost_tol: float = 1e-6
    init: InitScheme = InitScheme.IDENTITY
    init_seed: int = 0
    init_scale: float = 1.
    lambda_mode: LambdaMode = LambdaMode.SOFT
    rank_tol: Optional[float] = None
    reseed_unassigned: bool = True

    def __post_init__(self):
        self.relaxation = _enum(Relaxation, self.relaxation,
                                'identify.relaxation')
        self.init = _enum(InitScheme, self.init, 'identify.init')
        self.lambda_mode = _enum(LambdaMode, self.lambda_mode,
                                 'identify.lambda_mode')
        if int(self.M) < 1:
            raise ConfigError('need at least one mode', field='identify.M')
        if int(self.degree) < 0:
            raise ConfigError('basis degree must be >= 0',
                              field='identify.degree')
        if int(self.max_iters) < 1:
            raise ConfigError('max_iters must be >= 1',
                              field='identify.max_iters')
        if self.cost_tol < 0:
            raise ConfigError('cost_tol must be >= 0',
                              field='identify.cost_tol')
        if self.eta <= 0:
            raise ConfigError('eta must be positive', field='identify.eta')
        if self.init_scale <= 0:
            raise ConfigError('init_scale must be positive',
                              field='identify.init_scale')
        self.M = int(self.M)
        self.degree = int(self.degree)
        self.max_iters = int(self.max_iters)
        if self.rank_tol is None:
            self.rank_tol = Config.RANK_TOL

    @property
    def to_dict(self):
        d = asdict(self)
        for k in ['relaxation', 'init', 'lambda_mode']:
            d[k] = d[k].value
        return d


@dataclass
class IterationRecord:
    """diagnostics of one alternation"""
    iteration: int
    cost: float
    mismatch_prev: Optional[int]
    mismatch_truth: Optional[int]
    tightness_ratio: Optional[float]
    assign_seconds: float
    fit_seconds: float

    @property
    def to_dict(self):
        return asdict(self)


def init_dynamics(config, n):
    """initial coefficient matrices of every mode

    :param config: the identification parameters
    :type config: BilevelConfig
    :param n: state dimension
    """
    basis = MonomialBasis(n, config.degree)
    if config.init == InitScheme.IDENTITY:
        if config.degree < 1:
            raise ConfigError('identity initialization needs a basis of '
                              'degree >= 1', field='identify.init')
        C = np.zeros((n, basis.size))
        for k in range(n):
            C[k, basis.linear_index(k)] = 1.
        return [ModeDynamics(C) for j in range(config.M)]
    rng = np.random.default_rng(config.init_seed)
    return [ModeDynamics(rng.uniform(-config.init_scale, config.init_scale,
                                     size=(n, basis.size)))
            for j in range(config.M)]


def _check_initial(initial, basis, M):
    if len(initial) != M:
        raise DimensionError(f'{len(initial)} initial modes, expected {M}')
    for j, mode in enumerate(initial):
        if mode.coeffs.shape != (basis.n, basis.size):
            raise DimensionError(
                f'initial mode {j} has shape {mode.coeffs.shape}, expected '
                f'({basis.n}, {basis.size})')
    return list(initial)


def _mismatch_truth(labels, truth, M):
    known = truth >= 0
    if not np.any(known):
        return None
    M = max(M, int(truth.max()) + 1)
    if M > Config.MAX_ALIGN_MODES:
        return None
    aligned = apply_alignment(labels, align_labels(labels, truth, M))
    return int(np.sum(aligned[known] != truth[known]))


def reseed_unassigned(dataset, modes, weights, basis, eta):
    """refit every mode without samples on the worst explained samples

    Identical initial modes tie on every sample, the lowest mode takes all
    of them and the others would never move. Each empty mode, in index
    order, is fitted alone to the next ceil(N/M) samples of largest l1
    residual. Empty modes carry no weight, so the cost is unchanged.

    :param weights: N x M mode weights of the current iterate
    :return: the list of ModeDynamics
    """
    empty = np.flatnonzero(weights.sum(axis=0) < Config.UNASSIGNED_WEIGHT)
    if empty.size == 0 or empty.size == len(modes):
        return modes
    values = mode_values_many(modes, basis, dataset.states)
    fitted = np.einsum('inj,ij->in', values, weights)
    residual = np.abs(dataset.derivatives - fitted).sum(axis=1)
    order = np.argsort(-residual, kind='stable')
    size = -(-len(dataset) // len(modes))
    modes = list(modes)
    for rank, j in enumerate(empty):
        idx = order[rank * size:(rank + 1) * size]
        if idx.size == 0:
            break
        subset = Dataset(dataset.states[idx], dataset.derivatives[idx])
        one = [ModeAssignment([1.], 0)] * idx.size
        modes[j] = fit_dynamics(subset, one, basis, 1, eta)[0]
        logging.info(f'mode {j} had no samples, refitted on {idx.size} '
                     'worst explained samples')
    return modes


def identify(dataset, config, initial=None):
    """alternate mode assignment and dynamics estimation

    Every iteration assigns modes with the current dynamics and then refits
    the dynamics to the new assignment. The loop stops when the cost
    decreases by less than config.cost_tol, when the mode weights no longer
    change or after config.max_iters iterations. An iterate that increases
    the cost by more than Config.MONOTONE_TOL is discarded. Modes left
    without samples are reseeded between iterations unless disabled.

    :param dataset: the measurements
    :param config: the identification parameters
    :type config: BilevelConfig
    :param initial: optional list of ModeDynamics to start from
    :return: the model without surfaces, the list of IterationRecord and
             the mode assignments of the accepted iterate
    """
    if len(dataset) < 1:
        raise ValueError('cannot identify from an empty dataset')
    basis = MonomialBasis(dataset.n, config.degree)
    if initial is None:
        modes = init_dynamics(config, dataset.n)
    else:
        modes = _check_initial(initial, basis, config.M)

    history = []
    assignments = None
    prev_cost = None
    prev_labels = None
    prev_weights = None
    for it in range(1, config.max_iters + 1):
        start = time.perf_counter()
        try:
            new_assignments = assign_modes(dataset, modes, basis,
                                           config.relaxation)
        except SolverError as e:
            raise SolverError(f'iteration {it}: {e}', index=it) from e
        assign_seconds = time.perf_counter() - start

        start = time.perf_counter()
        try:
            new_modes = fit_dynamics(dataset, new_assignments, basis,
                                     config.M, config.eta, previous=modes,
                                     lambda_mode=config.lambda_mode)
        except SolverError as e:
            raise SolverError(f'iteration {it}: {e}', index=it) from e
        fit_seconds = time.perf_counter() - start

        weights = lambda_weights(new_assignments, config.lambda_mode)
        cost = identification_cost(dataset, new_modes, basis, weights)
        if prev_cost is not None and cost > prev_cost + Config.MONOTONE_TOL:
            logging.warning(f'iteration {it} raised the cost from '
                            f'{prev_cost:.6g} to {cost:.6g}, discarding it')
            break

        labels = np.array([a.hardened for a in new_assignments])
        mismatch_prev = None if prev_labels is None else \
            int(np.sum(labels != prev_labels))
        mismatch_truth = _mismatch_truth(labels, dataset.labels, config.M)
        ratio = None
        if config.relaxation == Relaxation.SDP:
            ratio = tightness_ratio(new_assignments, config.rank_tol)
        record = IterationRecord(it, cost, mismatch_prev, mismatch_truth,
                                 ratio, assign_seconds, fit_seconds)
        history.append(record)
        logging.info(f'iteration {it}: cost {cost:.6g}, changed labels '
                     f'{mismatch_prev}, mismatch vs truth {mismatch_truth}'
                     + ('' if ratio is None else f', tight {ratio:.3f}'))

        modes = new_modes
        assignments = new_assignments
        if prev_cost is not None and prev_cost - cost < config.cost_tol:
            break
        if prev_weights is not None and np.allclose(
                weights, prev_weights, rtol=0., atol=Config.SIMPLEX_TOL):
            break
        if config.reseed_unassigned and it < config.max_iters:
            modes = reseed_unassigned(dataset, modes, weights, basis,
                                      config.eta)
        prev_cost = cost
        prev_labels = labels
        prev_weights = weights

    logging.info(f'identification finished after {len(history)} '
                 f'iterations, cost {history[-1].cost:.6g}')
    return SwitchingSystemModel(basis, modes), history, assignments


def blockwise_optimality_check(dataset, model, assignments, config):
    """re-solve each block once with the other held fixed

    :return: assign_gap and fit_gap, the cost improvements achieved by a
             fresh mode assignment and a fresh dynamics fit
    """
    basis = model.basis
    weights = lambda_weights(assignments, config.lambda_mode)
    used = identification_cost(dataset, model.modes, basis, weights)

    reassigned = assign_modes(dataset, model.modes, basis, config.relaxation)
    assign_cost = identification_cost(
        dataset, model.modes, basis,
        lambda_weights(reassigned, config.lambda_mode))

    refit = fit_dynamics(dataset, assignments, basis, model.M, config.eta,
                         previous=model.modes,
                         lambda_mode=config.lambda_mode)
    fit_cost = identification_cost(dataset, refit, basis, weights)
    return max(0., used - assign_cost), max(0., used - fit_cost)
