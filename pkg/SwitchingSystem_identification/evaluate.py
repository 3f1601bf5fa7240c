__all__ = ['align_labels', 'apply_alignment', 'velocity_rmse', 'mode_metrics',
           'rollout_metrics', 'surface_agreement', 'predicted_modes',
           'evaluate_model', 'RolloutReport']

import logging
from itertools import permutations

import numpy as np

from .common import CapacityError, DivergenceError, DimensionError
from .config import Config
from .core import region_modes
from .simulate import integrate


def align_labels(pred, truth, M):
    """permutation of mode labels maximizing agreement with the truth

    :param pred: predicted labels 0..M-1
    :param truth: true labels 0..M-1, negative entries are ignored
    :param M: number of modes
    :return: tuple perm with perm[predicted] = aligned label; ties go to
             the lexicographically smallest permutation
    """
    if M > Config.MAX_ALIGN_MODES:
        raise CapacityError(
            f'label alignment of {M} modes exceeds the limit of '
            f'{Config.MAX_ALIGN_MODES}')
    pred = np.asarray(pred, dtype=int)
    truth = np.asarray(truth, dtype=int)
    if pred.shape != truth.shape:
        raise DimensionError('label vectors of different lengths')
    known = truth >= 0
    confusion = np.zeros((M, M), dtype=int)
    np.add.at(confusion, (pred[known], truth[known]), 1)
    best, best_score = None, -1
    for perm in permutations(range(M)):
        score = confusion[np.arange(M), perm].sum()
        if score > best_score:
            best, best_score = perm, score
    return tuple(best)


def apply_alignment(pred, perm):
    return np.asarray(perm, dtype=int)[np.asarray(pred, dtype=int)]


def mode_metrics(pred, truth, M):
    """accuracy and mean intersection over union after label alignment"""
    pred = np.asarray(pred, dtype=int)
    truth = np.asarray(truth, dtype=int)
    aligned = apply_alignment(pred, align_labels(pred, truth, M))
    accuracy = float(np.mean(aligned == truth))
    ious = []
    for j in range(M):
        p = aligned == j
        t = truth == j
        union = np.sum(p | t)
        ious.append(1. if union == 0 else np.sum(p & t) / union)
    return accuracy, float(np.mean(ious))


def predicted_modes(model, states):
    """active mode of every state according to the model's surfaces"""
    if model.M == 1:
        return np.zeros(len(states), dtype=int)
    if model.surfaces is None:
        raise LookupError('model has no switching surfaces, the active mode '
                          'is undecidable')
    return region_modes(model.surfaces, model.modebook, states)


def velocity_rmse(model, dataset):
    """root mean square derivative error normalized by N*n"""
    if dataset.n != model.n:
        raise DimensionError(f'dataset of dimension {dataset.n} for a '
                             f'model of dimension {model.n}')
    modes = predicted_modes(model, dataset.states)
    Phi = model.basis.evaluate_many(dataset.states)
    coeffs = np.array([m.coeffs for m in model.modes])
    fitted = np.einsum('inp,ip->in', coeffs[modes], Phi)
    err = dataset.derivatives - fitted
    return float(np.sqrt(np.mean(err ** 2)))


class RolloutReport(object):
    """per-trajectory and aggregate rollout errors

    :param trajectories: list of dicts with keys rollout_rmse, final_error,
                         max_error, diverged
    :param pairs: list of (true Trajectory, identified Trajectory) or None
                  for diverged runs
    """

    def __init__(self, trajectories, pairs):
        self.trajectories = trajectories
        self.pairs = pairs

    @property
    def error_curves(self):
        """state error norm over the time grid, None for diverged runs"""
        return [None if p is None else
                np.linalg.norm(p[1].states - p[0].states, axis=1)
                for p in self.pairs]

    @property
    def aggregate(self):
        keys = ['rollout_rmse', 'final_error', 'max_error']
        ok = [t for t in self.trajectories if not t['diverged']]
        if not ok:
            return {k: float('nan') for k in keys}
        return {k: float(np.mean([t[k] for t in ok])) for k in keys}

    @property
    def to_dict(self):
        return {'aggregate': self.aggregate,
                'trajectories': self.trajectories}


def rollout_metrics(true_model, model, initial_conditions, dt, T):
    """simulate both models from every initial condition and compare"""
    trajectories = []
    pairs = []
    for idx, z0 in enumerate(initial_conditions):
        try:
            ref = integrate(true_model, z0, dt, T)
            est = integrate(model, z0, dt, T)
        except DivergenceError as e:
            logging.warning(f'rollout {idx} diverged at t={e.last_time}')
            trajectories.append({'rollout_rmse': float('nan'),
                                 'final_error': float('nan'),
                                 'max_error': float('nan'),
                                 'diverged': True})
            pairs.append(None)
            continue
        err = np.linalg.norm(est.states - ref.states, axis=1)
        trajectories.append({
            'rollout_rmse': float(np.sqrt(np.mean(err ** 2 / ref.n))),
            'final_error': float(err[-1]),
            'max_error': float(err.max()),
            'diverged': False})
        pairs.append((ref, est))
    return RolloutReport(trajectories, pairs)


def surface_agreement(surfaces_a, modebook_a, surfaces_b, modebook_b,
                      states):
    """fraction of states assigned the same mode by two surface sets"""
    a = region_modes(surfaces_a, modebook_a, states)
    b = region_modes(surfaces_b, modebook_b, states)
    return float(np.mean(a == b))


def evaluate_model(true_model, model, test_set, initial_conditions, dt, T):
    """pointwise and rollout metrics of an identified model

    multi-mode models without switching surfaces cannot be simulated nor
    assigned modes; all metrics are skipped with a warning
    """
    metrics = {}
    if model.M > 1 and model.surfaces is None:
        logging.warning('identified model has no surfaces, skipping '
                        'pointwise and rollout metrics')
        return metrics, RolloutReport([], [])
    metrics['velocity_rmse'] = velocity_rmse(model, test_set)
    if test_set.labelled:
        pred = predicted_modes(model, test_set.states)
        M = max(model.M, true_model.M)
        accuracy, miou = mode_metrics(pred, test_set.labels, M)
        metrics['mode_accuracy'] = accuracy
        metrics['miou'] = miou
    report = rollout_metrics(true_model, model, initial_conditions, dt, T)
    metrics.update(report.aggregate)
    metrics['rollouts'] = report.trajectories
    return metrics, report
