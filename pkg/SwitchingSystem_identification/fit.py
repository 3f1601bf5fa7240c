__all__ = ['fit_dynamics', 'lambda_weights', 'coordinate_lp']

import logging

import numpy as np
import scipy.sparse as sp

from .assign import harden
from .common import LambdaMode, SolverError
from .config import Config
from .convex import LinearProgramSpec, solve_lp
from .core import ModeDynamics


def lambda_weights(assignments, lambda_mode=LambdaMode.SOFT):
    """N x M matrix of mode weights used by the dynamics fit"""
    if lambda_mode == LambdaMode.SOFT:
        return np.array([a.lam for a in assignments])
    elif lambda_mode == LambdaMode.HARDENED:
        M = assignments[0].M
        weights = np.zeros((len(assignments), M))
        for i, a in enumerate(assignments):
            weights[i, harden(a.lam)] = 1.
        return weights
    raise ValueError(f'unknown lambda mode {lambda_mode}')


def coordinate_lp(Phi, weights, target, eta, fixed):
    """l1 fit of row k of every C_j

    variables are the M*P coefficients (mode-major) followed by one slack
    per sample

    :param Phi: N x P feature matrix
    :param weights: N x M mode weights
    :param target: the k-th derivative component of every sample
    :param eta: coefficient box
    :param fixed: M x P array of fixed coefficients, NaN where free
    """
    N, P = Phi.shape
    M = weights.shape[1]
    G = sp.csr_matrix((weights[:, :, None] * Phi[:, None, :])
                      .reshape(N, M * P))
    eye = sp.identity(N, format='csr')
    A_ub = sp.vstack([sp.hstack([G, -eye]), sp.hstack([-G, -eye])])
    b_ub = np.concatenate([target, -target])
    c = np.concatenate([np.zeros(M * P), np.ones(N)])
    fixed = fixed.reshape(M * P)
    free = np.isnan(fixed)
    lo = np.concatenate([np.where(free, -eta, fixed), np.zeros(N)])
    hi = np.concatenate([np.where(free, eta, fixed), np.full(N, np.inf)])
    return LinearProgramSpec(c, A_ub=A_ub, b_ub=b_ub, lo=lo, hi=hi)


def fit_dynamics(dataset, assignments, basis, M, eta, previous=None,
                 lambda_mode=LambdaMode.SOFT, tol=None):
    """estimate all mode coefficient matrices by l1 linear programming

    The program separates into one LP per output coordinate since row k of
    every C_j only enters the k-th residual component. Modes whose total
    weight is below Config.UNASSIGNED_WEIGHT keep their previous
    coefficients (zero if there are none).

    :param dataset: the measurements
    :param assignments: one ModeAssignment per sample
    :param basis: the monomial basis of the dynamics
    :param M: number of modes
    :param eta: coefficient box bound
    :param previous: optional list of ModeDynamics from the last iterate
    :param lambda_mode: use soft or hardened mode indicators
    :return: list of ModeDynamics
    """
    if M < 1:
        raise ValueError('need at least one mode')
    if eta <= 0:
        raise ValueError(f'box bound must be positive, got {eta}')
    if len(assignments) != len(dataset):
        raise ValueError(f'{len(assignments)} assignments for '
                         f'{len(dataset)} samples')
    n, P = basis.n, basis.size
    weights = lambda_weights(assignments, lambda_mode)
    if weights.shape[1] != M:
        raise ValueError(f'assignments have {weights.shape[1]} modes, '
                         f'expected {M}')
    if previous is None:
        prev = np.zeros((M, n, P))
    else:
        prev = np.array([m.coeffs for m in previous])
    unassigned = weights.sum(axis=0) < Config.UNASSIGNED_WEIGHT
    for j in np.flatnonzero(unassigned):
        logging.info(f'mode {j} has no assigned samples, keeping its '
                     'coefficients')

    Phi = basis.evaluate_many(dataset.states)
    coeffs = np.empty((M, n, P))
    total = 0.
    for k in range(n):
        fixed = np.full((M, P), np.nan)
        fixed[unassigned] = prev[unassigned, k, :]
        lp = coordinate_lp(Phi, weights, dataset.derivatives[:, k], eta,
                           fixed)
        res = solve_lp(lp, tol=tol)
        if not res.optimal:
            raise SolverError(
                f'dynamics fit of coordinate {k} failed: {res.status.name}',
                index=k)
        coeffs[:, k, :] = res.x[:M * P].reshape(M, P)
        total += res.objective
    coeffs[~unassigned] = np.clip(coeffs[~unassigned], -eta, eta)
    logging.debug(f'dynamics fit objective {total}')
    return [ModeDynamics(coeffs[j]) for j in range(M)]
