__all__ = ['assign_exact', 'assign_lp', 'assign_sdp', 'assign_modes',
           'harden', 'rounding_bound_check', 'tightness_ratio',
           'verify_one_hot_certificate', 'first_order_mode',
           'identification_cost', 'simplex_lp']

import logging

import numpy as np
import scipy.sparse as sp

from .common import Relaxation, SolverError
from .config import Config
from .convex import (LinearProgramSpec, ShorBlockSpec, ShorBlockSolver,
                     solve_lp)
from .core import ModeAssignment, mode_values, mode_values_many


def harden(lam):
    """index of the largest component, lowest index on ties"""
    return int(np.argmax(np.asarray(lam)))


def _one_hot(j, M):
    e = np.zeros(M)
    e[j] = 1.
    return e


def _clean_simplex(lam):
    lam = np.clip(np.asarray(lam, dtype=float), 0., None)
    return lam / lam.sum()


def _vertex_costs(V, zdot):
    return np.abs(zdot[:, None] - V).sum(axis=0)


def _preferred_vertex(V, zdot, objective):
    """lowest canonical vertex attaining the relaxed optimum, if any"""
    costs = _vertex_costs(V, zdot)
    j = int(np.argmin(costs))
    if costs[j] <= objective + Config.VERTEX_TOL * max(1., abs(objective)):
        return j
    return None


def assign_exact(dataset, modes, basis):
    """exact per-sample optimum by enumerating the modes

    With the dynamics fixed the mixed-integer program decouples into
    argmin_j ||zdot - C_j phi(z)||_1 for every sample.
    """
    if not modes:
        raise ValueError('no modes to assign')
    M = len(modes)
    values = mode_values_many(modes, basis, dataset.states)
    costs = np.abs(dataset.derivatives[:, :, None] - values).sum(axis=1)
    best = np.argmin(costs, axis=1)
    return [ModeAssignment(_one_hot(j, M), int(j)) for j in best]


def simplex_lp(V, zdot):
    """min_{lam in simplex} ||zdot - V lam||_1 over x = (lam, delta)"""
    n, M = V.shape
    eye = sp.identity(n, format='csr')
    A_ub = sp.vstack([sp.hstack([-sp.csr_matrix(V), -eye]),
                      sp.hstack([sp.csr_matrix(V), -eye])])
    b_ub = np.concatenate([-zdot, zdot])
    A_eq = sp.hstack([sp.csr_matrix(np.ones((1, M))),
                      sp.csr_matrix((1, n))])
    c = np.concatenate([np.zeros(M), np.ones(n)])
    return LinearProgramSpec(c, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq,
                             b_eq=np.ones(1))


def assign_lp(dataset, modes, basis, prefer_vertex=True, tol=None):
    """simplex relaxation, one linear program per sample

    :param prefer_vertex: return the lowest canonical vertex whenever one
                          attains the relaxed optimum
    """
    if not modes:
        raise ValueError('no modes to assign')
    M = len(modes)
    assignments = []
    for i in range(len(dataset)):
        z = dataset.states[i]
        zdot = dataset.derivatives[i]
        V = mode_values(modes, basis, z)
        res = solve_lp(simplex_lp(V, zdot), tol=tol)
        if not res.optimal:
            raise SolverError(
                f'simplex relaxation of sample {i} failed: '
                f'{res.status.name}', index=i)
        j = _preferred_vertex(V, zdot, res.objective) \
            if prefer_vertex else None
        if j is not None:
            lam = _one_hot(j, M)
        else:
            lam = _clean_simplex(res.x[:M])
        assignments.append(ModeAssignment(lam, harden(lam)))
    return assignments


def assign_sdp(dataset, modes, basis, prefer_vertex=True, tol=None):
    """order-1 moment relaxation, one small SDP per sample"""
    if not modes:
        raise ValueError('no modes to assign')
    M = len(modes)
    solver = ShorBlockSolver(basis.n, M, tol=tol)
    assignments = []
    for i in range(len(dataset)):
        z = dataset.states[i]
        zdot = dataset.derivatives[i]
        V = mode_values(modes, basis, z)
        lam, Lam, objective, status = solver.solve(ShorBlockSpec(V, zdot))
        if not status.optimal:
            raise SolverError(
                f'moment relaxation of sample {i} failed: '
                f'{status.status.name}', index=i)
        j = _preferred_vertex(V, zdot, objective) if prefer_vertex else None
        if j is not None:
            lam = _one_hot(j, M)
            Lam = np.outer(lam, lam)
        else:
            lam = _clean_simplex(lam)
            Lam = 0.5 * (Lam + Lam.T)
            np.fill_diagonal(Lam, lam)
        logging.debug(f'sample {i}: objective {objective}')
        try:
            assignments.append(ModeAssignment(lam, harden(lam),
                                              moment_block=Lam))
        except ValueError as e:
            raise SolverError(f'moment relaxation of sample {i} returned '
                              f'an invalid block: {e}', index=i) from e
    return assignments


def assign_modes(dataset, modes, basis, relaxation):
    """mode assignment with the chosen relaxation"""
    if relaxation == Relaxation.LP:
        return assign_lp(dataset, modes, basis)
    elif relaxation == Relaxation.SDP:
        return assign_sdp(dataset, modes, basis)
    elif relaxation == Relaxation.EXACT:
        return assign_exact(dataset, modes, basis)
    raise ValueError(f'unknown relaxation {relaxation}')


def identification_cost(dataset, modes, basis, lambdas):
    """F(C, lam) = sum_i ||zdot_i - sum_j lam_ij C_j phi(z_i)||_1

    :param lambdas: N x M matrix of mode weights
    """
    values = mode_values_many(modes, basis, dataset.states)
    fitted = np.einsum('inj,ij->in', values, np.asarray(lambdas))
    return float(np.abs(dataset.derivatives - fitted).sum())


def rounding_bound_check(sample, modes, basis, lam_hat):
    """evaluate the loss increase bound for hardening a soft solution

    :return: lhs, rhs and whether lhs <= rhs
    """
    lam_hat = np.asarray(lam_hat, dtype=float)
    V = mode_values(modes, basis, sample.z)
    j = harden(lam_hat)
    lhs = float(np.abs(sample.zdot - V[:, j]).sum())
    dispersion = np.abs(V - V[:, [j]]).sum(axis=0)
    rhs = float(np.abs(sample.zdot - V @ lam_hat).sum()
                + lam_hat @ dispersion)
    return lhs, rhs, lhs <= rhs + Config.ROUNDING_SLACK


def _is_rank_one(bordered, rank_tol):
    eig = np.sort(np.linalg.eigvalsh(bordered))[::-1]
    return eig[1] <= rank_tol * eig[0]


def tightness_ratio(assignments, rank_tol=None):
    """fraction of samples whose bordered moment matrix is rank one"""
    rank_tol = Config.RANK_TOL if rank_tol is None else rank_tol
    if not assignments:
        raise ValueError('no assignments')
    tight = 0
    for i, a in enumerate(assignments):
        if a.moment_block is None:
            raise LookupError(f'assignment {i} has no moment block')
        if _is_rank_one(a.bordered, rank_tol):
            tight += 1
    return tight / len(assignments)


def first_order_mode(assignment, rank_tol=None):
    """mode read from the first-order moments of a rank-one block

    :return: the mode index, or None if the block is not rank one
    """
    rank_tol = Config.RANK_TOL if rank_tol is None else rank_tol
    if not _is_rank_one(assignment.bordered, rank_tol):
        return None
    return harden(assignment.lam)


def verify_one_hot_certificate(sample, modes, basis, j_star):
    """dual certificate that e_{j*} is the unique simplex relaxation optimum

    A True result is a proof; False is inconclusive.
    """
    if not 0 <= j_star < len(modes):
        raise ValueError(f'mode {j_star} out of range')
    if len(modes) == 1:
        return True
    V = mode_values(modes, basis, sample.z)
    w = np.sign(sample.zdot - V[:, j_star])
    scores = w @ V
    others = np.delete(scores, j_star)
    return bool(scores[j_star] > others.max() + Config.CERTIFICATE_MARGIN)
