__all__ = ['LinearProgramSpec', 'ShorBlockSpec', 'SolveStatus',
           'ShorBlockSolver', 'solve_lp', 'solve_shor_block']

import logging
import time

import cvxpy as cp
import numpy as np
import scipy.sparse as sp
from scipy.optimize import linprog

from .common import SolveCode, DimensionError
from .config import Config

# linprog status codes, 4 is HiGHS running into numerical difficulties
_LINPROG_CODES = {
    0: SolveCode.OPTIMAL,
    1: SolveCode.ITERATION_LIMIT,
    2: SolveCode.INFEASIBLE,
    3: SolveCode.UNBOUNDED,
    4: SolveCode.ITERATION_LIMIT,
}

_CVXPY_CODES = {
    cp.OPTIMAL: SolveCode.OPTIMAL,
    cp.OPTIMAL_INACCURATE: SolveCode.OPTIMAL,
    cp.INFEASIBLE: SolveCode.INFEASIBLE,
    cp.INFEASIBLE_INACCURATE: SolveCode.INFEASIBLE,
    cp.UNBOUNDED: SolveCode.UNBOUNDED,
    cp.UNBOUNDED_INACCURATE: SolveCode.UNBOUNDED,
}


class LinearProgramSpec(object):
    """min c^T x s.t. A_ub x <= b_ub, A_eq x = b_eq, lo <= x <= hi

    Missing systems are empty. Bounds default to x >= 0; use -inf/inf for
    free variables.
    """

    def __init__(self, c, A_ub=None, b_ub=None, A_eq=None, b_eq=None,
                 lo=None, hi=None):
        self.c = np.asarray(c, dtype=float)
        nvar = self.c.shape[0]
        self.A_ub, self.b_ub = self._system(A_ub, b_ub, nvar, 'inequality')
        self.A_eq, self.b_eq = self._system(A_eq, b_eq, nvar, 'equality')
        self.lo = np.zeros(nvar) if lo is None else \
            np.broadcast_to(np.asarray(lo, dtype=float), (nvar,)).copy()
        self.hi = np.full(nvar, np.inf) if hi is None else \
            np.broadcast_to(np.asarray(hi, dtype=float), (nvar,)).copy()
        if np.any(self.lo > self.hi):
            raise ValueError('lower bound exceeds upper bound')

    @staticmethod
    def _system(A, b, nvar, name):
        if A is None:
            return sp.csr_matrix((0, nvar)), np.zeros(0)
        A = sp.csr_matrix(A)
        b = np.asarray(b, dtype=float)
        if A.shape[1] != nvar or A.shape[0] != b.shape[0]:
            raise DimensionError(
                f'{name} system of shape {A.shape} with {b.shape[0]} '
                f'right hand sides for {nvar} variables')
        return A, b

    @property
    def num_variables(self):
        return self.c.shape[0]


class ShorBlockSpec(object):
    """one per-sample mode assignment block

    :param V: n x M matrix whose columns are the mode vector fields
    :param zdot: the measured derivative
    """

    def __init__(self, V, zdot):
        self.V = np.atleast_2d(np.asarray(V, dtype=float))
        self.zdot = np.asarray(zdot, dtype=float)
        if self.V.shape[0] != self.zdot.shape[0]:
            raise DimensionError(
                f'V has {self.V.shape[0]} rows, zdot has '
                f'{self.zdot.shape[0]} entries')
        if not (np.all(np.isfinite(self.V))
                and np.all(np.isfinite(self.zdot))):
            raise ValueError('block data must be finite')

    @property
    def n(self):
        return self.V.shape[0]

    @property
    def M(self):
        return self.V.shape[1]


class SolveStatus(object):
    """outcome of a convex solve

    the primal solution is only present when the status is optimal
    """

    def __init__(self, status, objective=None, x=None, iterations=0,
                 seconds=0.):
        self.status = status
        self.objective = objective
        self.x = x if status == SolveCode.OPTIMAL else None
        self.iterations = iterations
        self.seconds = seconds

    def __repr__(self):
        return f'<SolveStatus {self.status.name} objective={self.objective}>'

    @property
    def optimal(self):
        return self.status == SolveCode.OPTIMAL


def solve_lp(lp, tol=None):
    """solve a linear program with HiGHS

    :param lp: the linear program
    :type lp: LinearProgramSpec
    :param tol: primal and dual feasibility tolerance
    """
    tol = Config.SOLVER_TOL if tol is None else tol
    bounds = [(None if np.isinf(lo) else lo, None if np.isinf(hi) else hi)
              for lo, hi in zip(lp.lo, lp.hi)]
    has_ub = lp.A_ub.shape[0] > 0
    has_eq = lp.A_eq.shape[0] > 0
    start = time.perf_counter()
    res = linprog(
        lp.c,
        A_ub=lp.A_ub if has_ub else None, b_ub=lp.b_ub if has_ub else None,
        A_eq=lp.A_eq if has_eq else None, b_eq=lp.b_eq if has_eq else None,
        bounds=bounds, method='highs',
        options={'primal_feasibility_tolerance': tol,
                 'dual_feasibility_tolerance': tol})
    seconds = time.perf_counter() - start
    status = _LINPROG_CODES.get(res.status, SolveCode.ITERATION_LIMIT)
    if status != SolveCode.OPTIMAL:
        logging.debug(f'linear program not solved: {res.message}')
    iterations = getattr(res, 'nit', 0) or 0
    objective = float(res.fun) if status == SolveCode.OPTIMAL else None
    return SolveStatus(status, objective=objective, x=res.x,
                       iterations=int(iterations), seconds=seconds)


class ShorBlockSolver(object):
    """order-1 moment relaxation of one mode assignment block

    The problem is built once for a block shape (n, M) with V and zdot as
    parameters and re-solved for every sample. The bordered moment matrix
    Y = [[1, lam^T], [lam, Lambda]] is the only matrix variable.

    :param n: state dimension
    :param M: number of modes
    :param tol: interior point tolerance
    """

    def __init__(self, n, M, tol=None):
        if M < 1:
            raise ValueError('a Shor block needs at least one mode')
        self.n = n
        self.M = M
        self.tol = Config.SOLVER_TOL if tol is None else tol
        self._V = cp.Parameter((n, M))
        self._zdot = cp.Parameter(n)
        self._Y = cp.Variable((M + 1, M + 1), symmetric=True)
        self._delta = cp.Variable(n)
        lam = self._Y[0, 1:]
        residual = self._zdot - self._V @ lam
        constraints = [
            self._Y >> 0,
            self._Y[0, 0] == 1,
            cp.diag(self._Y)[1:] == lam,
            cp.sum(lam) == 1,
            residual <= self._delta,
            -residual <= self._delta,
            self._delta >= 0,
        ]
        self._problem = cp.Problem(cp.Minimize(cp.sum(self._delta)),
                                   constraints)

    def solve(self, block):
        """solve one block

        :param block: the block data
        :type block: ShorBlockSpec
        :return: lambda, Lambda, objective, status
        """
        if (block.n, block.M) != (self.n, self.M):
            raise DimensionError(
                f'block of shape ({block.n}, {block.M}) for a solver of '
                f'shape ({self.n}, {self.M})')
        self._V.value = block.V
        self._zdot.value = block.zdot
        start = time.perf_counter()
        try:
            self._problem.solve(solver=cp.CLARABEL,
                                tol_gap_abs=self.tol, tol_gap_rel=self.tol,
                                tol_feas=self.tol)
            code = _CVXPY_CODES.get(self._problem.status,
                                    SolveCode.ITERATION_LIMIT)
        except cp.SolverError as e:
            logging.debug(f'moment relaxation failed: {e}')
            code = SolveCode.ITERATION_LIMIT
        seconds = time.perf_counter() - start
        stats = self._problem.solver_stats
        iterations = getattr(stats, 'num_iters', 0) or 0
        if code != SolveCode.OPTIMAL:
            return None, None, None, SolveStatus(
                code, iterations=iterations, seconds=seconds)
        Y = np.array(self._Y.value)
        lam = Y[0, 1:].copy()
        Lam = Y[1:, 1:].copy()
        objective = float(self._problem.value)
        status = SolveStatus(code, objective=objective, x=Y,
                             iterations=iterations, seconds=seconds)
        return lam, Lam, objective, status


def solve_shor_block(block, tol=None):
    """solve the order-1 moment relaxation of a single block

    :param block: the block data
    :type block: ShorBlockSpec
    :param tol: interior point tolerance
    :return: lambda, Lambda, objective, status
    """
    return ShorBlockSolver(block.n, block.M, tol=tol).solve(block)
