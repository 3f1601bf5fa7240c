__all__ = ['SurfaceFitConfig', 'SurfaceFit', 'MarginCertificate',
           'make_modebook', 'surface_signs', 'surface_labels', 'surface_lp',
           'fit_surfaces', 'margin_certificate', 'admissible_epsilon',
           'normalize_surfaces', 'recover_surfaces']

import logging
import math
from dataclasses import dataclass, asdict

import numpy as np
import scipy.sparse as sp

from .common import ConfigError, SolverError, DimensionError
from .config import Config
from .convex import LinearProgramSpec, solve_lp
from .core import ModeBook, SurfaceSet


@dataclass
class SurfaceFitConfig:
    """parameters of the soft-margin surface program

    :param degree: degree of the surface polynomials
    :param epsilon: classification margin
    :param beta: weight of the l1 penalty on the coefficients
    :param eta: box bound on the coefficients
    """
    degree: int
    epsilon: float = 1e-2
    beta: float = 1e-2
    eta: float = 10.

    def __post_init__(self):
        if int(self.degree) < 0:
            raise ConfigError('surface degree must be >= 0',
                              field='surface.degree')
        self.degree = int(self.degree)
        if self.epsilon <= 0:
            raise ConfigError('margin must be positive',
                              field='surface.epsilon')
        if self.beta < 0:
            raise ConfigError('sparsity weight must be >= 0',
                              field='surface.beta')
        if self.eta <= 0:
            raise ConfigError('box bound must be positive',
                              field='surface.eta')

    @property
    def to_dict(self):
        return asdict(self)


class SurfaceFit(object):
    """result of the soft-margin surface program

    :param surfaces: the fitted SurfaceSet
    :param slacks: L x N margin violations
    :param objectives: optimal objective of every surface program
    """

    def __init__(self, surfaces, slacks, objectives):
        self.surfaces = surfaces
        self.slacks = np.asarray(slacks)
        self.objectives = np.asarray(objectives)

    @property
    def total_slack(self):
        return float(self.slacks.sum())

    @property
    def l1_norms(self):
        return np.abs(self.surfaces.surfaces).sum(axis=1)

    @property
    def objective(self):
        return float(self.objectives.sum())


class MarginCertificate(object):
    """largest margin achievable by each surface inside the box

    t > 0 proves that the labelled points are strictly separable by
    polynomials of the basis degree.
    """

    def __init__(self, margins, coefficients):
        self.margins = np.asarray(margins)
        self.coefficients = np.atleast_2d(coefficients)

    @property
    def t(self):
        return float(self.margins.min())

    @property
    def l1_norm(self):
        """S, the summed l1 norm of the certifying coefficients"""
        return float(np.abs(self.coefficients).sum())

    @property
    def separable(self):
        return self.t > Config.SOLVER_TOL

    @property
    def to_dict(self):
        return {'t': self.t, 'margins': self.margins.tolist(),
                'coefficients': self.coefficients.tolist()}


def make_modebook(M):
    """binary sign codes, bit 0 is +1, most significant bit first"""
    if M < 1:
        raise ValueError('need at least one mode')
    L = math.ceil(math.log2(max(M, 2)))
    codes = [[1 - 2 * ((j >> (L - 1 - b)) & 1) for b in range(L)]
             for j in range(M)]
    return ModeBook(codes)


def surface_labels(assignments):
    """hardened mode labels of the assignments"""
    return np.array([a.hardened for a in assignments], dtype=int)


def surface_signs(labels, modebook):
    """N x L target signs sigma of every point and surface"""
    labels = np.asarray(labels, dtype=int)
    if np.any(labels < 0) or np.any(labels >= modebook.M):
        raise ValueError(f'labels must be in 0..{modebook.M - 1}')
    return modebook.codes[labels]


def surface_lp(Phi, sigma, epsilon, beta, eta):
    """soft-margin program of one surface

    variables are the P coefficients a, N slacks xi and P bounds zeta on
    |a|; minimizes sum(xi) + beta sum(zeta) subject to
    sigma_i a^T phi_i >= epsilon - xi_i
    """
    N, P = Phi.shape
    signed = sp.csr_matrix(-sigma[:, None] * Phi)
    eye_P = sp.identity(P, format='csr')
    margin = sp.hstack([signed, -sp.identity(N, format='csr'),
                        sp.csr_matrix((N, P))])
    upper = sp.hstack([eye_P, sp.csr_matrix((P, N)), -eye_P])
    lower = sp.hstack([-eye_P, sp.csr_matrix((P, N)), -eye_P])
    A_ub = sp.vstack([margin, upper, lower])
    b_ub = np.concatenate([np.full(N, -epsilon), np.zeros(2 * P)])
    c = np.concatenate([np.zeros(P), np.ones(N), np.full(P, beta)])
    lo = np.concatenate([np.full(P, -eta), np.zeros(N + P)])
    hi = np.concatenate([np.full(P, eta), np.full(N + P, np.inf)])
    return LinearProgramSpec(c, A_ub=A_ub, b_ub=b_ub, lo=lo, hi=hi)


def _check_points(states, labels, basis):
    states = np.atleast_2d(np.asarray(states, dtype=float))
    if states.shape[0] < 1:
        raise ValueError('need at least one point')
    if states.shape[1] != basis.n:
        raise DimensionError(f'points of dimension {states.shape[1]} for a '
                             f'basis of dimension {basis.n}')
    if len(labels) != states.shape[0]:
        raise DimensionError(f'{len(labels)} labels for '
                             f'{states.shape[0]} points')
    return states


def fit_surfaces(states, labels, modebook, basis, config):
    """fit switching surfaces separating the labelled points

    the program decouples into one linear program per surface

    :param states: N x n points
    :param labels: mode label of every point, 0..M-1
    :param modebook: the sign codes of the modes
    :param basis: monomial basis of the surfaces
    :param config: margin, sparsity weight and box bound
    :type config: SurfaceFitConfig
    :rtype: SurfaceFit
    """
    states = _check_points(states, labels, basis)
    sigma = surface_signs(labels, modebook)
    Phi = basis.evaluate_many(states)
    N, P = Phi.shape
    coefficients = np.empty((modebook.L, P))
    slacks = np.empty((modebook.L, N))
    objectives = np.empty(modebook.L)
    for ell in range(modebook.L):
        res = solve_lp(surface_lp(Phi, sigma[:, ell], config.epsilon,
                                  config.beta, config.eta))
        if not res.optimal:
            raise SolverError(f'surface {ell} program failed: '
                              f'{res.status.name}', index=ell)
        coefficients[ell] = res.x[:P]
        slacks[ell] = np.clip(res.x[P:P + N], 0., None)
        objectives[ell] = res.objective
    fit = SurfaceFit(SurfaceSet(basis, coefficients), slacks, objectives)
    logging.info(f'fitted {modebook.L} surfaces of degree {basis.d}, total '
                 f'slack {fit.total_slack:.3g}')
    return fit


def margin_certificate(states, labels, modebook, basis, eta):
    """maximize the margin t of every surface inside the coefficient box

    :param states: N x n points
    :param labels: mode label of every point, 0..M-1
    :param modebook: the sign codes of the modes
    :param basis: monomial basis of the surfaces
    :param eta: box bound on the coefficients
    :rtype: MarginCertificate
    """
    states = _check_points(states, labels, basis)
    sigma = surface_signs(labels, modebook)
    Phi = basis.evaluate_many(states)
    N, P = Phi.shape
    margins = np.empty(modebook.L)
    coefficients = np.empty((modebook.L, P))
    for ell in range(modebook.L):
        # variables (a, t): t - sigma_i a^T phi_i <= 0
        A_ub = sp.hstack([sp.csr_matrix(-sigma[:, ell, None] * Phi),
                          sp.csr_matrix(np.ones((N, 1)))])
        c = np.zeros(P + 1)
        c[-1] = -1.
        lp = LinearProgramSpec(
            c, A_ub=A_ub, b_ub=np.zeros(N),
            lo=np.concatenate([np.full(P, -eta), [-np.inf]]),
            hi=np.concatenate([np.full(P, eta), [np.inf]]))
        res = solve_lp(lp)
        if not res.optimal:
            raise SolverError(f'margin certificate of surface {ell} failed: '
                              f'{res.status.name}', index=ell)
        margins[ell] = res.x[-1]
        coefficients[ell] = res.x[:P]
    return MarginCertificate(margins, coefficients)


def admissible_epsilon(t, beta, S, N, L):
    """interval (lo, hi] of margins guaranteeing a nonzero zero-slack fit

    :return: (beta*S/(N*L), t) or None when the interval is empty
    """
    if t <= 0:
        return None
    lo = beta * S / (N * L)
    if lo >= t:
        return None
    return lo, t


def normalize_surfaces(surfaces):
    """scale every surface so that its largest coefficient magnitude is 1

    the scale is positive, the regions are unchanged
    """
    coefficients = np.array(surfaces.surfaces)
    scale = np.abs(coefficients).max(axis=1)
    scale[scale == 0] = 1.
    return SurfaceSet(surfaces.basis, coefficients / scale[:, None])


def recover_surfaces(states, labels, modebook, basis, config):
    """certify separability, then fit the surfaces

    :return: the SurfaceFit, the MarginCertificate and the admissible
             margin interval (None if empty)
    """
    cert = margin_certificate(states, labels, modebook, basis, config.eta)
    if not cert.separable:
        logging.warning(f'labelled points are not separable at degree '
                        f'{basis.d} (t={cert.t:.3g}), fitting with '
                        f'epsilon={config.epsilon}')
        interval = None
    else:
        interval = admissible_epsilon(cert.t, config.beta, cert.l1_norm,
                                      len(labels), modebook.L)
        if interval is None or not interval[0] < config.epsilon <= \
                interval[1]:
            logging.warning(f'epsilon={config.epsilon} is outside the '
                            f'admissible interval {interval}')
    fit = fit_surfaces(states, labels, modebook, basis, config)
    return fit, cert, interval
