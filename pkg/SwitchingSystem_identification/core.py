__all__ = ['MonomialBasis', 'ModeDynamics', 'SurfaceSet', 'ModeBook',
           'SwitchingSystemModel', 'Sample', 'Dataset', 'ModeAssignment',
           'basis_size', 'eval_basis', 'eval_mode', 'eval_system',
           'mode_values', 'mode_values_many', 'residual_l1', 'region_mode',
           'region_modes', 'sign_pattern']

import math
from itertools import combinations_with_replacement

import numpy as np

from .common import DimensionError, CapacityError
from .config import Config


def _frozen(values, dtype=float):
    arr = np.array(values, dtype=dtype)
    arr.setflags(write=False)
    return arr


def _check_vector(z, n, what='state'):
    z = np.asarray(z, dtype=float)
    if z.ndim != 1 or z.shape[0] != n:
        raise DimensionError(
            f'{what} has shape {z.shape}, expected ({n},)')
    return z


def basis_size(n, d):
    """number of monomials of total degree at most d in n variables

    :param n: state dimension
    :param d: maximum total degree
    """
    if n < 1 or d < 0:
        raise ValueError(f'invalid basis dimensions n={n}, d={d}')
    size = math.comb(n + d, d)
    if size > Config.MAX_BASIS_SIZE:
        raise CapacityError(
            f'basis with n={n}, d={d} has {size} monomials, more than '
            f'{Config.MAX_BASIS_SIZE}')
    return size


class MonomialBasis(object):
    """graded lexicographic monomial feature map

    The constant monomial comes first, then monomials of increasing total
    degree; within one degree the exponent tuples are in decreasing
    lexicographic order, so that for n=2, d=2 the features are
    ``1, x, y, x^2, x*y, y^2``.

    :param n: state dimension
    :param d: maximum total degree
    """

    def __init__(self, n, d):
        self.n = int(n)
        self.d = int(d)
        self.size = basis_size(self.n, self.d)
        exponents = []
        for degree in range(self.d + 1):
            block = []
            for combo in combinations_with_replacement(range(self.n), degree):
                e = [0] * self.n
                for k in combo:
                    e[k] += 1
                block.append(tuple(e))
            exponents += sorted(block, reverse=True)
        self.exponents = tuple(exponents)
        self._powers = _frozen(exponents, dtype=int)

    def __repr__(self):
        return f'<MonomialBasis n={self.n} d={self.d}>'

    def __eq__(self, other):
        return (isinstance(other, MonomialBasis)
                and self.n == other.n and self.d == other.d)

    def __hash__(self):
        return hash((self.n, self.d))

    def __len__(self):
        return self.size

    @property
    def to_dict(self):
        return {'n': self.n, 'degree': self.d}

    def evaluate(self, z):
        z = _check_vector(z, self.n)
        return np.prod(np.power(z[None, :], self._powers), axis=1)

    def evaluate_many(self, Z):
        Z = np.asarray(Z, dtype=float)
        if Z.ndim != 2 or Z.shape[1] != self.n:
            raise DimensionError(
                f'states have shape {Z.shape}, expected (N, {self.n})')
        return np.prod(
            np.power(Z[:, None, :], self._powers[None, :, :]), axis=2)

    def linear_index(self, k):
        """position of the degree-one monomial z_k"""
        e = [0] * self.n
        e[k] = 1
        try:
            return self.exponents.index(tuple(e))
        except ValueError:
            raise LookupError(f'basis of degree {self.d} has no monomial '
                              f'z_{k}')

    def names(self, symbols=None):
        if symbols is None:
            symbols = ['x', 'y'] if self.n == 2 else \
                [f'z{k + 1}' for k in range(self.n)]
        names = []
        for e in self.exponents:
            factors = []
            for s, p in zip(symbols, e):
                if p == 1:
                    factors.append(s)
                elif p > 1:
                    factors.append(f'{s}^{p}')
            names.append('*'.join(factors) if factors else '1')
        return names


class ModeDynamics(object):
    """coefficient matrix C of one mode, n rows by P columns"""

    def __init__(self, coeffs):
        coeffs = np.array(coeffs, dtype=float)
        if coeffs.ndim != 2:
            raise DimensionError(
                f'mode coefficients must be a matrix, got shape '
                f'{coeffs.shape}')
        if not np.all(np.isfinite(coeffs)):
            raise ValueError('mode coefficients must be finite')
        coeffs.setflags(write=False)
        self.coeffs = coeffs

    def __repr__(self):
        return f'<ModeDynamics {self.coeffs.shape[0]}x{self.coeffs.shape[1]}>'

    @property
    def n(self):
        return self.coeffs.shape[0]

    @property
    def P(self):
        return self.coeffs.shape[1]

    @property
    def to_dict(self):
        return {'coeffs': self.coeffs.tolist()}


class SurfaceSet(object):
    """L polynomial switching surfaces a_l^T phi_d(z) = 0

    :param basis: the monomial basis of the surfaces
    :param surfaces: L coefficient vectors, one row per surface
    """

    def __init__(self, basis, surfaces):
        surfaces = np.atleast_2d(np.array(surfaces, dtype=float))
        if surfaces.shape[0] < 1 or surfaces.shape[1] != basis.size:
            raise DimensionError(
                f'surfaces have shape {surfaces.shape}, expected '
                f'(L, {basis.size})')
        if not np.all(np.isfinite(surfaces)):
            raise ValueError('surface coefficients must be finite')
        surfaces.setflags(write=False)
        self.basis = basis
        self.surfaces = surfaces

    @property
    def L(self):
        return self.surfaces.shape[0]

    @property
    def to_dict(self):
        return {'degree': self.basis.d,
                'surfaces': self.surfaces.tolist()}

    def evaluate(self, z):
        return self.surfaces @ self.basis.evaluate(z)

    def evaluate_many(self, Z):
        return self.basis.evaluate_many(Z) @ self.surfaces.T


class ModeBook(object):
    """sign codes s_j in {-1,+1}^L, one per mode"""

    def __init__(self, codes):
        codes = np.atleast_2d(np.array(codes, dtype=int))
        M, L = codes.shape
        if not np.all(np.abs(codes) == 1):
            raise ValueError('mode-book codes must be -1 or +1')
        if len({tuple(c) for c in codes}) != M:
            raise ValueError('mode-book codes must be pairwise distinct')
        if L != math.ceil(math.log2(max(M, 2))):
            raise ValueError(
                f'mode-book with {M} modes needs '
                f'{math.ceil(math.log2(max(M, 2)))} surfaces, got {L}')
        codes.setflags(write=False)
        self.codes = codes

    @property
    def M(self):
        return self.codes.shape[0]

    @property
    def L(self):
        return self.codes.shape[1]

    @property
    def to_dict(self):
        return {'codes': self.codes.tolist()}


class SwitchingSystemModel(object):
    """M modes over a shared basis plus optional switching surfaces"""

    def __init__(self, basis, modes, surfaces=None, modebook=None):
        if len(modes) < 1:
            raise ValueError('a switching system needs at least one mode')
        for j, mode in enumerate(modes):
            if mode.P != basis.size or mode.n != basis.n:
                raise DimensionError(
                    f'mode {j} has shape {mode.coeffs.shape}, expected '
                    f'({basis.n}, {basis.size})')
        if surfaces is not None:
            if modebook is None:
                raise ValueError('surfaces need a mode-book')
            if surfaces.L != modebook.L:
                raise DimensionError(
                    f'{surfaces.L} surfaces but mode-book codes have '
                    f'length {modebook.L}')
            if modebook.M != len(modes):
                raise DimensionError(
                    f'mode-book has {modebook.M} codes for {len(modes)} '
                    'modes')
            if surfaces.basis.n != basis.n:
                raise DimensionError('surface basis dimension mismatch')
        self.basis = basis
        self.modes = list(modes)
        self.surfaces = surfaces
        self.modebook = modebook

    @property
    def M(self):
        return len(self.modes)

    @property
    def n(self):
        return self.basis.n

    def with_surfaces(self, surfaces, modebook):
        return SwitchingSystemModel(self.basis, self.modes,
                                    surfaces=surfaces, modebook=modebook)


class Sample(object):
    """one measurement (z, zdot) with an optional ground-truth mode"""

    def __init__(self, z, zdot, true_mode=None):
        z = _frozen(z)
        zdot = _frozen(zdot)
        if z.ndim != 1 or z.shape != zdot.shape:
            raise DimensionError(
                f'state {z.shape} and derivative {zdot.shape} disagree')
        if not (np.all(np.isfinite(z)) and np.all(np.isfinite(zdot))):
            raise ValueError('samples must be finite')
        self.z = z
        self.zdot = zdot
        self.true_mode = None if true_mode is None else int(true_mode)

    def __repr__(self):
        return f'<Sample z={self.z.tolist()} zdot={self.zdot.tolist()}>'

    @property
    def n(self):
        return self.z.shape[0]


class Dataset(object):
    """N samples of dimension n stored column-wise

    :param states: N x n array of states z
    :param derivatives: N x n array of derivatives zdot
    :param labels: optional ground-truth modes, -1 for unknown
    :param provenance: dictionary describing how the data were produced
    """

    def __init__(self, states, derivatives, labels=None, provenance=None):
        states = np.atleast_2d(np.array(states, dtype=float))
        derivatives = np.atleast_2d(np.array(derivatives, dtype=float))
        if states.shape[0] < 1:
            raise ValueError('a dataset needs at least one sample')
        if states.shape != derivatives.shape:
            raise DimensionError(
                f'states {states.shape} and derivatives '
                f'{derivatives.shape} disagree')
        if not (np.all(np.isfinite(states))
                and np.all(np.isfinite(derivatives))):
            raise ValueError('samples must be finite')
        if labels is None:
            labels = -np.ones(states.shape[0], dtype=int)
        labels = np.array(labels, dtype=int)
        if labels.shape != (states.shape[0],):
            raise DimensionError('one label per sample expected')
        for arr in (states, derivatives, labels):
            arr.setflags(write=False)
        self.states = states
        self.derivatives = derivatives
        self.labels = labels
        self.provenance = dict(provenance or {})

    @classmethod
    def from_samples(cls, samples, provenance=None):
        samples = list(samples)
        if not samples:
            raise ValueError('a dataset needs at least one sample')
        n = samples[0].n
        for s in samples:
            if s.n != n:
                raise DimensionError('samples of mixed dimension')
        labels = [-1 if s.true_mode is None else s.true_mode
                  for s in samples]
        return cls([s.z for s in samples], [s.zdot for s in samples],
                   labels=labels, provenance=provenance)

    def __len__(self):
        return self.states.shape[0]

    def __getitem__(self, i):
        label = int(self.labels[i])
        return Sample(self.states[i], self.derivatives[i],
                      None if label < 0 else label)

    @property
    def n(self):
        return self.states.shape[1]

    @property
    def samples(self):
        return [self[i] for i in range(len(self))]

    @property
    def labelled(self):
        return bool(np.all(self.labels >= 0))


class ModeAssignment(object):
    """relaxed mode indicator of one sample

    :param lam: simplex vector in R^M
    :param hardened: the selected mode index
    :param moment_block: optional M x M second-order moment matrix
    """

    def __init__(self, lam, hardened, moment_block=None):
        lam = _frozen(lam)
        tol = Config.SIMPLEX_TOL
        if lam.ndim != 1 or np.any(lam < -tol) or \
                abs(lam.sum() - 1.) > tol:
            raise ValueError(f'{lam.tolist()} is not on the simplex')
        if not 0 <= hardened < lam.shape[0]:
            raise ValueError(f'mode {hardened} out of range')
        if moment_block is not None:
            moment_block = _frozen(moment_block)
            check_tol = Config.RANK_TOL
            if moment_block.shape != (lam.shape[0], lam.shape[0]):
                raise DimensionError('moment block shape mismatch')
            if np.max(np.abs(np.diag(moment_block) - lam)) > check_tol:
                raise ValueError('moment block diagonal differs from lambda')
            if np.linalg.eigvalsh(_bordered(lam, moment_block)).min() < \
                    -check_tol:
                raise ValueError('bordered moment matrix is not PSD')
        self.lam = lam
        self.hardened = int(hardened)
        self.moment_block = moment_block

    def __repr__(self):
        return f'<ModeAssignment lam={self.lam.tolist()} ' \
            f'hardened={self.hardened}>'

    @property
    def M(self):
        return self.lam.shape[0]

    @property
    def bordered(self):
        """the (M+1) x (M+1) moment matrix [[1, lam^T], [lam, Lambda]]"""
        if self.moment_block is None:
            raise LookupError('assignment has no moment block')
        return _bordered(self.lam, self.moment_block)


def _bordered(lam, block):
    M = lam.shape[0]
    out = np.empty((M + 1, M + 1))
    out[0, 0] = 1.
    out[0, 1:] = lam
    out[1:, 0] = lam
    out[1:, 1:] = 0.5 * (block + block.T)
    return out


def eval_basis(basis, z):
    return basis.evaluate(z)


def eval_mode(mode, basis, z):
    """the vector field C phi_d(z) of one mode"""
    if mode.P != basis.size or mode.n != basis.n:
        raise DimensionError(
            f'mode of shape {mode.coeffs.shape} does not match {basis}')
    return mode.coeffs @ basis.evaluate(z)


def mode_values(modes, basis, z):
    """n x M matrix whose columns are the mode vector fields at z"""
    phi = basis.evaluate(z)
    return np.stack([m.coeffs @ phi for m in modes], axis=1)


def mode_values_many(modes, basis, Z):
    """N x n x M array of every mode vector field at every state"""
    Phi = basis.evaluate_many(Z)
    return np.stack([Phi @ m.coeffs.T for m in modes], axis=2)


def residual_l1(sample, modes, basis, lam):
    """residual zdot - sum_j lam_j C_j phi(z) and its l1 norm"""
    lam = np.asarray(lam, dtype=float)
    if lam.shape != (len(modes),):
        raise DimensionError(
            f'lambda has shape {lam.shape}, expected ({len(modes)},)')
    tol = Config.SIMPLEX_TOL
    if np.any(lam < -tol) or abs(lam.sum() - 1.) > tol:
        raise ValueError(f'{lam.tolist()} is not on the simplex')
    _check_vector(sample.zdot, basis.n, what='derivative')
    residual = sample.zdot - mode_values(modes, basis, sample.z) @ lam
    return residual, float(np.abs(residual).sum())


def sign_pattern(values):
    """signs of surface values with sign(0) := +1"""
    return np.where(np.asarray(values) >= 0., 1, -1)


def _lookup(codes, pattern):
    match = np.flatnonzero(np.all(codes == pattern, axis=1))
    if match.size:
        return int(match[0])
    return int(np.argmin(np.sum(codes != pattern, axis=1)))


def region_mode(surfaces, modebook, z):
    """the mode whose sign code matches the surface signs at z

    Patterns without a code map to the nearest code in Hamming distance,
    lowest mode index on ties.
    """
    if surfaces.L != modebook.L:
        raise DimensionError(
            f'{surfaces.L} surfaces but codes of length {modebook.L}')
    return _lookup(modebook.codes, sign_pattern(surfaces.evaluate(z)))


def region_modes(surfaces, modebook, Z):
    """region_mode for every row of Z"""
    if surfaces.L != modebook.L:
        raise DimensionError(
            f'{surfaces.L} surfaces but codes of length {modebook.L}')
    patterns = sign_pattern(surfaces.evaluate_many(Z))
    return np.array([_lookup(modebook.codes, p) for p in patterns],
                    dtype=int)


def eval_system(model, z):
    """the switching vector field at z"""
    if model.M == 1:
        j = 0
    elif model.surfaces is None:
        raise LookupError('model has no switching surfaces, the active mode '
                          'is undecidable')
    else:
        j = region_mode(model.surfaces, model.modebook, z)
    return eval_mode(model.modes[j], model.basis, z)
