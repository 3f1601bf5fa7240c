__all__ = ['ExperimentConfig', 'EvaluationSpec', 'load_experiment',
           'parse_experiment', 'config_hash', 'bundled_config',
           'write_dataset', 'read_dataset', 'write_model', 'read_model',
           'write_surfaces', 'read_surfaces', 'write_history',
           'read_history', 'write_rollouts', 'write_json']

import hashlib
import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np
import pandas

from .bilevel import BilevelConfig
from .common import ConfigError
from .config import Config, check_json
from .core import (MonomialBasis, ModeDynamics, SurfaceSet, ModeBook,
                   SwitchingSystemModel, Dataset)
from .simulate import SamplingSpec
from .surface import SurfaceFitConfig, make_modebook, normalize_surfaces

FLOAT_FORMAT = '%.17g'


@dataclass
class EvaluationSpec:
    """how identified models are tested

    rollout initial conditions are drawn uniformly from the box with the
    test seed unless they are given explicitly
    """
    n_test: int = 2000
    test_seed: int = 1
    n_rollouts: int = 12
    dt: float = 0.01
    horizon: float = 10.
    lower: Optional[np.ndarray] = None
    upper: Optional[np.ndarray] = None
    initial_conditions: Optional[np.ndarray] = None

    def __post_init__(self):
        self.n_test = int(self.n_test)
        self.test_seed = int(self.test_seed)
        self.n_rollouts = int(self.n_rollouts)
        if self.n_test < 1:
            raise ConfigError('need at least one test sample',
                              field='evaluate.n_test')
        if self.dt <= 0 or self.horizon <= 0 or self.dt > self.horizon:
            raise ConfigError('need 0 < dt <= horizon', field='evaluate.dt')
        if self.lower is None or self.upper is None:
            raise ConfigError('evaluation needs a box',
                              field='evaluate.lower')
        self.lower = np.array(self.lower, dtype=float)
        self.upper = np.array(self.upper, dtype=float)
        if self.initial_conditions is not None:
            self.initial_conditions = np.array(self.initial_conditions,
                                               dtype=float, ndmin=2)
            self.n_rollouts = len(self.initial_conditions)

    def test_sampling(self):
        return SamplingSpec('uniform-box', n_samples=self.n_test,
                            lower=self.lower, upper=self.upper,
                            seed=self.test_seed)

    def rollout_initial_conditions(self):
        if self.initial_conditions is not None:
            return self.initial_conditions
        rng = np.random.default_rng([self.test_seed, self.n_rollouts])
        return rng.uniform(self.lower, self.upper,
                           size=(self.n_rollouts, len(self.lower)))


class ExperimentConfig(object):
    """a parsed experiment configuration

    :param name: name of the experiment
    :param system: the ground-truth switching system
    :param sampling: how the training data are drawn
    :param identify: identification parameters
    :param surface: surface fit parameters
    :param evaluate: evaluation parameters
    :param digest: hash of the configuration
    :param seed_defaulted: True if the sampling seed was not configured
    """

    def __init__(self, name, system, sampling, identify, surface, evaluate,
                 digest, seed_defaulted=False):
        self.name = name
        self.system = system
        self.sampling = sampling
        self.identify = identify
        self.surface = surface
        self.evaluate = evaluate
        self.config_hash = digest
        self.seed_defaulted = seed_defaulted

    @property
    def seed(self):
        return self.sampling.seed


def config_hash(data):
    """short sha256 digest of the canonical json form"""
    canonical = json.dumps(data, sort_keys=True, separators=(',', ':'))
    return hashlib.sha256(canonical.encode('utf-8')).hexdigest()[:16]


def _build(cls, data, section):
    """construct a config object, naming the section of any failure"""
    try:
        return cls(**data)
    except (TypeError, ValueError) as e:
        raise ConfigError(f'section {section}: {e}', field=section)


def _parse_system(data):
    check_json(data, ['n', 'degree', 'modes'], section='system')
    try:
        basis = MonomialBasis(data['n'], data['degree'])
    except ValueError as e:
        raise ConfigError(str(e), field='system.degree')
    modes = []
    for j, coeffs in enumerate(data['modes']):
        try:
            mode = ModeDynamics(coeffs)
        except ValueError as e:
            raise ConfigError(str(e), field=f'system.modes[{j}]')
        if mode.coeffs.shape != (basis.n, basis.size):
            raise ConfigError(
                f'mode {j} has shape {mode.coeffs.shape}, expected '
                f'({basis.n}, {basis.size})', field=f'system.modes[{j}]')
        modes.append(mode)
    if not modes:
        raise ConfigError('no modes', field='system.modes')
    if len(modes) == 1 and 'surfaces' not in data:
        return SwitchingSystemModel(basis, modes)
    surf = check_json(data.get('surfaces'), ['degree', 'coefficients'],
                      section='system.surfaces')
    try:
        surfaces = SurfaceSet(MonomialBasis(basis.n, surf['degree']),
                              surf['coefficients'])
        if 'modebook' in data:
            modebook = ModeBook(data['modebook'])
        else:
            modebook = make_modebook(len(modes))
        return SwitchingSystemModel(basis, modes, surfaces=surfaces,
                                    modebook=modebook)
    except ValueError as e:
        raise ConfigError(str(e), field='system.surfaces')


def parse_experiment(data, name='experiment'):
    """build an ExperimentConfig from the decoded json"""
    check_json(data, ['system', 'sampling', 'identify'])
    system = _parse_system(data['system'])

    sampling = dict(check_json(data['sampling'], ['scheme'],
                               section='sampling'))
    seed_defaulted = 'seed' not in sampling
    if seed_defaulted:
        logging.info('no sampling seed configured, using 0')
    sampling = _build(SamplingSpec, sampling, 'sampling')

    identify = _build(BilevelConfig,
                      check_json(data['identify'], ['M', 'degree'],
                                 section='identify'),
                      'identify')

    surface = data.get('surface') or {'degree': identify.degree}
    surface = _build(SurfaceFitConfig,
                     check_json(surface, ['degree'], section='surface'),
                     'surface')

    evaluate = dict(data.get('evaluate') or {})
    if 'lower' not in evaluate and sampling.lower is not None:
        evaluate['lower'] = sampling.lower
        evaluate['upper'] = sampling.upper
    evaluate = _build(EvaluationSpec, evaluate, 'evaluate')

    return ExperimentConfig(data.get('name', name), system, sampling,
                            identify, surface, evaluate, config_hash(data),
                            seed_defaulted=seed_defaulted)


def load_experiment(path):
    """read an experiment configuration file

    :param path: path to the json file
    :raises ConfigError: on syntax errors (with line number) and on
                         missing or invalid fields
    """
    path = Path(path)
    with path.open('r', encoding='utf-8') as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as e:
            raise ConfigError(f'{path}: {e.msg}', line=e.lineno)
    return parse_experiment(data, name=path.stem)


def bundled_config(name):
    """path of one of the configurations shipped with the package"""
    path = Config.CONFIG_DIR / f'{name}.json'
    if not path.exists():
        raise LookupError(f'no bundled configuration {name}')
    return path


def _comment(digest, seed, seed_defaulted=False):
    line = f'# config_hash={digest}; seed={seed}'
    if seed_defaulted:
        line += '; seed_defaulted=true'
    return line + '\n'


def _read_comment(path):
    """key=value pairs of the leading comment line of a csv file"""
    with open(path, encoding='utf-8') as fh:
        line = fh.readline()
    if not line.startswith('#'):
        return {}
    pairs = [p.strip().split('=', 1) for p in line[1:].split(';')]
    return {p[0]: p[1] for p in pairs if len(p) == 2}


def _write_csv(path, frame, digest, seed, seed_defaulted=False):
    with open(path, 'w', encoding='utf-8', newline='') as fh:
        fh.write(_comment(digest, seed, seed_defaulted))
        frame.to_csv(fh, index=False, float_format=FLOAT_FORMAT,
                     lineterminator='\n', na_rep='')


def _read_csv(path):
    return pandas.read_csv(path, comment='#', float_precision='round_trip')


def write_dataset(path, dataset, digest, seed):
    """write a dataset as csv

    columns z_1..z_n, zdot_1..zdot_n and true_mode, where true_mode is the
    1-based mode label and 0 means unknown
    """
    n = dataset.n
    columns = {}
    for k in range(n):
        columns[f'z_{k + 1}'] = dataset.states[:, k]
    for k in range(n):
        columns[f'zdot_{k + 1}'] = dataset.derivatives[:, k]
    columns['true_mode'] = dataset.labels + 1
    _write_csv(path, pandas.DataFrame(columns), digest, seed,
               seed_defaulted=dataset.provenance.get('seed_defaulted',
                                                     False))


def read_dataset(path):
    frame = _read_csv(path)
    n = sum(1 for c in frame.columns if c.startswith('z_'))
    if n == 0:
        raise ConfigError(f'{path}: no state columns', field='z_1')
    for k in range(1, n + 1):
        for c in (f'z_{k}', f'zdot_{k}'):
            if c not in frame.columns:
                raise ConfigError(f'{path}: column {c} missing', field=c)
    states = frame[[f'z_{k}' for k in range(1, n + 1)]].to_numpy(float)
    derivatives = frame[[f'zdot_{k}' for k in range(1, n + 1)]] \
        .to_numpy(float)
    labels = None
    if 'true_mode' in frame.columns:
        labels = frame['true_mode'].to_numpy(int) - 1
    provenance = {'file': str(path)}
    header = _read_comment(path)
    if 'seed' in header:
        provenance['seed'] = int(header['seed'])
    if header.get('seed_defaulted') == 'true':
        provenance['seed_defaulted'] = True
    return Dataset(states, derivatives, labels=labels,
                   provenance=provenance)


def write_json(path, payload, digest, seed):
    data = {'config_hash': digest, 'seed': seed}
    data.update(payload)
    with open(path, 'w', encoding='utf-8') as fh:
        json.dump(data, fh, indent=2)
        fh.write('\n')


def _read_json(path):
    with open(path, 'r', encoding='utf-8') as fh:
        try:
            return json.load(fh)
        except json.JSONDecodeError as e:
            raise ConfigError(f'{path}: {e.msg}', line=e.lineno)


def write_model(path, model, digest, seed, identify=None):
    payload = {'n': model.n,
               'degree': model.basis.d,
               'M': model.M,
               'modes': [m.coeffs.tolist() for m in model.modes]}
    if identify is not None:
        payload['config'] = identify.to_dict
    write_json(path, payload, digest, seed)


def read_model(path):
    data = check_json(_read_json(path), ['n', 'degree', 'modes'])
    basis = MonomialBasis(data['n'], data['degree'])
    return SwitchingSystemModel(basis,
                                [ModeDynamics(c) for c in data['modes']])


def write_surfaces(path, fit, modebook, digest, seed, certificate=None,
                   interval=None):
    """write normalized surfaces together with their diagnostics

    :param fit: the SurfaceFit
    :param modebook: the sign codes the surfaces were fitted for
    :param certificate: optional MarginCertificate
    :param interval: optional admissible margin interval
    """
    basis = fit.surfaces.basis
    payload = {'n': basis.n,
               'degree': basis.d,
               'monomials': basis.names(),
               'surfaces': normalize_surfaces(fit.surfaces).surfaces.tolist(),
               'modebook': modebook.codes.tolist(),
               'total_slack': fit.total_slack,
               'l1_norms': fit.l1_norms.tolist(),
               'objective': fit.objective}
    if certificate is not None:
        payload['certificate'] = certificate.to_dict
    payload['admissible_epsilon'] = None if interval is None else \
        list(interval)
    write_json(path, payload, digest, seed)


def read_surfaces(path):
    """:return: the SurfaceSet and the ModeBook"""
    data = check_json(_read_json(path),
                      ['n', 'degree', 'surfaces', 'modebook'])
    surfaces = SurfaceSet(MonomialBasis(data['n'], data['degree']),
                          data['surfaces'])
    return surfaces, ModeBook(data['modebook'])


def write_history(path, history, digest, seed):
    columns = ['iteration', 'cost', 'mismatch_prev', 'mismatch_truth',
               'tightness_ratio', 'assign_seconds', 'fit_seconds']
    frame = pandas.DataFrame([r.to_dict for r in history], columns=columns)
    for c in ['iteration', 'mismatch_prev', 'mismatch_truth']:
        frame[c] = frame[c].astype('Int64')
    _write_csv(path, frame, digest, seed)


def read_history(path):
    return _read_csv(path)


def write_rollouts(directory, report, digest, seed):
    """one csv per rollout with the time, both states and the error norm

    :return: list of written paths
    """
    directory = Path(directory)
    written = []
    for idx, (pair, error) in enumerate(zip(report.pairs,
                                            report.error_curves)):
        if pair is None:
            logging.warning(f'rollout {idx + 1} diverged, no csv written')
            continue
        ref, est = pair
        columns = {'time': ref.times}
        for k in range(ref.n):
            columns[f'z_{k + 1}'] = ref.states[:, k]
        for k in range(ref.n):
            columns[f'zhat_{k + 1}'] = est.states[:, k]
        columns['error'] = error
        path = directory / f'rollout_{idx + 1:02d}.csv'
        _write_csv(path, pandas.DataFrame(columns), digest, seed)
        written.append(path)
    return written
