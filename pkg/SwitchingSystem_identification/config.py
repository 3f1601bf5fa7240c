__all__ = ['Config', 'check_json']

import os
from pathlib import Path

from .common import ConfigError

basedir = Path(__file__).parent.absolute()


def _env_float(name, default):
    value = os.environ.get(name)
    return float(value) if value else default


class Config(object):
    SOLVER_TOL = _env_float('SWITCHID_SOLVER_TOL', 1e-8)
    SIMPLEX_TOL = 1e-8
    RANK_TOL = _env_float('SWITCHID_RANK_TOL', 1e-6)
    VERTEX_TOL = 1e-9
    MONOTONE_TOL = 1e-6
    UNASSIGNED_WEIGHT = 1e-9
    CERTIFICATE_MARGIN = 1e-12
    ROUNDING_SLACK = 1e-9
    MAX_BASIS_SIZE = int(os.environ.get('SWITCHID_MAX_BASIS_SIZE')
                         or 100000)
    MAX_ALIGN_MODES = 8
    CHATTER_FRACTION = 0.5
    CONFIG_DIR = basedir / 'configs'


def check_json(data, required_keys=[], section=None):
    """check if json object valid

    :param data: the json object to be checked
    :param required_keys: list of keys that must be present in data object
    :type required_keys: list
    :param section: name of the section, used in error messages
    """
    where = f'section {section}' if section else 'json'
    if not data:
        raise ConfigError(f'{where} missing', field=section)
    if not isinstance(data, dict):
        raise ConfigError(f'{where} must be an object', field=section)
    for k in required_keys:
        if k not in data:
            field = f'{section}.{k}' if section else k
            raise ConfigError(f'parameter {k} missing from {where}',
                              field=field)
    return data
