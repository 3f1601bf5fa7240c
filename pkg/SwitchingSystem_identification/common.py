__all__ = ['Relaxation', 'InitScheme', 'LambdaMode', 'SamplingScheme',
           'SolveCode', 'DimensionError', 'CapacityError', 'SolverError',
           'DivergenceError', 'ConfigError']

from enum import Enum


class Relaxation(Enum):
    """the available mode assignment regimes

     * LP: simplex relaxation, one linear program per sample
     * SDP: order-1 moment (Shor) relaxation, one small SDP per sample
     * EXACT: brute-force enumeration of the modes, the exact per-sample
       optimum
    """
    LP = 'lp'
    SDP = 'sdp'
    EXACT = 'exact'


class InitScheme(Enum):
    """initial dynamics for the alternation

     * IDENTITY: every mode maps z to z
     * RANDOM: i.i.d. uniform coefficients
    """
    IDENTITY = 'identity'
    RANDOM = 'random'


class LambdaMode(Enum):
    """mode indicators fed to the dynamics fit

     * SOFT: the relaxed simplex vectors
     * HARDENED: one-hot vectors of the largest component
    """
    SOFT = 'soft'
    HARDENED = 'hardened'


class SamplingScheme(Enum):
    """how training states are drawn

     * UNIFORM_BOX: i.i.d. uniform states in an axis aligned box
     * TRAJECTORY: states subsampled from integrated trajectories
    """
    UNIFORM_BOX = 'uniform-box'
    TRAJECTORY = 'trajectory'


class SolveCode(Enum):
    """outcome of a convex solve"""
    OPTIMAL = 1
    INFEASIBLE = 2
    UNBOUNDED = 3
    ITERATION_LIMIT = 4


class DimensionError(ValueError):
    pass


class CapacityError(RuntimeError):
    pass


class SolverError(RuntimeError):
    """a convex subproblem could not be solved

    :param msg: the error message
    :param index: the sample, coordinate, surface or iteration index
    """

    def __init__(self, msg, index=None):
        super().__init__(msg)
        self.index = index


class DivergenceError(RuntimeError):
    """the state of an integration became non-finite

    :param msg: the error message
    :param last_time: the last time at which the state was finite
    """

    def __init__(self, msg, last_time):
        super().__init__(msg)
        self.last_time = last_time


class ConfigError(RuntimeError):
    """malformed configuration

    :param msg: the error message
    :param field: the offending field, dotted path
    :param line: line number for JSON syntax errors
    """

    def __init__(self, msg, field=None, line=None):
        super().__init__(msg)
        self.field = field
        self.line = line
