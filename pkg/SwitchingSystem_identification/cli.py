__all__ = ['main', 'cmd_simulate', 'cmd_identify', 'cmd_fit_surface',
           'cmd_evaluate']

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from .assign import assign_modes
from .bilevel import identify
from .common import Relaxation, ConfigError, SolverError, DivergenceError
from .core import MonomialBasis
from .evaluate import evaluate_model
from .simulate import generate_dataset
from .storage import (load_experiment, bundled_config, write_dataset,
                      read_dataset, write_model, read_model, write_surfaces,
                      read_surfaces, write_history, write_rollouts,
                      write_json)
from .surface import make_modebook, recover_surfaces, surface_labels


def _experiment(args):
    path = Path(args.config)
    if not path.exists() and path.suffix == '':
        try:
            path = bundled_config(args.config)
        except LookupError:
            raise ConfigError(f'no configuration {args.config}',
                              field='config')
    return load_experiment(path)


def _balance(labels, M):
    known = labels[labels >= 0]
    if known.size == 0:
        return []
    return np.round(np.bincount(known, minlength=M) / known.size,
                    4).tolist()


def cmd_simulate(args):
    """generate a training dataset from the configured system"""
    exp = _experiment(args)
    if args.seed is not None:
        exp.sampling.seed = args.seed
    dataset = generate_dataset(exp.system, exp.sampling)
    if exp.seed_defaulted and args.seed is None:
        dataset.provenance['seed_defaulted'] = True
    write_dataset(args.output, dataset, exp.config_hash, exp.seed)
    print(f'N={len(dataset)} mode balance '
          f'{_balance(dataset.labels, exp.system.M)} seed={exp.seed}')


def cmd_identify(args):
    """run the alternating identification on a dataset"""
    exp = _experiment(args)
    config = exp.identify
    if args.relaxation is not None:
        config.relaxation = Relaxation(args.relaxation)
    if args.seed is not None:
        config.init_seed = args.seed
    dataset = read_dataset(args.dataset)
    model, history, _ = identify(dataset, config)
    out = Path(args.output)
    out.mkdir(parents=True, exist_ok=True)
    seed = exp.seed if args.seed is None else args.seed
    write_model(out / 'model.json', model, exp.config_hash, seed,
                identify=config)
    write_history(out / 'history.csv', history, exp.config_hash, seed)
    print(f'{len(history)} iterations, final cost {history[-1].cost:.6g}')


def cmd_fit_surface(args):
    """recover switching surfaces from the labels of an identified model"""
    exp = _experiment(args)
    model = read_model(args.model)
    if model.M < 2:
        raise ConfigError('surface fitting needs a model with at least two '
                          'modes', field='identify.M')
    relaxation = exp.identify.relaxation if args.relaxation is None else \
        Relaxation(args.relaxation)
    dataset = read_dataset(args.dataset)
    assignments = assign_modes(dataset, model.modes, model.basis, relaxation)
    labels = surface_labels(assignments)
    modebook = make_modebook(model.M)
    basis = MonomialBasis(dataset.n, exp.surface.degree)
    fit, cert, interval = recover_surfaces(dataset.states, labels, modebook,
                                           basis, exp.surface)
    seed = exp.seed if args.seed is None else args.seed
    write_surfaces(args.output, fit, modebook, exp.config_hash, seed,
                   certificate=cert, interval=interval)
    print(f'certificate t={cert.t:.6g}, admissible epsilon {interval}, '
          f'total slack {fit.total_slack:.3g}')


def cmd_evaluate(args):
    """compare an identified model with the configured system"""
    exp = _experiment(args)
    if args.seed is not None:
        exp.evaluate.test_seed = args.seed
    model = read_model(args.model)
    if args.surfaces is not None:
        surfaces, modebook = read_surfaces(args.surfaces)
        model = model.with_surfaces(surfaces, modebook)
    test_set = generate_dataset(exp.system, exp.evaluate.test_sampling())
    metrics, report = evaluate_model(
        exp.system, model, test_set,
        exp.evaluate.rollout_initial_conditions(),
        exp.evaluate.dt, exp.evaluate.horizon)
    out = Path(args.output)
    out.mkdir(parents=True, exist_ok=True)
    seed = exp.evaluate.test_seed
    write_json(out / 'metrics.json', metrics, exp.config_hash, seed)
    write_rollouts(out, report, exp.config_hash, seed)
    for k in ['velocity_rmse', 'mode_accuracy', 'miou', 'rollout_rmse',
              'final_error', 'max_error']:
        if k in metrics:
            print(f'{k}: {metrics[k]:.6g}')


def _parser():
    parser = argparse.ArgumentParser(
        description='identify switching polynomial systems from data')
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('-c', '--config', required=True,
                        help="experiment configuration, a json file or "
                        "the name of a bundled configuration")
    common.add_argument('-s', '--seed', type=int,
                        help="override the configured seed")
    common.add_argument('-q', '--quiet', action='store_true', default=False,
                        help="only report warnings and errors")
    relax = argparse.ArgumentParser(add_help=False)
    relax.add_argument('-r', '--relaxation',
                       choices=[r.value for r in Relaxation],
                       help="override the configured relaxation")
    sub = parser.add_subparsers(dest='command', required=True)

    p = sub.add_parser('simulate', parents=[common],
                       help="generate a dataset")
    p.add_argument('-o', '--output', default='dataset.csv',
                   help="the dataset csv file")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser('identify', parents=[common, relax],
                       help="identify the modes")
    p.add_argument('-d', '--dataset', required=True,
                   help="the dataset csv file")
    p.add_argument('-o', '--output', default='.',
                   help="directory for model.json and history.csv")
    p.set_defaults(func=cmd_identify)

    p = sub.add_parser('fit-surface', parents=[common, relax],
                       help="recover the switching surfaces")
    p.add_argument('-d', '--dataset', required=True,
                   help="the dataset csv file")
    p.add_argument('-m', '--model', required=True,
                   help="the identified model json file")
    p.add_argument('-o', '--output', default='surfaces.json',
                   help="the surfaces json file")
    p.set_defaults(func=cmd_fit_surface)

    p = sub.add_parser('evaluate', parents=[common],
                       help="evaluate an identified model")
    p.add_argument('-m', '--model', required=True,
                   help="the identified model json file")
    p.add_argument('--surfaces',
                   help="the surfaces json file")
    p.add_argument('-o', '--output', default='.',
                   help="directory for metrics.json and rollout csv files")
    p.set_defaults(func=cmd_evaluate)
    return parser


def main(argv=None):
    args = _parser().parse_args(argv)
    logging.basicConfig(
        level=logging.WARNING if args.quiet else logging.INFO,
        format='%(levelname)s %(message)s')
    try:
        args.func(args)
    except ConfigError as e:
        where = ''
        if e.field is not None:
            where += f' field {e.field}'
        if e.line is not None:
            where += f' line {e.line}'
        logging.error(f'configuration error{where}: {e}')
        sys.exit(2)
    except (SolverError, DivergenceError) as e:
        logging.error(f'{e}')
        sys.exit(3)
    except OSError as e:
        logging.error(f'{e}')
        sys.exit(4)


if __name__ == '__main__':
    main()
