import json
import tempfile
from pathlib import Path
from unittest import TestCase

import numpy as np
import pytest

from SwitchingSystem_identification.cli import main
from SwitchingSystem_identification.evaluate import surface_agreement
from SwitchingSystem_identification.simulate import generate_dataset
from SwitchingSystem_identification.storage import (
    bundled_config, load_experiment, read_dataset, read_model, read_history,
    read_surfaces)

# a small version of the oscillator experiment
with open(bundled_config('sls_oscillator')) as fh:
    small = json.load(fh)
small['sampling']['n_samples'] = 60
small['identify']['max_iters'] = 3
small['evaluate'] = {'n_test': 50, 'n_rollouts': 2, 'dt': 0.1,
                     'horizon': 1.}


class CliBase(TestCase):
    def setUp(self):
        self._tmp = tempfile.TemporaryDirectory()
        self.tmp = Path(self._tmp.name)
        self.config = str(self.tmp / 'small.json')
        with open(self.config, 'w') as fh:
            json.dump(small, fh)

    def tearDown(self):
        self._tmp.cleanup()

    def run_main(self, *argv):
        main(list(argv) + ['-q'])

    def exit_code(self, *argv):
        with self.assertRaises(SystemExit) as cm:
            self.run_main(*argv)
        return cm.exception.code


class PipelineTest(CliBase):
    def test_pipeline(self):
        dataset = str(self.tmp / 'dataset.csv')
        self.run_main('simulate', '-c', self.config, '-o', dataset)
        self.assertEqual(len(read_dataset(dataset)), 60)

        out = self.tmp / 'identified'
        self.run_main('identify', '-c', self.config, '-d', dataset,
                      '-o', str(out), '-r', 'exact')
        model = read_model(out / 'model.json')
        self.assertEqual(model.M, 2)
        history = read_history(out / 'history.csv')
        self.assertGreaterEqual(len(history), 1)

        surfaces = str(self.tmp / 'surfaces.json')
        self.run_main('fit-surface', '-c', self.config, '-d', dataset,
                      '-m', str(out / 'model.json'), '-o', surfaces,
                      '-r', 'exact')
        with open(surfaces) as fh:
            self.assertIn('certificate', json.load(fh))

        results = self.tmp / 'results'
        self.run_main('evaluate', '-c', self.config,
                      '-m', str(out / 'model.json'), '--surfaces', surfaces,
                      '-o', str(results))
        with open(results / 'metrics.json') as fh:
            metrics = json.load(fh)
        self.assertEqual(metrics['seed'], 1)
        self.assertIn('velocity_rmse', metrics)
        self.assertEqual(len(metrics['rollouts']), 2)

    def test_seed_override(self):
        a = str(self.tmp / 'a.csv')
        b = str(self.tmp / 'b.csv')
        self.run_main('simulate', '-c', self.config, '-o', a, '-s', '7')
        self.run_main('simulate', '-c', self.config, '-o', b)
        with open(a) as fh:
            self.assertTrue(fh.readline().endswith('seed=7\n'))
        self.assertFalse(
            (read_dataset(a).states == read_dataset(b).states).all())

    def test_seed_defaulted(self):
        data = json.loads(json.dumps(small))
        del data['sampling']['seed']
        with open(self.config, 'w') as fh:
            json.dump(data, fh)
        path = str(self.tmp / 'dataset.csv')
        self.run_main('simulate', '-c', self.config, '-o', path)
        with open(path) as fh:
            self.assertTrue(
                fh.readline().endswith('seed=0; seed_defaulted=true\n'))
        provenance = read_dataset(path).provenance
        self.assertEqual(provenance['seed'], 0)
        self.assertTrue(provenance['seed_defaulted'])

        self.run_main('simulate', '-c', self.config, '-o', path,
                      '-s', '0')
        self.assertNotIn('seed_defaulted', read_dataset(path).provenance)


class ExitCodeTest(CliBase):
    def test_bad_json(self):
        with open(self.config, 'w') as fh:
            fh.write('{"system": }')
        self.assertEqual(self.exit_code('simulate', '-c', self.config), 2)

    def test_unknown_bundle(self):
        self.assertEqual(self.exit_code('simulate', '-c', 'no_such'), 2)

    def test_missing_file(self):
        self.assertEqual(
            self.exit_code('simulate', '-c', str(self.tmp / 'absent.json')),
            4)

    def test_single_mode_surface(self):
        model = self.tmp / 'model.json'
        with open(model, 'w') as fh:
            json.dump({'n': 2, 'degree': 1,
                       'modes': [[[0., 0., 1.], [0., -1., 0.]]]}, fh)
        self.assertEqual(
            self.exit_code('fit-surface', '-c', self.config, '-d',
                           str(self.tmp / 'unused.csv'), '-m', str(model)),
            2)

    def test_bad_relaxation(self):
        self.assertEqual(self.exit_code('identify', '-c', self.config, '-d',
                                        'x.csv', '-r', 'milp'), 2)


@pytest.mark.slow
class BundledPipeline(TestCase):
    def setUp(self):
        self._tmp = tempfile.TemporaryDirectory()
        self.tmp = Path(self._tmp.name)

    def tearDown(self):
        self._tmp.cleanup()

    def run_pipeline(self, name):
        dataset = str(self.tmp / 'dataset.csv')
        model = str(self.tmp / 'model.json')
        surfaces = str(self.tmp / 'surfaces.json')
        main(['simulate', '-c', name, '-o', dataset, '-q'])
        main(['identify', '-c', name, '-d', dataset, '-o', str(self.tmp),
              '-q'])
        main(['fit-surface', '-c', name, '-d', dataset, '-m', model,
              '-o', surfaces, '-q'])
        main(['evaluate', '-c', name, '-m', model, '--surfaces', surfaces,
              '-o', str(self.tmp), '-q'])
        with open(self.tmp / 'metrics.json') as fh:
            return json.load(fh)

    def check_metrics(self, metrics, limits):
        self.assertEqual(len(metrics['rollouts']), 12)
        self.assertLessEqual(metrics['velocity_rmse'], limits[0])
        self.assertGreaterEqual(metrics['mode_accuracy'], limits[1])
        self.assertGreaterEqual(metrics['miou'], limits[2])
        self.assertLessEqual(metrics['rollout_rmse'], limits[3])
        self.assertLessEqual(metrics['max_error'], limits[4])

    def test_sls(self):
        metrics = self.run_pipeline('sls_oscillator')
        self.check_metrics(metrics, (0.08, 0.99, 0.98, 0.01, 0.02))
        surfaces, _ = read_surfaces(self.tmp / 'surfaces.json')
        a = surfaces.surfaces[0]
        x = surfaces.basis.linear_index(0)
        self.assertGreaterEqual(abs(a[x]), 0.95 * np.abs(a).sum())

    def test_sps(self):
        metrics = self.run_pipeline('sps_quartic')
        self.check_metrics(metrics, (0.08, 0.98, 0.97, 0.03, 0.06))
        exp = load_experiment(bundled_config('sps_quartic'))
        surfaces, modebook = read_surfaces(self.tmp / 'surfaces.json')
        test = generate_dataset(exp.system, exp.evaluate.test_sampling())
        # identified modes may be numbered the other way round
        agreement = surface_agreement(surfaces, modebook,
                                      exp.system.surfaces,
                                      exp.system.modebook, test.states)
        self.assertGreaterEqual(max(agreement, 1. - agreement), 0.98)
