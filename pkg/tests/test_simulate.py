from unittest import TestCase

import numpy as np

from SwitchingSystem_identification.common import (ConfigError,
                                                   DivergenceError)
from SwitchingSystem_identification.core import (
    MonomialBasis, ModeDynamics, SurfaceSet, ModeBook, SwitchingSystemModel,
    eval_mode)
from SwitchingSystem_identification.simulate import (
    SamplingSpec, integrate, generate_dataset, vector_field)

# test data
box = {'lower': [-3., -3.], 'upper': [3., 3.]}


def oscillator():
    basis = MonomialBasis(2, 1)
    return SwitchingSystemModel(basis, [ModeDynamics([[0., 0., 1.],
                                                      [0., -1., 0.]])])


def sls_model():
    basis = MonomialBasis(2, 1)
    return SwitchingSystemModel(
        basis, [ModeDynamics([[0., 0., 1.], [0., -1., -0.1]]),
                ModeDynamics([[0., 0., 1.], [0., -1., -0.5]])],
        surfaces=SurfaceSet(basis, [[0., 1., 0.]]),
        modebook=ModeBook([[1], [-1]]))


class SamplingSpecTest(TestCase):
    def test_defaults(self):
        spec = SamplingSpec(**box)
        self.assertEqual(spec.n_samples, 2000)
        self.assertEqual(spec.seed, 0)
        self.assertEqual(spec.to_dict['scheme'], 'uniform-box')

    def test_invalid(self):
        with self.assertRaises(ConfigError):
            SamplingSpec(n_samples=0, **box)
        with self.assertRaises(ConfigError):
            SamplingSpec(lower=[0., 0.], upper=[0., 1.])
        with self.assertRaises(ConfigError):
            SamplingSpec(noise_std=-1., **box)
        with self.assertRaises(ConfigError):
            SamplingSpec('trajectory')
        with self.assertRaises(ConfigError):
            SamplingSpec('somewhere', **box)

    def test_field(self):
        try:
            SamplingSpec('trajectory', initial_conditions=[[1., 0.]],
                         dt=0.)
        except ConfigError as e:
            self.assertEqual(e.field, 'sampling.dt')
        else:
            self.fail('no ConfigError raised')


class IntegrateTest(TestCase):
    def test_period(self):
        traj = integrate(oscillator(), [1., 0.], 1e-3, 2 * np.pi)
        self.assertAlmostEqual(traj.times[-1], 2 * np.pi)
        np.testing.assert_allclose(traj.states[-1], [1., 0.], atol=1e-6)

    def test_grid(self):
        traj = integrate(oscillator(), [1., 0.], 0.3, 1.)
        self.assertEqual(len(traj), 5)
        np.testing.assert_allclose(np.diff(traj.times), 0.25)

    def test_origin(self):
        traj = integrate(sls_model(), [0., 0.], 0.01, 1.)
        self.assertTrue(np.all(traj.states == 0.))

    def test_switching(self):
        traj = integrate(sls_model(), [2., 0.], 0.01, 10.)
        self.assertIn(0, traj.modes)
        self.assertIn(1, traj.modes)
        self.assertGreater(traj.switches, 1)
        np.testing.assert_array_equal(traj.modes[traj.states[:, 0] > 0], 0)

    def test_divergence(self):
        basis = MonomialBasis(1, 2)
        blowup = SwitchingSystemModel(basis, [ModeDynamics([[0., 0., 1.]])])
        with self.assertRaises(DivergenceError) as cm:
            integrate(blowup, [1.], 0.01, 10.)
        self.assertLess(cm.exception.last_time, 1.5)

    def test_invalid_step(self):
        with self.assertRaises(ValueError):
            integrate(oscillator(), [1., 0.], 0., 1.)
        with self.assertRaises(ValueError):
            integrate(oscillator(), [1., 0.], 2., 1.)

    def test_no_surfaces(self):
        model = sls_model()
        model = SwitchingSystemModel(model.basis, model.modes)
        with self.assertRaises(LookupError):
            vector_field(model)

    def test_fourth_order(self):
        exact = np.array([np.cos(1.), -np.sin(1.)])
        coarse = integrate(oscillator(), [1., 0.], 0.1, 1.).states[-1]
        fine = integrate(oscillator(), [1., 0.], 0.05, 1.).states[-1]
        ratio = np.linalg.norm(coarse - exact) / np.linalg.norm(fine - exact)
        self.assertGreater(ratio, 12.)
        self.assertLess(ratio, 20.)

    def test_chattering(self):
        # a fast rotation flips the sign of y on almost every step
        basis = MonomialBasis(2, 1)
        spin = ModeDynamics([[0., 0., 25.], [0., -25., 0.]])
        model = SwitchingSystemModel(
            basis, [spin, spin], surfaces=SurfaceSet(basis, [[0., 0., 1.]]),
            modebook=ModeBook([[1], [-1]]))
        with self.assertLogs(level='WARNING') as cm:
            traj = integrate(model, [0., 1.], 0.1, 10.)
        self.assertGreater(traj.switches, 50)
        self.assertIn('chattering', cm.output[0])


class GenerateTest(TestCase):
    def test_noiseless(self):
        model = sls_model()
        data = generate_dataset(model, SamplingSpec(n_samples=200, seed=4,
                                                    **box))
        self.assertEqual(len(data), 200)
        self.assertTrue(data.labelled)
        for i in range(len(data)):
            s = data[i]
            np.testing.assert_allclose(
                s.zdot, eval_mode(model.modes[s.true_mode], model.basis,
                                  s.z), atol=1e-12)
            self.assertEqual(s.true_mode, 0 if s.z[0] >= 0 else 1)
        self.assertTrue(np.all(data.states >= -3.))
        self.assertTrue(np.all(data.states <= 3.))

    def test_reproducible(self):
        spec = SamplingSpec(n_samples=50, noise_std=0.01, seed=7, **box)
        a = generate_dataset(sls_model(), spec)
        b = generate_dataset(sls_model(), spec)
        np.testing.assert_array_equal(a.states, b.states)
        np.testing.assert_array_equal(a.derivatives, b.derivatives)
        self.assertEqual(a.provenance['seed'], 7)

    def test_single_sample(self):
        data = generate_dataset(sls_model(),
                                SamplingSpec(n_samples=1, **box))
        self.assertEqual(len(data), 1)

    def test_trajectory_scheme(self):
        spec = SamplingSpec('trajectory', n_samples=40,
                            initial_conditions=[[1., 0.], [-2., 1.]],
                            dt=0.05, horizon=2.)
        data = generate_dataset(sls_model(), spec)
        self.assertEqual(len(data), 40)
        np.testing.assert_array_equal(data.states[0], [1., 0.])

    def test_box_dimension(self):
        with self.assertRaises(ConfigError):
            generate_dataset(sls_model(),
                             SamplingSpec(lower=[0.], upper=[1.]))
