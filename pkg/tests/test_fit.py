from unittest import TestCase

import cvxpy as cp
import numpy as np

from SwitchingSystem_identification.assign import identification_cost
from SwitchingSystem_identification.common import LambdaMode
from SwitchingSystem_identification.core import (
    MonomialBasis, ModeDynamics, ModeAssignment, Dataset)
from SwitchingSystem_identification.fit import fit_dynamics, lambda_weights
from SwitchingSystem_identification.storage import (load_experiment,
                                                    bundled_config)
from SwitchingSystem_identification.simulate import (SamplingSpec,
                                                     generate_dataset)

# test data
rotation = np.array([[0., 1., 0.], [0., 0., -1.]])
rotation_basis = MonomialBasis(2, 1)


def one_hot(labels, M):
    return [ModeAssignment(np.eye(M)[j], int(j)) for j in labels]


def rotation_dataset(N, seed=0):
    # zdot = (y, -x) over the basis (1, x, y)
    rng = np.random.default_rng(seed)
    Z = rng.uniform(-2, 2, size=(N, 2))
    return Dataset(Z, rotation_basis.evaluate_many(Z) @ rotation.T)


class LambdaWeightsTest(TestCase):
    def test_weights(self):
        assignments = [ModeAssignment([0.3, 0.7], 1),
                       ModeAssignment([0.5, 0.5], 0)]
        np.testing.assert_allclose(lambda_weights(assignments),
                                   [[0.3, 0.7], [0.5, 0.5]])
        np.testing.assert_array_equal(
            lambda_weights(assignments, LambdaMode.HARDENED),
            [[0., 1.], [1., 0.]])
        with self.assertRaises(ValueError):
            lambda_weights(assignments, 'other')


class FitDynamicsTest(TestCase):
    def test_matches_joint_program(self):
        rng = np.random.default_rng(9)
        N, M, eta = 30, 2, 2.
        Z = rng.uniform(-1, 1, size=(N, 2))
        data = Dataset(Z, rng.normal(size=(N, 2)))
        lam = rng.dirichlet(np.ones(M), size=N)
        assignments = [ModeAssignment(w, int(np.argmax(w))) for w in lam]
        modes = fit_dynamics(data, assignments, rotation_basis, M, eta)
        cost = identification_cost(data, modes, rotation_basis, lam)

        Phi = rotation_basis.evaluate_many(Z)
        C = [cp.Variable((2, rotation_basis.size)) for j in range(M)]
        fitted = sum(cp.multiply(np.tile(lam[:, j:j + 1], (1, 2)),
                                 Phi @ C[j].T) for j in range(M))
        joint = cp.Problem(cp.Minimize(cp.sum(cp.abs(data.derivatives
                                                     - fitted))),
                           [cp.abs(c) <= eta for c in C])
        joint.solve(solver=cp.CLARABEL)
        self.assertAlmostEqual(cost, joint.value,
                               delta=1e-6 * max(1., joint.value))
        for m in modes:
            self.assertLessEqual(np.abs(m.coeffs).max(), eta)

    def test_single_mode(self):
        data = rotation_dataset(50)
        modes = fit_dynamics(data, one_hot([0] * 50, 1), rotation_basis, 1,
                             10.)
        np.testing.assert_allclose(modes[0].coeffs, rotation, atol=1e-6)
        cost = identification_cost(data, modes, rotation_basis,
                                   np.ones((50, 1)))
        self.assertLessEqual(cost, 1e-6)

    def test_unassigned_mode_keeps_previous(self):
        data = rotation_dataset(30)
        previous = [ModeDynamics(np.zeros((2, 3))),
                    ModeDynamics([[1., 2., 3.], [4., 5., 6.]])]
        modes = fit_dynamics(data, one_hot([0] * 30, 2), rotation_basis, 2,
                             10., previous=previous)
        np.testing.assert_array_equal(modes[1].coeffs, previous[1].coeffs)
        np.testing.assert_allclose(modes[0].coeffs, rotation, atol=1e-6)

    def test_unassigned_mode_without_previous(self):
        data = rotation_dataset(30)
        modes = fit_dynamics(data, one_hot([0] * 30, 2), rotation_basis, 2,
                             10.)
        np.testing.assert_array_equal(modes[1].coeffs, np.zeros((2, 3)))

    def test_box(self):
        data = rotation_dataset(30)
        modes = fit_dynamics(data, one_hot([0] * 30, 1), rotation_basis, 1,
                             0.5)
        self.assertLessEqual(np.abs(modes[0].coeffs).max(), 0.5)

    def test_soft_weights(self):
        data = rotation_dataset(40, seed=2)
        assignments = [ModeAssignment([0.5, 0.5], 0)] * 40
        modes = fit_dynamics(data, assignments, rotation_basis, 2, 10.)
        weights = lambda_weights(assignments)
        cost = identification_cost(data, modes, rotation_basis, weights)
        self.assertLessEqual(cost, 1e-6)

    def test_invalid(self):
        data = rotation_dataset(5)
        with self.assertRaises(ValueError):
            fit_dynamics(data, one_hot([0] * 5, 1), rotation_basis, 1, 0.)
        with self.assertRaises(ValueError):
            fit_dynamics(data, one_hot([0] * 4, 1), rotation_basis, 1, 1.)
        with self.assertRaises(ValueError):
            fit_dynamics(data, one_hot([0] * 5, 1), rotation_basis, 2, 1.)


class GroundTruthRecovery(TestCase):
    def check_recovery(self, name, N):
        exp = load_experiment(bundled_config(name))
        box = {'lower': exp.sampling.lower, 'upper': exp.sampling.upper}
        data = generate_dataset(exp.system,
                                SamplingSpec(n_samples=N, seed=3, **box))
        modes = fit_dynamics(data, one_hot(data.labels, exp.system.M),
                             exp.system.basis, exp.system.M, 10.)
        for fitted, true in zip(modes, exp.system.modes):
            np.testing.assert_allclose(fitted.coeffs, true.coeffs,
                                       atol=1e-4)

    def test_sls(self):
        self.check_recovery('sls_oscillator', 400)

    def test_sps(self):
        self.check_recovery('sps_quartic', 600)
