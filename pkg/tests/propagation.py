import unittest

import numpy as np

from scipy.linalg import expm

from robustgate.expansion import UncertainInterval, embed_initial, lift_system
from robustgate.propagation import *
from robustgate.quantum import DensityMatrix, build_system, propagate_exact, vectorize


class ControlSignalTests(unittest.TestCase):
    def test_shape(self):
        pulse = ControlSignal.zeros(5, 0.2)

        self.assertEqual(pulse.steps, 5)
        self.assertEqual(len(pulse), 5)
        self.assertAlmostEqual(pulse.horizon, 1.0)
        np.testing.assert_allclose(pulse.times, [0, 0.2, 0.4, 0.6, 0.8])

    def test_invalid(self):
        with self.assertRaises(ValueError):
            ControlSignal(np.zeros((5, 3)), 0.1)

        with self.assertRaises(ValueError):
            ControlSignal(np.zeros((0, 4)), 0.1)

        with self.assertRaises(ValueError):
            ControlSignal([[0, 0, np.nan, 0]], 0.1)

        with self.assertRaises(ValueError):
            ControlSignal(np.zeros((5, 4)), 0)

    def test_vector_layout(self):
        samples = np.arange(12, dtype=float).reshape(3, 4)
        pulse = ControlSignal(samples, 0.1)

        vector = pulse.vector()
        self.assertEqual(vector[4 * 2 + 1], samples[2, 1])
        self.assertEqual(ControlSignal.from_vector(vector, 0.1), pulse)

    def test_updated(self):
        pulse = ControlSignal.zeros(2, 0.5)
        delta = np.arange(8, dtype=float)

        updated = pulse.updated(delta)
        np.testing.assert_array_equal(updated.vector(), delta)
        np.testing.assert_array_equal(pulse.vector(), 0)

    def test_uniform_random(self):
        first = ControlSignal.uniform_random(50, 0.02, 3.0, seed=11)
        second = ControlSignal.uniform_random(50, 0.02, 3.0, seed=11)

        self.assertEqual(first, second)
        self.assertLessEqual(np.max(np.abs(first.samples)), 3.0)
        self.assertNotEqual(first, ControlSignal.uniform_random(50, 0.02, 3.0, seed=12))

    def test_read_only(self):
        pulse = ControlSignal.zeros(2, 0.5)

        with self.assertRaises(ValueError):
            pulse.samples[0, 0] = 1


class PropagateTests(unittest.TestCase):
    def setUp(self):
        self.system = build_system(0.1, 0.001)
        self.x0 = vectorize(DensityMatrix.basis("10"))

    def test_degenerate_lift_matches_exact(self):
        one = UncertainInterval(1, 1)
        model = lift_system(self.system, one, 0, one, 0)
        pulse = ControlSignal.uniform_random(8, 0.1, 2.0, seed=1)

        trajectory = propagate(model, pulse, embed_initial(self.x0, 0, 0))

        self.assertEqual(len(trajectory), 9)
        np.testing.assert_allclose(trajectory.terminal.values, 2 * propagate_exact(self.system, pulse, self.x0)[-1],
                                   atol=1e-13)

    def test_propagators(self):
        model = lift_system(self.system, UncertainInterval(0, 2), 1, UncertainInterval(0.8, 1.2), 1)
        pulse = ControlSignal.uniform_random(3, 0.1, 1.0, seed=2)

        trajectory = propagate(model, pulse, embed_initial(self.x0, 1, 1))
        self.assertEqual(trajectory.propagators.shape, (3, model.size, model.size))

        for k in range(3):
            np.testing.assert_allclose(trajectory.propagators[k], step_propagator(model, pulse.samples[k], 0.1))
            np.testing.assert_allclose(trajectory.states[k + 1], trajectory.propagators[k] @ trajectory.states[k])

        self.assertIsNone(propagate(model, pulse, embed_initial(self.x0, 1, 1), cache=False).propagators)

    def test_wrong_size(self):
        model = lift_system(self.system, UncertainInterval(0, 2), 1, UncertainInterval(0.8, 1.2), 1)

        with self.assertRaises(ValueError):
            propagate(model, ControlSignal.zeros(2, 0.1), embed_initial(self.x0, 0, 0))

        with self.assertRaises(ValueError):
            step_propagator(model, [0, 0, 0, 0], -0.1)


class JacobianTests(unittest.TestCase):
    def setUp(self):
        self.system = build_system(0.1, 0.001)
        self.model = lift_system(self.system, UncertainInterval(0, 2), 1, UncertainInterval(0.8, 1.2), 1)
        self.x0 = embed_initial(vectorize(DensityMatrix.basis("10")), 1, 1)

    def test_matches_naive_products(self):
        pulse = ControlSignal.uniform_random(5, 0.1, 2.0, seed=3)
        trajectory = propagate(self.model, pulse, self.x0)
        Q = jacobian(self.model, trajectory, pulse.dt)

        self.assertEqual(Q.shape, (self.model.size, 20))

        for k in range(5):
            for channel in range(4):
                column = pulse.dt * self.model.controls[channel] @ trajectory.states[k + 1]
                for j in range(k + 1, 5):
                    column = trajectory.propagators[j] @ column

                np.testing.assert_allclose(Q[:, 4 * k + channel], column, atol=1e-13)

    def test_stacked_pairs(self):
        x0 = np.stack([vectorize(DensityMatrix.basis("10")), vectorize(DensityMatrix.basis("01"))], axis=-1)
        pulse = ControlSignal.uniform_random(4, 0.1, 1.0, seed=4)

        stacked = jacobian(self.model, propagate(self.model, pulse, embed_initial(x0, 1, 1)), pulse.dt)
        first = jacobian(self.model, propagate(self.model, pulse, embed_initial(x0[:, 0], 1, 1)), pulse.dt)
        second = jacobian(self.model, propagate(self.model, pulse, embed_initial(x0[:, 1], 1, 1)), pulse.dt)

        np.testing.assert_allclose(stacked, np.vstack([first, second]), atol=1e-14)

    def test_requires_cache(self):
        pulse = ControlSignal.zeros(2, 0.1)

        with self.assertRaises(ValueError):
            jacobian(self.model, propagate(self.model, pulse, self.x0, cache=False), pulse.dt)

    def test_second_order_accuracy(self):
        # An entangled initial state and moderate amplitudes keep the dt² term ahead of the dt³ one
        x0 = embed_initial(vectorize(DensityMatrix.from_ket([1, 1j, 1, -1])), 1, 1)
        h = 1e-6

        for seed in 5, 6, 7:
            samples = ControlSignal.uniform_random(10, 1.0, 0.5, seed=seed).samples

            deviations = []
            for dt in 0.02, 0.01, 0.005:
                pulse = ControlSignal(samples, dt)
                Q = jacobian(self.model, propagate(self.model, pulse, x0), dt)

                deviation = 0.0
                for index in range(Q.shape[1]):
                    step = np.zeros(Q.shape[1])
                    step[index] = h

                    plus = propagate(self.model, pulse.updated(step), x0, cache=False).states[-1]
                    minus = propagate(self.model, pulse.updated(-step), x0, cache=False).states[-1]
                    deviation = max(deviation, np.max(np.abs(Q[:, index] - (plus - minus) / (2 * h))))

                deviations.append(deviation)

            for coarse, fine in zip(deviations, deviations[1:]):
                self.assertGreaterEqual(coarse / fine, 3)
                self.assertLessEqual(coarse / fine, 5)

    def test_single_step_derivative(self):
        # The exact derivative of a step is the integral of exp(sG) B exp((dt - s)G); its leading term is dt B
        model = lift_system(self.system, UncertainInterval(1, 1), 0, UncertainInterval(1, 1), 0)
        generator = model.generator([0.3, -0.1, 0.2, 0.4])
        dt = 1e-4

        exact = (expm(dt * (generator + 1e-7 * model.controls[2])) -
                 expm(dt * (generator - 1e-7 * model.controls[2]))) / 2e-7

        np.testing.assert_allclose(exact, dt * model.controls[2] @ expm(dt * generator), atol=1e-8)


__all__ = ["ControlSignalTests", "PropagateTests", "JacobianTests"]
