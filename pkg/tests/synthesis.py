import os
import unittest
import warnings

from unittest.mock import patch

import numpy as np

from robustgate.config import InitialPulse, SynthesisConfig
from robustgate.errors import StagnationError
from robustgate.expansion import UncertainInterval, embed_initial, lift_system
from robustgate.propagation import ControlSignal, jacobian, propagate
from robustgate.qp import QpSolution, closed_form_gradient, closed_form_levenberg
from robustgate.quantum import DensityMatrix, build_system, population_sum, vectorize
from robustgate.synthesis import *


def small_config(**kwargs) -> SynthesisConfig:
    return SynthesisConfig(steps=5, horizon=0.5, n_alpha=0, n_beta=1, **kwargs)


class ReportTests(unittest.TestCase):
    def test_convergence_order(self):
        report = SynthesisReport()
        report.initial_error = 1e-1

        for error in 1e-2, 1e-4:
            report.record(error, 1.0, True, error)

        report.record(1.0, 2.0, False, 1.0)
        report.record(1e-8, 1.0, True, 1e-8)

        self.assertEqual(report.accepted_errors, [1e-1, 1e-2, 1e-4, 1e-8])
        self.assertAlmostEqual(report.convergence_order(), 2.0)

    def test_too_few_errors(self):
        report = SynthesisReport()
        report.initial_error = 1.0
        report.record(0.5, 1.0, True, 0.5)

        self.assertIsNone(report.convergence_order())
        self.assertIsNone(report.dict()["convergenceOrder"])

    def test_dict(self):
        report = SynthesisReport("innerProduct")
        report.record(3.0, 0.1, True, 0.2)

        dct = report.dict()
        self.assertEqual(dct["objective"], "innerProduct")
        self.assertEqual(dct["lambdaTrace"], [0.1])
        self.assertEqual(dct["accepted"], [True])


class SynthesizeTests(unittest.TestCase):
    def test_monotone_and_bounded(self):
        config = small_config(max_iterations=5, constraints={"uMin": -0.5, "uMax": 0.5},
                              initial_pulse=InitialPulse("uniformRandom", 0.5, 1))
        pulse, report = synthesize(config)

        errors = report.accepted_errors
        self.assertEqual(errors, sorted(errors, reverse=True))
        self.assertEqual(report.final_error, errors[-1])
        self.assertEqual(len(report.lambda_trace), len(report.accepted))

        self.assertLessEqual(np.max(np.abs(pulse.samples)), 0.5)
        self.assertEqual(pulse.steps, 5)

    def test_rates_preserved(self):
        config = small_config(max_iterations=5,
                              constraints={"uMin": -10, "uMax": 10, "rateMin": -20, "rateMax": 20},
                              initial_pulse=InitialPulse("uniformRandom", 0.1, 2))
        pulse, report = synthesize(config)

        self.assertLessEqual(np.max(np.abs(np.diff(pulse.samples, axis=0))) / pulse.dt, 20 + 1e-6)
        self.assertLessEqual(report.final_error, report.initial_error)

    def test_deterministic(self):
        config = small_config(max_iterations=3, initial_pulse=InitialPulse("uniformRandom", 1.0, 4))

        first, first_report = synthesize(config)
        second, second_report = synthesize(config)

        self.assertEqual(first, second)
        self.assertEqual(first_report.error_trace, second_report.error_trace)

    def test_initial_override(self):
        config = small_config(max_iterations=0)
        initial = ControlSignal.uniform_random(5, 0.1, 1.0, seed=5)

        pulse, report = synthesize(config, initial=initial)
        self.assertEqual(pulse, initial)
        self.assertEqual(report.stop_reason, "iterations")

        with self.assertRaises(ValueError):
            synthesize(config, initial=ControlSignal.zeros(4, 0.1))

    def test_clips_initial_pulse(self):
        config = small_config(max_iterations=0, constraints={"uMin": -0.5, "uMax": 0.5},
                              initial_pulse=InitialPulse("uniformRandom", 1.0, 6))

        with self.assertWarns(UserWarning):
            pulse, _ = synthesize(config)

        self.assertLessEqual(np.max(np.abs(pulse.samples)), 0.5)

    def test_zero_pulse_is_stationary(self):
        # Populations only couple to coherences, so the first linearization sees no gradient
        config = small_config()

        with self.assertWarns(RuntimeWarning):
            pulse, report = synthesize(config)

        self.assertEqual(report.stop_reason, "step")
        self.assertEqual(report.iterations_used, 1)
        np.testing.assert_array_equal(pulse.samples, 0)

    def test_already_optimal(self):
        stay = DensityMatrix.basis("00")
        config = small_config(gate="custom", state_pairs=[(stay, stay)])

        with warnings.catch_warnings():
            warnings.simplefilter("error", RuntimeWarning)
            pulse, report = synthesize(config)

        self.assertIn(report.stop_reason, ("exact", "step"))
        self.assertEqual(report.iterations_used, 1)
        self.assertLessEqual(report.final_error, 1e-12)
        np.testing.assert_array_equal(pulse.samples, 0)

    def test_stagnation(self):
        config = small_config(max_doublings=0, initial_pulse=InitialPulse("uniformRandom", 1.0, 3))

        # Steps against the descent direction are always rejected
        def uphill(Q, xK, xT, lam, region, **kwargs):
            return QpSolution(-1e-3 * closed_form_levenberg(Q, xK, xT, lam), 0.0, 0, 0)

        with patch("robustgate.synthesis.solve_error_qp", uphill):
            with self.assertRaises(StagnationError) as context:
                synthesize(config)

        self.assertEqual(context.exception.report.accepted, [False])
        self.assertEqual(context.exception.report.stop_reason, "stagnation")
        self.assertEqual(context.exception.pulse, config.initial_signal())

    def test_gradient_step(self):
        # Without parameter uncertainty or bounds, one inner-product iteration is a plain gradient step
        config = SynthesisConfig(steps=5, horizon=0.5, n_alpha=0, n_beta=0,
                                 alpha_interval=[1, 1], beta_interval=[1, 1],
                                 constraints={"uMin": None, "uMax": None},
                                 objective="innerProduct", max_iterations=1,
                                 initial_pulse=InitialPulse("uniformRandom", 1.0, 2))

        initial = config.initial_signal()
        pulse, report = synthesize(config)
        self.assertTrue(report.accepted[-1])

        one = UncertainInterval(1, 1)
        model = lift_system(build_system(0.1, 0.0), one, 0, one, 0)
        trajectory = propagate(model, initial, embed_initial(vectorize(DensityMatrix.basis("10")), 0, 0))

        Q = jacobian(model, trajectory, initial.dt)
        expected = closed_form_gradient(Q, 2 * vectorize(DensityMatrix.basis("11")), report.lambda_trace[-1])

        np.testing.assert_allclose(pulse.vector(), initial.vector() + expected, rtol=1e-9, atol=1e-12)


class ValidateTests(unittest.TestCase):
    def test_zero_pulse(self):
        config = small_config()
        grid = validate_grid(ControlSignal.zeros(5, 0.1), config, 2, 2)

        np.testing.assert_allclose(grid.errors, np.full((2, 2), np.sqrt(2)), atol=1e-12)
        np.testing.assert_allclose(grid.populations[1, 1], [0, 0, 1, 0], atol=1e-12)
        np.testing.assert_array_equal(grid.alpha_values, [0, 2])

        self.assertLessEqual(grid.trace_error, 1e-12)
        self.assertLessEqual(grid.hermitian_error, 1e-12)
        self.assertGreaterEqual(grid.min_eigenvalue, -1e-12)

        rows = list(grid.rows())
        self.assertEqual(len(rows), 4)
        self.assertEqual(rows[1][:2], (0.0, 1.2))

    def test_reduced_synthesis(self):
        config = SynthesisConfig(steps=20, n_alpha=1, n_beta=1, max_iterations=10,
                                 initial_pulse=InitialPulse("uniformRandom", 1.0, 0))
        pulse, report = synthesize(config)

        initial = validate_grid(config.initial_signal(), config, 5, 5)
        grid = validate_grid(pulse, config, 5, 5)

        self.assertLess(report.final_error, 0.5 * report.initial_error)
        self.assertLess(grid.max_error, 0.5 * initial.max_error)

        self.assertLessEqual(grid.trace_error, 1e-10)
        self.assertLessEqual(grid.hermitian_error, 1e-10)
        self.assertGreaterEqual(grid.min_eigenvalue, -1e-8)

    def test_thread_count_independent(self):
        config = small_config()
        pulse = ControlSignal.uniform_random(5, 0.1, 2.0, seed=8)

        with patch.dict(os.environ, {"THREADS": "1"}):
            self.assertEqual(thread_count(), 1)
            sequential = validate_grid(pulse, config, 3, 3)

        parallel = validate_grid(pulse, config, 3, 3)
        np.testing.assert_array_equal(sequential.errors, parallel.errors)

    def test_invalid(self):
        config = small_config()

        with self.assertRaises(ValueError):
            validate_grid(ControlSignal.zeros(5, 0.1), config, 1, 5)

        with self.assertRaises(ValueError):
            validate_grid(ControlSignal.zeros(6, 0.1), config, 2, 2)

        with self.assertRaises(ValueError):
            validate_grid(ControlSignal.zeros(5, 0.2), config, 2, 2)


class SimulateTests(unittest.TestCase):
    def test_inside(self):
        config = small_config()
        states = simulate(ControlSignal.uniform_random(5, 0.1, 1.0, seed=9), config, 1.0, 1.0)

        self.assertEqual(states.shape, (6, 32))
        np.testing.assert_allclose(population_sum(states), 1, atol=1e-12)

    def test_outside(self):
        config = small_config()

        with self.assertRaises(ValueError):
            simulate(ControlSignal.zeros(5, 0.1), config, 2.5, 1.0)

        with self.assertRaises(ValueError):
            simulate(ControlSignal.zeros(5, 0.1), config, 1.0, 0.5)


__all__ = ["ReportTests", "SynthesizeTests", "ValidateTests", "SimulateTests"]
