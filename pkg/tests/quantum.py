import unittest

import numpy as np

from robustgate.propagation import ControlSignal
from robustgate.quantum import *


def random_density(rng: np.random.Generator) -> np.ndarray:
    m = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    rho = m @ m.conj().T
    return rho / np.trace(rho)


class OperatorTests(unittest.TestCase):
    def test_pauli(self):
        for axis in "xyz":
            sigma = pauli(axis)
            np.testing.assert_allclose(sigma @ sigma, np.eye(2))
            np.testing.assert_allclose(sigma, sigma.conj().T)

        with self.assertRaises(ValueError):
            pauli("w")

    def test_qubit_operator(self):
        np.testing.assert_array_equal(qubit_operator("z", 1), np.diag([1, 1, -1, -1]))
        np.testing.assert_array_equal(qubit_operator("z", 2), np.diag([1, -1, 1, -1]))

        with self.assertRaises(ValueError):
            qubit_operator("x", 3)

    def test_hamiltonian(self):
        H = hamiltonian(0.1, [0, 0, 0, 0])
        np.testing.assert_allclose(H, np.diag([1, -1, -1, 1]) * 0.025)

        H = hamiltonian(0.1, [0.3, -0.2, 0.5, 1.0])
        np.testing.assert_allclose(H, H.conj().T)

        with self.assertRaises(ValueError):
            hamiltonian(0.1, [1, 2, 3])

    def test_lindblad_operators(self):
        dephasing, raising, lowering = lindblad_operators(0.004)

        np.testing.assert_allclose(lowering, raising.conj().T)
        np.testing.assert_allclose(dephasing, dephasing.conj().T)
        np.testing.assert_allclose(raising.imag, 0)

        for op in lindblad_operators(0):
            np.testing.assert_array_equal(op, 0)

        with self.assertRaises(ValueError):
            lindblad_operators(-1)


class DensityMatrixTests(unittest.TestCase):
    def test_basis(self):
        rho = DensityMatrix.basis("10")

        np.testing.assert_array_equal(rho.populations, [0, 0, 1, 0])
        self.assertEqual(rho.trace, 1)
        self.assertEqual(rho.purity, 1)
        rho.validate()

        with self.assertRaises(ValueError):
            DensityMatrix.basis("2")

    def test_from_ket(self):
        rho = DensityMatrix.from_ket([1, 1, 1, 1])

        np.testing.assert_allclose(rho.populations, [0.25] * 4)
        self.assertAlmostEqual(rho.purity, 1)
        rho.validate()

    def test_validate(self):
        with self.assertRaises(ValueError):
            DensityMatrix(np.diag([0.5, 0.5, 0.5, 0])).validate()

        with self.assertRaises(ValueError):
            DensityMatrix(np.diag([1.5, -0.5, 0, 0])).validate()

        with self.assertRaises(ValueError):
            DensityMatrix([[0.5, 1, 0, 0], [0, 0.5, 0, 0], [0, 0, 0, 0], [0, 0, 0, 0]]).validate()

        with self.assertRaises(ValueError):
            DensityMatrix(np.eye(3))

    def test_read_only(self):
        rho = DensityMatrix.basis("00")

        with self.assertRaises(ValueError):
            rho.entries[0, 0] = 2


class VectorizationTests(unittest.TestCase):
    def test_round_trip(self):
        rho = random_density(np.random.default_rng(1))
        x = vectorize(rho)

        self.assertEqual(x.shape, (STATE_SIZE,))
        np.testing.assert_allclose(np.asarray(densify(x)), rho)

        with self.assertRaises(ValueError):
            densify(x[:-1])

    def test_column_stacking(self):
        rho = np.zeros((4, 4), dtype=complex)
        rho[1, 0] = 2 + 3j

        x = vectorize(rho)
        self.assertEqual(x[1], 2)
        self.assertEqual(x[16 + 1], 3)

    def test_population_sum(self):
        rho = random_density(np.random.default_rng(2))
        self.assertAlmostEqual(population_sum(vectorize(rho)), 1)

        self.assertEqual([int(i) for i in POPULATION_INDICES], [0, 5, 10, 15])


class SystemTests(unittest.TestCase):
    def test_generator_matches_lindblad(self):
        rng = np.random.default_rng(3)

        for gamma in 0, 0.01:
            system = build_system(0.1, gamma)

            for _ in range(50):
                rho = random_density(rng)
                u = rng.uniform(-2, 2, size=4)

                np.testing.assert_allclose(system.generator(u) @ vectorize(rho),
                                           vectorize(lindblad_rhs(rho, 0.1, gamma, u)), atol=1e-12)

    def test_parameter_scaling(self):
        rng = np.random.default_rng(4)
        system = build_system(0.1, 0.0)
        rho, u = random_density(rng), rng.uniform(-1, 1, size=4)

        np.testing.assert_allclose(system.generator(u, 1.7, 0.9) @ vectorize(rho),
                                   vectorize(lindblad_rhs(rho, 0.17, 0.0, 0.9 * u)), atol=1e-12)

    def test_block_structure(self):
        system = build_system(0.1, 0.001)
        half = STATE_SIZE // 2

        drift = system.drift
        np.testing.assert_array_equal(drift[:half, :half], drift[half:, half:])
        np.testing.assert_array_equal(drift[:half, half:], -drift[half:, :half])

        # x drives couple real and imaginary parts; y drives do not
        for index, channel in enumerate(CHANNELS):
            control = system.controls[index]

            if channel.endswith("x"):
                np.testing.assert_array_equal(control[:half, :half], 0)
                np.testing.assert_array_equal(control[half:, half:], 0)

            else:
                np.testing.assert_array_equal(control[:half, half:], 0)
                np.testing.assert_array_equal(control[half:, :half], 0)

    def test_trace_preservation(self):
        system = build_system(0.1, 0.01)
        trace_row = np.zeros(STATE_SIZE)
        trace_row[list(POPULATION_INDICES)] = 1

        np.testing.assert_allclose(trace_row @ system.drift, 0, atol=1e-15)
        for control in system.controls:
            np.testing.assert_allclose(trace_row @ control, 0, atol=1e-15)

    def test_read_only(self):
        system = build_system(0.1, 0.0)

        with self.assertRaises(ValueError):
            system.drift[0, 0] = 1


class ExactPropagationTests(unittest.TestCase):
    def test_diagonal_state_is_fixed(self):
        system = build_system(0.1, 0.0)
        x0 = vectorize(DensityMatrix.basis("10"))

        states = propagate_exact(system, ControlSignal.zeros(10, 0.1), x0, 1.3, 0.9)

        self.assertEqual(states.shape, (11, STATE_SIZE))
        np.testing.assert_allclose(states[-1], x0, atol=1e-14)

    def test_rabi_pi_pulse(self):
        dt = 0.1
        system = build_system(0.1, 0.0)
        pulse = ControlSignal([[np.pi / dt, 0, 0, 0]], dt)

        states = propagate_exact(system, pulse, vectorize(DensityMatrix.basis("00")), alpha=0.0, beta=1.0)

        # A π rotation on the first qubit moves |00> entirely into |10>
        np.testing.assert_allclose(states[-1, list(POPULATION_INDICES)], [0, 0, 1, 0], atol=1e-12)
        np.testing.assert_allclose(states[-1], vectorize(DensityMatrix.basis("10")), atol=1e-12)

    def test_physicality(self):
        system = build_system(0.1, 0.01)
        pulse = ControlSignal.uniform_random(20, 0.05, 2.0, seed=5)
        x0 = vectorize(DensityMatrix.from_ket([1, 1, 1, 1]))

        trace_error, hermitian_error, min_eigenvalue = physicality(propagate_exact(system, pulse, x0, 0.5, 1.1))

        self.assertLess(trace_error, 1e-12)
        self.assertLess(hermitian_error, 1e-12)
        self.assertGreater(min_eigenvalue, -1e-10)

    def test_physicality_flags_bad_states(self):
        x = vectorize(np.diag([1.5, -0.5, 0, 0]))
        trace_error, hermitian_error, min_eigenvalue = physicality(x)

        self.assertEqual(trace_error, 0)
        self.assertEqual(hermitian_error, 0)
        self.assertAlmostEqual(min_eigenvalue, -0.5)

    def test_pair_axis(self):
        system = build_system(0.1, 0.0)
        pulse = ControlSignal.uniform_random(4, 0.1, 1.0, seed=6)

        x0 = np.stack([vectorize(DensityMatrix.basis("10")), vectorize(DensityMatrix.basis("01"))], axis=-1)
        states = propagate_exact(system, pulse, x0)

        self.assertEqual(states.shape, (5, STATE_SIZE, 2))
        np.testing.assert_allclose(states[-1, :, 1], propagate_exact(system, pulse, x0[:, 1])[-1], atol=1e-14)


__all__ = ["OperatorTests", "DensityMatrixTests", "VectorizationTests", "SystemTests", "ExactPropagationTests"]
