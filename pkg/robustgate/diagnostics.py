"""
Diagnostics for choosing the expansion orders
"""


from collections.abc import Iterable

import numpy as np

from .expansion import UncertainInterval, embed_initial, lift_system, map_parameter, reconstruct
from .propagation import ControlSignal, propagate
from .quantum import SystemMatrices, propagate_exact


def lift_consistency(system: SystemMatrices, pulse: ControlSignal, x0: np.ndarray,
                     alpha_interval: UncertainInterval, beta_interval: UncertainInterval,
                     orders: Iterable[tuple[int, int]], grid: int = 5) -> list[float]:
    """
    Measures how well the lifted model reproduces the parametric dynamics at each expansion order

    The truncated series is reconstructed at every sample of a uniform ``grid×grid`` set of parameter points and
    compared against direct integration of the unexpanded system.

    :param system: The unexpanded system matrices
    :param pulse: The pulse to propagate
    :param x0: The initial vectorized state
    :param alpha_interval: The interval of ``α``
    :param beta_interval: The interval of ``β``
    :param orders: The ``(N_α, N_β)`` pairs to test
    :param grid: The number of points per parameter, at least two
    :return: The largest reconstruction error for each order
    """

    if grid < 2:
        raise ValueError(f"grid must have at least 2 points per parameter, got {grid}")

    points = np.linspace(-1, 1, grid)
    exact = {(a, b): propagate_exact(system, pulse, x0,
                                     map_parameter(alpha_interval, a), map_parameter(beta_interval, b))
             for a in points for b in points}

    errors = []
    for n_alpha, n_beta in orders:
        model = lift_system(system, alpha_interval, n_alpha, beta_interval, n_beta)
        trajectory = propagate(model, pulse, embed_initial(x0, n_alpha, n_beta), cache=False)

        worst = 0.0
        for (a, b), states in exact.items():
            for k, state in enumerate(states):
                worst = max(worst, float(np.max(np.abs(reconstruct(trajectory.state(k), a, b) - state))))

        errors.append(worst)

    return errors


__all__ = ["lift_consistency"]
