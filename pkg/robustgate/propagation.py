"""
Piecewise-constant propagation of the lifted system and its approximate Jacobian
"""


import numpy as np

from collections.abc import Sequence
from scipy.linalg import expm

from .expansion import CoefficientState, RobustModel
from .quantum import CHANNELS


class ControlSignal:
    """
    A piecewise-constant control pulse

    Sample ``k`` holds ``(u1x, u1y, u2x, u2y)`` on ``[k dt, (k + 1) dt)``.
    The flattened vector form orders samples step-major, so sample ``(k, channel)`` sits at index ``4k + channel``.
    """

    def __init__(self, samples: Sequence[Sequence[float]], dt: float):
        samples = np.array(samples, dtype=float)

        if samples.ndim != 2 or samples.shape[1] != len(CHANNELS) or samples.shape[0] < 1:
            raise ValueError(f"pulse samples must have shape (K, {len(CHANNELS)}) with K ≥ 1, got {samples.shape}")

        if not np.all(np.isfinite(samples)):
            raise ValueError("pulse samples must be finite")

        if not dt > 0:
            raise ValueError(f"time step must be positive, got {dt}")

        samples.setflags(write=False)
        self.samples = samples
        self.dt = float(dt)

    def __len__(self) -> int:
        return self.samples.shape[0]

    def __eq__(self, other) -> bool:
        try:
            return self.dt == other.dt and np.array_equal(self.samples, other.samples)

        except AttributeError:
            return False

    def __repr__(self) -> str:
        return f"ControlSignal(K={len(self)}, dt={self.dt!r})"

    @property
    def steps(self) -> int:
        return self.samples.shape[0]

    @property
    def horizon(self) -> float:
        return self.steps * self.dt

    @property
    def times(self) -> np.ndarray:
        """
        :return: The start time of every step
        """

        return np.arange(self.steps) * self.dt

    @classmethod
    def zeros(cls, steps: int, dt: float) -> 'ControlSignal':
        return cls(np.zeros((steps, len(CHANNELS))), dt)

    @classmethod
    def uniform_random(cls, steps: int, dt: float, amplitude: float, seed: int = None) -> 'ControlSignal':
        """
        Draws every sample uniformly from ``[-amplitude, amplitude]``

        :param steps: The number of steps ``K``
        :param dt: The step duration
        :param amplitude: The largest magnitude of any sample
        :param seed: The seed for ``numpy.random.default_rng``
        :return: A random `ControlSignal`
        """

        rng = np.random.default_rng(seed)
        return cls(rng.uniform(-amplitude, amplitude, size=(steps, len(CHANNELS))), dt)

    @classmethod
    def from_vector(cls, vector: np.ndarray, dt: float) -> 'ControlSignal':
        return cls(np.asarray(vector, dtype=float).reshape(-1, len(CHANNELS)), dt)

    def vector(self) -> np.ndarray:
        """
        :return: The flattened ``4K`` control vector
        """

        return self.samples.ravel().copy()

    def updated(self, delta: np.ndarray) -> 'ControlSignal':
        """
        :param delta: A ``4K`` perturbation
        :return: A new signal with ``delta`` added
        """

        return self.from_vector(self.vector() + delta, self.dt)


class Trajectory:
    """
    The coefficient states visited by a propagation together with the step propagators

    ``states[k + 1] = propagators[k] @ states[k]``; ``propagators`` is ``None`` when not cached.
    """

    def __init__(self, states: np.ndarray, propagators: np.ndarray | None, n_alpha: int, n_beta: int):
        self.states = states
        self.propagators = propagators
        self.n_alpha = n_alpha
        self.n_beta = n_beta

    def __len__(self) -> int:
        return self.states.shape[0]

    @property
    def terminal(self) -> CoefficientState:
        return CoefficientState(self.states[-1], self.n_alpha, self.n_beta)

    def state(self, k: int) -> CoefficientState:
        return CoefficientState(self.states[k], self.n_alpha, self.n_beta)


def step_propagator(model: RobustModel, u_k: Sequence[float], dt: float) -> np.ndarray:
    """
    Computes the transition matrix of one piecewise-constant step

    :param model: The lifted model
    :param u_k: The four control amplitudes held during the step
    :param dt: The step duration
    :return: ``exp(dt (A + Σ u B))``
    """

    if not dt > 0:
        raise ValueError(f"time step must be positive, got {dt}")

    return expm(dt * model.generator(u_k))


def propagate(model: RobustModel, u: ControlSignal, x0: CoefficientState | np.ndarray, *,
              cache: bool = True) -> Trajectory:
    """
    Propagates the lifted system through every step of a pulse

    :param model: The lifted model
    :param u: The control signal
    :param x0: The initial coefficient state(s), of length ``model.size`` with an optional trailing axis
    :param cache: Whether to keep the step propagators, which `jacobian` needs
    :return: The `Trajectory` of all ``K + 1`` states
    """

    x = np.asarray(getattr(x0, "values", x0), dtype=float)

    if x.shape[0] != model.size:
        raise ValueError(f"initial state has length {x.shape[0]}, but the model has size {model.size}")

    states = np.empty((u.steps + 1, *x.shape))
    states[0] = x
    propagators = np.empty((u.steps, model.size, model.size)) if cache else None

    for k, u_k in enumerate(u.samples):
        U = step_propagator(model, u_k, u.dt)
        states[k + 1] = U @ states[k]

        if cache:
            propagators[k] = U

    return Trajectory(states, propagators, model.n_alpha, model.n_beta)


def jacobian(model: RobustModel, traj: Trajectory, dt: float) -> np.ndarray:
    """
    Assembles the approximate Jacobian of the terminal state with respect to every control sample

    Each step derivative is approximated by ``dt B U_k``, so column ``(k, channel)`` is
    ``U_{K-1} ⋯ U_{k+1} (dt B x_{k+1})``. The left products are accumulated backward in a single sweep,
    so no product is ever recomputed.

    When the trajectory stacks ``P`` states, their Jacobians are stacked vertically in state order.

    :param model: The lifted model
    :param traj: A trajectory propagated with ``cache=True``
    :param dt: The step duration
    :return: The ``(model.size P)×(4K)`` Jacobian, column ``4k + channel``
    """

    if traj.propagators is None:
        raise ValueError("trajectory was propagated without caching its propagators")

    steps = traj.propagators.shape[0]
    channels = len(model.controls)
    pairs = traj.states.shape[2] if traj.states.ndim == 3 else 1

    columns = np.empty((pairs, model.size, steps * channels))
    adjoint = np.eye(model.size)

    for k in range(steps - 1, -1, -1):
        following = traj.states[k + 1].reshape(model.size, pairs)

        for channel, control in enumerate(model.controls):
            columns[:, :, channels * k + channel] = (adjoint @ (dt * control @ following)).T

        adjoint = adjoint @ traj.propagators[k]

    return columns.reshape(pairs * model.size, steps * channels)


__all__ = ["ControlSignal", "Trajectory", "step_propagator", "propagate", "jacobian"]
