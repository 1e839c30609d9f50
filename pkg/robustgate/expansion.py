"""
Legendre expansion of the parametric system over the uncertainty box

A state ``X(t; α(a), β(b))`` is approximated by ``Σ x[p, q](t) L_p(a) L_q(b)`` with orthonormal Legendre
polynomials ``L``. The coefficients ``x[p, q]`` are stacked p-major, q-minor, so block ``(p, q)`` sits at block
index ``p (N_β + 1) + q``.
"""


import numpy as np

from .quantum import STATE_SIZE, SystemMatrices


class UncertainInterval:
    """
    A compact interval ``[lo, hi]`` of an uncertain parameter

    The affine map ``s -> half_width s + center`` carries ``[-1, 1]`` onto the interval.
    Degenerate intervals (``lo == hi``) are allowed.
    """

    __slots__ = "lo", "hi"

    def __init__(self, lo: float, hi: float):
        lo, hi = float(lo), float(hi)

        if not (np.isfinite(lo) and np.isfinite(hi)):
            raise ValueError(f"interval bounds must be finite, got [{lo}, {hi}]")

        if lo > hi:
            raise ValueError(f"interval is empty ({lo} > {hi})")

        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    def __setattr__(self, key, value):
        raise AttributeError("intervals are immutable")

    def __eq__(self, other) -> bool:
        try:
            return (self.lo, self.hi) == (other.lo, other.hi)

        except AttributeError:
            return False

    def __hash__(self):
        return hash((self.lo, self.hi))

    def __iter__(self):
        yield self.lo
        yield self.hi

    def __repr__(self) -> str:
        return f"UncertainInterval({self.lo!r}, {self.hi!r})"

    def __contains__(self, value: float) -> bool:
        return self.lo <= value <= self.hi

    @property
    def center(self) -> float:
        return (self.hi + self.lo) / 2

    @property
    def half_width(self) -> float:
        return (self.hi - self.lo) / 2


def map_parameter(interval: UncertainInterval, s: float | np.ndarray) -> float | np.ndarray:
    """
    Maps a point of ``[-1, 1]`` onto an uncertainty interval

    :param interval: The interval
    :param s: The normalized coordinate(s)
    :return: ``half_width s + center``
    """

    return interval.half_width * s + interval.center


def recurrence_coeff(p: int) -> float:
    """
    The off-diagonal coefficient of the orthonormal Legendre three-term recurrence

    ``x L_p(x) = c_{p-1} L_{p-1}(x) + c_p L_{p+1}(x)``

    :param p: The degree
    :return: ``(p + 1) / sqrt((2p + 3)(2p + 1))``
    """

    if p < 0:
        raise ValueError(f"degree must be non-negative, got {p}")

    return (p + 1) / np.sqrt((2 * p + 3) * (2 * p + 1))


def legendre_values(N: int, x: float | np.ndarray) -> np.ndarray:
    """
    Evaluates the orthonormal Legendre polynomials of degree ``0`` through ``N`` by upward recurrence

    :param N: The maximum degree
    :param x: Evaluation point(s) in ``[-1, 1]``
    :return: An array whose first axis indexes the degree
    """

    if N < 0:
        raise ValueError(f"degree must be non-negative, got {N}")

    x = np.asarray(x, dtype=float)
    if np.any(np.abs(x) > 1 + 1e-14):
        raise ValueError("Legendre polynomials are evaluated on [-1, 1]")

    values = np.empty((N + 1, *x.shape))
    values[0] = 1 / np.sqrt(2)

    if N >= 1:
        values[1] = x * values[0] / recurrence_coeff(0)

    for p in range(1, N):
        values[p + 1] = (x * values[p] - recurrence_coeff(p - 1) * values[p - 1]) / recurrence_coeff(p)

    return values


def legendre_eval(p: int, x: float | np.ndarray) -> float | np.ndarray:
    """
    Evaluates one orthonormal Legendre polynomial

    :param p: The degree
    :param x: Evaluation point(s) in ``[-1, 1]``
    :return: ``L_p(x)``, normalized so that its square integrates to one over ``[-1, 1]``
    """

    value = legendre_values(p, x)[p]
    return float(value) if value.ndim == 0 else value


def build_C(interval: UncertainInterval, N: int) -> np.ndarray:
    """
    Builds the multiplication-by-parameter operator in the Legendre basis

    :param interval: The uncertainty interval
    :param N: The maximum degree
    :return: The symmetric tridiagonal ``(N + 1)×(N + 1)`` matrix with diagonal ``center`` and off-diagonals ``c_p half_width``
    """

    if N < 0:
        raise ValueError(f"degree must be non-negative, got {N}")

    off = np.array([recurrence_coeff(p) for p in range(N)]) * interval.half_width
    return np.diag(np.full(N + 1, interval.center)) + np.diag(off, 1) + np.diag(off, -1)


class CoefficientState:
    """
    The stacked Legendre coefficients of a parametric vectorized state

    ``values`` has length ``32 (N_α + 1)(N_β + 1)``; an optional trailing axis stacks several states.
    """

    def __init__(self, values: np.ndarray, n_alpha: int, n_beta: int):
        values = np.asarray(values, dtype=float)
        expected = STATE_SIZE * (n_alpha + 1) * (n_beta + 1)

        if values.shape[0] != expected:
            raise ValueError(f"coefficient state for orders ({n_alpha}, {n_beta}) must have length {expected}, "
                             f"got {values.shape[0]}")

        self.values = values
        self.n_alpha = n_alpha
        self.n_beta = n_beta

    def __len__(self) -> int:
        return self.values.shape[0]

    def block(self, p: int, q: int) -> np.ndarray:
        """
        :param p: The degree in the ``α`` direction
        :param q: The degree in the ``β`` direction
        :return: The coefficient vector ``x[p, q]``
        """

        if not (0 <= p <= self.n_alpha and 0 <= q <= self.n_beta):
            raise IndexError(f"block ({p}, {q}) is outside orders ({self.n_alpha}, {self.n_beta})")

        start = (p * (self.n_beta + 1) + q) * STATE_SIZE
        return self.values[start:start + STATE_SIZE]


class RobustModel:
    """
    The deterministic bilinear system of the stacked Legendre coefficients

    ``A = C_α ⊗ I ⊗ 𝒜`` and ``B = I ⊗ C_β ⊗ ℬ`` for each of the four controls.
    Instances are immutable after construction.
    """

    def __init__(self, base: SystemMatrices,
                 alpha_interval: UncertainInterval, n_alpha: int,
                 beta_interval: UncertainInterval, n_beta: int):
        if n_alpha < 0 or n_beta < 0:
            raise ValueError(f"expansion orders must be non-negative, got ({n_alpha}, {n_beta})")

        self.base = base
        self.alpha_interval = alpha_interval
        self.beta_interval = beta_interval
        self.n_alpha = n_alpha
        self.n_beta = n_beta

        c_alpha = build_C(alpha_interval, n_alpha)
        c_beta = build_C(beta_interval, n_beta)

        drift = np.kron(np.kron(c_alpha, np.eye(n_beta + 1)), base.drift)
        drift.setflags(write=False)
        self.drift = drift

        lift = np.kron(np.eye(n_alpha + 1), c_beta)
        controls = []
        for control in base.controls:
            lifted = np.kron(lift, control)
            lifted.setflags(write=False)
            controls.append(lifted)

        self.controls = tuple(controls)

    @property
    def size(self) -> int:
        """
        :return: The side of the lifted matrices, ``32 (N_α + 1)(N_β + 1)``
        """

        return self.drift.shape[0]

    def generator(self, u_k) -> np.ndarray:
        """
        :param u_k: The four control amplitudes of one step
        :return: ``A + Σ u B``
        """

        matrix = self.drift
        for amplitude, control in zip(u_k, self.controls):
            matrix = matrix + amplitude * control

        return matrix

    def coefficients(self, values: np.ndarray) -> CoefficientState:
        """
        Wraps raw coefficient values for this model's orders

        :param values: The stacked coefficients
        :return: A `CoefficientState`
        """

        return CoefficientState(values, self.n_alpha, self.n_beta)


def lift_system(system: SystemMatrices,
                alpha_interval: UncertainInterval, n_alpha: int,
                beta_interval: UncertainInterval, n_beta: int) -> RobustModel:
    """
    Lifts the parametric system over the uncertainty box

    :param system: The unexpanded system matrices
    :param alpha_interval: The interval of the drift parameter ``α``
    :param n_alpha: The maximum Legendre degree in ``α``
    :param beta_interval: The interval of the control parameter ``β``
    :param n_beta: The maximum Legendre degree in ``β``
    :return: The lifted `RobustModel`
    """

    return RobustModel(system, alpha_interval, n_alpha, beta_interval, n_beta)


def embed_initial(x0: np.ndarray, n_alpha: int, n_beta: int) -> CoefficientState:
    """
    Projects a parameter-independent vectorized state onto the Legendre basis

    Since ``∫ L_0 = √2`` on each axis, block ``(0, 0)`` is ``2 x0`` and every other block vanishes.

    :param x0: The vectorized state(s), of shape ``(32,)`` or ``(32, P)``
    :param n_alpha: The maximum Legendre degree in ``α``
    :param n_beta: The maximum Legendre degree in ``β``
    :return: The `CoefficientState`
    """

    x0 = np.asarray(x0, dtype=float)
    values = np.zeros((STATE_SIZE * (n_alpha + 1) * (n_beta + 1), *x0.shape[1:]))
    values[:STATE_SIZE] = 2 * x0
    return CoefficientState(values, n_alpha, n_beta)


def reconstruct(x: CoefficientState, a: float, b: float) -> np.ndarray:
    """
    Evaluates the truncated Legendre series at a normalized parameter point

    :param x: The coefficient state
    :param a: The normalized ``α`` coordinate in ``[-1, 1]``
    :param b: The normalized ``β`` coordinate in ``[-1, 1]``
    :return: The vectorized state ``Σ x[p, q] L_p(a) L_q(b)``
    """

    if abs(a) > 1 or abs(b) > 1:
        raise ValueError(f"parameter point ({a}, {b}) is outside [-1, 1]²")

    weights = np.outer(legendre_values(x.n_alpha, a), legendre_values(x.n_beta, b)).ravel()
    blocks = x.values.reshape(len(weights), STATE_SIZE, *x.values.shape[1:])
    return np.tensordot(weights, blocks, axes=1)


__all__ = ["UncertainInterval", "CoefficientState", "RobustModel",
           "map_parameter", "recurrence_coeff", "legendre_values", "legendre_eval", "build_C",
           "lift_system", "embed_initial", "reconstruct"]
