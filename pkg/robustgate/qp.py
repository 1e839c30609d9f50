"""
Per-iteration quadratic programs over the pulse perturbation

Both programs are posed as ``minimize ½ δ'Hδ + g'δ`` over the feasible region around the current pulse:

    -   Box-only regions are solved by a projected Newton method with an ε-active set, which factorizes the Hessian
        on the free set and falls back to operator splitting if it stalls.
    -   Regions with rate limits are solved by an operator-splitting (ADMM) scheme on ``l ≤ Aδ ≤ u``,
        followed by an active-set polish that recovers an exactly feasible point.
"""


import numpy as np
import scipy.sparse as sp

from scipy.linalg import LinAlgError, cho_factor, cho_solve

from .errors import ConvergenceError, InfeasibleSignalError
from .propagation import ControlSignal
from .quantum import CHANNELS


KKT_TOLERANCE = 1e-8
MAX_ITERATIONS = 10_000
FEASIBILITY_TOLERANCE = 1e-10


class SignalConstraints:
    """
    Amplitude bounds and optional rate limits on every control channel

    Rates are bounds on the discrete derivative ``(u_{k+1} - u_k) / dt``.
    """

    def __init__(self, u_min: float = -10.0, u_max: float = 10.0,
                 rate_min: float = None, rate_max: float = None, dt: float = None):
        if u_min > u_max:
            raise ValueError(f"amplitude bounds are inverted ({u_min} > {u_max})")

        if rate_min is not None and rate_max is not None and rate_min > rate_max:
            raise ValueError(f"rate bounds are inverted ({rate_min} > {rate_max})")

        if dt is not None and not dt > 0:
            raise ValueError(f"time step must be positive, got {dt}")

        self.u_min = float(u_min)
        self.u_max = float(u_max)
        self.rate_min = None if rate_min is None else float(rate_min)
        self.rate_max = None if rate_max is None else float(rate_max)
        self.dt = dt

    def __repr__(self) -> str:
        return (f"SignalConstraints(u_min={self.u_min!r}, u_max={self.u_max!r}, "
                f"rate_min={self.rate_min!r}, rate_max={self.rate_max!r})")

    @property
    def has_rates(self) -> bool:
        return self.rate_min is not None or self.rate_max is not None

    @classmethod
    def unbounded(cls) -> 'SignalConstraints':
        return cls(-np.inf, np.inf)


class FeasibleRegion:
    """
    The set of admissible perturbations ``δ`` around a pulse

    ``lower ≤ δ ≤ upper`` component-wise and, if rate limits are set, ``rate_lower ≤ D δ ≤ rate_upper``
    where each row of the sparse ``D`` differences two consecutive samples of one channel.
    """

    def __init__(self, lower: np.ndarray, upper: np.ndarray,
                 rows: sp.csr_matrix = None, rate_lower: np.ndarray = None, rate_upper: np.ndarray = None):
        self.lower = lower
        self.upper = upper
        self.rows = rows
        self.rate_lower = rate_lower
        self.rate_upper = rate_upper

    @property
    def size(self) -> int:
        return self.lower.shape[0]

    @property
    def row_count(self) -> int:
        return 0 if self.rows is None else self.rows.shape[0]

    @classmethod
    def unbounded(cls, size: int) -> 'FeasibleRegion':
        return cls(np.full(size, -np.inf), np.full(size, np.inf))

    def violation(self, delta: np.ndarray) -> float:
        """
        :param delta: A perturbation
        :return: The largest constraint violation of ``delta``
        """

        worst = max(np.max(self.lower - delta, initial=0.0), np.max(delta - self.upper, initial=0.0))

        if self.rows is not None:
            image = self.rows @ delta
            worst = max(worst, np.max(self.rate_lower - image, initial=0.0), np.max(image - self.rate_upper, initial=0.0))

        return float(worst)


class QpSolution:
    """
    The solution of one per-iteration quadratic program
    """

    def __init__(self, delta_u: np.ndarray, kkt_residual: float, active_set_size: int, iterations: int):
        self.delta_u = delta_u
        self.kkt_residual = kkt_residual
        self.active_set_size = active_set_size
        self.iterations = iterations

    def __repr__(self) -> str:
        return (f"QpSolution(kkt_residual={self.kkt_residual:.3g}, active_set_size={self.active_set_size}, "
                f"iterations={self.iterations})")


def difference_rows(steps: int, channels: int = len(CHANNELS)) -> sp.csr_matrix:
    """
    Builds the first-difference operator on a flattened pulse

    Rows are ordered channel-major; row ``(c, k)`` computes ``v[4(k + 1) + c] - v[4k + c]``.

    :param steps: The number of steps ``K``
    :param channels: The number of channels
    :return: A ``(channels (K - 1))×(channels K)`` sparse matrix
    """

    rows, cols, data = [], [], []
    for channel in range(channels):
        for k in range(steps - 1):
            row = channel * (steps - 1) + k
            rows += [row, row]
            cols += [channels * k + channel, channels * (k + 1) + channel]
            data += [-1.0, 1.0]

    return sp.csr_matrix((data, (rows, cols)), shape=(channels * (steps - 1), channels * steps))


def build_feasible_region(u: ControlSignal, c: SignalConstraints) -> FeasibleRegion:
    """
    Translates signal constraints into bounds on the perturbation of a pulse

    :param u: The current pulse, which must itself be feasible
    :param c: The constraints
    :return: The `FeasibleRegion`, which always contains ``δ = 0``
    """

    values = u.vector()
    dt = c.dt if c.dt is not None else u.dt

    for index, value in enumerate(values):
        k, channel = divmod(index, len(CHANNELS))

        if value < c.u_min - FEASIBILITY_TOLERANCE:
            raise InfeasibleSignalError(f"sample {k} of {CHANNELS[channel]} is {value!r}, below u_min {c.u_min!r}")

        if value > c.u_max + FEASIBILITY_TOLERANCE:
            raise InfeasibleSignalError(f"sample {k} of {CHANNELS[channel]} is {value!r}, above u_max {c.u_max!r}")

    lower = np.minimum(c.u_min - values, 0.0)
    upper = np.maximum(c.u_max - values, 0.0)

    if not c.has_rates or u.steps < 2:
        return FeasibleRegion(lower, upper)

    rows = difference_rows(u.steps)
    change = rows @ values
    rate_min = -np.inf if c.rate_min is None else c.rate_min
    rate_max = np.inf if c.rate_max is None else c.rate_max

    for row, value in enumerate(change / dt):
        channel, k = divmod(row, u.steps - 1)

        if not rate_min - FEASIBILITY_TOLERANCE <= value <= rate_max + FEASIBILITY_TOLERANCE:
            raise InfeasibleSignalError(f"rate of {CHANNELS[channel]} between samples {k} and {k + 1} is {value!r}, "
                                        f"outside [{rate_min!r}, {rate_max!r}]")

    return FeasibleRegion(lower, upper, rows,
                          np.minimum(rate_min * dt - change, 0.0),
                          np.maximum(rate_max * dt - change, 0.0))


def _box_residual(x: np.ndarray, grad: np.ndarray, lower: np.ndarray, upper: np.ndarray) -> float:
    return float(np.max(np.abs(x - np.clip(x - grad, lower, upper)), initial=0.0))


def _solve_box(H: np.ndarray, g: np.ndarray, lower: np.ndarray, upper: np.ndarray, *,
               tol: float, max_iter: int) -> QpSolution:
    n = g.shape[0]
    x = np.clip(np.zeros(n), lower, upper)
    diagonal = np.maximum(np.diag(H), np.finfo(float).tiny)

    clamped = None
    factor = None

    for iteration in range(1, max_iter + 1):
        grad = g + H @ x
        residual = _box_residual(x, grad, lower, upper)

        if residual <= tol:
            return QpSolution(x, residual, int(np.count_nonzero((x <= lower) | (x >= upper))), iteration - 1)

        # Variables within ε of a bound with the gradient pushing outward take scaled gradient steps
        epsilon = min(1e-3, residual)
        old_clamped = clamped
        clamped = ((x <= lower + epsilon) & (grad > 0)) | ((x >= upper - epsilon) & (grad < 0))
        free = ~clamped

        search = -grad / diagonal
        if free.any():
            if factor is None or not np.array_equal(old_clamped, clamped):
                try:
                    factor = cho_factor(H[np.ix_(free, free)])

                except LinAlgError:
                    raise ConvergenceError("Hessian is not positive definite on the free set",
                                           best=x, residual=residual) from None

            search[free] = -cho_solve(factor, grad[free])

        # Armijo search along the projection arc, retried along the scaled gradient if the Newton direction stalls
        step, scaled = 1.0, False
        while True:
            candidate = np.clip(x + step * search, lower, upper)
            move = candidate - x
            slope = grad @ move
            change = slope + 0.5 * move @ (H @ move)

            if slope < 0 and change <= 1e-4 * slope:
                break

            step *= 0.5
            if step < 1e-12:
                if scaled:
                    raise ConvergenceError("line search failed to make progress", best=x, residual=residual)

                search, step, scaled = -grad / diagonal, 1.0, True

        x = candidate

    grad = g + H @ x
    raise ConvergenceError(f"projected Newton did not converge in {max_iter} iterations",
                           best=x, residual=_box_residual(x, grad, lower, upper))


def _kkt_residual(H, g, A, lower, upper, x, y) -> float:
    image = A @ x
    stationarity = np.max(np.abs(H @ x + g + A.T @ y), initial=0.0)
    primal = max(np.max(lower - image, initial=0.0), np.max(image - upper, initial=0.0))

    # Negative multipliers belong to lower bounds, positive ones to upper bounds
    below = np.nan_to_num(np.abs(image - lower), posinf=1e300)
    above = np.nan_to_num(np.abs(upper - image), posinf=1e300)
    complementarity = np.max(np.maximum(below * np.maximum(-y, 0), above * np.maximum(y, 0)), initial=0.0)

    return float(max(stationarity, primal, complementarity))


def _polish(H, g, A, lower, upper, y, *, threshold: float):
    """
    Solves the equality-constrained problem on the active set guessed from the ADMM multipliers
    """

    at_lower = y < -threshold
    at_upper = y > threshold
    active = at_lower | at_upper

    rows = A[active].toarray()
    target = np.where(at_lower, lower, upper)[active]
    n, m = H.shape[0], rows.shape[0]

    system = np.block([[H, rows.T], [rows, np.zeros((m, m))]])
    rhs = np.concatenate([-g, target])

    try:
        solution = np.linalg.solve(system, rhs)

    except np.linalg.LinAlgError:
        solution = np.linalg.lstsq(system, rhs, rcond=None)[0]

    x = solution[:n]
    multipliers = np.zeros(A.shape[0])
    multipliers[active] = solution[n:]
    return x, multipliers, int(np.count_nonzero(active))


def _solve_admm(H: np.ndarray, g: np.ndarray, region: FeasibleRegion, *, tol: float, max_iter: int) -> QpSolution:
    n = g.shape[0]
    if region.rows is None:
        A = sp.identity(n, format="csr")
        lower, upper = region.lower, region.upper

    else:
        A = sp.vstack([sp.identity(n, format="csr"), region.rows], format="csr")
        lower = np.concatenate([region.lower, region.rate_lower])
        upper = np.concatenate([region.upper, region.rate_upper])

    sigma = 1e-6
    rho = 0.1
    AtA = (A.T @ A).toarray()

    def factorize(rho_):
        return cho_factor(H + sigma * np.eye(n) + rho_ * AtA)

    factor = factorize(rho)
    x = np.zeros(n)
    z = np.clip(A @ x, lower, upper)
    y = np.zeros(A.shape[0])

    best, best_residual = x, np.inf

    for iteration in range(1, max_iter + 1):
        x = cho_solve(factor, sigma * x - g + A.T @ (rho * z - y))
        image = A @ x
        z_new = np.clip(image + y / rho, lower, upper)
        y = y + rho * (image - z_new)

        primal = np.max(np.abs(image - z_new), initial=0.0)
        dual = np.max(np.abs(rho * (A.T @ (z_new - z))), initial=0.0)
        z = z_new

        if iteration % 25 == 0 or max(primal, dual) <= 1e-6:
            polished, multipliers, active = _polish(H, g, A, lower, upper, y, threshold=1e-9)
            residual = _kkt_residual(H, g, A, lower, upper, polished, multipliers)

            if residual < best_residual:
                best, best_residual = polished, residual

            if residual <= tol and region.violation(polished) <= FEASIBILITY_TOLERANCE:
                return QpSolution(polished, residual, active, iteration)

        # Rebalance the penalty when the residuals drift apart
        if iteration % 50 == 0 and primal > 0 and dual > 0:
            ratio = np.sqrt(primal / dual)
            if ratio > 5 or ratio < 0.2:
                rho = float(np.clip(rho * ratio, 1e-6, 1e6))
                factor = factorize(rho)

    raise ConvergenceError(f"operator splitting did not converge in {max_iter} iterations",
                           best=best, residual=best_residual)


def solve_qp(H: np.ndarray, g: np.ndarray, region: FeasibleRegion, *,
             tol: float = KKT_TOLERANCE, max_iter: int = MAX_ITERATIONS) -> QpSolution:
    """
    Minimizes ``½ δ'Hδ + g'δ`` over a feasible region

    :param H: A symmetric positive definite Hessian
    :param g: The linear term
    :param region: The feasible region
    :param tol: The KKT residual at which to stop
    :param max_iter: The iteration limit
    :return: The `QpSolution`
    """

    if region.rows is not None:
        return _solve_admm(H, g, region, tol=tol, max_iter=max_iter)

    try:
        return _solve_box(H, g, region.lower, region.upper, tol=tol, max_iter=max_iter)

    except ConvergenceError as e:
        box_error = e

    # Operator splitting with polishing takes over when projected Newton stalls, keeping the better iterate
    try:
        return _solve_admm(H, g, region, tol=tol, max_iter=max_iter)

    except ConvergenceError as e:
        if e.best is None or not e.residual < box_error.residual or region.violation(e.best) > FEASIBILITY_TOLERANCE:
            raise box_error from None

        raise


def _check_lambda(lam: float):
    if not lam > 0:
        raise ValueError(f"regularization must be positive, got {lam}")


def solve_inner_product_qp(Q: np.ndarray, xT, lam: float, region: FeasibleRegion, **kwargs) -> QpSolution:
    """
    Maximizes ``<xT | Q δ> - (λ/2) ‖δ‖²`` over a feasible region

    :param Q: The Jacobian
    :param xT: The stacked target coefficients
    :param lam: The regularization ``λ``
    :param region: The feasible region
    :return: The `QpSolution`
    """

    _check_lambda(lam)
    xT = np.asarray(getattr(xT, "values", xT), dtype=float).ravel()
    return solve_qp(lam * np.eye(Q.shape[1]), -Q.T @ xT, region, **kwargs)


def solve_error_qp(Q: np.ndarray, xK, xT, lam: float, region: FeasibleRegion, **kwargs) -> QpSolution:
    """
    Minimizes ``½ ‖Q δ + xK - xT‖² + (λ/2) ‖δ‖²`` over a feasible region

    :param Q: The Jacobian
    :param xK: The stacked terminal coefficients
    :param xT: The stacked target coefficients
    :param lam: The regularization ``λ``
    :param region: The feasible region
    :return: The `QpSolution`
    """

    _check_lambda(lam)
    residual = _residual(xK, xT)
    return solve_qp(Q.T @ Q + lam * np.eye(Q.shape[1]), Q.T @ residual, region, **kwargs)


def closed_form_gradient(Q: np.ndarray, xT, lam: float) -> np.ndarray:
    """
    The unconstrained inner-product step, i.e. gradient ascent with step ``1/λ``

    :return: ``Q' xT / λ``
    """

    _check_lambda(lam)
    return Q.T @ np.asarray(getattr(xT, "values", xT), dtype=float).ravel() / lam


def closed_form_levenberg(Q: np.ndarray, xK, xT, lam: float) -> np.ndarray:
    """
    The unconstrained error step, i.e. the Levenberg update

    The normal matrix ``Q'Q + λI`` is factorized directly, or the dual ``QQ' + λI`` when it is smaller.

    :return: ``-(Q'Q + λI)⁻¹ Q' (xK - xT)``
    """

    _check_lambda(lam)
    residual = _residual(xK, xT)
    rows, cols = Q.shape

    if rows < cols:
        return -Q.T @ cho_solve(cho_factor(Q @ Q.T + lam * np.eye(rows)), residual)

    return -cho_solve(cho_factor(Q.T @ Q + lam * np.eye(cols)), Q.T @ residual)


def _residual(xK, xT) -> np.ndarray:
    xK = np.asarray(getattr(xK, "values", xK), dtype=float).ravel()
    xT = np.asarray(getattr(xT, "values", xT), dtype=float).ravel()
    return xK - xT


__all__ = ["SignalConstraints", "FeasibleRegion", "QpSolution",
           "difference_rows", "build_feasible_region", "solve_qp",
           "solve_inner_product_qp", "solve_error_qp", "closed_form_gradient", "closed_form_levenberg",
           "KKT_TOLERANCE"]
