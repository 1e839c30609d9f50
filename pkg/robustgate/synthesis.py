"""
Robust gate synthesis

The outer loop propagates the lifted system, linearizes the terminal state in the pulse, solves one QP per
iteration, and regulates ``λ`` by accepting improving steps and doubling ``λ₀`` on rejected ones.
Synthesized pulses are validated by re-simulating the unexpanded dynamics over a grid of parameters.
"""


import logging
import math
import os
import time
import warnings

from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .config import SynthesisConfig
from .enums import Objective
from .errors import ConvergenceError, StagnationError
from .expansion import embed_initial, lift_system
from .gates import gate_target
from .propagation import ControlSignal, jacobian, propagate
from .qp import *
from .quantum import POPULATION_INDICES, build_system, physicality, propagate_exact, vectorize


logger = logging.getLogger(__name__)


LAMBDA_FLOOR = 1e-12
"""
The smallest value ``λ₀`` and ``λ`` may take
"""


class SynthesisReport:
    """
    The history of a synthesis run

    Every trial step is recorded, accepted or not, along with the ``λ`` it was solved with.
    ``final_error`` is the expansion-space terminal error of the returned pulse.
    """

    def __init__(self, objective: str = Objective.ErrorNorm):
        self.objective = objective

        self.objective_trace = []
        self.lambda_trace = []
        self.accepted = []
        self.error_trace = []

        self.initial_objective = None
        self.initial_error = None
        self.final_error = None
        self.iterations_used = 0
        self.wall_clock = 0.0
        self.stop_reason = None

    def __repr__(self) -> str:
        return (f"SynthesisReport(objective={self.objective!r}, iterations_used={self.iterations_used}, "
                f"final_error={self.final_error!r}, stop_reason={self.stop_reason!r})")

    def record(self, objective: float, lam: float, accepted: bool, error: float):
        self.objective_trace.append(float(objective))
        self.lambda_trace.append(float(lam))
        self.accepted.append(bool(accepted))
        self.error_trace.append(float(error))

    @property
    def accepted_errors(self) -> list[float]:
        """
        :return: The initial error followed by the error of every accepted step
        """

        return [self.initial_error] + [error for error, flag in zip(self.error_trace, self.accepted) if flag]

    def convergence_order(self) -> float | None:
        """
        Estimates the order of convergence from successive accepted errors

        Each triple of errors ``e₀, e₁, e₂`` gives ``log(e₂/e₁) / log(e₁/e₀)``; the median estimate is returned.

        :return: The estimated order, or ``None`` if fewer than three distinct positive errors were accepted
        """

        errors = [error for error in self.accepted_errors if error is not None and error > 0]
        estimates = []

        for e0, e1, e2 in zip(errors, errors[1:], errors[2:]):
            if e0 != e1 and e1 != e2:
                estimates.append(math.log(e2 / e1) / math.log(e1 / e0))

        return float(np.median(estimates)) if estimates else None

    def dict(self) -> dict:
        """
        :return: This report as JSON
        """

        return {
            "objective": self.objective,
            "objectiveTrace": self.objective_trace,
            "lambdaTrace": self.lambda_trace,
            "accepted": self.accepted,
            "errorTrace": self.error_trace,
            "initialObjective": self.initial_objective,
            "initialError": self.initial_error,
            "finalError": self.final_error,
            "iterationsUsed": self.iterations_used,
            "wallClock": self.wall_clock,
            "stopReason": self.stop_reason,
            "convergenceOrder": self.convergence_order()
        }


class ErrorGrid:
    """
    Terminal errors of a pulse over a uniform grid of parameter values

    ``errors[i, j]`` belongs to ``(alpha_values[i], beta_values[j])``.
    Terminal populations of the first state pair and physicality measures over every simulated sample are kept too.
    """

    def __init__(self, alpha_values: np.ndarray, beta_values: np.ndarray, errors: np.ndarray,
                 populations: np.ndarray = None, physicality: tuple[float, float, float] = None):
        if errors.shape != (len(alpha_values), len(beta_values)):
            raise ValueError(f"error grid has shape {errors.shape}, "
                             f"but there are {len(alpha_values)}×{len(beta_values)} nodes")

        self.alpha_values = alpha_values
        self.beta_values = beta_values
        self.errors = errors
        self.populations = populations

        self.trace_error, self.hermitian_error, self.min_eigenvalue = physicality or (None, None, None)

    def __repr__(self) -> str:
        return f"ErrorGrid({len(self.alpha_values)}×{len(self.beta_values)}, max_error={self.max_error:.3g})"

    @property
    def max_error(self) -> float:
        return float(np.max(self.errors))

    def rows(self):
        """
        Iterates over the grid nodes row-major, alpha first

        :return: A generator of ``(alpha, beta, error)``
        """

        for i, alpha in enumerate(self.alpha_values):
            for j, beta in enumerate(self.beta_values):
                yield float(alpha), float(beta), float(self.errors[i, j])


def _stack(values: np.ndarray) -> np.ndarray:
    # Pair-major, matching the row order of a stacked Jacobian
    return np.asarray(values).T.ravel()


def _pair_states(pairs) -> tuple[np.ndarray, np.ndarray]:
    initial = np.stack([vectorize(rho) for rho, _ in pairs], axis=-1)
    target = np.stack([vectorize(rho) for _, rho in pairs], axis=-1)
    return initial, target


def _clip(u: ControlSignal, constraints: SignalConstraints) -> ControlSignal:
    return ControlSignal(np.clip(u.samples, constraints.u_min, constraints.u_max), u.dt)


def synthesize(config: SynthesisConfig, *, initial: ControlSignal = None) -> tuple[ControlSignal, SynthesisReport]:
    """
    Synthesizes a pulse steering every configured state pair to its target over the whole uncertainty box

    :param config: The run configuration
    :param initial: A starting pulse overriding the configured one
    :return: The best pulse seen and the `SynthesisReport` of the run
    """

    config.validate()
    start = time.perf_counter()

    objective = config.objective
    tolerance = config.tolerance
    constraints = config.signal_constraints()

    model = lift_system(build_system(config.coupling_j, config.decoherence_gamma),
                        config.alpha_interval, config.n_alpha, config.beta_interval, config.n_beta)

    initial_states, target_states = _pair_states(config.target_pairs())
    x0 = embed_initial(initial_states, model.n_alpha, model.n_beta)
    xT = _stack(embed_initial(target_states, model.n_alpha, model.n_beta).values)

    u = initial if initial is not None else config.initial_signal()
    if u.steps != config.steps or not math.isclose(u.dt, config.dt):
        raise ValueError(f"initial pulse has {u.steps} steps of {u.dt}, "
                         f"but the configuration has {config.steps} steps of {config.dt}")

    if np.any(u.samples < constraints.u_min) or np.any(u.samples > constraints.u_max):
        warnings.warn(f"Initial pulse exceeds the amplitude bounds [{constraints.u_min}, {constraints.u_max}]; "
                      f"clipping.",
                      UserWarning)
        u = _clip(u, constraints)

    def evaluate(trajectory) -> tuple[np.ndarray, float, float]:
        terminal = _stack(trajectory.states[-1])
        error = float(np.linalg.norm(terminal - xT))
        value = error if objective == Objective.ErrorNorm else float(terminal @ xT)
        return terminal, value, error

    def improves(trial: float, incumbent: float) -> bool:
        return trial < incumbent if objective == Objective.ErrorNorm else trial > incumbent

    trajectory = propagate(model, u, x0)
    xK, value, error = evaluate(trajectory)

    report = SynthesisReport(objective)
    report.initial_objective, report.initial_error = value, error

    def finish(reason: str) -> tuple[ControlSignal, SynthesisReport]:
        report.final_error = error
        report.stop_reason = reason
        report.wall_clock = time.perf_counter() - start

        logger.info(f"Synthesis stopped ({reason}) after {report.iterations_used} iterations "
                    f"with terminal error {error:.6g}")
        return u, report

    lambda0 = config.lambda0

    for iteration in range(1, config.max_iterations + 1):
        report.iterations_used = iteration

        residual = xK - xT
        if objective == Objective.ErrorNorm and not np.any(residual):
            return finish("exact")

        Q = jacobian(model, trajectory, u.dt)
        region = build_feasible_region(u, constraints)
        rejections = 0

        while True:
            if objective == Objective.ErrorNorm:
                lam = max(lambda0 * float(residual @ residual), LAMBDA_FLOOR)

            else:
                lam = lambda0

            try:
                if objective == Objective.ErrorNorm:
                    delta = solve_error_qp(Q, xK, xT, lam, region).delta_u

                else:
                    delta = solve_inner_product_qp(Q, xT, lam, region).delta_u

            except ConvergenceError as e:
                if e.best is None or region.violation(e.best) > 1e-10:
                    raise

                warnings.warn(f"QP stopped at KKT residual {e.residual:.3g}; using its best iterate.",
                              RuntimeWarning)
                delta = e.best

            if np.max(np.abs(delta), initial=0.0) < tolerance:
                if iteration == 1 and not np.any(u.samples) and error > tolerance:
                    warnings.warn("The zero pulse is a stationary point of this objective; "
                                  "use a random initial pulse to break the symmetry.",
                                  RuntimeWarning)

                return finish("step")

            trial_u = _clip(u.updated(delta), constraints)
            trial_trajectory = propagate(model, trial_u, x0)
            trial_xK, trial_value, trial_error = evaluate(trial_trajectory)

            if improves(trial_value, value):
                report.record(trial_value, lam, True, trial_error)
                lambda0 = max(lambda0 / 2, LAMBDA_FLOOR)
                break

            report.record(trial_value, lam, False, trial_error)
            logger.debug(f"Iteration {iteration}: rejected step with λ = {lam:.3g} "
                         f"(objective {trial_value:.6g} vs {value:.6g})")

            rejections += 1
            if rejections > config.max_doublings:
                report.final_error = error
                report.stop_reason = "stagnation"
                report.wall_clock = time.perf_counter() - start
                raise StagnationError(f"iteration {iteration} rejected {rejections} consecutive steps",
                                      report=report, pulse=u)

            lambda0 *= 2

        change = abs(trial_value - value)
        u, trajectory, xK, value, error = trial_u, trial_trajectory, trial_xK, trial_value, trial_error

        logger.info(f"Iteration {iteration}: objective {value:.6g}, terminal error {error:.6g}, λ = {lam:.3g}")

        if change < tolerance:
            return finish("objective")

    return finish("iterations")


def _node(system, pulse: ControlSignal, initial: np.ndarray, target: np.ndarray, alpha: float, beta: float):
    states = propagate_exact(system, pulse, initial, alpha, beta)
    terminal = states[-1]

    error = float(np.max(np.linalg.norm(terminal - target, axis=0)))
    populations = terminal[list(POPULATION_INDICES), 0]
    return error, populations, physicality(np.moveaxis(states, -1, 1))


def thread_count() -> int:
    """
    :return: The number of worker threads, capped by the ``THREADS`` environment variable if set
    """

    try:
        limit = int(os.environ.get("THREADS", 0))

    except ValueError:
        warnings.warn(f"THREADS is not an integer ({os.environ['THREADS']!r}); ignoring it.",
                      UserWarning)
        limit = 0

    count = os.cpu_count() or 1
    return max(1, min(limit, count) if limit > 0 else count)


def _check_pulse(pulse: ControlSignal, config: SynthesisConfig):
    if pulse.steps != config.steps:
        raise ValueError(f"pulse has {pulse.steps} samples, but the configuration has {config.steps} steps")

    if not math.isclose(pulse.dt, config.dt):
        raise ValueError(f"pulse has step {pulse.dt}, but the configuration has step {config.dt}")


def validate_grid(pulse: ControlSignal, config: SynthesisConfig, grid_alpha: int, grid_beta: int) -> ErrorGrid:
    """
    Simulates the unexpanded dynamics under a pulse at every node of a uniform parameter grid

    Nodes are evaluated in parallel; results are identical to a sequential evaluation.

    :param pulse: The pulse to validate
    :param config: The run configuration
    :param grid_alpha: The number of ``α`` nodes, at least two
    :param grid_beta: The number of ``β`` nodes, at least two
    :return: The `ErrorGrid`, with the largest terminal error over state pairs at each node
    """

    if grid_alpha < 2 or grid_beta < 2:
        raise ValueError(f"grid must have at least 2×2 nodes, got {grid_alpha}×{grid_beta}")

    _check_pulse(pulse, config)

    system = build_system(config.coupling_j, config.decoherence_gamma)
    initial, target = _pair_states(config.target_pairs())

    alpha_values = np.linspace(config.alpha_interval.lo, config.alpha_interval.hi, grid_alpha)
    beta_values = np.linspace(config.beta_interval.lo, config.beta_interval.hi, grid_beta)
    nodes = [(alpha, beta) for alpha in alpha_values for beta in beta_values]

    with ThreadPoolExecutor(max_workers=thread_count()) as executor:
        results = list(executor.map(lambda node: _node(system, pulse, initial, target, *node), nodes))

    errors = np.array([result[0] for result in results]).reshape(grid_alpha, grid_beta)
    populations = np.array([result[1] for result in results]).reshape(grid_alpha, grid_beta, -1)

    trace_error = max(result[2][0] for result in results)
    hermitian_error = max(result[2][1] for result in results)
    min_eigenvalue = min(result[2][2] for result in results)

    return ErrorGrid(alpha_values, beta_values, errors, populations, (trace_error, hermitian_error, min_eigenvalue))


def simulate(pulse: ControlSignal, config: SynthesisConfig, alpha: float, beta: float) -> np.ndarray:
    """
    Simulates the unexpanded dynamics of the first configured state pair at one parameter point

    :param pulse: The pulse
    :param config: The run configuration
    :param alpha: The drift parameter, inside the configured interval
    :param beta: The control parameter, inside the configured interval
    :return: The ``K + 1`` vectorized states
    """

    for name, value, interval in ("alpha", alpha, config.alpha_interval), ("beta", beta, config.beta_interval):
        if value not in interval:
            raise ValueError(f"{name} = {value} is outside [{interval.lo}, {interval.hi}]")

    _check_pulse(pulse, config)

    initial, _ = _pair_states(config.target_pairs()[:1])
    return propagate_exact(build_system(config.coupling_j, config.decoherence_gamma), pulse, initial[:, 0], alpha, beta)


__all__ = ["SynthesisReport", "ErrorGrid", "LAMBDA_FLOOR",
           "gate_target", "synthesize", "validate_grid", "simulate", "thread_count"]
