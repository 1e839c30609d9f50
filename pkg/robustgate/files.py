"""
CSV and JSON emitters for pulses, error grids, trajectories and reports

Every CSV has one header row, ``,`` separators, ``.`` decimals, ``\\n`` line endings, and 17 significant digits.
"""


import csv
import json

import numpy as np

from .propagation import ControlSignal
from .quantum import CHANNELS, POPULATION_INDICES, population_sum


PULSE_HEADER = ["t", *CHANNELS]
GRID_HEADER = ["alpha", "beta", "error"]
TRAJECTORY_HEADER = ["t", "p00", "p01", "p10", "p11", "trace", "purity"]


def _format(value: float) -> str:
    return f"{value:.17g}"


def _write(filename: str, header: list[str], rows):
    with open(filename, "w", encoding="UTF-8", newline="") as file:
        writer = csv.writer(file, lineterminator="\n")
        writer.writerow(header)
        writer.writerows([_format(value) for value in row] for row in rows)


def _read(filename: str, header: list[str]) -> np.ndarray:
    with open(filename, encoding="UTF-8", newline="") as file:
        reader = csv.reader(file)

        if (found := next(reader, None)) != header:
            raise ValueError(f"{filename} has header {found}, expected {','.join(header)}")

        rows = []
        for line, row in enumerate(reader, start=2):
            if not row:
                continue

            if len(row) != len(header):
                raise ValueError(f"{filename}, line {line}: expected {len(header)} fields, got {len(row)}")

            try:
                rows.append([float(value) for value in row])

            except ValueError:
                raise ValueError(f"{filename}, line {line}: could not parse {row}") from None

    return np.array(rows, dtype=float).reshape(-1, len(header))


def write_pulses(filename: str, pulse: ControlSignal):
    """
    Writes a pulse as CSV with header ``t,u1x,u1y,u2x,u2y``, one row per step

    :param filename: The file to write
    :param pulse: The pulse
    """

    _write(filename, PULSE_HEADER, np.column_stack([pulse.times, pulse.samples]))


def read_pulses(filename: str, dt: float = None) -> ControlSignal:
    """
    Reads a pulse written by `write_pulses`

    :param filename: The file to read
    :param dt: The step duration (defaults to the spacing of the ``t`` column)
    :return: The `ControlSignal` in the file
    """

    data = _read(filename, PULSE_HEADER)
    if data.shape[0] == 0:
        raise ValueError(f"{filename} contains no samples")

    if dt is None:
        if data.shape[0] < 2:
            raise ValueError(f"cannot infer the step duration of a single-sample pulse in {filename}")

        dt = float(data[1, 0] - data[0, 0])

    return ControlSignal(data[:, 1:], dt)


def write_grid(filename: str, grid):
    """
    Writes an error grid as CSV with header ``alpha,beta,error``, row-major over alpha then beta

    :param filename: The file to write
    :param grid: The `ErrorGrid`
    """

    _write(filename, GRID_HEADER, grid.rows())


def read_grid(filename: str) -> np.ndarray:
    """
    :param filename: The file to read
    :return: The ``(alpha, beta, error)`` rows in the file
    """

    return _read(filename, GRID_HEADER)


def trajectory_rows(states: np.ndarray, dt: float) -> np.ndarray:
    """
    Summarizes vectorized states by their populations, trace and purity

    :param states: The ``K + 1`` vectorized states
    :param dt: The step duration
    :return: One row ``t,p00,p01,p10,p11,trace,purity`` per state
    """

    states = np.asarray(states, dtype=float)
    times = np.arange(states.shape[0]) * dt

    # tr(ρ²) is the squared norm of a Hermitian ρ's entries
    purity = np.sum(states ** 2, axis=-1)
    return np.column_stack([times, states[:, list(POPULATION_INDICES)], population_sum(states), purity])


def write_trajectory(filename: str, states: np.ndarray, dt: float):
    """
    Writes a trajectory as CSV with header ``t,p00,p01,p10,p11,trace,purity``

    :param filename: The file to write
    :param states: The ``K + 1`` vectorized states
    :param dt: The step duration
    """

    _write(filename, TRAJECTORY_HEADER, trajectory_rows(states, dt))


def write_report(filename: str, report, config=None):
    """
    Writes a synthesis report as JSON

    :param filename: The file to write
    :param report: The `SynthesisReport`
    :param config: The `SynthesisConfig` of the run, embedded under ``config`` if given
    """

    dct = report.dict()
    if config is not None:
        dct["config"] = config.dict()

    with open(filename, "w", encoding="UTF-8", newline="\n") as file:
        json.dump(dct, file, indent=2)
        file.write("\n")


def read_report(filename: str) -> dict:
    with open(filename, encoding="UTF-8") as file:
        return json.load(file)


__all__ = ["PULSE_HEADER", "GRID_HEADER", "TRAJECTORY_HEADER",
           "write_pulses", "read_pulses", "write_grid", "read_grid",
           "trajectory_rows", "write_trajectory", "write_report", "read_report"]
