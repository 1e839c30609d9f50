"""
Run configuration

A `SynthesisConfig` mirrors the JSON run configuration key for key.
Keys are declared as `Field` descriptors, so each reads as its domain type while the raw JSON stays in ``raw``.
"""


import copy
import json
import os
import re

import numpy as np

from .data import *
from .enums import *
from .errors import ConfigError
from .expansion import UncertainInterval
from .gates import Gate, gate_pairs
from .propagation import ControlSignal
from .qp import SignalConstraints
from .quantum import DIMENSION, DensityMatrix


DEFAULT_CONFIG = os.path.join(os.path.dirname(__file__), "json/synth.default.json")
"""
The bundled run configuration reproducing the CNOT experiment
"""


def _key_error(key: str, error: Exception) -> ConfigError:
    if isinstance(error, ConfigError):
        return ConfigError(error.reason, path=f"{key}.{error.path}" if error.path else key)

    return ConfigError(str(error), path=key)


def _unknown(dct: dict, known) -> str | None:
    return next((key for key in dct if key not in known), None)


class Interval(Converter):
    """
    Converter for ``[lo, hi]`` pairs as `UncertainInterval` instances
    """

    _T = UncertainInterval

    @classmethod
    def get(cls, data: list, **kwargs) -> _T:
        return UncertainInterval(*data)

    @classmethod
    def set(cls, value, **kwargs) -> list:
        """
        Converts `UncertainInterval` or ``[lo, hi]`` -> ``[lo, hi]``

        :param value: The value to convert
        :return: The bounds of ``value``
        """

        try:
            lo, hi = value

        except (TypeError, ValueError):
            raise TypeError(f"expected an interval [lo, hi], got {value!r}") from None

        interval = UncertainInterval(Real.set(lo), Real.set(hi))
        return [interval.lo, interval.hi]


class Constraints(Converter):
    """
    Converter for the ``constraints`` object as `SignalConstraints`

    The step duration is taken from the configuration that holds the field.
    A ``null`` amplitude bound leaves that side unbounded.
    """

    _T = SignalConstraints

    KEYS = {"uMin": NullableReal, "uMax": NullableReal, "rateMin": NullableReal, "rateMax": NullableReal}
    DEFAULT = {"uMin": -10.0, "uMax": 10.0, "rateMin": None, "rateMax": None}

    @classmethod
    def get(cls, data: dict, *, instance=None) -> _T:
        data = cls.DEFAULT | data
        return SignalConstraints(-np.inf if data["uMin"] is None else data["uMin"],
                                 np.inf if data["uMax"] is None else data["uMax"],
                                 data["rateMin"], data["rateMax"],
                                 dt=instance.dt if instance is not None else None)

    @classmethod
    def set(cls, value, **kwargs) -> dict:
        if isinstance(value, SignalConstraints):
            value = {"uMin": value.u_min if np.isfinite(value.u_min) else None,
                     "uMax": value.u_max if np.isfinite(value.u_max) else None,
                     "rateMin": value.rate_min, "rateMax": value.rate_max}

        if not isinstance(value, dict):
            raise TypeError(f"expected an object, got {value!r}")

        if (key := _unknown(value, cls.KEYS)) is not None:
            raise ConfigError("unrecognized key", path=key)

        result = {}
        for key, converter in cls.KEYS.items():
            try:
                result[key] = converter.set(value.get(key, cls.DEFAULT[key]))

            except (TypeError, ValueError) as e:
                raise _key_error(key, e) from None

        try:
            cls.get(result)

        except ValueError as e:
            raise ConfigError(str(e)) from None

        return result


class InitialPulse:
    """
    How the first pulse of a synthesis run is drawn
    """

    def __init__(self, kind: str = PulseKind.Zeros, amplitude: float = 1.0, seed: int | None = None):
        self.kind = PulseKind.set(kind)
        self.amplitude = float(amplitude)
        self.seed = seed

    def __eq__(self, other) -> bool:
        try:
            return (self.kind, self.amplitude, self.seed) == (other.kind, other.amplitude, other.seed)

        except AttributeError:
            return False

    def __repr__(self) -> str:
        return f"InitialPulse({self.kind!r}, amplitude={self.amplitude!r}, seed={self.seed!r})"

    def signal(self, steps: int, dt: float) -> ControlSignal:
        """
        :param steps: The number of steps ``K``
        :param dt: The step duration
        :return: The drawn `ControlSignal`
        """

        match self.kind:
            case PulseKind.Zeros:
                return ControlSignal.zeros(steps, dt)

            case PulseKind.UniformRandom:
                return ControlSignal.uniform_random(steps, dt, self.amplitude, self.seed)


class InitialPulseConverter(Converter):
    """
    Converter for the ``initialPulse`` object as an `InitialPulse`
    """

    _T = InitialPulse

    KEYS = {"kind", "amplitude", "seed"}

    @classmethod
    def get(cls, data: dict, **kwargs) -> _T:
        return InitialPulse(data.get("kind", PulseKind.Zeros), data.get("amplitude", 1.0), data.get("seed"))

    @classmethod
    def set(cls, value, **kwargs) -> dict:
        if isinstance(value, InitialPulse):
            value = {"kind": value.kind, "amplitude": value.amplitude, "seed": value.seed}

        if not isinstance(value, dict):
            raise TypeError(f"expected an object, got {value!r}")

        if (key := _unknown(value, cls.KEYS)) is not None:
            raise ConfigError("unrecognized key", path=key)

        result = {}
        try:
            result["kind"] = PulseKind.set(value.get("kind", PulseKind.Zeros))

        except (TypeError, ValueError) as e:
            raise _key_error("kind", e) from None

        try:
            result["amplitude"] = Real.set(value.get("amplitude", 1.0))
            if result["amplitude"] < 0:
                raise ValueError(f"amplitude must be non-negative, got {result['amplitude']}")

        except (TypeError, ValueError) as e:
            raise _key_error("amplitude", e) from None

        try:
            result["seed"] = None if value.get("seed") is None else Integer.set(value["seed"])

        except (TypeError, ValueError) as e:
            raise _key_error("seed", e) from None

        return result


class StatePairs(Converter):
    """
    Converter for explicit ``statePairs`` as ``(initial, target)`` density matrix pairs

    Each matrix is a 4×4 nested list of ``[re, im]`` entries.
    """

    _T = list[tuple[DensityMatrix, DensityMatrix]]

    @staticmethod
    def to_matrix(data) -> DensityMatrix:
        array = np.array(data, dtype=float)

        if array.shape != (DIMENSION, DIMENSION, 2):
            raise ValueError(f"expected a {DIMENSION}×{DIMENSION} array of [re, im] entries, got shape {array.shape}")

        return DensityMatrix(array[..., 0] + 1j * array[..., 1])

    @staticmethod
    def from_matrix(rho: DensityMatrix) -> list:
        entries = np.asarray(rho)
        return np.stack([entries.real, entries.imag], axis=-1).tolist()

    @classmethod
    def get(cls, data: list, **kwargs) -> _T:
        return [(cls.to_matrix(pair["initial"]), cls.to_matrix(pair["target"])) for pair in data or []]

    @classmethod
    def set(cls, value, **kwargs) -> list | None:
        if value is None:
            return None

        if not isinstance(value, list):
            raise TypeError(f"expected a list of state pairs, got {value!r}")

        result = []
        for index, pair in enumerate(value):
            if isinstance(pair, tuple):
                pair = {"initial": cls.from_matrix(pair[0]), "target": cls.from_matrix(pair[1])}

            if not isinstance(pair, dict):
                raise ConfigError(f"expected an object, got {pair!r}", path=str(index))

            if (key := _unknown(pair, {"initial", "target"})) is not None:
                raise ConfigError("unrecognized key", path=f"{index}.{key}")

            for key in "initial", "target":
                try:
                    rho = cls.to_matrix(pair[key])
                    rho.validate(hermitian_tol=1e-9, trace_tol=1e-9)

                except KeyError:
                    raise ConfigError("missing key", path=f"{index}.{key}") from None

                except (TypeError, ValueError) as e:
                    raise ConfigError(str(e), path=f"{index}.{key}") from None

            result.append({"initial": copy.deepcopy(pair["initial"]), "target": copy.deepcopy(pair["target"])})

        return result


class SynthesisConfig(Dock):
    """
    The configuration of a synthesis run

    Unset keys read as their defaults, which reproduce the CNOT experiment with a zero initial pulse.
    Assigning a key validates it immediately; cross-key requirements are checked by `validate`.
    """

    def __init__(self, init=None, **kwargs):
        """
        Creates a configuration, optionally loading a ``dict`` or JSON string and setting fields by name

        :param init: Values to load with `load`
        :param kwargs: Field values by attribute name, e.g. ``steps=10``
        """

        self.raw = {}

        if init is not None:
            self.load(init)

        for name, value in kwargs.items():
            if not isinstance(getattr(type(self), name, None), Field):
                raise TypeError(f"unrecognized configuration field '{name}'")

            try:
                setattr(self, name, value)

            except (TypeError, ValueError) as e:
                raise _key_error(getattr(type(self), name).key, e) from None

    def __eq__(self, other) -> bool:
        try:
            return self.dict() == other.dict()

        except AttributeError:
            return False

    def __repr__(self) -> str:
        return f"SynthesisConfig({self.raw!r})"

    @Field("couplingJ", Real, 0.1)
    def coupling_j(self) -> float:
        """
        The Ising coupling strength ``J``
        """

    @Field("decoherenceGamma", Real, 0.0)
    def decoherence_gamma(self, value) -> float:
        """
        The uniform decoherence rate ``γ``
        """

        if Real.set(value) < 0:
            raise ValueError(f"decoherence rate must be non-negative, got {value}")

        return value

    @Field("horizon", Real, 1.0)
    def horizon(self, value) -> float:
        """
        The gate duration ``T``
        """

        if not Real.set(value) > 0:
            raise ValueError(f"horizon must be positive, got {value}")

        return value

    @Field("steps", Integer, 100)
    def steps(self, value) -> int:
        """
        The number of piecewise-constant steps ``K``
        """

        if Integer.set(value) < 1:
            raise ValueError(f"steps must be at least 1, got {value}")

        return value

    @Field("nAlpha", Integer, 1)
    def n_alpha(self, value) -> int:
        """
        The Legendre order ``N_α`` of the drift parameter
        """

        if Integer.set(value) < 0:
            raise ValueError(f"expansion order must be non-negative, got {value}")

        return value

    @Field("nBeta", Integer, 2)
    def n_beta(self, value) -> int:
        """
        The Legendre order ``N_β`` of the control parameter
        """

        if Integer.set(value) < 0:
            raise ValueError(f"expansion order must be non-negative, got {value}")

        return value

    alpha_interval = Field("alphaInterval", Interval, [0.0, 2.0])
    beta_interval = Field("betaInterval", Interval, [0.8, 1.2])
    constraints = Field("constraints", Constraints, Constraints.DEFAULT)
    objective = Field("objective", Objective, Objective.ErrorNorm)

    @Field("lambda0", Real, 1e-2)
    def lambda0(self, value) -> float:
        """
        The initial regularization scale ``λ₀``
        """

        if not Real.set(value) > 0:
            raise ValueError(f"lambda0 must be positive, got {value}")

        return value

    @Field("maxIterations", Integer, 50)
    def max_iterations(self, value) -> int:
        if Integer.set(value) < 0:
            raise ValueError(f"iteration limit must be non-negative, got {value}")

        return value

    @Field("maxDoublings", Integer, 30)
    def max_doublings(self, value) -> int:
        """
        The number of consecutive rejected retries which stop a run
        """

        if Integer.set(value) < 0:
            raise ValueError(f"doubling limit must be non-negative, got {value}")

        return value

    @Field("tolerance", Real, 1e-10)
    def tolerance(self, value) -> float:
        if not Real.set(value) > 0:
            raise ValueError(f"tolerance must be positive, got {value}")

        return value

    initial_pulse = Field("initialPulse", InitialPulseConverter,
                          {"kind": PulseKind.Zeros, "amplitude": 1.0, "seed": None})
    gate = Field("gate", GateChoice, GateChoice.CNOT)
    pairs = Field("pairs", PairChoice, PairChoice.Single)
    state_pairs = Field("statePairs", StatePairs, None)

    @property
    def dt(self) -> float:
        """
        :return: The step duration ``T / K``
        """

        return self.horizon / self.steps

    def signal_constraints(self) -> SignalConstraints:
        return self.constraints

    def initial_signal(self) -> ControlSignal:
        """
        :return: The first pulse of a synthesis run
        """

        return self.initial_pulse.signal(self.steps, self.dt)

    def target_pairs(self) -> list[tuple[DensityMatrix, DensityMatrix]]:
        """
        Resolves the ``(initial, target)`` pairs that a run steers

        :return: The configured gate's pairs, or the explicit pairs for custom gates
        """

        if self.gate == GateChoice.Custom:
            return self.state_pairs

        return gate_pairs(Gate.named(self.gate), self.pairs)

    def validate(self):
        """
        Checks requirements spanning several keys
        """

        if self.gate == GateChoice.Custom and not self.state_pairs:
            raise ConfigError("custom gates require explicit state pairs", path="statePairs")

        if self.gate != GateChoice.Custom and self.state_pairs:
            raise ConfigError(f"state pairs are only used by custom gates, not '{self.gate}'", path="statePairs")

    @Loader[dict]
    def load_dict(self, dct: dict):
        """
        Loads a JSON ``dict`` into this configuration, leaving unmentioned keys untouched

        :param dct: The dict to load
        """

        if (key := _unknown(dct, self.fields)) is not None:
            raise ConfigError("unrecognized key", path=key)

        for key, value in dct.items():
            try:
                setattr(self, self.fields[key].name, value)

            except (TypeError, ValueError) as e:
                raise _key_error(key, e) from None

    @Loader[str]
    def load_string(self, string: str):
        """
        Loads JSON text into this configuration

        Errors report the line of the offending key.

        :param string: The JSON text to load
        """

        try:
            dct = json.loads(string)

        except json.JSONDecodeError as e:
            raise ConfigError(e.msg, line=e.lineno) from None

        if not isinstance(dct, dict):
            raise ConfigError("run configuration must be a JSON object", line=1)

        try:
            self.load_dict(dct)

        except ConfigError as e:
            raise ConfigError(e.reason, path=e.path, line=locate(string, e.path)) from None

    def dict(self) -> dict:
        """
        :return: Every key of this configuration, defaults included, as JSON
        """

        return {field.key: copy.deepcopy(self.raw.get(field.key, field.default)) for field in self.fields.values()}

    @classmethod
    def open(cls, filename: str, *, defaults: bool = True) -> 'SynthesisConfig':
        """
        Creates a configuration from a JSON file

        :param filename: A filename to open
        :param defaults: Whether to layer the file over the bundled default configuration
        :return: The configuration stored in the file
        """

        config = cls.default() if defaults else cls()

        with open(filename, encoding="UTF-8") as file:
            config.load_string(file.read())

        return config

    @classmethod
    def default(cls) -> 'SynthesisConfig':
        """
        :return: The bundled default configuration
        """

        with open(DEFAULT_CONFIG, encoding="UTF-8") as file:
            return cls(json.load(file))


def locate(text: str, path: str | None) -> int | None:
    """
    Finds the line on which a key path appears in JSON text

    :param text: The JSON text
    :param path: A dotted key path such as ``constraints.uMin``
    :return: The line number, or ``None`` if the path cannot be found
    """

    if not path:
        return None

    position, found = 0, None
    for part in path.split("."):
        if part.isdigit():
            continue

        if (match := re.compile(rf'"{re.escape(part)}"\s*:').search(text, position)) is None:
            break

        position = found = match.start()

    return None if found is None else text.count("\n", 0, found) + 1


__all__ = ["SynthesisConfig", "InitialPulse", "DEFAULT_CONFIG", "locate",
           "Interval", "Constraints", "InitialPulseConverter", "StatePairs"]
