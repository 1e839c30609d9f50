"""
Data interfaces for run configurations

This module implements two primary means of data interface:

    -   The `Converter` system, which uses the descriptor protocol to treat configuration keys as their canonical types.

        Each key of a configuration, while stored as raw JSON, can be interpreted as some other useful type.
        Each `Converter` class implements a conversion to such a type, such as ``[lo, hi]`` <-> `UncertainInterval`.
        A key is declared as a `Field` and assigned a converter and default.
        The system allows a user to access configuration keys as regular attributes without cumbersome getters or setters.

    -   The `Loader` system, which implements convenient object initialization using existing mutation methods.

        A `Dock` instance can declare `Loader` methods which accept some sets of input types, such as ``load_string``.
        Each loader is called by a generic ``load`` method should the input type be permissible for that loader.
"""


import copy
import inspect

from collections.abc import Callable
from numbers import Real as _Number
from typing import Any, TypeVar


_T = TypeVar('_T')


class Converter:
    """
    Abstract base class for configuration converters
    """

    _T = _T

    @classmethod
    def get(cls, data: Any, *, instance=None) -> _T:
        """
        Converts raw JSON -> `_T`

        :param data: The raw JSON value to convert
        :param instance: The instance which contains the field
        :return: An instance of `_T`
        """

        raise NotImplementedError

    @classmethod
    def set(cls, value: _T, *, instance=None) -> Any:
        """
        Converts `_T` -> raw JSON

        :param value: The value to convert
        :param instance: The instance which contains the field
        :return: A JSON-serializable value
        """

        raise NotImplementedError


class Raw(Converter):
    """
    No-op converter for fields best left as raw JSON
    """

    _T = Any

    @classmethod
    def get(cls, data: Any, **kwargs) -> _T:
        return copy.deepcopy(data)

    @classmethod
    def set(cls, value: _T, **kwargs) -> Any:
        return copy.deepcopy(value)


class Real(Converter):
    """
    Converter for fields best interpreted as finite real numbers
    """

    _T = float

    @classmethod
    def get(cls, data: Any, **kwargs) -> _T:
        return float(data)

    @classmethod
    def set(cls, value: _T, **kwargs) -> float:
        """
        Converts ``float`` -> ``float``, rejecting booleans and non-finite values

        :param value: The value to convert
        :return: ``value`` as a ``float``
        """

        if isinstance(value, bool) or not isinstance(value, _Number):
            raise TypeError(f"expected a number, got {value!r}")

        if not abs(value) < float("inf"):
            raise ValueError(f"expected a finite number, got {value!r}")

        return float(value)


class NullableReal(Real):
    """
    Converter for fields holding a finite real number or ``null``
    """

    _T = float | None

    @classmethod
    def get(cls, data: Any, **kwargs) -> _T:
        return None if data is None else float(data)

    @classmethod
    def set(cls, value: _T, **kwargs) -> float | None:
        return None if value is None else super().set(value)


class Integer(Converter):
    """
    Converter for fields best interpreted as integers
    """

    _T = int

    @classmethod
    def get(cls, data: Any, **kwargs) -> _T:
        return int(data)

    @classmethod
    def set(cls, value: _T, **kwargs) -> int:
        """
        Converts ``int`` -> ``int``, accepting integral floats such as ``100.0``

        :param value: The value to convert
        :return: ``value`` as an ``int``
        """

        if isinstance(value, bool) or not isinstance(value, _Number) or not float(value).is_integer():
            raise TypeError(f"expected an integer, got {value!r}")

        return int(value)


class Field:
    """
    Configuration field class which handles conversion between raw JSON and appropriate data types

    A field is given by its JSON key, type converter, and default.
    Its primary function is to permit the user to read and write keys as their natural data types.

    Raw values are stored in the ``raw`` dict of the instance under the field's key.
    Unset fields read as their (converted) default.

    Fields can be declared by decorating methods:

    .. python::

        @Field("key", Converter, default)
        def field(self) -> _T:
            ...

    An optional second parameter can be passed, wherein the method validates and returns the value before `Converter.set`.
    """

    def __init__(self, key: str, converter: type[Converter] = None, default: Any = None):
        """
        Define a new field given a key, a type converter and a raw default

        :param key: The JSON key of the field
        :param converter: The type converter for the field (defaults to `Raw`)
        :param default: The raw JSON value of an unset field
        """

        self._key = key
        self._converter = converter or Raw
        self._get, self._set = self._converter.get, self._converter.set
        self._default = default

    def __copy__(self) -> 'Field':
        cls = self.__class__
        new = cls.__new__(cls)
        new.__dict__.update(self.__dict__)
        return new

    def __set_name__(self, owner, name: str):
        self._name = name
        owner.fields = owner.fields | {self._key: self}

    def __get__(self, instance, owner: type = None) -> _T:
        if instance is None:
            return self

        return self._get(instance.raw.get(self._key, self._default), instance=instance)

    def __set__(self, instance, value: _T):
        instance.raw[self._key] = self._set(value, instance=instance)

    def __call__(self, func: Callable) -> 'Field':
        new = copy.copy(self)
        new.__doc__ = func.__doc__

        signature = inspect.signature(func)
        match len(signature.parameters):
            case 1: pass
            case 2: new._set = lambda value, _set=self._set, *, instance=None:\
                _set(func(instance, value), instance=instance)
            case _: raise TypeError("Field function definitions can only take 1 or 2 parameters.")

        return new

    @property
    def key(self) -> str:
        """
        :return: The JSON key that this field stores to
        """

        return self._key

    @property
    def name(self) -> str:
        return self._name

    @property
    def default(self) -> Any:
        return copy.deepcopy(self._default)


class Dock:
    """
    Base class to inherit to implement the loader system
    """

    loaders = {}
    fields = {}

    def load(self, data):
        """
        Loads data into an instance by delegating to `Loader` methods based on the input's type

        :param data: Any type which the instance might accept
        """

        for loader_types, loader in self.loaders.items():
            if any(isinstance(data, loader_type) for loader_type in loader_types):
                try:
                    loader(self, data)
                    return

                except NotImplementedError:
                    continue

        raise TypeError(f"could not find valid loader for type {type(data)}")


class Loader:
    """
    Function decorator to identify methods as data loaders for `Dock` instances

    Specify the loader's accepted type(s) using brackets:

    .. python::

        @Loader[dict]
        def load_dict(self, data: dict):
            ...
    """

    types = ()

    def __init__(self, func):
        self._func = func

    def __class_getitem__(cls, item: tuple[type, ...] | type) -> type:
        try:
            return type("Loader", (Loader,), {"types": tuple(item)})

        except TypeError:
            return type("Loader", (Loader,), {"types": (item,)})

    def __set_name__(self, owner, name: str):
        owner.loaders = owner.loaders | {self.types: self._func}
        setattr(owner, name, self._func)


__all__ = ["Field", "Dock", "Loader",
           "Converter", "Raw", "Real", "NullableReal", "Integer"]
