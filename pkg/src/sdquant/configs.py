"""Strict construction of dataclass configs from JSON-like mappings.

Errors are ``ConfigError`` with the offending key attached, so front ends can
report exactly which entry of a config file is wrong.
"""

from __future__ import annotations

import dataclasses
import json
import types
import typing


class ConfigError(ValueError):
    def __init__(self, key: str | None, message: str):
        self.key = key
        self.message = message
        super().__init__(f"{key}: {message}" if key else message)


def _is_number(v) -> bool:
    return isinstance(v, (int, float)) and not isinstance(v, bool)


def _check(key: str, value, tp):
    """Return ``value`` coerced to ``tp`` or raise ConfigError."""
    origin = typing.get_origin(tp)
    if origin in (typing.Union, types.UnionType):
        if value is None and type(None) in typing.get_args(tp):
            return None
        last = None
        for arg in typing.get_args(tp):
            if arg is type(None):
                continue
            try:
                return _check(key, value, arg)
            except ConfigError as exc:
                last = exc
        raise last
    if tp is object or tp is typing.Any:
        return value
    if tp is bool:
        if not isinstance(value, bool):
            raise ConfigError(key, f"expected true/false, got {value!r}")
        return value
    if tp is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(key, f"expected an integer, got {value!r}")
        return value
    if tp is float:
        if not _is_number(value):
            raise ConfigError(key, f"expected a number, got {value!r}")
        return float(value)
    if tp is str:
        if not isinstance(value, str):
            raise ConfigError(key, f"expected a string, got {value!r}")
        return value
    if tp is list or origin is list:
        if not isinstance(value, list):
            raise ConfigError(key, f"expected a list, got {value!r}")
        if not all(_is_number(v) for v in value):
            raise ConfigError(key, "expected a list of numbers")
        return list(value)
    return value


def from_mapping(cls, doc):
    """Build ``cls`` from ``doc``, rejecting unknown keys and wrong types."""
    if not isinstance(doc, dict):
        raise ConfigError(None, f"expected a JSON object, got {type(doc).__name__}")
    hints = typing.get_type_hints(cls)
    names = [f.name for f in dataclasses.fields(cls)]
    unknown = sorted(set(doc) - set(names))
    if unknown:
        raise ConfigError(unknown[0], "unknown key")
    kwargs = {k: _check(k, v, hints[k]) for k, v in doc.items()}
    try:
        return cls(**kwargs)
    except ConfigError:
        raise
    except ValueError as exc:
        key, sep, msg = str(exc).partition(": ")
        if sep and key in names:
            raise ConfigError(key, msg) from exc
        raise ConfigError(None, str(exc)) from exc
    except TypeError as exc:
        raise ConfigError(None, str(exc)) from exc


def to_json(obj) -> str:
    return json.dumps(dataclasses.asdict(obj), sort_keys=True)
