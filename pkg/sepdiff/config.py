import dataclasses
import typing
from typing import Any, Dict, Optional, Type, TypeVar

import yaml

from .errors import ConfigError

T = TypeVar("T")


def read_config_file(path: str) -> Dict[str, Any]:
    """Reads a flat key-value YAML document into a dict."""
    try:
        with open(path, "r", encoding="utf-8") as f:
            content = f.read()
    except FileNotFoundError:
        raise ConfigError(f"Config file not found: {path}")
    except OSError as e:
        raise ConfigError(f"Could not read config file {path}: {e}")

    try:
        meta = yaml.safe_load(content)
    except yaml.YAMLError as e:
        raise ConfigError(f"YAML parsing error in {path}: {e}")

    if meta is None:
        return {}
    if not isinstance(meta, dict):
        raise ConfigError(f"Config in {path} is not a key-value mapping")
    return meta


def _coerce(name: str, annotation: Any, value: Any) -> Any:
    origin = typing.get_origin(annotation)
    args = typing.get_args(annotation)

    if origin is typing.Union:
        if value is None and type(None) in args:
            return None
        inner = [a for a in args if a is not type(None)]
        return _coerce(name, inner[0], value)

    if origin in (tuple, list):
        if not isinstance(value, (list, tuple)):
            raise ConfigError(f"Config key '{name}' expects a list, got {value!r}")
        item_type = args[0] if args else Any
        items = [_coerce(name, item_type, v) for v in value]
        return tuple(items) if origin is tuple else items

    if annotation is bool:
        if not isinstance(value, bool):
            raise ConfigError(f"Config key '{name}' expects true/false, got {value!r}")
        return value
    if annotation is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"Config key '{name}' expects an integer, got {value!r}")
        return value
    if annotation is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"Config key '{name}' expects a number, got {value!r}")
        return float(value)
    if annotation is str:
        return str(value)
    return value


def from_mapping(cls: Type[T], values: Dict[str, Any], base: Optional[T] = None) -> T:
    """Builds dataclass `cls` from a mapping whose keys are exactly its field names."""
    fields = {f.name: f for f in dataclasses.fields(cls)}
    unknown = sorted(set(values) - set(fields))
    if unknown:
        raise ConfigError(f"Unknown {cls.__name__} key(s): {', '.join(unknown)}")

    hints = typing.get_type_hints(cls)
    coerced = {name: _coerce(name, hints[name], value) for name, value in values.items()}
    try:
        if base is not None:
            return dataclasses.replace(base, **coerced)
        return cls(**coerced)
    except (TypeError, ValueError) as e:
        raise ConfigError(f"Invalid {cls.__name__}: {e}")


def load_config(cls: Type[T], path: Optional[str] = None, base: Optional[T] = None, **overrides: Any) -> T:
    """Defaults (or `base`) <- config file <- explicit overrides that are not None."""
    values: Dict[str, Any] = {}
    if path:
        values.update(read_config_file(path))
    values.update({k: v for k, v in overrides.items() if v is not None})
    return from_mapping(cls, values, base=base)


def to_mapping(config: Any) -> Dict[str, Any]:
    result = {}
    for f in dataclasses.fields(config):
        value = getattr(config, f.name)
        if isinstance(value, tuple):
            value = list(value)
        elif hasattr(value, "value") and not isinstance(value, (int, float, str)):
            value = value.value
        result[f.name] = value
    return result


def dump_config(config: Any) -> str:
    return yaml.safe_dump(to_mapping(config), sort_keys=False, default_flow_style=None).rstrip()
