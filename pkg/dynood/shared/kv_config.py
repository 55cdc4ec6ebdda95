"""Flat ``key = value`` text files shared by train configs and generator specs."""
from pathlib import Path
from typing import Any, Dict, Iterable, Tuple, Type, TypeVar

from pydantic import BaseModel, ValidationError

from .exceptions import ConfigurationError, ParseError

ModelT = TypeVar("ModelT", bound=BaseModel)


def parse_kv_text(text: str) -> Dict[str, str]:
    """Parse flat key-value text into an ordered dict of raw strings."""
    values: Dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParseError(f"expected 'key = value', got {raw.strip()!r}", line=lineno)
        key, value = (part.strip() for part in line.split("=", 1))
        if not key:
            raise ParseError("empty key", line=lineno)
        if key in values:
            raise ParseError(f"duplicate key {key!r}", line=lineno)
        values[key] = value
    return values


def read_kv_file(path: str | Path) -> Dict[str, str]:
    path = Path(path)
    if not path.is_file():
        raise ConfigurationError(f"Config file not found: {path}")
    return parse_kv_text(path.read_text(encoding="utf-8"))


def parse_range(value: str) -> Tuple[int, int]:
    """``"3-5"`` -> ``(3, 5)``; a single integer is a one-element range."""
    parts = value.split("-")
    try:
        if len(parts) == 1:
            start = end = int(parts[0])
        elif len(parts) == 2:
            start, end = int(parts[0]), int(parts[1])
        else:
            raise ValueError(value)
    except ValueError:
        raise ConfigurationError(f"Invalid timestamp range {value!r}, expected 'a-b'")
    return start, end


def format_value(value: Any) -> str:
    if isinstance(value, tuple) and len(value) == 2:
        return f"{value[0]}-{value[1]}"
    if isinstance(value, (list, tuple)):
        return ",".join(format_value(v) for v in value)
    if isinstance(value, bool):
        return "true" if value else "false"
    if hasattr(value, "value"):
        return str(value.value)
    return str(value)


def dump_kv_text(values: Dict[str, Any]) -> str:
    return "".join(f"{key} = {format_value(value)}\n" for key, value in values.items())


def build_model(model_cls: Type[ModelT], raw: Dict[str, Any]) -> ModelT:
    """Validate raw key-value strings into a pydantic model, naming bad keys."""
    known = set(model_cls.model_fields)
    unknown = sorted(set(raw) - known)
    if unknown:
        raise ConfigurationError(f"Unknown config key(s): {', '.join(unknown)}")
    try:
        return model_cls.model_validate(raw)
    except ValidationError as exc:
        problems = []
        for error in exc.errors():
            key = ".".join(str(part) for part in error["loc"]) or "<config>"
            if error["type"] == "missing":
                problems.append(f"missing required key {key!r}")
            else:
                problems.append(f"{key}: {error['msg']}")
        raise ConfigurationError("; ".join(problems))


def apply_overrides(raw: Dict[str, str], overrides: Iterable[Tuple[str, str]]) -> Dict[str, str]:
    merged = dict(raw)
    for key, value in overrides:
        merged[key] = value
    return merged
