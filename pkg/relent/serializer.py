from abc import abstractmethod
from typing import TYPE_CHECKING, Annotated

import json
import math

import numpy as np
from pydantic import BeforeValidator, TypeAdapter

if TYPE_CHECKING:
    import pydantic

# Significant digits of every float written to a document or report.
CANONICAL_DIGITS = 15


def canonical_float(x: float):
    """Round to 15 significant digits; infinity becomes the string ``"inf"``."""
    x = float(x)
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    if math.isnan(x):
        raise ValueError("NaN has no canonical form")
    value = float(f"{x:.{CANONICAL_DIGITS}g}")
    # -0.0 and 0.0 must print the same
    return value + 0.0


def format_ext(x: float, digits: int = 12) -> str:
    """Print an extended real: ``"inf"``, ``"0"`` for exact zero, else ``digits`` significant digits."""
    x = float(x)
    if math.isinf(x):
        return "inf"
    if x == 0.0:
        return "0"
    return format(x, f"#.{digits}g")


def canonicalize(obj):
    """Recursively round floats and normalise containers for JSON output."""
    if isinstance(obj, dict):
        return {str(k): canonicalize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [canonicalize(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return canonicalize(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return canonical_float(obj)
    return obj


def _parse_ext(value):
    if isinstance(value, str) and value.strip().lower() in {"inf", "+inf", "infinity"}:
        return math.inf
    return value


# A float field that also reads the canonical ``"inf"`` spelling.
ExtFloat = Annotated[float, BeforeValidator(_parse_ext)]


class BaseSerializer:
    @abstractmethod
    def serialize(self, obj) -> bytes:
        raise NotImplementedError("Subclasses should implement this!")

    @abstractmethod
    def unserialize(self, obj: bytes):
        raise NotImplementedError("Subclasses should implement this!")


class CanonicalJsonSerializer(BaseSerializer):
    """Sorted keys, two-space indent, UTF-8 labels kept as written, 15-digit floats."""

    def serialize(self, obj) -> bytes:
        text = json.dumps(canonicalize(obj), indent=2, sort_keys=True, ensure_ascii=False, allow_nan=False)
        return (text + "\n").encode("utf-8")

    def unserialize(self, obj: bytes | str):
        return json.loads(obj)


class PydanticSerializer(BaseSerializer):
    def __init__(self, model: "type[pydantic.BaseModel]"):
        self.model = model
        # one TypeAdapter per model; building it is the expensive part
        self._adapter = TypeAdapter(model)
        self._json = CanonicalJsonSerializer()

    def serialize(self, obj: "pydantic.BaseModel") -> bytes:
        return self._json.serialize(self._adapter.dump_python(obj, mode="python", exclude_none=True))

    def unserialize(self, obj: bytes | str):
        return self._adapter.validate_python(self._json.unserialize(obj))
