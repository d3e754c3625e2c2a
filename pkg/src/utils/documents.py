"""Reading and writing JSON documents validated by pydantic models."""
import json
import logging
from pathlib import Path
from typing import Any, Type, TypeVar, Union

from pydantic import BaseModel, TypeAdapter, ValidationError

from src.errors import SchemaError

logger = logging.getLogger(__name__)

T = TypeVar("T")


def read_json(path: Union[str, Path]) -> Any:
    """Read raw JSON, reporting the line of a syntax error.

    Args:
        path: File to read

    Returns:
        Decoded JSON value
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise SchemaError(f"cannot read {path}: {e}") from e
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise SchemaError(f"{path}: invalid JSON: {e.msg}", line=e.lineno) from e


def validate_document(data: Any, model: Type[T], source: str = "document") -> T:
    """Validate decoded JSON against a pydantic model or type.

    Pydantic errors are turned into a SchemaError naming the first
    offending field.
    """
    try:
        if isinstance(model, type) and issubclass(model, BaseModel):
            return model.model_validate(data)
        return TypeAdapter(model).validate_python(data)
    except ValidationError as e:
        first = e.errors()[0]
        field = ".".join(str(part) for part in first["loc"])
        raise SchemaError(f"{source}: {first['msg']}", field=field or None) from e


def write_json(path: Union[str, Path], data: Any) -> Path:
    """Write JSON with stable key order and indentation."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(data, indent=2, sort_keys=False) + "\n", encoding="utf-8")
    logger.debug(f"Wrote {path}")
    return path
