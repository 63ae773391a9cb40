import json
from pathlib import Path
from typing import Any, Dict, Type, TypeVar, Union

from pydantic import BaseModel, ValidationError

from ..errors import DataIOError

MANIFEST_NAME = "manifest.json"

ModelT = TypeVar("ModelT", bound=BaseModel)


def dumps(data: Any) -> str:
    """Canonical JSON text: sorted keys, two-space indent, trailing newline"""
    if isinstance(data, BaseModel):
        data = data.model_dump(mode="json")
    return json.dumps(data, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def write_json(path: Union[str, Path], data: Any) -> Path:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(dumps(data), encoding="utf-8")
    except OSError as e:
        raise DataIOError(f"Cannot write JSON: {e}", path=str(path)) from e
    return path


def read_json(path: Union[str, Path]) -> Dict[str, Any]:
    path = Path(path)
    try:
        return json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError as e:
        raise DataIOError("File not found", path=str(path)) from e
    except (OSError, json.JSONDecodeError) as e:
        raise DataIOError(f"Cannot read JSON: {e}", path=str(path)) from e


def read_model(path: Union[str, Path], model: Type[ModelT]) -> ModelT:
    """Read and validate a JSON document against a pydantic model"""
    try:
        return model.model_validate(read_json(path))
    except ValidationError as e:
        raise DataIOError(f"Malformed {model.__name__}: {e.error_count()} errors", path=str(path)) from e


def write_manifest(directory: Union[str, Path], manifest: BaseModel) -> Path:
    return write_json(Path(directory) / MANIFEST_NAME, manifest)


def read_manifest(directory: Union[str, Path], model: Type[ModelT]) -> ModelT:
    directory = Path(directory)
    if not directory.is_dir():
        raise DataIOError("Directory not found", path=str(directory))
    return read_model(directory / MANIFEST_NAME, model)
