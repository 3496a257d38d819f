"""
Model files and vector files.

A model file is a JSON document:

    {
      "name": "zoonosis",
      "labels": ["W", "D", "H"],
      "weights": [1, 1, 1],
      "kernel": [[2, 0, 0], [1, 2, 0], [0, 1, 2]],
      "gamma": [1, 1, 1],
      "incidence": {"family": "mass_action", "params": {}},
      "kappa": [0, 0, 0], "a": 0.5, "b": 1.0, "r_weight": 1.0
    }

weights and labels are optional; kappa, a, b and r_weight only matter for
reservoir models. Syntax and schema errors are reported with line numbers.
"""
import json
import logging
import re
from pathlib import Path
from typing import Any, Optional, Union

import jsonschema
import numpy as np

from config.constants import IncidenceFamily
from core.errors import InputError
from core.model import FeatureSpace, SISModel
from incidence.families import from_config
from reservoir.model import ReservoirModel

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

_NUMBER = {"type": "number"}
_VECTOR = {"type": "array", "items": _NUMBER, "minItems": 1}

MODEL_SCHEMA: dict = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["kernel", "gamma", "incidence"],
    "additionalProperties": False,
    "properties": {
        "name": {"type": "string"},
        "description": {"type": "string"},
        "labels": {"type": "array", "items": {"type": "string"}, "minItems": 1},
        "weights": _VECTOR,
        "kernel": {"type": "array", "items": _VECTOR, "minItems": 1},
        "gamma": _VECTOR,
        "incidence": {
            "type": "object",
            "required": ["family"],
            "additionalProperties": False,
            "properties": {
                "family": {"enum": [f.value for f in IncidenceFamily]},
                "params": {
                    "type": "object",
                    "additionalProperties": {"anyOf": [_NUMBER, {"type": "string"}, {"type": "array", "items": _NUMBER}]},
                },
            },
        },
        "kappa": {"type": "array", "items": _NUMBER},
        "a": _NUMBER,
        "b": _NUMBER,
        "r_weight": _NUMBER,
    },
}

_VALIDATOR = jsonschema.Draft202012Validator(MODEL_SCHEMA)


def _line_of(text: str, path: list) -> int:
    """Line of the last object key on an error path, 1 if none is found."""
    keys = [p for p in path if isinstance(p, str)]
    if not keys:
        return 1
    match = re.search(r'"' + re.escape(keys[-1]) + r'"\s*:', text)
    if match is None:
        return 1
    return text.count("\n", 0, match.start()) + 1


def parse_model_document(text: str, source: str = "<string>") -> dict:
    """
    Parse and schema-check a model document.

    Raises:
        InputError: Malformed JSON or schema violation, with line numbers
    """
    try:
        document = json.loads(text)
    except json.JSONDecodeError as e:
        raise InputError(f"{source}:{e.lineno}:{e.colno}: malformed model file: {e.msg}")

    errors = sorted(_VALIDATOR.iter_errors(document), key=lambda e: list(e.absolute_path))
    if errors:
        messages = []
        for error in errors:
            where = "/".join(str(p) for p in error.absolute_path) or "(document)"
            messages.append(f"{source}:{_line_of(text, list(error.absolute_path))}: {where}: {error.message}")
        raise InputError("invalid model file\n  " + "\n  ".join(messages))
    return document


def model_from_document(document: dict, default_name: str = "model") -> SISModel:
    """Build an SISModel from a parsed model document."""
    rows = document["kernel"]
    if len({len(row) for row in rows}) != 1:
        raise InputError("kernel rows must all have the same length")
    kernel = np.asarray(rows, dtype=float)
    if kernel.ndim != 2:
        raise InputError("kernel rows must all have the same length")
    n = kernel.shape[0]
    space = FeatureSpace(
        weights=np.asarray(document.get("weights", np.ones(n)), dtype=float),
        labels=tuple(document.get("labels", ())),
    )
    return SISModel(
        space=space,
        kernel=kernel,
        gamma=np.asarray(document["gamma"], dtype=float),
        incidence=from_config(document["incidence"]),
        name=document.get("name", default_name),
    )


def load_model_text(text: str, source: str = "<string>", default_name: str = "model") -> SISModel:
    return model_from_document(parse_model_document(text, source), default_name)


def _read(path: PathLike) -> str:
    path = Path(path)
    try:
        return path.read_text(encoding="utf-8")
    except OSError as e:
        raise InputError(f"cannot read {path}: {e.strerror}")


def load_model(path: PathLike) -> SISModel:
    """
    Load an SIS model file.

    Raises:
        InputError: Unreadable, malformed or inconsistent file
    """
    path = Path(path)
    model = load_model_text(_read(path), str(path), default_name=path.stem)
    logger.info(f"Loaded model '{model.name}' with {model.n} features from {path}")
    return model


def load_reservoir_model(path: PathLike) -> ReservoirModel:
    """
    Load a model file carrying a kappa vector.

    Raises:
        InputError: Missing kappa or any load_model error
    """
    path = Path(path)
    text = _read(path)
    document = parse_model_document(text, str(path))
    if "kappa" not in document:
        raise InputError(f"{path}:1: reservoir analysis needs a 'kappa' vector in the model file")
    base = model_from_document(document, default_name=path.stem)
    extras: dict[str, Any] = {k: float(document[k]) for k in ("a", "b", "r_weight") if k in document}
    rm = ReservoirModel(base=base, kappa=np.asarray(document["kappa"], dtype=float), **extras)
    logger.info(f"Loaded reservoir model '{rm.name}' (a = {rm.a}, b = {rm.b}) from {path}")
    return rm


def model_to_document(model: SISModel, reservoir: Optional[ReservoirModel] = None) -> dict:
    document: dict[str, Any] = {
        "name": model.name,
        "labels": list(model.labels),
        "weights": model.weights.tolist(),
        "kernel": model.kernel.tolist(),
        "gamma": model.gamma.tolist(),
        "incidence": model.incidence.to_config(),
    }
    if reservoir is not None:
        document.update(kappa=reservoir.kappa.tolist(), a=reservoir.a, b=reservoir.b, r_weight=reservoir.r_weight)
    return document


def save_model(model: SISModel, path: PathLike, reservoir: Optional[ReservoirModel] = None) -> Path:
    """Write a model file; the result loads back to the same model."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(model_to_document(model, reservoir), indent=2) + "\n", encoding="utf-8")
    logger.info(f"Saved model '{model.name}' to {path}")
    return path


def parse_vector(text: str, source: str = "<string>") -> np.ndarray:
    """A JSON array, or numbers separated by whitespace or commas."""
    stripped = text.strip()
    if stripped.startswith("["):
        try:
            values = json.loads(stripped)
        except json.JSONDecodeError as e:
            raise InputError(f"{source}:{e.lineno}:{e.colno}: malformed vector: {e.msg}")
    else:
        values = [token for token in re.split(r"[\s,]+", stripped) if token]
    try:
        vector = np.asarray(values, dtype=float)
    except (TypeError, ValueError) as e:
        raise InputError(f"{source}: vector entries must be numbers: {e}")
    if vector.ndim != 1 or vector.size == 0:
        raise InputError(f"{source}: expected a flat list of numbers")
    return vector


def load_vector(path: PathLike, n: Optional[int] = None) -> np.ndarray:
    """
    Load a vector file, optionally checking its length.

    Raises:
        InputError: Unreadable file, bad entries or wrong length
    """
    vector = parse_vector(_read(path), str(path))
    if n is not None and vector.size != n:
        raise InputError(f"{path}: expected {n} entries, got {vector.size}")
    return vector
