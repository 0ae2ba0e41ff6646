"""JSON interchange for decompositions and reports."""
from __future__ import annotations

import json
from pathlib import Path
from typing import Any, Union

import numpy as np

from .decomposition import SCHEMA, Decomposition


def _default(o: Any):
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, (set, frozenset)):
        return sorted(o)
    if hasattr(o, "to_dict"):
        return o.to_dict()
    raise TypeError(f"cannot serialise {type(o).__name__}")


def dumps(obj: Any) -> str:
    """Stable JSON text: sorted keys, fixed indentation, trailing newline."""
    if hasattr(obj, "to_dict"):
        obj = obj.to_dict()
    return json.dumps(obj, default=_default, indent=2, sort_keys=True) + "\n"


def write_json(path: Union[str, Path], obj: Any, kind: str = None) -> None:
    if hasattr(obj, "to_dict"):
        obj = obj.to_dict()
    if isinstance(obj, dict):
        obj = {"schema": SCHEMA, **({"kind": kind} if kind else {}), **obj}
    Path(path).write_text(dumps(obj))


def read_json(path: Union[str, Path]) -> dict:
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as e:
        raise ValueError(f"{path}: invalid JSON ({e})") from None
    if not isinstance(data, dict) or data.get("schema") != SCHEMA:
        raise ValueError(f"{path}: missing or unsupported schema")
    return data


def save_decomposition(path: Union[str, Path], d: Decomposition) -> None:
    Path(path).write_text(dumps(d.to_dict()))


def load_decomposition(path: Union[str, Path]) -> Decomposition:
    data = read_json(path)
    if "pieces" not in data:
        raise ValueError(f"{path}: not a decomposition")
    return Decomposition.from_dict(data)
