"""JSON encoding of models and run configuration.

Model document::

    {
      "dim": 2,
      "omega": 1.0,
      "h_fourier": [
        {"l": 0, "real_part": [[...]], "imag_part": [[...]]},
        ...
      ],
      "jumps": [
        {"matrix": [[[re, im], [re, im]], [[re, im], [re, im]]], "rate": 0.5},
        ...
      ],
      "propagator": {"slices_per_period": 512, "scheme": "midpoint", "t0": 0.0},   # optional
      "sambe": {"cutoff": 6, "mode": "full"}                                      # optional
    }

Any matrix may be written either as ``{"real_part": ..., "imag_part": ...}``,
as a nested list of ``[re, im]`` pairs, or as a nested list of real numbers.
A jump may add ``"harmonics": [{"l": 1, "matrix": ...}]`` for time-periodic
jump operators.
"""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .errors import EngineError
from .model import Jump, LindbladModel


class ParseError(EngineError, ValueError):
    """A document could not be decoded into engine objects."""


def decode_matrix(obj) -> np.ndarray:
    try:
        if isinstance(obj, dict):
            re = np.asarray(obj["real_part"], dtype=float)
            im = np.asarray(obj.get("imag_part", np.zeros_like(re)), dtype=float)
            if re.shape != im.shape:
                raise ParseError("real_part and imag_part shapes differ")
            return re + 1j * im
        arr = np.asarray(obj, dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"cannot decode matrix: {exc}") from exc
    if arr.ndim == 3 and arr.shape[-1] == 2:
        return arr[..., 0] + 1j * arr[..., 1]
    if arr.ndim == 2:
        return arr.astype(complex)
    raise ParseError(f"matrix must be 2-D (optionally with [re, im] pairs), got shape {arr.shape}")


def encode_matrix(m) -> list:
    m = np.asarray(m, dtype=complex)
    return [[[float(z.real), float(z.imag)] for z in row] for row in m]


def encode_split(m) -> dict:
    m = np.asarray(m, dtype=complex)
    return {"real_part": m.real.tolist(), "imag_part": m.imag.tolist()}


def decode_complex(obj) -> complex:
    if isinstance(obj, (list, tuple)) and len(obj) == 2:
        return complex(float(obj[0]), float(obj[1]))
    if isinstance(obj, dict):
        return complex(float(obj.get("re", 0.0)), float(obj.get("im", 0.0)))
    return complex(float(obj))


def model_from_dict(doc: dict) -> LindbladModel:
    try:
        dim = int(doc["dim"])
        omega = float(doc["omega"])
        h = {}
        for entry in doc.get("h_fourier", []):
            l = int(entry["l"])
            if l in h:
                raise ParseError(f"duplicate harmonic l={l}")
            h[l] = decode_matrix(entry["matrix"] if "matrix" in entry else entry)
        if not h:
            h[0] = np.zeros((dim, dim), dtype=complex)
        jumps = []
        for entry in doc.get("jumps", []):
            harmonics = {int(x["l"]): decode_matrix(x["matrix"]) for x in entry.get("harmonics", [])}
            jumps.append(Jump(decode_matrix(entry["matrix"]), float(entry["rate"]), harmonics))
    except ParseError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"malformed model document: {exc!r}") from exc
    return LindbladModel(dim=dim, omega=omega, h_fourier=h, jumps=tuple(jumps))


def model_to_dict(model: LindbladModel) -> dict:
    doc = {
        "dim": model.dim,
        "omega": model.omega,
        "h_fourier": [{"l": l, **encode_split(m)} for l, m in model.h_fourier.items()],
        "jumps": [],
    }
    for j in model.jumps:
        entry = {"matrix": encode_matrix(j.operator), "rate": j.rate}
        if j.harmonics:
            entry["harmonics"] = [{"l": l, "matrix": encode_matrix(m)} for l, m in j.harmonics.items()]
        doc["jumps"].append(entry)
    return doc


def read_json(path) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON ({exc})") from exc
    if not isinstance(doc, dict):
        raise ParseError(f"{path}: top-level JSON value must be an object")
    return doc


def load_model(path) -> LindbladModel:
    return model_from_dict(read_json(path))


def save_model(model: LindbladModel, path) -> None:
    Path(path).write_text(json.dumps(model_to_dict(model), indent=2))
