"""JSON file formats for states, distributions and channel tables.

State files: ``{"registers": [{"label": "A", "dim": 2}, ...],
"matrix": [[re, im], ...]}`` with the matrix flattened row-major.
Classical distributions use ``"probs"`` (flat row-major) instead of
``"matrix"``.  Serialisation is deterministic: keys are sorted and floats
use ``repr`` round-tripping.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from oneshot.linalg import ClassicalJoint, DensityOperator, RegisterSpace


def space_to_obj(space: RegisterSpace) -> list[dict]:
    return [{"label": label, "dim": dim} for label, dim in space.registers]


def space_from_obj(obj) -> RegisterSpace:
    return RegisterSpace([(r["label"], int(r["dim"])) for r in obj])


def state_to_obj(rho: DensityOperator) -> dict:
    flat = rho.matrix.reshape(-1)
    return {
        "registers": space_to_obj(rho.space),
        "matrix": [[float(z.real), float(z.imag)] for z in flat],
    }


def state_from_obj(obj) -> DensityOperator:
    space = space_from_obj(obj["registers"])
    d = space.total_dim
    entries = np.array(obj["matrix"], dtype=float)
    if entries.shape != (d * d, 2):
        raise ValueError(f"matrix entry list has shape {entries.shape}, expected ({d * d}, 2)")
    matrix = (entries[:, 0] + 1j * entries[:, 1]).reshape(d, d)
    return DensityOperator(space, matrix)


def classical_to_obj(p: ClassicalJoint) -> dict:
    return {
        "registers": space_to_obj(p.space),
        "probs": [float(x) for x in p.flat()],
    }


def classical_from_obj(obj) -> ClassicalJoint:
    space = space_from_obj(obj["registers"])
    return ClassicalJoint(space, np.array(obj["probs"], dtype=float).reshape(space.dims))


def dump_json(obj, path: str | Path) -> None:
    Path(path).write_text(json.dumps(obj, sort_keys=True, indent=2) + "\n")


def load_json(path: str | Path):
    return json.loads(Path(path).read_text())


def save_state(rho: DensityOperator, path: str | Path) -> None:
    dump_json(state_to_obj(rho), path)


def load_state(path: str | Path) -> DensityOperator:
    return state_from_obj(load_json(path))


def save_classical(p: ClassicalJoint, path: str | Path) -> None:
    dump_json(classical_to_obj(p), path)


def load_classical(path: str | Path) -> ClassicalJoint:
    return classical_from_obj(load_json(path))


def load_state_or_classical(path: str | Path) -> DensityOperator:
    """Load either file flavour as a density operator (diagonal embedding)."""
    obj = load_json(path)
    if "matrix" in obj:
        return state_from_obj(obj)
    return classical_from_obj(obj).to_density()
