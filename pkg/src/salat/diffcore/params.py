"""Named parameter arrays with a flat view and JSON checkpointing."""

from __future__ import annotations

import json

import numpy as np

from .tape import Var

CHECKPOINT_SCHEMA_VERSION = 1


class ParamStore:
    """Ordered mapping of parameter name -> float64 array."""

    def __init__(self, arrays=None):
        self._arrays: dict = {}
        if arrays:
            for name, arr in arrays.items():
                self[name] = arr

    def __setitem__(self, name: str, arr) -> None:
        arr = np.asarray(arr, dtype=float)
        if not np.all(np.isfinite(arr)):
            raise ValueError(f"parameter {name!r} contains non-finite values")
        self._arrays[name] = arr

    def __getitem__(self, name: str) -> np.ndarray:
        return self._arrays[name]

    def __contains__(self, name: str) -> bool:
        return name in self._arrays

    def __iter__(self):
        return iter(self._arrays)

    def __len__(self) -> int:
        return len(self._arrays)

    def items(self):
        return self._arrays.items()

    def copy(self) -> "ParamStore":
        return ParamStore({k: v.copy() for k, v in self._arrays.items()})

    # -- flat view ----------------------------------------------------------

    def to_flat(self) -> np.ndarray:
        if not self._arrays:
            return np.zeros(0)
        return np.concatenate([a.ravel() for a in self._arrays.values()])

    def from_flat(self, flat: np.ndarray) -> None:
        flat = np.asarray(flat, dtype=float)
        offset = 0
        for name, arr in self._arrays.items():
            n = arr.size
            self._arrays[name] = flat[offset : offset + n].reshape(arr.shape).copy()
            offset += n
        if offset != flat.size:
            raise ValueError(f"flat vector has {flat.size} entries, expected {offset}")

    # -- tape interop -------------------------------------------------------

    def as_vars(self) -> dict:
        """Leaf Vars sharing this store's arrays, keyed by name."""
        return {name: Var(arr) for name, arr in self._arrays.items()}

    # -- serialization ------------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "schema": CHECKPOINT_SCHEMA_VERSION,
            "params": {
                name: {"shape": list(arr.shape), "data": arr.ravel().tolist()}
                for name, arr in self._arrays.items()
            },
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ParamStore":
        if data.get("schema") != CHECKPOINT_SCHEMA_VERSION:
            raise ValueError(f"unsupported checkpoint schema: {data.get('schema')!r}")
        store = cls()
        for name, entry in data["params"].items():
            store[name] = np.array(entry["data"]).reshape(entry["shape"])
        return store

    def save(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh)

    @classmethod
    def load(cls, path) -> "ParamStore":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


def collect_grads(param_vars: dict) -> ParamStore:
    """Gather gradients from leaf Vars after a backward pass."""
    grads = ParamStore()
    for name, var in param_vars.items():
        grads[name] = var.grad if var.grad is not None else np.zeros_like(var.data)
    return grads
