"""Node dynamics and coupling matrices for the oscillator networks.

Two three-dimensional chaotic models are supported: a bursting neuron
(``hindmarsh_rose``) and a chaotic rotor (``roessler``).  Default parameters
put both in their standard chaotic regimes; individual constants can be
overridden through the factory functions.

Coupling is linear: a fixed 3x3 matrix applied to pairwise state
differences.  The neuron scenario couples through the first (membrane
potential) component only; the rotor scenario couples all three components.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels

__all__ = [
    "ModelSpec",
    "hindmarsh_rose",
    "roessler",
    "model_by_name",
    "vector_field",
    "jacobian",
    "identity_coupling",
    "first_component_coupling",
    "coupling_by_name",
    "MODEL_NAMES",
]

HR_DEFAULTS = (("a1", 3.01), ("a2", 0.006), ("s", 4.0), ("I", 3.2), ("x_R", -1.6))
ROSSLER_DEFAULTS = (("a1", 0.2), ("a2", 0.2), ("a3", 9.0))

MODEL_NAMES = ("hindmarsh_rose", "roessler")

_KERNEL_IDS = {"hindmarsh_rose": _kernels.HR, "roessler": _kernels.ROSSLER}


@dataclass(frozen=True)
class ModelSpec:
    """A named node model with its parameter set (state dimension 3)."""

    name: str
    params: tuple[tuple[str, float], ...]
    dimension: int = 3

    def __post_init__(self):
        if self.name not in MODEL_NAMES:
            raise ValueError(f"unknown model {self.name!r}; choose from {MODEL_NAMES}")
        if self.dimension != 3:
            raise ValueError("only three-dimensional node models are supported")

    def param(self, key: str) -> float:
        for k, v in self.params:
            if k == key:
                return v
        raise KeyError(key)

    @property
    def param_dict(self) -> dict[str, float]:
        return dict(self.params)

    @property
    def kernel_id(self) -> int:
        return _KERNEL_IDS[self.name]

    @property
    def kernel_params(self) -> np.ndarray:
        """Parameters packed in the order the jit kernels expect."""
        vals = [v for _, v in self.params]
        vals += [0.0] * (5 - len(vals))
        return np.asarray(vals, dtype=float)


def _build(name: str, defaults, overrides) -> ModelSpec:
    table = dict(defaults)
    for key, val in overrides.items():
        if key not in table:
            raise ValueError(f"{name} has no parameter {key!r}")
        table[key] = float(val)
    return ModelSpec(name, tuple((k, table[k]) for k, _ in defaults))


def hindmarsh_rose(**overrides) -> ModelSpec:
    """Bursting-neuron model; chaotic bursting at the default constants."""
    return _build("hindmarsh_rose", HR_DEFAULTS, overrides)


def roessler(**overrides) -> ModelSpec:
    """Chaotic rotor; the default constants give the usual banded attractor."""
    return _build("roessler", ROSSLER_DEFAULTS, overrides)


def model_by_name(name: str, **overrides) -> ModelSpec:
    if name == "hindmarsh_rose":
        return hindmarsh_rose(**overrides)
    if name == "roessler":
        return roessler(**overrides)
    raise ValueError(f"unknown model {name!r}; choose from {MODEL_NAMES}")


def vector_field(model: ModelSpec, x) -> np.ndarray:
    """Right-hand side f(x) of the node model (plain numpy reference)."""
    x = np.asarray(x, dtype=float)
    if x.shape != (3,):
        raise ValueError("state must be a 3-vector")
    p = model.param_dict
    if model.name == "hindmarsh_rose":
        return np.array([
            x[1] + p["a1"] * x[0] ** 2 - x[0] ** 3 - x[2] + p["I"],
            1.0 - 5.0 * x[0] ** 2 - x[1],
            p["a2"] * (p["s"] * (x[0] - p["x_R"]) - x[2]),
        ])
    return np.array([
        -x[1] - x[2],
        x[0] + p["a1"] * x[1],
        p["a2"] + x[2] * (x[0] - p["a3"]),
    ])


def jacobian(model: ModelSpec, x) -> np.ndarray:
    """Jacobian Df(x) of the node model."""
    x = np.asarray(x, dtype=float)
    p = model.param_dict
    if model.name == "hindmarsh_rose":
        return np.array([
            [2.0 * p["a1"] * x[0] - 3.0 * x[0] ** 2, 1.0, -1.0],
            [-10.0 * x[0], -1.0, 0.0],
            [p["a2"] * p["s"], 0.0, -p["a2"]],
        ])
    return np.array([
        [0.0, -1.0, -1.0],
        [1.0, p["a1"], 0.0],
        [x[2], 0.0, x[0] - p["a3"]],
    ])


def identity_coupling() -> np.ndarray:
    """Couple all three state components alike."""
    return np.eye(3)


def first_component_coupling() -> np.ndarray:
    """Couple only through the first state component."""
    return np.diag([1.0, 0.0, 0.0])


def coupling_by_name(spec) -> np.ndarray:
    """Resolve a coupling given as a keyword or an explicit 3x3 matrix.

    Keywords: ``"identity"`` / ``"all"`` and ``"x"`` / ``"first"``.
    """
    if isinstance(spec, str):
        if spec in ("identity", "all"):
            return identity_coupling()
        if spec in ("x", "first"):
            return first_component_coupling()
        raise ValueError(f"unknown coupling {spec!r}")
    mat = np.asarray(spec, dtype=float)
    if mat.shape != (3, 3) or not np.all(np.isfinite(mat)):
        raise ValueError("coupling must be a finite 3x3 matrix")
    return mat
