"""Weights, dual weights, and A_p / A_{p,q} constants over explicit cube sets."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .constants import conjugate
from .dyadic import DyadicCube, DyadicGrid
from .errors import DyadicInputError, NonIntegrableError
from .stepfun import MeasureView, MeshSpec, StepFunction, pointwise_map


class Weight:
    """A positive locally integrable density; subclasses supply exact cube masses."""

    def cube_mass(self, q: DyadicCube) -> float:
        raise NotImplementedError

    def cell_masses(self, mesh: MeshSpec) -> np.ndarray:
        raise NotImplementedError

    def power(self, exponent: float) -> "Weight":
        raise NotImplementedError

    def on(self, mesh: MeshSpec) -> MeasureView:
        return MeasureView(self, mesh)

    def scaled(self, c: float) -> "Weight":
        raise NotImplementedError


@dataclass(frozen=True, eq=False)
class StepWeight(Weight):
    density: StepFunction

    def __post_init__(self):
        if np.any(self.density.values <= 0):
            raise DyadicInputError("step weights must be strictly positive on every cell")

    @property
    def mesh(self) -> MeshSpec:
        return self.density.mesh

    def cube_mass(self, q: DyadicCube) -> float:
        return float(self.density.values[self.mesh.slices(q)].sum() * self.mesh.cell_volume)

    def cell_masses(self, mesh: MeshSpec) -> np.ndarray:
        if mesh != self.mesh:
            raise DyadicInputError("weight lives on a different mesh")
        return self.density.values * mesh.cell_volume

    def power(self, exponent: float) -> "StepWeight":
        return StepWeight(pointwise_map(self.density, exponent))

    def scaled(self, c: float) -> "StepWeight":
        return StepWeight(self.density * c)

    def describe(self) -> str:
        return "step"

    def to_dict(self) -> dict:
        return self.density.to_dict()


@dataclass(frozen=True, eq=False)
class PowerWeight(Weight):
    """``c * x**a`` on ``[0, 2**root_level)``; one-dimensional only."""

    a: float
    root_level: int = 0
    scale: float = 1.0

    def __post_init__(self):
        if self.a <= -1:
            raise NonIntegrableError(f"x**{self.a} is not locally integrable at 0")
        if self.scale <= 0:
            raise DyadicInputError("scale must be positive")

    def interval_mass(self, x0: float, x1: float) -> float:
        """``∫_{x0}^{x1} c x**a dx`` in closed form, accurate for thin intervals."""
        b = self.a + 1.0
        if x0 < 0 or x1 > 2.0**self.root_level * (1 + 1e-15):
            raise DyadicInputError(f"[{x0}, {x1}) leaves the support [0, 2^{self.root_level})")
        if x0 == 0:
            return self.scale * x1**b / b
        return self.scale * x0**b * math.expm1(b * math.log1p((x1 - x0) / x0)) / b

    def cube_mass(self, q: DyadicCube) -> float:
        if q.dim != 1:
            raise DyadicInputError("power weights are one-dimensional")
        (lo, hi), = q.bounds()
        return self.interval_mass(float(lo), float(hi))

    def cell_masses(self, mesh: MeshSpec) -> np.ndarray:
        if mesh.dim != 1 or mesh.root_level > self.root_level:
            raise DyadicInputError("mesh does not fit inside the power weight's support")
        h = 2.0**mesh.resolution_level
        x0 = np.arange(mesh.ncells) * h
        b = self.a + 1.0
        out = np.empty(mesh.ncells)
        out[0] = h**b / b
        x = x0[1:]
        out[1:] = x**b * np.expm1(b * np.log1p(h / x)) / b
        return self.scale * out

    def power(self, exponent: float) -> "PowerWeight":
        return PowerWeight(self.a * exponent, self.root_level, self.scale**exponent)

    def scaled(self, c: float) -> "PowerWeight":
        return PowerWeight(self.a, self.root_level, self.scale * c)

    def describe(self) -> str:
        return f"power(a={self.a:g})"

    def to_dict(self) -> dict:
        return {"kind": "power", "a": self.a, "root_level": self.root_level}


def weight_from_dict(d: dict) -> Weight:
    if d.get("kind") == "power":
        return PowerWeight(float(d["a"]), int(d.get("root_level", 0)))
    return StepWeight(StepFunction.from_dict(d))


def load_weight(path) -> Weight:
    return weight_from_dict(json.loads(Path(path).read_text()))


def dual_weight(w: Weight, p: float) -> Weight:
    """``sigma = w**(1 - p')``."""
    e = 1.0 - conjugate(p)
    try:
        return w.power(e)
    except NonIntegrableError as exc:
        raise NonIntegrableError(f"dual weight w^(1-p') with p={p} is not integrable: {exc}") from None


@dataclass(frozen=True)
class WeightConstantReport:
    value: float
    argmax_cube: DyadicCube
    cube_set: str
    n_cubes: int

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "cube_set": self.cube_set,
            "n_cubes": self.n_cubes,
            "argmax": {"level": self.argmax_cube.level, "index": list(self.argmax_cube.index)},
        }


def _pick(values: Sequence[float], cubes: Sequence[DyadicCube], cube_set: str) -> WeightConstantReport:
    if not cubes:
        raise DyadicInputError("cube set is empty")
    best = max(values)
    tied = [c for v, c in zip(values, cubes) if v >= best * (1 - 1e-12)]
    arg = min(tied, key=lambda c: (-c.level, c.index))
    return WeightConstantReport(best, arg, cube_set, len(cubes))


def ap_products(w: Weight, p: float, cubes: Iterable[DyadicCube]) -> list[float]:
    """Per-cube ``w(Q) sigma(Q)**(p-1) / |Q|**p``."""
    sigma = dual_weight(w, p)
    out = []
    for q in cubes:
        wq, sq, vol = w.cube_mass(q), sigma.cube_mass(q), float(q.volume)
        if wq <= 0 or sq <= 0:
            raise DyadicInputError(f"weight or dual weight vanishes on {q!r}")
        out.append(wq * sq ** (p - 1) / vol**p)
    return out


def ap_constant(w: Weight, p: float, cubes: Iterable[DyadicCube], cube_set: str = "custom") -> WeightConstantReport:
    cubes = list(cubes)
    return _pick(ap_products(w, p, cubes), cubes, cube_set)


def apq_products(w: Weight, p: float, q: float, cubes: Iterable[DyadicCube]) -> list[float]:
    """Per-cube ``u(Q) sigma(Q)**(q/p') / |Q|**(1 + q/p')`` with ``u = w**q``, ``sigma = w**-p'``."""
    pp = conjugate(p)
    u, sigma = w.power(q), w.power(-pp)
    r = q / pp
    out = []
    for c in cubes:
        uq, sq, vol = u.cube_mass(c), sigma.cube_mass(c), float(c.volume)
        if uq <= 0 or sq <= 0:
            raise DyadicInputError(f"weight vanishes on {c!r}")
        out.append(uq * sq**r / vol ** (1 + r))
    return out


def apq_constant(w: Weight, p: float, q: float, cubes: Iterable[DyadicCube], cube_set: str = "custom") -> WeightConstantReport:
    cubes = list(cubes)
    return _pick(apq_products(w, p, q, cubes), cubes, cube_set)


def tower(depth: int, root_level: int = 0) -> list[DyadicCube]:
    """``[0, 2**(root_level - k))`` for ``k = 0..depth``."""
    g = DyadicGrid.standard(1)
    return [DyadicCube(root_level - k, (0,), g) for k in range(depth + 1)]
