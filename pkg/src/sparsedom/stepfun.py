"""Step functions on a uniform dyadic mesh and the measures they see.

A :class:`MeshSpec` fixes a root cube ``[0, 2**K)^n`` of the unshifted grid cut
into cells of side ``2**L``.  Every dyadic cube between levels ``L`` and ``K``
inside the root is a union of cells, so integrals against step functions are
finite sums with no quadrature error.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator

import numpy as np

from .dyadic import DyadicCube, DyadicGrid
from .errors import DegenerateInputError, DyadicInputError, SingularityError


@dataclass(frozen=True)
class MeshSpec:
    dim: int
    root_level: int
    resolution_level: int

    def __post_init__(self):
        if self.dim < 1:
            raise DyadicInputError("dimension must be >= 1")
        if self.resolution_level > self.root_level:
            raise DyadicInputError("resolution_level must not exceed root_level")

    @property
    def depth(self) -> int:
        return self.root_level - self.resolution_level

    @property
    def per_axis(self) -> int:
        return 2**self.depth

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.per_axis,) * self.dim

    @property
    def ncells(self) -> int:
        return self.per_axis**self.dim

    @property
    def cell_volume(self) -> float:
        return 2.0 ** (self.dim * self.resolution_level)

    @property
    def grid(self) -> DyadicGrid:
        return DyadicGrid.standard(self.dim)

    @property
    def root(self) -> DyadicCube:
        return DyadicCube(self.root_level, (0,) * self.dim, self.grid)

    @property
    def levels(self) -> range:
        return range(self.resolution_level, self.root_level + 1)

    def contains(self, q: DyadicCube) -> bool:
        if q.dim != self.dim or not q.grid.is_standard:
            return False
        if not self.resolution_level <= q.level <= self.root_level:
            return False
        n_at = 2 ** (self.root_level - q.level)
        return all(0 <= m < n_at for m in q.index)

    def check(self, q: DyadicCube) -> None:
        if not self.contains(q):
            raise DyadicInputError(f"{q!r} is not a mesh cube of {self}")

    def slices(self, q: DyadicCube) -> tuple[slice, ...]:
        self.check(q)
        w = 2 ** (q.level - self.resolution_level)
        return tuple(slice(m * w, (m + 1) * w) for m in q.index)

    def cubes(self, level: int) -> Iterator[DyadicCube]:
        n_at = 2 ** (self.root_level - level)
        for idx in np.ndindex(*((n_at,) * self.dim)):
            yield DyadicCube(level, idx, self.grid)

    def all_cubes(self) -> Iterator[DyadicCube]:
        """Every mesh cube, coarsest level first."""
        for level in reversed(self.levels):
            yield from self.cubes(level)

    def to_dict(self) -> dict:
        return {"dim": self.dim, "root_level": self.root_level, "resolution_level": self.resolution_level}


def coarsen(arr: np.ndarray, dim: int) -> np.ndarray:
    """Sum ``2**dim`` sibling blocks; the leading ``dim`` axes are spatial."""
    shape = arr.shape
    new_shape = []
    for s in shape[:dim]:
        new_shape += [s // 2, 2]
    arr = arr.reshape(tuple(new_shape) + shape[dim:])
    return arr.sum(axis=tuple(range(1, 2 * dim, 2)))


def level_sums(arr: np.ndarray, mesh: MeshSpec) -> dict[int, np.ndarray]:
    """Cube sums of cell data for every level; ``out[k][m]`` is the sum over cube ``(k, m)``."""
    out = {mesh.resolution_level: arr}
    for level in mesh.levels[1:]:
        arr = coarsen(arr, mesh.dim)
        out[level] = arr
    return out


def refine(arr: np.ndarray, level: int, mesh: MeshSpec) -> np.ndarray:
    """Broadcast per-cube data at ``level`` back onto mesh cells."""
    rep = 2 ** (level - mesh.resolution_level)
    for axis in range(mesh.dim):
        arr = np.repeat(arr, rep, axis=axis)
    return arr


@dataclass(frozen=True, eq=False)
class StepFunction:
    mesh: MeshSpec
    values: np.ndarray
    nonneg: bool = False

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=np.float64)
        if vals.size != self.mesh.ncells:
            raise DyadicInputError(f"{vals.size} values for a mesh of {self.mesh.ncells} cells")
        vals = vals.reshape(self.mesh.shape).copy()
        vals.setflags(write=False)
        if not np.all(np.isfinite(vals)):
            raise DyadicInputError("step function values must be finite")
        if self.nonneg and np.any(vals < 0):
            raise DyadicInputError("nonneg flag set but some values are negative")
        object.__setattr__(self, "values", vals)

    @classmethod
    def constant(cls, mesh: MeshSpec, c: float) -> "StepFunction":
        return cls(mesh, np.full(mesh.shape, float(c)), nonneg=c >= 0)

    @classmethod
    def indicator(cls, mesh: MeshSpec, q: DyadicCube, c: float = 1.0) -> "StepFunction":
        vals = np.zeros(mesh.shape)
        vals[mesh.slices(q)] = c
        return cls(mesh, vals, nonneg=c >= 0)

    def __mul__(self, other):
        if isinstance(other, StepFunction):
            return StepFunction(self.mesh, self.values * other.values, self.nonneg and other.nonneg)
        return StepFunction(self.mesh, self.values * other, self.nonneg and other >= 0)

    __rmul__ = __mul__

    def __add__(self, other: "StepFunction") -> "StepFunction":
        if other.mesh != self.mesh:
            raise DyadicInputError("mesh mismatch")
        return StepFunction(self.mesh, self.values + other.values, self.nonneg and other.nonneg)

    def abs(self) -> "StepFunction":
        return StepFunction(self.mesh, np.abs(self.values), nonneg=True)

    def to_dict(self) -> dict:
        return {
            **self.mesh.to_dict(),
            "values": self.values.ravel().tolist(),
            "nonneg": bool(self.nonneg),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "StepFunction":
        mesh = MeshSpec(int(d["dim"]), int(d["root_level"]), int(d["resolution_level"]))
        vals = np.asarray(d["values"], dtype=np.float64)
        if vals.ndim != 1 or vals.size != mesh.ncells:
            raise DyadicInputError(f"expected {mesh.ncells} row-major values, got {vals.size}")
        return cls(mesh, vals, bool(d.get("nonneg", False)))

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict()))

    @classmethod
    def load(cls, path) -> "StepFunction":
        return cls.from_dict(json.loads(Path(path).read_text()))


@dataclass(frozen=True, eq=False)
class MeasureView:
    """A measure restricted to mesh cells: ``base`` is a weight, or ``None`` for Lebesgue."""

    base: object
    mesh: MeshSpec
    _masses: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if self.base is None:
            m = np.full(self.mesh.shape, self.mesh.cell_volume)
        else:
            m = np.asarray(self.base.cell_masses(self.mesh), dtype=np.float64).reshape(self.mesh.shape)
        if np.any(m < 0) or not np.all(np.isfinite(m)):
            raise DyadicInputError("cell masses must be finite and nonnegative")
        m.setflags(write=False)
        object.__setattr__(self, "_masses", m)

    @classmethod
    def lebesgue(cls, mesh: MeshSpec) -> "MeasureView":
        return cls(None, mesh)

    @classmethod
    def from_masses(cls, mesh: MeshSpec, masses) -> "MeasureView":
        return cls(_RawMasses(np.asarray(masses, dtype=np.float64)), mesh)

    @property
    def masses(self) -> np.ndarray:
        return self._masses

    @property
    def is_lebesgue(self) -> bool:
        return self.base is None

    def __call__(self, q: DyadicCube) -> float:
        return float(self._masses[self.mesh.slices(q)].sum())

    def describe(self) -> str:
        if self.base is None:
            return "lebesgue"
        return getattr(self.base, "describe", lambda: type(self.base).__name__)()


@dataclass(frozen=True, eq=False)
class _RawMasses:
    masses: np.ndarray

    def cell_masses(self, mesh: MeshSpec) -> np.ndarray:
        return self.masses.reshape(mesh.shape)

    def describe(self) -> str:
        return "cell-masses"


def _view(mu, mesh: MeshSpec) -> MeasureView:
    if mu is None:
        return MeasureView.lebesgue(mesh)
    if isinstance(mu, MeasureView):
        if mu.mesh != mesh:
            raise DyadicInputError("measure lives on a different mesh")
        return mu
    return MeasureView(mu, mesh)


def integral(f: StepFunction, q: DyadicCube, mu=None) -> float:
    """``∫_Q f dμ`` as an exact cell sum."""
    m = _view(mu, f.mesh)
    sl = f.mesh.slices(q)
    return float(np.sum(f.values[sl] * m.masses[sl]))


def average(f: StepFunction, q: DyadicCube, mu=None) -> float:
    m = _view(mu, f.mesh)
    mass = m(q)
    if mass <= 0:
        raise DegenerateInputError(f"measure of {q!r} is zero")
    return integral(f, q, m) / mass


def lp_norm(f: StepFunction, p: float, mu=None) -> float:
    if p < 1:
        raise DyadicInputError("p must be >= 1")
    m = _view(mu, f.mesh)
    return float(np.sum(np.abs(f.values) ** p * m.masses)) ** (1.0 / p)


def pointwise_map(f: StepFunction, exponent: float) -> StepFunction:
    """Cellwise power ``f**exponent``."""
    if exponent < 0 and np.any(f.values == 0):
        raise SingularityError("negative power of a step function with a zero cell")
    if exponent != int(exponent) and np.any(f.values < 0):
        raise DyadicInputError("fractional power of a negative value")
    return StepFunction(f.mesh, f.values**exponent, f.nonneg)
