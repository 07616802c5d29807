"""Sparse families of dyadic cubes and the stopping-cube construction."""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Iterable

import numpy as np

from .dyadic import DyadicCube, DyadicGrid
from .errors import DegenerateInputError, DyadicInputError
from .stepfun import MeshSpec, StepFunction, level_sums


def _single_grid(cubes: Iterable[DyadicCube]) -> DyadicGrid | None:
    grids = {c.grid for c in cubes}
    if len(grids) > 1:
        raise DyadicInputError("cubes come from more than one grid")
    return next(iter(grids), None)


def nearest_ancestors(cubes: Iterable[DyadicCube]) -> dict[DyadicCube, DyadicCube | None]:
    """Map each cube to the smallest *strictly* larger cube of the same collection containing it."""
    members = set(cubes)
    _single_grid(members)
    if not members:
        return {}
    top = max(c.level for c in members)
    out = {}
    for c in members:
        anc, cur = None, c
        while cur.level < top:
            cur = cur.parent()
            if cur in members:
                anc = cur
                break
        out[c] = anc
    return out


def family_children(cubes: Iterable[DyadicCube]) -> dict[DyadicCube, list[DyadicCube]]:
    """The maximal strict subcubes of each member that are themselves members."""
    anc = nearest_ancestors(cubes)
    kids: dict[DyadicCube, list[DyadicCube]] = {c: [] for c in anc}
    for c, a in anc.items():
        if a is not None:
            kids[a].append(c)
    return kids


def is_sparse(cubes: Iterable[DyadicCube], factor=Fraction(1, 2)) -> bool:
    """Whether each cube's strict subcubes in the family cover at most ``factor * |Q|``.

    Maximal strict subcubes are pairwise disjoint, so the union's measure is the
    exact sum of their volumes.
    """
    factor = Fraction(factor)
    for q, kids in family_children(list(cubes)).items():
        if sum((k.volume for k in kids), Fraction(0)) > factor * q.volume:
            return False
    return True


@dataclass(frozen=True, eq=False)
class SparseFamily:
    cubes: tuple[DyadicCube, ...]
    factor: Fraction = Fraction(1, 2)
    validate: bool = True

    def __post_init__(self):
        cubes = tuple(sorted(set(self.cubes), key=lambda c: (-c.level, c.index)))
        if not cubes:
            raise DyadicInputError("a sparse family needs at least one cube")
        object.__setattr__(self, "cubes", cubes)
        object.__setattr__(self, "factor", Fraction(self.factor))
        _single_grid(cubes)
        if self.validate and not is_sparse(cubes, self.factor):
            raise DyadicInputError(f"family is not {self.factor}-sparse")

    @property
    def grid(self) -> DyadicGrid:
        return self.cubes[0].grid

    def __len__(self) -> int:
        return len(self.cubes)

    def __iter__(self):
        return iter(self.cubes)

    def children(self) -> dict[DyadicCube, list[DyadicCube]]:
        return family_children(self.cubes)

    def to_dict(self) -> dict:
        return {
            "grid": self.grid.label,
            "cubes": [{"level": c.level, "index": list(c.index)} for c in self.cubes],
            "factor": float(self.factor),
        }

    @classmethod
    def from_dict(cls, d: dict, dim: int | None = None) -> "SparseFamily":
        if d.get("grid", "t0") != "t0":
            raise DyadicInputError("only families on the unshifted grid can be loaded")
        raw = d["cubes"]
        if dim is None:
            dim = len(raw[0]["index"])
        g = DyadicGrid.standard(dim)
        cubes = [DyadicCube(int(c["level"]), tuple(c["index"]), g) for c in raw]
        return cls(tuple(cubes), Fraction(d.get("factor", 0.5)).limit_denominator(2**20))

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict()))

    @classmethod
    def load(cls, path) -> "SparseFamily":
        return cls.from_dict(json.loads(Path(path).read_text()))


def exceptional_sets(family: SparseFamily, mesh: MeshSpec) -> dict[DyadicCube, np.ndarray]:
    """``E(Q) = Q`` minus the family's strict subcubes, as boolean cell masks."""
    out = {}
    for q, kids in family.children().items():
        if not mesh.contains(q):
            raise DyadicInputError(f"{q!r} cannot be resolved on {mesh}")
        mask = np.zeros(mesh.shape, dtype=bool)
        mask[mesh.slices(q)] = True
        for k in kids:
            if not mesh.contains(k):
                raise DyadicInputError(f"{k!r} cannot be resolved on {mesh}")
            mask[mesh.slices(k)] = False
        out[q] = mask
    return out


def owner_map(family: SparseFamily, mesh: MeshSpec) -> np.ndarray:
    """Position in ``family.cubes`` of the smallest member containing each cell, or -1."""
    own = np.full(mesh.shape, -1, dtype=np.int64)
    for i, q in enumerate(family.cubes):  # coarsest first, finer cubes overwrite
        own[mesh.slices(q)] = i
    return own


def sparse_from_function(f: StepFunction, root: DyadicCube | None = None, a: float = 2.0) -> SparseFamily:
    """Stopping cubes of ``f`` at threshold factor ``a``.

    Starting from ``root``, the stopping children of a selected cube ``Q`` are the
    maximal dyadic ``Q' ⊊ Q`` with ``avg_{Q'} f >= a avg_Q f``.  Summing
    ``|Q'| <= (a avg_Q f)^{-1} ∫_{Q'} f`` over the disjoint children gives
    ``1/a``-sparseness.
    """
    if a <= 1:
        raise DyadicInputError("stopping factor must exceed 1")
    mesh = f.mesh
    if root is None:
        root = mesh.root
    mesh.check(root)
    if np.any(f.values < 0):
        raise DyadicInputError("stopping cubes need a nonnegative function")
    peak = float(f.values.max())
    if peak <= 0:
        raise DegenerateInputError("f vanishes identically")
    # the stopping rule is scale invariant; normalizing keeps subnormal inputs from averaging to zero
    sums = level_sums(f.values / peak, mesh)
    L = mesh.resolution_level

    def avg(c: DyadicCube) -> float:
        return float(sums[c.level][c.index]) / 2 ** (mesh.dim * (c.level - L))

    if avg(root) <= 0:
        raise DegenerateInputError("f vanishes identically on the root cube")

    selected = [root]
    queue = deque([root])
    while queue:
        top = queue.popleft()
        threshold = a * avg(top)
        scan = deque(top.children() if top.level > L else [])
        while scan:
            c = scan.popleft()
            if avg(c) >= threshold:
                selected.append(c)
                queue.append(c)
            elif c.level > L:
                scan.extend(c.children())
    return SparseFamily(tuple(selected), Fraction(1) / Fraction(a).limit_denominator(2**20), validate=False)
