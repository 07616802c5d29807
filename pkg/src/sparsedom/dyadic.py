"""Dyadic cubes, shifted dyadic grids and the one-third covering trick.

All geometry is exact: endpoints are :class:`fractions.Fraction` values whose
denominators divide ``3 * 2**j``.  A grid with shift ``t`` places its level-``k``
cubes at ``2**k * (m + (-1)**k * t)``; because ``3 * t`` is an integer the cubes
of consecutive levels nest.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import cached_property
from fractions import Fraction
from typing import Iterator, Sequence

from .errors import CoveringFailure, DyadicInputError

ALLOWED_SHIFTS = (Fraction(0), Fraction(1, 3))


def pow2(k: int) -> Fraction:
    return Fraction(2) ** k


@dataclass(frozen=True)
class DyadicGrid:
    dim: int
    shift: tuple[Fraction, ...]
    sign_rule: bool = True

    def __post_init__(self):
        if self.dim < 1:
            raise DyadicInputError("dimension must be >= 1")
        shift = tuple(Fraction(s) for s in self.shift)
        if len(shift) != self.dim:
            raise DyadicInputError(f"shift has length {len(shift)}, expected {self.dim}")
        if any((3 * s).denominator != 1 for s in shift):
            raise DyadicInputError("each shift coordinate must be a multiple of 1/3")
        object.__setattr__(self, "shift", shift)

    @classmethod
    def standard(cls, dim: int) -> "DyadicGrid":
        return cls(dim, (Fraction(0),) * dim)

    @property
    def is_standard(self) -> bool:
        return all(s == 0 for s in self.shift)

    @property
    def label(self) -> str:
        if self.is_standard:
            return "t0"
        return "t(" + ",".join(str(s) for s in self.shift) + ")"

    def offset(self, level: int) -> tuple[Fraction, ...]:
        """Per-coordinate translation (in units of the side length) used at ``level``."""
        if self.sign_rule and level % 2:
            return tuple(-s for s in self.shift)
        return self.shift

    def locate(self, level: int, point: Sequence) -> "DyadicCube":
        """The unique level-``level`` cube of this grid containing ``point``."""
        if len(point) != self.dim:
            raise DyadicInputError("point dimension mismatch")
        side = pow2(level)
        idx = tuple(
            math.floor(Fraction(x) / side - o) for x, o in zip(point, self.offset(level))
        )
        return DyadicCube(level, idx, self)


@dataclass(frozen=True, order=False)
class DyadicCube:
    level: int
    index: tuple[int, ...]
    grid: DyadicGrid

    def __post_init__(self):
        index = tuple(int(i) for i in self.index)
        if len(index) != self.grid.dim:
            raise DyadicInputError(f"index has length {len(index)}, expected {self.grid.dim}")
        object.__setattr__(self, "index", index)

    @property
    def dim(self) -> int:
        return self.grid.dim

    @property
    def side(self) -> Fraction:
        return pow2(self.level)

    @property
    def volume(self) -> Fraction:
        return pow2(self.level * self.dim)

    @cached_property
    def lower(self) -> tuple[Fraction, ...]:
        side = self.side
        return tuple(side * (m + o) for m, o in zip(self.index, self.grid.offset(self.level)))

    @cached_property
    def upper(self) -> tuple[Fraction, ...]:
        side = self.side
        return tuple(lo + side for lo in self.lower)

    @cached_property
    def _bounds(self) -> tuple[tuple[Fraction, Fraction], ...]:
        return tuple(zip(self.lower, self.upper))

    def bounds(self) -> list[tuple[Fraction, Fraction]]:
        return list(self._bounds)

    def contains_point(self, point: Sequence) -> bool:
        return all(lo <= Fraction(x) < hi for x, (lo, hi) in zip(point, self._bounds))

    def contains(self, other: "DyadicCube") -> bool:
        """Set containment ``other ⊆ self`` by endpoint comparison (grids may differ)."""
        return all(
            lo <= olo and ohi <= hi
            for (lo, hi), (olo, ohi) in zip(self._bounds, other._bounds)
        )

    def intersects(self, other: "DyadicCube") -> bool:
        return all(
            max(lo, olo) < min(hi, ohi)
            for (lo, hi), (olo, ohi) in zip(self._bounds, other._bounds)
        )

    def parent(self) -> "DyadicCube":
        return parent(self)

    def children(self) -> list["DyadicCube"]:
        return children(self)

    def __repr__(self) -> str:
        iv = " x ".join(f"[{lo},{hi})" for lo, hi in self.bounds())
        return f"DyadicCube({iv}, {self.grid.label})"


def cube(grid: DyadicGrid, level: int, index: Sequence[int]) -> DyadicCube:
    if len(index) != grid.dim:
        raise DyadicInputError(f"index has length {len(index)}, grid dimension is {grid.dim}")
    return DyadicCube(level, tuple(index), grid)


def parent(c: DyadicCube) -> DyadicCube:
    # the lower corner of c lies in exactly one cube of the next level
    p = c.grid.locate(c.level + 1, c.lower)
    if not p.contains(c):  # pragma: no cover - would mean the grid is not nested
        raise DyadicInputError(f"grid {c.grid.label} is not nested at level {c.level}")
    return p


def children(c: DyadicCube) -> list[DyadicCube]:
    g = c.grid
    k = c.level - 1
    # m' = 2m + 3*(offset at level k+1), since 2^{k+1}(m + o) = 2^k(2m + 2o) and o' = -o
    base = []
    for m, o in zip(c.index, g.offset(c.level)):
        shift_num = 2 * o - g.offset(k)[len(base)]
        assert shift_num.denominator == 1
        base.append(2 * m + int(shift_num))
    out = []
    for bits in itertools.product((0, 1), repeat=g.dim):
        out.append(DyadicCube(k, tuple(b + d for b, d in zip(base, bits)), g))
    return out


def shifted_grids(n: int) -> list[DyadicGrid]:
    """The ``2**n`` grids with shifts in ``{0, 1/3}**n``; the unshifted grid first."""
    if n < 1:
        raise DyadicInputError("dimension must be >= 1")
    return [DyadicGrid(n, t) for t in itertools.product(ALLOWED_SHIFTS, repeat=n)]


def cubes_at_level(grid: DyadicGrid, level: int, lo: int, hi: int) -> Iterator[DyadicCube]:
    """All cubes at ``level`` with every index coordinate in ``range(lo, hi + 1)``."""
    for idx in itertools.product(range(lo, hi + 1), repeat=grid.dim):
        yield DyadicCube(level, idx, grid)


def _as_query(q_lo: Sequence, q_side) -> tuple[tuple[Fraction, ...], Fraction]:
    lo = tuple(Fraction(x) for x in q_lo)
    side = Fraction(q_side)
    if side <= 0:
        raise DyadicInputError("query side must be positive")
    return lo, side


def _covers(c: DyadicCube, lo: tuple[Fraction, ...], side: Fraction) -> bool:
    return all(a <= x and x + side <= b for x, (a, b) in zip(lo, c.bounds()))


def _exact_log2(x: Fraction) -> int | None:
    num, den = x.numerator, x.denominator
    if num & (num - 1) or den & (den - 1):
        return None
    return num.bit_length() - den.bit_length()


def covering_cube(q_lo: Sequence, q_side, grids: Sequence[DyadicGrid] | None = None):
    """Find a shifted dyadic cube containing the query cube ``q_lo + [0, q_side)^n``.

    A query that is itself a cube of one of the grids is returned unchanged.
    Otherwise the level with ``2**k`` in ``(3 * q_side, 6 * q_side]`` is scanned
    over all grids; at that scale every coordinate interval meets at most one
    endpoint of the two one-dimensional shifts, so some grid always works.

    Returns ``(cube, grid)``.
    """
    lo, side = _as_query(q_lo, q_side)
    n = len(lo)
    if grids is None:
        grids = shifted_grids(n)

    k = _exact_log2(side)
    if k is not None:
        for g in grids:
            c = g.locate(k, lo)
            if c.lower == lo:
                return c, g

    k = math.floor(math.log2(6 * side))
    # floating log2 can be off by one near powers of two; settle exactly
    while pow2(k) > 6 * side:
        k -= 1
    while pow2(k + 1) <= 6 * side:
        k += 1
    for g in grids:
        c = g.locate(k, lo)
        if _covers(c, lo, side):
            return c, g
    raise CoveringFailure(f"no shifted dyadic cube of side <= 6*{side} covers query at {lo}")
