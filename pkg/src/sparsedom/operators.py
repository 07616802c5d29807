"""Sparse, dyadic and maximal operators acting on mesh step functions."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import scipy.sparse as sp

from .constants import maximal_constant, target_exponent
from .errors import DyadicInputError
from .sparse import SparseFamily
from .stepfun import MeshSpec, StepFunction, _view, level_sums, refine

KINDS = ("cz_sparse", "frac_sparse", "frac_dyadic", "maximal")


@dataclass(frozen=True, eq=False)
class OperatorSpec:
    kind: str
    mesh: MeshSpec
    family: SparseFamily | None = None
    alpha: float = 0.0
    measure: object = None
    _cache: dict = field(default_factory=dict, init=False, repr=False)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise DyadicInputError(f"unknown operator kind {self.kind!r}")
        n = self.mesh.dim
        if self.kind == "cz_sparse" and self.alpha != 0:
            raise DyadicInputError("the sparse CZ operator has no alpha")
        if self.kind in ("frac_sparse", "frac_dyadic") and not 0 < self.alpha < n:
            raise DyadicInputError(f"need 0 < alpha < n, got {self.alpha}")
        if self.kind == "maximal" and not 0 <= self.alpha < n:
            raise DyadicInputError(f"need 0 <= alpha < n, got {self.alpha}")
        if self.kind in ("cz_sparse", "frac_sparse"):
            if self.family is None:
                raise DyadicInputError(f"{self.kind} needs a sparse family")
            for q in self.family:
                self.mesh.check(q)
        if self.kind == "maximal":
            object.__setattr__(self, "measure", _view(self.measure, self.mesh))

    @classmethod
    def cz(cls, family: SparseFamily, mesh: MeshSpec) -> "OperatorSpec":
        return cls("cz_sparse", mesh, family)

    @classmethod
    def frac(cls, family: SparseFamily, mesh: MeshSpec, alpha: float) -> "OperatorSpec":
        return cls("frac_sparse", mesh, family, alpha)

    @classmethod
    def frac_dyadic(cls, mesh: MeshSpec, alpha: float) -> "OperatorSpec":
        return cls("frac_dyadic", mesh, None, alpha)

    @classmethod
    def maximal(cls, mesh: MeshSpec, alpha: float = 0.0, measure=None) -> "OperatorSpec":
        return cls("maximal", mesh, None, alpha, measure)

    @property
    def is_sparse(self) -> bool:
        return self.kind in ("cz_sparse", "frac_sparse")

    @property
    def is_linear(self) -> bool:
        return self.kind != "maximal"

    def cube_coefficient(self, volume: float) -> float:
        """``|Q|**(alpha/n) / |Q|``: the weight of ``∫_Q h`` in the cube's term."""
        return volume ** (self.alpha / self.mesh.dim - 1.0)

    @cached_property
    def _incidence(self) -> tuple[sp.csr_matrix, np.ndarray]:
        mesh = self.mesh
        flat = np.arange(mesh.ncells).reshape(mesh.shape)
        rows, cols = [], []
        coef = np.empty(len(self.family))
        for i, q in enumerate(self.family):
            idx = flat[mesh.slices(q)].ravel()
            rows.append(np.full(idx.size, i))
            cols.append(idx)
            coef[i] = self.cube_coefficient(float(q.volume))
        B = sp.csr_matrix(
            (np.ones(sum(r.size for r in rows)), (np.concatenate(rows), np.concatenate(cols))),
            shape=(len(self.family), mesh.ncells),
        )
        return B, coef

    def apply_masses(self, m: np.ndarray) -> np.ndarray:
        """Apply a linear kind to the measure with cell masses ``m``.

        ``m`` is flat with shape ``(ncells,)`` or ``(ncells, R)``; the result has
        the same shape and holds cell values of the image.
        """
        if not self.is_linear:
            raise DyadicInputError("apply_masses is defined for the linear kinds only")
        m = np.asarray(m, dtype=np.float64)
        if self.is_sparse:
            B, coef = self._incidence
            inner = B @ m
            inner = inner * (coef[:, None] if m.ndim == 2 else coef)
            return np.asarray(B.T @ inner)
        mesh = self.mesh
        extra = m.shape[1:]
        sums = level_sums(m.reshape(mesh.shape + extra), mesh)
        out = np.zeros(mesh.shape + extra)
        for level, s in sums.items():
            out += refine(s * self.cube_coefficient(2.0 ** (mesh.dim * level)), level, mesh)
        return out.reshape(m.shape)

    def apply(self, f: StepFunction) -> StepFunction:
        if f.mesh != self.mesh:
            raise DyadicInputError("function and operator live on different meshes")
        if self.kind == "maximal":
            return StepFunction(self.mesh, self._maximal(f.values), nonneg=True)
        m = (f.values * self.mesh.cell_volume).ravel()
        out = self.apply_masses(m).reshape(self.mesh.shape)
        return StepFunction(self.mesh, out, nonneg=f.nonneg)

    def _maximal(self, values: np.ndarray) -> np.ndarray:
        mesh = self.mesh
        mu = self.measure.masses
        num = level_sums(np.abs(values) * mu, mesh)
        den = level_sums(mu, mesh)
        power = 1.0 - self.alpha / mesh.dim
        out = np.zeros(mesh.shape)
        for level in mesh.levels:
            d = den[level]
            ratio = np.zeros_like(d)
            pos = d > 0
            ratio[pos] = num[level][pos] / d[pos] ** power
            np.maximum(out, refine(ratio, level, mesh), out=out)
        return out


def bilinear_form(op: OperatorSpec, f: StepFunction, g: StepFunction, rho=None) -> float:
    """``∫ (op f) g dρ`` evaluated cellwise."""
    if g.mesh != op.mesh:
        raise DyadicInputError("mesh mismatch")
    r = _view(rho, op.mesh)
    return float(np.sum(op.apply(f).values * g.values * r.masses))


def cube_sum_form(op: OperatorSpec, f: StepFunction, g: StepFunction, rho=None) -> float:
    """The same pairing for a sparse kind, as ``Σ_Q |Q|^{α/n} avg_Q f ∫_Q g dρ``."""
    if not op.is_sparse:
        raise DyadicInputError("cube sums exist for sparse kinds only")
    r = _view(rho, op.mesh)
    mesh = op.mesh
    total = 0.0
    for q in op.family:
        sl = mesh.slices(q)
        vol = float(q.volume)
        avg_f = float(f.values[sl].sum()) * mesh.cell_volume / vol
        total += vol ** (op.alpha / mesh.dim) * avg_f * float(np.sum(g.values[sl] * r.masses[sl]))
    return total


def weak_type_check(op: OperatorSpec, f: StepFunction, lam: float) -> tuple[float, float, bool]:
    """``μ{Mf > λ} <= (λ^{-1} ∫_{Mf>λ} |f| dμ)^{n/(n-α)}``."""
    if op.kind != "maximal":
        raise DyadicInputError("weak-type check needs a maximal operator")
    if lam <= 0:
        raise DyadicInputError("lambda must be positive")
    mu = op.measure.masses
    level_set = op.apply(f).values > lam
    lhs = float(mu[level_set].sum())
    q0 = op.mesh.dim / (op.mesh.dim - op.alpha)
    rhs = (float(np.sum(np.abs(f.values[level_set]) * mu[level_set])) / lam) ** q0
    return lhs, rhs, lhs <= rhs * (1 + 1e-12)


def _norm(values: np.ndarray, exponent: float, masses: np.ndarray) -> float:
    if math.isinf(exponent):
        pos = masses > 0
        return float(np.max(np.abs(values[pos]))) if pos.any() else 0.0
    return float(np.sum(np.abs(values) ** exponent * masses)) ** (1.0 / exponent)


def maximal_bound_check(op: OperatorSpec, f: StepFunction, p: float) -> tuple[float, float, bool]:
    """Ratio ``||Mf||_{L^q(μ)} / ||f||_{L^p(μ)}`` against ``(1 + p'/q)^{1-α/n}``."""
    if op.kind != "maximal":
        raise DyadicInputError("maximal bound check needs a maximal operator")
    n = op.mesh.dim
    q = target_exponent(p, op.alpha, n)
    bound = maximal_constant(p, q, op.alpha, n)
    mu = op.measure.masses
    denom = _norm(f.values, p, mu)
    if denom == 0:
        return 0.0, bound, True
    ratio = _norm(op.apply(f).values, q, mu) / denom
    return ratio, bound, ratio <= bound * (1 + 1e-10)
