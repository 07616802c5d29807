"""Certified lower bounds for weighted norms of positive operators, and the theorem checks.

The norm of ``f -> T(f sigma)`` from ``L^p(sigma)`` to ``L^q(u)`` is estimated by
the nonlinear power method for positive operators: with ``h = T(f sigma)`` the
critical-point equation is ``f^{p-1} ∝ T^*(u h^{q-1})``.  Every iterate is an
admissible witness, so the best ratio seen is a lower bound on the norm.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .constants import (
    conjugate,
    cz_constant,
    cz_exponent,
    frac_constant,
    frac_exponent,
    require_unnat,
    target_exponent,
)
from .errors import DegenerateInputError, DyadicInputError
from .operators import OperatorSpec
from .sparse import SparseFamily
from .stepfun import MeasureView, MeshSpec, StepFunction
from .weights import Weight, ap_constant, apq_constant, dual_weight

logger = logging.getLogger(__name__)


@dataclass
class NormEstimate:
    value: float
    witness: StepFunction
    p: float
    q: float
    source: str
    target: str
    iterations: int
    restarts: int
    converged: bool = True

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "p": self.p,
            "q": self.q,
            "source_measure": self.source,
            "target_measure": self.target,
            "iterations": self.iterations,
            "restarts": self.restarts,
            "converged": self.converged,
        }


def _lp(values: np.ndarray, p: float, masses: np.ndarray) -> np.ndarray:
    return np.sum(np.abs(values) ** p * masses, axis=0) ** (1.0 / p)


def witness_ratio(op: OperatorSpec, witness: StepFunction, source: MeasureView, target: MeasureView,
                  p: float, q: float) -> float:
    """``||op(witness sigma)||_{L^q(target)} / ||witness||_{L^p(source)}``."""
    s = source.masses.ravel()
    u = target.masses.ravel()
    f = witness.values.ravel()
    den = float(_lp(f, p, s))
    if den == 0:
        raise DegenerateInputError("witness has zero norm")
    return float(_lp(op.apply_masses(f * s), q, u)) / den


def estimate_operator_norm(
    op: OperatorSpec,
    source: MeasureView,
    target: MeasureView,
    p: float,
    q: float,
    restarts: int = 8,
    tol: float = 1e-12,
    max_iter: int = 500,
    seed: int = 0,
    starts: np.ndarray | None = None,
) -> NormEstimate:
    if not op.is_linear:
        raise DyadicInputError("norm estimation needs a linear positive operator")
    if p <= 1 or q <= 1:
        raise DyadicInputError("exponents must exceed 1")
    mesh = op.mesh
    s = source.masses.ravel()
    u = target.masses.ravel()
    if starts is None:
        rng = np.random.default_rng(seed)
        X = np.empty((mesh.ncells, restarts))
        X[:, 0] = 1.0
        for j in range(1, restarts):
            X[:, j] = rng.uniform(0.05, 1.0, mesh.ncells)
    else:
        X = np.array(starts, dtype=np.float64).reshape(mesh.ncells, -1)
        if np.any(X < 0):
            raise DyadicInputError("starting witnesses must be nonnegative")
    R = X.shape[1]
    if np.any(_lp(X, p, s[:, None]) == 0):
        raise DegenerateInputError("a starting witness vanishes in L^p(source)")

    best_val = np.full(R, -np.inf)
    best_X = X.copy()
    prev = np.full(R, np.nan)
    active = np.ones(R, dtype=bool)
    it = 0
    for it in range(1, max_iter + 1):
        X = X / _lp(X, p, s[:, None])
        H = op.apply_masses(X * s[:, None])
        vals = _lp(H, q, u[:, None])
        better = vals > best_val
        best_val[better] = vals[better]
        best_X[:, better] = X[:, better]
        change = np.abs(vals - prev) / np.maximum(vals, 1e-300)
        active &= ~(change < tol)
        if not active.any():
            break
        prev = vals
        G = op.apply_masses(u[:, None] * H ** (q - 1.0))
        top = G.max(axis=0)
        ok = top > 0
        G[:, ok] = (G[:, ok] / top[ok]) ** (1.0 / (p - 1.0))
        G[:, ~ok] = X[:, ~ok]
        X = G
    j = int(np.argmax(best_val))
    witness = StepFunction(mesh, best_X[:, j].reshape(mesh.shape), nonneg=True)
    value = witness_ratio(op, witness, source, target, p, q)
    converged = not active.all()
    if not converged:
        logger.info("norm iteration hit the cap of %d iterations", max_iter)
    return NormEstimate(value, witness, p, q, source.describe(), target.describe(), it, R, converged)


def norm_measures(op: OperatorSpec, w: Weight | None, p: float) -> tuple[MeasureView, MeasureView, float]:
    """Source/target measures and target exponent for the weighted norm of ``op``.

    CZ kind: ``L^p(sigma) -> L^p(w)`` with ``sigma = w^{1-p'}``.  Fractional kinds:
    ``L^p(sigma) -> L^q(u)`` with ``u = w^q``, ``sigma = w^{-p'}``.
    """
    mesh = op.mesh
    if op.kind == "cz_sparse":
        if w is None:
            return MeasureView.lebesgue(mesh), MeasureView.lebesgue(mesh), p
        return dual_weight(w, p).on(mesh), w.on(mesh), p
    q = target_exponent(p, op.alpha, mesh.dim)
    if w is None:
        return MeasureView.lebesgue(mesh), MeasureView.lebesgue(mesh), q
    return w.power(-conjugate(p)).on(mesh), w.power(q).on(mesh), q


def estimate_norm(op: OperatorSpec, w: Weight | None, p: float, trials: int = 8, tol: float = 1e-12,
                  seed: int = 0, max_iter: int = 500) -> NormEstimate:
    source, target, q = norm_measures(op, w, p)
    return estimate_operator_norm(op, source, target, p, q, restarts=trials, tol=tol, seed=seed,
                                  max_iter=max_iter)


@dataclass
class BoundReport:
    theorem: str
    params: dict
    constant: float
    exponent: float
    weight_constant: float
    weight_constant_dyadic: float | None
    norm_estimate: NormEstimate
    bound: float
    ok: bool
    extra: dict = field(default_factory=dict)

    @property
    def ratio(self) -> float:
        return self.norm_estimate.value / self.bound

    def to_dict(self) -> dict:
        wc = {"value": self.weight_constant, "cube_set": "sparse"}
        if self.weight_constant_dyadic is not None:
            wc["dyadic_value"] = self.weight_constant_dyadic
        return {
            "theorem": self.theorem,
            "params": self.params,
            "constant": self.constant,
            "exponent": self.exponent,
            "weight_constant": wc,
            "norm_estimate": self.norm_estimate.value,
            "bound": self.bound,
            "ratio": self.ratio,
            "ok": self.ok,
            **self.extra,
        }


def bound_check_cz(S: SparseFamily, w: Weight, p: float, mesh: MeshSpec, trials: int = 8, seed: int = 0,
                   dyadic_context: bool = True) -> BoundReport:
    if not 1 < p < math.inf:
        raise DyadicInputError(f"need 1 < p < inf, got {p}")
    c, beta = cz_constant(p), cz_exponent(p)
    A = ap_constant(w, p, S.cubes, "sparse").value
    A_dyadic = ap_constant(w, p, mesh.all_cubes(), "dyadic").value if dyadic_context else None
    est = estimate_norm(OperatorSpec.cz(S, mesh), w, p, trials=trials, seed=seed)
    bound = c * A**beta
    return BoundReport("cz", {"p": p, "n": mesh.dim, "cubes": len(S)}, c, beta, A, A_dyadic, est, bound,
                       est.value <= bound * (1 + 1e-9))


def bound_check_frac(S: SparseFamily, w: Weight, p: float, alpha: float, mesh: MeshSpec, trials: int = 8,
                     seed: int = 0, dyadic_context: bool = True) -> BoundReport:
    n = mesh.dim
    require_unnat(p, alpha, n)
    q = target_exponent(p, alpha, n)
    c, expo = frac_constant(p, alpha, n), frac_exponent(p, alpha, n)
    A = apq_constant(w, p, q, S.cubes, "sparse").value
    A_dyadic = apq_constant(w, p, q, mesh.all_cubes(), "dyadic").value if dyadic_context else None
    est = estimate_norm(OperatorSpec.frac(S, mesh, alpha), w, p, trials=trials, seed=seed)
    bound = c * A**expo
    return BoundReport("frac", {"p": p, "q": q, "alpha": alpha, "n": n, "cubes": len(S)}, c, expo, A, A_dyadic,
                       est, bound, est.value <= bound * (1 + 1e-9))


def duality_check(S: SparseFamily, w: Weight, p: float, mesh: MeshSpec, trials: int = 8, seed: int = 0,
                  rtol: float = 0.05) -> tuple[float, float, bool]:
    """Compare the estimated norms on ``L^p(w)`` and ``L^{p'}(sigma)``; the true values coincide."""
    op = OperatorSpec.cz(S, mesh)
    n1 = estimate_norm(op, w, p, trials=trials, seed=seed).value
    n2 = estimate_norm(op, dual_weight(w, p), conjugate(p), trials=trials, seed=seed).value
    return n1, n2, abs(n1 - n2) / max(n1, n2) <= rtol
