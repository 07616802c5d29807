"""Seeded batch drivers behind the command-line interface.

Every trial draws from its own ``numpy`` generator spawned from the run seed, so
serial and pooled runs produce identical rows in identical order.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Callable

import numpy as np

from .chains import proof_chain_cz, proof_chain_frac
from .constants import (
    conjugate,
    cz_constant,
    cz_exponent,
    frac_constant,
    frac_exponent,
    maximal_constant,
    require_unnat,
    target_exponent,
)
from .errors import DyadicInputError
from .norms import bound_check_cz, bound_check_frac, duality_check
from .operators import OperatorSpec, maximal_bound_check, weak_type_check
from .sparse import exceptional_sets, is_sparse, sparse_from_function
from .stepfun import MeasureView, MeshSpec, StepFunction
from .weights import PowerWeight, StepWeight, Weight


@dataclass
class ExperimentConfig:
    p: list[float] | None = None
    q: float | None = None
    alpha: float = 0.0
    n: int = 1
    root_level: int = 0
    resolution_level: int = -8
    trials: int = 100
    seed: int = 42
    restarts: int = 8
    lambdas: int = 50
    deltas: list[float] = field(default_factory=lambda: [2.0**-k for k in range(2, 8)])
    depth: int | None = None
    a: float = 2.0
    chains: bool = True
    duality: bool = False
    workers: int = 1
    input: str | None = None
    out: str | None = None
    format: str = "json"

    @property
    def mesh(self) -> MeshSpec:
        return MeshSpec(self.n, self.root_level, self.resolution_level)

    def to_dict(self) -> dict:
        d = asdict(self)
        for k in ("out", "format", "workers", "input"):
            d.pop(k)
        return d


def trial_rng(seed: int, i: int) -> np.random.Generator:
    """Generator of trial ``i``; identical to the ``i``-th child of ``SeedSequence(seed).spawn``."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(i,)))


def _run(fn: Callable, cfg: ExperimentConfig) -> list[dict]:
    idx = list(range(cfg.trials))
    if cfg.workers > 1:
        with ProcessPoolExecutor(cfg.workers) as pool:
            return list(pool.map(fn, [cfg] * len(idx), idx, chunksize=max(1, len(idx) // (4 * cfg.workers))))
    return [fn(cfg, i) for i in idx]


def _rng(cfg: ExperimentConfig, i: int) -> np.random.Generator:
    return trial_rng(cfg.seed, i)


# random inputs ---------------------------------------------------------------

def random_nonneg_function(rng: np.random.Generator, mesh: MeshSpec) -> StepFunction:
    """A nonnegative step function from one of several shapes (flat noise, heavy tails, spikes, blocks)."""
    kind = rng.integers(4)
    if kind == 0:
        v = rng.uniform(0, 10, mesh.shape)
    elif kind == 1:
        v = np.exp(rng.normal(0, rng.uniform(0.5, 3.0), mesh.shape))
    elif kind == 2:
        v = rng.uniform(0, 0.1, mesh.shape)
        hits = rng.integers(0, mesh.ncells, rng.integers(1, 6))
        v.flat[hits] = np.exp(rng.uniform(0, 8, hits.size))
    else:
        level = int(rng.integers(mesh.resolution_level, mesh.root_level + 1))
        coarse = rng.uniform(0, 10, (2 ** (mesh.root_level - level),) * mesh.dim)
        for ax in range(mesh.dim):
            coarse = np.repeat(coarse, 2 ** (level - mesh.resolution_level), axis=ax)
        v = coarse
    if not v.any():
        v.flat[0] = 1.0
    return StepFunction(mesh, v, nonneg=True)


def random_positive_density(rng: np.random.Generator, mesh: MeshSpec, spread: float | None = None) -> StepFunction:
    spread = rng.uniform(0.0, 2.0) if spread is None else spread
    if rng.random() < 0.5:
        v = np.exp(rng.normal(0, spread, mesh.shape))
    else:
        # correlated log-density: a random walk along the flattened cells
        steps = rng.normal(0, spread / math.sqrt(mesh.ncells) * 4, mesh.ncells)
        v = np.exp(np.cumsum(steps)).reshape(mesh.shape)
    return StepFunction(mesh, v, nonneg=True)


def random_weight(rng: np.random.Generator, mesh: MeshSpec, lo: float, hi: float) -> Weight:
    """Step weight, or (in 1-D) a power weight ``x^a`` with ``a`` drawn inside ``(lo, hi)``."""
    if mesh.dim == 1 and rng.random() < 0.3:
        a = rng.uniform(lo + 0.05 * (hi - lo), hi - 0.05 * (hi - lo))
        return PowerWeight(float(a), mesh.root_level, float(np.exp(rng.normal())))
    return StepWeight(random_positive_density(rng, mesh))


def cz_power_range(p: float) -> tuple[float, float]:
    # x^a and x^{a(1-p')} both integrable
    return -1.0, p - 1.0


def frac_power_range(p: float, q: float) -> tuple[float, float]:
    # x^{aq} and x^{-a p'} both integrable
    return -1.0 / q, 1.0 / conjugate(p)


# maximal ---------------------------------------------------------------------

def maximal_trial(cfg: ExperimentConfig, i: int) -> dict:
    rng = _rng(cfg, i)
    mesh = cfg.mesh
    n, alpha = mesh.dim, cfg.alpha
    if cfg.p:
        p = cfg.p[i % len(cfg.p)]
    else:
        hi = 10.0 if alpha == 0 else min(10.0, n / alpha)
        p = float(math.exp(rng.uniform(math.log(1.05), math.log(hi))))
    q = target_exponent(p, alpha, n)
    if rng.random() < 0.3 and mesh.dim == 1:
        mu = PowerWeight(float(rng.uniform(-0.9, 2.0)), mesh.root_level).on(mesh)
    else:
        dens = random_positive_density(rng, mesh).values.copy()
        if rng.random() < 0.2:
            dens[rng.random(mesh.shape) < 0.3] = 0.0
        mu = MeasureView.from_masses(mesh, dens * mesh.cell_volume)
    f = random_nonneg_function(rng, mesh).values * np.where(rng.random(mesh.shape) < 0.3, -1.0, 1.0)
    f = StepFunction(mesh, f)
    op = OperatorSpec.maximal(mesh, alpha, mu)
    ratio, bound, ok = maximal_bound_check(op, f, p)
    Mf = op.apply(f).values[mu.masses > 0]
    weak_ok, worst_weak = True, 0.0
    if Mf.size and Mf.max() > 0:
        lo = max(Mf[Mf > 0].min() * 0.5, Mf.max() * 1e-6)
        for lam in np.geomspace(lo, Mf.max() * 1.1, cfg.lambdas):
            lhs, rhs, good = weak_type_check(op, f, float(lam))
            weak_ok &= good
            if rhs > 0:
                worst_weak = max(worst_weak, lhs / rhs)
    return {"trial": i, "p": p, "q": q, "ratio": ratio, "bound": bound, "ok": bool(ok),
            "weak_ok": bool(weak_ok), "worst_weak_quotient": worst_weak}


def verify_maximal(cfg: ExperimentConfig) -> tuple[dict, list[dict]]:
    n = cfg.n
    for p in cfg.p or []:
        target_exponent(p, cfg.alpha, n)
        if cfg.q is not None:
            maximal_constant(p, cfg.q, cfg.alpha, n)
    rows = _run(maximal_trial, cfg)
    violations = [r["trial"] for r in rows if not (r["ok"] and r["weak_ok"])]
    report = {
        "theorem": "maximal",
        "params": cfg.to_dict(),
        "constant": (maximal_constant(cfg.p[0], target_exponent(cfg.p[0], cfg.alpha, n), cfg.alpha, n)
                     if cfg.p and len(cfg.p) == 1 else None),
        "trials": len(rows),
        "ok_count": sum(r["ok"] for r in rows),
        "weak_ok_count": sum(r["weak_ok"] for r in rows),
        "max_ratio_over_bound": max((r["ratio"] / r["bound"] for r in rows), default=0.0),
        "max_weak_quotient": max((r["worst_weak_quotient"] for r in rows), default=0.0),
        "violations": violations,
        "ok": not violations,
    }
    return report, rows


# sparse CZ -------------------------------------------------------------------

def cz_trial(cfg: ExperimentConfig, i: int) -> dict:
    rng = _rng(cfg, i)
    mesh = cfg.mesh
    p = cfg.p[i % len(cfg.p)]
    S = sparse_from_function(random_nonneg_function(rng, mesh), mesh.root, cfg.a)
    w = random_weight(rng, mesh, *cz_power_range(p))
    rep = bound_check_cz(S, w, p, mesh, trials=cfg.restarts, seed=int(rng.integers(2**31)))
    row = {"trial": i, "p": p, "cubes": len(S), "weight": w.describe(),
           "weight_constant": rep.weight_constant, "weight_constant_dyadic": rep.weight_constant_dyadic,
           "norm_estimate": rep.norm_estimate.value, "bound": rep.bound, "ratio": rep.ratio, "ok": bool(rep.ok)}
    if cfg.chains and p >= 2:
        f, g = random_nonneg_function(rng, mesh), random_nonneg_function(rng, mesh)
        row["chain_monotone"] = proof_chain_cz(S, w, p, f, g).monotone
    if cfg.duality:
        n1, n2, ok = duality_check(S, w, p, mesh, trials=cfg.restarts, seed=int(rng.integers(2**31)))
        row.update(dual_n1=n1, dual_n2=n2, duality_ok=bool(ok))
    return row


def verify_cz(cfg: ExperimentConfig) -> tuple[dict, list[dict]]:
    if not cfg.p:
        raise DyadicInputError("verify-cz needs --p")
    for p in cfg.p:
        if not 1 < p < math.inf:
            raise DyadicInputError(f"p must exceed 1, got {p}")
    if Fraction(1) / Fraction(cfg.a).limit_denominator(2**20) > Fraction(1, 2):
        raise DyadicInputError("stopping factor a must be >= 2 for 1/2-sparse families")
    rows = _run(cz_trial, cfg)
    bad = [r["trial"] for r in rows
           if not r["ok"] or not r.get("chain_monotone", True) or not r.get("duality_ok", True)]
    report = {
        "theorem": "cz",
        "params": cfg.to_dict(),
        "constants": {str(p): {"c_p": cz_constant(p), "exponent": cz_exponent(p)} for p in cfg.p},
        "trials": len(rows),
        "ok_count": sum(r["ok"] for r in rows),
        "worst_ratio": max(r["ratio"] for r in rows),
        "chains_checked": sum("chain_monotone" in r for r in rows),
        "chains_monotone": sum(r.get("chain_monotone", False) for r in rows),
        "violations": bad,
        "ok": not bad,
    }
    if cfg.duality:
        report["worst_duality_gap"] = max(abs(r["dual_n1"] - r["dual_n2"]) / max(r["dual_n1"], r["dual_n2"])
                                          for r in rows)
    return report, rows


# sparse fractional -------------------------------------------------------------

def frac_trial(cfg: ExperimentConfig, i: int) -> dict:
    rng = _rng(cfg, i)
    mesh = cfg.mesh
    p = cfg.p[i % len(cfg.p)]
    q = target_exponent(p, cfg.alpha, mesh.dim)
    S = sparse_from_function(random_nonneg_function(rng, mesh), mesh.root, cfg.a)
    w = random_weight(rng, mesh, *frac_power_range(p, q))
    rep = bound_check_frac(S, w, p, cfg.alpha, mesh, trials=cfg.restarts, seed=int(rng.integers(2**31)))
    row = {"trial": i, "p": p, "q": q, "cubes": len(S), "weight": w.describe(),
           "weight_constant": rep.weight_constant, "weight_constant_dyadic": rep.weight_constant_dyadic,
           "norm_estimate": rep.norm_estimate.value, "bound": rep.bound, "ratio": rep.ratio, "ok": bool(rep.ok)}
    if cfg.chains:
        f, g = random_nonneg_function(rng, mesh), random_nonneg_function(rng, mesh)
        row["chain_monotone"] = proof_chain_frac(S, w, p, cfg.alpha, f, g).monotone
    return row


def verify_frac(cfg: ExperimentConfig) -> tuple[dict, list[dict]]:
    if not cfg.p:
        raise DyadicInputError("verify-frac needs --p")
    for p in cfg.p:
        require_unnat(p, cfg.alpha, cfg.n)
    rows = _run(frac_trial, cfg)
    bad = [r["trial"] for r in rows if not r["ok"] or not r.get("chain_monotone", True)]
    report = {
        "theorem": "frac",
        "params": cfg.to_dict(),
        "constants": {str(p): {"c_p_alpha": frac_constant(p, cfg.alpha, cfg.n),
                               "exponent": frac_exponent(p, cfg.alpha, cfg.n)} for p in cfg.p},
        "trials": len(rows),
        "ok_count": sum(r["ok"] for r in rows),
        "worst_ratio": max(r["ratio"] for r in rows),
        "chains_checked": sum("chain_monotone" in r for r in rows),
        "chains_monotone": sum(r.get("chain_monotone", False) for r in rows),
        "violations": bad,
        "ok": not bad,
    }
    return report, rows


# sparse decomposition -----------------------------------------------------------

def reverse_domination_constant(alpha: float, n: int, a: float = 2.0) -> float:
    """``a / (1 - 2^{-alpha})``: every dyadic cube's term is charged to its smallest stopping ancestor."""
    return a / (1.0 - 2.0**-alpha)


def decompose(f: StepFunction, a: float = 2.0, alphas=()) -> dict:
    mesh = f.mesh
    S = sparse_from_function(f, mesh.root, a)
    E = exceptional_sets(S, mesh)
    counts = {q: int(m.sum()) for q, m in E.items()}
    cells = {q: 2 ** (mesh.dim * (q.level - mesh.resolution_level)) for q in S.cubes}
    stacked = sum(m.astype(np.int64) for m in E.values())
    block = {
        "is_sparse": is_sparse(S.cubes, S.factor),
        "factor": float(S.factor),
        "cubes": len(S),
        "exceptional_disjoint": bool(stacked.max() <= 1),
        "min_E_fraction": min(counts[q] / cells[q] for q in S.cubes),
        "E_total_fraction": sum(counts.values()) / mesh.ncells,
        "domination": [],
    }
    for alpha in alphas:
        ID = OperatorSpec.frac_dyadic(mesh, alpha).apply(f).values
        IS = OperatorSpec.frac(S, mesh, alpha).apply(f).values
        pos = IS > 0
        block["domination"].append({
            "alpha": alpha,
            "sparse_le_dyadic": bool(np.all(IS <= ID * (1 + 1e-12))),
            "max_dyadic_over_sparse": float(np.max(ID[pos] / IS[pos])) if pos.any() else None,
            "candidate_constant": reverse_domination_constant(alpha, mesh.dim, a),
        })
    return {"family": S.to_dict(), "verification": block}
