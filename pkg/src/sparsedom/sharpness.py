"""Power-weight blow-up family for the exponent of the sparse CZ bound.

For ``0 < delta <= 1`` take ``w(x) = x^{(1-delta)(p-1)}`` on ``[0, 1)`` so that
``sigma = w^{1-p'} = x^{delta-1}``, the tower ``S = {[0, 2^-k)}`` and the witness
``f = 1`` in ``L^p(sigma)`` (equivalently ``x^{delta-1}`` in ``L^p(w)``).  The
sparse operator maps ``sigma`` to a function that is constant on each dyadic
shell ``[2^{-k-1}, 2^{-k})``, so the ratio is a finite sum of closed forms.
Logs keep the shell factors in range for towers thousands of levels deep.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .constants import conjugate, cz_constant, cz_exponent
from .errors import DepthInsufficientError, DyadicInputError

LN2 = math.log(2.0)


def tower_ap_constant(p: float, delta: float) -> float:
    """Common value of the A_p product on every tower cube: ``1 / ((b+1) delta^{p-1})``."""
    b = (1.0 - delta) * (p - 1.0)
    return 1.0 / ((b + 1.0) * delta ** (p - 1.0))


def _log_partial_sums(delta: float, depth: int) -> np.ndarray:
    """``log Σ_{j<=k} avg_{[0,2^-j)} sigma`` for ``k = 0..depth``."""
    k = np.arange(depth + 1, dtype=np.float64)
    c = 1.0 - delta
    if c == 0:
        return np.log(k + 1.0) - math.log(delta)
    # Σ_{j=0}^k 2^{jc} = (2^{(k+1)c} - 1) / (2^c - 1)
    return (k + 1) * c * LN2 + np.log1p(-np.exp(-(k + 1) * c * LN2)) - math.log(math.expm1(c * LN2)) - math.log(delta)


def tower_ratio(p: float, delta: float, depth: int) -> float:
    """``||T^S sigma||_{L^p(w)} / ||1||_{L^p(sigma)}`` for the depth-``depth`` tower."""
    if not 0 < delta <= 1:
        raise DyadicInputError("delta must lie in (0, 1]")
    if depth < 0:
        raise DyadicInputError("depth must be nonnegative")
    b1 = (1.0 - delta) * (p - 1.0) + 1.0
    logS = _log_partial_sums(delta, depth)
    k = np.arange(depth, dtype=np.float64)
    # w-mass of the shell [2^{-k-1}, 2^{-k}) and of the innermost cube [0, 2^{-depth})
    log_shell = -(k + 1) * b1 * LN2 + math.log(math.expm1(b1 * LN2) / b1)
    log_core = -depth * b1 * LN2 - math.log(b1)
    logs = np.concatenate([p * logS[:depth] + log_shell, [p * logS[depth] + log_core]])
    top = logs.max()
    num = math.log(math.fsum(np.exp(logs - top))) + top
    # ||1||_{L^p(sigma)}^p = sigma([0,1)) = 1/delta
    return math.exp((num + math.log(delta)) / p)


def auto_depth(delta: float) -> int:
    # shell contributions decay like 2^{-k delta}
    return max(64, math.ceil(40.0 / delta))


def converged_ratio(p: float, delta: float, depth: int | None = None, rtol: float = 0.01) -> tuple[float, int]:
    depth = auto_depth(delta) if depth is None else depth
    r0, r1 = tower_ratio(p, delta, depth), tower_ratio(p, delta, depth + 8)
    if abs(r1 - r0) > rtol * r1:
        raise DepthInsufficientError(
            f"delta={delta}: ratio moved {abs(r1 - r0) / r1:.3%} between depth {depth} and {depth + 8}"
        )
    return r0, depth


@dataclass
class SharpnessReport:
    p: float
    rows: list[dict] = field(default_factory=list)
    slope: float = float("nan")
    intercept: float = float("nan")

    @property
    def target(self) -> float:
        return cz_exponent(self.p)

    def to_dict(self) -> dict:
        return {
            "theorem": "cz-sharpness",
            "params": {"p": self.p},
            "constant": cz_constant(self.p),
            "target_exponent": self.target,
            "slope": self.slope,
            "intercept": self.intercept,
            "rows": self.rows,
        }


def fit_slope(log_a, log_n) -> tuple[float, float]:
    slope, intercept = np.polyfit(np.asarray(log_a), np.asarray(log_n), 1)
    return float(slope), float(intercept)


def sharpness(p: float, deltas, depth: int | None = None) -> SharpnessReport:
    if not 1 < p < math.inf:
        raise DyadicInputError("p must lie in (1, inf)")
    deltas = sorted({float(d) for d in deltas}, reverse=True)
    if not deltas or any(not 0 < d <= 1 for d in deltas):
        raise DyadicInputError("deltas must lie in (0, 1]")
    rep = SharpnessReport(p)
    c = cz_constant(p)
    for d in deltas:
        A = tower_ap_constant(p, d)
        N, used = converged_ratio(p, d, depth)
        rep.rows.append({
            "delta": d,
            "weight_constant": A,
            "norm_lower_bound": N,
            "ratio": N / (c * A ** cz_exponent(p)),
            "depth": used,
        })
    if len(deltas) >= 2:
        rep.slope, rep.intercept = fit_slope(
            [math.log(r["weight_constant"]) for r in rep.rows],
            [math.log(r["norm_lower_bound"]) for r in rep.rows],
        )
    return rep


def pp_over_p(p: float) -> float:
    return conjugate(p) / p
