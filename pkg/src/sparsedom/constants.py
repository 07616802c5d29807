"""Exponent bookkeeping and the closed-form constants of the three bounds."""

from __future__ import annotations

import math

from .errors import AdmissibilityError, DyadicInputError


def conjugate(p: float) -> float:
    if p <= 1:
        raise DyadicInputError(f"p must exceed 1, got {p}")
    if math.isinf(p):
        return 1.0
    return p / (p - 1.0)


def target_exponent(p: float, alpha: float, n: int) -> float:
    """``q`` with ``1/q = 1/p - alpha/n``; ``inf`` at the endpoint ``p = n/alpha``."""
    if not 0 <= alpha < n:
        raise DyadicInputError(f"need 0 <= alpha < n, got alpha={alpha}, n={n}")
    if p <= 1:
        raise DyadicInputError(f"p must exceed 1, got {p}")
    inv = 1.0 / p - alpha / n
    if inv < -1e-15:
        raise DyadicInputError(f"p={p} exceeds n/alpha={n / alpha}")
    return math.inf if inv <= 1e-15 else 1.0 / inv


def check_exponents(p: float, q: float, alpha: float, n: int, rtol: float = 1e-12) -> None:
    if not 0 <= alpha < n:
        raise DyadicInputError(f"need 0 <= alpha < n, got alpha={alpha}, n={n}")
    if p <= 1:
        raise DyadicInputError(f"p must exceed 1, got {p}")
    if alpha > 0 and p > n / alpha * (1 + rtol):
        raise DyadicInputError(f"p={p} exceeds n/alpha={n / alpha}")
    lhs = 0.0 if math.isinf(q) else 1.0 / q
    rhs = 1.0 / p - alpha / n
    if abs(lhs - rhs) > rtol * max(1.0 / p, 1e-300):
        raise DyadicInputError(f"1/q = {lhs} but 1/p - alpha/n = {rhs}")


def maximal_constant(p: float, q: float, alpha: float, n: int) -> float:
    """``(1 + p'/q)**(1 - alpha/n)``, the L^p(mu) -> L^q(mu) bound for the universal maximal operator."""
    check_exponents(p, q, alpha, n)
    ratio = 0.0 if math.isinf(q) else conjugate(p) / q
    return (1.0 + ratio) ** (1.0 - alpha / n)


def constant_identity_check(p: float, q: float, alpha: float, n: int, rtol: float = 1e-12) -> bool:
    """Whether ``1 + p'/q == p' (1 - alpha/n)`` to relative tolerance ``rtol``."""
    check_exponents(p, q, alpha, n)
    pp = conjugate(p)
    lhs = 1.0 + (0.0 if math.isinf(q) else pp / q)
    rhs = pp * (1.0 - alpha / n)
    return abs(lhs - rhs) <= rtol * max(abs(lhs), abs(rhs))


def cz_constant(p: float) -> float:
    pp = conjugate(p)
    return p * pp * 2.0 ** max(p / pp, pp / p)


def cz_exponent(p: float) -> float:
    pp = conjugate(p)
    return max(1.0, pp / p)


def unnat_condition(p: float, alpha: float, n: int) -> tuple[bool, str]:
    """Evaluate ``min(p'/q, q/p') <= 1 - alpha/n``; returns the verdict and a printable form."""
    q = target_exponent(p, alpha, n)
    pp = conjugate(p)
    a, b = pp / q, q / pp
    lhs, rhs = min(a, b), 1.0 - alpha / n
    ok = lhs <= rhs * (1 + 1e-12)
    text = (
        f"min(p'/q, q/p') <= 1 - alpha/n: min({a:.6g}, {b:.6g}) = {lhs:.6g} "
        f"{'<=' if ok else '>'} {rhs:.6g}"
    )
    return ok, text


def require_unnat(p: float, alpha: float, n: int) -> None:
    if not 0 < alpha < n:
        raise AdmissibilityError(f"need 0 < alpha < n, got alpha={alpha}, n={n}")
    if not 1 < p < n / alpha:
        raise AdmissibilityError(f"need 1 < p < n/alpha = {n / alpha}, got p={p}")
    ok, text = unnat_condition(p, alpha, n)
    if not ok:
        raise AdmissibilityError("condition violated: " + text)


def frac_constant(p: float, alpha: float, n: int) -> float:
    """``p' (1 + q/p')**(1-alpha/n) * 2**((1-alpha/n) max(q/p', p'/q))``."""
    q = target_exponent(p, alpha, n)
    pp = conjugate(p)
    theta = 1.0 - alpha / n
    return pp * (1.0 + q / pp) ** theta * 2.0 ** (theta * max(q / pp, pp / q))


def frac_exponent(p: float, alpha: float, n: int) -> float:
    q = target_exponent(p, alpha, n)
    return (1.0 - alpha / n) * max(1.0, conjugate(p) / q)
