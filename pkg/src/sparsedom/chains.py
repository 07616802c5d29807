"""Step-by-step replays of the two sparse bounds on concrete data.

Each replay evaluates the pairing ``<T(f sigma), g>`` and every intermediate
upper bound of the argument, so that a failure pinpoints the broken step.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .constants import conjugate, cz_constant, cz_exponent, frac_constant, frac_exponent, require_unnat, target_exponent
from .errors import DegenerateInputError, DyadicInputError
from .operators import OperatorSpec
from .sparse import SparseFamily, exceptional_sets
from .stepfun import StepFunction
from .weights import Weight, ap_constant, apq_constant, dual_weight

RTOL = 1e-10

CZ_LABELS = (
    "pairing <T(f sigma), g>_w",
    "multiply/divide by the A_p product",
    "|Q| <= 2|E(Q)| and sigma(Q)^(2-p) <= sigma(E(Q))^(2-p)",
    "Hoelder on E(Q)",
    "discrete Hoelder + maximal functions",
    "maximal bound: c_p [w]^max(1,p'/p) |f| |g|",
)

FRAC_LABELS = (
    "pairing <I(f sigma), g>_u",
    "multiply/divide by the A_pq product",
    "|Q| <= 2|E(Q)| and sigma(Q)^(1-e) <= sigma(E(Q))^(1-e)",
    "Hoelder with r, r' on E(Q)",
    "discrete Hoelder + maximal functions",
    "theorem bound: c_p,alpha [w]^((1-alpha/n)max(1,p'/q)) |f| |g|",
)


@dataclass
class ChainReport:
    labels: tuple[str, ...]
    values: tuple[float, ...]
    params: dict

    @property
    def monotone(self) -> bool:
        return all(a <= b * (1 + RTOL) + 1e-300 for a, b in zip(self.values, self.values[1:]))

    def first_violation(self) -> int | None:
        for i, (a, b) in enumerate(zip(self.values, self.values[1:])):
            if a > b * (1 + RTOL) + 1e-300:
                return i
        return None

    def to_dict(self) -> dict:
        return {"labels": list(self.labels), "values": list(self.values), "monotone": self.monotone, **self.params}


def _cube_data(S: SparseFamily, f: StepFunction, g: StepFunction, src, tgt):
    """Per-cube masses ``|Q|, src(Q), tgt(Q), ∫_Q f src, ∫_Q g tgt`` and the same for ``E(Q)``."""
    mesh = f.mesh
    E = exceptional_sets(S, mesh)
    s, t = src.masses, tgt.masses
    rows = []
    for q in S.cubes:
        sl = mesh.slices(q)
        e = E[q]
        e_vol = float(e.sum()) * mesh.cell_volume
        s_e = float(s[e].sum())
        if s_e <= 0 or float(t[e].sum()) <= 0:
            raise DegenerateInputError(f"weight of E({q!r}) vanishes")
        rows.append((
            float(q.volume),
            float(s[sl].sum()),
            float(t[sl].sum()),
            float(np.sum(f.values[sl] * s[sl])),
            float(np.sum(g.values[sl] * t[sl])),
            e_vol,
            s_e,
            float(t[e].sum()),
        ))
    return np.array(rows).T


def _check_inputs(S: SparseFamily, f: StepFunction, g: StepFunction) -> None:
    if f.mesh != g.mesh:
        raise DyadicInputError("f and g live on different meshes")
    if np.any(f.values < 0) or np.any(g.values < 0):
        raise DyadicInputError("the chains are stated for nonnegative f and g")
    if S.factor > 0.5:
        raise DyadicInputError("the chains need a 1/2-sparse family")


def proof_chain_cz(S: SparseFamily, w: Weight, p: float, f: StepFunction, g: StepFunction) -> ChainReport:
    if p < 2:
        raise DyadicInputError("the direct argument covers p >= 2; use duality_check below 2")
    _check_inputs(S, f, g)
    mesh = f.mesh
    pp = conjugate(p)
    sigma = dual_weight(w, p)
    sv, wv = sigma.on(mesh), w.on(mesh)
    A = ap_constant(w, p, S.cubes, "sparse").value

    op = OperatorSpec.cz(S, mesh)
    q0 = float(np.sum(op.apply_masses((f.values * sv.masses).ravel()) * g.values.ravel() * wv.masses.ravel()))

    vol, sQ, wQ, fs, gw, eV, sE, wE = _cube_data(S, f, g, sv, wv)
    a_s, a_w = fs / sQ, gw / wQ
    two = 2.0 ** (p - 1)
    q1 = A * np.sum(a_s * a_w * vol ** (p - 1) * sQ ** (2 - p))
    q2 = two * A * np.sum(a_s * a_w * eV ** (p - 1) * sE ** (2 - p))
    q3 = two * A * np.sum(a_s * a_w * sE ** (1 / p) * wE ** (1 / pp))
    Ms = OperatorSpec.maximal(mesh, 0.0, sv).apply(f).values
    Mw = OperatorSpec.maximal(mesh, 0.0, wv).apply(g).values
    norm = lambda v, r, m: float(np.sum(v**r * m)) ** (1 / r)
    q4 = two * A * norm(Ms, p, sv.masses) * norm(Mw, pp, wv.masses)
    q5 = cz_constant(p) * A ** cz_exponent(p) * norm(f.values, p, sv.masses) * norm(g.values, pp, wv.masses)
    return ChainReport(CZ_LABELS, (q0, float(q1), float(q2), float(q3), q4, q5), {"p": p, "weight_constant": A})


def _inverse(w: Weight) -> Weight:
    return w.power(-1.0)


def proof_chain_frac(S: SparseFamily, w: Weight, p: float, alpha: float, f: StepFunction,
                     g: StepFunction) -> ChainReport:
    """Replay of the fractional bound.

    When ``p'/q > 1 - alpha/n`` the argument runs on the adjoint problem:
    ``L^{q'}(w^{-q'}) -> L^{p'}(w^{-p'})`` with weight ``1/w`` and ``f``, ``g``
    exchanged, which lands in the directly handled case.
    """
    _check_inputs(S, f, g)
    mesh = f.mesh
    n = mesh.dim
    require_unnat(p, alpha, n)
    q = target_exponent(p, alpha, n)
    theta = 1.0 - alpha / n
    pp = conjugate(p)

    u0, s0 = w.power(q).on(mesh), w.power(-pp).on(mesh)
    norm = lambda v, r, m: float(np.sum(v**r * m)) ** (1 / r)
    A0 = apq_constant(w, p, q, S.cubes, "sparse").value
    final = (frac_constant(p, alpha, n) * A0 ** frac_exponent(p, alpha, n)
             * norm(f.values, p, s0.masses) * norm(g.values, conjugate(q), u0.masses))

    if pp / q <= theta * (1 + 1e-12):
        case, P, W, F, G = "direct", p, w, f, g
    else:
        case, P, W, F, G = "dual", conjugate(q), _inverse(w), g, f
    Q = target_exponent(P, alpha, n)
    PP = conjugate(P)
    u, sigma = W.power(Q).on(mesh), W.power(-PP).on(mesh)
    A = apq_constant(W, P, Q, S.cubes, "sparse").value
    e = Q / PP * theta

    op = OperatorSpec.frac(S, mesh, alpha)
    q0 = float(np.sum(op.apply_masses((F.values * sigma.masses).ravel()) * G.values.ravel() * u.masses.ravel()))
    vol, sQ, uQ, fs, gu, eV, sE, uE = _cube_data(S, F, G, sigma, u)
    a_s = fs / sQ
    a_u = uQ ** (alpha / n - 1) * gu
    q1 = A**theta * np.sum(a_s * a_u * vol**e * sQ ** (1 - e))
    q2 = 2.0**e * A**theta * np.sum(a_s * a_u * eV**e * sE ** (1 - e))
    q3 = 2.0**e * A**theta * np.sum(a_s * a_u * sE ** (1 / P) * uE ** (1 / PP))
    Ms = OperatorSpec.maximal(mesh, 0.0, sigma).apply(F).values
    Mu = OperatorSpec.maximal(mesh, alpha, u).apply(G).values
    q4 = 2.0**e * A**theta * norm(Ms, P, sigma.masses) * norm(Mu, PP, u.masses)
    return ChainReport(
        FRAC_LABELS,
        (q0, float(q1), float(q2), float(q3), q4, final),
        {"p": p, "q": q, "alpha": alpha, "case": case, "weight_constant": A0},
    )
