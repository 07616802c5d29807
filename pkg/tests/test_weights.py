
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from sparsedom.constants import (
    constant_identity_check,
    cz_constant,
    cz_exponent,
    frac_constant,
    frac_exponent,
    maximal_constant,
    target_exponent,
)
from sparsedom.dyadic import DyadicGrid, cube
from sparsedom.errors import DyadicInputError, NonIntegrableError
from sparsedom.stepfun import MeshSpec, StepFunction
from sparsedom.weights import (
    PowerWeight,
    StepWeight,
    ap_constant,
    ap_products,
    apq_constant,
    dual_weight,
    load_weight,
    tower,
    weight_from_dict,
)

G1 = DyadicGrid.standard(1)


def test_dual_weight_examples():
    m = MeshSpec(1, 0, -1)
    s = dual_weight(StepWeight(StepFunction.constant(m, 4)), 2)
    assert np.allclose(s.density.values, 0.25)
    assert dual_weight(PowerWeight(0.5), 2).a == pytest.approx(-0.5)
    assert dual_weight(PowerWeight(1.0), 3).a == pytest.approx(-0.5)


def test_dual_weight_non_integrable():
    # a(1-p') = 2 * (1 - 3/2)... with a=3, p=2: exponent -3
    with pytest.raises(NonIntegrableError):
        dual_weight(PowerWeight(3.0), 2)


def test_ap_constant_flat():
    m = MeshSpec(1, 0, -3)
    w = StepWeight(StepFunction.constant(m, 3.0))
    for p in (1.3, 2, 5):
        assert ap_constant(w, p, m.all_cubes()).value == pytest.approx(1, rel=1e-13)


def test_ap_constant_two_cell():
    m = MeshSpec(1, 0, -1)
    w = StepWeight(StepFunction(m, [2, 1]))
    rep = ap_constant(w, 2, m.all_cubes(), "dyadic")
    assert rep.value == pytest.approx(1.125, rel=1e-15)
    assert rep.argmax_cube == cube(G1, 0, (0,))
    assert rep.cube_set == "dyadic"


def test_ap_constant_power_tower():
    rep = ap_constant(PowerWeight(0.5), 2, tower(20), "tower")
    assert rep.value == pytest.approx(4 / 3, rel=1e-12)
    # every tower cube attains the value; ties resolve to the largest cube
    assert rep.argmax_cube == cube(G1, 0, (0,))
    assert np.allclose(ap_products(PowerWeight(0.5), 2, tower(20)), 4 / 3, rtol=1e-12)


def test_ap_constant_empty():
    with pytest.raises(DyadicInputError):
        ap_constant(PowerWeight(0.5), 2, [])


def test_apq_constant_constants():
    m = MeshSpec(1, 0, -3)
    for c in (1.0, 0.3, 7.0):
        w = StepWeight(StepFunction.constant(m, c))
        assert apq_constant(w, 8 / 7, 8 / 3, m.all_cubes()).value == pytest.approx(1, rel=1e-12)


def test_apq_power_closed_form_and_discretization():
    # a = 1/16: u = x^{aq} = x^{1/6}, sigma = x^{-a p'} = x^{-1/2}
    a, p, q = 1 / 16, 8 / 7, 8 / 3
    w = PowerWeight(a)
    closed = (1 / (a * q + 1)) * (1 / (1 - a * 8)) ** (q / 8)
    rep = apq_constant(w, p, q, tower(12))
    assert rep.value == pytest.approx(closed, rel=1e-12)
    assert closed == pytest.approx(6 / 7 * 2 ** (1 / 3), rel=1e-14)

    mesh = MeshSpec(1, 0, -20)
    mid = (np.arange(mesh.ncells) + 0.5) * 2.0**mesh.resolution_level
    disc = StepWeight(StepFunction(mesh, mid**a))
    for c in tower(4):
        assert apq_constant(disc, p, q, [c]).value == pytest.approx(closed, rel=1e-3)


def test_apq_rejects_non_integrable():
    # a = 1/8 at p = 8/7 makes w^{-p'} = 1/x
    with pytest.raises(NonIntegrableError):
        apq_constant(PowerWeight(1 / 8), 8 / 7, 8 / 3, tower(3))


def test_weight_json(tmp_path):
    p = tmp_path / "w.json"
    p.write_text('{"kind": "power", "a": 0.25, "root_level": 1}')
    w = load_weight(p)
    assert isinstance(w, PowerWeight) and w.a == 0.25 and w.root_level == 1
    m = MeshSpec(1, 0, -1)
    s = weight_from_dict(StepWeight(StepFunction(m, [1, 2])).to_dict())
    assert isinstance(s, StepWeight)


def test_power_cell_masses_match_cube_masses():
    w = PowerWeight(-0.7, 2)
    mesh = MeshSpec(1, 1, -6)
    masses = w.cell_masses(mesh)
    for c in mesh.cubes(-6):
        assert masses[c.index[0]] == pytest.approx(w.cube_mass(c), rel=1e-12)
    assert masses.sum() == pytest.approx(2**0.3 / 0.3, rel=1e-12)


def test_step_weight_must_be_positive():
    with pytest.raises(DyadicInputError):
        StepWeight(StepFunction(MeshSpec(1, 0, -1), [1, 0]))


# exponent bookkeeping ---------------------------------------------------------

def test_constant_identity_examples():
    assert constant_identity_check(2, 2, 0, 1)
    assert constant_identity_check(8 / 7, 8 / 3, 0.5, 1)
    assert constant_identity_check(4 / 3, 4, 1, 2)


def test_constant_identity_bad_relation():
    with pytest.raises(DyadicInputError):
        constant_identity_check(2, 3, 0, 1)


def test_maximal_constant_examples():
    assert maximal_constant(2, 2, 0, 1) == pytest.approx(2)
    assert maximal_constant(8 / 7, 8 / 3, 0.5, 1) == pytest.approx(2)


def test_theorem_constants():
    assert cz_constant(2) == pytest.approx(8) and cz_exponent(2) == 1
    assert cz_constant(3) == pytest.approx(18) and cz_exponent(3) == 1
    assert cz_constant(1.5) == pytest.approx(18) and cz_exponent(1.5) == pytest.approx(2)
    assert frac_constant(8 / 7, 0.5, 1) == pytest.approx(8 * (4 / 3) ** 0.5 * 2**1.5, rel=1e-14)
    assert frac_constant(8 / 7, 0.5, 1) == pytest.approx(26.13, abs=5e-3)
    assert frac_exponent(8 / 7, 0.5, 1) == pytest.approx(1.5)
    assert target_exponent(8 / 7, 0.5, 1) == pytest.approx(8 / 3)


# invariants ---------------------------------------------------------------------

MESH = MeshSpec(1, 0, -4)
dens = arrays(np.float64, MESH.ncells, elements=st.floats(0.01, 100))


@settings(max_examples=80, deadline=None)
@given(v=dens, p=st.floats(1.1, 6))
def test_duality_of_constants(v, p):
    w = StepWeight(StepFunction(MESH, v))
    pp = p / (p - 1)
    cubes = list(MESH.all_cubes())
    lhs = ap_constant(dual_weight(w, p), pp, cubes).value
    assert lhs == pytest.approx(ap_constant(w, p, cubes).value ** (1 / (p - 1)), rel=1e-10)


@settings(max_examples=80, deadline=None)
@given(v=dens, p=st.floats(1.1, 6), c=st.floats(1e-3, 1e3), cut=st.integers(1, 30))
def test_monotone_scale_invariant_and_at_least_one(v, p, c, cut):
    w = StepWeight(StepFunction(MESH, v))
    cubes = list(MESH.all_cubes())
    full = ap_constant(w, p, cubes).value
    assert ap_constant(w, p, cubes[:cut]).value <= full
    assert ap_constant(w.scaled(c), p, cubes).value == pytest.approx(full, rel=1e-10)
    assert min(ap_products(w, p, cubes)) >= 1 - 1e-12
    assert full >= 1 - 1e-12


@settings(max_examples=80, deadline=None)
@given(a=st.floats(-0.95, 3), p=st.floats(1.1, 6), c=st.floats(0.1, 10))
def test_power_scale_invariance(a, p, c):
    if a * (1 - p / (p - 1)) <= -0.99:
        return
    base = ap_constant(PowerWeight(a), p, tower(5)).value
    assert ap_constant(PowerWeight(a).scaled(c), p, tower(5)).value == pytest.approx(base, rel=1e-10)
    b = a
    s = a * (1 - p / (p - 1))
    assert base == pytest.approx(1 / ((b + 1) * (s + 1) ** (p - 1)), rel=1e-10)
