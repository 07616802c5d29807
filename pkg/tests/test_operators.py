import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from oracles import brute_maximal, brute_operator, mesh_cube_boxes
from sparsedom.dyadic import DyadicGrid, cube
from sparsedom.errors import DyadicInputError
from sparsedom.experiments import random_nonneg_function, random_positive_density
from sparsedom.operators import (
    OperatorSpec,
    bilinear_form,
    cube_sum_form,
    maximal_bound_check,
    weak_type_check,
)
from sparsedom.sparse import SparseFamily, sparse_from_function
from sparsedom.stepfun import MeasureView, MeshSpec, StepFunction
from sparsedom.weights import StepWeight, tower

G1 = DyadicGrid.standard(1)
M1 = MeshSpec(1, 0, -1)
M_02 = MeshSpec(1, 1, -3)  # root [0, 2)
ONE = cube(G1, 0, (0,))
TWO = SparseFamily((ONE, cube(G1, -1, (0,))))


def test_cz_examples():
    f = StepFunction.constant(M1, 1)
    assert np.allclose(OperatorSpec.cz(SparseFamily((ONE,)), M1).apply(f).values, [1, 1])
    assert np.allclose(OperatorSpec.cz(TWO, M1).apply(f).values, [2, 1])


def test_frac_sparse_example():
    f = StepFunction.constant(M1, 1)
    out = OperatorSpec.frac(TWO, M1, 0.5).apply(f).values
    assert np.allclose(out, [1 + 2**-0.5, 1], rtol=1e-15)


def test_maximal_examples():
    f = StepFunction.indicator(M_02, ONE)
    m0 = OperatorSpec.maximal(M_02).apply(f).values
    assert np.allclose(m0, [1] * 8 + [0.5] * 8)
    mh = OperatorSpec.maximal(M_02, 0.5).apply(f).values
    assert np.allclose(mh, [1] * 8 + [2**-0.5] * 8)


def test_kind_validation():
    with pytest.raises(DyadicInputError):
        OperatorSpec("frac_sparse", M1, TWO, 0.0)
    with pytest.raises(DyadicInputError):
        OperatorSpec("cz_sparse", M1, None)
    with pytest.raises(DyadicInputError):
        OperatorSpec.frac_dyadic(M1, 1.0)
    with pytest.raises(DyadicInputError):
        OperatorSpec.cz(TWO, M1).apply(StepFunction.constant(M_02, 1))


@pytest.mark.parametrize("mesh", [MeshSpec(1, 0, -5), MeshSpec(2, 0, -3), MeshSpec(1, 2, -2)])
def test_linear_kinds_against_brute_force(mesh):
    rng = np.random.default_rng(7)
    for _ in range(3):
        f = random_nonneg_function(rng, mesh)
        S = sparse_from_function(f)
        alpha = float(rng.uniform(0.1, mesh.dim - 0.1))
        boxes_s = [(q.lower, q.upper, float(q.volume) ** (alpha / mesh.dim - 1)) for q in S]
        boxes_c = [(q.lower, q.upper, 1 / float(q.volume)) for q in S]
        boxes_d = [(lo, hi, float(v) ** (alpha / mesh.dim - 1)) for lo, hi, v in mesh_cube_boxes(mesh)]
        g = random_nonneg_function(rng, mesh)
        v = g.values
        assert np.allclose(OperatorSpec.cz(S, mesh).apply(g).values, brute_operator(mesh, v, boxes_c), rtol=1e-12)
        assert np.allclose(OperatorSpec.frac(S, mesh, alpha).apply(g).values, brute_operator(mesh, v, boxes_s),
                           rtol=1e-12)
        assert np.allclose(OperatorSpec.frac_dyadic(mesh, alpha).apply(g).values, brute_operator(mesh, v, boxes_d),
                           rtol=1e-12)


@pytest.mark.parametrize("mesh", [MeshSpec(1, 0, -5), MeshSpec(2, 1, -2)])
def test_maximal_against_brute_force(mesh):
    rng = np.random.default_rng(8)
    for alpha in (0.0, 0.4):
        dens = random_positive_density(rng, mesh).values.copy()
        dens[rng.random(mesh.shape) < 0.3] = 0
        masses = dens * mesh.cell_volume
        f = StepFunction(mesh, rng.normal(size=mesh.shape))
        op = OperatorSpec.maximal(mesh, alpha, MeasureView.from_masses(mesh, masses))
        assert np.allclose(op.apply(f).values, brute_maximal(mesh, f.values, masses, alpha), rtol=1e-12)


def test_bilinear_examples():
    f = StepFunction.constant(M1, 1)
    assert bilinear_form(OperatorSpec.cz(SparseFamily((ONE,)), M1), f, f) == pytest.approx(1)
    op = OperatorSpec.cz(TWO, M1)
    assert bilinear_form(op, f, f) == pytest.approx(1.5)
    assert cube_sum_form(op, f, f) == pytest.approx(1.5)


def test_weak_type_examples():
    f = StepFunction.indicator(M_02, ONE)
    assert weak_type_check(OperatorSpec.maximal(M_02), f, 0.75) == pytest.approx((1, 4 / 3, True))
    lhs, rhs, ok = weak_type_check(OperatorSpec.maximal(M_02), f, 1.0)
    assert lhs == 0 and ok
    lhs, rhs, ok = weak_type_check(OperatorSpec.maximal(M_02, 0.5), f, 0.9)
    assert lhs == 1 and rhs == pytest.approx((1 / 0.9) ** 2) and ok
    with pytest.raises(DyadicInputError):
        weak_type_check(OperatorSpec.maximal(M_02), f, 0)


def test_maximal_bound_examples():
    f = StepFunction.indicator(M_02, ONE)
    ratio, bound, ok = maximal_bound_check(OperatorSpec.maximal(M_02), f, 2)
    assert bound == pytest.approx(2) and ratio == pytest.approx(math.sqrt(1.25)) and ok
    _, bound, _ = maximal_bound_check(OperatorSpec.maximal(M_02, 0.5), f, 8 / 7)
    assert bound == pytest.approx(2)
    with pytest.raises(DyadicInputError):
        maximal_bound_check(OperatorSpec.maximal(M_02, 0.5), f, 3)
    with pytest.raises(DyadicInputError):
        maximal_bound_check(OperatorSpec.maximal(M_02), f, 1)


MESH = MeshSpec(1, 0, -6)
vals = arrays(np.float64, MESH.ncells, elements=st.floats(0, 10))
signed = arrays(np.float64, MESH.ncells, elements=st.floats(-10, 10))


def _ops(f):
    S = sparse_from_function(f) if f.values.any() else SparseFamily(tuple(tower(6)))
    return [OperatorSpec.cz(S, MESH), OperatorSpec.frac(S, MESH, 0.3), OperatorSpec.frac_dyadic(MESH, 0.7)]


@settings(max_examples=60, deadline=None)
@given(v=vals, u=vals)
def test_self_adjoint(v, u):
    f, g = StepFunction(MESH, v), StepFunction(MESH, u)
    for op in _ops(f)[:2]:
        a, b = bilinear_form(op, f, g), bilinear_form(op, g, f)
        assert a == pytest.approx(b, rel=1e-12, abs=1e-300)
        assert a == pytest.approx(cube_sum_form(op, f, g), rel=1e-10, abs=1e-300)


@settings(max_examples=60, deadline=None)
@given(v=vals, bump=vals)
def test_positive_and_monotone(v, bump):
    f, g = StepFunction(MESH, v), StepFunction(MESH, v + bump)
    ops = _ops(f) + [OperatorSpec.maximal(MESH, 0.0), OperatorSpec.maximal(MESH, 0.5)]
    for op in ops:
        a, b = op.apply(f).values, op.apply(g).values
        assert np.all(a >= 0)
        assert np.all(a <= b * (1 + 1e-12))


@settings(max_examples=60, deadline=None)
@given(v=signed, u=signed, a=st.floats(-5, 5), b=st.floats(-5, 5))
def test_linear_and_sublinear(v, u, a, b):
    f, g = StepFunction(MESH, v), StepFunction(MESH, u)
    for op in _ops(StepFunction(MESH, np.abs(v) + 1)):
        lhs = op.apply(a * f + b * g).values
        rhs = a * op.apply(f).values + b * op.apply(g).values
        scale = np.abs(a * op.apply(f.abs()).values) + np.abs(b * op.apply(g.abs()).values) + 1e-300
        assert np.all(np.abs(lhs - rhs) <= 1e-12 * scale + 1e-12 * np.abs(rhs))
    for alpha in (0.0, 0.5):
        M = OperatorSpec.maximal(MESH, alpha)
        assert np.all(M.apply(f + g).values <= (M.apply(f).values + M.apply(g).values) * (1 + 1e-12))


def test_weak_and_strong_type_batch():
    rng = np.random.default_rng(4)
    for trial in range(100):
        mesh = MESH if trial % 2 else MeshSpec(2, 0, -3)
        mu = MeasureView(StepWeight(random_positive_density(rng, mesh)), mesh)
        alpha = 0.0 if trial % 3 else 0.5
        op = OperatorSpec.maximal(mesh, alpha, mu)
        f = StepFunction(mesh, rng.normal(size=mesh.shape) * random_nonneg_function(rng, mesh).values)
        Mf = op.apply(f).values
        for lam in np.geomspace(Mf.min() + 1e-9, Mf.max() * 1.1, 20):
            assert weak_type_check(op, f, float(lam))[2]
        p = float(rng.uniform(1.05, 6 if alpha == 0 else mesh.dim / alpha))
        assert maximal_bound_check(op, f, p)[2]
