from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from qkahler.graded import BlockOperator
from qkahler.hermitian import (
    AdjointnessViolated, HermitianStructure, check_adjoint, codifferential, conjugation_defect, dual_inner_product,
    inner_product, lefschetz_adjoint_residual, stokes_residual, twisted_hodge, twisted_hodge_bidegree_ok,
    twisted_hodge_defect,
)
from qkahler.lefschetz import TOTAL_DEGREE
from qkahler.linalg import GaussianRational, Matrix

KS = [-3, -2, 0, 1, 2]
small = st.fractions(min_value=-2, max_value=2, max_denominator=3)
gauss = st.builds(GaussianRational, small, small)


def random_vector(draw, space):
    return {l: [draw(gauss) for _ in range(space.block_dim(l))] for l in space.labels}


@pytest.mark.parametrize("k", KS)
def test_conjugation_is_invertible(model, k):
    assert conjugation_defect(model.bundle(k).data) == 0


@pytest.mark.parametrize("k", KS)
def test_twisted_hodge_squares_to_parity(model, k):
    data = model.bundle(k).data
    assert twisted_hodge_defect(data) == 0
    assert twisted_hodge_bidegree_ok(data)


@pytest.mark.parametrize("k", [-1, 2])
def test_total_degree_hodge_does_not_commute_with_conjugation(model, k):
    # i^k is conjugated by C on degree one, so the square picks up +1 instead of -1 there
    data = model.bundle(k).data
    assert twisted_hodge_defect(data, TOTAL_DEGREE) == 2.0
    assert twisted_hodge_bidegree_ok(data, TOTAL_DEGREE)


@pytest.mark.parametrize("k", KS)
def test_inner_products_positive_and_hermitian(model, k):
    data = model.bundle(k).data
    for inner in (inner_product(data), dual_inner_product(data)):
        assert inner.positive()
        assert all((G - G.H).max_abs() == 0 for G in inner.grams.values())


@pytest.mark.parametrize("k", [-2, 1])
@settings(max_examples=20)
@given(data=st.data())
def test_inner_product_matches_form_integral(small_model, k, data):
    # <a, b> = integral of a ^ sbar(b), the second route through the polynomial engine
    m = small_model
    bd = m.bundle(k).data
    a = random_vector(data.draw, bd.V.space)
    b = random_vector(data.draw, bd.V.space)
    s, _ = twisted_hodge(bd)
    wedge = m.forms.mul(m.vector_to_form(k, a), m.vector_to_form(k, s.apply(b), "W"))
    assert m.forms.integral(wedge) == inner_product(bd).value(a, b)


@pytest.mark.parametrize("k", [-1, 0, 2])
@settings(max_examples=20)
@given(data=st.data())
def test_inner_product_sesquilinear(small_model, k, data):
    inner = inner_product(small_model.bundle(k).data)
    u = random_vector(data.draw, inner.space)
    v = random_vector(data.draw, inner.space)
    assert inner.value(u, v) == inner.value(v, u).conjugate()
    if any(x != 0 for xs in u.values() for x in xs):
        uu = inner.value(u, u)
        assert uu.imag == 0 and uu.real > 0


@pytest.mark.parametrize("k", KS)
def test_codifferentials_are_adjoints(model, k):
    data = model.bundle(k).data
    inner = inner_product(data)
    assert check_adjoint(inner, data.dbar_V, codifferential(data, data.dbar_W)) == 0
    del_V = model.bundle(k).del_V
    assert check_adjoint(inner, del_V, codifferential(data, data.del_W)) == 0


def test_adjointness_violation_is_reported(model):
    data = model.bundle(1).data
    inner = inner_product(data)
    wrong = codifferential(data, data.dbar_W).scale(2)
    with pytest.raises(AdjointnessViolated) as err:
        check_adjoint(inner, data.dbar_V, wrong)
    assert err.value.residual > 0


@pytest.mark.parametrize("k", KS)
def test_lefschetz_adjoint(model, k):
    assert lefschetz_adjoint_residual(model.bundle(k).data) == 0


@pytest.mark.parametrize("k", KS)
def test_stokes(model, k):
    b = model.bundle(k)
    assert stokes_residual(b.data, b.data.dbar_V, b.data.dbar_W) == 0
    assert stokes_residual(b.data, b.del_V, b.data.del_W) == 0


def test_stokes_detects_a_wrong_sign(model):
    b = model.bundle(2)
    assert stokes_residual(b.data, b.data.dbar_V.scale(-1), b.data.dbar_W) > 0


@pytest.mark.parametrize("k", [-3, 0, 1, 4])
def test_hermitian_structure(model, k):
    h = model.hermitian_structure(k)
    assert h.symmetry_residual() == 0
    assert h.positive()
    assert set(h.blocks) == {l for l in model.labels if l >= Fraction(abs(k), 2) and (l - Fraction(k, 2)).denominator == 1}
    for m in h.normalized().blocks.values():
        assert sum(m.rows[i][i] for i in range(m.nrows)) == 1


def test_hermitian_structure_rejects_indefinite():
    h = HermitianStructure({0: Matrix([[1, 0], [0, -1]], 2, 2)})
    assert h.symmetry_residual() == 0
    assert not h.positive()


def test_adjoint_refuses_antilinear(model):
    data = model.bundle(0).data
    with pytest.raises(ValueError):
        inner_product(data).adjoint(data.C)
    ident = BlockOperator.identity(data.V.space)
    assert check_adjoint(inner_product(data), ident, ident) == 0
