from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from qkahler.linalg import I_EXACT
from qkahler.qcp1.algebra import CoordinateAlgebra, monomials, weight
from qkahler.qcp1.forms import FRAMES, FormAlgebra

Q = Fraction(4, 5)
ALG = CoordinateAlgebra(Q)
FA = FormAlgebra(ALG)
KEYS = monomials(3)
coef = st.fractions(min_value=-3, max_value=3, max_denominator=3)


# coefficient weight of a frame-left form in the twist-k bundle
SHIFT = {"": 0, "+": -2, "-": 2, "+-": 0}


@st.composite
def forms(draw, frames=FRAMES, k=None):
    out = {}
    for fr in draw(st.lists(st.sampled_from(frames), min_size=1, max_size=2, unique=True)):
        pool = KEYS if k is None else [m for m in KEYS if weight(m) == k + SHIFT[fr]]
        keys = draw(st.lists(st.sampled_from(pool), min_size=1, max_size=2, unique=True))
        y = {m: c for m in keys if (c := draw(coef)) != 0}
        if y:
            out[fr] = y
    return out


def homogeneous(degree):
    return forms(tuple(fr for fr in FRAMES if FA.degree(fr) == degree))


def sign(deg):
    return -1 if deg % 2 else 1


@given(forms())
def test_dbar_and_del_square_to_zero(w):
    assert FA.is_zero(FA.dbar(FA.dbar(w)))
    assert FA.is_zero(FA.delta(FA.delta(w)))


@given(forms(k=0))
def test_d_squares_to_zero_on_the_base(w):
    assert FA.is_zero(FA.d(FA.d(w)))
    assert FA.is_zero(FA.add((1, FA.dbar(FA.delta(w))), (1, FA.delta(FA.dbar(w)))))


@pytest.mark.parametrize("k", [-3, -1, 1, 2, 3])
@given(data=st.data())
def test_anticommutator_is_curvature_on_twisted_functions(k, data):
    # on weight k: (del dbar + dbar del) y = -q^{-k} [k]_q e^+ e^- y
    w = data.draw(forms(("",), k=k))
    y = w.get("", {})
    qk = (Q ** k - Q ** -k) / (Q - 1 / Q)
    lhs = FA.add((1, FA.dbar(FA.delta(w))), (1, FA.delta(FA.dbar(w))))
    assert FA.equal(lhs, FA.form("+-", {m: -Q ** -k * qk * v for m, v in y.items()}))


@given(st.integers(0, 2), st.data())
def test_leibniz(deg, data):
    w = data.draw(homogeneous(deg))
    eta = data.draw(forms())
    for op in (FA.dbar, FA.delta):
        lhs = op(FA.mul(w, eta))
        rhs = FA.add((1, FA.mul(op(w), eta)), (sign(deg), FA.mul(w, op(eta))))
        assert FA.equal(lhs, rhs)


@given(forms())
def test_star_relation(w):
    # del(w*) = (dbar w)*
    assert FA.equal(FA.delta(FA.star(w)), FA.star(FA.dbar(w)))
    assert FA.equal(FA.star(FA.star(w)), w)


@given(st.integers(0, 2), st.integers(0, 2), st.data())
def test_star_graded_antimultiplicative(d1, d2, data):
    w = data.draw(homogeneous(d1))
    eta = data.draw(homogeneous(d2))
    lhs = FA.star(FA.mul(w, eta))
    rhs = FA.mul(FA.star(eta), FA.star(w))
    assert FA.equal(lhs, FA.add((sign(d1 * d2), rhs)))


@given(homogeneous(1))
def test_stokes(w):
    assert FA.integral(FA.d(w)) == 0
    assert FA.integral(FA.dbar(w)) == 0


def test_kahler_form():
    kappa = FA.kappa()
    assert FA.equal(FA.star(kappa), kappa)
    assert FA.is_zero(FA.d(kappa))
    assert FA.integral(kappa) == 1
    assert FA.vol(kappa) == {(0, 0, 0, 0): 1}


@pytest.mark.parametrize("word", ["", "ad", "bc", "abcd"])
def test_kahler_form_central_on_weight_zero(word):
    y = ALG.from_word(word) if word else ALG.one()
    assert FA.equal(FA.mul(FA.kappa(), FA.form("", y)), FA.mul(FA.form("", y), FA.kappa()))


@pytest.mark.parametrize("a,b,c", [("+", "-", 1), ("-", "+", -Q * Q)])
def test_frame_products(a, b, c):
    prod = FA.mul({a: ALG.one()}, {b: ALG.one()})
    assert prod == {"+-": {(0, 0, 0, 0): c}}
    assert FA.is_zero(FA.mul({a: ALG.one()}, {a: ALG.one()}))


def test_frames_twist_coefficients():
    y = ALG.from_word("b")
    # y e^+ = e^+ (K^-1 > y) and b has weight 1
    right = FA.mul({"": y}, {"+": ALG.one()})
    assert right == {"+": {m: v / Q for m, v in y.items()}}
    assert FA.right_form(y, "+") == right
    assert FA.mul({"+": ALG.one()}, {"": y}) == {"+": y}


def test_volume_is_imaginary_unit_times_coefficient():
    f = {"+-": ALG.from_word("bc")}
    assert FA.vol(f) == {k: I_EXACT * v for k, v in ALG.from_word("bc").items()}
    with pytest.raises(ValueError):
        FA.homogeneous_degree({"": ALG.one(), "+": ALG.one()})
