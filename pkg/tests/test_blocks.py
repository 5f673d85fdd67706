from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from qkahler.linalg import Approx, is_positive_definite
from qkahler.qcp1.algebra import CoordinateAlgebra, monomials
from qkahler.qcp1.blocks import (
    TRIANGULAR, UNITARY, PeterWeyl, block_relation_residuals, build_blocks, half_range, haar_state,
    line_bundle, quantum_minor_table,
)

Q = Fraction(4, 5)
ALG = CoordinateAlgebra(Q)
PW = PeterWeyl(ALG, 3)
coef = st.fractions(min_value=-3, max_value=3, max_denominator=4)


@pytest.mark.parametrize("q,lmax", [(Q, 3), (Fraction(2, 3), Fraction(3, 2)), (Fraction(7, 3), 2)])
def test_uq_relations_on_blocks(q, lmax):
    for blk in build_blocks(q, lmax):
        assert block_relation_residuals(blk, q) == {"[E,F]": 0.0, "KEK^-1": 0.0, "KFK^-1": 0.0}


@pytest.mark.parametrize("l", [Fraction(k, 2) for k in range(7)])
def test_triangular_ladder_coefficients(l):
    for n in half_range(l):
        w = int(2 * n)
        e = PW.action_on_slice("E", l, w)
        f = PW.action_on_slice("F", l, w)
        assert e == (ALG.qint(int(l - n)) if n < l else 0)
        assert f == (ALG.qint(int(l + n)) if n > -l else 0)
        assert PW.action_on_slice("K", l, w) == Q ** w


def test_block_sizes():
    assert [len(PW.blocks[l].polys) for l in PW.labels] == [(k + 1) ** 2 for k in range(7)]
    # Peter-Weyl: monomials of degree <= 6 match the block dimensions
    assert len(monomials(6)) == sum((k + 1) ** 2 for k in range(7))


@given(st.lists(st.tuples(st.sampled_from(monomials(4)), coef), min_size=1, max_size=4))
def test_coordinates_round_trip(terms):
    p = ALG.add(*((c, ALG.monomial(k)) for k, c in terms))
    back = ALG.add(*((c, PW.poly(*key)) for key, c in PW.coords(p).items()))
    assert ALG.equal(back, p)


@pytest.mark.parametrize("l,w", [(Fraction(1, 2), 1), (1, 0), (Fraction(3, 2), -1), (2, 2), (3, -4)])
def test_star_matrix_matches_engine(l, w):
    l = Fraction(l)
    S = PW.star_matrix(l, w)
    for c, p in enumerate(PW.slice_basis(l, w)):
        img = PW.slice_poly(l, -w, S.column(c))
        assert ALG.equal(img, ALG.star(p))


@pytest.mark.parametrize("l,w", [(0, 0), (1, 2), (Fraction(3, 2), -3), (3, 0)])
def test_haar_table_matches_engine(l, w):
    l = Fraction(l)
    T = PW.haar_table(l, w)
    for i, x in enumerate(PW.slice_basis(l, w)):
        for j, y in enumerate(PW.slice_basis(l, -w)):
            assert T.rows[i][j] == ALG.haar(ALG.mul(x, y))


def test_haar_state_gram_is_diagonal_and_positive():
    pw = PeterWeyl(ALG, Fraction(3, 2))
    state = haar_state(pw)
    assert state.positive()
    for l in pw.labels:
        blk = pw.blocks[l]
        keys = [(m, n) for m in blk.indices for n in blk.indices]
        for a in keys:
            for b in keys:
                if a != b:
                    assert ALG.haar(ALG.mul(blk.polys[b], ALG.star(blk.polys[a]))) == 0
        assert is_positive_definite(state.gram(l))


@pytest.mark.parametrize("k", range(-5, 6))
def test_line_bundle_dims(k):
    lb = line_bundle(k, 3)
    for l, d in lb.dims.items():
        expected = int(2 * l) + 1 if l >= Fraction(abs(k), 2) and (l - Fraction(k, 2)).denominator == 1 else 0
        assert d == expected
    assert min(lb.labels) == Fraction(abs(k), 2)


@pytest.mark.parametrize("k", range(0, 6))
def test_quantum_minors_are_holomorphic(k):
    table = quantum_minor_table(ALG, k)
    assert len(table) == k + 1
    for p in table:
        assert ALG.is_zero(ALG.act_E(p))
        assert ALG.weights(p) == {k}
    with pytest.raises(ValueError):
        quantum_minor_table(ALG, -1)


def test_unitary_normalization_needs_approx():
    with pytest.raises(ValueError):
        PeterWeyl(ALG, 1, UNITARY)
    ar = Approx()
    for blk in build_blocks(Q, 2, ar, UNITARY):
        res = block_relation_residuals(blk, Q, ar)
        assert max(res.values()) < 1e-40
        # unitary ladder: F is the transpose of E
        assert (blk.F - blk.E.T).max_abs() < 1e-40


def test_invalid_cutoff():
    with pytest.raises(ValueError):
        PeterWeyl(ALG, Fraction(1, 3))
    with pytest.raises(ValueError):
        PeterWeyl(ALG, 1, "orthonormal")
    assert TRIANGULAR == PW.normalization
