from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from oracles import bott, classical_cohomology
from qkahler.chern import ChernConnection, verify_nakano
from qkahler.linalg import Approx
from qkahler.qcp1.algebra import monomials, weight
from qkahler.qcp1.blocks import UNITARY
from qkahler.qcp1.model import BIDEGREES, QCP1Model, build_calculus

Q = Fraction(4, 5)
coef = st.fractions(min_value=-3, max_value=3, max_denominator=3)


def same_blocks(engine: dict, op) -> bool:
    return all((m - op.blocks[l]).max_abs() == 0 for l, m in engine.items())


@pytest.mark.parametrize("k", [-3, -1, 0, 2])
def test_block_operators_match_form_engine(small_model, k):
    m = small_model
    b = m.bundle(k)
    fa = m.forms
    assert same_blocks(m.engine_matrix(k, fa.dbar), b.data.dbar_V)
    assert same_blocks(m.engine_matrix(k, fa.delta), b.del_V)
    assert same_blocks(m.engine_matrix(k, fa.dbar, "W", "W"), b.data.dbar_W)
    assert same_blocks(m.engine_matrix(k, fa.delta, "W", "W"), b.data.del_W)
    assert same_blocks(m.engine_matrix(k, fa.star, "V", "W"), b.data.C)
    assert same_blocks(m.engine_matrix(k, fa.star, "W", "V"), b.data.C_inv)
    assert same_blocks(m.engine_matrix(k, lambda f: fa.mul(fa.kappa(), f)), b.data.V.L)


@pytest.mark.parametrize("k", range(-5, 6))
def test_cohomology_matches_classical_weight_model(model, k):
    table = model.cohomology(k)
    oracle = classical_cohomology(k, model.lmax)
    for bd in BIDEGREES:
        harmonic, quotient = table[bd]
        assert harmonic == quotient == oracle[bd]


@pytest.mark.parametrize("k", range(-5, 6))
def test_dolbeault_cohomology_is_bott(model, k):
    table = model.cohomology(k)
    assert (table[(0, 0)][0], table[(0, 1)][0]) == bott(k)


@pytest.mark.parametrize("k", [-1, 1, 3])
def test_holomorphic_one_forms_are_a_twist(model, k):
    # Omega^(1,0) is E_{-2}, so the (1, b) column of E_k is the (0, b) column of E_{k-2}
    a, b = model.cohomology(k), model.cohomology(k - 2)
    assert a[(1, 0)] == b[(0, 0)] and a[(1, 1)] == b[(0, 1)]


@pytest.mark.parametrize("k", [0, 1, 2, 4])
def test_quantum_minors_span_holomorphic_sections(model, k):
    b = model.bundle(k)
    vecs = [model.section_vector(p, k) for p in model.quantum_minor_table(k)]
    assert len(vecs) == model.cohomology(k)[(0, 0)][0]
    for v in vecs:
        assert all(x == 0 for xs in b.data.dbar_V.apply(v).values() for x in xs)


@pytest.mark.parametrize("k", [-2, 1, 3])
@settings(max_examples=25)
@given(data=st.data())
def test_dual_basis_reconstruction(model, k, data):
    pool = [m for m in monomials(3) if weight(m) == k]
    keys = data.draw(st.lists(st.sampled_from(pool), min_size=1, max_size=3, unique=True))
    alg = model.alg
    p = {m: c for m in keys if (c := data.draw(coef)) != 0}
    back = alg.add(*((1, alg.mul(alg.mul(p, y), x)) for y, x in model.dual_basis(k)))
    assert alg.equal(back, p)


@pytest.mark.parametrize("k", [-2, 0, 3])
@settings(max_examples=25)
@given(data=st.data())
def test_vector_form_round_trip(small_model, k, data):
    m = small_model
    for side in ("V", "W"):
        sp = m.bundle(k).V if side == "V" else m.bundle(k).W
        v = {l: [data.draw(coef) for _ in range(sp.block_dim(l))] for l in sp.labels}
        assert m.form_to_vector(k, m.vector_to_form(k, v, side), side) == v


def test_wrong_weight_is_rejected(small_model):
    with pytest.raises(ValueError):
        small_model.form_to_vector(1, {"": small_model.alg.from_word("a")})


def test_frames(model):
    assert model.frame_twists() == {(1, 0): -2, (0, 1): 2}
    assert model.coinvariant_11_dimension() == 1
    assert model.kappa_is_coinvariant()
    with pytest.raises(ValueError):
        model.frame_products(("+",))


def test_evaluation_beyond_cutoff(small_model):
    assert small_model.evaluation_surjective(3)[0]
    with pytest.raises(ValueError):
        small_model.evaluation_surjective(4)


@pytest.mark.parametrize("normalization", ["triangular", UNITARY])
def test_approximate_mode_agrees(normalization):
    exact = build_calculus(Q, 2)
    approx = build_calculus(Q, 2, Approx(), normalization)
    for k in (-2, 1):
        assert approx.cohomology(k) == exact.cohomology(k)
        rep = verify_nakano(ChernConnection(approx.bundle(k).data))
        assert rep.max_residual() < 1e-40
        s = approx.positivity(1).scale
        assert abs(s - Fraction(5, 4)) < 1e-40


@pytest.mark.parametrize("q", [Fraction(2, 3), Fraction(3, 2), "9/10"])
def test_other_deformation_parameters(q):
    m = QCP1Model(q, 2)
    assert m.cohomology(-3) == {bd: (v, v) for bd, v in classical_cohomology(-3, 2).items()}
    assert verify_nakano(ChernConnection(m.bundle(2).data)).max_residual() == 0
