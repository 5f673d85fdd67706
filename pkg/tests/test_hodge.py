import random
from fractions import Fraction

import pytest

from qkahler.graded import BlockOperator
from qkahler.hermitian import twisted_hodge
from qkahler.hodge import (
    DecompositionGap, DegeneratePairing, DiracPackage, NotSelfAdjoint, cohomology_dim, cohomology_dim_by_block,
    diagonalizability_certificate, harmonic_dimension, harmonic_space, hodge_decomposition,
    kernel_intersection_dimension, laplacian_intertwine_residual, serre_pairing,
)
from qkahler.linalg import EXACT, Matrix, form_value
from qkahler.qcp1.model import BIDEGREES

KS = [-3, -1, 0, 2, 3]


def flat_dot(u, v):
    return sum((x * y for x, y in zip(u, v)), Fraction(0))


@pytest.mark.parametrize("k", KS)
def test_laplacian_is_dirac_squared(model, k):
    assert model.dirac(k).laplacian_from_dirac_residual() == 0
    assert model.dual_dirac(k).laplacian_from_dirac_residual() == 0


@pytest.mark.parametrize("k", KS)
@pytest.mark.parametrize("bd", BIDEGREES)
def test_three_routes_to_cohomology(model, k, bd):
    pkg = model.dirac(k)
    h = harmonic_dimension(pkg, bd)
    assert h == kernel_intersection_dimension(pkg, bd) == cohomology_dim(pkg.d, bd, EXACT)
    per_block = cohomology_dim_by_block(pkg.d, bd, EXACT)
    assert {l: len(v) for l, v in harmonic_space(pkg, bd).items()} == per_block


@pytest.mark.parametrize("k", KS)
@pytest.mark.parametrize("bd", BIDEGREES)
def test_hodge_decomposition(model, k, bd):
    dec = hodge_decomposition(model.dirac(k), bd)
    assert dec.orthogonality_residual == 0
    V = model.bundle(k).V
    for l in V.labels:
        assert sum(dec.dims(l)) == len(V.span(l, bd))


def test_decomposition_gap_without_codifferential(model):
    pkg = model.dirac(2)
    broken = DiracPackage(pkg.d, BlockOperator.zero(pkg.space, pkg.space, (0, -1)), pkg.inner, EXACT)
    with pytest.raises(DecompositionGap):
        hodge_decomposition(broken, (0, 1))


@pytest.mark.parametrize("k", KS)
def test_dirac_is_diagonalizable(model, k):
    cert = diagonalizability_certificate(model.dirac(k))
    assert cert.certified and cert.positive
    assert all(r == 0 for r in cert.residuals.values())


def test_perturbed_dirac_is_rejected(model):
    pkg = model.dirac(1)
    D = pkg.D
    l = max(D.blocks)
    blocks = dict(D.blocks)
    m = Matrix([list(r) for r in blocks[l].rows], blocks[l].nrows, blocks[l].ncols)
    m.rows[0][m.ncols - 1] += Fraction(1, 10 ** 6)
    blocks[l] = m
    bad = BlockOperator(D.source, D.target, blocks, None)
    with pytest.raises(NotSelfAdjoint) as err:
        diagonalizability_certificate(pkg, bad)
    assert err.value.label == l and err.value.residual > 0


def _serre_inputs(model, k, bd):
    a, b = bd
    return (model.bundle(k).data.pairing, harmonic_space(model.dirac(k), bd),
            harmonic_space(model.dual_dirac(k), (1 - a, 1 - b)))


@pytest.mark.parametrize("k", KS)
@pytest.mark.parametrize("bd", BIDEGREES)
def test_serre_pairing_nondegenerate(model, k, bd):
    P, hv, hw = _serre_inputs(model, k, bd)
    sp = serre_pairing(P, hv, hw, EXACT)
    assert sp.nondegenerate
    assert sp.dims[0] == sp.dims[1] == harmonic_dimension(model.dirac(k), bd)


def test_serre_pairing_detects_missing_class(model):
    P, hv, hw = _serre_inputs(model, -3, (0, 1))
    l = next(l for l, v in hw.items() if v)
    hw = dict(hw)
    hw[l] = hw[l][:-1]
    with pytest.raises(DegeneratePairing):
        serre_pairing(P, hv, hw, EXACT)


@pytest.mark.parametrize("k,bd", [(-3, (0, 1)), (-2, (1, 1)), (3, (1, 0)), (0, (1, 1))])
def test_serre_pairing_ignores_exact_terms(model, k, bd):
    P, hv, hw = _serre_inputs(model, k, bd)
    d = model.bundle(k).data.dbar_V
    V = model.bundle(k).V
    rng = random.Random(k)
    for l, alphas in hv.items():
        src = V.span(l, (bd[0], bd[1] - 1)) if bd[1] else range(0)
        for alpha in alphas:
            beta = V.zero_vector()[l]
            for i in src:
                beta[i] = Fraction(rng.randint(-4, 4))
            shifted = [x + y for x, y in zip(alpha, d.blocks[l].apply(beta))]
            for gamma in hw[l]:
                Pg = P[l].apply(gamma)
                assert flat_dot(shifted, Pg) == flat_dot(alpha, Pg)


@pytest.mark.parametrize("k", KS)
def test_conjugate_hodge_pairs_harmonic_forms_with_norm(model, k):
    data = model.bundle(k).data
    s, _ = twisted_hodge(data)
    pkg = model.dirac(k)
    for bd in BIDEGREES:
        for l, alphas in harmonic_space(pkg, bd).items():
            for alpha in alphas:
                img = s.apply({ll: (alpha if ll == l else [Fraction(0)] * data.V.space.block_dim(ll))
                               for ll in data.V.space.labels})
                lhs = flat_dot(alpha, data.pairing[l].apply(img[l]))
                norm = form_value(pkg.inner.grams[l], alpha, alpha)
                assert lhs == norm and norm > 0


@pytest.mark.parametrize("k", KS)
def test_laplacians_intertwine(model, k):
    s, _ = twisted_hodge(model.bundle(k).data)
    assert laplacian_intertwine_residual(model.dirac(k).laplacian, model.dual_dirac(k).laplacian, s) == 0
