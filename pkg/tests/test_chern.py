from fractions import Fraction

import pytest

from qkahler.chern import (
    ChernConnection, HermitianIdentityViolated, VanishingViolated, certify_positive, chern_connection,
    factorisation_rank, verify_akizuki_nakano, verify_kodaira, verify_nakano,
)
from qkahler.lefschetz import IdentityViolated
from qkahler.linalg import EXACT, Matrix

Q = Fraction(4, 5)
KS = [-3, -2, -1, 0, 1, 2, 3]


def qint(n, q=Q):
    return (q ** n - q ** -n) / (q - 1 / q)


@pytest.mark.parametrize("k", KS)
def test_chern_del_matches_form_rules(model, k):
    # C^{-1} dbar C against del assembled directly from the form calculus
    b = model.bundle(k)
    conn = ChernConnection(b.data)
    assert (conn.del_ - b.del_V).max_residual() == 0
    assert conn.del_squared_residual() == 0
    assert conn.curvature_matches_square() == 0


@pytest.mark.parametrize("k", KS)
def test_curvature_has_bidegree_one_one(model, k):
    conn = chern_connection(model.bundle(k).data)
    assert conn.curvature_bidegrees() == (set() if k == 0 else {(1, 1)})


def test_hermitian_identity_hook(model):
    data = model.bundle(1).data
    assert chern_connection(data, lambda nabla: 0.0)
    with pytest.raises(HermitianIdentityViolated):
        chern_connection(data, lambda nabla: 1.0)


@pytest.mark.parametrize("k", KS)
def test_nakano_identities(model, k):
    conn = ChernConnection(model.bundle(k).data)
    rep = verify_nakano(conn)
    assert len(rep.residuals) == 10
    assert rep.ok and rep.max_residual() == 0
    assert verify_akizuki_nakano(conn).max_residual() == 0


@pytest.mark.parametrize("k", [-2, 1, 3])
def test_wrong_connection_breaks_nakano(model, k):
    conn = ChernConnection(model.bundle(k).data, del_sign=-1)
    rep = verify_nakano(conn)
    assert not rep.ok
    assert rep.residuals["[L,del]=0"] == 0
    assert rep.residuals["[L,dbar^dag]=-i del"] > 0
    with pytest.raises(IdentityViolated):
        rep.raise_if_failed()
    with pytest.raises(IdentityViolated):
        verify_akizuki_nakano(conn, raise_on_failure=True)


@pytest.mark.parametrize("k,scale", [(1, Fraction(5, 4)), (2, Fraction(205, 64)), (3, None), (4, None)])
def test_positive_bundles(model, k, scale):
    cert = model.positivity(k)
    assert cert.passed and cert.residual == 0
    assert cert.scale == Q ** -k * qint(k)
    if scale is not None:
        assert cert.scale == scale
    assert set(cert.per_block.values()) == {cert.scale}


@pytest.mark.parametrize("k", [0, -1, -3])
def test_non_positive_bundles(model, k):
    # the flat bundle has zero curvature, hence scale 0
    cert = model.positivity(k)
    assert not cert.passed
    assert cert.scale == Q ** -k * qint(k) <= 0
    assert cert.reason == "curvature is not positive"


@pytest.mark.parametrize("k", [1, 2, 3])
def test_kodaira_vanishing(model, k):
    conn = ChernConnection(model.bundle(k).data)
    rep = verify_kodaira(conn, model.dirac(k), positive=True)
    assert rep.curvature_signs_ok and rep.vanishing_ok
    assert rep.harmonic_dims[(1, 1)] == 0
    assert rep.harmonic_dims[(0, 0)] == k + 1


def test_kodaira_fails_on_negative_bundle(model):
    conn = ChernConnection(model.bundle(-2).data)
    assert verify_kodaira(conn, model.dirac(-2), positive=False).harmonic_dims[(1, 1)] == 3
    with pytest.raises(VanishingViolated) as err:
        verify_kodaira(conn, model.dirac(-2), positive=True)
    assert err.value.witness is not None


def test_fano(model):
    rep = model.fano_report()
    assert rep.passed
    assert rep.details["canonical_weight"] == -2
    assert rep.details["anticanonical_scale"] == Fraction(205, 64)
    assert rep.h01_trivial == 0


def test_fano_needs_a_spanning_basis(model):
    rep = model.fano_report(basis_11=())
    assert not rep.factorisable and not rep.passed


@pytest.mark.parametrize("weights,expected", [([3], True), ([-2], True), ([0], True), ([1, 1], False), ([], False)])
def test_invertibility(model, weights, expected):
    assert model.check_invertible(weights) is expected


def test_factorisation_rank():
    one = Matrix([[1]], 1, 1)
    assert factorisation_rank([one, one.scale(-Q * Q)], 1, EXACT)
    assert not factorisation_rank([], 1, EXACT)
    assert not factorisation_rank([one, Matrix([[0]], 1, 1)], 1, EXACT)
    assert not factorisation_rank([Matrix.zeros(0, 0)], 0, EXACT)
    assert not factorisation_rank([Matrix([[1], [0]], 2, 1)], 2, EXACT)


def test_certificate_carries_bundle_label(model):
    cert = certify_positive(ChernConnection(model.bundle(2).data), bundle="E_2")
    assert cert.bundle == "E_2" and cert.passed
