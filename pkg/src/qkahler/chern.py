"""Chern connections, curvature, the Nakano identities, positivity and vanishing."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

from .graded import BlockOperator, compose, graded_commutator
from .hermitian import (InnerProduct, TwistedKahlerData, codifferential, inner_product)
from .hodge import DiracPackage, harmonic_space
from .lefschetz import BIDEGREE, IdentityViolated, dual_lefschetz
from .linalg import Matrix, form_value, is_positive_semidefinite


class HermitianIdentityViolated(AssertionError):
    pass


class VanishingViolated(AssertionError):
    def __init__(self, message: str, witness=None):
        super().__init__(message)
        self.witness = witness


def _bidegree_support(op: BlockOperator, ar) -> set:
    shifts = set()
    src, tgt = op.source, op.target
    for l in src.labels:
        for a in src.bidegrees:
            for b in tgt.bidegrees:
                if not op.piece(l, a, b).is_zero(ar):
                    shifts.add((b[0] - a[0], b[1] - a[1]))
    return shifts


class ChernConnection:
    """``del_F = C^{-1} o dbar_dual o C``, ``nabla = dbar_F + del_F`` and its curvature."""

    def __init__(self, data: TwistedKahlerData, del_sign: int = 1):
        self.data = data
        self.ar = data.ar
        self.dbar = data.dbar_V
        raw = compose(data.C_inv, compose(data.dbar_W, data.C))
        if raw.antilinear:
            raise ValueError("C^{-1} dbar C should be linear")
        # del_sign = -1 is a deliberately wrong connection used as a negative control
        self.del_ = raw.with_shift((1, 0)).scale(del_sign)
        self.nabla = self.dbar.with_shift(None) + self.del_.with_shift(None)
        self.curvature = (compose(self.del_, self.dbar) + compose(self.dbar, self.del_)).with_shift(None)

    def del_squared_residual(self) -> float:
        return compose(self.del_, self.del_).max_residual()

    def curvature_matches_square(self) -> float:
        """``nabla^2`` equals ``del dbar + dbar del`` (both squares vanish)."""
        return (compose(self.nabla, self.nabla) - self.curvature).max_residual()

    def curvature_bidegrees(self) -> set:
        return _bidegree_support(self.curvature, self.ar)

    def curvature_11(self) -> BlockOperator:
        if not self.curvature_bidegrees() <= {(1, 1)}:
            raise HermitianIdentityViolated(f"curvature has bidegrees {self.curvature_bidegrees()}")
        return self.curvature.with_shift((1, 1))


def chern_connection(data: TwistedKahlerData,
                     hermitian_identity: Callable[[BlockOperator], float] | None = None) -> ChernConnection:
    """Build and check the Chern connection.

    ``hermitian_identity`` optionally evaluates the residual of
    ``d h(f, g) = h(nabla f, g) + h(f, nabla g)`` for the given connection.
    """
    conn = ChernConnection(data)
    if conn.del_squared_residual() != 0 and data.ar.exact:
        raise HermitianIdentityViolated("del_F^2 != 0")
    conn.curvature_11()
    if hermitian_identity is not None:
        r = hermitian_identity(conn.nabla)
        if r != 0 and data.ar.exact:
            raise HermitianIdentityViolated(f"Hermitian identity residual {r}")
    return conn


@dataclass
class IdentityReport:
    residuals: dict = field(default_factory=dict)
    tol: float = 0.0

    @property
    def ok(self) -> bool:
        return all(r <= self.tol for r in self.residuals.values())

    def max_residual(self) -> float:
        return max(self.residuals.values(), default=0.0)

    def raise_if_failed(self):
        for name, r in self.residuals.items():
            if r > self.tol:
                raise IdentityViolated(f"{name}: residual {r}")
        return self


@dataclass
class NakanoOperators:
    L: BlockOperator
    Lam: BlockOperator
    dbar: BlockOperator
    del_: BlockOperator
    dbar_dag: BlockOperator
    del_dag: BlockOperator
    curvature: BlockOperator


def nakano_operators(conn: ChernConnection, variant: str = BIDEGREE) -> NakanoOperators:
    data = conn.data
    L = data.V.L.with_shift((1, 1))
    Lam = dual_lefschetz(data.V, variant)
    dbar_dag = codifferential(data, data.dbar_W, variant)
    del_dag = codifferential(data, data.del_W, variant)
    return NakanoOperators(L, Lam, conn.dbar, conn.del_, dbar_dag, del_dag, conn.curvature)


def verify_nakano(conn: ChernConnection, ops: NakanoOperators | None = None, tol: float = 0.0,
                  raise_on_failure: bool = False) -> IdentityReport:
    """The four twisted Kaehler identities plus the anticommutators and commutations."""
    o = ops or nakano_operators(conn)
    i = conn.ar.i
    gc = graded_commutator
    checks = {
        "[L,del^dag]=i dbar": gc(o.L, o.del_dag, 2, -1) - o.dbar.scale(i),
        "[L,dbar^dag]=-i del": gc(o.L, o.dbar_dag, 2, -1) + o.del_.scale(i),
        "[Lambda,del]=i dbar^dag": gc(o.Lam, o.del_, -2, 1) - o.dbar_dag.scale(i),
        "[Lambda,dbar]=-i del^dag": gc(o.Lam, o.dbar, -2, 1) + o.del_dag.scale(i),
        "del dbar^dag + dbar^dag del = 0": gc(o.del_, o.dbar_dag, 1, -1),
        "del^dag dbar + dbar del^dag = 0": gc(o.del_dag, o.dbar, -1, 1),
        "[L,del]=0": gc(o.L, o.del_, 2, 1),
        "[L,dbar]=0": gc(o.L, o.dbar, 2, 1),
        "[Lambda,del^dag]=0": gc(o.Lam, o.del_dag, -2, -1),
        "[Lambda,dbar^dag]=0": gc(o.Lam, o.dbar_dag, -2, -1),
    }
    rep = IdentityReport({k: v.max_residual() for k, v in checks.items()}, tol)
    if raise_on_failure:
        rep.raise_if_failed()
    return rep


def verify_akizuki_nakano(conn: ChernConnection, ops: NakanoOperators | None = None, tol: float = 0.0,
                          raise_on_failure: bool = False) -> IdentityReport:
    """``Delta_del = Delta_dbar + [Lambda, i nabla^2]``."""
    o = ops or nakano_operators(conn)
    i = conn.ar.i
    lap_del = (compose(o.del_dag, o.del_) + compose(o.del_, o.del_dag)).with_shift(None)
    lap_dbar = (compose(o.dbar_dag, o.dbar) + compose(o.dbar, o.dbar_dag)).with_shift(None)
    icurv = conn.curvature_11().scale(i)
    comm = graded_commutator(o.Lam, icurv, -2, 2).with_shift(None)
    rep = IdentityReport({"Delta_del = Delta_dbar + [Lambda, i nabla^2]": (lap_del - lap_dbar - comm).max_residual()}, tol)
    if raise_on_failure:
        rep.raise_if_failed()
    return rep


@dataclass
class PositivityCertificate:
    bundle: object
    passed: bool
    scale: object
    residual: float
    per_block: dict
    reason: str = ""


def certify_positive(conn: ChernConnection, bundle=None, tol: float = 0.0) -> PositivityCertificate:
    """Solve ``i nabla^2 = s L_F`` blockwise; pass iff ``s`` is one positive constant.

    The Kaehler form can then be rescaled by ``s`` so that ``i nabla^2 = L_F``.
    Also requires the inner product to be positive definite.
    """
    data = conn.data
    ar = conn.ar
    icurv = conn.curvature_11().scale(ar.i)
    L = data.V.L
    scales: dict = {}
    worst = 0.0
    reason = ""
    for l, Lm in L.blocks.items():
        Cm = icurv.blocks[l]
        s = None
        for r in range(Lm.nrows):
            for c in range(Lm.ncols):
                if not ar.is_zero(Lm.rows[r][c]):
                    s = Cm.rows[r][c] / Lm.rows[r][c]
                    break
            if s is not None:
                break
        if s is None:
            continue
        scales[l] = s
        worst = max(worst, (Cm - Lm.scale(s)).max_abs())
    values = list(scales.values())
    passed = bool(values)
    s0 = values[0] if values else None
    if not values:
        reason = "L_F vanishes"
    elif worst > tol:
        passed, reason = False, "i nabla^2 is not proportional to L_F"
    elif any(not ar.is_zero(v - s0, None if ar.exact else 1.0) for v in values):
        passed, reason = False, "proportionality constant differs between blocks"
    elif not ar.is_zero(ar.imag_part(s0)):
        passed, reason = False, "proportionality constant is not real"
    elif not ar.real_part(s0) > 0 or ar.is_zero(s0):
        passed, reason = False, "curvature is not positive"
    if passed and not inner_product(data).positive():
        passed, reason = False, "inner product is not positive definite"
    return PositivityCertificate(bundle, passed, s0, worst, scales, reason)


@dataclass
class KodairaReport:
    harmonic_dims: dict
    curvature_signs_ok: bool
    vanishing_ok: bool


def verify_kodaira(conn: ChernConnection, pkg: DiracPackage, positive: bool, n: int = 1) -> KodairaReport:
    """Harmonic spaces above the middle degree must vanish for a positive bundle.

    Also checks ``<i nabla^2 Lambda a, a> <= 0`` and ``<Lambda i nabla^2 a, a> >= 0``
    on harmonic ``a`` (these hold whenever ``i nabla^2 = L``).
    """
    data = conn.data
    ar = conn.ar
    inner: InnerProduct = pkg.inner
    icurv = conn.curvature_11().scale(ar.i)
    Lam = dual_lefschetz(data.V)
    A = compose(icurv, Lam)
    B = compose(Lam, icurv)
    dims = {}
    sign_ok = True
    for bd in data.V.space.bidegrees:
        harm = harmonic_space(pkg, bd)
        dims[bd] = sum(len(v) for v in harm.values())
        for l, basis in harm.items():
            if not basis:
                continue
            G = inner.grams[l]
            ga = Matrix([[form_value(G, A.blocks[l].apply(u), v) for u in basis] for v in basis], len(basis), len(basis))
            gb = Matrix([[form_value(G, B.blocks[l].apply(u), v) for u in basis] for v in basis], len(basis), len(basis))
            if positive and not (is_positive_semidefinite(ga.scale(-1), ar) and is_positive_semidefinite(gb, ar)):
                sign_ok = False
    vanish_ok = True
    if positive:
        for bd, dim in dims.items():
            if sum(bd) > n and dim:
                witness = next(v for v in harmonic_space(pkg, bd).values() if v)[0]
                raise VanishingViolated(f"harmonic forms in bidegree {bd} of a positive bundle", witness=witness)
    return KodairaReport(dims, sign_ok, vanish_ok)


@dataclass
class FanoReport:
    factorisable: bool
    canonical_invertible: bool
    anticanonical_positive: bool
    h01_trivial: int
    details: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.factorisable and self.canonical_invertible and self.anticanonical_positive and self.h01_trivial == 0


def factorisation_rank(products: list[Matrix], target_dim: int, ar) -> bool:
    """Both multiplications ``Omega^(1,0) (x) Omega^(0,1) -> Omega^(1,1)`` and
    ``Omega^(0,1) (x) Omega^(1,0) -> Omega^(1,1)`` are isomorphisms.

    ``products`` holds, per ordering, the coordinates (columns) of the products
    of frame elements in the supplied basis of the target.
    """
    from .linalg import rank
    if not products:
        return False
    for p in products:
        if p.nrows != target_dim or p.ncols != target_dim or target_dim == 0:
            return False
        if rank(p, ar) != target_dim:
            return False
    return True
