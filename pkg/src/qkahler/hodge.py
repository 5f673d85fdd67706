"""Dirac and Laplace operators, harmonic forms, cohomology and Serre duality."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .graded import Bidegree, BlockOperator, compose
from .hermitian import InnerProduct
from .linalg import Matrix, form_value, kernel_basis, rank, rref


class DecompositionGap(AssertionError):
    pass


class NotSelfAdjoint(AssertionError):
    def __init__(self, message: str, label=None, residual: float = 0.0):
        super().__init__(message)
        self.label = label
        self.residual = residual


class DegeneratePairing(AssertionError):
    pass


class IntertwineViolated(AssertionError):
    pass


def _columns(m: Matrix, idx) -> Matrix:
    return m.submatrix(range(m.nrows), list(idx))


def _embed(vec, idx, dim) -> list:
    out = [Fraction(0)] * dim
    for i, c in zip(idx, vec):
        out[i] = c
    return out


@dataclass
class DiracPackage:
    """``D = d + d^dagger`` and ``Delta = D^2`` for a differential ``d``."""

    d: BlockOperator
    d_dag: BlockOperator
    inner: InnerProduct
    ar: object
    _lap: BlockOperator | None = field(default=None, repr=False)

    @property
    def space(self):
        return self.d.source

    @property
    def D(self) -> BlockOperator:
        return (self.d.with_shift(None) + self.d_dag.with_shift(None))

    @property
    def laplacian(self) -> BlockOperator:
        if self._lap is None:
            a = compose(self.d_dag, self.d)
            b = compose(self.d, self.d_dag)
            self._lap = (a + b).with_shift((0, 0))
        return self._lap

    def laplacian_from_dirac_residual(self) -> float:
        D = self.D
        return (compose(D, D).with_shift((0, 0)) - self.laplacian).max_residual()


def harmonic_space(pkg: DiracPackage, bideg: Bidegree) -> dict:
    """Per block, a basis of ``ker Delta`` on the component ``bideg`` (block vectors)."""
    sp = pkg.space
    out = {}
    for l in sp.labels:
        idx = list(sp.span(l, bideg))
        if not idx:
            out[l] = []
            continue
        M = _columns(pkg.laplacian.blocks[l], idx)
        out[l] = [_embed(v, idx, sp.block_dim(l)) for v in kernel_basis(M, pkg.ar)]
    return out


def harmonic_dimension(pkg: DiracPackage, bideg: Bidegree) -> int:
    return sum(len(v) for v in harmonic_space(pkg, bideg).values())


def kernel_intersection_dimension(pkg: DiracPackage, bideg: Bidegree) -> int:
    """``dim (ker d cap ker d^dagger)`` on a component."""
    sp = pkg.space
    total = 0
    for l in sp.labels:
        idx = list(sp.span(l, bideg))
        if not idx:
            continue
        stacked = Matrix(_columns(pkg.d.blocks[l], idx).rows + _columns(pkg.d_dag.blocks[l], idx).rows,
                         2 * sp.block_dim(l), len(idx))
        total += len(idx) - rank(stacked, pkg.ar)
    return total


def _incoming_rank(d: BlockOperator, l, bideg: Bidegree, ar) -> int:
    sp = d.source
    tgt = list(d.target.span(l, bideg))
    if not tgt:
        return 0
    M = d.blocks[l].submatrix(tgt, range(sp.block_dim(l)))
    return rank(M, ar)


def cohomology_dim_by_block(d: BlockOperator, bideg: Bidegree, ar) -> dict:
    """``dim ker d - rank(d into bideg)`` per block (the quotient path)."""
    sp = d.source
    out = {}
    for l in sp.labels:
        idx = list(sp.span(l, bideg))
        if not idx:
            out[l] = 0
            continue
        ker = len(idx) - rank(_columns(d.blocks[l], idx), ar)
        out[l] = ker - _incoming_rank(d, l, bideg, ar)
    return out


def cohomology_dim(d: BlockOperator, bideg: Bidegree, ar) -> int:
    return sum(cohomology_dim_by_block(d, bideg, ar).values())


@dataclass
class HodgeDecomposition:
    bidegree: Bidegree
    harmonic: dict
    exact: dict
    coexact: dict
    orthogonality_residual: float = 0.0

    def dims(self, l) -> tuple[int, int, int]:
        return len(self.harmonic[l]), len(self.exact[l]), len(self.coexact[l])


def _image_in(op: BlockOperator, l, bideg: Bidegree, ar) -> list:
    """Basis of ``im op`` intersected with the component (for homogeneous ``op``)."""
    tgt = list(op.target.span(l, bideg))
    if not tgt:
        return []
    M = op.blocks[l]
    # homogeneous operators send each column entirely into one component
    _, piv = rref(M.submatrix(tgt, range(M.ncols)), ar)
    return [M.column(c) for c in piv]


def hodge_decomposition(pkg: DiracPackage, bideg: Bidegree) -> HodgeDecomposition:
    """Harmonic, exact and co-exact parts of a component, checked to be orthogonal and complete."""
    sp = pkg.space
    harm = harmonic_space(pkg, bideg)
    exact, coexact = {}, {}
    worst = 0.0
    for l in sp.labels:
        dim = len(sp.span(l, bideg))
        ex = _image_in(pkg.d, l, bideg, pkg.ar)
        co = _image_in(pkg.d_dag, l, bideg, pkg.ar)
        exact[l], coexact[l] = ex, co
        if len(harm[l]) + len(ex) + len(co) != dim:
            raise DecompositionGap(f"block {l}, bidegree {bideg}: {len(harm[l])} + {len(ex)} + {len(co)} != {dim}")
        G = pkg.inner.grams[l]
        for A, B in ((harm[l], ex), (harm[l], co), (ex, co)):
            for u in A:
                for v in B:
                    worst = max(worst, float(abs(form_value(G, u, v))))
        allv = harm[l] + ex + co
        if allv and rank(Matrix.from_columns(allv, sp.block_dim(l)), pkg.ar) != dim:
            raise DecompositionGap(f"block {l}, bidegree {bideg}: parts do not span the component")
    return HodgeDecomposition(bideg, harm, exact, coexact, worst)


@dataclass
class DiagonalizabilityCertificate:
    certified: bool
    residuals: dict
    positive: bool


def diagonalizability_certificate(pkg: DiracPackage, D: BlockOperator | None = None,
                                  tol: float = 0.0) -> DiagonalizabilityCertificate:
    """Self-adjointness of ``D`` for a positive-definite inner product, block by block."""
    D = pkg.D if D is None else D
    pkg.inner.check_positive()
    res = pkg.inner.self_adjoint_residual(D)
    for l, r in res.items():
        if r > tol:
            raise NotSelfAdjoint(f"D is not self-adjoint on block {l} (residual {r})", label=l, residual=r)
    return DiagonalizabilityCertificate(True, res, True)


@dataclass
class SerrePairing:
    matrices: dict
    ranks: dict
    dims: tuple[int, int]

    @property
    def nondegenerate(self) -> bool:
        return all(r == m.nrows == m.ncols for (r, m) in zip(self.ranks.values(), self.matrices.values()))


def serre_pairing(pairing: dict, harm_V: dict, harm_W: dict, ar) -> SerrePairing:
    """Matrix ``int alpha_i ^_ev beta_j`` between harmonic bases, block by block."""
    mats, ranks = {}, {}
    for l, P in pairing.items():
        A, B = harm_V.get(l, []), harm_W.get(l, [])
        M = Matrix([[sum((x * y for x, y in zip(a, P.apply(b))), Fraction(0)) for b in B] for a in A], len(A), len(B))
        mats[l] = M
        ranks[l] = rank(M, ar) if A and B else 0
    dv = sum(len(v) for v in harm_V.values())
    dw = sum(len(v) for v in harm_W.values())
    out = SerrePairing(mats, ranks, (dv, dw))
    if dv != dw or not out.nondegenerate:
        raise DegeneratePairing(f"pairing between spaces of dimension {dv} and {dw} has rank {sum(ranks.values())}")
    return out


def laplacian_intertwine_residual(lap_V: BlockOperator, lap_W: BlockOperator, sbar: BlockOperator) -> float:
    """``Delta_W o *bar = *bar o Delta_V``."""
    return (compose(lap_W, sbar) - compose(sbar, lap_V)).max_residual()
