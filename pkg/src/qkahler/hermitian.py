"""Hermitian structures, twisted Hodge maps, metrics and codifferentials.

The data of a twisted Kaehler complex is kept blockwise:

* ``V``: forms with values in a bundle F, with Lefschetz pair ``(V, L_F)``;
* ``W``: forms with values in the dual bundle, with pair ``(W, L)``;
* ``C``: the conjugate-linear isomorphism ``V -> W`` built from the Hermitian
  structure and the star of forms, and its inverse;
* ``pairing``: ``P(v, w) = integral of v ^_ev w`` per block.

Inner products follow the convention ``<u, v> = v^H G u``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .graded import BlockOperator, compose
from .lefschetz import BIDEGREE, LefschetzPair, dual_lefschetz, hodge_operator
from .linalg import EXACT, Matrix, NotPositiveDefinite, check_positive_definite, inverse


class AdjointnessViolated(AssertionError):
    def __init__(self, message: str, residual: float = 0.0, label=None):
        super().__init__(message)
        self.residual = residual
        self.label = label


@dataclass
class HermitianStructure:
    """Per block, the matrix ``h[i][j] = state(h(conj f_i)(f_j))`` of the sesquilinear form."""

    blocks: dict
    ar: object = EXACT

    def symmetry_residual(self) -> float:
        # h(conj f)(g) = h(conj g)(f)^* becomes Hermitian symmetry of the matrix
        return max(((m - m.H).max_abs() for m in self.blocks.values()), default=0.0)

    def positive(self) -> bool:
        try:
            for m in self.blocks.values():
                check_positive_definite(m, self.ar)
        except NotPositiveDefinite:
            return False
        return True

    def normalized(self) -> "HermitianStructure":
        """Each block rescaled to unit trace."""
        out = {}
        for l, m in self.blocks.items():
            tr = sum((m.rows[i][i] for i in range(m.nrows)), 0 * m.rows[0][0])
            out[l] = m.scale(1 / tr)
        return HermitianStructure(out, self.ar)


@dataclass
class TwistedKahlerData:
    V: LefschetzPair
    W: LefschetzPair
    C: BlockOperator
    C_inv: BlockOperator
    dbar_V: BlockOperator
    dbar_W: BlockOperator
    del_W: BlockOperator
    pairing: dict
    pairing_WV: dict
    ar: object = EXACT
    cache: dict = field(default_factory=dict)

    def memo(self, key, build):
        got = self.cache.get(key)
        if got is None:
            got = build()
            self.cache[key] = got
        return got


def conjugation_C_h(data: TwistedKahlerData) -> BlockOperator:
    """``C_h(omega (x) f) = h(conj f) (x) omega^*``; checked to be invertible."""
    return data.C


def conjugation_defect(data: TwistedKahlerData) -> float:
    a = compose(data.C_inv, data.C) - BlockOperator.identity(data.V.space)
    b = compose(data.C, data.C_inv) - BlockOperator.identity(data.W.space)
    return max(a.max_residual(), b.max_residual())


def twisted_hodge(data: TwistedKahlerData, variant: str = BIDEGREE) -> tuple[BlockOperator, BlockOperator]:
    """``(*bar_F, *bar_dualF) = (*_W o C, *_V o C^{-1})``."""
    def build():
        sbar = compose(hodge_operator(data.W, variant), data.C)
        sbar_dual = compose(hodge_operator(data.V, variant), data.C_inv)
        return sbar.with_shift(None), sbar_dual.with_shift(None)
    return data.memo(("hodge", variant), build)


def _parity(space):
    from fractions import Fraction
    return BlockOperator.diagonal(space, lambda bd: Fraction((-1) ** ((bd[0] + bd[1]) % 2)))


def twisted_hodge_defect(data: TwistedKahlerData, variant: str = BIDEGREE) -> float:
    """Residual of ``*bar_dualF *bar_F = (-1)^k`` and ``*bar_F *bar_dualF = (-1)^k``."""
    s, sd = twisted_hodge(data, variant)
    a = compose(sd, s) - _parity(data.V.space)
    b = compose(s, sd) - _parity(data.W.space)
    return max(a.max_residual(), b.max_residual())


def twisted_hodge_bidegree_ok(data: TwistedKahlerData, variant: str = BIDEGREE) -> bool:
    """``*bar_F`` sends bidegree ``(a, b)`` to ``(n - a, n - b)``."""
    s, _ = twisted_hodge(data, variant)
    n = data.V.n
    for l in data.V.space.labels:
        for src in data.V.space.bidegrees:
            for tgt in data.W.space.bidegrees:
                if tgt != (n - src[0], n - src[1]) and not s.piece(l, src, tgt).is_zero(data.ar):
                    return False
    return True


class InnerProduct:
    """Block-diagonal Hermitian form, one Gram matrix per Peter-Weyl block."""

    def __init__(self, space, grams: dict, ar=EXACT):
        self.space = space
        self.grams = grams
        self.ar = ar
        self._inv: dict = {}

    def value(self, u: dict, v: dict):
        total = 0
        for l, G in self.grams.items():
            Gu = G.apply(u[l])
            total = total + sum((y.conjugate() * x for x, y in zip(Gu, v[l])), 0 * self.ar.scalar(0))
        return total

    def check_positive(self) -> None:
        for l, G in self.grams.items():
            try:
                check_positive_definite(G, self.ar)
            except NotPositiveDefinite as exc:
                raise NotPositiveDefinite(f"block {l}: {exc}", witness=exc.witness) from None

    def positive(self) -> bool:
        try:
            self.check_positive()
        except NotPositiveDefinite:
            return False
        return True

    def inverse_gram(self, l) -> Matrix:
        got = self._inv.get(l)
        if got is None:
            got = inverse(self.grams[l], self.ar)
            self._inv[l] = got
        return got

    def adjoint(self, op: BlockOperator) -> BlockOperator:
        """Gram-matrix adjoint ``G^{-1} T^H G`` of a linear operator on the space."""
        if op.antilinear:
            raise ValueError("adjoints are only formed for linear operators")
        blocks = {l: self.inverse_gram(l) @ m.H @ self.grams[l] for l, m in op.blocks.items()}
        shift = None if op.shift is None else (-op.shift[0], -op.shift[1])
        return BlockOperator(op.target, op.source, blocks, shift)

    def self_adjoint_residual(self, op: BlockOperator) -> dict:
        return {l: (self.grams[l] @ m - m.H @ self.grams[l]).max_abs() for l, m in op.blocks.items()}


def gram_from_pairing(pairing: dict, sbar: BlockOperator) -> dict:
    """``G = (P M)^T`` where ``M`` is the matrix of the conjugate-linear ``*bar``."""
    return {l: (pairing[l] @ sbar.blocks[l]).T for l in pairing}


def inner_product(data: TwistedKahlerData, variant: str = BIDEGREE) -> InnerProduct:
    """``<a, b> = integral of a ^_ev *bar_F(b)`` on the bundle side."""
    def build():
        s, _ = twisted_hodge(data, variant)
        return InnerProduct(data.V.space, gram_from_pairing(data.pairing, s), data.ar)
    return data.memo(("inner", variant), build)


def dual_inner_product(data: TwistedKahlerData, variant: str = BIDEGREE) -> InnerProduct:
    """The same construction on the dual side, using ``*bar_dualF``."""
    def build():
        _, sd = twisted_hodge(data, variant)
        return InnerProduct(data.W.space, gram_from_pairing(data.pairing_WV, sd), data.ar)
    return data.memo(("inner_dual", variant), build)


def codifferential(data: TwistedKahlerData, d_W: BlockOperator, variant: str = BIDEGREE) -> BlockOperator:
    """``-*bar_dualF o d_W o *bar_F`` for a differential ``d_W`` on the dual side."""
    s, sd = twisted_hodge(data, variant)
    out = compose(sd, compose(d_W, s)).scale(-1)
    shift = None if d_W.shift is None else (-d_W.shift[1], -d_W.shift[0])
    return out.with_shift(shift)


def dual_codifferential(data: TwistedKahlerData, d_V: BlockOperator, variant: str = BIDEGREE) -> BlockOperator:
    """``-*bar_F o d_V o *bar_dualF`` on the dual side."""
    s, sd = twisted_hodge(data, variant)
    out = compose(s, compose(d_V, sd)).scale(-1)
    shift = None if d_V.shift is None else (-d_V.shift[1], -d_V.shift[0])
    return out.with_shift(shift)


def adjoint_residual(inner: InnerProduct, op: BlockOperator, candidate: BlockOperator) -> float:
    """Largest entry of ``candidate - G^{-1} op^H G``."""
    return (candidate - inner.adjoint(op).with_shift(candidate.shift)).max_residual()


def check_adjoint(inner: InnerProduct, op: BlockOperator, candidate: BlockOperator, tol: float = 0.0) -> float:
    r = adjoint_residual(inner, op, candidate)
    if r > tol:
        raise AdjointnessViolated(f"adjoint residual {r}", residual=r)
    return r


def stokes_residual(data: TwistedKahlerData, d_V: BlockOperator, d_W: BlockOperator) -> float:
    """Blockwise ``int d(a ^ b) = int (d a) ^ b + (-1)^{|a|} a ^ (d b)``, which must vanish."""
    worst = 0.0
    V = data.V.space
    for l, P in data.pairing.items():
        dV = d_V.blocks[l]
        sign = [(-1) ** (sum(V.degree_of_index(l, i)) % 2) for i in range(P.nrows)]
        first = dV.T @ P
        second = P @ d_W.blocks[l]
        R = Matrix([[first.rows[i][j] + sign[i] * second.rows[i][j] for j in range(P.ncols)]
                    for i in range(P.nrows)], P.nrows, P.ncols)
        worst = max(worst, R.max_abs())
    return worst


def lefschetz_adjoint_residual(data: TwistedKahlerData, variant: str = BIDEGREE) -> float:
    """``<L a, b> = <a, Lambda b>``: compare ``Lambda`` with the Gram adjoint of ``L``."""
    inner = inner_product(data, variant)
    return adjoint_residual(inner, data.V.L, dual_lefschetz(data.V, variant))
