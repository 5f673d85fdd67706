"""Twisted Dolbeault complexes of the line bundles over the quantum projective line.

For the weight-``k`` line bundle ``E_k`` the bundle-valued forms ``V`` are

    (0,0): x,  (0,1): e^- x',  (1,0): e^+ x'',  (1,1): e^+ e^- x

with ``x`` in the weight ``k`` slice, ``x'`` in weight ``k+2`` and ``x''`` in
weight ``k-2``.  The dual-bundle forms ``W`` are right forms ``y e^I`` of
total weight ``-k``.  Each component of each Peter-Weyl block ``l`` has the
basis ``t^l_{m, w/2}``, ``m = -l..l``.

All block matrices below are assembled from the action, star and Haar tables
of :class:`PeterWeyl`; :meth:`QCP1Model.engine_matrix` rebuilds any of them
from the polynomial form engine for cross-checking.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from ..graded import BigradedSpace, Block, BlockOperator
from ..hermitian import HermitianStructure, TwistedKahlerData, codifferential, dual_codifferential, dual_inner_product, inner_product
from ..chern import ChernConnection, FanoReport, PositivityCertificate, certify_positive, factorisation_rank
from ..hodge import DiracPackage, cohomology_dim, harmonic_dimension
from ..lefschetz import LefschetzPair
from ..linalg import EXACT, InconsistentSystem, Matrix, solve
from .algebra import CoordinateAlgebra
from .blocks import PeterWeyl, TRIANGULAR, haar_state, occurs, quantum_minor_table
from .forms import FormAlgebra

BIDEGREES = ((0, 0), (0, 1), (1, 0), (1, 1))
FRAME = {(0, 0): "", (0, 1): "-", (1, 0): "+", (1, 1): "+-"}


def v_slices(k: int) -> dict:
    return {(0, 0): k, (0, 1): k + 2, (1, 0): k - 2, (1, 1): k}


def w_slices(k: int) -> dict:
    return {(0, 0): -k, (0, 1): -k + 2, (1, 0): -k - 2, (1, 1): -k}


def _space(slices: dict, labels, name: str) -> BigradedSpace:
    comps = {}
    for bd, w in slices.items():
        comps[bd] = [Block(l, int(2 * l) + 1) for l in labels if occurs(l, w)]
    return BigradedSpace(comps, name)


@dataclass
class TwistedBundle:
    k: int
    data: TwistedKahlerData
    del_V: BlockOperator  # the (1,0) part of d on bundle-valued forms, from the form rules

    @property
    def V(self) -> BigradedSpace:
        return self.data.V.space

    @property
    def W(self) -> BigradedSpace:
        return self.data.W.space


class QCP1Model:
    """Quantum projective line at deformation ``q`` with Peter-Weyl cutoff ``lmax``."""

    def __init__(self, q=Fraction(4, 5), lmax=3, ar=EXACT, normalization: str = TRIANGULAR):
        self.ar = ar
        self.alg = CoordinateAlgebra(q if not isinstance(q, str) else Fraction(q), ar)
        self.q = self.alg.q
        self.lmax = Fraction(lmax)
        self.pw = PeterWeyl(self.alg, self.lmax, normalization)
        self.forms = FormAlgebra(self.alg)
        self.labels = self.pw.labels
        self.state = haar_state(self.pw)
        self._bundles: dict = {}

    # -- scalar tables -------------------------------------------------------

    def _E(self, l, w):
        return self.pw.action_on_slice("E", l, w)

    def _F(self, l, w):
        return self.pw.action_on_slice("F", l, w)

    def _id(self, l, c):
        return Matrix.identity(int(2 * l) + 1).scale(c)

    def _S(self, l, w) -> Matrix:
        return self.pw.star_matrix(l, w)

    def _H(self, l, w) -> Matrix:
        return self.pw.haar_table(l, w)

    # -- assembly ------------------------------------------------------------

    def bundle(self, k: int) -> TwistedBundle:
        got = self._bundles.get(k)
        if got is None:
            got = self._assemble(k)
            self._bundles[k] = got
        return got

    def _assemble(self, k: int) -> TwistedBundle:
        q, i = self.q, self.ar.i
        vs, ws = v_slices(k), w_slices(k)
        V = _space(vs, self.labels, f"Omega(E_{k})")
        W = _space(ws, self.labels, f"E_{k}^v(Omega)")
        present = lambda sp, l, bd: len(sp.span(l, bd)) > 0  # noqa: E731

        def op(src, tgt, table, antilinear=False, shift=None, name=""):
            def piece(l, sb, tb):
                if (sb, tb) not in table or not present(src, l, sb) or not present(tgt, l, tb):
                    return None
                return table[(sb, tb)](l)
            return BlockOperator.from_components(src, tgt, shift, piece, antilinear, name)

        dbar_V = op(V, V, {
            ((0, 0), (0, 1)): lambda l: self._id(l, q ** (-(k + 2)) * self._E(l, k)),
            ((1, 0), (1, 1)): lambda l: self._id(l, -q ** (-k) * self._E(l, k - 2)),
        }, shift=(0, 1), name="dbar")
        del_V = op(V, V, {
            ((0, 0), (1, 0)): lambda l: self._id(l, self._F(l, k)),
            ((0, 1), (1, 1)): lambda l: self._id(l, q * q * self._F(l, k + 2)),
        }, shift=(1, 0), name="del")
        L_V = op(V, V, {((0, 0), (1, 1)): lambda l: self._id(l, -i)}, shift=(1, 1), name="L")
        dbar_W = op(W, W, {
            ((0, 0), (0, 1)): lambda l: self._id(l, self._E(l, -k)),
            ((1, 0), (1, 1)): lambda l: self._id(l, -q * q * self._E(l, -k - 2)),
        }, shift=(0, 1), name="dbar")
        del_W = op(W, W, {
            ((0, 0), (1, 0)): lambda l: self._id(l, q ** (-k - 2) * self._F(l, -k)),
            ((0, 1), (1, 1)): lambda l: self._id(l, q ** (-k) * self._F(l, -k + 2)),
        }, shift=(1, 0), name="del")
        L_W = op(W, W, {((0, 0), (1, 1)): lambda l: self._id(l, -i)}, shift=(1, 1), name="L")
        C = op(V, W, {
            ((0, 0), (0, 0)): lambda l: self._S(l, k),
            ((0, 1), (1, 0)): lambda l: self._S(l, k + 2).scale(-1 / q),
            ((1, 0), (0, 1)): lambda l: self._S(l, k - 2).scale(-q),
            ((1, 1), (1, 1)): lambda l: self._S(l, k).scale(-1),
        }, antilinear=True, name="C_h")
        C_inv = op(W, V, {
            ((0, 0), (0, 0)): lambda l: self._S(l, -k),
            ((1, 0), (0, 1)): lambda l: self._S(l, -k - 2).scale(-q),
            ((0, 1), (1, 0)): lambda l: self._S(l, -k + 2).scale(-1 / q),
            ((1, 1), (1, 1)): lambda l: self._S(l, -k).scale(-1),
        }, antilinear=True, name="C_h^-1")
        pairing, pairing_wv = {}, {}
        vw = {((0, 0), (1, 1)): (Fraction(1), k), ((0, 1), (1, 0)): (-q * q, k + 2),
              ((1, 0), (0, 1)): (Fraction(1), k - 2), ((1, 1), (0, 0)): (Fraction(1), k)}
        wv = {((0, 0), (1, 1)): (q ** (2 * k), -k), ((1, 0), (0, 1)): (q ** (2 * k + 4), -k - 2),
              ((0, 1), (1, 0)): (-q * q * q ** (2 * k - 4), -k + 2), ((1, 1), (0, 0)): (q ** (2 * k), -k)}
        for l in sorted(set(V.labels) | set(W.labels)):
            P = Matrix.zeros(V.block_dim(l), W.block_dim(l))
            for (vb, wb), (c, w) in vw.items():
                rs, cs = V.span(l, vb), W.span(l, wb)
                if rs and cs:
                    T = self._H(l, w)
                    for a, r in enumerate(rs):
                        P.rows[r][cs.start:cs.stop] = [c * i * x for x in T.rows[a]]
            pairing[l] = P
            Q = Matrix.zeros(W.block_dim(l), V.block_dim(l))
            for (wb, vb), (c, w) in wv.items():
                rs, cs = W.span(l, wb), V.span(l, vb)
                if rs and cs:
                    T = self._H(l, w)
                    for a, r in enumerate(rs):
                        Q.rows[r][cs.start:cs.stop] = [c * i * x for x in T.rows[a]]
            pairing_wv[l] = Q
        VP = LefschetzPair(V, L_V, 1, self.ar)
        WP = LefschetzPair(W, L_W, 1, self.ar)
        data = TwistedKahlerData(VP, WP, C, C_inv, dbar_V, dbar_W, del_W, pairing, pairing_wv, self.ar)
        return TwistedBundle(k, data, del_V)

    # -- derived packages ----------------------------------------------------

    def dirac(self, k: int) -> DiracPackage:
        b = self.bundle(k)
        return b.data.memo("dirac", lambda: DiracPackage(
            b.data.dbar_V, codifferential(b.data, b.data.dbar_W), inner_product(b.data), self.ar))

    def dual_dirac(self, k: int) -> DiracPackage:
        b = self.bundle(k)
        return b.data.memo("dual_dirac", lambda: DiracPackage(
            b.data.dbar_W, dual_codifferential(b.data, b.data.dbar_V), dual_inner_product(b.data), self.ar))

    def cohomology(self, k: int) -> dict:
        """``{(a, b): (harmonic dimension, quotient dimension)}``."""
        pkg = self.dirac(k)
        return {bd: (harmonic_dimension(pkg, bd), cohomology_dim(pkg.d, bd, self.ar)) for bd in BIDEGREES}

    # -- Hermitian structure ------------------------------------------------

    def hermitian_structure(self, k: int) -> HermitianStructure:
        """``h(conj f)(g) = g f^*`` evaluated with the Haar state, per block of ``E_k``."""
        blocks = {}
        for l in self.labels:
            if not occurs(l, k):
                continue
            blocks[l] = (self._H(l, k) @ self._S(l, k)).T
        return HermitianStructure(blocks, self.ar)

    # -- sections, duals, frames --------------------------------------------

    def quantum_minor_table(self, k: int) -> list[dict]:
        return quantum_minor_table(self.alg, k)

    def section_vector(self, p: dict, k: int) -> dict:
        """Coordinates of a weight-``k`` polynomial as a (0,0) vector of the twisted complex."""
        V = self.bundle(k).V
        out = V.zero_vector()
        for l in V.labels:
            rng = V.span(l, (0, 0))
            if rng:
                for idx, c in zip(rng, self.pw.slice_vector(p, l, k)):
                    out[l][idx] = c
        return out

    def vector_to_form(self, k: int, v: dict, side: str = "V") -> dict:
        sp = self.bundle(k).V if side == "V" else self.bundle(k).W
        sl = v_slices(k) if side == "V" else w_slices(k)
        out: dict = {}
        for l in sp.labels:
            for bd in sp.bidegrees:
                rng = sp.span(l, bd)
                if not rng:
                    continue
                y = self.pw.slice_poly(l, sl[bd], [v[l][r] for r in rng])
                f = self.forms.form(FRAME[bd], y) if side == "V" else self.forms.right_form(y, FRAME[bd])
                out = self.forms.add((1, out), (1, f))
        return out

    def form_to_vector(self, k: int, f: dict, side: str = "V") -> dict:
        sp = self.bundle(k).V if side == "V" else self.bundle(k).W
        sl = v_slices(k) if side == "V" else w_slices(k)
        out = sp.zero_vector()
        for bd, fr in FRAME.items():
            y = f.get(fr, {})
            if not y:
                continue
            if side == "W":
                y = self.alg.act_K(y, self.forms.degree(fr))
            if self.alg.weights(y) - {sl[bd]}:
                raise ValueError(f"coefficient of {fr or '1'} has the wrong weight")
            for l in sp.labels:
                rng = sp.span(l, bd)
                if rng:
                    for idx, c in zip(rng, self.pw.slice_vector(y, l, sl[bd])):
                        out[l][idx] = c
        return out

    def engine_matrix(self, k: int, fn, source: str = "V", target: str = "V") -> dict:
        """Block matrices of a form-level map computed on basis vectors with the polynomial engine."""
        b = self.bundle(k)
        src = b.V if source == "V" else b.W
        tgt = b.V if target == "V" else b.W
        out = {}
        for l in src.labels:
            n = src.block_dim(l)
            cols = []
            for c in range(n):
                e = src.zero_vector()
                e[l][c] = Fraction(1)
                img = self.form_to_vector(k, fn(self.vector_to_form(k, e, source)), target)
                cols.append(img.get(l, [Fraction(0)] * tgt.block_dim(l)))
            out[l] = Matrix.from_columns(cols, tgt.block_dim(l)) if n else Matrix.zeros(tgt.block_dim(l), 0)
        return out

    def frame_twists(self) -> dict:
        """Weights of the coefficients forced by the frames: ``(1,0)`` and ``(0,1)`` forms on M."""
        t = self.pw.poly(1, 0, 0)
        dbar = self.forms.dbar({"": t})
        dl = self.forms.delta({"": t})
        w01 = self.alg.weights(dbar["-"]).pop()
        w10 = self.alg.weights(dl["+"]).pop()
        return {(1, 0): w10, (0, 1): w01}

    def coinvariant_11_dimension(self) -> int:
        """Dimension of the coinvariant (block ``l = 0``) part of the (1,1)-forms on M."""
        V = self.bundle(0).V
        return len(V.span(Fraction(0), (1, 1)))

    def kappa_is_coinvariant(self) -> bool:
        v = self.form_to_vector(0, self.forms.kappa())
        return all(self.ar.is_zero(x) for l in v if l != 0 for x in v[l])

    def evaluation_surjective(self, k: int, reverse: bool = False) -> tuple[bool, list]:
        """Does ``E_k (x) E_{-k} -> M`` (or the reverse order) reach 1?

        Uses the lowest blocks ``l = |k|/2`` of both slices.  Returns the flag and
        the pairs ``(x_i, y_i)`` with ``sum x_i y_i = 1`` when it exists.
        """
        l = Fraction(abs(k), 2)
        if l > self.lmax:
            raise ValueError("cutoff too small for this bundle")
        xs = self.pw.slice_basis(l, k)
        ys = self.pw.slice_basis(l, -k)
        first, second = (ys, xs) if reverse else (xs, ys)
        products = [(a, b, self.alg.mul(a, b)) for a in first for b in second]
        keys = sorted({m for _, _, p in products for m in p} | {(0, 0, 0, 0)})
        pos = {m: r for r, m in enumerate(keys)}
        A = Matrix.zeros(len(keys), len(products))
        for c, (_, _, p) in enumerate(products):
            for m, v in p.items():
                A.rows[pos[m]][c] = v
        rhs = [Fraction(0)] * len(keys)
        rhs[pos[(0, 0, 0, 0)]] = Fraction(1)
        try:
            sol = solve(A, rhs, self.ar)
        except InconsistentSystem:
            return False, []
        pairs = [(a, {kk: s * v for kk, v in b.items()}) for s, (a, b, _) in zip(sol, products) if s != 0]
        return True, pairs

    def dual_basis(self, k: int) -> list[tuple[dict, dict]]:
        """Pairs ``(y_i, x_i)`` with ``y_i`` of weight ``-k``, ``x_i`` of weight ``k`` and
        ``sum y_i x_i = 1``; then ``p = sum (p y_i) x_i`` for every ``p`` of weight ``k``."""
        ok, pairs = self.evaluation_surjective(k, reverse=True)
        if not ok:
            raise ValueError(f"no dual basis for E_{k}")
        return pairs

    def check_invertible(self, weights: list[int]) -> bool:
        """Is the direct sum of the line bundles ``E_w`` an invertible bimodule?

        Needs rank one over M and both evaluation maps onto M.
        """
        if len(weights) != 1:
            return False
        k = weights[0]
        return self.evaluation_surjective(k)[0] and self.evaluation_surjective(k, reverse=True)[0]

    def frame_products(self, basis: tuple[str, ...] = ("+-",)) -> list[Matrix]:
        """Coordinates of ``e^+ e^-`` and ``e^- e^+`` in the given basis of (1,1)-frames."""
        one = self.alg.one()
        out = []
        for a, b in (("+", "-"), ("-", "+")):
            prod = self.forms.mul({a: one}, {b: one})
            col = []
            for fr in basis:
                y = prod.pop(fr, {})
                col.append(y.get((0, 0, 0, 0), Fraction(0)))
            if prod:
                raise ValueError("product leaves the span of the supplied frames")
            out.append(Matrix([[c] for c in col], len(col), 1))
        return out

    def positivity(self, k: int, tol: float = 0.0) -> PositivityCertificate:
        return certify_positive(ChernConnection(self.bundle(k).data), bundle=k, tol=tol)

    def fano_report(self, basis_11: tuple[str, ...] = ("+-",), tol: float = 0.0) -> FanoReport:
        """Factorisability, invertible canonical bundle, positive anticanonical bundle, ``h^{0,1} = 0``."""
        try:
            fact = factorisation_rank(self.frame_products(basis_11), len(basis_11), self.ar)
        except ValueError:
            fact = False
        canonical = self.frame_twists()[(1, 0)]
        inv = self.check_invertible([canonical])
        anti = self.positivity(-canonical, tol)
        h01 = self.cohomology(0)[(0, 1)][0]
        return FanoReport(fact, inv, anti.passed, h01,
                          {"canonical_weight": canonical, "anticanonical_scale": anti.scale})


def build_calculus(q=Fraction(4, 5), lmax=3, ar=EXACT, normalization: str = TRIANGULAR) -> QCP1Model:
    return QCP1Model(q, lmax, ar, normalization)

