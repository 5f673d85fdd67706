"""Peter-Weyl blocks of quantum SU(2): matrix coefficients and their data.

The matrix coefficient ``t^l_{m,n}`` has row weight ``2m`` and column weight
``2n``.  The top column is ``t^l_{m,l} = d^{l-m} b^{l+m}`` and lower columns
come from the F-ladder:

* triangular normalisation: ``t_{m,n-1} = F > t_{m,n} / [l+n]``, so that
  ``F`` has coefficient ``[l+n]`` and ``E`` has ``[l-n]`` (no square roots);
* unitary normalisation (approximate mode only): divide by
  ``sqrt([l+n][l-n+1])`` instead.

Everything else (action matrices, star matrices, Haar tables) is *computed*
from the polynomial engine, not written down.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from ..linalg import EXACT, Matrix, inverse, is_positive_definite
from .algebra import CoordinateAlgebra, InvalidQ, degree, monomials, row_weight, weight

TRIANGULAR = "triangular"
UNITARY = "unitary"


def half_range(l: Fraction) -> list[Fraction]:
    """``-l, -l+1, ..., l``."""
    return [-l + i for i in range(int(2 * l) + 1)]


def labels_up_to(lmax) -> list[Fraction]:
    lmax = Fraction(lmax)
    return [Fraction(i, 2) for i in range(int(2 * lmax) + 1)]


def occurs(l: Fraction, w: int) -> bool:
    """Does block ``l`` meet the column-weight ``w`` slice?"""
    return 2 * l >= abs(w) and (2 * l - w) % 2 == 0


@dataclass
class QuantumSU2Block:
    label: Fraction
    polys: dict  # (m, n) -> polynomial
    E: Matrix  # action on the column index, basis ordered n = -l..l
    F: Matrix
    K: Matrix

    @property
    def dim(self) -> int:
        return int(2 * self.label) + 1

    @property
    def indices(self) -> list[Fraction]:
        return half_range(self.label)


class PeterWeyl:
    """Matrix coefficients up to ``lmax`` and the change of basis from monomials.

    Normal monomials of degree ``<= 2 lmax`` with fixed row and column weight
    span the same space as the matching ``t^l_{m,n}``; each such slice is a
    square system, inverted once.
    """

    def __init__(self, alg: CoordinateAlgebra, lmax, normalization: str = TRIANGULAR):
        if normalization not in (TRIANGULAR, UNITARY):
            raise ValueError(normalization)
        if normalization == UNITARY and alg.ar.exact:
            raise ValueError("the unitary normalisation needs square roots; use approximate mode")
        self.alg = alg
        self.ar = alg.ar
        self.lmax = Fraction(lmax)
        if self.lmax < 0 or (2 * self.lmax).denominator != 1:
            raise ValueError("lmax must be a non-negative half-integer")
        self.normalization = normalization
        self.labels = labels_up_to(self.lmax)
        self.polys: dict = {}
        for l in self.labels:
            self._build_block_polys(l)
        self._slices: dict = {}
        self._build_change_of_basis()
        self.blocks = {l: self._block_data(l) for l in self.labels}

    # -- construction --------------------------------------------------------

    def _build_block_polys(self, l: Fraction) -> None:
        alg = self.alg
        two_l = int(2 * l)
        for m in half_range(l):
            i, j = int(l - m), int(l + m)
            top = alg.from_word("d" * i + "b" * j)
            self.polys[(l, m, l)] = top
            cur = top
            for n in reversed(half_range(l)[1:]):
                f = alg.act_F(cur)
                if self.normalization == TRIANGULAR:
                    c = 1 / alg.qint(int(l + n))
                else:
                    c = 1 / self.ar.sqrt(alg.qint(int(l + n)) * alg.qint(int(l - n + 1)))
                cur = {k: c * v for k, v in f.items()}
                self.polys[(l, m, n - 1)] = cur
        assert len([k for k in self.polys if k[0] == l]) == (two_l + 1) ** 2

    def _build_change_of_basis(self) -> None:
        maxdeg = int(2 * self.lmax)
        groups: dict = {}
        for key in monomials(maxdeg):
            groups.setdefault((row_weight(key), weight(key)), []).append(key)
        for (rw, cw), keys in groups.items():
            m, n = Fraction(rw, 2), Fraction(cw, 2)
            basis = [(l, m, n) for l in self.labels if l >= abs(m) and l >= abs(n) and (l - m).denominator == 1]
            if len(basis) != len(keys):
                raise AssertionError(f"weight slice {(rw, cw)}: {len(keys)} monomials but {len(basis)} coefficients")
            pos = {k: i for i, k in enumerate(keys)}
            T = Matrix.zeros(len(keys), len(basis))
            for c, b in enumerate(basis):
                for k, v in self.polys[b].items():
                    T.rows[pos[k]][c] = v
            self._slices[(rw, cw)] = (pos, basis, inverse(T, self.ar))

    def coords(self, p: dict) -> dict:
        """Coordinates of a polynomial of degree ``<= 2 lmax`` in the ``t^l_{m,n}``."""
        grouped: dict = {}
        for k, v in p.items():
            if degree(k) > 2 * self.lmax:
                raise ValueError("polynomial exceeds the Peter-Weyl cutoff")
            grouped.setdefault((row_weight(k), weight(k)), {})[k] = v
        out: dict = {}
        for bw, terms in grouped.items():
            pos, basis, Tinv = self._slices[bw]
            vec = [0 * self.alg._one] * len(pos)
            for k, v in terms.items():
                vec[pos[k]] = v
            for b, c in zip(basis, Tinv.apply(vec)):
                if not self.ar.is_zero(c):
                    out[b] = c
        return out

    def _block_data(self, l: Fraction) -> QuantumSU2Block:
        alg = self.alg
        idx = half_range(l)
        d = len(idx)
        polys = {(m, n): self.polys[(l, m, n)] for m in idx for n in idx}
        mats = {}
        for name in ("E", "F", "K"):
            M = None
            for m in idx:
                cur = Matrix.zeros(d, d)
                for c, n in enumerate(idx):
                    img = self.coords(alg.act(name, polys[(m, n)]))
                    for (l2, m2, n2), v in img.items():
                        if l2 != l or m2 != m:
                            raise AssertionError("the action left the block or changed the row index")
                        cur.rows[idx.index(n2)][c] = v
                if M is None:
                    M = cur
                elif not (M - cur).is_zero(self.ar):
                    raise AssertionError("action matrices depend on the row index")
            mats[name] = M
        return QuantumSU2Block(l, polys, mats["E"], mats["F"], mats["K"])

    # -- derived tables ------------------------------------------------------

    def poly(self, l, m, n) -> dict:
        return self.polys[(Fraction(l), Fraction(m), Fraction(n))]

    def slice_basis(self, l: Fraction, w: int) -> list[dict]:
        n = Fraction(w, 2)
        return [self.polys[(l, m, n)] for m in half_range(l)]

    def slice_vector(self, p: dict, l: Fraction, w: int) -> list:
        """Coordinates (over the row index) of the block-``l`` part of ``p`` in slice ``w``."""
        c = self.coords(p)
        n = Fraction(w, 2)
        zero = 0 * self.alg._one
        return [c.get((l, m, n), zero) for m in half_range(l)]

    def slice_poly(self, l: Fraction, w: int, vec) -> dict:
        out: dict = {}
        for c, p in zip(vec, self.slice_basis(l, w)):
            if c != 0:
                out = self.alg.add((1, out), (c, p))
        return out

    def action_on_slice(self, name: str, l: Fraction, w: int):
        """Scalar by which ``E``/``F``/``K`` maps slice ``w`` to its target slice (block ``l``)."""
        blk = self.blocks[l]
        idx = blk.indices
        n = Fraction(w, 2)
        src = idx.index(n)
        M = getattr(blk, name)
        if name == "E":
            return M.rows[src + 1][src] if src + 1 < len(idx) else 0 * self.alg._one
        if name == "F":
            return M.rows[src - 1][src] if src > 0 else 0 * self.alg._one
        return M.rows[src][src]

    def star_matrix(self, l: Fraction, w: int) -> Matrix:
        """Matrix of ``x -> x*`` from slice ``w`` to slice ``-w`` (block ``l``), before conjugation."""
        key = ("star", l, w)
        got = self._slices.get(key)
        if got is not None:
            return got
        idx = half_range(l)
        M = Matrix.zeros(len(idx), len(idx))
        for c, p in enumerate(self.slice_basis(l, w)):
            img = self.coords(self.alg.star(p))
            for (l2, m2, n2), v in img.items():
                if l2 != l or n2 != Fraction(-w, 2):
                    raise AssertionError("star left the expected block or slice")
                M.rows[idx.index(m2)][c] = v
        self._slices[key] = M
        return M

    def haar_table(self, l: Fraction, w: int) -> Matrix:
        """``h(t^l_{m, w/2} t^l_{m', -w/2})`` indexed by ``(m, m')``."""
        key = ("haar", l, w)
        got = self._slices.get(key)
        if got is not None:
            return got
        left = self.slice_basis(l, w)
        right = self.slice_basis(l, -w)
        idx = half_range(l)
        M = Matrix.zeros(len(idx), len(idx))
        for i, x in enumerate(left):
            for j, y in enumerate(right):
                if idx[i] + idx[j] != 0:
                    continue  # row weights must cancel for a nonzero Haar value
                M.rows[i][j] = self.alg.haar_of_product(x, y)
        self._slices[key] = M
        return M


def build_blocks(q, lmax, ar=EXACT, normalization: str = TRIANGULAR) -> list[QuantumSU2Block]:
    """Blocks ``l = 0, 1/2, ..., lmax`` with their action matrices."""
    alg = CoordinateAlgebra(q, ar)
    pw = PeterWeyl(alg, lmax, normalization)
    return [pw.blocks[l] for l in pw.labels]


def block_relation_residuals(block: QuantumSU2Block, q, ar=EXACT) -> dict:
    """Residuals of ``[E,F] = (K - K^-1)/(q - q^-1)`` and ``K E K^-1 = q^2 E``."""
    K, E, F = block.K, block.E, block.F
    Kinv = inverse(K, ar)
    q = ar.scalar(q)
    c = 1 / (q - 1 / q)
    r1 = (E @ F - F @ E) - (K - Kinv).scale(c)
    r2 = K @ E @ Kinv - E.scale(q * q)
    r3 = K @ F @ Kinv - F.scale(1 / (q * q))
    return {"[E,F]": r1.max_abs(), "KEK^-1": r2.max_abs(), "KFK^-1": r3.max_abs()}


@dataclass
class LineBundleSlice:
    k: int
    lmax: Fraction
    dims: dict = field(default_factory=dict)

    @property
    def labels(self) -> list[Fraction]:
        return [l for l, d in self.dims.items() if d]


def line_bundle(k: int, lmax) -> LineBundleSlice:
    """Dimension profile of the weight-``k`` slice below the cutoff."""
    dims = {l: (int(2 * l) + 1 if occurs(l, k) else 0) for l in labels_up_to(lmax)}
    return LineBundleSlice(k, Fraction(lmax), dims)


@dataclass
class StateFunctional:
    """Haar state restricted to the blocks below a cutoff."""

    pw: PeterWeyl

    def __call__(self, p: dict):
        return self.pw.alg.haar(p)

    def gram(self, l: Fraction) -> Matrix:
        """``(x, y) -> h(x y*)`` on the basis ``t^l_{m,n}`` (ordered by (m, n))."""
        pw = self.pw
        blk = pw.blocks[l]
        keys = [(m, n) for m in blk.indices for n in blk.indices]
        M = Matrix.zeros(len(keys), len(keys))
        stars = {kk: pw.alg.star(blk.polys[kk]) for kk in keys}
        for i, ki in enumerate(keys):
            for j, kj in enumerate(keys):
                if ki == kj:
                    M.rows[i][j] = pw.alg.haar_of_product(blk.polys[kj], stars[ki])
                # other entries vanish by weight; see the tests
        return M

    def positive(self) -> bool:
        return all(is_positive_definite(self.gram(l), self.pw.ar) for l in self.pw.labels)


def haar_state(pw: PeterWeyl) -> StateFunctional:
    return StateFunctional(pw)


def quantum_minor_table(alg: CoordinateAlgebra, k: int) -> list[dict]:
    """The products ``b^i d^(k-i)``, ``i = 0..k``: holomorphic sections of the weight-k slice."""
    if k < 0:
        raise ValueError("only defined for k >= 0")
    return [alg.from_word("b" * i + "d" * (k - i)) for i in range(k + 1)]


__all__ = [
    "InvalidQ", "PeterWeyl", "QuantumSU2Block", "build_blocks", "block_relation_residuals",
    "line_bundle", "LineBundleSlice", "haar_state", "StateFunctional", "quantum_minor_table",
    "half_range", "labels_up_to", "occurs", "TRIANGULAR", "UNITARY",
]
