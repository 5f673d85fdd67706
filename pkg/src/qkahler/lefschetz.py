"""Lefschetz pairs and triples.

A Lefschetz pair is a graded space ``X = X^0 + ... + X^{2n}`` with a degree-2
map ``L`` such that ``L^{n-k}: X^k -> X^{2n-k}`` is bijective for ``k < n``.
Everything here is computed block by block on the underlying block matrices.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb, factorial
from typing import Mapping, Sequence

from .graded import BigradedSpace, Block, BlockOperator, Bidegree, compose, graded_commutator
from .linalg import EXACT, Matrix, inverse, kernel_basis, rank, solve

TOTAL_DEGREE = "total-degree"
BIDEGREE = "bidegree"


class NotLefschetz(ValueError):
    pass


class MissingBidegree(ValueError):
    pass


class IdentityViolated(AssertionError):
    def __init__(self, message: str, label=None, degree=None):
        super().__init__(message)
        self.label = label
        self.degree = degree


class NotPrimitive(ValueError):
    pass


def _col(m: Matrix, idx: Sequence[int]) -> Matrix:
    return m.submatrix(range(m.nrows), idx)


class LefschetzPair:
    """``(X, L)`` with ``L`` of bidegree (1, 1) and half total degree ``n``.

    ``has_bidegrees`` is False for pairs that only carry a total degree; such
    spaces are stored with every component in bidegree ``(k, 0)``.
    """

    def __init__(self, space: BigradedSpace, L: BlockOperator, n: int, ar=EXACT,
                 has_bidegrees: bool = True, validate: bool = True):
        self.space = space
        self.L = L
        self.n = n
        self.ar = ar
        self.has_bidegrees = has_bidegrees
        self._Lpow: dict = {}
        self._prim: dict = {}
        self._frame: dict = {}
        self._ops: dict = {}
        if validate:
            self.validate()

    # -- block helpers -------------------------------------------------------

    def L_power(self, label, j: int) -> Matrix:
        key = (label, j)
        m = self._Lpow.get(key)
        if m is None:
            d = self.space.block_dim(label)
            m = Matrix.identity(d) if j == 0 else self.L.blocks[label] @ self.L_power(label, j - 1)
            self._Lpow[key] = m
        return m

    def degree_indices(self, label, k: int) -> list[int]:
        return self.space.degree_indices(label, k)

    def bidegrees_of_degree(self, k: int) -> list[Bidegree]:
        return [bd for bd in self.space.bidegrees if sum(bd) == k]

    def validate(self) -> None:
        n = self.n
        for l in self.space.labels:
            for k in range(n):
                src = self.degree_indices(l, k)
                tgt = self.degree_indices(l, 2 * n - k)
                if len(src) != len(tgt):
                    raise NotLefschetz(f"dim X^{k} != dim X^{2 * n - k} in block {l}")
                if not src:
                    continue
                m = self.L_power(l, n - k).submatrix(tgt, src)
                if rank(m, self.ar) != len(src):
                    raise NotLefschetz(f"L^{n - k} is not injective on X^{k} in block {l}")
            for k in self.space.total_degrees:
                if k < 0 or k > 2 * n:
                    raise NotLefschetz(f"degree {k} outside 0..{2 * n}")

    # -- primitives -----------------------------------------------------------

    def primitive_component(self, label, bideg: Bidegree) -> list[list]:
        """Basis of the primitives of bidegree ``bideg`` as block vectors."""
        key = (label, tuple(bideg))
        got = self._prim.get(key)
        if got is not None:
            return got
        k = sum(bideg)
        src = list(self.space.span(label, bideg))
        out: list[list] = []
        if src and k <= self.n:
            m = _col(self.L_power(label, self.n - k + 1), src)
            for v in kernel_basis(m, self.ar):
                full = [Fraction(0)] * self.space.block_dim(label)
                for i, c in zip(src, v):
                    full[i] = c
                out.append(full)
        self._prim[key] = out
        return out

    def frame(self, label):
        """Basis adapted to the Lefschetz decomposition.

        Returns ``(B, tags)`` where column ``c`` of ``B`` is ``L^j p`` for the
        primitive basis vector ``p`` described by ``tags[c] = (j, bidegree, index)``.
        """
        got = self._frame.get(label)
        if got is not None:
            return got
        cols, tags = [], []
        for bd in self.space.bidegrees:
            m = sum(bd)
            for idx, p in enumerate(self.primitive_component(label, bd)):
                for j in range(self.n - m + 1):
                    cols.append(self.L_power(label, j).apply(p))
                    tags.append((j, bd, idx))
        d = self.space.block_dim(label)
        if len(cols) != d:
            raise NotLefschetz(f"Lefschetz decomposition has {len(cols)} vectors for dimension {d} in block {label}")
        B = Matrix.from_columns(cols, d)
        self._frame[label] = (B, tags)
        return B, tags


def primitive_basis(P: LefschetzPair, k: int) -> dict:
    """``P^k = ker L^{n-k+1}`` on ``X^k`` (empty for ``k > n``), per block."""
    out = {}
    for l in P.space.labels:
        vecs: list[list] = []
        for bd in P.bidegrees_of_degree(k):
            vecs.extend(P.primitive_component(l, bd))
        out[l] = vecs
    return out


def primitive_dimension(P: LefschetzPair, k: int) -> int:
    return sum(len(v) for v in primitive_basis(P, k).values())


def _decompose_block(P: LefschetzPair, l, v: list, k: int) -> dict[int, list]:
    """Inductive split ``X^k = P^k + L(X^{k-2})``; returns ``{j: alpha_j}``."""
    n = P.n
    d = P.space.block_dim(l)
    zero = [Fraction(0)] * d
    if k < 0 or all(P.ar.is_zero(x) for x in v):
        return {}
    idx = P.degree_indices(l, k)
    prev = P.degree_indices(l, k - 2) if k >= 2 else []
    prims = [p for bd in P.bidegrees_of_degree(k) for p in P.primitive_component(l, bd)] if k <= n else []
    Lm = P.L.blocks[l]
    lift_cols = [Lm.apply([Fraction(1) if i == c else Fraction(0) for i in range(d)]) for c in prev]
    cols = [[p[i] for i in idx] for p in prims] + [[w[i] for i in idx] for w in lift_cols]
    if not cols:
        raise NotLefschetz(f"nonzero vector in empty degree {k}")
    sol = solve(Matrix.from_columns(cols, len(idx)), [v[i] for i in idx], P.ar)
    out: dict[int, list] = {}
    prim_part = list(zero)
    for c, p in zip(sol[:len(prims)], prims):
        if c != 0:
            prim_part = [x + c * y for x, y in zip(prim_part, p)]
    if prims and not all(P.ar.is_zero(x) for x in prim_part):
        out[0] = prim_part
    w = list(zero)
    for c, i in zip(sol[len(prims):], prev):
        w[i] = c
    for j, alpha in _decompose_block(P, l, w, k - 2).items():
        m = k - 2 - 2 * j
        if j + 1 <= n - m:  # otherwise L^{j+1} alpha = 0
            out[j + 1] = alpha
    return out


def lefschetz_decompose(P: LefschetzPair, v: Mapping, k: int) -> list[tuple[int, dict]]:
    """Write a degree-``k`` vector as ``sum_j L^j(alpha_j)`` with ``alpha_j`` primitive."""
    per_block = {l: _decompose_block(P, l, list(v[l]), k) for l in P.space.labels}
    js = sorted({j for d in per_block.values() for j in d})
    out = []
    for j in js:
        alpha = {l: per_block[l].get(j, [Fraction(0)] * P.space.block_dim(l)) for l in P.space.labels}
        out.append((j, alpha))
    return out


def reconstruct(P: LefschetzPair, terms: Sequence[tuple[int, Mapping]]) -> dict:
    out = P.space.zero_vector()
    for j, alpha in terms:
        for l in P.space.labels:
            w = P.L_power(l, j).apply(alpha[l])
            out[l] = [x + y for x, y in zip(out[l], w)]
    return out


# ---------------------------------------------------------------------------
# Hodge map, dual Lefschetz and counting operators


def q_factorial(m: int, q) -> object:
    out = Fraction(1) if isinstance(q, Fraction) else q ** 0
    for r in range(1, m + 1):
        out = out * (q ** r - q ** (-r)) / (q - q ** (-1))
    return out


def hodge_coefficient(P: LefschetzPair, variant: str, j: int, bd: Bidegree, quantum_q=None):
    n = P.n
    a, b = bd
    k = a + b
    i = P.ar.i
    sign = -1 if (k * (k + 1) // 2) % 2 else 1
    power = k if variant == TOTAL_DEGREE else a - b
    ipow = i ** (power % 4)
    if quantum_q is None:
        ratio = Fraction(factorial(j), factorial(n - j - k))
    else:
        ratio = q_factorial(j, quantum_q) / q_factorial(n - j - k, quantum_q)
    return P.ar.scalar(sign * ratio) * ipow if not P.ar.exact else sign * ratio * ipow


def hodge_operator(P: LefschetzPair, variant: str = BIDEGREE, quantum_q=None) -> BlockOperator:
    """``*_H(L^j alpha) = (-1)^{k(k+1)/2} i^p j!/(n-j-k)! L^{n-j-k} alpha``.

    ``p`` is ``k`` for the total-degree variant and ``a - b`` for the bidegree
    variant.  ``quantum_q`` switches to quantum factorials.
    """
    if variant == BIDEGREE and not P.has_bidegrees:
        raise MissingBidegree("the bidegree Hodge map needs (a, b) data")
    if variant not in (BIDEGREE, TOTAL_DEGREE):
        raise ValueError(variant)
    cached = P._ops.get(("hodge", variant, quantum_q))
    if cached is not None:
        return cached
    blocks = {}
    for l in P.space.labels:
        B, tags = P.frame(l)
        pos = {t: c for c, t in enumerate(tags)}
        d = len(tags)
        D = Matrix.zeros(d, d)
        for c, (j, bd, idx) in enumerate(tags):
            k = sum(bd)
            D.rows[pos[(P.n - j - k, bd, idx)]][c] = hodge_coefficient(P, variant, j, bd, quantum_q)
        blocks[l] = B @ D @ inverse(B, P.ar)
    op = BlockOperator(P.space, P.space, blocks, None, name="*H")
    P._ops[("hodge", variant, quantum_q)] = op
    return op


def hodge_star(P: LefschetzPair, variant: str, v: Mapping, quantum_q=None) -> dict:
    return hodge_operator(P, variant, quantum_q).apply(v)


def parity_operator(P: LefschetzPair) -> BlockOperator:
    return BlockOperator.diagonal(P.space, lambda bd: Fraction((-1) ** ((bd[0] + bd[1]) % 2)), name="(-1)^k")


def dual_lefschetz(P: LefschetzPair, variant: str = BIDEGREE) -> BlockOperator:
    """``Lambda = *_H^{-1} L *_H`` (using ``*_H^{-1} = (-1)^k *_H``)."""
    variant = variant if P.has_bidegrees else TOTAL_DEGREE
    cached = P._ops.get(("Lambda", variant))
    if cached is None:
        star = hodge_operator(P, variant)
        inv = compose(parity_operator(P), star)
        cached = compose(inv, compose(P.L, star)).with_shift((-1, -1))
        P._ops[("Lambda", variant)] = cached
    return cached


def dual_lefschetz_from_formula(P: LefschetzPair) -> BlockOperator:
    """``Lambda L^j alpha = j (n-j-k+1) L^{j-1} alpha`` assembled on the frame."""
    blocks = {}
    for l in P.space.labels:
        B, tags = P.frame(l)
        pos = {t: c for c, t in enumerate(tags)}
        d = len(tags)
        D = Matrix.zeros(d, d)
        for c, (j, bd, idx) in enumerate(tags):
            if j > 0:
                D.rows[pos[(j - 1, bd, idx)]][c] = Fraction(j * (P.n - j - sum(bd) + 1))
        blocks[l] = B @ D @ inverse(B, P.ar)
    return BlockOperator(P.space, P.space, blocks, (-1, -1), name="Lambda")


def counting_operator(P: LefschetzPair) -> BlockOperator:
    """``H = (k - n)`` on ``X^k``."""
    return BlockOperator.diagonal(P.space, lambda bd: Fraction(bd[0] + bd[1] - P.n), name="H")


@dataclass
class Sl2Report:
    residuals: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return all(r == 0 for r in self.residuals.values())

    def max_residual(self) -> float:
        return max(self.residuals.values(), default=0.0)


def _defect(op: BlockOperator) -> float:
    return op.max_residual()


def verify_sl2(P: LefschetzPair, variant: str = BIDEGREE, tol: float = 0.0, raise_on_failure: bool = True) -> Sl2Report:
    """Check ``[H, L] = 2L``, ``[L, Lambda] = H`` and ``[H, Lambda] = -2 Lambda``."""
    L = P.L.with_shift((1, 1))
    Lam = dual_lefschetz(P, variant)
    H = counting_operator(P)
    report = Sl2Report()
    checks = {
        "[H,L]=2L": graded_commutator(H, L, 0, 2) - L.scale(2),
        "[L,Lambda]=H": (graded_commutator(L, Lam, 2, -2) - H).with_shift(None),
        "[H,Lambda]=-2Lambda": graded_commutator(H, Lam, 0, -2) + Lam.scale(2),
    }
    for name, op in checks.items():
        r = _defect(op)
        report.residuals[name] = r
        if r > tol and raise_on_failure:
            for l, m in op.blocks.items():
                if m.max_abs() > tol:
                    bad = next(c for c in range(m.ncols) if any(abs(m.rows[r_][c]) > tol for r_ in range(m.nrows)))
                    deg = sum(P.space.degree_of_index(l, bad))
                    raise IdentityViolated(f"{name} fails with residual {r}", label=l, degree=deg)
    return report


# ---------------------------------------------------------------------------
# Lefschetz triples


class LefschetzTriple:
    """A Lefschetz pair with a degree-one map ``d`` commuting with ``L``."""

    def __init__(self, pair: LefschetzPair, d: BlockOperator, check: bool = True):
        self.pair = pair
        self.d = d
        if check:
            c = compose(pair.L, d) - compose(d, pair.L)
            if not c.is_zero(pair.ar, None if pair.ar.exact else max(1.0, d.max_abs())):
                raise NotLefschetz("[L, d] != 0")


def _is_primitive(P: LefschetzPair, alpha: Mapping, k: int) -> bool:
    if k > P.n:
        return all(P.ar.is_zero(x) for l in P.space.labels for x in alpha[l])
    for l in P.space.labels:
        w = P.L_power(l, P.n - k + 1).apply(alpha[l])
        if not all(P.ar.is_zero(x) for x in w):
            return False
        idx = set(P.degree_indices(l, k))
        if any(not P.ar.is_zero(x) for i, x in enumerate(alpha[l]) if i not in idx):
            return False
    return True


def triple_split_d(T: LefschetzTriple, alpha: Mapping, k: int) -> tuple[dict, dict]:
    """The primitives ``alpha0`` in ``P^{k+1}`` and ``alpha1`` in ``P^{k-1}`` with
    ``d alpha = alpha0 + L alpha1``."""
    P = T.pair
    if not _is_primitive(P, alpha, k):
        raise NotPrimitive(f"input is not a primitive of degree {k}")
    terms = dict(lefschetz_decompose(P, T.d.apply(alpha), k + 1))
    extra = set(terms) - {0, 1}
    if extra:
        raise IdentityViolated(f"d alpha has components L^j with j in {sorted(extra)}")
    zero = P.space.zero_vector()
    return terms.get(0, zero), terms.get(1, zero)


def _sub(u: Mapping, v: Mapping) -> dict:
    return {l: [x - y for x, y in zip(u[l], v[l])] for l in u}


def _scale(c, v: Mapping) -> dict:
    return {l: [c * x for x in v[l]] for l in v}


def _Lj(P: LefschetzPair, j: int, v: Mapping) -> dict:
    if j < 0:
        return P.space.zero_vector()
    return {l: P.L_power(l, j).apply(v[l]) for l in P.space.labels}


def triple_identity_residuals(T: LefschetzTriple, alpha: Mapping, k: int, j: int,
                              Lam: BlockOperator | None = None) -> tuple[float, float]:
    """Residuals of ``d L^j alpha = L^j alpha0 + L^{j+1} alpha1`` and of
    ``[Lambda, d] L^j alpha = -j L^{j-1} alpha0 + (n-j-k+1) L^j alpha1``."""
    P = T.pair
    a0, a1 = triple_split_d(T, alpha, k)
    Lja = _Lj(P, j, alpha)
    lhs1 = T.d.apply(Lja)
    rhs1 = {l: [x + y for x, y in zip(_Lj(P, j, a0)[l], _Lj(P, j + 1, a1)[l])] for l in P.space.labels}
    Lam = Lam if Lam is not None else dual_lefschetz(P)
    comm = compose(Lam, T.d) - compose(T.d, Lam)
    lhs2 = comm.apply(Lja)
    t0 = _scale(-j, _Lj(P, j - 1, a0))
    t1 = _scale(P.n - j - k + 1, _Lj(P, j, a1))
    rhs2 = {l: [x + y for x, y in zip(t0[l], t1[l])] for l in P.space.labels}

    def norm(v):
        return max((float(abs(x)) for l in v for x in v[l]), default=0.0)
    return norm(_sub(lhs1, rhs1)), norm(_sub(lhs2, rhs2))


# ---------------------------------------------------------------------------
# the exterior algebra of C^{2n}


def exterior_space(n: int, label=0) -> tuple[BigradedSpace, dict]:
    """``Lambda(C^{2n})`` with ``e_{2j-1} = dz_j`` of bidegree (1,0) and
    ``e_{2j} = dzbar_j`` of bidegree (0,1); one block.  Returns the space and
    the index of each basis subset within its block."""
    gens = range(1, 2 * n + 1)
    comps: dict[Bidegree, list] = {}
    for size in range(2 * n + 1):
        for s in itertools.combinations(gens, size):
            a = sum(1 for g in s if g % 2 == 1)
            comps.setdefault((a, size - a), []).append(s)
    space = BigradedSpace({bd: [Block(label, len(v), tuple("^".join(f"e{g}" for g in s) or "1" for s in v))]
                           for bd, v in comps.items()}, f"Lambda(C^{2 * n})")
    index = {}
    for bd, subsets in comps.items():
        rng = space.span(label, bd)
        for i, s in zip(rng, subsets):
            index[s] = i
    return space, index


def wedge_sign(g: int, s: tuple[int, ...]) -> int:
    return -1 if sum(1 for x in s if x < g) % 2 else 1


def exterior_wedge_operator(space: BigradedSpace, index: dict, g: int, label=0) -> Matrix:
    """Matrix of ``e_g ^ -`` on the exterior algebra block."""
    d = space.block_dim(label)
    m = Matrix.zeros(d, d)
    for s, i in index.items():
        if g in s:
            continue
        t = tuple(sorted(s + (g,)))
        m.rows[index[t]][i] = Fraction(wedge_sign(g, s))
    return m


def exterior_pair(n: int, scale=Fraction(1), ar=EXACT) -> LefschetzPair:
    """Lefschetz pair of ``Lambda(C^{2n})`` with ``L = scale * sum_j e_{2j-1} ^ e_{2j}``."""
    space, index = exterior_space(n)
    d = space.block_dim(0)
    Lm = Matrix.zeros(d, d)
    for j in range(1, n + 1):
        Lm = Lm + exterior_wedge_operator(space, index, 2 * j - 1) @ exterior_wedge_operator(space, index, 2 * j)
    Lm = Lm.scale(scale)
    L = BlockOperator(space, space, {0: Lm}, (1, 1), name="L")
    return LefschetzPair(space, L, n, ar)


def exterior_derivative_like(n: int, coefficients: Sequence, scale=Fraction(1)) -> BlockOperator:
    """Left wedge with a fixed odd element ``sum_g c_g e_g``; commutes with ``L``."""
    space, index = exterior_space(n)
    d = space.block_dim(0)
    m = Matrix.zeros(d, d)
    for g, c in enumerate(coefficients, start=1):
        if c:
            m = m + exterior_wedge_operator(space, index, g).scale(c)
    return BlockOperator(space, space, {0: m}, None, name="d")


def primitive_dimension_formula(n: int, k: int) -> int:
    if k < 0 or k > n:
        return 0
    return comb(2 * n, k) - (comb(2 * n, k - 2) if k >= 2 else 0)
