"""The coordinate algebra of quantum SU(2) in normal form.

Generators ``a, b, c, d`` with

    ab = q ba,  ac = q ca,  bd = q db,  cd = q dc,  bc = cb,
    ad - q bc = 1,  da - q^{-1} bc = 1,

and the *-structure ``a* = d``, ``b* = -q c``, ``c* = -q^{-1} b``.

Normal-ordered monomials are ``a^i b^j c^k`` (key ``(0, i, j, k)``) and
``d^i b^j c^k`` with ``i > 0`` (key ``(1, i, j, k)``).  Polynomials are dicts
mapping keys to real coefficients; a missing key means zero.

The quantized enveloping algebra acts on the column index:

    E > a = b,  E > c = d,   F > b = a,  F > d = c,
    K > a = q^{-1} a,  K > c = q^{-1} c,  K > b = q b,  K > d = q d,

extended with the coproducts ``E (x) K + 1 (x) E`` and ``F (x) 1 + K^{-1} (x) F``.
The K-eigenvalue of a monomial is ``q^w`` with ``w`` its *weight*.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable

from ..linalg import EXACT

Key = tuple[int, int, int, int]
Poly = dict

ONE_KEY: Key = (0, 0, 0, 0)
_GEN_KEYS = {"a": (0, 1, 0, 0), "b": (0, 0, 1, 0), "c": (0, 0, 0, 1), "d": (1, 1, 0, 0)}
_WEIGHT = {"a": -1, "c": -1, "b": 1, "d": 1}


class InvalidQ(ValueError):
    pass


def _norm(t: int, i: int, j: int, k: int) -> Key:
    return (0, 0, j, k) if (t == 1 and i == 0) else (t, i, j, k)


def _acc(out: dict, key, c) -> None:
    v = out.get(key)
    v = c if v is None else v + c
    if v == 0:
        out.pop(key, None)
    else:
        out[key] = v


def word(key: Key) -> str:
    t, i, j, k = key
    return ("a" if t == 0 else "d") * i + "b" * j + "c" * k


def weight(key: Key) -> int:
    """Column (K-) weight of a monomial."""
    t, i, j, k = key
    return j - i - k if t == 0 else i + j - k


def row_weight(key: Key) -> int:
    """Row weight: +1 for a, b and -1 for c, d."""
    t, i, j, k = key
    return (i + j - k) if t == 0 else (j - i - k)


def degree(key: Key) -> int:
    return key[1] + key[2] + key[3]


def monomials(max_degree: int, w: int | None = None) -> list[Key]:
    """All normal monomials of degree <= max_degree (optionally of weight w), sorted."""
    out = []
    for t in (0, 1):
        for i in range(max_degree + 1):
            if t == 1 and i == 0:
                continue
            for j in range(max_degree + 1 - i):
                for k in range(max_degree + 1 - i - j):
                    key = (t, i, j, k)
                    if w is None or weight(key) == w:
                        out.append(key)
    return sorted(out)


class CoordinateAlgebra:
    """Normal-form arithmetic in the quantum SU(2) coordinate algebra at fixed q.

    ``ar`` selects exact (Fraction) or approximate (mpmath) coefficients.
    Internal caches only memoise pure functions of the arguments.
    """

    def __init__(self, q, ar=EXACT):
        q = ar.scalar(q)
        if q == 0 or q == 1 or q == -1:
            raise InvalidQ(f"q = {q} makes the q-integers degenerate")
        if q < 0:
            raise InvalidQ("q must be positive")
        self.q = q
        self.ar = ar
        self._one = ar.scalar(1)
        self._qpow: dict[int, object] = {}
        self._gen: dict[tuple[str, Key], dict] = {}
        self._mm: dict[tuple[Key, Key], dict] = {}
        self._star: dict[Key, dict] = {}
        self._E: dict[Key, dict] = {}
        self._F: dict[Key, dict] = {}
        self._haar: dict[Key, object] = {}

    # -- scalars -----------------------------------------------------------

    def qp(self, n: int):
        v = self._qpow.get(n)
        if v is None:
            v = self.q ** n
            self._qpow[n] = v
        return v

    def qint(self, m: int):
        """q-integer [m] = (q^m - q^-m) / (q - q^-1)."""
        return (self.qp(m) - self.qp(-m)) / (self.q - 1 / self.q)

    # -- polynomials -------------------------------------------------------

    def one(self) -> Poly:
        return {ONE_KEY: self._one}

    def gen(self, name: str) -> Poly:
        return {_GEN_KEYS[name]: self._one}

    def monomial(self, key: Key) -> Poly:
        return {key: self._one}

    def from_word(self, w: str) -> Poly:
        p = self.one()
        for g in reversed(w):
            p = self._gen_times(g, p)
        return p

    @staticmethod
    def add(*terms: tuple[object, Poly]) -> Poly:
        out: dict = {}
        for c, p in terms:
            for k, v in p.items():
                _acc(out, k, c * v)
        return out

    def _gen_key(self, g: str, key: Key) -> dict:
        memo = self._gen.get((g, key))
        if memo is not None:
            return memo
        t, i, j, k = key
        one = self._one
        r: dict = {}
        if g == "a":
            if t == 0:
                r = {(0, i + 1, j, k): one}
            else:
                # a d = 1 + q bc and bc d^m = q^{2m} d^m bc
                _acc(r, _norm(1, i - 1, j, k), one)
                _acc(r, _norm(1, i - 1, j + 1, k + 1), self.qp(2 * i - 1))
        elif g == "d":
            if t == 1:
                r = {(1, i + 1, j, k): one}
            elif i == 0:
                r = {(1, 1, j, k): one}
            else:
                # d a = 1 + q^{-1} bc and bc a^m = q^{-2m} a^m bc
                _acc(r, (0, i - 1, j, k), one)
                _acc(r, (0, i - 1, j + 1, k + 1), self.qp(1 - 2 * i))
        else:
            s = -i if t == 0 else i
            if g == "b":
                r = {(t, i, j + 1, k): self.qp(s)}
            else:
                r = {(t, i, j, k + 1): self.qp(s)}
        self._gen[(g, key)] = r
        return r

    def _gen_times(self, g: str, p: Poly) -> Poly:
        out: dict = {}
        for key, c in p.items():
            for k2, c2 in self._gen_key(g, key).items():
                _acc(out, k2, c * c2)
        return out

    def _mono_mul(self, k1: Key, k2: Key) -> dict:
        memo = self._mm.get((k1, k2))
        if memo is not None:
            return memo
        p: Poly = {k2: self._one}
        for g in reversed(word(k1)):
            p = self._gen_times(g, p)
        self._mm[(k1, k2)] = p
        return p

    def mul(self, p1: Poly, p2: Poly) -> Poly:
        out: dict = {}
        for k1, c1 in p1.items():
            for k2, c2 in p2.items():
                c = c1 * c2
                for k, v in self._mono_mul(k1, k2).items():
                    _acc(out, k, c * v)
        return out

    def mul_many(self, polys: Iterable[Poly]) -> Poly:
        out = self.one()
        for p in polys:
            out = self.mul(out, p)
        return out

    # -- star --------------------------------------------------------------

    def _star_gen(self, g: str) -> Poly:
        q = self.q
        if g == "a":
            return self.gen("d")
        if g == "d":
            return self.gen("a")
        if g == "b":
            return {_GEN_KEYS["c"]: -q}
        return {_GEN_KEYS["b"]: -1 / q}

    def _star_key(self, key: Key) -> dict:
        memo = self._star.get(key)
        if memo is not None:
            return memo
        r = self.one()
        for g in word(key):
            r = self.mul(self._star_gen(g), r)
        self._star[key] = r
        return r

    def star(self, p: Poly) -> Poly:
        out: dict = {}
        for key, c in p.items():
            cc = c.conjugate()
            for k2, v in self._star_key(key).items():
                _acc(out, k2, cc * v)
        return out

    # -- U_q action --------------------------------------------------------

    def act_K(self, p: Poly, power: int = 1) -> Poly:
        return {k: c * self.qp(power * weight(k)) for k, c in p.items()}

    def _split(self, key: Key) -> tuple[str, Key]:
        t, i, j, k = key
        if i > 0:
            return ("a" if t == 0 else "d"), _norm(t, i - 1, j, k)
        if j > 0:
            return "b", (0, 0, j - 1, k)
        return "c", (0, 0, 0, k - 1)

    def _E_key(self, key: Key) -> dict:
        memo = self._E.get(key)
        if memo is not None:
            return memo
        if key == ONE_KEY:
            r: dict = {}
        else:
            g, rest = self._split(key)
            r = {}
            eg = {"a": "b", "c": "d"}.get(g)
            if eg is not None:
                # (E > g)(K > rest)
                for k2, c2 in self._gen_key(eg, rest).items():
                    _acc(r, k2, c2 * self.qp(weight(rest)))
            for k2, c2 in self._E_key(rest).items():
                for k3, c3 in self._gen_key(g, k2).items():
                    _acc(r, k3, c2 * c3)
        self._E[key] = r
        return r

    def _F_key(self, key: Key) -> dict:
        memo = self._F.get(key)
        if memo is not None:
            return memo
        if key == ONE_KEY:
            r: dict = {}
        else:
            g, rest = self._split(key)
            r = {}
            fg = {"b": "a", "d": "c"}.get(g)
            if fg is not None:
                for k2, c2 in self._gen_key(fg, rest).items():
                    _acc(r, k2, c2)
            # (K^{-1} > g)(F > rest)
            kg = self.qp(-_WEIGHT[g])
            for k2, c2 in self._F_key(rest).items():
                for k3, c3 in self._gen_key(g, k2).items():
                    _acc(r, k3, kg * c2 * c3)
        self._F[key] = r
        return r

    def act_E(self, p: Poly) -> Poly:
        out: dict = {}
        for key, c in p.items():
            for k2, v in self._E_key(key).items():
                _acc(out, k2, c * v)
        return out

    def act_F(self, p: Poly) -> Poly:
        out: dict = {}
        for key, c in p.items():
            for k2, v in self._F_key(key).items():
                _acc(out, k2, c * v)
        return out

    def act(self, name: str, p: Poly) -> Poly:
        if name == "E":
            return self.act_E(p)
        if name == "F":
            return self.act_F(p)
        if name == "K":
            return self.act_K(p, 1)
        if name == "Kinv":
            return self.act_K(p, -1)
        raise KeyError(name)

    # -- Haar state --------------------------------------------------------

    def haar_monomial(self, key: Key):
        """Haar state on a normal monomial.

        Only the powers ``(bc)^j`` survive, with value (-q)^j / (1 + q^2 + ... + q^{2j});
        invariance under E, F, K is checked in the test-suite.
        """
        v = self._haar.get(key)
        if v is None:
            t, i, j, k = key
            if t == 0 and i == 0 and j == k:
                den = sum((self.qp(2 * r) for r in range(j + 1)), 0 * self._one)
                v = (-self.q) ** j / den
            else:
                v = 0 * self._one
            self._haar[key] = v
        return v

    def haar(self, p: Poly):
        return sum((c * self.haar_monomial(k) for k, c in p.items()), 0 * self._one)

    def haar_of_product(self, p1: Poly, p2: Poly):
        """h(p1 p2) without materialising the full product."""
        total = 0 * self._one
        for k1, c1 in p1.items():
            for k2, c2 in p2.items():
                s = 0 * self._one
                for k, v in self._mono_mul(k1, k2).items():
                    if k[0] == 0 and k[1] == 0 and k[2] == k[3]:
                        s = s + v * self.haar_monomial(k)
                if s != 0:
                    total = total + c1 * c2 * s
        return total

    # -- helpers -----------------------------------------------------------

    def is_zero(self, p: Poly) -> bool:
        return all(self.ar.is_zero(c) for c in p.values())

    def equal(self, p1: Poly, p2: Poly) -> bool:
        return self.is_zero(self.add((1, p1), (-1, p2)))

    def weights(self, p: Poly) -> set[int]:
        return {weight(k) for k in p}


def fraction_q(text: str) -> Fraction:
    """Parse a rational deformation parameter and reject degenerate values."""
    q = Fraction(text)
    if q in (0, 1, -1):
        raise InvalidQ(f"q = {q} makes the q-integers degenerate")
    if q < 0:
        raise InvalidQ("q must be positive")
    return q
