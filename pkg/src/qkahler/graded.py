"""Bigraded block spaces, block-preserving operators, stars and finite duals.

A :class:`BigradedSpace` is a finite direct sum of components ``(a, b)``,
each split into blocks labelled ``l``.  Operators never mix blocks, so an
operator is stored as one dense matrix per block acting on the direct sum of
all components of that block (components in sorted bidegree order).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Mapping, Sequence

import mpmath

from .linalg import EXACT, GaussianRational, Matrix, ShapeMismatch, inverse

Bidegree = tuple[int, int]
SERIAL_VERSION = 1


@dataclass(frozen=True)
class Block:
    label: object
    dim: int
    basis: tuple[str, ...] = ()


class BigradedSpace:
    """Direct sum of components ``(a, b)``, each a list of labelled blocks."""

    def __init__(self, components: Mapping[Bidegree, Sequence[Block]], name: str = ""):
        self.name = name
        comps: dict[Bidegree, dict[object, Block]] = {}
        for bideg, blocks in components.items():
            seen: dict[object, Block] = {}
            for blk in blocks:
                if blk.label in seen:
                    raise ValueError(f"block {blk.label!r} repeated in component {bideg}")
                if blk.dim < 0:
                    raise ValueError("negative block dimension")
                seen[blk.label] = blk
            comps[tuple(bideg)] = seen
        self._comps = comps
        self.bidegrees: tuple[Bidegree, ...] = tuple(sorted(comps))
        self.labels: tuple = tuple(sorted({l for c in comps.values() for l in c}))
        self._offsets: dict[object, dict[Bidegree, tuple[int, int]]] = {}
        for l in self.labels:
            pos = 0
            offs = {}
            for bd in self.bidegrees:
                blk = comps[bd].get(l)
                d = blk.dim if blk else 0
                offs[bd] = (pos, pos + d)
                pos += d
            self._offsets[l] = offs

    # -- shape queries ------------------------------------------------------

    def block(self, label, bideg: Bidegree) -> Block | None:
        return self._comps.get(tuple(bideg), {}).get(label)

    def component_dim(self, bideg: Bidegree, label=None) -> int:
        blocks = self._comps.get(tuple(bideg), {})
        if label is None:
            return sum(b.dim for b in blocks.values())
        blk = blocks.get(label)
        return blk.dim if blk else 0

    def block_dim(self, label) -> int:
        offs = self._offsets.get(label)
        if not offs:
            return 0
        return max(e for _, e in offs.values())

    def span(self, label, bideg: Bidegree) -> range:
        offs = self._offsets.get(label, {})
        s, e = offs.get(tuple(bideg), (0, 0))
        return range(s, e)

    def degree_indices(self, label, k: int) -> list[int]:
        """Coordinates of total degree ``k`` inside block ``label``."""
        out: list[int] = []
        for bd in self.bidegrees:
            if sum(bd) == k:
                out.extend(self.span(label, bd))
        return out

    @property
    def dim(self) -> int:
        return sum(self.block_dim(l) for l in self.labels)

    @property
    def total_degrees(self) -> list[int]:
        return sorted({a + b for a, b in self.bidegrees})

    def degree_of_index(self, label, idx: int) -> Bidegree:
        for bd in self.bidegrees:
            if idx in self.span(label, bd):
                return bd
        raise IndexError(idx)

    # -- vectors ------------------------------------------------------------

    def zero_vector(self) -> dict:
        return {l: [Fraction(0)] * self.block_dim(l) for l in self.labels}

    def embed(self, label, bideg: Bidegree, coords: Sequence) -> dict:
        v = self.zero_vector()
        rng = self.span(label, bideg)
        if len(coords) != len(rng):
            raise ShapeMismatch(f"component {bideg} of block {label} has dim {len(rng)}")
        for i, c in zip(rng, coords):
            v[label][i] = c
        return v

    def component(self, v: Mapping, label, bideg: Bidegree) -> list:
        return [v[label][i] for i in self.span(label, bideg)]

    def same_shape(self, other: "BigradedSpace") -> bool:
        return all(self.block_dim(l) == other.block_dim(l) for l in set(self.labels) | set(other.labels)) and all(
            self.component_dim(bd, l) == other.component_dim(bd, l)
            for l in self.labels for bd in set(self.bidegrees) | set(other.bidegrees))

    def __repr__(self):
        return f"BigradedSpace({self.name or '?'}, dims={[self.component_dim(b) for b in self.bidegrees]})"


def swap_bidegrees(space: BigradedSpace, name: str = "") -> BigradedSpace:
    return BigradedSpace({(b, a): [space.block(l, (a, b)) for l in space.labels if space.block(l, (a, b))]
                          for a, b in space.bidegrees}, name or space.name)


class BlockOperator:
    """Block-preserving linear (or conjugate-linear) map between bigraded spaces.

    ``shift`` is the bidegree shift ``(da, db)`` or ``None`` for operators that
    are not homogeneous (sums of pieces of different bidegree).  A conjugate-
    linear operator acts as ``v -> M conj(v)`` blockwise.
    """

    def __init__(self, source: BigradedSpace, target: BigradedSpace, blocks: Mapping,
                 shift: Bidegree | None = (0, 0), antilinear: bool = False, name: str = ""):
        self.source = source
        self.target = target
        self.shift = None if shift is None else tuple(shift)
        self.antilinear = antilinear
        self.name = name
        mats = {}
        for l in sorted(set(source.labels) | set(target.labels)):
            m = blocks.get(l)
            rows, cols = target.block_dim(l), source.block_dim(l)
            if m is None:
                m = Matrix.zeros(rows, cols)
            elif m.shape != (rows, cols):
                raise ShapeMismatch(f"block {l}: matrix {m.shape} but spaces need {(rows, cols)}")
            mats[l] = m
        extra = set(blocks) - set(mats)
        if extra:
            raise ShapeMismatch(f"blocks {sorted(extra)} not present in the spaces")
        self.blocks: dict = mats

    # -- constructors -------------------------------------------------------

    @classmethod
    def identity(cls, space: BigradedSpace) -> "BlockOperator":
        return cls(space, space, {l: Matrix.identity(space.block_dim(l)) for l in space.labels}, (0, 0), name="id")

    @classmethod
    def zero(cls, source: BigradedSpace, target: BigradedSpace, shift: Bidegree | None = (0, 0)) -> "BlockOperator":
        return cls(source, target, {}, shift, name="0")

    @classmethod
    def from_components(cls, source: BigradedSpace, target: BigradedSpace, shift: Bidegree | None,
                        piece: Callable[[object, Bidegree, Bidegree], Matrix | None],
                        antilinear: bool = False, name: str = "") -> "BlockOperator":
        """Assemble from maps ``piece(l, src_bideg, tgt_bideg)`` between components.

        With a fixed ``shift`` only ``tgt = src + shift`` is queried; with
        ``shift=None`` every pair of bidegrees is.
        """
        blocks = {}
        for l in sorted(set(source.labels) | set(target.labels)):
            m = Matrix.zeros(target.block_dim(l), source.block_dim(l))
            for sb in source.bidegrees:
                cands = target.bidegrees if shift is None else [(sb[0] + shift[0], sb[1] + shift[1])]
                for tb in cands:
                    rs, cs = target.span(l, tb), source.span(l, sb)
                    if not rs or not cs:
                        continue
                    p = piece(l, sb, tb)
                    if p is None:
                        continue
                    if p.shape != (len(rs), len(cs)):
                        raise ShapeMismatch(f"piece {sb}->{tb} in block {l} has shape {p.shape}")
                    for i, r in enumerate(rs):
                        m.rows[r][cs.start:cs.stop] = p.rows[i]
            blocks[l] = m
        return cls(source, target, blocks, shift, antilinear, name)

    @classmethod
    def diagonal(cls, space: BigradedSpace, coefficient: Callable[[Bidegree], object], name: str = "") -> "BlockOperator":
        """Scalar multiple ``coefficient(a, b)`` on each component."""
        def piece(l, sb, tb):
            n = space.component_dim(sb, l)
            return Matrix.identity(n).scale(coefficient(sb))
        return cls.from_components(space, space, (0, 0), piece, name=name)

    @classmethod
    def projection(cls, space: BigradedSpace, keep: Iterable[Bidegree]) -> "BlockOperator":
        keep = {tuple(k) for k in keep}
        return cls.diagonal(space, lambda bd: Fraction(1) if bd in keep else Fraction(0), name="proj")

    # -- queries ------------------------------------------------------------

    @property
    def degree(self) -> int | None:
        return None if self.shift is None else self.shift[0] + self.shift[1]

    def piece(self, label, src: Bidegree, tgt: Bidegree) -> Matrix:
        rs, cs = self.target.span(label, tgt), self.source.span(label, src)
        return self.blocks[label].submatrix(list(rs), list(cs))

    def apply(self, v: Mapping) -> dict:
        out = {}
        for l, m in self.blocks.items():
            x = v.get(l, [Fraction(0)] * m.ncols)
            if self.antilinear:
                x = [c.conjugate() for c in x]
            out[l] = m.apply(x)
        return out

    def __call__(self, v: Mapping) -> dict:
        return self.apply(v)

    def is_zero(self, ar=EXACT, scale=None) -> bool:
        return all(m.is_zero(ar, scale) for m in self.blocks.values())

    def max_residual(self) -> float:
        return max((m.max_abs() for m in self.blocks.values()), default=0.0)

    def max_abs(self) -> float:
        return self.max_residual()

    # -- algebra ------------------------------------------------------------

    def _check_parallel(self, other: "BlockOperator") -> None:
        if not (self.source.same_shape(other.source) and self.target.same_shape(other.target)):
            raise ShapeMismatch("operators act between different spaces")
        if self.antilinear != other.antilinear:
            raise ShapeMismatch("cannot add linear and conjugate-linear operators")

    def _merged_shift(self, other: "BlockOperator"):
        return self.shift if self.shift == other.shift else None

    def __add__(self, other: "BlockOperator") -> "BlockOperator":
        self._check_parallel(other)
        return BlockOperator(self.source, self.target, {l: self.blocks[l] + other.blocks[l] for l in self.blocks},
                             self._merged_shift(other), self.antilinear)

    def __sub__(self, other: "BlockOperator") -> "BlockOperator":
        self._check_parallel(other)
        return BlockOperator(self.source, self.target, {l: self.blocks[l] - other.blocks[l] for l in self.blocks},
                             self._merged_shift(other), self.antilinear)

    def __neg__(self) -> "BlockOperator":
        return self.scale(-1)

    def scale(self, c) -> "BlockOperator":
        """``c * self`` (scalar applied after the operator)."""
        return BlockOperator(self.source, self.target, {l: m.scale(c) for l, m in self.blocks.items()},
                             self.shift, self.antilinear)

    def __matmul__(self, other: "BlockOperator") -> "BlockOperator":
        return compose(self, other)

    def with_shift(self, shift: Bidegree | None) -> "BlockOperator":
        return BlockOperator(self.source, self.target, self.blocks, shift, self.antilinear, self.name)

    def power(self, n: int) -> "BlockOperator":
        out = BlockOperator.identity(self.source)
        for _ in range(n):
            out = compose(self, out)
        return out

    def __repr__(self):
        kind = "antilinear " if self.antilinear else ""
        return f"BlockOperator({kind}{self.name or '?'}, shift={self.shift})"


def compose(f: BlockOperator, g: BlockOperator) -> BlockOperator:
    """``f o g``; shifts add and per-block matrices multiply."""
    if not g.target.same_shape(f.source):
        raise ShapeMismatch("target of g differs from source of f")
    blocks = {}
    for l, mf in f.blocks.items():
        mg = g.blocks.get(l)
        if mg is None:
            continue
        blocks[l] = mf @ (mg.conj() if f.antilinear else mg)
    shift = None if f.shift is None or g.shift is None else (f.shift[0] + g.shift[0], f.shift[1] + g.shift[1])
    return BlockOperator(g.source, f.target, blocks, shift, f.antilinear != g.antilinear)


def graded_commutator(f: BlockOperator, g: BlockOperator, deg_f: int | None = None,
                      deg_g: int | None = None) -> BlockOperator:
    """``[f, g] = f g - (-1)^{|f||g|} g f`` with total degrees as grading."""
    df = f.degree if deg_f is None else deg_f
    dg = g.degree if deg_g is None else deg_g
    if df is None or dg is None:
        raise ValueError("graded commutator needs homogeneous operators or explicit degrees")
    fg, gf = compose(f, g), compose(g, f)
    out = fg - gf if (df * dg) % 2 == 0 else fg + gf
    return out


class StarStructure:
    """Conjugate-linear involution of a space sending ``(a, b)`` to ``(b, a)``."""

    def __init__(self, op: BlockOperator):
        if not op.antilinear:
            raise ValueError("a star structure must be conjugate-linear")
        self.op = op

    @property
    def space(self) -> BigradedSpace:
        return self.op.source

    def __call__(self, v):
        return self.op.apply(v)

    def involution_defect(self) -> BlockOperator:
        return compose(self.op, self.op) - BlockOperator.identity(self.op.source)

    def swaps_bidegrees(self, ar=EXACT) -> bool:
        sp = self.op.source
        for l in sp.labels:
            for src in sp.bidegrees:
                for tgt in self.op.target.bidegrees:
                    if tgt != (src[1], src[0]) and not self.op.piece(l, src, tgt).is_zero(ar):
                        return False
        return True


@dataclass
class DualBasisElement:
    """Per block: functionals ``phi_i`` (rows) and elements ``p_i`` (columns)."""

    functionals: dict = field(default_factory=dict)
    elements: dict = field(default_factory=dict)

    def reconstruct(self, label, p: Sequence) -> list:
        """``sum_i phi_i(p) p_i``."""
        coeffs = self.functionals[label].apply(p)
        return self.elements[label].apply(coeffs)

    def co_reconstruct(self, label, phi: Sequence) -> list:
        """``sum_i phi(p_i) phi_i`` for a functional given as a row."""
        vals = Matrix([list(phi)], 1, len(phi)) @ self.elements[label]
        return (vals @ self.functionals[label]).rows[0]


def dual_space(space: BigradedSpace, basis: Mapping | None = None,
               ar=EXACT) -> tuple[BigradedSpace, DualBasisElement]:
    """Blockwise dual vector space together with a dual basis element.

    ``basis`` optionally maps a block label to a matrix whose columns are the
    chosen elements ``p_i``; the functionals are then the rows of its inverse.
    Components of the dual sit in the negated bidegree.
    """
    comps = {}
    for bd in space.bidegrees:
        comps[(-bd[0], -bd[1])] = [Block(l, space.component_dim(bd, l)) for l in space.labels
                                   if space.component_dim(bd, l)]
    dual = BigradedSpace(comps, (space.name + "^v") if space.name else "")
    dbe = DualBasisElement()
    for l in space.labels:
        n = space.block_dim(l)
        p = basis[l] if basis and l in basis else Matrix.identity(n)
        dbe.elements[l] = p
        dbe.functionals[l] = inverse(p, ar)
    return dual, dbe


def wedge_ev(alpha: Iterable[tuple[object, object]], beta: Iterable[tuple[object, object]],
             evaluate: Callable, multiply: Callable, add: Callable, zero):
    """Evaluation product ``(omega (x) x) ^ (f (x) nu) = omega f(x) nu``.

    ``alpha`` is a list of pairs (form, module element) and ``beta`` a list of
    pairs (functional, form); ``evaluate(f, x)`` returns a degree-0 form.
    """
    beta = list(beta)
    total = zero
    for omega, x in alpha:
        for f, nu in beta:
            total = add(total, multiply(multiply(omega, evaluate(f, x)), nu))
    return total


# ---------------------------------------------------------------------------
# serialization


def encode_scalar(x):
    if isinstance(x, bool):
        raise TypeError("booleans are not scalars")
    if isinstance(x, int):
        return f"{x}/1"
    if isinstance(x, Fraction):
        return f"{x.numerator}/{x.denominator}"
    if isinstance(x, GaussianRational):
        return {"re": encode_scalar(x.re), "im": encode_scalar(x.im)}
    if type(x).__name__ == "mpc":
        return {"re": encode_scalar(x.real), "im": encode_scalar(x.imag)}
    if type(x).__name__ == "mpf":
        return mpmath.nstr(x, 40, min_fixed=-1, max_fixed=1) if x else "0"
    raise TypeError(f"cannot serialise {type(x).__name__}")


def decode_scalar(obj):
    if isinstance(obj, dict):
        re, im = decode_scalar(obj["re"]), decode_scalar(obj["im"])
        if isinstance(re, Fraction) and isinstance(im, Fraction):
            return GaussianRational(re, im) if im else re
        return _decimal_context().mpc(re, im)
    if "/" in obj:
        return Fraction(obj)
    return _decimal_context().mpf(obj)


def _decimal_context():
    from .linalg import Approx
    return Approx().ctx


def _label_str(l) -> str:
    return str(l)


def space_to_dict(space: BigradedSpace) -> dict:
    return {
        "name": space.name,
        "components": [
            {"bidegree": list(bd),
             "blocks": [{"label": _label_str(l), "dim": space.component_dim(bd, l),
                         "basis": list(space.block(l, bd).basis)}
                        for l in space.labels if space.block(l, bd)]}
            for bd in space.bidegrees],
    }


def space_from_dict(d: dict) -> BigradedSpace:
    comps = {}
    for c in d["components"]:
        comps[tuple(c["bidegree"])] = [Block(Fraction(b["label"]), b["dim"], tuple(b["basis"])) for b in c["blocks"]]
    return BigradedSpace(comps, d.get("name", ""))


def operator_to_dict(op: BlockOperator) -> dict:
    return {
        "version": SERIAL_VERSION,
        "name": op.name,
        "shift": None if op.shift is None else list(op.shift),
        "antilinear": op.antilinear,
        "source": space_to_dict(op.source),
        "target": space_to_dict(op.target),
        "blocks": [{"label": _label_str(l), "shape": list(m.shape),
                    "entries": [[encode_scalar(x) for x in row] for row in m.rows]}
                   for l, m in sorted(op.blocks.items())],
    }


def operator_from_dict(d: dict) -> BlockOperator:
    if d.get("version") != SERIAL_VERSION:
        raise ValueError(f"unsupported serialization version {d.get('version')}")
    src, tgt = space_from_dict(d["source"]), space_from_dict(d["target"])
    blocks = {}
    for b in d["blocks"]:
        r, c = b["shape"]
        blocks[Fraction(b["label"])] = Matrix([[decode_scalar(x) for x in row] for row in b["entries"]], r, c)
    shift = None if d["shift"] is None else tuple(d["shift"])
    return BlockOperator(src, tgt, blocks, shift, d["antilinear"], d.get("name", ""))


def dumps(obj: dict) -> str:
    """Deterministic JSON text."""
    return json.dumps(obj, sort_keys=True, indent=2, ensure_ascii=True)
