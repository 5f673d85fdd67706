"""Dense linear algebra over exact Gaussian rationals or high-precision floats.

Matrices are small (a few dozen rows at most), so everything is plain Python
lists.  Two arithmetic back ends are provided:

* :data:`EXACT` works with :class:`fractions.Fraction` and :class:`GaussianRational`;
  zero tests are exact.
* :class:`Approx` works with ``mpmath`` numbers at a fixed number of decimal
  digits; zero tests use a threshold relative to the largest entry.

All routines are pure functions of their inputs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational
from typing import Callable, Iterable, Sequence

import mpmath


class LinalgError(ArithmeticError):
    pass


class ShapeMismatch(LinalgError):
    pass


class InconsistentSystem(LinalgError):
    pass


class PrecisionLoss(LinalgError):
    """A rank decision fell inside the ambiguity band of the approximate mode."""


class NotPositiveDefinite(LinalgError):
    def __init__(self, message: str, witness=None):
        super().__init__(message)
        self.witness = witness


class GaussianRational:
    """Exact complex number ``re + i*im`` with rational parts."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        self.re = Fraction(re)
        self.im = Fraction(im)

    @staticmethod
    def _coerce(other):
        if isinstance(other, GaussianRational):
            return other
        if isinstance(other, (int, Fraction)):
            return GaussianRational(other, 0)
        return None

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return _gauss(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return _gauss(self.re - o.re, self.im - o.im)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return _gauss(o.re - self.re, o.im - self.im)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return _gauss(self.re * other, self.im * other)
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return _gauss(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            return _gauss(self.re / other, self.im / other)
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        n = o.re * o.re + o.im * o.im
        return _gauss((self.re * o.re + self.im * o.im) / n, (self.im * o.re - self.re * o.im) / n)

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o / self

    def __neg__(self):
        return GaussianRational(-self.re, -self.im)

    def __pos__(self):
        return self

    def __pow__(self, n: int):
        if not isinstance(n, int):
            return NotImplemented
        if n < 0:
            return 1 / (self ** (-n))
        result: object = GaussianRational(1)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def conjugate(self):
        return _gauss(self.re, -self.im)

    def __abs__(self):
        return math.hypot(float(self.re), float(self.im))

    def __eq__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self.re == o.re and self.im == o.im

    def __hash__(self):
        if self.im == 0:
            return hash(self.re)
        return hash((self.re, self.im))

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def __repr__(self):
        return f"GaussianRational({self.re}, {self.im})"

    def __str__(self):
        if self.im == 0:
            return str(self.re)
        if self.re == 0:
            return f"{self.im}i"
        sign = "+" if self.im > 0 else "-"
        return f"{self.re}{sign}{abs(self.im)}i"


def _gauss(re: Fraction, im: Fraction):
    # collapse to a Fraction when the imaginary part vanishes
    if im == 0:
        return re
    g = GaussianRational.__new__(GaussianRational)
    g.re = re
    g.im = im
    return g


I_EXACT = _gauss(Fraction(0), Fraction(1))


# ---------------------------------------------------------------------------
# arithmetic back ends


class Exact:
    """Exact rational / Gaussian-rational arithmetic."""

    name = "exact"
    exact = True

    @property
    def i(self):
        return I_EXACT

    def scalar(self, x):
        if isinstance(x, (GaussianRational, Fraction)):
            return x
        if isinstance(x, int):
            return Fraction(x)
        if isinstance(x, str):
            return Fraction(x)
        if isinstance(x, Rational):
            return Fraction(x.numerator, x.denominator)
        raise TypeError(f"cannot use {x!r} as an exact scalar")

    def is_zero(self, x, scale=None) -> bool:
        return x == 0

    def magnitude(self, x) -> float:
        return abs(x) if not isinstance(x, Fraction) else abs(float(x))

    def real_part(self, x):
        return x.re if isinstance(x, GaussianRational) else x

    def imag_part(self, x):
        return x.im if isinstance(x, GaussianRational) else Fraction(0)

    def sqrt(self, x):
        raise LinalgError("square roots are not available in exact mode")

    def __repr__(self):
        return "Exact()"


@dataclass(frozen=True)
class Approx:
    """mpmath arithmetic with ``dps`` decimal digits.

    A number counts as zero when its modulus is at most ``rel_tol`` times the
    supplied scale (the largest entry of the matrix being reduced).  Pivots
    whose relative size falls within a factor ``band`` of the threshold raise
    :class:`PrecisionLoss` instead of silently deciding the rank.
    """

    dps: int = 50
    rel_tol: float = 1e-25
    band: float = 1e5

    name = "approx"
    exact = False

    def __post_init__(self):
        if self.dps < 50:
            raise ValueError("approximate mode needs at least 50 digits")

    @property
    def ctx(self):
        return _context(self.dps)

    @property
    def i(self):
        return self.ctx.mpc(0, 1)

    def scalar(self, x):
        ctx = self.ctx
        if isinstance(x, GaussianRational):
            return ctx.mpc(ctx.mpf(x.re.numerator) / x.re.denominator,
                           ctx.mpf(x.im.numerator) / x.im.denominator)
        if isinstance(x, Fraction):
            return ctx.mpf(x.numerator) / x.denominator
        if isinstance(x, (int, str)):
            return ctx.mpf(Fraction(x).numerator) / Fraction(x).denominator
        return x

    def is_zero(self, x, scale=None) -> bool:
        s = 1 if scale is None or scale == 0 else scale
        return abs(x) <= self.rel_tol * s

    def magnitude(self, x) -> float:
        return float(abs(x))

    def real_part(self, x):
        return x.real

    def imag_part(self, x):
        return x.imag if hasattr(x, "imag") else 0

    def sqrt(self, x):
        return self.ctx.sqrt(x)


EXACT = Exact()


def _fraction_to_mpmath(self, prec, rounding):
    return mpmath.mp.make_mpf(mpmath.libmp.from_rational(self.numerator, self.denominator, prec, rounding))


def _gauss_to_mpmath(self, prec, rounding):
    re = mpmath.libmp.from_rational(self.re.numerator, self.re.denominator, prec, rounding)
    im = mpmath.libmp.from_rational(self.im.numerator, self.im.denominator, prec, rounding)
    return mpmath.mp.make_mpc((re, im))


# mpmath's conversion hook lets exact constants (zeros, identities, q-powers)
# mix with mpf/mpc entries in approximate mode
Fraction._mpmath_ = _fraction_to_mpmath
GaussianRational._mpmath_ = _gauss_to_mpmath

_CONTEXTS: dict[int, mpmath.ctx_mp.MPContext] = {}


def _context(dps: int):
    # one private context per precision; contexts are never mutated after creation
    ctx = _CONTEXTS.get(dps)
    if ctx is None:
        ctx = mpmath.MPContext()
        ctx.dps = dps
        _CONTEXTS[dps] = ctx
    return ctx


# ---------------------------------------------------------------------------
# matrices


class Matrix:
    """Row-major dense matrix.  Treated as immutable once built."""

    __slots__ = ("rows", "nrows", "ncols")

    def __init__(self, rows: Sequence[Sequence], nrows: int | None = None, ncols: int | None = None):
        # plain ints would turn 1/pivot into a float
        self.rows = [[Fraction(x) if type(x) is int else x for x in r] for r in rows]
        self.nrows = len(self.rows) if nrows is None else nrows
        if ncols is None:
            ncols = len(self.rows[0]) if self.rows else 0
        self.ncols = ncols
        if len(self.rows) != self.nrows or any(len(r) != ncols for r in self.rows):
            raise ShapeMismatch("ragged matrix")

    @classmethod
    def zeros(cls, nrows: int, ncols: int) -> "Matrix":
        zero = Fraction(0)
        return cls([[zero] * ncols for _ in range(nrows)], nrows, ncols)

    @classmethod
    def identity(cls, n: int) -> "Matrix":
        m = cls.zeros(n, n)
        for k in range(n):
            m.rows[k][k] = Fraction(1)
        return m

    @classmethod
    def from_columns(cls, columns: Sequence[Sequence], nrows: int) -> "Matrix":
        cols = [list(c) for c in columns]
        if any(len(c) != nrows for c in cols):
            raise ShapeMismatch("column length")
        return cls([[c[r] for c in cols] for r in range(nrows)], nrows, len(cols))

    @property
    def shape(self) -> tuple[int, int]:
        return (self.nrows, self.ncols)

    def __getitem__(self, idx):
        r, c = idx
        return self.rows[r][c]

    def column(self, c: int) -> list:
        return [row[c] for row in self.rows]

    def columns(self) -> list[list]:
        return [self.column(c) for c in range(self.ncols)]

    def __matmul__(self, other: "Matrix") -> "Matrix":
        if self.ncols != other.nrows:
            raise ShapeMismatch(f"{self.shape} @ {other.shape}")
        ocols = other.columns()
        out = []
        for row in self.rows:
            nz = [(k, x) for k, x in enumerate(row) if x != 0]
            out.append([sum((x * col[k] for k, x in nz), Fraction(0)) for col in ocols])
        return Matrix(out, self.nrows, other.ncols)

    def apply(self, v: Sequence) -> list:
        if len(v) != self.ncols:
            raise ShapeMismatch(f"{self.shape} applied to vector of length {len(v)}")
        nz = [(k, x) for k, x in enumerate(v) if x != 0]
        return [sum((row[k] * x for k, x in nz), Fraction(0)) for row in self.rows]

    def __add__(self, other: "Matrix") -> "Matrix":
        if self.shape != other.shape:
            raise ShapeMismatch(f"{self.shape} + {other.shape}")
        return Matrix([[x + y for x, y in zip(r, s)] for r, s in zip(self.rows, other.rows)], *self.shape)

    def __sub__(self, other: "Matrix") -> "Matrix":
        if self.shape != other.shape:
            raise ShapeMismatch(f"{self.shape} - {other.shape}")
        return Matrix([[x - y for x, y in zip(r, s)] for r, s in zip(self.rows, other.rows)], *self.shape)

    def __neg__(self) -> "Matrix":
        return Matrix([[-x for x in r] for r in self.rows], *self.shape)

    def scale(self, c) -> "Matrix":
        return Matrix([[c * x for x in r] for r in self.rows], *self.shape)

    def conj(self) -> "Matrix":
        return Matrix([[x.conjugate() for x in r] for r in self.rows], *self.shape)

    @property
    def T(self) -> "Matrix":
        return Matrix([[self.rows[r][c] for r in range(self.nrows)] for c in range(self.ncols)],
                      self.ncols, self.nrows)

    @property
    def H(self) -> "Matrix":
        return Matrix([[self.rows[r][c].conjugate() for r in range(self.nrows)] for c in range(self.ncols)],
                      self.ncols, self.nrows)

    def submatrix(self, rows: Sequence[int], cols: Sequence[int]) -> "Matrix":
        return Matrix([[self.rows[r][c] for c in cols] for r in rows], len(rows), len(cols))

    def map(self, fn: Callable) -> "Matrix":
        return Matrix([[fn(x) for x in r] for r in self.rows], *self.shape)

    def max_abs(self) -> float:
        best = 0.0
        for r in self.rows:
            for x in r:
                if x != 0:
                    best = max(best, float(abs(x)))
        return best

    def is_zero(self, ar=EXACT, scale=None) -> bool:
        return all(ar.is_zero(x, scale) for r in self.rows for x in r)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Matrix):
            return NotImplemented
        return self.shape == other.shape and all(
            x == y for r, s in zip(self.rows, other.rows) for x, y in zip(r, s))

    def __repr__(self):
        return f"Matrix({self.nrows}x{self.ncols})"


def block_diag(parts: Sequence[Matrix]) -> Matrix:
    n = sum(p.nrows for p in parts)
    m = sum(p.ncols for p in parts)
    out = Matrix.zeros(n, m)
    r0 = c0 = 0
    for p in parts:
        for r in range(p.nrows):
            out.rows[r0 + r][c0:c0 + p.ncols] = p.rows[r]
        r0 += p.nrows
        c0 += p.ncols
    return out


def hstack(parts: Sequence[Matrix], nrows: int) -> Matrix:
    rows = [[] for _ in range(nrows)]
    for p in parts:
        if p.nrows != nrows:
            raise ShapeMismatch("hstack")
        for r in range(nrows):
            rows[r].extend(p.rows[r])
    return Matrix(rows, nrows, sum(p.ncols for p in parts))


# ---------------------------------------------------------------------------
# elimination


def _scale_of(m: Matrix, ar) -> float:
    if ar.exact:
        return 1.0
    return m.max_abs() or 1.0


def rref(m: Matrix, ar=EXACT) -> tuple[Matrix, list[int]]:
    """Reduced row echelon form and pivot columns.

    Exact mode takes the first nonzero entry of each column as pivot, so the
    result only depends on the input.  Approximate mode uses partial pivoting.
    """
    rows = [list(r) for r in m.rows]
    nrows, ncols = m.shape
    scale = _scale_of(m, ar)
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        if r >= nrows:
            break
        if ar.exact:
            p = next((i for i in range(r, nrows) if rows[i][c] != 0), None)
        else:
            best, p = -1.0, None
            for i in range(r, nrows):
                a = float(abs(rows[i][c]))
                if a > best:
                    best, p = a, i
            if p is not None:
                ratio = best / scale
                if ar.rel_tol / ar.band < ratio < ar.rel_tol * ar.band:
                    raise PrecisionLoss(
                        f"pivot of relative size {ratio:.3e} in column {c} is within the ambiguity band")
                if ratio <= ar.rel_tol:
                    p = None
        if p is None:
            continue
        rows[r], rows[p] = rows[p], rows[r]
        piv = rows[r][c]
        inv = 1 / piv
        rows[r] = [x * inv for x in rows[r]]
        for i in range(nrows):
            if i != r:
                f = rows[i][c]
                if f != 0:
                    ri = rows[r]
                    rows[i] = [x - f * y for x, y in zip(rows[i], ri)]
        if not ar.exact:
            for i in range(nrows):
                if i != r:
                    rows[i][c] = 0 * rows[i][c]
        pivots.append(c)
        r += 1
    return Matrix(rows, nrows, ncols), pivots


def rank(m: Matrix, ar=EXACT) -> int:
    return len(rref(m, ar)[1])


def kernel_basis(m: Matrix, ar=EXACT) -> list[list]:
    """Basis of the right kernel, one vector per free column, in column order."""
    red, pivots = rref(m, ar)
    ncols = m.ncols
    free = [c for c in range(ncols) if c not in set(pivots)]
    basis = []
    for f in free:
        v = [Fraction(0)] * ncols
        v[f] = Fraction(1)
        for row, pc in enumerate(pivots):
            v[pc] = -red.rows[row][f]
        basis.append(v)
    return basis


def image_basis(m: Matrix, ar=EXACT) -> list[list]:
    """Pivot columns of ``m``: a basis of its column space."""
    _, pivots = rref(m, ar)
    return [m.column(c) for c in pivots]


def solve(m: Matrix, b: Sequence, ar=EXACT) -> list:
    """One solution of ``m x = b`` (free variables set to zero)."""
    if len(b) != m.nrows:
        raise ShapeMismatch("right-hand side length")
    aug = Matrix([list(r) + [b[i]] for i, r in enumerate(m.rows)], m.nrows, m.ncols + 1)
    red, pivots = rref(aug, ar)
    if m.ncols in pivots:
        raise InconsistentSystem("right-hand side is not in the image")
    x = [Fraction(0)] * m.ncols
    for row, pc in enumerate(pivots):
        x[pc] = red.rows[row][m.ncols]
    return x


def solve_matrix(m: Matrix, b: Matrix, ar=EXACT) -> Matrix:
    """Solve ``m X = b`` column by column."""
    if b.nrows != m.nrows:
        raise ShapeMismatch("right-hand side rows")
    aug = hstack([m, b], m.nrows)
    red, pivots = rref(aug, ar)
    if any(p >= m.ncols for p in pivots):
        raise InconsistentSystem("some column of the right-hand side is not in the image")
    out = Matrix.zeros(m.ncols, b.ncols)
    for row, pc in enumerate(pivots):
        out.rows[pc] = red.rows[row][m.ncols:]
    return out


def inverse(m: Matrix, ar=EXACT) -> Matrix:
    if m.nrows != m.ncols:
        raise ShapeMismatch("inverse of non-square matrix")
    if rank(m, ar) != m.nrows:
        raise LinalgError("matrix is singular")
    return solve_matrix(m, Matrix.identity(m.nrows), ar)


def complement_basis(vectors: Sequence[Sequence], dim: int, ar=EXACT) -> list[list]:
    """Standard basis vectors completing ``vectors`` to a basis (greedy, in index order)."""
    cols = [list(v) for v in vectors]
    chosen = []
    for k in range(dim):
        e = [Fraction(0)] * dim
        e[k] = Fraction(1)
        trial = Matrix.from_columns(cols + chosen + [e], dim)
        if rank(trial, ar) == len(cols) + len(chosen) + 1:
            chosen.append(e)
    return chosen


# ---------------------------------------------------------------------------
# sesquilinear forms
#
# A Hermitian form on coordinate vectors is stored as a matrix ``h`` with
# <u, v> = v^H h u (linear in the first slot).


def form_value(h: Matrix, u: Sequence, v: Sequence):
    hu = h.apply(u)
    return sum((y.conjugate() * x for x, y in zip(hu, v)), Fraction(0))


def ldl_pivots(h: Matrix, ar=EXACT) -> tuple[list, list[list]]:
    """Symmetric elimination without pivoting.

    Returns the pivots ``d_k`` and vectors ``w_k`` with ``<w_k, w_k> = d_k``
    (each ``w_k`` is supported on the first ``k+1`` coordinates).  Stops early
    at the first pivot that is not strictly positive.
    """
    n = h.nrows
    a = [list(r) for r in h.rows]
    # track the change of basis so that witnesses can be reported
    basis = [[Fraction(1) if i == j else Fraction(0) for j in range(n)] for i in range(n)]
    pivots = []
    witnesses = []
    scale = _scale_of(h, ar)
    for k in range(n):
        d = a[k][k]
        pivots.append(d)
        witnesses.append(list(basis[k]))
        dr = ar.real_part(d)
        if not ar.is_zero(ar.imag_part(d), scale) or dr <= 0 or ar.is_zero(d, scale):
            break
        for i in range(k + 1, n):
            f = a[i][k] / d
            if f == 0:
                continue
            # row/column operation: e_i <- e_i - f e_k
            for j in range(n):
                a[i][j] = a[i][j] - f * a[k][j]
            fc = f.conjugate()
            for j in range(n):
                a[j][i] = a[j][i] - fc * a[j][k]
            basis[i] = [x - f * y for x, y in zip(basis[i], basis[k])]
    return pivots, witnesses


def check_positive_definite(h: Matrix, ar=EXACT) -> None:
    """Raise :class:`NotPositiveDefinite` (with a witness vector) unless ``h`` is."""
    if h.nrows != h.ncols:
        raise ShapeMismatch("form must be square")
    if not (h - h.H).is_zero(ar, _scale_of(h, ar)):
        raise NotPositiveDefinite("form is not Hermitian")
    pivots, witnesses = ldl_pivots(h, ar)
    scale = _scale_of(h, ar)
    for d, w in zip(pivots, witnesses):
        if ar.is_zero(d, scale) or ar.real_part(d) <= 0:
            raise NotPositiveDefinite(f"<v,v> = {d} for a nonzero v", witness=w)


def is_positive_definite(h: Matrix, ar=EXACT) -> bool:
    try:
        check_positive_definite(h, ar)
    except NotPositiveDefinite:
        return False
    return True


def is_positive_semidefinite(h: Matrix, ar=EXACT) -> bool:
    """Hermitian and all eigenvalues >= 0, decided by symmetric elimination with
    diagonal pivoting (a zero pivot must come with a zero row)."""
    if h.nrows != h.ncols:
        raise ShapeMismatch("form must be square")
    scale = _scale_of(h, ar)
    if not (h - h.H).is_zero(ar, scale):
        return False
    a = [list(r) for r in h.rows]
    active = list(range(h.nrows))
    while active:
        k = max(active, key=lambda i: ar.real_part(a[i][i]))
        d = a[k][k]
        if ar.real_part(d) < 0 and not ar.is_zero(d, scale):
            return False
        if ar.is_zero(d, scale):
            # every remaining diagonal entry is <= 0; semidefinite forces all zero
            return all(ar.is_zero(a[i][j], scale) for i in active for j in active)
        active.remove(k)
        for i in active:
            f = a[i][k] / d
            for j in active:
                a[i][j] = a[i][j] - f * a[k][j]
    return True


def gram_schmidt(vectors: Iterable[Sequence], inner: Matrix | Callable, ar=EXACT) -> list[list]:
    """Orthogonalise ``vectors`` (unnormalised) with respect to ``inner``.

    ``inner`` is either a Hermitian matrix (``<u,v> = v^H h u``) or a callable
    ``inner(u, v)``.  Vectors in the span of earlier ones are dropped.
    """
    ip = (lambda u, v: form_value(inner, u, v)) if isinstance(inner, Matrix) else inner
    out: list[list] = []
    norms = []
    for v in vectors:
        w = list(v)
        for u, nu in zip(out, norms):
            c = ip(w, u) / nu
            if c != 0:
                w = [x - c * y for x, y in zip(w, u)]
        scale = max((float(abs(x)) for x in w), default=0.0)
        if all(ar.is_zero(x, None if ar.exact else max(scale, 1.0)) for x in w):
            continue
        n = ip(w, w)
        if ar.is_zero(ar.imag_part(n)) is False or ar.real_part(n) <= 0:
            raise NotPositiveDefinite(f"<w,w> = {n}", witness=w)
        out.append(w)
        norms.append(n)
    return out
