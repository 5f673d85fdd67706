"""Polynomial-level differential forms on quantum SU(2), horizontal part only.

A form is stored frame-left as ``sum_I e^I y_I`` with frames
``"" , "+", "-", "+-"`` and polynomial coefficients.  The frames satisfy

    e^{+-} y = q^{w(y)} y e^{+-},   e^+ e^+ = e^- e^- = 0,   e^- e^+ = -q^2 e^+ e^-,

and the differentials are

    dbar(e^I y) = (-1)^{|I|} e^I e^- (K^{-1} E > y),
    del(e^I y)  = (-1)^{|I|} e^I e^+ (F > y).

The star is ``(e^-)* = -q^{-1} e^+``, ``(e^+)* = -q e^-``.  The Kaehler form is
``kappa = -i e^+ e^-`` and ``vol(e^+ e^- y) = i y``.
"""

from __future__ import annotations

from .algebra import CoordinateAlgebra

FRAMES = ("", "+", "-", "+-")
_DEG = {"": 0, "+": 1, "-": 1, "+-": 2}


class FormAlgebra:
    def __init__(self, alg: CoordinateAlgebra):
        self.alg = alg
        self.ar = alg.ar
        q = alg.q
        one = alg._one
        self._frame_product = {
            ("", ""): ("", one), ("", "+"): ("+", one), ("", "-"): ("-", one), ("", "+-"): ("+-", one),
            ("+", ""): ("+", one), ("-", ""): ("-", one), ("+-", ""): ("+-", one),
            ("+", "-"): ("+-", one), ("-", "+"): ("+-", -q * q),
        }
        self._frame_star = {"": ("", one), "+": ("-", -q), "-": ("+", -1 / q), "+-": ("+-", -one)}

    # -- construction --------------------------------------------------------

    @staticmethod
    def degree(frame: str) -> int:
        return _DEG[frame]

    def form(self, frame: str, y: dict) -> dict:
        return {frame: dict(y)} if y else {}

    def right_form(self, y: dict, frame: str) -> dict:
        """``y e^I`` rewritten frame-left: ``e^I (K^{-|I|} > y)``."""
        return self.form(frame, self.alg.act_K(y, -_DEG[frame]))

    def add(self, *terms) -> dict:
        out: dict = {}
        for c, f in terms:
            for fr, y in f.items():
                out[fr] = self.alg.add((1, out.get(fr, {})), (c, y))
                if not out[fr]:
                    del out[fr]
        return out

    def is_zero(self, f: dict) -> bool:
        return all(self.alg.is_zero(y) for y in f.values())

    def equal(self, f: dict, g: dict) -> bool:
        return self.is_zero(self.add((1, f), (-1, g)))

    def homogeneous_degree(self, f: dict) -> int:
        degs = {_DEG[fr] for fr, y in f.items() if y}
        if len(degs) > 1:
            raise ValueError("form is not homogeneous")
        return degs.pop() if degs else 0

    # -- algebra -------------------------------------------------------------

    def mul(self, f: dict, g: dict) -> dict:
        """Wedge product; ``y e^J = e^J (K^{-|J|} > y)`` moves frames left."""
        out: dict = {}
        alg = self.alg
        for fi, y in f.items():
            for fj, z in g.items():
                prod = self._frame_product.get((fi, fj))
                if prod is None:
                    continue
                fr, c = prod
                term = alg.mul(alg.act_K(y, -_DEG[fj]), z)
                out = self.add((1, out), (c, {fr: term}))
        return out

    def star(self, f: dict) -> dict:
        """``(e^I y)* = y* (e^I)* = c_I e^{I*} (K^{-|I|} > y*)``."""
        out: dict = {}
        for fr, y in f.items():
            fr2, c = self._frame_star[fr]
            ys = self.alg.act_K(self.alg.star(y), -_DEG[fr])
            out = self.add((1, out), (c, {fr2: ys}))
        return out

    def dbar(self, f: dict) -> dict:
        out: dict = {}
        alg = self.alg
        for fr, y in f.items():
            prod = self._frame_product.get((fr, "-"))
            if prod is None:
                continue
            fr2, c = prod
            sign = -1 if _DEG[fr] % 2 else 1
            out = self.add((1, out), (sign * c, {fr2: alg.act_K(alg.act_E(y), -1)}))
        return out

    def delta(self, f: dict) -> dict:
        out: dict = {}
        alg = self.alg
        for fr, y in f.items():
            prod = self._frame_product.get((fr, "+"))
            if prod is None:
                continue
            fr2, c = prod
            sign = -1 if _DEG[fr] % 2 else 1
            out = self.add((1, out), (sign * c, {fr2: alg.act_F(y)}))
        return out

    def d(self, f: dict) -> dict:
        return self.add((1, self.dbar(f)), (1, self.delta(f)))

    def kappa(self) -> dict:
        return {"+-": {k: -self.ar.i * v for k, v in self.alg.one().items()}}

    def vol(self, f: dict) -> dict:
        """Top-degree coefficient: ``vol(e^+ e^- y) = i y``."""
        y = f.get("+-", {})
        return {k: self.ar.i * v for k, v in y.items()}

    def integral(self, f: dict):
        return self.alg.haar(self.vol(f))
