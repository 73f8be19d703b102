"""Linear 3-webs in the normalized projective frame and their local invariants.

A web is stored by the Taylor coefficients of the three slope functions
a, b, c beyond the frame-forced low-order part:

    a(t) = 1 - t   + a2 t^2 + ... + an t^n
    b(t) = -1 - t  + b2 t^2 + ... + bn t^n
    c(t) = -t/2    + c2 t^2 + ... + cn t^n

The frame places the base point at the origin and the three focal points at
(1, 1), (1, -1) and (2, 0); leaves of the three families are the lines
v = a(x) u + x, v = b(y) u + y and v = c(z) u + z.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping

from .exactalg import CoefPoly, Symbol, SymbolUniverse, TriwebError
from .jets import (
    BiJet,
    UniJet,
    compose_bi,
    log_unit,
    reciprocal,
)

_ZERO = Fraction(0)
_ONE = Fraction(1)


class WebCoreError(TriwebError):
    pass


class OrderTooHigh(WebCoreError):
    pass


class NonUnitDerivative(WebCoreError):
    pass


_FRAME_HEAD = {
    "a": (_ONE, Fraction(-1)),
    "b": (Fraction(-1), Fraction(-1)),
    "c": (_ZERO, Fraction(-1, 2)),
}


@dataclass(frozen=True)
class LinearWeb3:
    """A linear 3-web in the normalized frame, of finite coefficient order.

    Coefficient lists are indexed 2..order; entries are Fractions or
    CoefPoly values (for symbolic webs).
    """

    order: int
    a_coeffs: tuple
    b_coeffs: tuple
    c_coeffs: tuple

    def __post_init__(self):
        if self.order < 2:
            raise ValueError("a web needs coefficients up to order at least 2")
        for cs in (self.a_coeffs, self.b_coeffs, self.c_coeffs):
            if len(cs) != self.order - 1:
                raise ValueError("coefficient list does not match the declared order")

    @classmethod
    def from_coeffs(cls, a, b, c) -> "LinearWeb3":
        lists = []
        for cs in (a, b, c):
            lists.append(tuple(Fraction(x) if isinstance(x, int) else x for x in cs))
        if not (len(lists[0]) == len(lists[1]) == len(lists[2])):
            raise ValueError("the three coefficient lists must have equal length")
        return cls(len(lists[0]) + 1, *lists)

    @classmethod
    def pencil(cls, order: int) -> "LinearWeb3":
        """The all-zero web: three pencils of lines, flat everywhere."""
        zeros = tuple([_ZERO] * (order - 1))
        return cls(order, zeros, zeros, zeros)

    @classmethod
    def symbolic(cls, order: int, universe: SymbolUniverse | None = None) -> "LinearWeb3":
        """Web whose coefficients are the symbols a2..an, b2..bn, c2..cn."""
        if universe is None:
            universe = SymbolUniverse.span("abc", order)
        cols = []
        for fam in "abc":
            cols.append(tuple(
                CoefPoly.sym(universe, Symbol(fam, i)) for i in range(2, order + 1)
            ))
        return cls(order, *cols)

    def coefficient(self, family: str, index: int):
        if not 2 <= index <= self.order:
            raise IndexError(f"index {index} outside 2..{self.order}")
        return {"a": self.a_coeffs, "b": self.b_coeffs, "c": self.c_coeffs}[family][index - 2]

    def jet(self, family: str, order: int) -> UniJet:
        """Jet of the slope function; zero-padded above the declared order
        (the stored data is a genuine polynomial)."""
        head = _FRAME_HEAD[family]
        cs = list(head)
        stored = {"a": self.a_coeffs, "b": self.b_coeffs, "c": self.c_coeffs}[family]
        for i in range(2, order + 1):
            cs.append(stored[i - 2] if i <= self.order else _ZERO)
        return UniJet("t", order, cs)

    def a_jet(self, order: int) -> UniJet:
        return self.jet("a", order)

    def b_jet(self, order: int) -> UniJet:
        return self.jet("b", order)

    def c_jet(self, order: int) -> UniJet:
        return self.jet("c", order)

    def mu(self):
        """a2 + b2 + c2: the characteristic at the origin divided by 4."""
        return self.a_coeffs[0] + self.b_coeffs[0] + self.c_coeffs[0]

    def truncate(self, order: int) -> "LinearWeb3":
        if order > self.order:
            raise OrderTooHigh(f"web only carries coefficients up to {self.order}")
        n = order - 1
        return LinearWeb3(order, self.a_coeffs[:n], self.b_coeffs[:n], self.c_coeffs[:n])

    def specialize(self, assignment: Mapping) -> "LinearWeb3":
        """Substitute rationals for every symbol, yielding a rational web."""
        def conv(c):
            return c.specialize(assignment) if isinstance(c, CoefPoly) else c
        return LinearWeb3(
            self.order,
            tuple(conv(c) for c in self.a_coeffs),
            tuple(conv(c) for c in self.b_coeffs),
            tuple(conv(c) for c in self.c_coeffs),
        )

    def is_symbolic(self) -> bool:
        return any(
            isinstance(c, CoefPoly)
            for cs in (self.a_coeffs, self.b_coeffs, self.c_coeffs)
            for c in cs
        )


@dataclass(frozen=True)
class SlopeJets:
    """The three slope functions in the chart (u, v), as jets at the origin."""

    P: BiJet
    Q: BiJet
    R: BiJet
    order: int


_UV = ("u", "v")


def leaf_param(web: LinearWeb3, family: str, order: int) -> BiJet:
    """Leaf parameter x(u, v) solving v = a(x) u + x (and likewise for b, c).

    Solved by fixed-point iteration x <- v - u * a(x); each pass settles one
    more order because the correction enters multiplied by u.
    """
    family = family.lower()
    if family not in "abc":
        raise ValueError(f"unknown family {family!r}")
    if order > web.order:
        raise OrderTooHigh(f"order {order} exceeds web order {web.order}")
    f = web.jet(family, order)
    u = BiJet.coordinate(_UV, order, 0)
    v = BiJet.coordinate(_UV, order, 1)
    x = BiJet.zero(_UV, order)
    for _ in range(order):
        x = v - u * compose_bi(f, x)
    assert not (u * compose_bi(f, x) + x - v).coeffs, "leaf parameter solve failed"
    return x


def slope_jets(web: LinearWeb3, order: int) -> SlopeJets:
    """P = a(x(u,v)), Q = b(y(u,v)), R = c(z(u,v)) as jets at the origin."""
    if order > web.order:
        raise OrderTooHigh(f"order {order} exceeds web order {web.order}")
    jets = []
    for fam in "abc":
        x = leaf_param(web, fam, order)
        jets.append(compose_bi(web.jet(fam, order), x))
    return SlopeJets(jets[0], jets[1], jets[2], order)


def pi_delta_origin(s: SlopeJets):
    """Exact values at the origin of the two frame invariants.

    The first is the product of pairwise slope differences, the second the
    corresponding combination of v-derivatives.
    """
    p0, q0, r0 = s.P.constant_term, s.Q.constant_term, s.R.constant_term
    pv, qv, rv = (f.coefficient(0, 1) for f in (s.P, s.Q, s.R))
    pi0 = (p0 - q0) * (q0 - r0) * (r0 - p0)
    delta0 = (p0 - q0) * rv + (q0 - r0) * pv + (r0 - p0) * qv
    return pi0, delta0


def _rational_of(value) -> Fraction:
    if isinstance(value, CoefPoly):
        return value.rational_value()
    return Fraction(value)


def characteristic_origin(web: LinearWeb3):
    """The characteristic at the origin; equals 4(a2 + b2 + c2) in this frame."""
    s = slope_jets(web, 2)
    pi0, delta0 = pi_delta_origin(s)
    svv = (s.P.coefficient(0, 2) + s.Q.coefficient(0, 2) + s.R.coefficient(0, 2)) * 2
    d = _rational_of(delta0)
    return pi0 * svv * (_ONE / d) ** 2


def characteristic_jet(web: LinearWeb3, order: int) -> BiJet:
    """Jet of the characteristic around the origin."""
    if order + 2 > web.order:
        raise OrderTooHigh("need web coefficients two orders above the jet")
    s = slope_jets(web, order + 2)
    P, Q, R = s.P, s.Q, s.R
    Pv, Qv, Rv = P.partial(1), Q.partial(1), R.partial(1)
    pi = (P - Q) * (Q - R) * (R - P)
    delta = (P - Q) * Rv + (Q - R) * Pv + (R - P) * Qv
    svv = (P.partial(1).partial(1) + Q.partial(1).partial(1)
           + R.partial(1).partial(1))
    inv = reciprocal(delta.truncate(order))
    return (pi.truncate(order) * svv.truncate(order) * inv * inv).truncate(order)


def curvature_xyf_origin(f: BiJet):
    """Curvature density at the origin of a web presented as (x, y, f).

    Computes the mixed second derivative of log(f_x / f_y) through the jet
    logarithm of the quotient, normalized to unit constant term first.
    """
    if f.order < 3:
        raise ValueError("curvature needs at least a 3-jet")
    fx = f.partial(0)
    fy = f.partial(1)
    from .jets import _unit_rational  # shared coefficient-unit probe

    cx = _unit_rational(fx.constant_term)
    cy = _unit_rational(fy.constant_term)
    if cx is None or cy is None:
        raise NonUnitDerivative("both first derivatives must be rational units at 0")
    ratio = fx * reciprocal(fy)
    lg = log_unit(ratio * (cy / cx))
    return lg.partial(0).partial(1).constant_term


_XY = ("x", "y")


def fw_jet(web: LinearWeb3, order: int) -> BiJet:
    """Jet of the implicit web function z = f(x, y).

    f is defined by concurrence of the three leaves through (x, y, z):
    the vanishing of det [[1,1,1], [x,y,z], [a(x),b(y),c(z)]], which expands
    to (y - x) c(z) + z (a(x) - b(y)) + x b(y) - y a(x) = 0.  The z-derivative
    at the origin is a(0) - b(0) = 2, a unit, so the jet solution is unique
    and a fixed-point pass settles one order at a time.
    """
    if order - 1 > web.order:
        raise OrderTooHigh(f"order {order} needs web coefficients up to {order - 1}")
    x = BiJet.coordinate(_XY, order, 0)
    y = BiJet.coordinate(_XY, order, 1)
    aj, bj, cj = web.a_jet(order), web.b_jet(order), web.c_jet(order)
    a_of_x = BiJet(_XY, order, {(n, 0): c for n, c in enumerate(aj.coeffs) if c})
    b_of_y = BiJet(_XY, order, {(0, n): c for n, c in enumerate(bj.coeffs) if c})
    h = a_of_x - b_of_y - 2
    xb = x * b_of_y
    ya = y * a_of_x
    yx = y - x
    z = BiJet.zero(_XY, order)
    half = Fraction(-1, 2)
    for _ in range(order):
        z = (yx * compose_bi(cj, z) + z * h + xb - ya) * half
    resid = yx * compose_bi(cj, z) + z * (a_of_x - b_of_y) + xb - ya
    assert not resid.coeffs, "implicit web-function solve failed"
    return z
