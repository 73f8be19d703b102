"""Golden identities: every formula the engine is expected to reproduce.

Each check recomputes a quantity from scratch and compares it exactly with
its reference value.  The CLI verification command prints one line per
check; the test suite asserts the same list is all green.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .exactalg import CoefPoly, Symbol
from .jets import BiJet
from .normalform import normal_form_of_web
from .obstructions import PerturbedWeb, solve_order1, solve_order2, top_linear_coeffs
from .webcore import (
    LinearWeb3,
    characteristic_origin,
    leaf_param,
    pi_delta_origin,
    slope_jets,
)


@dataclass
class GoldenResult:
    name: str
    ok: bool
    expected: str
    got: str


def _render(value) -> str:
    if hasattr(value, "render"):
        return value.render()
    if isinstance(value, tuple):
        return "(" + ", ".join(_render(v) for v in value) + ")"
    if isinstance(value, Fraction):
        from .exactalg import render_rational

        return render_rational(value)
    return str(value)


def _check(name, got, expected) -> GoldenResult:
    return GoldenResult(name, got == expected, _render(expected), _render(got))


_UV = ("u", "v")


def frame_checks():
    """Two-jets of the leaf parameters and slopes in the normalized frame."""
    web = LinearWeb3.symbolic(2)
    uni = web.a_coeffs[0].universe
    a2, b2, c2 = (CoefPoly.sym(uni, s) for s in ("a2", "b2", "c2"))
    h = Fraction(1, 2)

    def bj(terms):
        return BiJet(_UV, 2, terms)

    out = [
        _check("leaf-x", leaf_param(web, "a", 2),
               bj({(1, 0): -1, (0, 1): 1, (2, 0): -1, (1, 1): 1})),
        _check("leaf-y", leaf_param(web, "b", 2),
               bj({(1, 0): 1, (0, 1): 1, (2, 0): 1, (1, 1): 1})),
        _check("leaf-z", leaf_param(web, "c", 2),
               bj({(0, 1): 1, (1, 1): h})),
    ]
    s = slope_jets(web, 2)
    out += [
        _check("slope-P", s.P, bj({(0, 0): 1, (1, 0): 1, (0, 1): -1,
                                   (2, 0): 1 + a2, (1, 1): -1 - 2 * a2, (0, 2): a2})),
        _check("slope-Q", s.Q, bj({(0, 0): -1, (1, 0): -1, (0, 1): -1,
                                   (2, 0): -1 + b2, (1, 1): -1 + 2 * b2, (0, 2): b2})),
        _check("slope-R", s.R, bj({(0, 1): -h, (1, 1): -Fraction(1, 4), (0, 2): c2})),
    ]
    pi0, delta0 = pi_delta_origin(s)
    out += [
        _check("pi-at-origin", pi0, 2),
        _check("delta-at-origin", delta0, 1),
        _check("P_vv-at-origin", s.P.coefficient(0, 2) * 2, 2 * a2),
        _check("Q_vv-at-origin", s.Q.coefficient(0, 2) * 2, 2 * b2),
        _check("R_vv-at-origin", s.R.coefficient(0, 2) * 2, 2 * c2),
        _check("characteristic-at-origin", characteristic_origin(web),
               4 * (a2 + b2 + c2)),
    ]
    return out


def expected_normal_form_coeffs(uni):
    """The five low-order normal-form coefficients, as printed references."""
    a2, a3, a4, b2, b3, b4, c2, c3, c4 = (
        CoefPoly.sym(uni, s)
        for s in ("a2", "a3", "a4", "b2", "b3", "b4", "c2", "c3", "c4")
    )
    e10 = (-2 * a2 - 2 * b2 + c2 + 20 * a3 + 8 * b3 + 14 * c3) / 7
    e01 = (2 * a2 + 2 * b2 - c2 + 20 * b3 + 8 * a3 + 14 * c3) / 7
    e20 = (a2 / 12 + b2 / 12 - c2 / 6 + 10 * a2 ** 2 / 3 + c2 ** 2
           + 2 * (a2 * b2) / 3 - 2 * (b2 * c2) / 3 + 2 * (a2 * c2) / 3
           - 2 * a3 + c3 / 3 + 20 * a4 / 3 + 4 * b4 / 3 + 3 * c4)
    e11 = (-a2 / 12 - b2 / 12 - c2 / 3 + a2 ** 2 / 3 - b2 ** 2 / 3
           + 4 * (c2 * (a2 - b2)) / 3 + 4 * a4 + 4 * b4 + 5 * c4)
    e02 = (a2 / 12 + b2 / 12 - c2 / 6 - 10 * b2 ** 2 / 3 - c2 ** 2
           - 2 * (a2 * b2) / 3 - 2 * (b2 * c2) / 3 + 2 * (a2 * c2) / 3
           + 2 * b3 - c3 / 3 + 20 * b4 / 3 + 4 * a4 / 3 + 3 * c4)
    return {(1, 0): e10, (0, 1): e01, (2, 0): e20, (1, 1): e11, (0, 2): e02}


def normal_form_checks():
    """Symbolic normal-form coefficients through bidegree 2."""
    web = LinearWeb3.symbolic(4)
    uni = web.a_coeffs[0].universe
    result = normal_form_of_web(web, 2)
    a2, b2, c2 = (CoefPoly.sym(uni, s) for s in ("a2", "b2", "c2"))
    out = [_check("mu-is-a2+b2+c2", result.mu, a2 + b2 + c2)]
    for (i, j), want in expected_normal_form_coeffs(uni).items():
        out.append(_check(f"E{i}{j}", result.E.coefficient(i, j), want))
    return out


def expected_order1_relations(uni):
    a2_, b2_, c3_ = (CoefPoly.sym(uni, s) for s in ("A2", "B2", "C3"))
    return {
        Symbol("A", 3): a2_ / 4 + b2_ / 4 - c3_ / 2,
        Symbol("B", 3): -a2_ / 4 - b2_ / 4 - c3_ / 2,
    }


def expected_order2_relations(uni):
    A2, B2, C3, a2, b2, c2 = (
        CoefPoly.sym(uni, s) for s in ("A2", "B2", "C3", "a2", "b2", "c2")
    )
    a4 = (A2 / 8 + c2 * B2 / 3 + b2 * B2 / 3 + B2 / 8 - b2 * A2 / 12
          - B2 * A2 / 2 - B2 * a2 / 6 - 19 * (a2 * A2) / 12 - A2 ** 2
          + 5 * (c2 * A2) / 12 - C3 / 4)
    b4 = (A2 / 8 - 5 * (c2 * B2) / 12 + 19 * (b2 * B2) / 12 + B2 / 8
          - a2 * A2 / 3 + b2 * A2 / 6 + B2 * A2 / 2 + B2 * a2 / 12
          + B2 ** 2 - c2 * A2 / 3 + C3 / 4)
    c4 = (-A2 / 4 + c2 * B2 / 3 - 5 * (b2 * B2) / 3 - B2 / 4
          + 5 * (a2 * A2) / 3 - b2 * A2 / 3 + B2 * a2 / 3 - B2 ** 2
          - c2 * A2 / 3 + A2 ** 2)
    return {Symbol("A", 4): a4, Symbol("B", 4): b4, Symbol("C", 4): c4}


def relation_checks():
    """Solved perturbation relations at orders one and two, symbolically."""
    p = PerturbedWeb(LinearWeb3.symbolic(4))
    sol1 = solve_order1(p)
    uni1 = next(iter(sol1.values())).universe
    out = []
    for s, want in expected_order1_relations(uni1).items():
        out.append(_check(f"relation-{s}", sol1[s], want))
    sol2 = solve_order2(p)
    uni2 = next(iter(sol2.values())).universe
    for s, want in expected_order2_relations(uni2).items():
        out.append(_check(f"relation-{s}", sol2[s], want))
    return out


TOP_TRIPLES = {
    (2, 0): (Fraction(20, 3), Fraction(4, 3), Fraction(3)),
    (1, 1): (Fraction(4), Fraction(4), Fraction(5)),
    (0, 2): (Fraction(4, 3), Fraction(20, 3), Fraction(3)),
}


def top_coefficient_checks():
    """Constant coefficients of the highest-index symbols at bidegree 2."""
    web = LinearWeb3.symbolic(4)
    out = []
    for (i, j), want in TOP_TRIPLES.items():
        got = top_linear_coeffs(i, j, base=web)
        out.append(_check(
            f"top-triple-E{i}{j}",
            tuple(got),
            want,
        ))
    return out


def run_golden_checks():
    checks = []
    checks += frame_checks()
    checks += normal_form_checks()
    checks += relation_checks()
    checks += top_coefficient_checks()
    return checks
