"""Matching equations between a web and a perturbed copy sharing its
characteristic value, and their exact solution order by order.

The perturbed web replaces every coefficient a_r, b_r, c_r by a_r + A_r,
b_r + B_r, c_r + C_r; equality of characteristics locks C2 = -A2 - B2, so
C2 never appears as a free symbol.  Equating normal-form coefficients gives
one polynomial equation T_ij per bidegree; these are solved in the order
1, 2, 3, 5, after which the five bidegree-4 equations collapse to quadratic
relations in A2 and B2 alone.

Orders 1 and 2 are solved fully symbolically (constant-coefficient linear
systems).  The higher orders are solved per rational base web: each stage
substitutes everything already solved into the web coefficients before
running the jet pipeline, which is legitimate because the whole pipeline
commutes with coefficient-ring homomorphisms (divisions are by rational
constants only).
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Mapping

from .exactalg import (
    CoefPoly,
    Symbol,
    SymbolUniverse,
    TriwebError,
    det_bareiss,
    matrix_rank,
    rational_kernel,
    solve_linear,
    _as_symbol,
)
from .normalform import normal_form_of_web
from .webcore import LinearWeb3, OrderTooHigh

_ZERO = Fraction(0)


class ObstructionError(TriwebError):
    pass


class SingularSample(ObstructionError):
    pass


class NonlinearSystem(ObstructionError):
    pass


class NonConstantTopCoefficient(ObstructionError):
    pass


_PERT_OF = {"a": "A", "b": "B", "c": "C"}


def perturbation_symbols(max_index: int):
    """All free perturbation symbols up to an index; C2 is never free."""
    return [
        Symbol(fam, r)
        for fam in "ABC"
        for r in range(2, max_index + 1)
        if not (fam == "C" and r == 2)
    ]


class PerturbedWeb:
    """A base web together with the symbolic perturbation of its data."""

    def __init__(self, base: LinearWeb3):
        self.base = base
        self._t_cache: dict = {}

    @property
    def order(self) -> int:
        return self.base.order

    def perturbed_web(self, max_index: int, solved: Mapping | None = None) -> LinearWeb3:
        """The perturbed web truncated at max_index.

        ``solved`` maps perturbation symbols to polynomial images (over the
        remaining free symbols); those are substituted directly into the
        coefficient data, so downstream jets never see the solved symbols.
        """
        if max_index > self.base.order:
            raise OrderTooHigh("perturbation order exceeds the base web order")
        solved = {_as_symbol(s): v for s, v in (solved or {}).items()}
        free = [s for s in perturbation_symbols(max_index) if s not in solved]
        extra = set()
        for s, img in solved.items():
            if s.index <= max_index and isinstance(img, CoefPoly):
                extra |= img.symbols_used()
        base_syms = set()
        for cs in (self.base.a_coeffs, self.base.b_coeffs, self.base.c_coeffs):
            for c in cs:
                if isinstance(c, CoefPoly):
                    base_syms |= c.symbols_used()
        uni = SymbolUniverse(set(free) | extra | base_syms)

        def pert(fam_upper: str, r: int):
            if fam_upper == "C" and r == 2:
                return -(pert("A", 2) + pert("B", 2))
            s = Symbol(fam_upper, r)
            if s in solved:
                img = solved[s]
                return img.reembed(uni) if isinstance(img, CoefPoly) else CoefPoly.const(uni, img)
            return CoefPoly.sym(uni, s)

        cols = []
        for fam in "abc":
            col = []
            for r in range(2, max_index + 1):
                c = self.base.coefficient(fam, r)
                c = c.reembed(uni) if isinstance(c, CoefPoly) else CoefPoly.const(uni, c)
                col.append(c + pert(_PERT_OF[fam], r))
            cols.append(tuple(col))
        return LinearWeb3(max_index, *cols)


def _as_poly(value, universe: SymbolUniverse) -> CoefPoly:
    if isinstance(value, CoefPoly):
        return value.reembed(universe)
    return CoefPoly.const(universe, value)


def t_polys(p: PerturbedWeb, k: int, solved: Mapping | None = None):
    """The matching equations T_ij = E_ij - Ebar_ij for all i + j <= k."""
    if k + 2 > p.base.order:
        raise OrderTooHigh(f"k={k} needs base coefficients up to {k + 2}")
    cache_key = k if solved is None else None
    if cache_key is not None and cache_key in p._t_cache:
        return dict(p._t_cache[cache_key])
    wbar = p.perturbed_web(k + 2, solved)
    uni = wbar.a_coeffs[0].universe
    e_bar = normal_form_of_web(wbar, k).E
    e_base = normal_form_of_web(p.base.truncate(k + 2), k).E
    T = {}
    for d in range(1, k + 1):
        for i in range(d, -1, -1):
            j = d - i
            T[(i, j)] = _as_poly(e_base.coefficient(i, j), uni) - _as_poly(
                e_bar.coefficient(i, j), uni
            )
    if cache_key is not None:
        p._t_cache[cache_key] = dict(T)
    return T


def _split_linear(eq: CoefPoly, unknowns):
    """Write eq as sum(coeff_u * u) + rest, linear in the unknowns jointly."""
    uni = eq.universe
    bits = uni.BITS
    positions = {}
    for u in unknowns:
        u = _as_symbol(u)
        positions[uni.position(u)] = u
    rows = {u: CoefPoly.zero(uni) for u in positions.values()}
    rest: dict = {}
    for key, coef in eq.terms.items():
        hits = [(p, (key >> (p * bits)) & uni._MASK) for p in positions]
        hits = [(p, e) for p, e in hits if e]
        total = sum(e for _, e in hits)
        if total == 0:
            rest[key] = coef
        elif total == 1:
            p = hits[0][0]
            stripped = key - (1 << (p * bits))
            rows[positions[p]] = rows[positions[p]] + CoefPoly._raw(uni, {stripped: coef})
        else:
            mono = "*".join(str(positions[p]) for p, e in hits for _ in range(e))
            raise NonlinearSystem(f"unknowns enter non-linearly through {mono}")
    return rows, CoefPoly._raw(uni, rest)


def _solve_for(eqs, unknowns):
    """Solve linear equations for the unknown symbols; returns polynomials.

    The solution of each unknown must be a polynomial in the remaining
    symbols (constant denominators are folded in, non-constant ones must
    divide exactly); anything else violates the expected structure.
    """
    unknowns = [_as_symbol(u) for u in unknowns]
    rows = []
    rhs = []
    for eq in eqs:
        row, rest = _split_linear(eq, unknowns)
        rows.append([row[u] for u in unknowns])
        rhs.append(-rest)
    pairs = solve_linear(rows, rhs)
    out = {}
    den = pairs[0][1]
    for u, (num, d) in zip(unknowns, pairs):
        if d.is_constant():
            out[u] = num / d.rational_value()
        else:
            out[u] = num.divide_exact(d)
    for eq in eqs:
        if eq.substitute(out):
            raise ObstructionError("solved relations do not satisfy the equations")
    return out, den


def solve_order1(p: PerturbedWeb):
    """A3 and B3 from the two bidegree-1 equations."""
    T = t_polys(p, 1)
    sol, _ = _solve_for([T[(1, 0)], T[(0, 1)]], [Symbol("A", 3), Symbol("B", 3)])
    return sol


def solve_order2(p: PerturbedWeb):
    """A4, B4, C4 from the bidegree-2 equations, after the order-1 relations."""
    sol1 = solve_order1(p)
    T = t_polys(p, 2)
    eqs = [T[(2, 0)].substitute(sol1), T[(1, 1)].substitute(sol1), T[(0, 2)].substitute(sol1)]
    sol, _ = _solve_for(eqs, [Symbol("A", 4), Symbol("B", 4), Symbol("C", 4)])
    return sol


@dataclass
class Order4System:
    """The five bidegree-4 equations reduced to A2 and B2.

    Each tuple holds the coefficients (alpha, beta, gamma, mu, nu) of
    A2^2, B2^2, A2 B2, A2, B2 in one equation; ``rank`` is the exact rank
    of the 5 x 3 quadratic-part matrix, and ``reduced`` rewrites the system
    with the three quadratic monomials isolated followed by the purely
    linear conditions, each as a (psi, phi) pair against (A2, B2).
    """

    tuples: list
    rank: int
    reduced: list


class PerturbationChain:
    """Stage-by-stage solver of the matching equations for a rational base."""

    def __init__(self, base: LinearWeb3):
        if base.is_symbolic():
            raise ValueError("the staged solver needs a rational base web")
        if base.mu() == 0:
            raise SingularSample("a2 + b2 + c2 vanishes at the base point")
        self.p = PerturbedWeb(base)
        self.solved: dict = {}
        self.meta: dict = {}
        self._done: set = set()

    def _equations(self, k: int):
        T = t_polys(self.p, k, solved=self.solved)
        return [T[(i, k - i)] for i in range(k, -1, -1)]

    def run_order1(self):
        if 1 in self._done:
            return
        T = t_polys(self.p, 1, solved=self.solved)
        sol, _ = _solve_for([T[(1, 0)], T[(0, 1)]], [Symbol("A", 3), Symbol("B", 3)])
        self.solved.update(sol)
        self._done.add(1)

    def run_order2(self):
        self.run_order1()
        if 2 in self._done:
            return
        eqs = self._equations(2)
        sol, _ = _solve_for(eqs, [Symbol("A", 4), Symbol("B", 4), Symbol("C", 4)])
        self.solved.update(sol)
        self._done.add(2)

    def run_order3(self):
        """Solve the four bidegree-3 equations for A5, B5, C5 and C3.

        The top coefficients of A5, B5, C5 are rational constants, so a
        rational left-kernel combination of the four equations eliminates
        them; the survivor must be linear in C3 with a constant pivot
        (the pivot is a fixed multiple of a2 + b2 + c2 across base webs).
        """
        self.run_order2()
        if 3 in self._done:
            return
        eqs = self._equations(3)
        top = [Symbol("A", 5), Symbol("B", 5), Symbol("C", 5)]
        c3 = Symbol("C", 3)
        rows = []
        rests = []
        for eq in eqs:
            row, rest = _split_linear(eq, top)
            rows.append([row[u] for u in top])
            rests.append(rest)
        const_rows = []
        for row in rows:
            try:
                const_rows.append([c.rational_value() for c in row])
            except ValueError:
                raise NonConstantTopCoefficient(
                    "top-index coefficients are not rational constants"
                ) from None
        kern = rational_kernel([[const_rows[i][j] for i in range(4)] for j in range(3)])
        if len(kern) != 1:
            raise ObstructionError("bidegree-3 elimination is degenerate")
        lam = kern[0]
        resid = CoefPoly.zero(rests[0].universe)
        for l, rest in zip(lam, rests):
            resid = resid + rest * l
        if resid.degree_in(c3) > 1:
            raise NonlinearSystem("eliminated equation stays nonlinear in C3")
        pivot_row, pivot_rest = _split_linear(resid, [c3])
        kappa = pivot_row[c3]
        if not kappa.is_constant():
            raise NonlinearSystem("C3 pivot depends on the free perturbations")
        kval = kappa.rational_value()
        if not kval:
            raise SingularSample("C3 pivot vanishes at this base point")
        c3_sol = pivot_rest * (Fraction(-1) / kval)
        self.meta["order3_c3_pivot"] = kval
        # three equations with an invertible constant block back-solve the rest
        for trio in combinations(range(4), 3):
            sub = [const_rows[i] for i in trio]
            if matrix_rank(sub) == 3:
                break
        else:
            raise ObstructionError("no invertible bidegree-3 subsystem")
        eqs3 = [eqs[i].substitute({c3: c3_sol}) for i in trio]
        sol, den = _solve_for(eqs3, top)
        self.meta["order3_den"] = den.rational_value()
        sol[c3] = c3_sol
        reduced = {s: v.substitute({c3: c3_sol}) for s, v in self.solved.items()}
        reduced.update(sol)
        self.solved = reduced
        self._done.add(3)

    def run_order5(self):
        """Solve the six bidegree-5 equations for A6, B6, C6, A7, B7, C7."""
        self.run_order3()
        if 5 in self._done:
            return
        eqs = self._equations(5)
        unknowns = [Symbol(f, r) for r in (6, 7) for f in "ABC"]
        sol, den = _solve_for(eqs, unknowns)
        self.meta["order5_den"] = den
        self.solved.update(sol)
        self._done.add(5)

    def relations(self):
        return dict(self.solved)

    def order4(self) -> Order4System:
        """Reduce the five bidegree-4 equations to A2 and B2 and certify rank."""
        self.run_order5()
        eqs = self._equations(4)
        a2, b2 = Symbol("A", 2), Symbol("B", 2)
        allowed = [
            {a2: 2}, {b2: 2}, {a2: 1, b2: 1}, {a2: 1}, {b2: 1},
        ]
        tuples = []
        for eq in eqs:
            coeffs = [eq.coefficient_of(m) for m in allowed]
            recon = CoefPoly.zero(eq.universe)
            for m, c in zip(allowed, coeffs):
                recon = recon + CoefPoly.monomial(eq.universe, m, c)
            if recon != eq:
                raise ObstructionError(
                    "bidegree-4 equation is not a quadratic in A2, B2: "
                    + eq.render()
                )
            tuples.append(tuple(coeffs))
        rank = matrix_rank([t[:3] for t in tuples])
        reduced = _reduce_order4(tuples)
        return Order4System(tuples=tuples, rank=rank, reduced=reduced)


def _reduce_order4(tuples):
    """Row-reduce so A2^2, B2^2, A2 B2 are isolated, then the linear rows.

    Rows come back as (psi, phi) pairs: the first three give
    A2^2 = psi A2 + phi B2 (and likewise for B2^2, A2 B2), the remaining
    ones give 0 = psi A2 + phi B2.
    """
    aug = [[t[0], t[1], t[2], -t[3], -t[4]] for t in tuples]
    m = len(aug)
    r = 0
    for c in range(3):
        piv = next((i for i in range(r, m) if aug[i][c]), None)
        if piv is None:
            continue
        aug[r], aug[piv] = aug[piv], aug[r]
        pv = aug[r][c]
        aug[r] = [x / pv for x in aug[r]]
        for i in range(m):
            if i != r and aug[i][c]:
                f = aug[i][c]
                aug[i] = [x - f * y for x, y in zip(aug[i], aug[r])]
        r += 1
    return [(row[3], row[4]) for row in aug]


def _specialized_base(p: PerturbedWeb, sample: Mapping | None) -> LinearWeb3:
    base = p.base
    if base.is_symbolic():
        if sample is None:
            raise ValueError("a symbolic base web needs a sample assignment")
        base = base.specialize(sample)
    if base.mu() == 0:
        raise SingularSample("a2 + b2 + c2 vanishes at the sample")
    return base


def solve_order_specialized(p: PerturbedWeb, n: int, sample: Mapping | None = None):
    """Solve the bidegree-n equations (n in {3, 5}) at a rational base point.

    Returns the relations solved at that order, as polynomials in A2, B2
    with exact rational coefficients, plus the full chain for inspection.
    """
    if n not in (3, 5):
        raise ValueError("specialized solving handles bidegrees 3 and 5")
    chain = PerturbationChain(_specialized_base(p, sample))
    if n == 3:
        chain.run_order3()
        wanted = [Symbol("A", 5), Symbol("B", 5), Symbol("C", 5), Symbol("C", 3)]
    else:
        chain.run_order5()
        wanted = [Symbol(f, r) for r in (6, 7) for f in "ABC"]
    return {s: chain.solved[s] for s in wanted}, chain


def order4_system(p: PerturbedWeb, sample: Mapping | None = None) -> Order4System:
    """The reduced bidegree-4 system at a rational base point."""
    chain = PerturbationChain(_specialized_base(p, sample))
    return chain.order4()


# -- top-index coefficients ---------------------------------------------------


def _top_triple_run(n: int, lower: Mapping):
    """One pipeline run with only a_n, b_n, c_n symbolic.

    ``lower`` assigns rationals to every coefficient of index below n.
    Returns the (theta, phi, psi) triples for the whole antidiagonal
    i + j = n - 2.
    """
    top = [Symbol("a", n), Symbol("b", n), Symbol("c", n)]
    uni = SymbolUniverse(top)
    cols = []
    for fam in "abc":
        col = [
            CoefPoly.const(uni, lower.get(Symbol(fam, r), 0))
            for r in range(2, n)
        ]
        col.append(CoefPoly.sym(uni, Symbol(fam, n)))
        cols.append(tuple(col))
    web = LinearWeb3(n, *cols)
    E = normal_form_of_web(web, n - 2).E
    out = {}
    for i in range(n - 2, -1, -1):
        j = n - 2 - i
        eq = _as_poly(E.coefficient(i, j), uni)
        rows, _ = _split_linear(eq, top)
        triple = []
        for s in top:
            c = rows[s]
            if not c.is_constant():
                raise NonConstantTopCoefficient(
                    f"coefficient of {s} in E[{i},{j}] is not constant: {c.render()}"
                )
            triple.append(c.rational_value())
        out[(i, j)] = tuple(triple)
    return out


def _lower_samples(n: int, samples: int, seed: int):
    """Deterministic assignments of the below-top coefficients; the all-zero
    assignment is always included."""
    rng = random.Random(seed)
    out = [{}]
    for _ in range(max(samples - 1, 0)):
        assign = {}
        for fam in "abc":
            for r in range(2, n):
                assign[Symbol(fam, r)] = Fraction(rng.randint(-9, 9), rng.randint(1, 9))
        out.append(assign)
    return out


def antidiagonal_top_matrix(n: int, samples: int = 2, seed: int = 101):
    """(theta, phi, psi) triples for every bidegree with i + j + 2 = n.

    Runs with the three top symbols kept symbolic and all lower coefficients
    specialized; repeats over several assignments and insists the triples do
    not move, which is the constancy claim behind the rank certificates.
    """
    if n < 4:
        raise ValueError("top-coefficient extraction starts at index 4")
    runs = [_top_triple_run(n, lower) for lower in _lower_samples(n, samples, seed)]
    first = runs[0]
    for other in runs[1:]:
        if other != first:
            raise NonConstantTopCoefficient(
                f"top coefficients at index {n} vary with lower-order data"
            )
    return first


def top_linear_coeffs(i: int, j: int, base: LinearWeb3 | None = None,
                      samples: int = 2, seed: int = 101):
    """The constant coefficients of a_n, b_n, c_n (n = i + j + 2) in E_ij.

    With a symbolic ``base`` the extraction is fully symbolic and the
    constancy check is an exact polynomial statement; otherwise lower
    coefficients are specialized over several deterministic samples.
    """
    if i + j <= 2:
        raise ValueError("defined for bidegrees with i + j > 2")
    n = i + j + 2
    if base is not None:
        if not base.is_symbolic():
            raise ValueError("explicit base webs must be symbolic")
        if base.order < n:
            raise OrderTooHigh(f"need symbolic coefficients up to index {n}")
        E = normal_form_of_web(base.truncate(n), i + j).E
        uni = base.a_coeffs[0].universe
        eq = _as_poly(E.coefficient(i, j), uni)
        rows, _ = _split_linear(eq, [Symbol("a", n), Symbol("b", n), Symbol("c", n)])
        triple = []
        for fam in "abc":
            c = rows[Symbol(fam, n)]
            if not c.is_constant():
                raise NonConstantTopCoefficient(
                    f"coefficient of {fam}{n} in E[{i},{j}] is not constant"
                )
            triple.append(c.rational_value())
        return tuple(triple)
    return antidiagonal_top_matrix(n, samples=samples, seed=seed)[(i, j)]


# -- report -------------------------------------------------------------------


@dataclass
class ObstructionReport:
    """Everything one analysis produced, in renderable form."""

    T: dict = field(default_factory=dict)
    solved: dict = field(default_factory=dict)
    quad_system: list = field(default_factory=list)
    top_matrix: dict = field(default_factory=dict)
    seed: int | None = None
    samples: list = field(default_factory=list)
