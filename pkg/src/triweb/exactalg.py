"""Exact arithmetic kernel: rationals, coefficient symbols, sparse polynomials,
and fraction-free linear solving.

Scalars are ``fractions.Fraction``.  ``CoefPoly`` is a sparse multivariate
polynomial over the rationals whose variables come from a fixed, ordered
``SymbolUniverse`` of web-coefficient symbols (a2, b3, C4, ...).  Monomials
are exponent vectors packed into single integers, so a monomial product is a
single integer addition; the canonical term order is graded lexicographic
with symbol order a2 < a3 < ... < b2 < ... < c2 < ... < A2 < B2 < C2 < ...
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Sequence, Union

Rational = Fraction

Scalar = Union[int, Fraction]

FAMILY_ORDER = "abcABC"


class TriwebError(Exception):
    """Base class for every error raised by this package."""


class ExactAlgError(TriwebError):
    pass


class UniverseMismatch(ExactAlgError):
    pass


class RankDeficient(ExactAlgError):
    pass


class Inconsistent(ExactAlgError):
    pass


class NotDivisible(ExactAlgError):
    pass


_RATIONAL_RE = re.compile(r"^([+-]?\d+)(?:\s*/\s*([+-]?\d+))?$")


def parse_rational(text: str) -> Fraction:
    """Parse an exact rational literal of the form ``p`` or ``p/q``."""
    m = _RATIONAL_RE.match(text.strip())
    if not m:
        raise ValueError(f"not a rational literal: {text!r}")
    den = int(m.group(2)) if m.group(2) else 1
    if den == 0:
        raise ValueError(f"zero denominator in {text!r}")
    return Fraction(int(m.group(1)), den)


def render_rational(value) -> str:
    q = Fraction(value)
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


@dataclass(frozen=True, slots=True)
class Symbol:
    """A web-coefficient symbol: family letter plus index at least 2."""

    family: str
    index: int

    def __post_init__(self):
        if self.family not in FAMILY_ORDER:
            raise ValueError(f"unknown symbol family {self.family!r}")
        if self.index < 2:
            raise ValueError("coefficient symbols start at index 2")

    @property
    def rank(self):
        return (FAMILY_ORDER.index(self.family), self.index)

    def __str__(self):
        return f"{self.family}{self.index}"

    @classmethod
    def parse(cls, text: str) -> "Symbol":
        text = text.strip()
        if len(text) < 2 or text[0] not in FAMILY_ORDER or not text[1:].isdigit():
            raise ValueError(f"not a symbol: {text!r}")
        return cls(text[0], int(text[1:]))


def _as_symbol(s) -> Symbol:
    return s if isinstance(s, Symbol) else Symbol.parse(s)


class SymbolUniverse:
    """Fixed, ordered set of symbols shared by a family of polynomials.

    The universe pins the exponent-vector layout: exponents are packed into
    one integer, ``BITS`` bits per symbol.  Individual exponents must stay
    below 31 so that one packed addition can never carry between fields.
    """

    BITS = 6
    _MASK = (1 << BITS) - 1
    MAX_EXPONENT = 30

    __slots__ = ("symbols", "_pos")

    def __init__(self, symbols: Iterable):
        syms = {_as_symbol(s) for s in symbols}
        self.symbols = tuple(sorted(syms, key=lambda s: s.rank))
        self._pos = {s: i for i, s in enumerate(self.symbols)}

    @classmethod
    def span(cls, families: str, max_index: int, skip=()) -> "SymbolUniverse":
        skip = {_as_symbol(s) for s in skip}
        syms = [
            Symbol(f, i)
            for f in families
            for i in range(2, max_index + 1)
            if Symbol(f, i) not in skip
        ]
        return cls(syms)

    def __len__(self):
        return len(self.symbols)

    def __iter__(self):
        return iter(self.symbols)

    def __contains__(self, sym):
        return _as_symbol(sym) in self._pos

    def __eq__(self, other):
        if isinstance(other, SymbolUniverse):
            return self.symbols == other.symbols
        return NotImplemented

    def __hash__(self):
        return hash(self.symbols)

    def __repr__(self):
        return "SymbolUniverse(%s)" % ", ".join(str(s) for s in self.symbols)

    def position(self, sym) -> int:
        try:
            return self._pos[_as_symbol(sym)]
        except KeyError:
            raise UniverseMismatch(f"symbol {sym} not in universe {self!r}") from None

    def pack(self, exponents: Sequence[int]) -> int:
        if len(exponents) != len(self.symbols):
            raise ValueError("exponent vector has the wrong length")
        key = 0
        for p, e in enumerate(exponents):
            if e < 0 or e > self.MAX_EXPONENT:
                raise ValueError(f"exponent {e} out of packed range")
            key |= e << (p * self.BITS)
        return key

    def pack_symbol(self, sym, exp: int = 1) -> int:
        return exp << (self.position(sym) * self.BITS)

    def unpack(self, key: int):
        bits, mask = self.BITS, self._MASK
        out = []
        for _ in range(len(self.symbols)):
            out.append(key & mask)
            key >>= bits
        return tuple(out)

    def term_degree(self, key: int) -> int:
        bits, mask = self.BITS, self._MASK
        total = 0
        while key:
            total += key & mask
            key >>= bits
        return total

    def union(self, extra: Iterable) -> "SymbolUniverse":
        return SymbolUniverse(list(self.symbols) + [_as_symbol(s) for s in extra])


class CoefPoly:
    """Sparse multivariate polynomial over the rationals in a fixed universe.

    Values are immutable by convention; every operation returns a fresh
    polynomial in canonical form (no stored zero coefficients).
    """

    __slots__ = ("universe", "terms")

    def __init__(self, universe: SymbolUniverse, terms: Mapping[int, Scalar] | None = None):
        clean = {}
        if terms:
            for key, val in terms.items():
                if not isinstance(val, Fraction):
                    val = Fraction(val)
                if val:
                    clean[key] = val
        self.universe = universe
        self.terms = clean

    @classmethod
    def _raw(cls, universe, terms) -> "CoefPoly":
        p = object.__new__(cls)
        p.universe = universe
        p.terms = terms
        return p

    @classmethod
    def zero(cls, universe) -> "CoefPoly":
        return cls._raw(universe, {})

    @classmethod
    def const(cls, universe, value) -> "CoefPoly":
        value = Fraction(value)
        return cls._raw(universe, {0: value} if value else {})

    @classmethod
    def sym(cls, universe, s) -> "CoefPoly":
        return cls._raw(universe, {universe.pack_symbol(s): Fraction(1)})

    @classmethod
    def monomial(cls, universe, exponents: Mapping, coeff=1) -> "CoefPoly":
        key = 0
        for s, e in exponents.items():
            key += universe.pack_symbol(s, e)
        coeff = Fraction(coeff)
        return cls._raw(universe, {key: coeff} if coeff else {})

    # -- ring structure -------------------------------------------------

    def _coerce(self, other):
        if isinstance(other, CoefPoly):
            if other.universe is self.universe or other.universe == self.universe:
                return other
            raise UniverseMismatch("operands live in different symbol universes")
        if isinstance(other, (int, Fraction)):
            return CoefPoly.const(self.universe, other)
        return None

    def __add__(self, other):
        q = self._coerce(other)
        if q is None:
            return NotImplemented
        if not q.terms:
            return self
        if not self.terms:
            return q
        out = dict(self.terms)
        for k, v in q.terms.items():
            acc = out.get(k)
            if acc is None:
                out[k] = v
            else:
                acc = acc + v
                if acc:
                    out[k] = acc
                else:
                    del out[k]
        return CoefPoly._raw(self.universe, out)

    __radd__ = __add__

    def __sub__(self, other):
        q = self._coerce(other)
        if q is None:
            return NotImplemented
        return self + (-q)

    def __rsub__(self, other):
        q = self._coerce(other)
        if q is None:
            return NotImplemented
        return q + (-self)

    def __neg__(self):
        return CoefPoly._raw(self.universe, {k: -v for k, v in self.terms.items()})

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            if not other:
                return CoefPoly.zero(self.universe)
            f = Fraction(other)
            return CoefPoly._raw(self.universe, {k: v * f for k, v in self.terms.items()})
        q = self._coerce(other)
        if q is None:
            return NotImplemented
        if not self.terms or not q.terms:
            return CoefPoly.zero(self.universe)
        out = {}
        for k1, v1 in self.terms.items():
            for k2, v2 in q.terms.items():
                k = k1 + k2
                v = v1 * v2
                acc = out.get(k)
                if acc is None:
                    out[k] = v
                else:
                    acc = acc + v
                    if acc:
                        out[k] = acc
                    else:
                        del out[k]
        return CoefPoly._raw(self.universe, out)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if not isinstance(n, int) or n < 0:
            raise ValueError("polynomial powers must be non-negative integers")
        result = CoefPoly.const(self.universe, 1)
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            if not other:
                raise ZeroDivisionError("division of polynomial by zero")
            return self * (Fraction(1) / Fraction(other))
        return NotImplemented

    def __bool__(self):
        return bool(self.terms)

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            if not other:
                return not self.terms
            return len(self.terms) == 1 and self.terms.get(0) == other
        if isinstance(other, CoefPoly):
            if other.universe is self.universe or other.universe == self.universe:
                return self.terms == other.terms
            return self.content() == other.content()
        return NotImplemented

    __hash__ = None

    # -- queries ---------------------------------------------------------

    def content(self):
        """Universe-independent view: {((symbol, exp), ...): coefficient}."""
        syms = self.universe.symbols
        unpack = self.universe.unpack
        return {
            tuple((s, e) for s, e in zip(syms, unpack(k)) if e): v
            for k, v in self.terms.items()
        }

    def is_constant(self) -> bool:
        return not self.terms or (len(self.terms) == 1 and 0 in self.terms)

    @property
    def constant_term(self) -> Fraction:
        return self.terms.get(0, Fraction(0))

    def rational_value(self) -> Fraction:
        if not self.is_constant():
            raise ValueError(f"not a constant polynomial: {self.render()}")
        return self.constant_term

    def degree(self) -> int:
        if not self.terms:
            return 0
        d = self.universe.term_degree
        return max(d(k) for k in self.terms)

    def degree_in(self, sym) -> int:
        p = self.universe.position(sym)
        shift = p * self.universe.BITS
        mask = self.universe._MASK
        best = 0
        for k in self.terms:
            e = (k >> shift) & mask
            if e > best:
                best = e
        return best

    def symbols_used(self):
        used = set()
        for k in self.terms:
            for s, e in zip(self.universe.symbols, self.universe.unpack(k)):
                if e:
                    used.add(s)
        return used

    def coefficient_of(self, exponents: Mapping) -> Fraction:
        """Exact coefficient of the monomial with the given exponents."""
        key = 0
        for s, e in exponents.items():
            key += self.universe.pack_symbol(s, e)
        return self.terms.get(key, Fraction(0))

    # -- substitution ----------------------------------------------------

    def substitute(self, images: Mapping) -> "CoefPoly":
        """Simultaneous substitution symbol -> polynomial or rational.

        Image polynomials must live in this polynomial's universe.  Symbols
        absent from the universe or unused are ignored.
        """
        if not self.terms or not images:
            return self
        uni = self.universe
        bits, mask = uni.BITS, uni._MASK
        sub = {}
        for s, img in images.items():
            s = _as_symbol(s)
            if s in uni._pos:
                sub[uni._pos[s]] = img
        if not sub:
            return self
        acc: dict = {}
        pow_cache: dict = {}
        for key, coef in self.terms.items():
            rest = key
            factor = None
            for p, img in sub.items():
                e = (key >> (p * bits)) & mask
                if not e:
                    continue
                rest -= e << (p * bits)
                pk = pow_cache.get((p, e))
                if pk is None:
                    if isinstance(img, CoefPoly):
                        pk = img.reembed(uni) ** e
                    else:
                        pk = Fraction(img) ** e
                    pow_cache[(p, e)] = pk
                factor = pk if factor is None else factor * pk
            if factor is None:
                _add_term(acc, rest, coef)
            elif isinstance(factor, Fraction):
                _add_term(acc, rest, coef * factor)
            else:
                for fk, fv in factor.terms.items():
                    _add_term(acc, fk + rest, fv * coef)
        return CoefPoly._raw(uni, acc)

    def specialize(self, assignment: Mapping) -> Fraction:
        """Evaluate exactly, assigning a rational to every used symbol."""
        vals = {}
        for s, v in assignment.items():
            s = _as_symbol(s)
            if s in self.universe._pos:
                vals[self.universe._pos[s]] = Fraction(v)
        total = Fraction(0)
        for key, coef in self.terms.items():
            term = coef
            for p, e in enumerate(self.universe.unpack(key)):
                if not e:
                    continue
                if p not in vals:
                    raise ValueError(f"no value for symbol {self.universe.symbols[p]}")
                term = term * vals[p] ** e
            total += term
        return total

    def reembed(self, universe: SymbolUniverse) -> "CoefPoly":
        """Rebuild this polynomial over another universe (by symbol name)."""
        if universe is self.universe or universe == self.universe:
            return self
        out = {}
        for key, coef in self.terms.items():
            nk = 0
            for s, e in zip(self.universe.symbols, self.universe.unpack(key)):
                if e:
                    nk += universe.pack_symbol(s, e)
            _add_term(out, nk, coef)
        return CoefPoly._raw(universe, out)

    # -- exact division ---------------------------------------------------

    def _leading_key(self):
        uni = self.universe
        return max(self.terms, key=lambda k: (uni.term_degree(k), uni.unpack(k)))

    def divide_exact(self, divisor) -> "CoefPoly":
        """Exact polynomial division; raises NotDivisible on any remainder."""
        if isinstance(divisor, (int, Fraction)):
            return self / divisor
        d = self._coerce(divisor)
        if d is None:
            raise TypeError("cannot divide by %r" % (divisor,))
        if not d.terms:
            raise ZeroDivisionError("division of polynomial by zero")
        if d.is_constant():
            return self / d.constant_term
        uni = self.universe
        d_key = d._leading_key()
        d_coef = d.terms[d_key]
        d_exps = uni.unpack(d_key)
        rem = dict(self.terms)
        quo: dict = {}
        while rem:
            lead = max(rem, key=lambda k: (uni.term_degree(k), uni.unpack(k)))
            exps = uni.unpack(lead)
            if any(e < de for e, de in zip(exps, d_exps)):
                raise NotDivisible("division leaves a nonzero remainder")
            qk = lead - d_key
            qc = rem[lead] / d_coef
            quo[qk] = qc
            for k2, v2 in d.terms.items():
                _add_term(rem, qk + k2, -qc * v2)
        return CoefPoly._raw(uni, quo)

    # -- rendering ---------------------------------------------------------

    def sorted_terms(self):
        """Terms in canonical order: by total degree, then descending lex."""
        uni = self.universe
        items = [(uni.unpack(k), v) for k, v in self.terms.items()]
        items.sort(key=lambda t: (sum(t[0]), tuple(-e for e in t[0])))
        return items

    def render(self) -> str:
        if not self.terms:
            return "0"
        syms = self.universe.symbols
        parts = []
        for exps, coef in self.sorted_terms():
            mono = "*".join(
                str(s) if e == 1 else f"{s}^{e}" for s, e in zip(syms, exps) if e
            )
            mag = abs(coef)
            if mono:
                body = mono if mag == 1 else f"{render_rational(mag)}*{mono}"
            else:
                body = render_rational(mag)
            if not parts:
                parts.append(f"-{body}" if coef < 0 else body)
            else:
                parts.append(f"- {body}" if coef < 0 else f"+ {body}")
        return " ".join(parts)

    __str__ = render

    def __repr__(self):
        return f"CoefPoly({self.render()})"


def _add_term(acc: dict, key: int, val: Fraction):
    cur = acc.get(key)
    if cur is None:
        if val:
            acc[key] = val
    else:
        cur = cur + val
        if cur:
            acc[key] = cur
        else:
            del acc[key]


def poly_arith(op: str, p: CoefPoly, q=None) -> CoefPoly:
    """Ring operations by name: add, sub, mul, neg, scale."""
    if op == "neg":
        return -p
    if q is None:
        raise ValueError(f"operation {op!r} needs a second operand")
    if op == "add":
        return p + q
    if op == "sub":
        return p - q
    if op == "mul":
        return p * q
    if op == "scale":
        return p * Fraction(q)
    raise ValueError(f"unknown operation {op!r}")


def substitute(p: CoefPoly, images: Mapping) -> CoefPoly:
    return p.substitute(images)


# -- exact linear algebra ---------------------------------------------------


def _ring_div(num, den):
    if isinstance(num, CoefPoly):
        return num.divide_exact(den)
    if isinstance(den, CoefPoly):
        den = den.rational_value()
    return Fraction(num) / Fraction(den)


def det_bareiss(rows):
    """Exact determinant of a square matrix over Fraction or CoefPoly."""
    a = [list(r) for r in rows]
    n = len(a)
    if n == 0 or any(len(r) != n for r in a):
        raise ValueError("need a non-empty square matrix")
    sign = 1
    prev = None
    for k in range(n - 1):
        if not a[k][k]:
            piv = next((i for i in range(k + 1, n) if a[i][k]), None)
            if piv is None:
                return a[0][0] * 0
            a[k], a[piv] = a[piv], a[k]
            sign = -sign
        pk = a[k][k]
        for i in range(k + 1, n):
            aik = a[i][k]
            row = a[i]
            top = a[k]
            for j in range(k + 1, n):
                num = row[j] * pk - aik * top[j]
                row[j] = num if prev is None else _ring_div(num, prev)
            row[k] = pk * 0
        prev = pk
    d = a[n - 1][n - 1]
    return d if sign == 1 else -d


def solve_linear(matrix, rhs):
    """Solve M x = rhs exactly over the fraction field of the entry ring.

    Requires full column rank; the matrix may have extra (dependent) rows.
    Returns one (numerator, denominator) pair per unknown, the denominator
    being the pivot-row determinant.  Raises Inconsistent for an
    unsatisfiable system and RankDeficient when unknowns remain free.
    """
    m = len(matrix)
    if m == 0:
        raise ValueError("empty system")
    n = len(matrix[0])
    if any(len(r) != n for r in matrix) or len(rhs) != m:
        raise ValueError("ragged system")
    uni = None
    for row in list(matrix) + [rhs]:
        for x in row:
            if isinstance(x, CoefPoly):
                uni = x.universe
                break
        if uni:
            break

    def lift(x):
        if uni is None or isinstance(x, CoefPoly):
            return x
        return CoefPoly.const(uni, x)

    mat = [[lift(x) for x in row] for row in matrix]
    vec = [lift(x) for x in rhs]

    # fraction-free echelon pass for rank and consistency classification
    aug = [list(row) + [vec[i]] for i, row in enumerate(mat)]
    orig = list(range(m))
    r = 0
    prev = None
    pivot_rows = []
    for c in range(n):
        piv = next((i for i in range(r, m) if aug[i][c]), None)
        if piv is None:
            continue
        if piv != r:
            aug[r], aug[piv] = aug[piv], aug[r]
            orig[r], orig[piv] = orig[piv], orig[r]
        pv = aug[r][c]
        for i in range(r + 1, m):
            f = aug[i][c]
            for j in range(c + 1, n + 1):
                num = aug[i][j] * pv - f * aug[r][j]
                aug[i][j] = num if prev is None else _ring_div(num, prev)
            aug[i][c] = pv * 0
        prev = pv
        pivot_rows.append(orig[r])
        r += 1
    for i in range(r, m):
        if aug[i][n]:
            raise Inconsistent("zero row with nonzero right-hand side")
    if r < n:
        raise RankDeficient(f"matrix rank {r} below {n} unknowns")

    rows = [mat[i] for i in pivot_rows]
    rvec = [vec[i] for i in pivot_rows]
    den = det_bareiss(rows)
    nums = []
    for j in range(n):
        mod = [row[:j] + [rv] + row[j + 1:] for row, rv in zip(rows, rvec)]
        nums.append(det_bareiss(mod))
    # every equation, including dependent rows, must be satisfied exactly
    for i in range(m):
        resid = vec[i] * den
        for j in range(n):
            resid = resid - mat[i][j] * nums[j]
        if resid:
            raise Inconsistent(f"equation {i} is not satisfied by the solution")
    return [(nums[j], den) for j in range(n)]


def matrix_rank(rows) -> int:
    """Exact rank of a matrix with rational (or constant CoefPoly) entries."""
    a = []
    for row in rows:
        out = []
        for x in row:
            if isinstance(x, CoefPoly):
                x = x.rational_value()
            out.append(Fraction(x))
        a.append(out)
    if not a:
        return 0
    m, n = len(a), len(a[0])
    rank = 0
    for c in range(n):
        piv = next((i for i in range(rank, m) if a[i][c]), None)
        if piv is None:
            continue
        a[rank], a[piv] = a[piv], a[rank]
        pv = a[rank][c]
        for i in range(rank + 1, m):
            if a[i][c]:
                f = a[i][c] / pv
                a[i] = [x - f * y for x, y in zip(a[i], a[rank])]
        rank += 1
        if rank == m:
            break
    return rank


def rational_kernel(rows):
    """Basis of the right null space of a matrix with rational entries."""
    a = [[Fraction(x) for x in row] for row in rows]
    if not a:
        return []
    m, n = len(a), len(a[0])
    # reduced row echelon form
    pivots = []
    r = 0
    for c in range(n):
        piv = next((i for i in range(r, m) if a[i][c]), None)
        if piv is None:
            continue
        a[r], a[piv] = a[piv], a[r]
        pv = a[r][c]
        a[r] = [x / pv for x in a[r]]
        for i in range(m):
            if i != r and a[i][c]:
                f = a[i][c]
                a[i] = [x - f * y for x, y in zip(a[i], a[r])]
        pivots.append(c)
        r += 1
        if r == m:
            break
    free = [c for c in range(n) if c not in pivots]
    basis = []
    for fc in free:
        v = [Fraction(0)] * n
        v[fc] = Fraction(1)
        for i, pc in enumerate(pivots):
            v[pc] = -a[i][fc]
        basis.append(v)
    return basis
