"""Truncated power series (jets) in one and two formal variables.

Coefficients live in any exact commutative ring that mixes with ``Fraction``;
in practice that means ``Fraction`` itself or ``CoefPoly``.  Univariate jets
truncate at a fixed power, bivariate jets at a fixed total degree.  All
values are immutable and every operation truncates to the common order.
"""

from __future__ import annotations

from fractions import Fraction

from .exactalg import CoefPoly, NotDivisible, TriwebError

_ZERO = Fraction(0)
_ONE = Fraction(1)


class JetError(TriwebError):
    pass


class VariableMismatch(JetError):
    pass


class NonzeroConstantTerm(JetError):
    pass


class NonUnitLinearTerm(JetError):
    pass


class NonUnitConstantTerm(JetError):
    pass


def _unit_rational(c):
    """Nonzero rational value of a coefficient, or None."""
    if isinstance(c, CoefPoly):
        if not c.is_constant():
            return None
        c = c.constant_term
    if isinstance(c, int):
        c = Fraction(c)
    return c if c else None


_COEF_TYPES = (int, Fraction, CoefPoly)


def _fmt_term(coef, mono: str) -> str:
    if isinstance(coef, CoefPoly):
        if coef.is_constant():
            coef = coef.constant_term
        else:
            body = coef.render()
            return f"({body})*{mono}" if mono else f"({body})"
    coef = Fraction(coef)
    text = str(coef.numerator) if coef.denominator == 1 else f"{coef.numerator}/{coef.denominator}"
    if not mono:
        return text
    if coef == 1:
        return mono
    if coef == -1:
        return f"-{mono}"
    return f"{text}*{mono}"


def _join_terms(parts):
    if not parts:
        return "0"
    out = parts[0]
    for p in parts[1:]:
        out += f" - {p[1:]}" if p.startswith("-") else f" + {p}"
    return out


class UniJet:
    """One-variable jet: the coefficients c0..cN of a series cut at t^N."""

    __slots__ = ("var", "order", "coeffs")

    def __init__(self, var: str, order: int, coeffs=()):
        if order < 0:
            raise ValueError("jet order must be non-negative")
        cs = list(coeffs)[: order + 1]
        cs += [_ZERO] * (order + 1 - len(cs))
        self.var = str(var)
        self.order = order
        self.coeffs = tuple(cs)

    @classmethod
    def zero(cls, var, order):
        return cls(var, order)

    @classmethod
    def constant(cls, var, order, value):
        return cls(var, order, [value])

    @classmethod
    def identity(cls, var, order):
        return cls(var, order, [_ZERO, _ONE])

    @property
    def constant_term(self):
        return self.coeffs[0]

    def coefficient(self, n: int):
        return self.coeffs[n] if 0 <= n <= self.order else _ZERO

    def truncate(self, order: int) -> "UniJet":
        if order == self.order:
            return self
        return UniJet(self.var, order, self.coeffs)

    def derivative(self) -> "UniJet":
        if self.order == 0:
            return UniJet(self.var, 0)
        return UniJet(self.var, self.order - 1,
                      [n * c for n, c in enumerate(self.coeffs)][1:])

    def dilate(self, factor) -> "UniJet":
        """Substitute t -> factor * t for a scalar factor."""
        out, f = [], _ONE
        for c in self.coeffs:
            out.append(c * f)
            f = f * factor
        return UniJet(self.var, self.order, out)

    def __eq__(self, other):
        if not isinstance(other, UniJet):
            return NotImplemented
        return (self.var == other.var and self.order == other.order
                and all(a == b for a, b in zip(self.coeffs, other.coeffs)))

    __hash__ = None

    def __add__(self, other):
        if isinstance(other, UniJet):
            if other.var != self.var:
                raise VariableMismatch(f"{self.var} vs {other.var}")
            n = min(self.order, other.order)
            return UniJet(self.var, n,
                          [a + b for a, b in zip(self.coeffs, other.coeffs)])
        if isinstance(other, _COEF_TYPES):
            cs = list(self.coeffs)
            cs[0] = cs[0] + other
            return UniJet(self.var, self.order, cs)
        return NotImplemented

    __radd__ = __add__

    def __neg__(self):
        return UniJet(self.var, self.order, [-c for c in self.coeffs])

    def __sub__(self, other):
        if isinstance(other, (UniJet,) + _COEF_TYPES):
            return self + (-other if isinstance(other, UniJet) else other * -1)
        return NotImplemented

    def __rsub__(self, other):
        if isinstance(other, _COEF_TYPES):
            return (-self) + other
        return NotImplemented

    def __mul__(self, other):
        if isinstance(other, UniJet):
            if other.var != self.var:
                raise VariableMismatch(f"{self.var} vs {other.var}")
            n = min(self.order, other.order)
            out = [_ZERO] * (n + 1)
            for i, c1 in enumerate(self.coeffs[: n + 1]):
                if not c1:
                    continue
                for j in range(n - i + 1):
                    c2 = other.coeffs[j]
                    if c2:
                        out[i + j] = out[i + j] + c1 * c2
            return UniJet(self.var, n, out)
        if isinstance(other, _COEF_TYPES):
            return UniJet(self.var, self.order, [c * other for c in self.coeffs])
        return NotImplemented

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        u = _unit_rational(scalar)
        if u is None:
            raise ZeroDivisionError("jet division needs a nonzero rational")
        return self * (_ONE / u)

    def render(self) -> str:
        parts = []
        for n, c in enumerate(self.coeffs):
            if not c:
                continue
            mono = "" if n == 0 else (self.var if n == 1 else f"{self.var}^{n}")
            parts.append(_fmt_term(c, mono))
        return _join_terms(parts)

    __str__ = render

    def __repr__(self):
        return f"UniJet[{self.var}; {self.order}]({self.render()})"


class BiJet:
    """Two-variable jet truncated by total degree.

    ``coeffs`` maps (i, j) with i + j <= order to nonzero coefficients of
    x^i y^j, where x is the first variable.
    """

    __slots__ = ("vars", "order", "coeffs")

    def __init__(self, variables, order: int, coeffs=None):
        if order < 0:
            raise ValueError("jet order must be non-negative")
        self.vars = (str(variables[0]), str(variables[1]))
        self.order = order
        clean = {}
        if coeffs:
            for (i, j), c in coeffs.items():
                if i < 0 or j < 0:
                    raise ValueError("negative exponent")
                if i + j <= order and c:
                    clean[(i, j)] = c
        self.coeffs = clean

    @classmethod
    def _raw(cls, variables, order, coeffs) -> "BiJet":
        f = object.__new__(cls)
        f.vars = variables
        f.order = order
        f.coeffs = coeffs
        return f

    @classmethod
    def zero(cls, variables, order):
        return cls(variables, order)

    @classmethod
    def constant(cls, variables, order, value):
        return cls(variables, order, {(0, 0): value})

    @classmethod
    def coordinate(cls, variables, order, axis: int):
        key = (1, 0) if axis == 0 else (0, 1)
        return cls(variables, order, {key: _ONE})

    @property
    def constant_term(self):
        return self.coeffs.get((0, 0), _ZERO)

    def coefficient(self, i: int, j: int):
        return self.coeffs.get((i, j), _ZERO)

    def truncate(self, order: int) -> "BiJet":
        if order >= self.order:
            return BiJet._raw(self.vars, order, dict(self.coeffs)) if order > self.order else self
        return BiJet._raw(self.vars, order,
                          {k: c for k, c in self.coeffs.items() if k[0] + k[1] <= order})

    def partial(self, which) -> "BiJet":
        """Formal partial derivative; the order drops by one."""
        axis = {0: 0, 1: 1, "first": 0, "second": 1}.get(which)
        if axis is None:
            raise ValueError(f"unknown variable selector {which!r}")
        if self.order == 0:
            return BiJet.zero(self.vars, 0)
        out = {}
        for (i, j), c in self.coeffs.items():
            if axis == 0 and i:
                out[(i - 1, j)] = c * i
            elif axis == 1 and j:
                out[(i, j - 1)] = c * j
        return BiJet._raw(self.vars, self.order - 1, out)

    def axis_jet(self, axis: int) -> "UniJet":
        """Restriction to one axis, as a jet in that variable."""
        cs = [_ZERO] * (self.order + 1)
        for (i, j), c in self.coeffs.items():
            if axis == 0 and j == 0:
                cs[i] = c
            elif axis == 1 and i == 0:
                cs[j] = c
        return UniJet(self.vars[axis], self.order, cs)

    def map_coeffs(self, fn) -> "BiJet":
        out = {}
        for k, c in self.coeffs.items():
            v = fn(c)
            if v:
                out[k] = v
        return BiJet._raw(self.vars, self.order, out)

    def __eq__(self, other):
        if not isinstance(other, BiJet):
            return NotImplemented
        if self.vars != other.vars or self.order != other.order:
            return False
        if set(self.coeffs) != set(other.coeffs):
            return False
        return all(other.coeffs[k] == c for k, c in self.coeffs.items())

    __hash__ = None

    def __add__(self, other):
        if isinstance(other, BiJet):
            if other.vars != self.vars:
                raise VariableMismatch(f"{self.vars} vs {other.vars}")
            n = min(self.order, other.order)
            out = {k: c for k, c in self.coeffs.items() if k[0] + k[1] <= n}
            for k, c in other.coeffs.items():
                if k[0] + k[1] > n:
                    continue
                acc = out.get(k)
                if acc is None:
                    out[k] = c
                else:
                    acc = acc + c
                    if acc:
                        out[k] = acc
                    else:
                        del out[k]
            return BiJet._raw(self.vars, n, out)
        if isinstance(other, _COEF_TYPES):
            out = dict(self.coeffs)
            acc = out.get((0, 0), _ZERO) + other
            if acc:
                out[(0, 0)] = acc
            else:
                out.pop((0, 0), None)
            return BiJet._raw(self.vars, self.order, out)
        return NotImplemented

    __radd__ = __add__

    def __neg__(self):
        return BiJet._raw(self.vars, self.order, {k: -c for k, c in self.coeffs.items()})

    def __sub__(self, other):
        if isinstance(other, BiJet):
            return self + (-other)
        if isinstance(other, _COEF_TYPES):
            return self + (other * -1)
        return NotImplemented

    def __rsub__(self, other):
        if isinstance(other, _COEF_TYPES):
            return (-self) + other
        return NotImplemented

    def __mul__(self, other):
        if isinstance(other, BiJet):
            if other.vars != self.vars:
                raise VariableMismatch(f"{self.vars} vs {other.vars}")
            n = min(self.order, other.order)
            out = {}
            for (i1, j1), c1 in self.coeffs.items():
                d1 = i1 + j1
                if d1 > n:
                    continue
                rem = n - d1
                for (i2, j2), c2 in other.coeffs.items():
                    if i2 + j2 > rem:
                        continue
                    k = (i1 + i2, j1 + j2)
                    v = c1 * c2
                    acc = out.get(k)
                    if acc is None:
                        out[k] = v
                    else:
                        acc = acc + v
                        if acc:
                            out[k] = acc
                        else:
                            del out[k]
            return BiJet._raw(self.vars, n, out)
        if isinstance(other, _COEF_TYPES):
            if not other:
                return BiJet.zero(self.vars, self.order)
            out = {}
            for k, c in self.coeffs.items():
                v = c * other
                if v:
                    out[k] = v
            return BiJet._raw(self.vars, self.order, out)
        return NotImplemented

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        u = _unit_rational(scalar)
        if u is None:
            raise ZeroDivisionError("jet division needs a nonzero rational")
        return self * (_ONE / u)

    def render(self) -> str:
        x, y = self.vars
        keys = sorted(self.coeffs, key=lambda k: (k[0] + k[1], -k[0]))
        parts = []
        for i, j in keys:
            factors = []
            if i:
                factors.append(x if i == 1 else f"{x}^{i}")
            if j:
                factors.append(y if j == 1 else f"{y}^{j}")
            parts.append(_fmt_term(self.coeffs[(i, j)], "*".join(factors)))
        return _join_terms(parts)

    __str__ = render

    def __repr__(self):
        return f"BiJet[{self.vars[0]},{self.vars[1]}; {self.order}]({self.render()})"


def jet_mul(f, g):
    """Truncated Cauchy product of two jets of the same kind."""
    if isinstance(f, UniJet) and isinstance(g, UniJet):
        return f * g
    if isinstance(f, BiJet) and isinstance(g, BiJet):
        return f * g
    raise TypeError("jet_mul needs two jets of the same kind")


def compose_uni(f: UniJet, g: UniJet) -> UniJet:
    """Taylor coefficients of f(g(t)); g must vanish at the origin."""
    if g.constant_term:
        raise NonzeroConstantTerm("inner jet must vanish at the origin")
    n = min(f.order, g.order)
    gn = g.truncate(n)
    res = UniJet.zero(gn.var, n)
    for c in reversed(f.coeffs[: n + 1]):
        res = res * gn + c
    return res


def reverse(f: UniJet) -> UniJet:
    """Compositional inverse jet, by order-by-order coefficient recurrence."""
    if f.constant_term:
        raise NonzeroConstantTerm("only jets vanishing at the origin invert")
    lin = _unit_rational(f.coefficient(1))
    if lin is None:
        raise NonUnitLinearTerm("linear coefficient must be a nonzero rational")
    inv = _ONE / lin
    cs = [_ZERO, inv]
    for n in range(2, f.order + 1):
        g = UniJet(f.var, n, cs)
        h = compose_uni(f.truncate(n), g)
        cs.append(-h.coefficient(n) * inv)
    return UniJet(f.var, f.order, cs)


def compose_bi(f: UniJet, g: BiJet) -> BiJet:
    """f(g(x, y)) for a univariate outer jet; g must vanish at the origin."""
    if g.constant_term:
        raise NonzeroConstantTerm("inner jet must vanish at the origin")
    n = min(f.order, g.order)
    gn = g.truncate(n)
    res = BiJet.zero(gn.vars, n)
    for c in reversed(f.coeffs[: n + 1]):
        res = res * gn + c
    return res


def subst_bi(F: BiJet, X: UniJet, Y: UniJet) -> BiJet:
    """F(X(x), Y(y)); both inner jets must vanish at the origin."""
    if X.constant_term or Y.constant_term:
        raise NonzeroConstantTerm("inner jets must vanish at the origin")
    n = min(F.order, X.order, Y.order)
    xpow = {0: UniJet.constant(X.var, n, _ONE), 1: X.truncate(n)}
    ypow = {0: UniJet.constant(Y.var, n, _ONE), 1: Y.truncate(n)}

    def power(cache, base, k):
        top = max(cache)
        while top < k:
            cache[top + 1] = cache[top] * cache[1]
            top += 1
        return cache[k]

    out = {}
    for (i, j), c in F.coeffs.items():
        if i + j > n:
            continue
        xi = power(xpow, X, i).coeffs
        yj = power(ypow, Y, j).coeffs
        for s in range(i, n - j + 1):
            cx = xi[s]
            if not cx:
                continue
            cxc = c * cx
            if not cxc:
                continue
            for t in range(j, n - s + 1):
                cy = yj[t]
                if not cy:
                    continue
                v = cxc * cy
                k = (s, t)
                acc = out.get(k)
                if acc is None:
                    out[k] = v
                else:
                    acc = acc + v
                    if acc:
                        out[k] = acc
                    else:
                        del out[k]
    return BiJet._raw(F.vars, n, out)


def eval_diag(G: BiJet, var: str = "t") -> UniJet:
    """Restriction to the diagonal: the jet of t -> G(t, t)."""
    cs = [_ZERO] * (G.order + 1)
    for (i, j), c in G.coeffs.items():
        cs[i + j] = cs[i + j] + c
    return UniJet(var, G.order, cs)


def div_exact_skew(H: BiJet) -> BiJet:
    """Exact quotient (H - x - y) / (x y (x - y)), three orders lower.

    Divides by x, then by y, then by (x - y) via a coefficient recurrence,
    checking an exact divisibility certificate at every stage.
    """
    n = H.order
    if n < 3:
        raise ValueError("need at least a 3-jet")
    work = dict(H.coeffs)
    for key in ((1, 0), (0, 1)):
        acc = work.get(key, _ZERO) - _ONE
        if acc:
            work[key] = acc
        else:
            work.pop(key, None)
    for (i, j), c in work.items():
        if i == 0:
            raise NotDivisible(f"term of bidegree (0, {j}) blocks division by {H.vars[0]}")
    work = {(i - 1, j): c for (i, j), c in work.items()}
    for (i, j), c in work.items():
        if j == 0:
            raise NotDivisible(f"term of bidegree ({i + 1}, 0) blocks division by {H.vars[1]}")
    work = {(i, j - 1): c for (i, j), c in work.items()}
    # divide by (x - y), one antidiagonal at a time
    if work.get((0, 0)):
        raise NotDivisible("constant term blocks division by the diagonal factor")
    quo = {}
    for m in range(1, n - 1):
        prev = _ZERO
        for i in range(m, 0, -1):
            val = work.get((i, m - i), _ZERO) + prev
            if val:
                quo[(i - 1, m - i)] = val
            prev = val
        if work.get((0, m), _ZERO) + prev != 0:
            raise NotDivisible("remainder after division by the diagonal factor")
    return BiJet._raw(H.vars, n - 3, quo)


def reciprocal(F: BiJet) -> BiJet:
    """Multiplicative inverse jet of F; F(0,0) must be a nonzero rational."""
    c0 = _unit_rational(F.constant_term)
    if c0 is None:
        raise NonUnitConstantTerm("constant term must be a nonzero rational")
    w = F * (_ONE / c0) - 1
    acc = BiJet.constant(F.vars, F.order, _ONE)
    powk = acc
    for k in range(1, F.order + 1):
        powk = powk * w
        if not powk.coeffs:
            break
        acc = acc + (powk if k % 2 == 0 else -powk)
    return acc * (_ONE / c0)


def log_unit(F: BiJet) -> BiJet:
    """Jet logarithm of F with F(0,0) = 1, via the alternating series."""
    if F.constant_term != 1:
        raise NonUnitConstantTerm("jet logarithm needs constant term exactly 1")
    w = F - 1
    acc = BiJet.zero(F.vars, F.order)
    powk = BiJet.constant(F.vars, F.order, _ONE)
    for k in range(1, F.order + 1):
        powk = powk * w
        if not powk.coeffs:
            break
        acc = acc + powk * Fraction((-1) ** (k + 1), k)
    return acc
