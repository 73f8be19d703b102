"""Normalization of a web function jet to its canonical presentation.

Starting from the (k+3)-jet F of the implicit web function, six steps bring
it to the shape x + y + x y (x - y) (mu + E(x, y)) with E(0, 0) = 0:

  1. invert t -> F(t, 0)                          (X)
  2. invert t -> F(0, t)                          (Y)
  3. G = F(X(x), Y(y)); now G(x,0) = x, G(0,y) = y
  4. linearize the diagonal K = G(t, t) to t -> 2t (U)
  5. H = V(G(U(x), U(y))) with V the inverse of U
  6. L = (H - x - y) / (x y (x - y)), three orders lower

The output jet is E = L - mu with mu the constant term of L.  For a web
given by its coefficient data, mu must come out equal to a2 + b2 + c2; a
mismatch is a hard error, never patched silently.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .exactalg import TriwebError
from .jets import (
    BiJet,
    UniJet,
    compose_bi,
    compose_uni,
    div_exact_skew,
    eval_diag,
    reverse,
    subst_bi,
)
from .webcore import LinearWeb3, OrderTooHigh, fw_jet

_ONE = Fraction(1)


class NormalFormError(TriwebError):
    pass


class BadLinearPart(NormalFormError):
    pass


class MuMismatch(NormalFormError):
    pass


@dataclass
class NormalFormResult:
    """Normal-form coefficient jet plus all intermediates, for audit."""

    mu: object
    E: BiJet
    X: UniJet
    Y: UniJet
    G: BiJet
    U: UniJet
    V: UniJet
    H: BiJet
    L: BiJet
    flat: bool = field(default=False)


def sternberg_linearize(K: UniJet) -> UniJet:
    """The unique U = t + u2 t^2 + ... conjugating K to its linear part.

    K must be 2t + O(t^2) with linear coefficient exactly 2; then
    K(U(t)) = U(2t) determines each u_n by division by 2^n - 2.
    """
    if K.constant_term:
        raise BadLinearPart("diagonal jet must vanish at the origin")
    if K.coefficient(1) != 2:
        raise BadLinearPart("diagonal jet must have linear coefficient 2")
    n_max = K.order
    cs = [Fraction(0), _ONE]
    for n in range(2, n_max + 1):
        guess = UniJet(K.var, n, cs)
        resid = compose_uni(K.truncate(n), guess) - guess.dilate(2)
        cs.append(resid.coefficient(n) / Fraction(2 ** n - 2))
    U = UniJet(K.var, n_max, cs)
    assert compose_uni(K, U) == U.dilate(2), "linearization residual is nonzero"
    return U


def normalize(F: BiJet) -> NormalFormResult:
    """Run the six normalization steps on a (k+3)-jet; returns the k-jet E."""
    if F.order < 3:
        raise ValueError("normalization needs at least a 3-jet")
    if F.constant_term:
        raise ValueError("web function jet must vanish at the origin")
    X = reverse(F.axis_jet(0))
    Y = reverse(F.axis_jet(1))
    G = subst_bi(F, X, Y)
    assert G.axis_jet(0) == UniJet.identity(G.vars[0], G.order), "axis not fixed"
    assert G.axis_jet(1) == UniJet.identity(G.vars[1], G.order), "axis not fixed"
    K = eval_diag(G)
    U = sternberg_linearize(K)
    V = reverse(U)
    H = compose_bi(V, subst_bi(G, U, U))
    L = div_exact_skew(H)
    mu = L.constant_term
    E = L - mu
    return NormalFormResult(mu=mu, E=E, X=X, Y=Y, G=G, U=U, V=V, H=H, L=L,
                            flat=(mu == 0))


def normal_form_of_web(web: LinearWeb3, k: int) -> NormalFormResult:
    """Normal-form jet of a web from its coefficient data.

    Needs coefficients up to order k + 2.  Cross-checks that the constant
    term of L equals a2 + b2 + c2 exactly; raises MuMismatch otherwise.
    Flat webs (a2 + b2 + c2 = 0) are flagged, not rejected: the pipeline is
    still well defined, only uniqueness of the presentation needs mu != 0.
    """
    if k < 0:
        raise ValueError("jet order k must be non-negative")
    if k + 2 > web.order:
        raise OrderTooHigh(f"k={k} needs web coefficients up to {k + 2}")
    result = normalize(fw_jet(web, k + 3))
    expected = web.mu()
    if result.mu != expected:
        raise MuMismatch(
            f"constant term of L is {result.mu} but a2+b2+c2 is {expected}"
        )
    result.flat = (expected == 0)
    return result
