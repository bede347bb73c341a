"""Groebner bases over the rationals with cofactor tracking, and the
finite-dimensional quotient data of a gradient ideal.

Cofactor tracking means every basis element g_k carries an exact
representation g_k = sum_i c_{k,i} * f_i in terms of the original
generators f_i.  Normal forms therefore come with certified quotients:
``g = normal_form(g) + sum_i a_i f_i`` with the a_i returned to the
caller.  Downstream code needs those quotients, not just membership.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction

from .poly import Monomial, Polynomial, PolyError, WeightSystem, hessian_det, infer_weights

# -- monomial orders ---------------------------------------------------------


def order_key(order: str):
    """Return key(m) so that larger key = larger monomial."""
    if order == "lex":
        return lambda m: m
    if order == "grlex":
        return lambda m: (sum(m), m)
    if order == "grevlex":
        return lambda m: (sum(m), tuple(-e for e in reversed(m)))
    raise ValueError(f"unknown monomial order {order!r}")


def leading_term(p: Polynomial, key) -> tuple[Monomial, Fraction]:
    if p.is_zero():
        raise ValueError("zero polynomial has no leading term")
    m = max(p.coeffs, key=key)
    return m, p.coeffs[m]


def _divides(a: Monomial, b: Monomial) -> bool:
    return all(x <= y for x, y in zip(a, b))


def _quot(a: Monomial, b: Monomial) -> Monomial:
    return tuple(x - y for x, y in zip(a, b))


def _lcm(a: Monomial, b: Monomial) -> Monomial:
    return tuple(max(x, y) for x, y in zip(a, b))


def divide(g: Polynomial, divisors: list[Polynomial], order: str = "grevlex"
           ) -> tuple[list[Polynomial], Polynomial]:
    """Multivariate division: g = sum_k q_k * divisors[k] + r.

    No monomial of r is divisible by any leading monomial of the divisors.
    """
    key = order_key(order)
    names, mode = g.names, g.mode
    lts = [leading_term(d, key) for d in divisors]
    quots = [Polynomial.zero(names, mode) for _ in divisors]
    rem: dict[Monomial, Fraction] = {}
    work = dict(g.coeffs)
    while work:
        m = max(work, key=key)
        c = work[m]
        if c == 0:
            del work[m]
            continue
        for k, (lm, lc) in enumerate(lts):
            if _divides(lm, m):
                t = _quot(m, lm)
                factor = c / lc
                quots[k] = quots[k] + Polynomial.monomial(t, factor, names, mode)
                for dm, dc in divisors[k].coeffs.items():
                    mm = tuple(x + y for x, y in zip(t, dm))
                    nv = work.get(mm, Fraction(0)) - factor * dc
                    if nv == 0:
                        work.pop(mm, None)
                    else:
                        work[mm] = nv
                break
        else:
            del work[m]
            rem[m] = rem.get(m, Fraction(0)) + c
    return quots, Polynomial(rem, names, mode)


# -- Buchberger with cofactors ------------------------------------------------


@dataclass
class GroebnerBasis:
    """A reduced Groebner basis of <generators> with exact cofactors.

    elements[k] == sum_i cofactors[k][i] * generators[i]
    """
    generators: list[Polynomial]
    elements: list[Polynomial]
    cofactors: list[list[Polynomial]]
    order: str = "grevlex"

    def normal_form(self, g: Polynomial) -> Polynomial:
        _, r = divide(g, self.elements, self.order)
        return r

    def normal_form_with_quotients(self, g: Polynomial
                                   ) -> tuple[Polynomial, list[Polynomial]]:
        """Return (r, a) with g = r + sum_i a_i * generators[i]."""
        qs, r = divide(g, self.elements, self.order)
        n = len(self.generators)
        names, mode = g.names, g.mode
        a = [Polynomial.zero(names, mode) for _ in range(n)]
        for k, q in enumerate(qs):
            if q.is_zero():
                continue
            for i in range(n):
                a[i] = a[i] + q * self.cofactors[k][i]
        return r, a

    def contains_one(self) -> bool:
        key = order_key(self.order)
        return any(leading_term(e, key)[0] == tuple(0 for _ in e.names)
                   for e in self.elements)

    def leading_monomials(self) -> list[Monomial]:
        key = order_key(self.order)
        return [leading_term(e, key)[0] for e in self.elements]


def groebner_basis(generators: list[Polynomial], order: str = "grevlex"
                   ) -> GroebnerBasis:
    """Buchberger's algorithm, then interreduction.  Exact over Fraction."""
    gens = list(generators)
    if not gens:
        raise ValueError("need at least one generator")
    names, mode = gens[0].names, gens[0].mode
    if mode != "poly":
        raise PolyError("Groebner bases require polynomial (non-Laurent) mode")
    key = order_key(order)

    basis: list[Polynomial] = []
    cofs: list[list[Polynomial]] = []

    def unit(i):
        return [Polynomial.constant(1 if j == i else 0, names, mode)
                for j in range(len(gens))]

    for i, g in enumerate(gens):
        if not g.is_zero():
            basis.append(g)
            cofs.append(unit(i))
    if not basis:
        raise ValueError("all generators are zero")

    pairs = [(i, j) for i in range(len(basis)) for j in range(i)]
    while pairs:
        i, j = pairs.pop()
        lmi, lci = leading_term(basis[i], key)
        lmj, lcj = leading_term(basis[j], key)
        lcm = _lcm(lmi, lmj)
        # first Buchberger criterion: coprime leading monomials
        if lcm == tuple(a + b for a, b in zip(lmi, lmj)):
            continue
        ti = Polynomial.monomial(_quot(lcm, lmi), Fraction(1) / lci, names, mode)
        tj = Polynomial.monomial(_quot(lcm, lmj), Fraction(1) / lcj, names, mode)
        s = ti * basis[i] - tj * basis[j]
        cof_s = [ti * a - tj * b for a, b in zip(cofs[i], cofs[j])]
        qs, r = divide(s, basis, order)
        if r.is_zero():
            continue
        for k, q in enumerate(qs):
            if not q.is_zero():
                cof_s = [a - q * b for a, b in zip(cof_s, cofs[k])]
        _, lc = leading_term(r, key)
        inv = Fraction(1) / lc
        basis.append(r * inv)
        cofs.append([a * inv for a in cof_s])
        new = len(basis) - 1
        pairs.extend((new, k) for k in range(new))

    # minimalize: keep only elements whose LM no kept LM divides
    lms = [leading_term(b, key)[0] for b in basis]
    by_lm = sorted(range(len(basis)), key=lambda k: key(lms[k]))
    keep: list[int] = []
    for k in by_lm:
        if not any(_divides(lms[t], lms[k]) for t in keep):
            keep.append(k)
    basis = [basis[k] for k in keep]
    cofs = [cofs[k] for k in keep]

    # full reduction of each element against the others
    reduced: list[Polynomial] = []
    reduced_cofs: list[list[Polynomial]] = []
    for k in range(len(basis)):
        others = basis[:k] + basis[k + 1:]
        other_cofs = cofs[:k] + cofs[k + 1:]
        qs, r = divide(basis[k], others, order)
        if r.is_zero():
            continue
        cof_r = list(cofs[k])
        for t, q in enumerate(qs):
            if not q.is_zero():
                cof_r = [a - q * b for a, b in zip(cof_r, other_cofs[t])]
        _, lc = leading_term(r, key)
        inv = Fraction(1) / lc
        reduced.append(r * inv)
        reduced_cofs.append([a * inv for a in cof_r])

    reduced_pairs = sorted(zip(reduced, reduced_cofs),
                           key=lambda rc: order_key(order)(leading_term(rc[0], key)[0]))
    reduced = [p for p, _ in reduced_pairs]
    reduced_cofs = [c for _, c in reduced_pairs]
    return GroebnerBasis(gens, reduced, reduced_cofs, order)


# -- Milnor ring data ---------------------------------------------------------


@dataclass
class MilnorRing:
    """Finite data of C[z]/(partial derivatives of f).

    mu is math.inf when the critical locus is positive-dimensional; then
    basis and socle are None.  mu == 0 means no critical points at all
    (the gradient ideal is the whole ring).
    """
    f: Polynomial
    gb: GroebnerBasis
    mu: float  # int in the finite case, math.inf otherwise
    basis: list[Monomial] | None
    weights: WeightSystem | None
    socle: Monomial | None = None
    hessian_socle_coeff: Fraction | None = None
    _index: dict[Monomial, int] = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if self.basis is not None:
            self._index = {m: k for k, m in enumerate(self.basis)}

    # vector-space coordinates ------------------------------------------------

    def coords(self, g: Polynomial) -> list[Fraction]:
        """Coordinates of [g] in the monomial basis (reduces first)."""
        if self.basis is None:
            raise ValueError("quotient is infinite-dimensional")
        r = self.gb.normal_form(g)
        vec = [Fraction(0)] * len(self.basis)
        for m, c in r.coeffs.items():
            if m not in self._index:
                raise AssertionError(f"normal form contains non-basis monomial {m}")
            vec[self._index[m]] = c
        return vec

    def normal_form(self, g: Polynomial) -> Polynomial:
        return self.gb.normal_form(g)

    def reduce_with_quotients(self, g: Polynomial) -> tuple[Polynomial, list[Polynomial]]:
        """g = r + sum_i a_i * d_i f with r in normal form; returns (r, a)."""
        return self.gb.normal_form_with_quotients(g)

    def multiplication_matrix(self, g: Polynomial) -> list[list[Fraction]]:
        """Matrix of multiplication by g in the monomial basis (columns act
        on basis elements)."""
        if self.basis is None:
            raise ValueError("quotient is infinite-dimensional")
        names, mode = self.f.names, self.f.mode
        cols = []
        for m in self.basis:
            col = self.coords(g * Polynomial.monomial(m, 1, names, mode))
            cols.append(col)
        # transpose: entry [i][j] = coefficient of basis[i] in g*basis[j]
        n = len(self.basis)
        return [[cols[j][i] for j in range(n)] for i in range(n)]

    def residue(self, g: Polynomial) -> Fraction:
        """Total Grothendieck residue of g dz / (d_1 f ... d_n f).

        Normalized by residue(hessian) = mu.  The functional kills every
        basis monomial except the socle, so it reads off the socle
        coefficient of the normal form.
        """
        if self.socle is None or self.hessian_socle_coeff in (None, 0):
            raise ValueError("residue needs a one-dimensional socle "
                             "(finite mu and graded top degree)")
        r = self.gb.normal_form(g)
        c = r.coeffs.get(self.socle, Fraction(0))
        return c * Fraction(self.mu) / self.hessian_socle_coeff


def _standard_monomials(lead_monos: list[Monomial], nvars: int) -> list[Monomial] | None:
    """All monomials outside <lead_monos>, or None if infinitely many."""
    bounds = [None] * nvars
    for lm in lead_monos:
        nz = [i for i, e in enumerate(lm) if e > 0]
        if len(nz) == 1:
            i = nz[0]
            if bounds[i] is None or lm[i] < bounds[i]:
                bounds[i] = lm[i]
        if not nz:
            return []  # 1 is in the ideal
    if any(b is None for b in bounds):
        return None
    out = []
    for m in itertools.product(*(range(b) for b in bounds)):
        if not any(_divides(lm, m) for lm in lead_monos):
            out.append(m)
    return out


def milnor_ring(f: Polynomial, order: str = "grevlex") -> MilnorRing:
    """Compute the quotient by the gradient ideal of f.

    The monomial basis is sorted by (weighted degree if f is
    quasi-homogeneous else total degree, then reverse-lex), so the
    constant monomial comes first and the socle last.
    """
    if f.mode != "poly":
        raise PolyError("milnor_ring requires polynomial mode")
    grads = f.gradient()
    if all(g.is_zero() for g in grads):
        raise ValueError("zero gradient: f is constant")
    gb = groebner_basis(grads, order)
    weights = infer_weights(f)
    lms = gb.leading_monomials()
    basis = _standard_monomials(lms, f.nvars)
    if basis is None:
        return MilnorRing(f, gb, math.inf, None, weights)
    if not basis:
        return MilnorRing(f, gb, 0, [], weights)

    if weights is not None:
        def deg(m):
            return weights.degree(m)
    else:
        def deg(m):
            return Fraction(sum(m))
    basis.sort(key=lambda m: (deg(m), tuple(-e for e in m)))
    mu = len(basis)

    # socle: unique basis monomial of maximal degree, when unique
    top = deg(basis[-1])
    tops = [m for m in basis if deg(m) == top]
    socle = tops[0] if len(tops) == 1 else None
    hess_c = None
    if socle is not None:
        hess_nf = gb.normal_form(hessian_det(f))
        hess_c = hess_nf.coeffs.get(socle, Fraction(0))
        if hess_c == 0:
            socle, hess_c = None, None
    return MilnorRing(f, gb, mu, basis, weights, socle, hess_c)
