"""Frobenius-manifold data from the universal unfolding of a singularity.

Pipeline: unfold f over its Milnor basis, multiply and take residues in
the family (order by order in the deformation parameters), flatten the
residue metric by an order-by-order polynomial coordinate change, lower
and pull back the structure constants, and integrate them to a potential
whose third derivatives reproduce them.  Associativity of the family
product then appears as the vanishing of the WDVV residual.

Everything is exact rational arithmetic on truncated multivariate
series; no floating point enters.

The family residue functional extracts the socle coefficient of the
family normal form, normalized so the family Hessian determinant has
residue equal to the Milnor number.  That identification relies on the
grading induced by quasi-homogeneity (parameter t_a carries weight
1 - weight(phi_a) > 0, and every sub-socle basis direction has negative
total weight after dividing by the socle), so the metric and potential
constructions require a quasi-homogeneous base point.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction

from .groebner import MilnorRing, milnor_ring
from .poly import Monomial, Polynomial
from .util import ComputeError, PrecondError, exact_rank, frac_str, invert_exact, rref

# -- truncated series utilities over the deformation parameters -----------------


def truncate(p: Polynomial, nt: int) -> Polynomial:
    return Polynomial({m: c for m, c in p.coeffs.items() if sum(m) <= nt},
                      p.names, p.mode)


def degree_part(p: Polynomial, k: int) -> Polynomial:
    return Polynomial({m: c for m, c in p.coeffs.items() if sum(m) == k},
                      p.names, p.mode)


def series_inverse(p: Polynomial, nt: int) -> Polynomial:
    """Multiplicative inverse of a series with nonzero constant term."""
    c0 = p.constant_term()
    if c0 == 0:
        raise ComputeError("series with zero constant term has no inverse")
    rest = truncate(p * (Fraction(1) / c0) - 1, nt)
    inv = Polynomial.constant(1, p.names, p.mode)
    power = Polynomial.constant(1, p.names, p.mode)
    for _ in range(nt):
        power = truncate(power * rest * Fraction(-1), nt)
        if power.is_zero():
            break
        inv = inv + power
    return truncate(inv * (Fraction(1) / c0), nt)


class TPoly:
    """Polynomial in the deformation parameters with z-polynomial
    coefficients, truncated in total t-degree."""

    __slots__ = ("terms", "nt", "tnames", "znames")

    def __init__(self, terms: dict[Monomial, Polynomial], nt: int,
                 tnames: tuple[str, ...], znames: tuple[str, ...]):
        self.terms = {tuple(m): p for m, p in terms.items()
                      if sum(m) <= nt and not p.is_zero()}
        self.nt = nt
        self.tnames = tnames
        self.znames = znames

    @classmethod
    def from_z(cls, p: Polynomial, nt: int, tnames) -> "TPoly":
        zero_t = tuple(0 for _ in tnames)
        return cls({zero_t: p}, nt, tnames, p.names)

    def __add__(self, other: "TPoly") -> "TPoly":
        out = dict(self.terms)
        for m, p in other.terms.items():
            out[m] = out[m] + p if m in out else p
        return TPoly(out, min(self.nt, other.nt), self.tnames, self.znames)

    def __sub__(self, other: "TPoly") -> "TPoly":
        neg = TPoly({m: p * Fraction(-1) for m, p in other.terms.items()},
                    other.nt, other.tnames, other.znames)
        return self + neg

    def __mul__(self, other: "TPoly") -> "TPoly":
        out: dict[Monomial, Polynomial] = {}
        for m1, p1 in self.terms.items():
            for m2, p2 in other.terms.items():
                m = tuple(a + b for a, b in zip(m1, m2))
                if sum(m) > min(self.nt, other.nt):
                    continue
                prod = p1 * p2
                out[m] = out[m] + prod if m in out else prod
        return TPoly(out, min(self.nt, other.nt), self.tnames, self.znames)

    def zdiff(self, i: int) -> "TPoly":
        return TPoly({m: p.diff(i) for m, p in self.terms.items()},
                     self.nt, self.tnames, self.znames)

    def is_zero(self) -> bool:
        return not self.terms

    def socle_series(self, socle: Monomial) -> Polynomial:
        """Coefficient of a fixed z-monomial, as a t-polynomial."""
        out = {}
        for m, p in self.terms.items():
            c = p.coeffs.get(socle, Fraction(0))
            if c != 0:
                out[m] = c
        return Polynomial(out, self.tnames)


# -- the unfolding ----------------------------------------------------------------


@dataclass
class Unfolding:
    f: Polynomial
    ring: MilnorRing
    tnames: tuple[str, ...]
    phis: list[Monomial]

    @property
    def mu(self) -> int:
        return len(self.phis)

    def family(self, nt: int) -> TPoly:
        """F = f + sum_a t_a phi_a."""
        terms = {tuple(0 for _ in self.tnames): self.f}
        for a, phi in enumerate(self.phis):
            tm = tuple(1 if i == a else 0 for i in range(len(self.tnames)))
            terms[tm] = Polynomial.monomial(phi, 1, self.f.names)
        return TPoly(terms, nt, self.tnames, self.f.names)


def universal_unfolding(f: Polynomial) -> Unfolding:
    ring = milnor_ring(f)
    if ring.basis is None:
        raise PrecondError("infinite-dimensional quotient: no finite unfolding")
    tnames = tuple(f"t{a}" for a in range(len(ring.basis)))
    return Unfolding(f, ring, tnames, list(ring.basis))


def family_normal_form(U: Unfolding, g, nt: int) -> TPoly:
    """Normal form of g modulo the family gradient ideal, truncated in t.

    Division by the base gradient ideal leaves quotients a_i; rewriting
    a_i * d_i f = a_i * d_i F - sum_a t_a a_i * d_i phi_a pushes the
    correction to strictly higher t-order, so the loop terminates.
    Output coefficients are supported on base Milnor basis monomials.
    """
    znames = U.f.names
    if isinstance(g, Polynomial):
        g = TPoly.from_z(g, nt, U.tnames)
    dphi = [[Polynomial.monomial(phi, 1, znames).diff(i)
             for i in range(len(znames))] for phi in U.phis]
    work: dict[Monomial, Polynomial] = dict(g.terms)
    out: dict[Monomial, Polynomial] = {}
    for deg in range(nt + 1):
        layer = [m for m in work if sum(m) == deg]
        for tm in sorted(layer):
            p = work.pop(tm)
            if p.is_zero():
                continue
            nf, quot = U.ring.reduce_with_quotients(p)
            if not nf.is_zero():
                out[tm] = out[tm] + nf if tm in out else nf
            for a in range(U.mu):
                corr = Polynomial.zero(znames)
                for i in range(len(znames)):
                    if not quot[i].is_zero() and not dphi[a][i].is_zero():
                        corr = corr + quot[i] * dphi[a][i]
                if corr.is_zero():
                    continue
                tm2 = tuple(e + (1 if j == a else 0) for j, e in enumerate(tm))
                if sum(tm2) > nt:
                    continue
                work[tm2] = work.get(tm2, Polynomial.zero(znames)) - corr
    return TPoly(out, nt, U.tnames, znames)


def _normalizer_inverse(U: Unfolding, nt: int) -> Polynomial:
    """Inverse of the socle series of the family Hessian determinant."""
    if U.ring.weights is None:
        raise PrecondError("family residues require a quasi-homogeneous base")
    if U.ring.socle is None:
        raise PrecondError("family residues require a one-dimensional socle")
    hess = _family_hessian(U, nt)
    hess_nf = family_normal_form(U, hess, nt)
    c = hess_nf.socle_series(U.ring.socle)
    return series_inverse(c, nt)


def family_residue(U: Unfolding, g, nt: int,
                   _cinv: Polynomial | None = None) -> Polynomial:
    """Family residue functional as a t-polynomial, normalized so the
    family Hessian determinant has residue mu."""
    if U.ring.weights is None:
        raise PrecondError("family residues require a quasi-homogeneous base")
    if _cinv is None:
        _cinv = _normalizer_inverse(U, nt)
    nf = family_normal_form(U, g, nt)
    numer = nf.socle_series(U.ring.socle)
    return truncate(numer * _cinv * Fraction(U.ring.mu), nt)


def _family_hessian(U: Unfolding, nt: int) -> TPoly:
    F = U.family(nt)
    n = len(U.f.names)
    H = [[F.zdiff(i).zdiff(j) for j in range(n)] for i in range(n)]

    def det(rows, cols):
        if len(rows) == 1:
            return H[rows[0]][cols[0]]
        total = None
        r0 = rows[0]
        for k, c in enumerate(cols):
            minor = det(rows[1:], cols[:k] + cols[k + 1:])
            term = H[r0][c] * minor
            if k % 2:
                term = TPoly({m: p * Fraction(-1) for m, p in term.terms.items()},
                             term.nt, term.tnames, term.znames)
            total = term if total is None else total + term
        return total

    return det(list(range(n)), list(range(n)))


def family_multiplication(U: Unfolding, nt: int) -> list[list[list[Polynomial]]]:
    """Structure constants c[a][b][e](t): phi_a * phi_b = sum_e c * phi_e
    modulo the family gradient ideal."""
    znames = U.f.names
    mu = U.mu
    index = {m: e for e, m in enumerate(U.phis)}
    c = [[[Polynomial.zero(U.tnames) for _ in range(mu)] for _ in range(mu)]
         for _ in range(mu)]
    for a in range(mu):
        for b in range(a, mu):
            prod = Polynomial.monomial(
                tuple(x + y for x, y in zip(U.phis[a], U.phis[b])), 1, znames)
            nf = family_normal_form(U, prod, nt)
            coeffs = [dict() for _ in range(mu)]
            for tm, p in nf.terms.items():
                for zm, val in p.coeffs.items():
                    if zm not in index:
                        raise ComputeError(
                            "family normal form leaves the basis span")
                    coeffs[index[zm]][tm] = val
            for e in range(mu):
                poly = Polynomial(coeffs[e], U.tnames)
                c[a][b][e] = poly
                c[b][a][e] = poly
    return c


def family_metric(U: Unfolding, nt: int) -> list[list[Polynomial]]:
    """eta[a][b](t) = family residue of phi_a * phi_b."""
    znames = U.f.names
    mu = U.mu
    cinv = _normalizer_inverse(U, nt)
    eta = [[None] * mu for _ in range(mu)]
    for a in range(mu):
        for b in range(a, mu):
            prod = Polynomial.monomial(
                tuple(x + y for x, y in zip(U.phis[a], U.phis[b])), 1, znames)
            val = family_residue(U, prod, nt, _cinv=cinv)
            eta[a][b] = val
            eta[b][a] = val
    return eta


# -- flat coordinates and the potential ---------------------------------------------


@dataclass
class FrobeniusData:
    unfolding: Unfolding
    nt: int
    eta0: list[list[Fraction]]
    metric_t: list[list[Polynomial]]
    structure_t: list[list[list[Polynomial]]]
    t_of_s: list[Polynomial]
    s_of_t: list[Polynomial]
    potential: Polynomial          # in flat coordinates, order nt + 3
    euler_degrees: list[Fraction] | None

    def third_derivatives(self, a: int, b: int, c: int) -> Polynomial:
        return truncate(self.potential.diff(a).diff(b).diff(c), self.nt)

    def describe(self) -> dict:
        return {
            "milnor_number": self.unfolding.mu,
            "deformation_monomials": [
                str(Polynomial.monomial(m, 1, self.unfolding.f.names))
                for m in self.unfolding.phis],
            "flat_metric": [[frac_str(x) for x in row] for row in self.eta0],
            "potential": {str(Polynomial.monomial(m, 1, self.potential.names)):
                          frac_str(c) for m, c in sorted(self.potential.coeffs.items())},
            "euler_degrees": ([frac_str(d) for d in self.euler_degrees]
                              if self.euler_degrees else None),
            "t_order": self.nt,
        }


def _solve_symmetric_gradient(S: list[list[Polynomial]], k: int,
                              snames: tuple[str, ...]) -> list[Polynomial]:
    """Solve d_a sigma_b + d_b sigma_a = S_ab for sigma of homogeneous
    degree k+1, where S is symmetric with homogeneous degree-k entries.
    The solution is unique (no polynomial Killing fields of degree >= 2
    for the constant metric); raises if the system is inconsistent."""
    mu = len(snames)
    monos_k1 = [m for m in itertools.product(range(k + 2), repeat=mu)
                if sum(m) == k + 1]
    monos_k = [m for m in itertools.product(range(k + 1), repeat=mu)
               if sum(m) == k]
    cols = [(b, m) for b in range(mu) for m in monos_k1]
    col_index = {cm: i for i, cm in enumerate(cols)}
    rows = []
    rhs = []
    for a in range(mu):
        for b in range(a, mu):
            for m in monos_k:
                row = [Fraction(0)] * len(cols)
                # d_a sigma_b contributes coeff(m + e_a) * (m_a + 1)
                ma = tuple(e + (1 if i == a else 0) for i, e in enumerate(m))
                row[col_index[(b, ma)]] += Fraction(m[a] + 1)
                mb = tuple(e + (1 if i == b else 0) for i, e in enumerate(m))
                row[col_index[(a, mb)]] += Fraction(m[b] + 1)
                rows.append(row)
                rhs.append(S[a][b].coeffs.get(m, Fraction(0)))
    aug = [row + [r] for row, r in zip(rows, rhs)]
    red, pivots = rref(aug)
    ncols = len(cols)
    for row in red:
        if all(x == 0 for x in row[:-1]) and row[-1] != 0:
            raise ComputeError(
                f"metric flattening obstructed at degree {k}: "
                "symmetrized gradient system is inconsistent")
    sol = [Fraction(0)] * ncols
    for i, col in enumerate(pivots):
        if col == ncols:
            raise ComputeError("metric flattening obstructed: inconsistent row")
        sol[col] = red[i][-1]
    sigma = []
    for b in range(mu):
        coeffs = {m: sol[col_index[(b, m)]] for m in monos_k1
                  if sol[col_index[(b, m)]] != 0}
        sigma.append(Polynomial(coeffs, snames))
    return sigma


def build_flat_potential(U: Unfolding, nt: int = 5) -> FrobeniusData:
    """Flatten the family metric, pull back the structure constants, and
    integrate them to the potential.  All steps verify their own
    consistency and raise ComputeError on obstruction."""
    mu = U.mu
    snames = tuple(f"s{a}" for a in range(mu))
    eta_t = family_metric(U, nt)
    eta0 = [[eta_t[a][b].constant_term() for b in range(mu)] for a in range(mu)]
    if exact_rank([list(r) for r in eta0]) != mu:
        raise PrecondError("residue metric degenerate at the base point")
    eta0_inv = invert_exact(eta0)
    c_t = family_multiplication(U, nt)

    # order-by-order flattening: t(s) = s + corrections of degree >= 2
    t_of_s = [Polynomial.variable(a, snames) for a in range(mu)]

    def pulled_back_metric(upto: int) -> list[list[Polynomial]]:
        J = [[t_of_s[p].diff(a) for p in range(mu)] for a in range(mu)]
        out = [[Polynomial.zero(snames) for _ in range(mu)] for _ in range(mu)]
        eta_s = [[truncate(eta_t[p][q].subs(t_of_s), upto) for q in range(mu)]
                 for p in range(mu)]
        for a in range(mu):
            for b in range(a, mu):
                acc = Polynomial.zero(snames)
                for p in range(mu):
                    for q in range(mu):
                        if J[a][p].is_zero() or J[b][q].is_zero():
                            continue
                        acc = acc + truncate(J[a][p] * J[b][q] * eta_s[p][q], upto)
                out[a][b] = acc
                out[b][a] = acc
        return out

    for k in range(1, nt + 1):
        current = pulled_back_metric(k)
        S = [[degree_part(current[a][b] -
                          Polynomial.constant(eta0[a][b], snames), k)
              for b in range(mu)] for a in range(mu)]
        if all(S[a][b].is_zero() for a in range(mu) for b in range(mu)):
            continue
        negS = [[S[a][b] * Fraction(-1) for b in range(mu)] for a in range(mu)]
        sigma = _solve_symmetric_gradient(negS, k, snames)
        # raise indices: h^p = sum_b inv_eta[p][b] sigma_b
        for p in range(mu):
            h = Polynomial.zero(snames)
            for b in range(mu):
                if eta0_inv[p][b] != 0:
                    h = h + sigma[b] * eta0_inv[p][b]
            t_of_s[p] = t_of_s[p] + h

    final = pulled_back_metric(nt)
    for a in range(mu):
        for b in range(mu):
            if final[a][b] != Polynomial.constant(eta0[a][b], snames):
                raise ComputeError("metric flattening failed verification")

    # inverse coordinate change by fixed-point iteration
    h_parts = [t_of_s[a] - Polynomial.variable(a, snames) for a in range(mu)]
    s_of_t = [Polynomial.variable(a, U.tnames) for a in range(mu)]
    for _ in range(nt + 1):
        new = []
        for a in range(mu):
            corr = truncate(h_parts[a].subs(s_of_t), nt)
            new.append(Polynomial.variable(a, U.tnames) - corr)
        if new == s_of_t:
            break
        s_of_t = new
    for a in range(mu):
        if truncate(t_of_s[a].subs(s_of_t), nt) != Polynomial.variable(a, U.tnames):
            raise ComputeError("coordinate change failed to invert")

    # lowered structure constants (the residue of a triple product, so the
    # tensor is totally symmetric), pulled back to flat coordinates
    J = [[t_of_s[p].diff(a) for p in range(mu)] for a in range(mu)]
    pulled = {}
    for p in range(mu):
        for q in range(p, mu):
            for r in range(q, mu):
                acc = Polynomial.zero(U.tnames)
                for e in range(mu):
                    if not c_t[p][q][e].is_zero() and not eta_t[e][r].is_zero():
                        acc = acc + truncate(c_t[p][q][e] * eta_t[e][r], nt)
                val = truncate(acc.subs(t_of_s), nt)
                for perm in set(itertools.permutations((p, q, r))):
                    pulled[perm] = val

    def tilde_c(a, b, c):
        acc = Polynomial.zero(snames)
        for p in range(mu):
            if J[a][p].is_zero():
                continue
            for q in range(mu):
                if J[b][q].is_zero():
                    continue
                for r in range(mu):
                    if J[c][r].is_zero() or pulled[(p, q, r)].is_zero():
                        continue
                    acc = acc + truncate(
                        J[a][p] * J[b][q] * J[c][r] * pulled[(p, q, r)], nt)
        return acc

    tensor: dict[tuple[int, int, int], Polynomial] = {}
    for a in range(mu):
        for b in range(a, mu):
            for c in range(b, mu):
                val = tilde_c(a, b, c)
                for perm in set(itertools.permutations((a, b, c))):
                    tensor[perm] = val

    # integrate the third-derivative tensor to the potential
    pot_coeffs: dict[Monomial, Fraction] = {}
    for (a, b, c), poly in tensor.items():
        if (a, b, c) != tuple(sorted((a, b, c))):
            continue
        for m, val in poly.coeffs.items():
            target = tuple(e + (1 if i == a else 0) + (1 if i == b else 0) +
                           (1 if i == c else 0) for i, e in enumerate(m))
            probe = Polynomial.monomial(target, 1, snames)
            factor = probe.diff(a).diff(b).diff(c).coeffs.get(m)
            coeff = val / factor
            if target in pot_coeffs:
                if pot_coeffs[target] != coeff:
                    raise ComputeError(
                        f"potential integration inconsistent at {target}: "
                        "third-derivative tensor is not integrable")
            else:
                pot_coeffs[target] = coeff
    # cross-validate every (a,b,c,m) determination, including permutations
    potential = Polynomial(pot_coeffs, snames)
    for (a, b, c), poly in tensor.items():
        got = truncate(potential.diff(a).diff(b).diff(c), nt)
        if got != truncate(poly, nt):
            raise ComputeError(
                f"potential fails to reproduce the structure tensor at {(a, b, c)}")

    euler = None
    if U.ring.weights is not None:
        euler = [Fraction(1) - U.ring.weights.degree(m) for m in U.phis]

    return FrobeniusData(U, nt, eta0, eta_t, c_t, t_of_s, s_of_t,
                         potential, euler)


def wdvv_residual(D: FrobeniusData, nt: int | None = None) -> Fraction:
    """Max absolute coefficient of the associativity residual
    sum_{e,f} F_abe eta^{ef} F_fcd - (b <-> c), truncated in t-order."""
    nt = D.nt if nt is None else nt
    mu = D.unfolding.mu
    inv = invert_exact(D.eta0)
    third = {}
    for a in range(mu):
        for b in range(mu):
            for c in range(mu):
                third[(a, b, c)] = truncate(D.potential.diff(a).diff(b).diff(c), nt)

    def contract(a, b, c, d):
        acc = Polynomial.zero(D.potential.names)
        for e in range(mu):
            for f_ in range(mu):
                if inv[e][f_] == 0:
                    continue
                term = third[(a, b, e)] * third[(f_, c, d)] * inv[e][f_]
                acc = acc + truncate(term, nt)
        return acc

    worst = Fraction(0)
    for a in range(mu):
        for b in range(mu):
            for c in range(mu):
                for d in range(mu):
                    res = contract(a, b, c, d) - contract(a, c, b, d)
                    for v in res.coeffs.values():
                        worst = max(worst, abs(v))
    return worst
