"""Deformed multiplication, family residues, flat coordinates, potentials."""

import random
from fractions import Fraction

import pytest

from lglab.frobenius import (
    TPoly,
    build_flat_potential,
    family_metric,
    family_multiplication,
    family_normal_form,
    family_residue,
    series_inverse,
    truncate,
    universal_unfolding,
    wdvv_residual,
)
from lglab.groebner import milnor_ring
from lglab.poly import Polynomial, parse_polynomial
from lglab.util import ComputeError, PrecondError


def unfold(src: str, names=None):
    return universal_unfolding(parse_polynomial(src, names))


def tmono(poly: Polynomial, text: str) -> Fraction:
    """Coefficient of a named t-monomial, e.g. coefficient of 't0*t1^2'."""
    probe = parse_polynomial(text, poly.names)
    [(m, c)] = probe.coeffs.items()
    assert c == 1
    return poly.coeffs.get(m, Fraction(0))


# -- series helpers -----------------------------------------------------------------


def test_series_inverse_round_trip():
    p = parse_polynomial("2 + t0 + 3*t1^2", ("t0", "t1"))
    inv = series_inverse(p, 6)
    assert truncate(p * inv, 6) == Polynomial.constant(1, p.names)


def test_series_inverse_needs_a_unit():
    p = parse_polynomial("t0", ("t0",))
    with pytest.raises(ComputeError):
        series_inverse(p, 4)


# -- family normal forms ------------------------------------------------------------


def test_one_variable_cubic_square_rewrites_to_parameter():
    U = unfold("z^3/3")
    nf = family_normal_form(U, parse_polynomial("z^2"), 4)
    # z^2 = d(F)/dz - t1, so the normal form is -t1 * 1
    assert set(nf.terms) == {(0, 1)}
    assert nf.terms[(0, 1)] == Polynomial.constant(-1, ("z",))


def test_one_variable_quartic_socle_power():
    U = unfold("z^4/4")
    nf = family_normal_form(U, parse_polynomial("z^4"), 4)
    # z^4 reduces to -t1*z - 2*t2*z^2
    assert nf.terms[(0, 1, 0)] == parse_polynomial("-z", ("z",))
    assert nf.terms[(0, 0, 1)] == parse_polynomial("-2*z^2", ("z",))
    assert set(nf.terms) == {(0, 1, 0), (0, 0, 1)}


def test_normal_form_kills_family_ideal_elements():
    # b * dF/dz must have normal form zero for several b
    U = unfold("z^3/3")
    znames = ("z",)
    dF = TPoly({(0, 0): parse_polynomial("z^2", znames),
                (0, 1): Polynomial.constant(1, znames)}, 6, U.tnames, znames)
    for b_text in ["1", "z", "z^2", "3 + z^3"]:
        b = TPoly.from_z(parse_polynomial(b_text, znames), 6, U.tnames)
        assert family_normal_form(U, b * dF, 6).is_zero()


def test_normal_form_is_linear_over_parameters():
    U = unfold("z^4/4")
    rng = random.Random(7)
    znames = ("z",)
    for _ in range(5):
        g1 = Polynomial({(rng.randrange(6),): Fraction(rng.randrange(-4, 5))
                         for _ in range(3)}, znames)
        g2 = Polynomial({(rng.randrange(6),): Fraction(rng.randrange(-4, 5))
                         for _ in range(3)}, znames)
        lhs = family_normal_form(U, g1 + g2, 5)
        rhs = family_normal_form(U, g1, 5) + family_normal_form(U, g2, 5)
        assert (lhs - rhs).is_zero()


# -- deformed multiplication ---------------------------------------------------------


def test_cubic_structure_constants():
    U = unfold("z^3/3")
    c = family_multiplication(U, 4)
    # basis (1, z); z*z = -t1 * 1
    assert c[1][1][0] == parse_polynomial("-t1", U.tnames)
    assert c[1][1][1].is_zero()


def test_unit_axiom():
    for src, names in [("z^3/3", None), ("z^4/4", None), ("x^3+y^3", ("x", "y"))]:
        U = unfold(src, names)
        c = family_multiplication(U, 3)
        for b in range(U.mu):
            for e in range(U.mu):
                want = Polynomial.constant(1 if e == b else 0, U.tnames)
                assert c[0][b][e] == want


def test_multiplication_is_associative_in_the_family():
    # (phi_a phi_b) phi_c and phi_a (phi_b phi_c) have equal normal forms
    for src, names in [("z^4/4", None), ("x^3+y^3", ("x", "y"))]:
        U = unfold(src, names)
        nt = 3
        c = family_multiplication(U, nt)
        mu = U.mu
        for a in range(mu):
            for b in range(mu):
                for d in range(mu):
                    left = [Polynomial.zero(U.tnames) for _ in range(mu)]
                    right = [Polynomial.zero(U.tnames) for _ in range(mu)]
                    for e in range(mu):
                        for g in range(mu):
                            left[g] = left[g] + truncate(c[a][b][e] * c[e][d][g], nt)
                            right[g] = right[g] + truncate(c[b][d][e] * c[a][e][g], nt)
                    assert left == right


# -- family residues and the metric --------------------------------------------------


def test_base_point_metric_matches_one_point_residues():
    for src, names in [("z^3/3", None), ("z^4/4", None), ("x^3+y^3", ("x", "y"))]:
        U = unfold(src, names)
        eta = family_metric(U, 3)
        ring = U.ring
        for a in range(U.mu):
            for b in range(U.mu):
                prod = Polynomial.monomial(
                    tuple(x + y for x, y in zip(U.phis[a], U.phis[b])),
                    1, U.f.names)
                assert eta[a][b].constant_term() == ring.residue(prod)


def test_cubic_metric_is_constant_to_all_computed_orders():
    U = unfold("z^3/3")
    eta = family_metric(U, 8)
    assert eta[0][0].is_zero()
    assert eta[0][1] == Polynomial.constant(1, U.tnames)
    assert eta[1][1].is_zero()


def test_quartic_metric_top_entry_depends_on_parameters():
    U = unfold("z^4/4")
    eta = family_metric(U, 4)
    assert eta[2][2] == parse_polynomial("-2*t2", U.tnames)
    assert eta[1][2].is_zero()
    assert eta[1][1] == Polynomial.constant(1, U.tnames)
    assert eta[0][2] == Polynomial.constant(1, U.tnames)


def test_residue_of_product_with_hessian_is_a_trace():
    # Scheja-Storch: residue(g * hess F) equals the trace of multiplication
    # by g; at the base point (t = 0) both sides are computable exactly.
    for src, names in [("z^3/3", None), ("z^4/4", None), ("x^3+y^3", ("x", "y"))]:
        ring = milnor_ring(parse_polynomial(src, names))
        U = universal_unfolding(ring.f)
        rng = random.Random(11)
        for _ in range(4):
            g = Polynomial(
                {m: Fraction(rng.randrange(-3, 4)) for m in ring.basis}, ring.f.names)
            from lglab.poly import hessian_det
            val = family_residue(U, g * hessian_det(ring.f), 0).constant_term()
            M = ring.multiplication_matrix(g)
            assert val == sum(M[i][i] for i in range(ring.mu))


def test_family_residue_requires_quasihomogeneous_base():
    U = universal_unfolding(parse_polynomial("x^3/3+y^3/3-x*y", ("x", "y")))
    with pytest.raises(PrecondError):
        family_residue(U, parse_polynomial("x*y", ("x", "y")), 2)


def test_unfolding_requires_isolated_critical_point():
    with pytest.raises(PrecondError):
        universal_unfolding(parse_polynomial("x^2*y^2", ("x", "y")))


# -- flat coordinates and potentials --------------------------------------------------


def test_quadratic_potential_is_the_cube():
    D = build_flat_potential(unfold("z^2/2"), nt=4)
    assert D.potential == parse_polynomial("s0^3/6", ("s0",))
    assert D.eta0 == [[Fraction(1)]]


def test_cubic_potential_closed_form():
    D = build_flat_potential(unfold("z^3/3"), nt=5)
    want = parse_polynomial("s0^2*s1/2 - s1^4/24", ("s0", "s1"))
    assert D.potential == want
    # the metric was already flat, so the coordinate change is trivial
    assert D.t_of_s[0] == Polynomial.variable(0, ("s0", "s1"))
    assert D.t_of_s[1] == Polynomial.variable(1, ("s0", "s1"))


def test_quartic_flat_coordinate_change():
    D = build_flat_potential(unfold("z^4/4"), nt=5)
    snames = ("s0", "s1", "s2")
    assert D.t_of_s[0] == parse_polynomial("s0 + s2^2/2", snames)
    assert D.t_of_s[1] == Polynomial.variable(1, snames)
    assert D.t_of_s[2] == Polynomial.variable(2, snames)
    # round trip
    for a in range(3):
        comp = truncate(D.t_of_s[a].subs(D.s_of_t), 5)
        assert comp == Polynomial.variable(a, D.unfolding.tnames)


def test_coordinate_change_is_tangent_to_identity():
    for src, names in [("z^4/4", None), ("x^3+y^3", ("x", "y"))]:
        D = build_flat_potential(unfold(src, names), nt=3)
        mu = D.unfolding.mu
        for a in range(mu):
            diff = D.t_of_s[a] - Polynomial.variable(a, D.t_of_s[a].names)
            assert all(sum(m) >= 2 for m in diff.coeffs)


def test_potential_third_derivatives_match_lowered_structure_constants():
    # at the base point the third derivatives are residue triple products
    for src, names in [("z^3/3", None), ("x^3+y^3", ("x", "y"))]:
        D = build_flat_potential(unfold(src, names), nt=4)
        U = D.unfolding
        mu = U.mu
        for a in range(mu):
            for b in range(mu):
                for c in range(mu):
                    triple = Polynomial.monomial(
                        tuple(x + y + w for x, y, w in
                              zip(U.phis[a], U.phis[b], U.phis[c])),
                        1, U.f.names)
                    want = U.ring.residue(triple)
                    got = D.third_derivatives(a, b, c).constant_term()
                    assert got == want


def test_lowered_tensor_is_totally_symmetric():
    # the contraction sum_e c_ab^e eta_ec equals the residue of the triple
    # product, hence must be symmetric under all permutations
    U = unfold("z^4/4")
    nt = 4
    c = family_multiplication(U, nt)
    eta = family_metric(U, nt)
    from lglab.frobenius import _normalizer_inverse
    cinv = _normalizer_inverse(U, nt)
    mu = U.mu
    for a in range(mu):
        for b in range(mu):
            for d in range(mu):
                low = Polynomial.zero(U.tnames)
                for e in range(mu):
                    low = low + truncate(c[a][b][e] * eta[e][d], nt)
                triple = Polynomial.monomial(
                    tuple(x + y + w for x, y, w in
                          zip(U.phis[a], U.phis[b], U.phis[d])), 1, U.f.names)
                direct = family_residue(U, triple, nt, _cinv=cinv)
                assert low == direct


def test_euler_degrees():
    D = build_flat_potential(unfold("z^4/4"), nt=3)
    assert D.euler_degrees == [Fraction(1), Fraction(3, 4), Fraction(2, 4)]


def test_describe_is_json_ready():
    import json

    from lglab.util import jsonable
    D = build_flat_potential(unfold("z^3/3"), nt=4)
    text = json.dumps(jsonable(D.describe()))
    assert "milnor_number" in text


# -- associativity -------------------------------------------------------------------


def test_wdvv_vanishes_for_the_cubic():
    D = build_flat_potential(unfold("z^3/3"), nt=6)
    assert wdvv_residual(D, 6) == 0


def test_wdvv_vanishes_for_the_quartic():
    D = build_flat_potential(unfold("z^4/4"), nt=5)
    assert wdvv_residual(D, 5) == 0


def test_wdvv_vanishes_for_two_variable_sum_of_cubes():
    D = build_flat_potential(unfold("x^3+y^3", ("x", "y")), nt=4)
    assert wdvv_residual(D, 4) == 0


def test_wdvv_detects_a_broken_potential():
    D = build_flat_potential(unfold("z^4/4"), nt=5)
    D.potential = D.potential + parse_polynomial("s1^2*s2^3", ("s0", "s1", "s2"))
    assert wdvv_residual(D, 5) != 0
