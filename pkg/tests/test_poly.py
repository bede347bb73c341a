import random
from fractions import Fraction

import pytest

from lglab.poly import (
    Polynomial,
    PolyError,
    WeightSystem,
    hessian_det,
    infer_weights,
    parse_polynomial,
)


def P(text, names=None, laurent=False):
    return parse_polynomial(text, names=names, laurent=laurent)


class TestParsing:
    def test_single_variable_powers(self):
        f = P("z^3/3", names=["z"])
        assert f.coeffs == {(3,): Fraction(1, 3)}

    def test_two_variables(self):
        f = P("x^3 + y^3", names=["x", "y"])
        assert f.coeffs == {(3, 0): Fraction(1), (0, 3): Fraction(1)}

    def test_coefficients_and_products(self):
        f = P("3*x*y^2 - 2*x^2", names=["x", "y"])
        assert f.coeffs == {(1, 2): Fraction(3), (2, 0): Fraction(-2)}

    def test_leading_minus_and_constants(self):
        f = P("-x + 5/2", names=["x"])
        assert f.coeffs == {(1,): Fraction(-1), (0,): Fraction(5, 2)}

    def test_inferred_names_in_order(self):
        f = P("y + x*y")
        assert f.names == ("y", "x")

    def test_unknown_variable_rejected(self):
        with pytest.raises(PolyError):
            P("x + w", names=["x", "y"])

    def test_negative_exponent_needs_laurent(self):
        with pytest.raises(PolyError):
            P("x^-1", names=["x"])
        g = P("x^-1 + x", names=["x"], laurent=True)
        assert g.coeffs == {(-1,): Fraction(1), (1,): Fraction(1)}

    def test_zero_denominator(self):
        with pytest.raises(PolyError):
            P("1/0", names=["x"])

    def test_division_by_variable_rejected(self):
        with pytest.raises(PolyError):
            P("x/y", names=["x", "y"])

    def test_like_terms_collect(self):
        f = P("x + x - 2*x", names=["x"])
        assert f.is_zero()

    def test_str_round_trip(self):
        rng = random.Random(7)
        names = ("x", "y", "z")
        for _ in range(25):
            coeffs = {}
            for _ in range(rng.randint(1, 6)):
                m = tuple(rng.randint(0, 4) for _ in names)
                coeffs[m] = Fraction(rng.randint(-9, 9), rng.randint(1, 9))
            f = Polynomial(coeffs, names)
            g = P(str(f), names=names)
            assert f == g


class TestArithmetic:
    def test_product(self):
        x = P("x", names=["x", "y"])
        y = P("y", names=["x", "y"])
        assert (x + y) * (x - y) == P("x^2 - y^2", names=["x", "y"])

    def test_power(self):
        f = P("1 + x", names=["x"])
        assert f ** 4 == P("1 + 4*x + 6*x^2 + 4*x^3 + x^4", names=["x"])

    def test_diff(self):
        f = P("x^3 + x*y^3", names=["x", "y"])
        assert f.diff(0) == P("3*x^2 + y^3", names=["x", "y"])
        assert f.diff(1) == P("3*x*y^2", names=["x", "y"])

    def test_laurent_diff_and_theta(self):
        f = P("x + x^-1", names=["x"], laurent=True)
        assert f.diff(0) == P("1 - x^-2", names=["x"], laurent=True)
        assert f.theta(0) == P("x - x^-1", names=["x"], laurent=True)

    def test_eval_complex(self):
        f = P("x^2 + y", names=["x", "y"])
        assert f.eval_complex((2 + 1j, -3)) == (2 + 1j) ** 2 - 3

    def test_subs(self):
        f = P("x^2 + y", names=["x", "y"])
        u = P("s + 1", names=["s"])
        v = P("s^2", names=["s"])
        assert f.subs([u, v]) == P("2*s^2 + 2*s + 1", names=["s"])


class TestWeights:
    def test_fermat_weights(self):
        f = P("x^3 + y^3", names=["x", "y"])
        w = infer_weights(f)
        assert w == WeightSystem((Fraction(1, 3), Fraction(1, 3)))

    def test_chain_weights(self):
        f = P("x^3 + x*y^3", names=["x", "y"])
        w = infer_weights(f)
        assert w == WeightSystem((Fraction(1, 3), Fraction(2, 9)))

    def test_inconsistent_returns_none(self):
        f = P("x^3 + y^3 + x^2*y^2", names=["x", "y"])
        assert infer_weights(f) is None

    def test_underdetermined_returns_none(self):
        f = P("x^2", names=["x", "y"])
        assert infer_weights(f) is None

    def test_degree(self):
        w = WeightSystem((Fraction(1, 3), Fraction(2, 9)))
        assert w.degree((1, 3)) == Fraction(1)


class TestHessian:
    def test_one_variable(self):
        f = P("z^4/4", names=["z"])
        assert hessian_det(f) == P("3*z^2", names=["z"])

    def test_chain(self):
        f = P("x^3 + x*y^3", names=["x", "y"])
        # [[6x, 3y^2], [3y^2, 6xy]] -> 36 x^2 y - 9 y^4
        assert hessian_det(f) == P("36*x^2*y - 9*y^4", names=["x", "y"])

    def test_fermat(self):
        f = P("x^3 + y^3", names=["x", "y"])
        assert hessian_det(f) == P("36*x*y", names=["x", "y"])
