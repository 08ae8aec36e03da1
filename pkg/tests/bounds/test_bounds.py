""" Test the bound algebra.

Ensure that:
- Arithmetic keeps bounds in a canonical form, with ω absorbing everything but zero.
- Evaluation uses absolute values and fails loudly on missing variables.
- Polynomials over-approximate into bounds with absolute coefficients.
- Asymptotic classes are ordered and printed as expected.
- Evaluation is monotone in absolute values and commutes with sums, products and substitution.
"""

import math
import random
import unittest
from fractions import Fraction

from ITSBound.bounds import (CONSTANT, EXPONENTIAL, INFINITE, LINEAR, OMEGA, ONE, QUADRATIC, ZERO,
                             AsymptoticClass, Bound, bound_sum, improves, overapprox_poly)
from ITSBound.exceptions import TemporaryVariableInBound, UnassignedVariable
from ITSBound.polynomials import Polynomial


x = Bound.variable("x")
y = Bound.variable("y")
z = Bound.variable("z")

NAMES = ("x", "y", "z")
VARIABLES = (x, y, z)
RANDOM_CASES = 150


class TestArithmetic(unittest.TestCase):
    """ Tests sums, products and substitution."""

    def test_canonical_sum(self):
        self.assertEqual(x + y, y + x)
        self.assertEqual(x + x, 2 * x)
        self.assertEqual(x + 0, x)
        self.assertEqual(ZERO + ONE, ONE)

    def test_printing(self):
        self.assertEqual(str(ZERO), "0")
        self.assertEqual(str(OMEGA), "INF")
        self.assertEqual(str(32 * z * z + 11 * z + 1), "32*z^2+11*z+1")

    def test_omega_absorbs(self):
        self.assertTrue((x + OMEGA).is_omega())
        self.assertTrue((OMEGA * 3).is_omega())
        self.assertTrue((OMEGA * ZERO).is_zero())
        self.assertFalse((x * OMEGA).is_finite())

    def test_substitute(self):
        square = x * x
        shifted = square.substitute({"x": z + 1})
        self.assertEqual(shifted.eval_abs({"z": 2}), 9)
        self.assertEqual(shifted.classify(), QUADRATIC)
        self.assertEqual((x + y).substitute({"x": y}), 2 * y)
        self.assertEqual((x + y).substitute({"x": OMEGA}), OMEGA)

    def test_bound_sum(self):
        self.assertEqual(bound_sum([]), ZERO)
        self.assertEqual(bound_sum([ONE, x, ONE]), x + 2)


class TestEvaluation(unittest.TestCase):
    """ Tests evaluating bounds in a state."""

    def test_absolute_values(self):
        self.assertEqual((2 * x + 3).eval_abs({"x": -4}), 11)
        self.assertEqual((x * y).eval_abs({"x": -2, "y": 3}), 6)

    def test_exponential(self):
        self.assertEqual(Bound.power(2, x).eval_abs({"x": -3}), 8)

    def test_omega_value(self):
        self.assertEqual(OMEGA.eval_abs({}), math.inf)
        self.assertEqual((OMEGA * ZERO).eval_abs({}), 0)

    def test_unassigned(self):
        self.assertRaises(UnassignedVariable, x.eval_abs, {"y": 1})


class TestOverapproximation(unittest.TestCase):
    """ Tests turning polynomials into bounds."""

    def test_absolute_coefficients(self):
        poly = Polynomial.linear({"x": 1, "y": -2}, Fraction(1, 2))
        self.assertEqual(overapprox_poly(poly), x + 2 * y + 1)

    def test_nonlinear(self):
        px = Polynomial.variable("x")
        self.assertEqual(overapprox_poly(px * px - px), x * x + x)

    def test_temporary_variable(self):
        poly = Polynomial.linear({"x": 1, "u": 1})
        self.assertRaises(TemporaryVariableInBound, overapprox_poly, poly, ("x",))
        self.assertEqual(overapprox_poly(poly), x + Bound.variable("u"))


class TestClasses(unittest.TestCase):
    """ Tests asymptotic classification."""

    def test_classify(self):
        self.assertEqual(ONE.classify(), CONSTANT)
        self.assertEqual(ZERO.classify(), CONSTANT)
        self.assertEqual((x + 7).classify(), LINEAR)
        self.assertEqual((x * y + x).classify(), QUADRATIC)
        self.assertEqual(Bound.power(2, x).classify(), EXPONENTIAL)
        self.assertEqual(OMEGA.classify(), INFINITE)

    def test_order(self):
        self.assertLess(CONSTANT, LINEAR)
        self.assertLess(LINEAR, QUADRATIC)
        self.assertLess(AsymptoticClass(0, 7), EXPONENTIAL)
        self.assertLess(EXPONENTIAL, INFINITE)
        self.assertTrue(LINEAR.is_at_most_linear())
        self.assertFalse(QUADRATIC.is_at_most_linear())

    def test_names(self):
        self.assertEqual(str(CONSTANT), "O(1)")
        self.assertEqual(str(LINEAR), "O(n)")
        self.assertEqual(str(QUADRATIC), "O(n^2)")
        self.assertEqual(str(AsymptoticClass(0, 3)), "O(n^3)")
        self.assertEqual(AsymptoticClass(0, 3).bucket, "O(n^>2)")
        self.assertEqual(QUADRATIC.bucket, "O(n^2)")
        self.assertEqual(str(EXPONENTIAL), "O(EXP)")
        self.assertEqual(str(INFINITE), "INF")

    def test_improves(self):
        self.assertTrue(improves(x + 5, OMEGA))
        self.assertTrue(improves(x, x * x))
        self.assertFalse(improves(x + 5, x))
        self.assertFalse(improves(OMEGA, x))

def random_bound(rng: random.Random, exponentials: bool = True) -> Bound:
    bound = Bound.constant(rng.randint(0, 3))
    for _ in range(rng.randint(1, 3)):
        term = Bound.constant(rng.randint(1, 4))
        for _ in range(rng.randint(0, 2)):
            term = term * rng.choice(VARIABLES)
        if exponentials and rng.random() < 0.2:
            term = term * Bound.power(rng.randint(2, 3), rng.choice(VARIABLES) + rng.randint(0, 2))
        bound = bound + term
    return bound


def random_polynomial(rng: random.Random) -> Polynomial:
    poly = Polynomial.constant(Fraction(rng.randint(-6, 6), rng.randint(1, 3)))
    for _ in range(rng.randint(1, 3)):
        monomial = Polynomial.constant(Fraction(rng.randint(-5, 5), rng.randint(1, 2)))
        for _ in range(rng.randint(0, 2)):
            monomial = monomial * Polynomial.variable(rng.choice(NAMES))
        poly = poly + monomial
    return poly


def random_state(rng: random.Random, low: int = -6, high: int = 6) -> dict:
    return {name: rng.randint(low, high) for name in NAMES}


class TestAlgebraLaws(unittest.TestCase):
    """ Tests the bound algebra on random bounds and states."""

    def test_monotone(self):
        rng = random.Random(11)
        for _ in range(RANDOM_CASES):
            bound = random_bound(rng)
            state = random_state(rng)
            grown = {name: value + rng.randint(0, 3) * (1 if value >= 0 else -1) for name, value in state.items()}
            with self.subTest(bound=str(bound), state=state, grown=grown):
                self.assertLessEqual(bound.eval_abs(state), bound.eval_abs(grown))

    def test_sum_and_product(self):
        rng = random.Random(12)
        for _ in range(RANDOM_CASES):
            left, right = random_bound(rng, False), random_bound(rng, False)
            state = random_state(rng, -4, 4)
            with self.subTest(left=str(left), right=str(right), state=state):
                self.assertEqual((left + right).eval_abs(state), left.eval_abs(state) + right.eval_abs(state))
                self.assertEqual((left * right).eval_abs(state), left.eval_abs(state) * right.eval_abs(state))

    def test_overapproximation_is_sound(self):
        rng = random.Random(13)
        for _ in range(RANDOM_CASES):
            poly = random_polynomial(rng)
            state = random_state(rng)
            with self.subTest(poly=str(poly), state=state):
                self.assertGreaterEqual(overapprox_poly(poly).eval_abs(state), abs(poly.evaluate(state)))

    def test_substitution_composes(self):
        rng = random.Random(14)
        for _ in range(RANDOM_CASES):
            bound = random_bound(rng)
            mapping = {name: random_bound(rng, False) for name in NAMES if rng.random() < 0.7}
            state = random_state(rng, -3, 3)
            inner = dict(state)
            inner.update({name: replacement.eval_abs(state) for name, replacement in mapping.items()})
            with self.subTest(bound=str(bound), mapping={k: str(v) for k, v in mapping.items()}, state=state):
                self.assertEqual(bound.substitute(mapping).eval_abs(state), bound.eval_abs(inner))



if __name__ == '__main__':
    unittest.main()
