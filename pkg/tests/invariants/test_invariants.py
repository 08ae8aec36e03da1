""" Test interval invariants.

Ensure that:
- Intervals join and widen as expected.
- The fixpoint reaches every reachable location and widens growing loops.
- Unreachable locations get no invariant.
- Guards are strengthened with the invariant of their source location.
"""

import unittest

from ITSBound.invariants import TOP, Interval, IntervalAnalysis, interval_invariants, strengthen_guards
from ITSBound.polynomials import Atom, Constraint, Polynomial
from ITSBound.program import IntegerProgram, Transition
from tests.test_utils import load_program


x = Polynomial.variable("x")


def counter_program():
    return IntegerProgram.build(("x",), "l0", [
        Transition.make("t0", "l0", "l1", ("x",), update={"x": Polynomial.constant(0)}),
        Transition.make("t1", "l1", "l1", ("x",), guard=Constraint.of([Atom.lt(x, 100)]), update={"x": x + 1}),
        Transition.make("t2", "l1", "l2", ("x",), guard=Constraint.of([Atom.ge(x, 100)])),
    ])


class TestIntervals(unittest.TestCase):
    """ Tests the interval domain."""

    def test_join(self):
        self.assertEqual(Interval(0, 2).join(Interval(1, 5)), Interval(0, 5))
        self.assertEqual(Interval(0, 2).join(Interval(None, 1)), Interval(None, 2))
        self.assertEqual(TOP.join(Interval(1, 1)), TOP)

    def test_widen(self):
        self.assertEqual(Interval(0, 2).widen(Interval(0, 3)), Interval(0, None))
        self.assertEqual(Interval(0, 2).widen(Interval(-1, 2)), Interval(None, 2))
        self.assertEqual(Interval(0, 2).widen(Interval(0, 2)), Interval(0, 2))

    def test_atoms(self):
        self.assertEqual(Interval(1, 3).atoms("x"), [Atom.ge(x, 1), Atom.le(x, 3)])
        self.assertEqual(TOP.atoms("x"), [])

    def test_empty(self):
        self.assertTrue(Interval(3, 1).is_empty())
        self.assertFalse(Interval(1, 1).is_empty())
        self.assertFalse(TOP.is_empty())


class TestIntervalAnalysis(unittest.TestCase):
    """ Tests the fixpoint computation."""

    def test_exit_condition(self):
        invariants = interval_invariants(load_program("countdown.koat"))
        self.assertTrue(invariants["loop"].is_true())
        self.assertEqual(invariants["done"], Constraint.of([Atom.le(Polynomial.variable("n"), 0)]))

    def test_unreachable_location(self):
        invariants = interval_invariants(load_program("straight_line.koat"))
        self.assertEqual(invariants["l2"], Constraint.of([Atom.ge(x, 2)]))
        self.assertNotIn("l3", invariants)

    def test_widening(self):
        boxes = IntervalAnalysis(counter_program()).run()
        self.assertEqual(boxes["l1"], {"x": Interval(0, None)})
        self.assertEqual(boxes["l2"], {"x": Interval(100, None)})

    def test_late_widening(self):
        boxes = IntervalAnalysis(counter_program(), widen_after=200).run()
        self.assertEqual(boxes["l1"], {"x": Interval(0, 100)})
        self.assertEqual(boxes["l2"], {"x": Interval(100, 100)})


class TestStrengthening(unittest.TestCase):
    """ Tests adding invariants to guards."""

    def test_guards(self):
        program = counter_program()
        strengthened = strengthen_guards(program)
        t1 = strengthened.transition("t1")
        self.assertIn(Atom.ge(x, 0), t1.guard.atoms)
        self.assertIn(Atom.lt(x, 100), t1.guard.atoms)
        self.assertEqual(strengthened.transition("t0").guard, Constraint.TRUE)
        self.assertEqual([t.id for t in strengthened.transitions], ["t0", "t1", "t2"])


if __name__ == '__main__':
    unittest.main()
