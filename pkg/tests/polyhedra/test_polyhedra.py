""" Test constraints, projection and strongest postconditions.

Ensure that:
- Atoms are tightened to a canonical integer form.
- Projection keeps exactly the consequences over the kept variables.
- Postconditions describe the states after a transition over program variables only.
"""

import unittest

from ITSBound.polyhedra import project, propagate
from ITSBound.polynomials import Atom, Constraint, Polynomial
from ITSBound.program import Transition
from ITSBound.solver import Z3Backend, entails, is_unsat
from tests.test_utils import load_program


x = Polynomial.variable("x")
y = Polynomial.variable("y")
z = Polynomial.variable("z")


class TestAtoms(unittest.TestCase):
    """ Tests the canonical form of atoms and constraints."""

    def test_tightening(self):
        self.assertEqual(Atom(Polynomial.linear({"x": 2}, 1)), Atom.lt(x, 0))
        self.assertEqual(Atom(Polynomial.linear({"x": 3, "y": 3}, -4)), Atom.le(x + y, 1))
        self.assertEqual(Atom.gt(x, 0), Atom.ge(x, 1))

    def test_printing(self):
        self.assertEqual(str(Atom.lt(x, 0)), "x < 0")
        self.assertEqual(str(Atom.ge(y, z)), "z <= y")

    def test_negate(self):
        self.assertEqual(Atom.lt(x, 0).negate(), Atom.ge(x, 0))
        self.assertEqual(Atom.le(x, y).negate().negate(), Atom.le(x, y))

    def test_constant_atoms(self):
        self.assertTrue(Atom(Polynomial.constant(-3)).is_true())
        self.assertTrue(Atom(Polynomial.constant(2)).is_false())

    def test_constraint_normal_form(self):
        a, b = Atom.lt(x, 0), Atom.ge(y, z)
        self.assertEqual(Constraint.of([a, b, a]), Constraint.of([b, a]))
        self.assertTrue(Constraint.of([Atom(Polynomial.constant(-1))]).is_true())
        self.assertTrue(Constraint.of([Atom(Polynomial.constant(1)), a]).is_false())
        self.assertEqual(str(Constraint.TRUE), "true")


class TestProjection(unittest.TestCase):
    """ Tests eliminating variables."""

    def test_chain(self):
        constraint = Constraint.of([Atom.le(x, y), Atom.le(y, 3)])
        self.assertEqual(project(constraint, {"x"}), Constraint.of([Atom.le(x, 3)]))

    def test_equality(self):
        constraint = Constraint.of(Atom.equal(y, x + 1) + (Atom.ge(y, 5),))
        self.assertEqual(project(constraint, {"x"}), Constraint.of([Atom.ge(x, 4)]))

    def test_nothing_left(self):
        constraint = Constraint.of([Atom.le(x, y)])
        self.assertTrue(project(constraint, {"z"}).is_true())


class TestPropagate(unittest.TestCase):
    """ Tests strongest postconditions of transitions."""

    @classmethod
    def setUpClass(cls):
        cls.backend = Z3Backend()

    def test_phase_switch(self):
        program = load_program("phases.koat")
        post = propagate(Constraint.of([Atom.lt(x, 0)]), program.transition("t2"))
        self.assertTrue(post.variables() <= {"x", "y", "z"})
        self.assertTrue(entails(post, Atom.lt(x, 0), self.backend))
        self.assertTrue(entails(post, Atom.le(x + y, z - 1), self.backend))
        self.assertFalse(entails(post, Atom.ge(y, z), self.backend))

    def test_increment_leaves_negative_range(self):
        program = load_program("phases.koat")
        post = propagate(Constraint.of([Atom.lt(x, 0)]), program.transition("t3"))
        self.assertTrue(entails(post, Atom.le(x, 0), self.backend))
        self.assertFalse(entails(post, Atom.lt(x, 0), self.backend))
        self.assertTrue(entails(post, Atom.ge(y, z), self.backend))

    def test_guard_and_update(self):
        program = load_program("bounded_counter.koat")
        post = propagate(Constraint.TRUE, program.transition("t1"))
        self.assertTrue(entails(post, Atom.ge(x, 2), self.backend))
        self.assertTrue(entails(post, Atom.le(x, 4), self.backend))
        self.assertNotIn("w", post.variables())

    def test_temporary_assignment(self):
        program = load_program("bounded_counter.koat")
        self.assertTrue(propagate(Constraint.TRUE, program.transition("t0")).is_true())

    def test_unsatisfiable_premise(self):
        program = load_program("phases.koat")
        post = propagate(Constraint.of([Atom.ge(x, 0)]), program.transition("t1"))
        self.assertTrue(is_unsat(post, self.backend))

    def test_nonlinear_update(self):
        t = Transition.make("t1", "l1", "l2", ("x", "y"), update={"x": x * x})
        post = propagate(Constraint.of([Atom.ge(x, 2), Atom.ge(y, 1)]), t)
        self.assertNotIn("x", post.variables())
        self.assertTrue(entails(post, Atom.ge(y, 1), self.backend))


if __name__ == '__main__':
    unittest.main()
