""" Test control-flow refinement by partial evaluation.

Ensure that:
- Abstraction layers only hold linear atoms over program variables.
- Refining a component splits a loop with phases into one component per phase.
- Refining the cycles of a single transition leaves the rest of the component alone.
- Refined programs have exactly the runs of the original program, for fixtures and random programs alike.
- Invalid refinement requests fail verbosely.
"""

import itertools
import unittest

from ITSBound.cfr import abstract, build_abstraction_layer, partial_evaluate_scc, partial_evaluate_subscc
from ITSBound.exceptions import InvalidSubProgram
from ITSBound.graph import sccs_topological
from ITSBound.its_parser import format_program, parse_program
from ITSBound.polynomials import Atom, Constraint, Polynomial
from ITSBound.program import LabeledLocation, natural_key
from ITSBound.simulator import trace_multiset
from ITSBound.solver import Z3Backend, entails
from tests.test_utils import load_program, random_program


TRACE_DEPTH = 8


x = Polynomial.variable("x")
y = Polynomial.variable("y")
z = Polynomial.variable("z")

NEGATIVE = Constraint.of([Atom.lt(x, 0)])
CATCHING_UP = Constraint.of([Atom.ge(y, z)])


def labels_of(transitions):
    found = set()
    for t in transitions:
        found.add(t.source)
        found.add(t.target)
    return found


class TestAbstraction(unittest.TestCase):
    """ Tests harvesting and applying abstraction layers."""

    @classmethod
    def setUpClass(cls):
        cls.backend = Z3Backend()

    def test_harvested_layer(self):
        program = load_program("phases.koat")
        layer = build_abstraction_layer(program, sccs_topological(program)[0])
        self.assertEqual(set(layer), {"l1", "l2"})
        for atom in (Atom.lt(x, 0), Atom.lt(y, z), Atom.ge(y, z)):
            self.assertIn(atom, layer["l1"])
        for atoms in layer.values():
            self.assertEqual(len(atoms), len(set(atoms)))
            for atom in atoms:
                self.assertTrue(atom.is_linear())
                self.assertTrue(atom.variables() <= {"x", "y", "z"})

    def test_temporary_atoms_left_out(self):
        program = load_program("bounded_counter.koat")
        layer = build_abstraction_layer(program, sccs_topological(program)[0])
        for atoms in layer.values():
            for atom in atoms:
                self.assertTrue(atom.variables() <= {"x", "y"})
        self.assertIn(Atom.ge(x, 2), layer["l1"])
        self.assertIn(Atom.le(x, 3), layer["l1"])

    def test_abstract(self):
        layer = {"l1": (Atom.lt(x, 0), Atom.ge(y, z))}
        phi = Constraint.of([Atom.lt(x, -3), Atom.lt(y, z)])
        self.assertEqual(abstract(layer, "l1", phi, self.backend), NEGATIVE)
        self.assertEqual(abstract(layer, "l2", phi, self.backend), Constraint.TRUE)
        self.assertEqual(abstract(layer, "l1", Constraint.TRUE, self.backend), Constraint.TRUE)


class TestComponentRefinement(unittest.TestCase):
    """ Tests refining a whole component."""

    @classmethod
    def setUpClass(cls):
        cls.backend = Z3Backend()
        cls.program = load_program("phases.koat")
        cls.scc = sccs_topological(cls.program)[0]
        layer = {"l1": (Atom.lt(x, 0), Atom.ge(y, z)), "l2": (Atom.lt(x, 0), Atom.ge(y, z))}
        cls.refined = partial_evaluate_scc(cls.program, cls.scc, layer, cls.backend)

    def test_locations(self):
        labeled = {location for location in self.refined.locations if isinstance(location, LabeledLocation)}
        expected = {
            LabeledLocation("l1", Constraint.TRUE),
            LabeledLocation("l2", NEGATIVE),
            LabeledLocation("l1", NEGATIVE),
            LabeledLocation("l1", CATCHING_UP),
            LabeledLocation("l2", NEGATIVE.conjoin(CATCHING_UP)),
        }
        self.assertEqual(labeled, expected)
        self.assertEqual(len(self.refined.locations), 7)
        self.assertIn("l0", self.refined.locations)
        self.assertIn("l3", self.refined.locations)

    def test_phases_become_components(self):
        components = sccs_topological(self.refined)
        self.assertEqual(len(components), 2)
        first, second = components
        self.assertEqual({location.label for location in labels_of(first)}, {NEGATIVE})
        self.assertEqual({t.origin for t in first}, {"t1", "t2"})
        self.assertEqual({t.origin for t in second}, {"t1", "t3"})

    def test_guards_strengthen_originals(self):
        for t in self.refined.transitions:
            original = self.program.transition(t.origin)
            with self.subTest(transition=t.id):
                self.assertTrue(set(original.guard.atoms) <= set(t.guard.atoms))
                self.assertEqual(t.update, original.update)

    def test_entry_keeps_its_id(self):
        t0 = self.refined.transition("t0")
        self.assertEqual(t0.source, "l0")
        self.assertEqual(t0.target, LabeledLocation("l1", Constraint.TRUE))

    def test_ids_unique_and_fresh(self):
        ids = [t.id for t in self.refined.transitions]
        self.assertEqual(len(ids), len(set(ids)))
        for t in self.refined.transitions:
            if t.id != t.origin:
                self.assertTrue(t.id.startswith(t.origin + "_"))

    def test_same_runs(self):
        for state in ({"x": -2, "y": 0, "z": 1}, {"x": -1, "y": 1, "z": 1}, {"x": 1, "y": 0, "z": 0},
                      {"x": -3, "y": -1, "z": 2}):
            with self.subTest(state=state):
                self.assertEqual(trace_multiset(self.program, state, 10),
                                 trace_multiset(self.refined, state, 10))

    def test_harvested_layer_same_runs(self):
        refined = partial_evaluate_scc(self.program, self.scc, backend=self.backend)
        self.assertGreaterEqual(len(sccs_topological(refined)), 1)
        for state in ({"x": -2, "y": 0, "z": 1}, {"x": -1, "y": 2, "z": 0}):
            with self.subTest(state=state):
                self.assertEqual(trace_multiset(self.program, state, 8), trace_multiset(refined, state, 8))

    def test_printable(self):
        again = parse_program(format_program(self.refined))
        self.assertEqual(len(again.transitions), len(self.refined.transitions))
        self.assertEqual(len(again.locations), 7)

    def test_empty_component(self):
        self.assertRaises(InvalidSubProgram, partial_evaluate_scc, self.program, [], None, self.backend)


class TestSubComponentRefinement(unittest.TestCase):
    """ Tests refining only the cycles of chosen transitions."""

    @classmethod
    def setUpClass(cls):
        cls.backend = Z3Backend()
        cls.program = load_program("bounded_counter.koat")
        cls.refined = partial_evaluate_subscc(cls.program, [cls.program.transition("t1")], cls.backend)

    def test_transitions(self):
        self.assertEqual({t.id for t in self.refined.transitions},
                         {"t0", "t1_1", "t1_2", "t2", "t3_1", "t3_2"})
        self.assertEqual(self.refined.transition("t2").target, LabeledLocation("l1", Constraint.TRUE))
        self.assertEqual(self.refined.transition("t0").target, LabeledLocation("l1", Constraint.TRUE))
        self.assertEqual(sorted(t.origin for t in self.refined.transitions if t.origin == "t3"), ["t3", "t3"])

    def test_refined_self_loop(self):
        loops = [t for t in self.refined.transitions if t.origin == "t1" and t.source == t.target]
        self.assertEqual(len(loops), 1)
        guard = loops[0].guard
        self.assertTrue(entails(guard, Atom.ge(x, 2), self.backend))
        self.assertTrue(entails(guard, Atom.le(x, 3), self.backend))

    def test_rest_untouched(self):
        self.assertIn("l2", self.refined.locations)
        self.assertEqual(self.refined.transition("t2").source, "l2")
        self.assertEqual(self.refined.transition("t2").update, self.program.transition("t2").update)

    def test_same_runs(self):
        for state in ({"x": 0, "y": 2}, {"x": 3, "y": 1}, {"x": -1, "y": 0}):
            with self.subTest(state=state):
                self.assertEqual(trace_multiset(self.program, state, 8, tv_box=(-1, 4)),
                                 trace_multiset(self.refined, state, 8, tv_box=(-1, 4)))

    def test_invalid_requests(self):
        self.assertRaises(InvalidSubProgram, partial_evaluate_subscc, self.program, [], self.backend)
        self.assertRaises(InvalidSubProgram, partial_evaluate_subscc, self.program,
                          [self.program.transition("t0")], self.backend)

    def test_nested_loops(self):
        program = load_program("nested_loops.koat")
        refined = partial_evaluate_subscc(program, [program.transition("t2")], self.backend)
        for state in ({"x": 0, "y": 0, "z": 2}, {"x": 1, "y": 1, "z": 1}):
            with self.subTest(state=state):
                self.assertEqual(trace_multiset(program, state, 8), trace_multiset(refined, state, 8))

class TestEquivalence(unittest.TestCase):
    """ Tests refined programs against the original over whole boxes of start states."""

    @classmethod
    def setUpClass(cls):
        cls.backend = Z3Backend()

    def programs(self):
        named = [(name, load_program(name)) for name in
                 ("countdown.koat", "two_phase_loop.koat", "phases.koat", "bounded_counter.koat", "nested_loops.koat")]
        generated = [("seed {0}".format(seed), random_program(seed, temporaries=seed % 4 == 0)) for seed in range(10)]
        return named + generated

    def refinements(self, program):
        for scc in sccs_topological(program):
            first = min(scc, key=lambda t: natural_key(t.id))
            yield "scc", partial_evaluate_scc(program, scc, backend=self.backend)
            yield "sub-scc", partial_evaluate_subscc(program, [first], self.backend)

    def test_same_traces(self):
        compared = 0
        for name, program in self.programs():
            for mode, refined in self.refinements(program):
                for values in itertools.product(range(-2, 3), repeat=len(program.program_vars)):
                    state = dict(zip(program.program_vars, values))
                    with self.subTest(program=name, cfr=mode, state=state):
                        self.assertEqual(trace_multiset(program, state, TRACE_DEPTH, tv_box=(-2, 2)),
                                         trace_multiset(refined, state, TRACE_DEPTH, tv_box=(-2, 2)))
                    compared += 1
        self.assertGreaterEqual(compared, 100)



if __name__ == '__main__':
    unittest.main()
