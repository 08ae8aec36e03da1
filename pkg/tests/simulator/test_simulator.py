""" Test the exhaustive simulator.

Ensure that:
- Single steps follow guards and updates.
- Exploration reports the longest run and per-transition counts over all choices.
- Runs that do not terminate within the fuel are flagged as truncated.
- Prefix counts are grouped by location and state.
"""

import unittest
from collections import Counter

from ITSBound.simulator import Configuration, RunSummary, explore, max_applications, step, trace_multiset
from tests.test_utils import load_program


class TestStep(unittest.TestCase):
    """ Tests applying single transitions."""

    def setUp(self):
        self.program = load_program("nested_loops.koat")

    def test_outer_then_inner(self):
        start = Configuration.of("l1", {"x": 0, "y": 0, "z": 2}, self.program.program_vars)
        middle = step(self.program, start, self.program.transition("t1"), {})
        self.assertEqual(middle, Configuration("l2", (("x", 1), ("y", 1), ("z", 2))))
        after = step(self.program, middle, self.program.transition("t2"), {})
        self.assertEqual(after.location, "l2")
        self.assertEqual(after.as_dict(), {"x": 2, "y": 0, "z": 2})

    def test_disabled(self):
        blocked = Configuration.of("l1", {"x": 0, "y": 0, "z": 0}, self.program.program_vars)
        self.assertIsNone(step(self.program, blocked, self.program.transition("t1"), {}))
        elsewhere = Configuration.of("l2", {"x": 0, "y": 0, "z": 2}, self.program.program_vars)
        self.assertIsNone(step(self.program, elsewhere, self.program.transition("t1"), {}))

    def test_temporary_variables(self):
        program = load_program("bounded_counter.koat")
        start = Configuration.of("l0", {"x": 0, "y": 0}, program.program_vars)
        after = step(program, start, program.transition("t0"), {"u": -3})
        self.assertEqual(after.as_dict(), {"x": -3, "y": 0})


class TestExplore(unittest.TestCase):
    """ Tests enumerating all runs."""

    def test_countdown(self):
        summary = explore(load_program("countdown.koat"), {"n": 5})
        self.assertEqual(summary.length, 7)
        self.assertEqual(summary.counts, {"t0": 1, "t1": 5, "t2": 1})
        self.assertEqual(summary.max_abs[("t0", "n")], 5)
        self.assertFalse(summary.truncated)

    def test_immediate_exit(self):
        summary = explore(load_program("countdown.koat"), {"n": -3})
        self.assertEqual(summary.length, 2)
        self.assertNotIn("t1", summary.counts)

    def test_blocked_loop(self):
        summary = explore(load_program("diverging.koat"), {"x": 0})
        self.assertEqual(summary.length, 1)
        self.assertFalse(summary.truncated)

    def test_divergence_is_truncated(self):
        summary = explore(load_program("diverging.koat"), {"x": 1}, fuel=50)
        self.assertTrue(summary.truncated)

    def test_nested_loops(self):
        summary = explore(load_program("nested_loops.koat"), {"x": 0, "y": 0, "z": 2})
        self.assertFalse(summary.truncated)
        # z=2: the inner loop runs 4 times from (1,1), the second outer round starts at (0,0)
        self.assertEqual(summary.counts, {"t0": 1, "t1": 2, "t2": 4, "t3": 2})
        self.assertEqual(summary.length, 9)

    def test_max_applications(self):
        self.assertEqual(max_applications(load_program("countdown.koat"), {"n": 4}, ["t1"]), (4, False))
        program = load_program("bounded_counter.koat")
        self.assertEqual(max_applications(program, {"x": 0, "y": 1}, ["t1"], tv_box=(-2, 3)), (3, False))

    def test_merge(self):
        left = RunSummary(3, {"t1": 2}, {("t1", "x"): 4}, False, 1)
        right = RunSummary(5, {"t1": 1, "t2": 1}, {("t1", "x"): 2}, True, 0)
        merged = left.merge(right)
        self.assertEqual(merged.length, 5)
        self.assertEqual(merged.counts, {"t1": 2, "t2": 1})
        self.assertEqual(merged.max_abs, {("t1", "x"): 4})
        self.assertTrue(merged.truncated)
        self.assertEqual(merged.group, 1)


class TestTraceMultiset(unittest.TestCase):
    """ Tests counting run prefixes."""

    def test_countdown(self):
        traces = trace_multiset(load_program("countdown.koat"), {"n": 2}, 3)
        expected = Counter({
            (0, "start", (("n", 2),)): 1,
            (1, "loop", (("n", 2),)): 1,
            (2, "loop", (("n", 1),)): 1,
            (3, "loop", (("n", 0),)): 1,
        })
        self.assertEqual(traces, expected)

    def test_choices_are_counted(self):
        traces = trace_multiset(load_program("bounded_counter.koat"), {"x": 0, "y": 0}, 1, tv_box=(1, 2))
        self.assertEqual(traces[(1, "l1", (("x", 1), ("y", 0)))], 1)
        self.assertEqual(traces[(1, "l1", (("x", 2), ("y", 0)))], 1)
        self.assertEqual(sum(count for (k, _, _), count in traces.items() if k == 1), 2)


if __name__ == '__main__':
    unittest.main()
