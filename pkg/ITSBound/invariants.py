#!/usr/bin/env python3
# -*- coding: utf-8 -*-
#
# This file is part of ITSBound, a runtime-complexity analyzer for integer
# transition systems.
#
# This program is free software: you can redistribute it and/or modify it
# under the terms of the GNU General Public License as published by the Free
# Software Foundation, either version 3 of the License, or (at your option)
# any later version.
#
# This program is distributed in the hope that it will be useful, but WITHOUT
# ANY WARRANTY; without even the implied warranty of MERCHANTABILITY or
# FITNESS FOR A PARTICULAR PURPOSE. See the included LICENSE file for details.

"""Interval invariants per location, used to strengthen guards before the analysis."""

import math
from fractions import Fraction
from dataclasses import dataclass
from typing import Dict, List, Mapping, Optional

from ITSBound.polyhedra import project, propagate
from ITSBound.polynomials import Atom, Constraint, Polynomial
from ITSBound.program import IntegerProgram, Location, location_key, natural_key

import logging
log = logging.getLogger('ITSBound')

WIDEN_AFTER = 3


@dataclass(frozen=True)
class Interval:
    """[low, high] with None for an open end."""
    low: Optional[int] = None
    high: Optional[int] = None

    def is_empty(self) -> bool:
        return self.low is not None and self.high is not None and self.low > self.high

    def join(self, other: 'Interval') -> 'Interval':
        low = None if self.low is None or other.low is None else min(self.low, other.low)
        high = None if self.high is None or other.high is None else max(self.high, other.high)
        return Interval(low, high)

    def widen(self, other: 'Interval') -> 'Interval':
        """Drop every end that `other` moved outwards."""
        low = self.low if self.low is not None and other.low is not None and other.low >= self.low else None
        high = self.high if self.high is not None and other.high is not None and other.high <= self.high else None
        return Interval(low, high)

    def atoms(self, var: str) -> List[Atom]:
        x = Polynomial.variable(var)
        found = []
        if self.low is not None:
            found.append(Atom.ge(x, self.low))
        if self.high is not None:
            found.append(Atom.le(x, self.high))
        return found


TOP = Interval()
Box = Dict[str, Interval]


def box_constraint(box: Mapping[str, Interval]) -> Constraint:
    return Constraint.of(atom for var in sorted(box) for atom in box[var].atoms(var))


def _interval_of(constraint: Constraint, var: str) -> Interval:
    """Tightest interval for `var` that the single-variable atoms of the projection give."""
    low, high = None, None
    for atom in project(constraint, {var}).atoms:
        coefficient = atom.poly.linear_part().get(var, 0)
        rest = atom.poly.constant_term
        if coefficient > 0:
            value = math.floor(Fraction(-rest) / coefficient)
            high = value if high is None else min(high, value)
        elif coefficient < 0:
            value = math.ceil(Fraction(-rest) / coefficient)
            low = value if low is None else max(low, value)
    return Interval(low, high)


def _join_boxes(left: Box, right: Box) -> Box:
    return {var: left[var].join(right[var]) for var in left}


def _widen_boxes(left: Box, right: Box) -> Box:
    return {var: left[var].widen(right[var]) for var in left}


class IntervalAnalysis():
    """Forward fixpoint over interval boxes, one box per reachable location.

        Parameters:
            program: (IntegerProgram): The program to analyse.
            widen_after: (int): OPTIONAL - Number of growing updates of a location before widening kicks in.
    """

    def __init__(self, program: IntegerProgram, widen_after: int = WIDEN_AFTER):
        self.program = program
        self.widen_after = widen_after

    def post(self, box: Box, t) -> Optional[Box]:
        result = propagate(box_constraint(box), t)
        if result.is_false():
            return None
        box = {var: _interval_of(result, var) for var in self.program.program_vars}
        if any(i.is_empty() for i in box.values()):
            return None
        return box

    def run(self) -> Dict[Location, Box]:
        boxes: Dict[Location, Box] = {self.program.initial: {var: TOP for var in self.program.program_vars}}
        updates: Dict[Location, int] = {}
        changed = True
        while changed:
            changed = False
            for t in sorted(self.program.transitions, key=lambda t: natural_key(t.id)):
                if t.source not in boxes:
                    continue
                new = self.post(boxes[t.source], t)
                if new is None:
                    continue
                old = boxes.get(t.target)
                if old is None:
                    boxes[t.target] = new
                    changed = True
                    continue
                joined = _join_boxes(old, new)
                if joined == old:
                    continue
                updates[t.target] = updates.get(t.target, 0) + 1
                if updates[t.target] >= self.widen_after:
                    joined = _widen_boxes(old, joined)
                boxes[t.target] = joined
                changed = True
        for location in sorted(boxes, key=location_key):
            log.debug("Interval invariant at {0}: {1}".format(location, box_constraint(boxes[location])))
        return boxes


def interval_invariants(program: IntegerProgram, widen_after: int = WIDEN_AFTER) -> Dict[Location, Constraint]:
    return {location: box_constraint(box) for location, box in IntervalAnalysis(program, widen_after).run().items()}


def strengthen_guards(program: IntegerProgram, widen_after: int = WIDEN_AFTER) -> IntegerProgram:
    """Conjoin the invariant of each source location to the guards of its outgoing transitions."""
    invariants = interval_invariants(program, widen_after)
    strengthened = []
    for t in program.transitions:
        invariant = invariants.get(t.source)
        if invariant is None or invariant.is_true():
            strengthened.append(t)
        else:
            strengthened.append(t.with_endpoints(guard=t.guard.conjoin(invariant)))
    return program.with_transitions(strengthened)
