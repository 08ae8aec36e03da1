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

"""The integer program model: locations, transitions and programs."""

import re
from dataclasses import dataclass, field, replace
from typing import Dict, FrozenSet, Hashable, Iterable, Mapping, Optional, Tuple, Union

from ITSBound.exceptions import InvalidProgram
from ITSBound.polynomials import Constraint, Number, Polynomial

import logging
log = logging.getLogger('ITSBound')

State = Dict[str, int]


def natural_key(text: str):
    """Sort key that orders `t2` before `t10`."""
    return tuple(int(part) if part.isdigit() else part for part in re.split(r"(\d+)", text))


@dataclass(frozen=True)
class LabeledLocation:
    """A copy ⟨base, label⟩ of a location created by partial evaluation."""
    base: Hashable
    label: Constraint

    def __str__(self):
        return "{0}__{1}".format(self.base, self.label.mangle())


Location = Union[str, LabeledLocation]


def location_key(location: Location) -> str:
    return str(location)


def erase_label(location: Location) -> Location:
    while isinstance(location, LabeledLocation):
        location = location.base
    return location


@dataclass(frozen=True)
class Transition:
    """A guarded transition (source, guard, update, target).

    The update lists a polynomial for every program variable, in program-variable order.
    `origin` names the transition of the input program this one was derived from.
    """
    id: str
    source: Location
    target: Location
    guard: Constraint
    update: Tuple[Tuple[str, Polynomial], ...]
    origin: str = field(default="", compare=False)

    def __post_init__(self):
        if not self.origin:
            object.__setattr__(self, 'origin', self.id)

    @classmethod
    def make(cls, id: str, source: Location, target: Location, program_vars: Iterable[str],
             guard: Optional[Constraint] = None, update: Optional[Mapping[str, Polynomial]] = None,
             origin: str = "") -> 'Transition':
        """Build a transition, filling in identity updates for program variables `update` leaves out."""
        update = dict(update or {})
        program_vars = tuple(program_vars)
        unknown = set(update) - set(program_vars)
        if unknown:
            raise InvalidProgram("Transition {0} updates non-program variables {1}".format(id, sorted(unknown)))
        full = tuple((var, update.get(var, Polynomial.variable(var))) for var in program_vars)
        return cls(id, source, target, guard if guard is not None else Constraint.TRUE, full, origin)

    @property
    def update_map(self) -> Dict[str, Polynomial]:
        return dict(self.update)

    def variables(self) -> FrozenSet[str]:
        found = set(self.guard.variables())
        for var, poly in self.update:
            found.add(var)
            found.update(poly.variables())
        return frozenset(found)

    def with_endpoints(self, source: Optional[Location] = None, target: Optional[Location] = None,
                       id: Optional[str] = None, guard: Optional[Constraint] = None) -> 'Transition':
        return replace(self,
                       id=self.id if id is None else id,
                       source=self.source if source is None else source,
                       target=self.target if target is None else target,
                       guard=self.guard if guard is None else guard,
                       origin=self.origin)

    def __str__(self):
        return "{0}: {1} -> {2} [{3}] {{{4}}}".format(
            self.id, self.source, self.target, self.guard,
            ", ".join("{0}:={1}".format(var, poly) for var, poly in self.update if poly != Polynomial.variable(var)))


def transition_ids(transitions: Iterable[Transition]) -> str:
    """Render a transition set as `{t1,t2}`, sorted by id."""
    return "{" + ",".join(sorted((t.id for t in transitions), key=natural_key)) + "}"


@dataclass(frozen=True)
class IntegerProgram:
    """An integer program: program variables, locations, a start location and transitions.

    Instances are immutable; transformations return new programs. Transitions are kept sorted by id.
    """
    program_vars: Tuple[str, ...]
    locations: FrozenSet[Location]
    initial: Location
    transitions: Tuple[Transition, ...]

    def __post_init__(self):
        object.__setattr__(self, 'transitions', tuple(sorted(self.transitions, key=lambda t: natural_key(t.id))))
        object.__setattr__(self, 'locations', frozenset(self.locations) | {self.initial})
        ids = [t.id for t in self.transitions]
        if len(ids) != len(set(ids)):
            raise InvalidProgram("Transition ids are not unique")
        for t in self.transitions:
            if t.target == self.initial:
                raise InvalidProgram("Transition {0} enters the start location {1}".format(t.id, self.initial))
            if t.source not in self.locations or t.target not in self.locations:
                raise InvalidProgram("Transition {0} uses a location outside the program".format(t.id))
            if tuple(var for var, _ in t.update) != self.program_vars:
                raise InvalidProgram("Transition {0} does not update exactly the program variables".format(t.id))

    @classmethod
    def build(cls, program_vars: Iterable[str], initial: Location,
              transitions: Iterable[Transition]) -> 'IntegerProgram':
        """Create a program whose locations are the start location plus all transition endpoints."""
        transitions = tuple(transitions)
        locations = {initial}
        for t in transitions:
            locations.add(t.source)
            locations.add(t.target)
        return cls(tuple(program_vars), frozenset(locations), initial, transitions)

    def with_transitions(self, transitions: Iterable[Transition]) -> 'IntegerProgram':
        return IntegerProgram.build(self.program_vars, self.initial, transitions)

    @property
    def temp_vars(self) -> FrozenSet[str]:
        found = set()
        for t in self.transitions:
            found.update(t.variables())
        return frozenset(found - set(self.program_vars))

    def transition(self, id: str) -> Transition:
        for t in self.transitions:
            if t.id == id:
                return t
        raise KeyError(id)

    def outgoing(self, location: Location) -> Tuple[Transition, ...]:
        return tuple(t for t in self.transitions if t.source == location)

    def incoming(self, location: Location) -> Tuple[Transition, ...]:
        return tuple(t for t in self.transitions if t.target == location)

    def predecessors(self, t: Transition) -> Tuple[Transition, ...]:
        """Transitions that can be applied immediately before `t`."""
        return self.incoming(t.source)

    def successors(self, t: Transition) -> Tuple[Transition, ...]:
        return self.outgoing(t.target)

    def sorted_locations(self):
        return sorted(self.locations, key=location_key)


def fresh_id(base: str, taken: set) -> str:
    """Return `base_<n>` for the smallest n >= 1 not in `taken`, and reserve it."""
    index = 1
    while "{0}_{1}".format(base, index) in taken:
        index += 1
    new_id = "{0}_{1}".format(base, index)
    taken.add(new_id)
    return new_id
