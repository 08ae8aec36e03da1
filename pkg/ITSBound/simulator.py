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

"""Exhaustive execution of small programs with bounded nondeterminism.

Temporary variables range over a small box, so every run can be enumerated. The
results are exact for that fragment only and serve as a test oracle for the bounds.
"""

import itertools
from collections import Counter
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, List, Mapping, NamedTuple, Optional, Tuple

from ITSBound.program import IntegerProgram, Location, Transition, erase_label, natural_key

import logging
log = logging.getLogger('ITSBound')

FUEL = 10 ** 4
TOTAL_FUEL = 10 ** 6
TV_BOX = (-4, 4)


class Configuration(NamedTuple):
    location: Location
    state: Tuple[Tuple[str, int], ...]

    @classmethod
    def of(cls, location: Location, state: Mapping[str, int], program_vars: Iterable[str]) -> 'Configuration':
        return cls(location, tuple((var, int(state[var])) for var in program_vars))

    def as_dict(self) -> Dict[str, int]:
        return dict(self.state)


@dataclass
class RunSummary:
    """Worst case over a set of runs.

    `length`, `counts`, `max_abs` and `group` are pointwise maxima; `group` is the
    largest number of applications of the watched transitions in a single run.
    """
    length: int = 0
    counts: Dict[str, int] = field(default_factory=dict)
    max_abs: Dict[Tuple[str, str], int] = field(default_factory=dict)
    truncated: bool = False
    group: int = 0

    def merge(self, other: 'RunSummary') -> 'RunSummary':
        counts = dict(self.counts)
        for t, n in other.counts.items():
            counts[t] = max(counts.get(t, 0), n)
        max_abs = dict(self.max_abs)
        for key, n in other.max_abs.items():
            max_abs[key] = max(max_abs.get(key, 0), n)
        return RunSummary(max(self.length, other.length), counts, max_abs,
                          self.truncated or other.truncated, max(self.group, other.group))

    def extend(self, t: Transition, state: Tuple[Tuple[str, int], ...], watched: FrozenSet[str]) -> 'RunSummary':
        """The summary of `t` to a state followed by the runs summarised here."""
        counts = dict(self.counts)
        counts[t.id] = counts.get(t.id, 0) + 1
        max_abs = dict(self.max_abs)
        for var, value in state:
            max_abs[(t.id, var)] = max(max_abs.get((t.id, var), 0), abs(value))
        return RunSummary(self.length + 1, counts, max_abs, self.truncated,
                          self.group + (1 if t.id in watched else 0))


def step(program: IntegerProgram, configuration: Configuration, t: Transition,
         tv_choice: Mapping[str, int]) -> Optional[Configuration]:
    """Apply `t` with the given values for the temporary variables, or None when it is not enabled."""
    if t.source != configuration.location:
        return None
    assignment = configuration.as_dict()
    assignment.update(tv_choice)
    if not t.guard.holds(assignment):
        return None
    return Configuration(t.target, tuple((var, int(poly.evaluate(assignment))) for var, poly in t.update))


class Explorer():
    """Depth-first enumeration of all runs from a configuration, memoised per configuration.

        Parameters:
            program: (IntegerProgram): The program to run.
            tv_box: (tuple): OPTIONAL - Inclusive range of values tried for temporary variables.
            fuel: (int): OPTIONAL - Longest run followed before it counts as truncated.
            total_fuel: (int): OPTIONAL - Guard evaluations allowed in total.
            watched: (iterable): OPTIONAL - Transition ids counted in `RunSummary.group`.
    """

    def __init__(self, program: IntegerProgram, tv_box: Tuple[int, int] = TV_BOX, fuel: int = FUEL,
                 total_fuel: int = TOTAL_FUEL, watched: Iterable[str] = ()):
        self.program = program
        self.tv_box = tv_box
        self.fuel = fuel
        self.total_fuel = total_fuel
        self.watched = frozenset(watched)
        self.steps = 0
        self.memo: Dict[Configuration, RunSummary] = {}
        self._program_vars = frozenset(program.program_vars)

    def choices(self, t: Transition):
        temporaries = sorted(t.variables() - self._program_vars)
        low, high = self.tv_box
        for values in itertools.product(range(low, high + 1), repeat=len(temporaries)):
            yield dict(zip(temporaries, values))

    def successors(self, configuration: Configuration) -> List[Tuple[Transition, Configuration]]:
        found = []
        seen = set()
        for t in sorted(self.program.outgoing(configuration.location), key=lambda t: natural_key(t.id)):
            for choice in self.choices(t):
                self.steps += 1
                following = step(self.program, configuration, t, choice)
                if following is not None and (t.id, following) not in seen:
                    seen.add((t.id, following))
                    found.append((t, following))
        return found

    def summary(self, start: Configuration) -> RunSummary:
        if start in self.memo:
            return self.memo[start]
        # frame: configuration, pending successors, best summary so far, transition that led here
        stack = [[start, iter(self.successors(start)), RunSummary(), None]]
        on_path = {start}
        while stack:
            frame = stack[-1]
            descended = False
            for t, following in frame[1]:
                if following in self.memo:
                    frame[2] = frame[2].merge(self.memo[following].extend(t, following.state, self.watched))
                    continue
                if following in on_path or len(stack) >= self.fuel or self.steps >= self.total_fuel:
                    cut = RunSummary(truncated=True)
                    frame[2] = frame[2].merge(cut.extend(t, following.state, self.watched))
                    continue
                stack.append([following, iter(self.successors(following)), RunSummary(), t])
                on_path.add(following)
                descended = True
                break
            if descended:
                continue
            configuration, _, best, via = stack.pop()
            on_path.discard(configuration)
            self.memo[configuration] = best
            if stack:
                parent = stack[-1]
                parent[2] = parent[2].merge(best.extend(via, configuration.state, self.watched))
        if self.steps >= self.total_fuel:
            log.debug("Exploration stopped after {0} guard evaluations".format(self.steps))
        return self.memo[start]


def explore(program: IntegerProgram, initial_state: Mapping[str, int], fuel: int = FUEL,
            tv_box: Tuple[int, int] = TV_BOX, total_fuel: int = TOTAL_FUEL) -> RunSummary:
    """Worst case over all runs from the start location in `initial_state`."""
    start = Configuration.of(program.initial, initial_state, program.program_vars)
    return Explorer(program, tv_box, fuel, total_fuel).summary(start)


def max_applications(program: IntegerProgram, initial_state: Mapping[str, int], transitions: Iterable[str],
                     fuel: int = FUEL, tv_box: Tuple[int, int] = TV_BOX,
                     location: Optional[Location] = None) -> Tuple[int, bool]:
    """Most applications of the given transition ids in a single run, and whether any run was truncated.

    Runs start in `location` when given, otherwise in the start location.
    """
    start = Configuration.of(program.initial if location is None else location, initial_state,
                             program.program_vars)
    summary = Explorer(program, tv_box, fuel, watched=transitions).summary(start)
    return summary.group, summary.truncated


def trace_multiset(program: IntegerProgram, initial_state: Mapping[str, int], depth: int,
                   tv_box: Tuple[int, int] = TV_BOX) -> Counter:
    """Count the run prefixes of every length up to `depth` by their label-erased end configuration."""
    explorer = Explorer(program, tv_box)
    frontier = Counter({Configuration.of(program.initial, initial_state, program.program_vars): 1})
    traces: Counter = Counter()
    for k in range(depth + 1):
        following: Counter = Counter()
        for configuration, multiplicity in frontier.items():
            traces[(k, erase_label(configuration.location), configuration.state)] += multiplicity
            if k < depth:
                for _, successor in explorer.successors(configuration):
                    following[successor] += multiplicity
        frontier = following
    return traces
