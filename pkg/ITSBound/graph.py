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

"""Graph queries over integer programs: SCCs, entry transitions, paths and reachability."""

from collections import deque
from typing import Dict, FrozenSet, Hashable, Iterable, List, Optional, Tuple

from ITSBound.exceptions import InvalidSubProgram
from ITSBound.program import IntegerProgram, Location, Transition, location_key, natural_key

import logging
log = logging.getLogger('ITSBound')


class Tarjan():
    """Non-recursive Tarjan SCC computation.

    The graph is a dictionary { <vertex> : <successors of vertex> }. Components come
    out of `calculate_scc` in reverse topological order (sinks first).
    """

    def __init__(self, graph: Dict[Hashable, Iterable[Hashable]]):
        self._graph = graph
        self._stack = []
        self._stack_set = set()
        self._index = {}
        self._lowlink = {}
        self._nonrecursive_stack = []
        self._result = []

    def _tarjan_head(self, v):
        self._index[v] = len(self._index)
        self._lowlink[v] = self._index[v]
        self._stack.append(v)
        self._stack_set.add(v)
        it = iter(self._graph.get(v, ()))
        self._nonrecursive_stack.append((it, False, v, None))

    def _tarjan_body(self, it, v):
        for w in it:
            if w not in self._index:
                self._nonrecursive_stack.append((it, True, v, w))
                self._tarjan_head(w)
                return
            if w in self._stack_set:
                self._lowlink[v] = min(self._lowlink[v], self._index[w])
        if self._lowlink[v] == self._index[v]:
            scc = []
            w = None
            while v != w:
                w = self._stack.pop()
                scc.append(w)
                self._stack_set.remove(w)
            self._result.append(scc)

    def calculate_scc(self) -> List[List[Hashable]]:
        for v in self._graph:
            if v not in self._index:
                self._tarjan_head(v)
            while self._nonrecursive_stack:
                it, inside, v, w = self._nonrecursive_stack.pop()
                if inside:
                    self._lowlink[v] = min(self._lowlink[w], self._lowlink[v])
                self._tarjan_body(it, v)
        return self._result


def topological_components(graph: Dict[Hashable, Iterable[Hashable]]) -> List[List[Hashable]]:
    """SCCs of `graph`, each one listed after every component that can reach it."""
    return list(reversed(Tarjan(graph).calculate_scc()))


def location_graph(program: IntegerProgram,
                   transitions: Optional[Iterable[Transition]] = None) -> Dict[Location, List[Location]]:
    transitions = program.transitions if transitions is None else transitions
    graph = {location: [] for location in program.sorted_locations()}
    for t in sorted(transitions, key=lambda t: natural_key(t.id)):
        if t.target not in graph[t.source]:
            graph[t.source].append(t.target)
    return graph


def sccs_topological(program: IntegerProgram,
                     transitions: Optional[Iterable[Transition]] = None) -> List[FrozenSet[Transition]]:
    """Return the non-trivial SCCs as transition sets, in topological order.

    A component counts when it has more than one location or a self-loop. Its
    transitions are those with both endpoints inside it.
    """
    transitions = tuple(program.transitions if transitions is None else transitions)
    result = []
    for component in topological_components(location_graph(program, transitions)):
        members = set(component)
        inner = frozenset(t for t in transitions if t.source in members and t.target in members)
        if inner:
            result.append(inner)
    return result


def transitions_in_cycles(program: IntegerProgram) -> FrozenSet[Transition]:
    found = set()
    for scc in sccs_topological(program):
        found.update(scc)
    return frozenset(found)


def entry_transitions(program: IntegerProgram,
                      sub: Iterable[Transition]) -> Tuple[FrozenSet[Location], FrozenSet[Transition]]:
    """Entry locations and entry transitions of the sub-program `sub`.

    Entry transitions of a location are its incoming transitions from outside `sub`;
    entry locations are the sources of `sub` transitions that have any.
    """
    sub = frozenset(sub)
    if not sub:
        raise InvalidSubProgram("Entry transitions requested for an empty sub-program")
    locations = set()
    entries = set()
    for source in {t.source for t in sub}:
        incoming = [t for t in program.incoming(source) if t not in sub]
        if incoming:
            locations.add(source)
            entries.update(incoming)
    return frozenset(locations), frozenset(entries)


def bfs_distances(transitions: Iterable[Transition], start: Location) -> Dict[Location, int]:
    transitions = sorted(transitions, key=lambda t: natural_key(t.id))
    distances = {start: 0}
    queue = deque([start])
    while queue:
        location = queue.popleft()
        for t in transitions:
            if t.source == location and t.target not in distances:
                distances[t.target] = distances[location] + 1
                queue.append(t.target)
    return distances


def shortest_path(transitions: Iterable[Transition], start: Location,
                  goal: Location) -> Optional[List[Transition]]:
    """Breadth-first shortest transition path from `start` to `goal`, ties broken by transition id."""
    transitions = sorted(transitions, key=lambda t: natural_key(t.id))
    if start == goal:
        return []
    parent: Dict[Location, Transition] = {}
    seen = {start}
    queue = deque([start])
    while queue:
        location = queue.popleft()
        for t in transitions:
            if t.source != location or t.target in seen:
                continue
            seen.add(t.target)
            parent[t.target] = t
            if t.target == goal:
                path = []
                cursor = goal
                while cursor != start:
                    path.append(parent[cursor])
                    cursor = parent[cursor].source
                return list(reversed(path))
            queue.append(t.target)
    return None


def reachable_locations(program: IntegerProgram) -> FrozenSet[Location]:
    return frozenset(bfs_distances(program.transitions, program.initial))


def remove_unreachable(program: IntegerProgram) -> IntegerProgram:
    reachable = reachable_locations(program)
    kept = [t for t in program.transitions if t.source in reachable]
    removed = len(program.transitions) - len(kept)
    if removed:
        log.debug("Removed {0} unreachable transitions".format(removed))
    return program.with_transitions(kept)
