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

"""Control-flow refinement by partial evaluation.

Locations of a strongly connected component are split into copies ⟨l, φ⟩ where φ is a
conjunction of atoms from a finite abstraction layer for l. Each copy only admits the
runs whose states satisfy φ when they reach l, so phases of a loop become separate
components. Runs of the refined program correspond one to one to runs of the original
program, with the same lengths.
"""

from collections import deque
from typing import Dict, FrozenSet, Iterable, List, Mapping, Optional, Sequence, Set, Tuple

from ITSBound.exceptions import InvalidSubProgram
from ITSBound.graph import entry_transitions, remove_unreachable, sccs_topological, shortest_path
from ITSBound.polyhedra import propagate
from ITSBound.polynomials import Atom, Constraint
from ITSBound.program import (IntegerProgram, LabeledLocation, Location, Transition, fresh_id,
                              location_key, natural_key, transition_ids)
from ITSBound.solver import SolverBackend, entails, is_unsat

import logging
log = logging.getLogger('ITSBound')

AbstractionLayer = Dict[Location, Tuple[Atom, ...]]


def _sorted(transitions: Iterable[Transition]) -> List[Transition]:
    return sorted(transitions, key=lambda t: natural_key(t.id))


def _locations_of(transitions: Iterable[Transition]) -> Set[Location]:
    found = set()
    for t in transitions:
        found.add(t.source)
        found.add(t.target)
    return found


def build_abstraction_layer(program: IntegerProgram, scc: Iterable[Transition]) -> AbstractionLayer:
    """Harvest the abstraction layer of every location of `scc`.

    A location gets the program-variable atoms of the guards of all component transitions
    touching it, followed by the atoms of the postconditions of the component transitions
    entering it.
    """
    scc = _sorted(scc)
    program_vars = set(program.program_vars)
    layer: AbstractionLayer = {}
    for location in sorted(_locations_of(scc), key=location_key):
        atoms: List[Atom] = []

        def collect(candidates):
            for atom in candidates:
                if atom.is_linear() and atom.variables() <= program_vars and atom not in atoms:
                    atoms.append(atom)

        for t in scc:
            if location in (t.source, t.target):
                collect(t.guard.atoms)
        for t in scc:
            if t.target == location:
                post = propagate(Constraint.TRUE, t)
                if not post.is_false():
                    collect(post.atoms)
        layer[location] = tuple(atoms)
    return layer


def abstract(layer: Mapping[Location, Sequence[Atom]], location: Location, phi: Constraint,
             backend: Optional[SolverBackend] = None) -> Constraint:
    """The conjunction of those atoms of the layer at `location` that `phi` entails.

    Locations without a layer abstract to `true`.
    """
    return Constraint.of(atom for atom in layer.get(location, ()) if entails(phi, atom, backend))


def _cleanup(program: IntegerProgram, backend: Optional[SolverBackend]) -> IntegerProgram:
    kept = [t for t in program.transitions if not is_unsat(t.guard, backend)]
    return remove_unreachable(program.with_transitions(kept))


class PartialEvaluator():
    """Refines one strongly connected component of a program.

        Parameters:
            program: (IntegerProgram): The program to refine.
            scc: (iterable): Transitions of a non-trivial strongly connected component.
            layer: (dict): OPTIONAL - Abstraction layer per location. Harvested from the component when left out.
            backend: (SolverBackend): OPTIONAL - Solver for entailment and satisfiability checks.
            taken: (set): OPTIONAL - Transition ids fresh copies must avoid. Updated in place.
    """

    def __init__(self, program: IntegerProgram, scc: Iterable[Transition],
                 layer: Optional[AbstractionLayer] = None, backend: Optional[SolverBackend] = None,
                 taken: Optional[Set[str]] = None):
        self.program = program
        self.scc = frozenset(scc)
        if not self.scc:
            raise InvalidSubProgram("Partial evaluation needs a non-empty component")
        self.layer = layer if layer is not None else build_abstraction_layer(program, self.scc)
        self.backend = backend
        self.scc_locations = _locations_of(self.scc)
        self._taken = taken if taken is not None else {t.id for t in program.transitions}
        self.done: List[LabeledLocation] = []

    def _copy(self, t: Transition, source: Location, target: Location, guard: Constraint) -> Transition:
        return t.with_endpoints(source=source, target=target, id=fresh_id(t.id, self._taken), guard=guard)

    def run(self) -> IntegerProgram:
        entry_locations, _ = entry_transitions(self.program, self.scc)
        result: List[Transition] = []
        for t in self.program.transitions:
            if t in self.scc:
                continue
            if t.source in self.scc_locations:
                continue
            if t.target in self.scc_locations:
                result.append(t.with_endpoints(target=LabeledLocation(t.target, Constraint.TRUE)))
            else:
                result.append(t)
        start = [LabeledLocation(location, Constraint.TRUE) for location in sorted(entry_locations, key=location_key)]
        seen = set(start)
        queue = deque(start)
        leaving = _sorted(t for t in self.program.transitions
                          if t not in self.scc and t.source in self.scc_locations)
        inside = _sorted(self.scc)
        while queue:
            current = queue.popleft()
            self.done.append(current)
            phi = current.label
            for t in inside:
                if t.source != current.base:
                    continue
                guard = phi.conjoin(t.guard)
                if is_unsat(guard, self.backend):
                    continue
                label = abstract(self.layer, t.target, propagate(phi, t), self.backend)
                successor = LabeledLocation(t.target, label)
                if successor not in seen:
                    seen.add(successor)
                    queue.append(successor)
                result.append(self._copy(t, current, successor, guard))
            for t in leaving:
                if t.source != current.base:
                    continue
                guard = phi.conjoin(t.guard)
                if is_unsat(guard, self.backend):
                    continue
                target = t.target
                if target in self.scc_locations:
                    target = LabeledLocation(target, Constraint.TRUE)
                result.append(self._copy(t, current, target, guard))
        log.debug("Partial evaluation of {0} produced {1} locations".format(transition_ids(self.scc), len(self.done)))
        return _cleanup(self.program.with_transitions(result), self.backend)


def partial_evaluate_scc(program: IntegerProgram, scc: Iterable[Transition],
                         layer: Optional[AbstractionLayer] = None,
                         backend: Optional[SolverBackend] = None) -> IntegerProgram:
    """Refine a whole strongly connected component."""
    return PartialEvaluator(program, scc, layer, backend).run()


def _piece_for(scc: FrozenSet[Transition], t: Transition) -> Set[Transition]:
    """Shortest return path from the target of `t` to its source, `t`, and everything parallel to them."""
    path = shortest_path(scc, t.target, t.source)
    if path is None:
        raise InvalidSubProgram("No path back from {0} to {1} inside the component".format(t.target, t.source))
    piece = set(path) | {t}
    endpoints = {(u.source, u.target) for u in piece}
    piece.update(u for u in scc if (u.source, u.target) in endpoints)
    return piece


def _merge_pieces(pieces: List[Set[Transition]]) -> List[Set[Transition]]:
    merged = [set(piece) for piece in pieces]
    changed = True
    while changed:
        changed = False
        for i in range(len(merged)):
            for j in range(i + 1, len(merged)):
                if _locations_of(merged[i]) & _locations_of(merged[j]):
                    merged[i] |= merged.pop(j)
                    changed = True
                    break
            if changed:
                break
    return merged


def _entry_name(program: IntegerProgram) -> str:
    taken = {location_key(location) for location in program.locations}
    name = "cfr_entry"
    index = 1
    while name in taken:
        name = "cfr_entry_{0}".format(index)
        index += 1
    return name


def _refine_piece(program: IntegerProgram, piece: Set[Transition],
                  backend: Optional[SolverBackend]) -> IntegerProgram:
    locations = _locations_of(piece)
    entering = _sorted(t for t in program.transitions if t not in piece and t.target in locations)
    leaving = _sorted(t for t in program.transitions if t not in piece and t.source in locations)
    start = _entry_name(program)
    taken = {t.id for t in program.transitions}
    sub = IntegerProgram.build(program.program_vars, start,
                               [t.with_endpoints(source=start) for t in entering] + list(piece))
    refined = PartialEvaluator(sub, piece, backend=backend, taken=taken).run()

    labeled = sorted((location for location in refined.locations
                      if isinstance(location, LabeledLocation) and location.base in locations),
                     key=location_key)
    result = [t for t in program.transitions
              if t not in piece and t.source not in locations and t.target not in locations]
    result.extend(t for t in refined.transitions if t.source != start)
    for t in entering:
        if t.source in locations:
            continue
        result.append(t.with_endpoints(target=LabeledLocation(t.target, Constraint.TRUE)))
    for t in leaving:
        target = LabeledLocation(t.target, Constraint.TRUE) if t.target in locations else t.target
        for copy_source in labeled:
            if copy_source.base != t.source:
                continue
            guard = copy_source.label.conjoin(t.guard)
            if is_unsat(guard, backend):
                continue
            result.append(t.with_endpoints(source=copy_source, target=target,
                                           id=fresh_id(t.id, taken), guard=guard))
    return program.with_transitions(result)


def partial_evaluate_subscc(program: IntegerProgram, t_cfr: Iterable[Transition],
                            backend: Optional[SolverBackend] = None) -> IntegerProgram:
    """Refine only the cycles through `t_cfr` inside their strongly connected component."""
    t_cfr = frozenset(t_cfr)
    if not t_cfr:
        raise InvalidSubProgram("Refinement requested for an empty set of transitions")
    owners = [scc for scc in sccs_topological(program) if t_cfr <= scc]
    if not owners:
        raise InvalidSubProgram("Transitions {0} are not inside one component".format(transition_ids(t_cfr)))
    scc = owners[0]
    pieces = _merge_pieces([_piece_for(scc, t) for t in _sorted(t_cfr)])
    refined = program
    for piece in pieces:
        log.debug("Refining {0}".format(transition_ids(piece)))
        refined = _refine_piece(refined, piece, backend)
    return _cleanup(refined, backend)
