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

"""Multiphase-linear ranking functions: synthesis, local bounds and lifting.

A multiphase ranking function of depth d assigns to every location of a sub-program
linear functions f_1 ... f_d over the program variables. For every step of a
decreasing transition from l to l' and every i:

    f_{i-1}(l) + f_i(l) - f_i(l') - 1 >= 0   (with f_0 = 0)   and   f_d(l) >= 0

For the remaining transitions of the sub-program, f_i(l) >= f_i(l') for every i.
The decreasing transitions can then be applied at most
1 + d!·γ_d·(⌈f_1⌉ + ... + ⌈f_d⌉) times per entry into the sub-program.

Templates are solved with Farkas' lemma over the transition guards.
"""

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Dict, FrozenSet, Iterable, List, Mapping, Optional, Tuple

from ITSBound.bounds import OMEGA, ZERO, AsymptoticClass, Bound, improves, overapprox_poly
from ITSBound.graph import bfs_distances, entry_transitions
from ITSBound.polynomials import Atom, Polynomial
from ITSBound.program import IntegerProgram, Location, Transition, location_key, natural_key, transition_ids
from ITSBound.solver import (LinearAtom, LinearExpr, Sat, SolverBackend, SolverQuery, Unknown,
                             check_sat, entails, REAL)

import logging
log = logging.getLogger('ITSBound')


@lru_cache(maxsize=None)
def gamma(i: int) -> Fraction:
    """γ_1 = 1 and γ_i = 2 + γ_{i-1}/(i-1) + 1/(i-1)!"""
    if i < 1:
        raise ValueError("gamma is defined for i >= 1, got {0}".format(i))
    if i == 1:
        return Fraction(1)
    return 2 + gamma(i - 1) / (i - 1) + Fraction(1, math.factorial(i - 1))


def factorial_gamma(d: int) -> int:
    """d!·γ_d, which is always a natural number."""
    value = math.factorial(d) * gamma(d)
    if value.denominator != 1:
        raise ArithmeticError("{0}!·γ_{0} = {1} is not integral".format(d, value))
    return int(value)


@dataclass(frozen=True)
class MultiphaseRankingFunction:
    depth: int
    functions: Tuple[Dict[Location, Polynomial], ...]
    decreasing: FrozenSet[Transition]
    scope: FrozenSet[Transition]

    def function(self, i: int, location: Location) -> Polynomial:
        """f_i at `location`, 1-based. f_0 is the zero function."""
        if i == 0:
            return Polynomial()
        return self.functions[i - 1].get(location, Polynomial())

    def locations(self):
        found = set()
        for t in self.scope:
            found.add(t.source)
            found.add(t.target)
        return sorted(found, key=location_key)

    def dump(self) -> str:
        lines = []
        for location in self.locations():
            for i in range(1, self.depth + 1):
                lines.append("f_{0}({1}) = {2}".format(i, location, self.function(i, location)))
        lines.append("decreasing: {0}".format(transition_ids(self.decreasing)))
        lines.append("non-increasing: {0}".format(transition_ids(self.scope - self.decreasing)))
        return "\n".join(lines)


# A linear function over program and temporary variables whose coefficients are
# linear expressions over solver unknowns. The key None holds the constant part.
SymbolicLinear = Dict[Optional[str], LinearExpr]


def _sym_add(*parts: Tuple[Fraction, SymbolicLinear]) -> SymbolicLinear:
    result: SymbolicLinear = {}
    for factor, function in parts:
        for key, expr in function.items():
            scaled = expr.scale(factor)
            result[key] = result[key] + scaled if key in result else scaled
    return result


class FarkasEncoding():
    """Builds the solver query for a template of depth `depth` over the locations of `scope`.

        Parameters:
            program: (IntegerProgram): The program the scope belongs to.
            scope: (list): Transitions the template has to cover.
            decreasing: (Transition): The transition that must satisfy the decreasing conditions.
            depth: (int): Number of phases.
    """

    def __init__(self, program: IntegerProgram, scope: Iterable[Transition], decreasing: Transition, depth: int):
        self.program = program
        self.scope = sorted(scope, key=lambda t: natural_key(t.id))
        self.decreasing = decreasing
        self.depth = depth
        self.query = SolverQuery()
        locations = set()
        for t in self.scope:
            locations.add(t.source)
            locations.add(t.target)
        self.locations = sorted(locations, key=location_key)
        self._location_index = {location: index for index, location in enumerate(self.locations)}
        self._multipliers = 0
        self.coefficients: Dict[Tuple[int, Location, Optional[str]], str] = {}
        for i in range(1, depth + 1):
            for location in self.locations:
                for var in list(program.program_vars) + [None]:
                    name = "f{0}_l{1}_{2}".format(i, self._location_index[location], var if var else "0")
                    self.coefficients[(i, location, var)] = self.query.declare(name, REAL)

    def template(self, i: int, location: Location) -> SymbolicLinear:
        if i == 0:
            return {}
        return {var: LinearExpr.of({self.coefficients[(i, location, var)]: 1})
                for var in list(self.program.program_vars) + [None]}

    def composed(self, i: int, t: Transition) -> SymbolicLinear:
        """f_i(target) after the update of `t`, as a function of the pre-state."""
        result: SymbolicLinear = {}
        template = self.template(i, t.target)
        for var, expr in t.update:
            coefficient = template[var]
            if not expr.is_linear():
                self.query.add(LinearAtom(coefficient, "="))
                continue
            for key, value in list(expr.linear_part().items()) + [(None, expr.constant_term)]:
                if value == 0:
                    continue
                scaled = coefficient.scale(value)
                result[key] = result[key] + scaled if key in result else scaled
        constant = template[None]
        result[None] = result[None] + constant if None in result else constant
        return result

    def require_nonnegative(self, function: SymbolicLinear, t: Transition):
        """Farkas: the guard of `t` implies function >= 0."""
        guard = list(t.guard.linear_atoms())
        lambdas = []
        for _ in guard:
            name = self.query.declare("lambda{0}".format(self._multipliers), REAL)
            self._multipliers += 1
            self.query.add(LinearAtom.of({name: -1}))
            lambdas.append(name)
        variables = {key for key in function if key is not None}
        for atom in guard:
            variables.update(atom.variables())
        for var in sorted(variables):
            expr = function.get(var, LinearExpr())
            combination = LinearExpr.of({name: atom.poly.linear_part().get(var, 0)
                                         for name, atom in zip(lambdas, guard)})
            self.query.add(LinearAtom(expr + combination, "="))
        constant = function.get(None, LinearExpr())
        combination = LinearExpr.of({name: atom.poly.constant_term for name, atom in zip(lambdas, guard)})
        self.query.add(LinearAtom(-constant - combination, "<="))

    def add_decreasing(self, t: Transition):
        for i in range(1, self.depth + 1):
            condition = _sym_add((Fraction(1), self.template(i - 1, t.source)),
                                 (Fraction(1), self.template(i, t.source)),
                                 (Fraction(-1), self.composed(i, t)),
                                 (Fraction(1), {None: LinearExpr.of({}, -1)}))
            self.require_nonnegative(condition, t)
        self.require_nonnegative(self.template(self.depth, t.source), t)

    def add_non_increasing(self, t: Transition):
        for i in range(1, self.depth + 1):
            condition = _sym_add((Fraction(1), self.template(i, t.source)),
                                 (Fraction(-1), self.composed(i, t)))
            self.require_nonnegative(condition, t)

    def _absolute_sum(self, names: Iterable[Tuple[str, int]], tag: str) -> LinearExpr:
        """Σ |unknown + shift| through auxiliary unknowns bounded from below."""
        total = LinearExpr()
        for index, (name, shift) in enumerate(names):
            aux = self.query.declare("abs_{0}_{1}".format(tag, index), REAL)
            self.query.add(LinearAtom.of({name: 1, aux: -1}, shift))
            self.query.add(LinearAtom.of({name: -1, aux: -1}, -shift))
            total = total + LinearExpr.of({aux: 1})
        return total

    def add_objectives(self, entry_locations: Iterable[Location]):
        entry = []
        for location in sorted(entry_locations, key=location_key):
            if location not in self._location_index:
                continue
            for i in range(1, self.depth + 1):
                for var in list(self.program.program_vars) + [None]:
                    shift = 1 if (var is None and self.depth == 1) else 0
                    entry.append((self.coefficients[(i, location, var)], shift))
        everything = [(name, 0) for name in self.coefficients.values()]
        self.query.minimize.append(self._absolute_sum(entry, "entry"))
        self.query.minimize.append(self._absolute_sum(everything, "all"))

    def build(self) -> SolverQuery:
        for t in self.scope:
            if t == self.decreasing:
                self.add_decreasing(t)
            else:
                self.add_non_increasing(t)
        entry_locations, _ = entry_transitions(self.program, self.scope)
        self.add_objectives(entry_locations)
        return self.query

    def functions(self, model: Mapping[str, Fraction]) -> Tuple[Dict[Location, Polynomial], ...]:
        result = []
        for i in range(1, self.depth + 1):
            per_location = {}
            for location in self.locations:
                coefficients = {var: model[self.coefficients[(i, location, var)]]
                                for var in self.program.program_vars}
                constant = model[self.coefficients[(i, location, None)]]
                per_location[location] = Polynomial.linear(coefficients, constant)
            result.append(per_location)
        return tuple(result)


def _solve(program: IntegerProgram, scope: List[Transition], target: Transition, depth: int,
           backend: Optional[SolverBackend]) -> Optional[MultiphaseRankingFunction]:
    encoding = FarkasEncoding(program, scope, target, depth)
    result = check_sat(encoding.build(), backend)
    if isinstance(result, Unknown):
        log.warning("No answer for depth {0} ranking function of {1} on scope {2}".format(
            depth, target.id, transition_ids(scope)))
        return None
    if not isinstance(result, Sat):
        return None
    return MultiphaseRankingFunction(depth, encoding.functions(result.model),
                                     frozenset([target]), frozenset(scope))


def _decreasing_atoms(mprf: MultiphaseRankingFunction, t: Transition) -> List[Atom]:
    """The conditions for `t` as decreasing, each as an atom that must follow from the guard."""
    atoms = []
    update = t.update_map
    for i in range(1, mprf.depth + 1):
        after = mprf.function(i, t.target).substitute(update)
        condition = mprf.function(i - 1, t.source) + mprf.function(i, t.source) - after - 1
        atoms.append(Atom.ge(condition, 0))
    atoms.append(Atom.ge(mprf.function(mprf.depth, t.source), 0))
    return atoms


def _non_increasing_atoms(mprf: MultiphaseRankingFunction, t: Transition) -> List[Atom]:
    update = t.update_map
    return [Atom.ge(mprf.function(i, t.source) - mprf.function(i, t.target).substitute(update), 0)
            for i in range(1, mprf.depth + 1)]


def verify(mprf: MultiphaseRankingFunction, backend: Optional[SolverBackend] = None) -> Optional[MultiphaseRankingFunction]:
    """Re-check a witness transition by transition and compute its full decreasing set.

    Returns None when some scope transition satisfies neither set of conditions or when
    no transition is decreasing.
    """
    decreasing = set()
    for t in sorted(mprf.scope, key=lambda t: natural_key(t.id)):
        if all(entails(t.guard, atom, backend) for atom in _decreasing_atoms(mprf, t)):
            decreasing.add(t)
        elif not all(entails(t.guard, atom, backend) for atom in _non_increasing_atoms(mprf, t)):
            log.warning("Ranking function witness fails re-verification on {0}".format(t.id))
            return None
    if not decreasing:
        return None
    return MultiphaseRankingFunction(mprf.depth, mprf.functions, frozenset(decreasing), mprf.scope)


def find_mprf(program: IntegerProgram, target: Transition, scc: Iterable[Transition], depth: int,
              backend: Optional[SolverBackend] = None,
              judge: Optional[Callable[[MultiphaseRankingFunction], AsymptoticClass]] = None
              ) -> Optional[MultiphaseRankingFunction]:
    """Search a depth-`depth` ranking function that decreases `target`, on a scope as large as possible.

    The scope starts as {target}. The other transitions of `scc` are tried in order of
    their source's distance from the target's target (ties by id). A candidate stays in
    the scope when the template is still solvable and, if a `judge` is given, the class
    it assigns does not get worse.
    """
    scc = frozenset(scc)
    if target not in scc:
        raise ValueError("Transition {0} is not part of the given component".format(target.id))
    scope = [target]
    witness = _solve(program, scope, target, depth, backend)
    if witness is None:
        return None
    verdict = judge(witness) if judge is not None else None
    distances = bfs_distances(scc, target.target)
    candidates = sorted(scc - {target}, key=lambda t: (distances.get(t.source, math.inf), natural_key(t.id)))
    for candidate in candidates:
        trial = _solve(program, scope + [candidate], target, depth, backend)
        if trial is None:
            continue
        if judge is not None:
            trial_verdict = judge(trial)
            if trial_verdict > verdict:
                continue
            verdict = trial_verdict
        scope.append(candidate)
        witness = trial
    verified = verify(witness, backend)
    if verified is None or target not in verified.decreasing:
        return None
    log.debug("Depth {0} ranking function for {1}:\n{2}".format(depth, target.id, verified.dump()))
    return verified


def local_bound(mprf: MultiphaseRankingFunction, entry_locations: Iterable[Location],
                program_vars: Optional[Iterable[str]] = None) -> Dict[Location, Bound]:
    """β for every entry location: how often decreasing transitions run per entry into the scope."""
    result = {}
    for location in entry_locations:
        if mprf.depth == 1:
            result[location] = overapprox_poly(mprf.function(1, location) + 1, program_vars)
            continue
        total = ZERO
        for i in range(1, mprf.depth + 1):
            total = total + overapprox_poly(mprf.function(i, location), program_vars)
        result[location] = Bound.constant(1) + Bound.constant(factorial_gamma(mprf.depth)) * total
    return result


def lifted_bound(program: IntegerProgram, mprf: MultiphaseRankingFunction, local: Mapping[Location, Bound],
                 rb: Mapping[str, Bound], sb: Mapping[Tuple[str, str], Bound]) -> Bound:
    """Σ over entry transitions t of RB(t)·β(target of t) with sizes after t plugged in."""
    _, entries = entry_transitions(program, mprf.scope)
    total = ZERO
    for t in sorted(entries, key=lambda t: natural_key(t.id)):
        beta = local.get(t.target, OMEGA)
        sizes = {var: sb.get((t.id, var), OMEGA) for var in beta.variables()}
        total = total + rb.get(t.id, OMEGA) * beta.substitute(sizes)
    return total


def lift_bound(program: IntegerProgram, mprf: MultiphaseRankingFunction, local: Mapping[Location, Bound],
               rb: Mapping[str, Bound], sb: Mapping[Tuple[str, str], Bound]) -> Dict[str, Bound]:
    """Return a new runtime-bound table with the decreasing transitions improved where possible."""
    bound = lifted_bound(program, mprf, local, rb, sb)
    updated = dict(rb)
    for t in mprf.decreasing:
        if improves(bound, updated.get(t.id, OMEGA)):
            updated[t.id] = bound
    return updated
