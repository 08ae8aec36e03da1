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

"""Size bounds: how large can |v| be right after a transition, in terms of the initial state.

Each result variable (t, v) first gets a local classification of the update η_t(v)
under the guard of t. Local bounds are then chained through the result-variable graph,
whose strongly connected components are handled in topological order.
"""

from dataclasses import dataclass
from typing import Dict, Iterable, List, Mapping, Optional, Tuple

from ITSBound.bounds import OMEGA, ZERO, Bound, improves, overapprox_poly
from ITSBound.graph import topological_components
from ITSBound.polynomials import Atom, Polynomial
from ITSBound.program import IntegerProgram, Transition, natural_key
from ITSBound.solver import SolverBackend, entails

import logging
log = logging.getLogger('ITSBound')

CONSTANT_LIMIT = 2 ** 16

IDENTITY = "identity"
CONSTANT = "constant"
ADDITIVE = "additive"
POLYNOMIAL = "polynomial"
UNBOUNDED = "unbounded"

ResultVariable = Tuple[str, str]
SizeBoundTable = Dict[ResultVariable, Bound]


@dataclass(frozen=True)
class LocalSizeBound:
    """Classification of one update under its guard.

    `identity` and `additive` bound |η(v)| by Σ|w| over `variables` plus `constant`;
    `constant` by `constant` alone; `polynomial` by `polynomial`; `unbounded` by nothing.
    """
    kind: str
    constant: int = 0
    variables: Tuple[str, ...] = ()
    polynomial: Optional[Bound] = None

    @property
    def is_additive(self) -> bool:
        return self.kind in (IDENTITY, ADDITIVE)

    def bound(self, sizes: Mapping[str, Bound]) -> Bound:
        """Instantiate with a bound for every dependency variable."""
        if self.kind == UNBOUNDED:
            return OMEGA
        if self.kind == CONSTANT:
            return Bound.constant(self.constant)
        if self.kind == POLYNOMIAL:
            return self.polynomial.substitute({var: sizes.get(var, OMEGA) for var in self.variables})
        total = Bound.constant(self.constant)
        for var in self.variables:
            total = total + sizes.get(var, OMEGA)
        return total

    def __str__(self):
        if self.kind == CONSTANT:
            return "Constant({0})".format(self.constant)
        if self.kind == POLYNOMIAL:
            return "Polynomial({0})".format(self.polynomial)
        if self.kind == UNBOUNDED:
            return "Unbounded"
        if self.kind == IDENTITY:
            return "Identity({0})".format(self.variables[0])
        return "Additive({0}, {{{1}}})".format(self.constant, ",".join(self.variables))


def _constant_bound(t: Transition, expr: Polynomial, backend: Optional[SolverBackend]) -> Optional[int]:
    """Smallest c <= CONSTANT_LIMIT with guard ⊨ -c <= expr <= c, if there is one."""
    if not expr.is_linear():
        return None

    def holds(c):
        return entails(t.guard, Atom.le(expr, c), backend) and entails(t.guard, Atom.ge(expr, -c), backend)

    if not holds(CONSTANT_LIMIT):
        return None
    low, high = 0, CONSTANT_LIMIT
    while low < high:
        middle = (low + high) // 2
        if holds(middle):
            high = middle
        else:
            low = middle + 1
    return low


def _bounded_by_variable(t: Transition, var: str, expr: Polynomial, program_vars: Iterable[str],
                         backend: Optional[SolverBackend], others: bool = True) -> Optional[str]:
    """A program variable w with |expr| <= |w| whenever the guard holds.

    `var` and the variables read by `expr` are tried first. The remaining program
    variables only when `others` is set.
    """
    if not expr.is_linear() or expr.is_constant():
        return None
    program_vars = tuple(program_vars)
    candidates = [w for w in [var] + sorted(expr.variables() - {var}) if w in program_vars]
    if others:
        candidates += [w for w in program_vars if w not in candidates]
    for candidate in candidates:
        w = Polynomial.variable(candidate)
        if entails(t.guard, Atom.le(expr, w), backend) and entails(t.guard, Atom.ge(expr, -w), backend):
            return candidate
        if entails(t.guard, Atom.le(expr, -w), backend) and entails(t.guard, Atom.ge(expr, w), backend):
            return candidate
    return None


def _additive(expr: Polynomial, program_vars: Tuple[str, ...]) -> Optional[LocalSizeBound]:
    """Σ|w| + |c| for unit-coefficient updates over program variables."""
    if not expr.is_linear() or expr.variables() - frozenset(program_vars):
        return None
    linear = expr.linear_part()
    offset = abs(expr.constant_term)
    if all(abs(c) == 1 for c in linear.values()) and offset.denominator == 1:
        return LocalSizeBound(ADDITIVE, int(offset), tuple(sorted(linear)))
    return None


def local_size_bound(t: Transition, var: str, program_vars: Iterable[str],
                     backend: Optional[SolverBackend] = None) -> LocalSizeBound:
    """Classify η_t(var), trying identity, constant, bounded-by-variable, additive, polynomial.

    An update that is additive on its own is only bounded by a variable it reads, so
    that the result-variable graph does not gain dependencies the update does not have.
    """
    program_vars = tuple(program_vars)
    expr = t.update_map.get(var, Polynomial.variable(var))
    if expr == Polynomial.variable(var):
        return LocalSizeBound(IDENTITY, 0, (var,))
    constant = _constant_bound(t, expr, backend)
    if constant is not None:
        return LocalSizeBound(CONSTANT, constant)
    additive = _additive(expr, program_vars)
    bounding = _bounded_by_variable(t, var, expr, program_vars, backend, others=additive is None)
    if bounding is not None:
        return LocalSizeBound(ADDITIVE, 0, (bounding,))
    if additive is not None:
        return additive
    if expr.variables() - frozenset(program_vars):
        return LocalSizeBound(UNBOUNDED)
    return LocalSizeBound(POLYNOMIAL, 0, tuple(sorted(expr.variables())), overapprox_poly(expr, program_vars))


class SizeBoundCalculator():
    """Computes size-bound tables for one program. Local classifications are cached.

        Parameters:
            program: (IntegerProgram): The program to bound.
            backend: (SolverBackend): OPTIONAL - Solver used for the entailment checks.
    """

    def __init__(self, program: IntegerProgram, backend: Optional[SolverBackend] = None):
        self.program = program
        self.backend = backend
        self._local: Dict[ResultVariable, LocalSizeBound] = {}
        self._by_id = {t.id: t for t in program.transitions}

    def local(self, t: Transition, var: str) -> LocalSizeBound:
        key = (t.id, var)
        if key not in self._local:
            self._local[key] = local_size_bound(t, var, self.program.program_vars, self.backend)
            log.debug("Local size bound of {0}: {1}".format(key, self._local[key]))
        return self._local[key]

    def graph(self) -> Dict[ResultVariable, List[ResultVariable]]:
        """Edges (t, w) -> (t', v') when t can run right before t' and η_t'(v') depends on w."""
        nodes = [(t.id, var) for t in self.program.transitions for var in self.program.program_vars]
        edges: Dict[ResultVariable, List[ResultVariable]] = {node: [] for node in nodes}
        for t_next in self.program.transitions:
            for var in self.program.program_vars:
                local = self.local(t_next, var)
                for w in local.variables:
                    for t in self.program.predecessors(t_next):
                        edges[(t.id, w)].append((t_next.id, var))
        return edges

    def incoming(self, t: Transition, var: str, table: Mapping[ResultVariable, Bound]) -> Bound:
        """Size of `var` right before `t`: summed over predecessors, plus the input itself at the start."""
        total = Bound.variable(var) if t.source == self.program.initial else ZERO
        for pred in self.program.predecessors(t):
            total = total + table.get((pred.id, var), OMEGA)
        return total

    def _trivial(self, node: ResultVariable, table) -> Bound:
        t = self._by_id[node[0]]
        local = self.local(t, node[1])
        return local.bound({w: self.incoming(t, w, table) for w in local.variables})

    def _cyclic(self, component: List[ResultVariable], table, rb: Mapping[str, Bound]) -> Bound:
        """One bound for every node of a non-trivial component, or ω."""
        members = set(component)
        entering = ZERO
        growth = ZERO
        for node in sorted(component, key=lambda n: (natural_key(n[0]), n[1])):
            t = self._by_id[node[0]]
            local = self.local(t, node[1])
            if not local.is_additive:
                return OMEGA
            preds = self.program.predecessors(t)
            inside = [w for w in local.variables if any((p.id, w) in members for p in preds)]
            if len(inside) > 1:
                return OMEGA
            step = Bound.constant(local.constant)
            for w in local.variables:
                if w in inside:
                    for p in preds:
                        if (p.id, w) not in members:
                            entering = entering + table.get((p.id, w), OMEGA)
                    if t.source == self.program.initial:
                        entering = entering + Bound.variable(w)
                else:
                    step = step + self.incoming(t, w, table)
            growth = growth + rb.get(t.id, OMEGA) * step
        return entering + growth

    def compute(self, rb: Mapping[str, Bound],
                previous: Optional[Mapping[ResultVariable, Bound]] = None) -> SizeBoundTable:
        """A new size-bound table. Entries of `previous` are kept where they have a better class."""
        table: SizeBoundTable = dict(previous or {})
        graph = self.graph()
        for component in topological_components(graph):
            trivial = len(component) == 1 and component[0] not in graph[component[0]]
            if trivial:
                new = self._trivial(component[0], table)
            else:
                new = self._cyclic(component, table, rb)
            for node in component:
                old = table.get(node, OMEGA)
                if improves(new, old):
                    table[node] = new
                else:
                    table[node] = old
        return table


def compute_size_bounds(program: IntegerProgram, rb: Mapping[str, Bound],
                        previous: Optional[Mapping[ResultVariable, Bound]] = None,
                        backend: Optional[SolverBackend] = None) -> SizeBoundTable:
    return SizeBoundCalculator(program, backend).compute(rb, previous)
