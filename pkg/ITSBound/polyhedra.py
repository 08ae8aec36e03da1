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

"""Variable elimination over conjunctions of linear atoms (Fourier–Motzkin).

Projection is done over the rationals and tightened to integers at the end. The result
is implied by the input on integer points, which is all the callers need.
"""

from fractions import Fraction
from typing import Dict, Iterable, List, Optional, Set, Tuple

from ITSBound.polynomials import Atom, Constraint, Polynomial
from ITSBound.program import Transition

import logging
log = logging.getLogger('ITSBound')

MAX_ATOMS = 64
PRIME = "'"


class Row():
    """Σ coefficient·var + constant <= 0 with rational coefficients."""

    __slots__ = ('coefficients', 'constant')

    def __init__(self, coefficients: Dict[str, Fraction], constant: Fraction):
        self.coefficients = {var: Fraction(c) for var, c in coefficients.items() if c != 0}
        self.constant = Fraction(constant)

    @classmethod
    def from_atom(cls, atom: Atom) -> 'Row':
        return cls(atom.poly.linear_part(), atom.poly.constant_term)

    def to_atom(self) -> Atom:
        return Atom(Polynomial.linear(self.coefficients, self.constant))

    def key(self):
        return (tuple(sorted(self.coefficients.items())), self.constant)

    def negated_key(self):
        return (tuple(sorted((var, -c) for var, c in self.coefficients.items())), -self.constant)

    def is_contradiction(self) -> bool:
        return not self.coefficients and self.constant > 0

    def is_trivial(self) -> bool:
        return not self.coefficients and self.constant <= 0

    def combine(self, other: 'Row', own: Fraction, theirs: Fraction) -> 'Row':
        merged = {var: c * own for var, c in self.coefficients.items()}
        for var, c in other.coefficients.items():
            merged[var] = merged.get(var, 0) + c * theirs
        return Row(merged, self.constant * own + other.constant * theirs)

    def substitute(self, var: str, replacement: 'Row') -> 'Row':
        """Replace `var` by the affine expression `replacement` (read as an expression, not a constraint)."""
        factor = self.coefficients.get(var, 0)
        if factor == 0:
            return self
        rest = dict(self.coefficients)
        del rest[var]
        return Row(rest, self.constant).combine(replacement, Fraction(1), factor)


def _normalize(rows: Iterable[Row], cap: int) -> Optional[List[Row]]:
    """Drop trivial and duplicate rows. None signals a contradiction."""
    unique = {}
    for row in rows:
        if row.is_contradiction():
            return None
        if row.is_trivial():
            continue
        # Scale so duplicates that differ by a positive factor collapse.
        scale = max(abs(c) for c in row.coefficients.values())
        scaled = Row({var: c / scale for var, c in row.coefficients.items()}, row.constant / scale)
        key = scaled.key()
        if key not in unique:
            unique[key] = scaled
    kept = [unique[key] for key in sorted(unique, key=str)]
    if len(kept) > cap:
        log.debug("Projection produced {0} atoms, keeping {1}".format(len(kept), cap))
        kept = kept[:cap]
    return kept


def _equality_for(rows: List[Row], var: str) -> Optional[Row]:
    """An affine expression e with `var = e`, read off a pair p <= 0, -p <= 0."""
    negated = {row.negated_key() for row in rows}
    for row in rows:
        coefficient = row.coefficients.get(var, 0)
        if coefficient != 0 and row.key() in negated:
            rest = {v: -c / coefficient for v, c in row.coefficients.items() if v != var}
            return Row(rest, -row.constant / coefficient)
    return None


def _fourier_motzkin(rows: List[Row], var: str) -> List[Row]:
    upper = [row for row in rows if row.coefficients.get(var, 0) > 0]
    lower = [row for row in rows if row.coefficients.get(var, 0) < 0]
    result = [row for row in rows if var not in row.coefficients]
    for up in upper:
        for low in lower:
            a = up.coefficients[var]
            b = -low.coefficients[var]
            result.append(up.combine(low, b, a))
    return result


def eliminate(atoms: Iterable[Atom], variables: Iterable[str], cap: int = MAX_ATOMS) -> Constraint:
    """Project the linear atoms onto everything except `variables`.

    Non-linear atoms are dropped first. Variables with an equality are substituted
    away before any Fourier–Motzkin step. The result is `false` when a contradiction shows up.
    """
    rows = _normalize((Row.from_atom(atom) for atom in atoms if atom.is_linear()), cap)
    if rows is None:
        return Constraint((Atom(Polynomial.constant(1)),))
    pending: Set[str] = set(variables)
    while pending:
        present = sorted(var for var in pending if any(var in row.coefficients for row in rows))
        if not present:
            break
        substituted = False
        for var in present:
            equality = _equality_for(rows, var)
            if equality is not None:
                rows = [row.substitute(var, equality) for row in rows]
                pending.discard(var)
                substituted = True
                break
        if not substituted:
            def cost(var):
                ups = sum(1 for row in rows if row.coefficients.get(var, 0) > 0)
                downs = sum(1 for row in rows if row.coefficients.get(var, 0) < 0)
                return (ups * downs - ups - downs, var)
            var = min(present, key=cost)
            rows = _fourier_motzkin(rows, var)
            pending.discard(var)
        rows = _normalize(rows, cap)
        if rows is None:
            return Constraint((Atom(Polynomial.constant(1)),))
    return Constraint.of(row.to_atom() for row in rows)


def project(constraint: Constraint, keep: Iterable[str], cap: int = MAX_ATOMS) -> Constraint:
    keep = set(keep)
    return eliminate(constraint.atoms, constraint.variables() - keep, cap)


def _primed(var: str, taken: Set[str]) -> str:
    name = var + PRIME
    while name in taken:
        name += PRIME
    return name


def propagate(phi: Constraint, t: Transition, cap: int = MAX_ATOMS) -> Constraint:
    """A constraint over the program variables that holds after `t` whenever `phi` held before it.

    Linear updates become equalities between fresh post-state variables and the update
    expressions; the pre-state and temporary variables are then eliminated. A program
    variable with a non-linear update ends up unconstrained.
    """
    premise = phi.conjoin(t.guard)
    if premise.is_false():
        return Constraint((Atom(Polynomial.constant(1)),))
    taken = set(premise.variables()) | set(t.variables())
    post_names = {}
    atoms = list(premise.atoms)
    for var, expr in t.update:
        if not expr.is_linear():
            continue
        post = _primed(var, taken)
        taken.add(post)
        post_names[post] = var
        atoms.extend(Atom.equal(Polynomial.variable(post), expr))
    projected = eliminate(atoms, taken - set(post_names), cap)
    if projected.is_false():
        return projected
    renaming = {post: Polynomial.variable(var) for post, var in post_names.items()}
    return projected.substitute(renaming)
