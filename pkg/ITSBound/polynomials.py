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

"""Polynomials over named integer variables and the constraints built from them.

Coefficients are kept exact (`int` or `fractions.Fraction`). Program text only
ever produces integer coefficients; rational ones show up in ranking-function
witnesses and in intermediate Fourier-Motzkin steps.
"""

from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from math import gcd
from typing import Callable, Dict, FrozenSet, Iterable, Iterator, Mapping, Optional, Tuple, Union

from ITSBound.exceptions import UnassignedVariable

import logging
log = logging.getLogger('ITSBound')

Number = Union[int, Fraction]
# Sorted (variable, exponent) pairs, exponents > 0. The empty tuple is the constant monomial.
Monomial = Tuple[Tuple[str, int], ...]


def _number(value) -> Number:
    value = Fraction(value)
    if value.denominator == 1:
        return int(value.numerator)
    return value


def _lcm(a: int, b: int) -> int:
    return a * b // gcd(a, b)


def monomial_degree(monomial: Monomial) -> int:
    return sum(exp for _, exp in monomial)


def _monomial_key(monomial: Monomial):
    return (-monomial_degree(monomial), monomial)


def _monomial_mul(left: Monomial, right: Monomial) -> Monomial:
    powers = dict(left)
    for var, exp in right:
        powers[var] = powers.get(var, 0) + exp
    return tuple(sorted(powers.items()))


class Polynomial:
    """An immutable multivariate polynomial with exact coefficients.

    Monomials with a zero coefficient are never stored and the remaining ones are
    kept in a canonical order, so `==` is mathematical equality.

        Parameters:
            terms: (dict): OPTIONAL - Maps monomials (sorted tuples of (variable, exponent)) to coefficients.
    """

    __slots__ = ('_terms', '_hash')

    def __init__(self, terms: Optional[Mapping[Monomial, Number]] = None):
        merged: Dict[Monomial, Number] = {}
        for monomial, coefficient in (terms or {}).items():
            key = tuple(sorted((var, exp) for var, exp in monomial if exp != 0))
            merged[key] = _number(merged.get(key, 0) + Fraction(coefficient))
        self._terms = tuple(sorted(((m, c) for m, c in merged.items() if c != 0),
                                   key=lambda item: _monomial_key(item[0])))
        self._hash = hash(self._terms)

    @classmethod
    def constant(cls, value: Number) -> 'Polynomial':
        return cls({(): value})

    @classmethod
    def variable(cls, name: str) -> 'Polynomial':
        return cls({((name, 1),): 1})

    @classmethod
    def linear(cls, coefficients: Mapping[str, Number], constant: Number = 0) -> 'Polynomial':
        terms = {((var, 1),): coefficient for var, coefficient in coefficients.items()}
        terms[()] = constant
        return cls(terms)

    def items(self) -> Tuple[Tuple[Monomial, Number], ...]:
        return self._terms

    def coefficient(self, monomial: Monomial = ()) -> Number:
        for candidate, coefficient in self._terms:
            if candidate == monomial:
                return coefficient
        return 0

    @property
    def constant_term(self) -> Number:
        return self.coefficient(())

    def linear_part(self) -> Dict[str, Number]:
        """Coefficients of the degree-one monomials, keyed by variable."""
        return {monomial[0][0]: coefficient for monomial, coefficient in self._terms
                if len(monomial) == 1 and monomial[0][1] == 1}

    def variables(self) -> FrozenSet[str]:
        return frozenset(var for monomial, _ in self._terms for var, _ in monomial)

    def degree(self) -> int:
        if not self._terms:
            return 0
        return max(monomial_degree(monomial) for monomial, _ in self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def is_constant(self) -> bool:
        return all(not monomial for monomial, _ in self._terms)

    def is_linear(self) -> bool:
        return self.degree() <= 1

    @staticmethod
    def _coerce(other) -> Optional['Polynomial']:
        if isinstance(other, Polynomial):
            return other
        if isinstance(other, (int, Fraction)):
            return Polynomial.constant(other)
        return None

    def __add__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        terms: Dict[Monomial, Number] = dict(self._terms)
        for monomial, coefficient in other._terms:
            terms[monomial] = terms.get(monomial, 0) + coefficient
        return Polynomial(terms)

    __radd__ = __add__

    def __neg__(self):
        return Polynomial({monomial: -coefficient for monomial, coefficient in self._terms})

    def __sub__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return other + (-self)

    def __mul__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        terms: Dict[Monomial, Number] = {}
        for left, left_coefficient in self._terms:
            for right, right_coefficient in other._terms:
                monomial = _monomial_mul(left, right)
                terms[monomial] = terms.get(monomial, 0) + left_coefficient * right_coefficient
        return Polynomial(terms)

    __rmul__ = __mul__

    def __pow__(self, exponent: int):
        if not isinstance(exponent, int) or exponent < 0:
            raise ValueError("Polynomials only take non-negative integer powers, got {0}".format(exponent))
        result = Polynomial.constant(1)
        for _ in range(exponent):
            result = result * self
        return result

    def substitute(self, mapping: Mapping[str, 'Polynomial']) -> 'Polynomial':
        """Replace variables by polynomials. Variables missing from `mapping` stay as they are."""
        result = Polynomial()
        for monomial, coefficient in self._terms:
            term = Polynomial.constant(coefficient)
            for var, exp in monomial:
                replacement = mapping.get(var)
                if replacement is None:
                    replacement = Polynomial.variable(var)
                term = term * (replacement ** exp)
            result = result + term
        return result

    def evaluate(self, assignment: Mapping[str, Number]) -> Number:
        total = Fraction(0)
        for monomial, coefficient in self._terms:
            value = Fraction(coefficient)
            for var, exp in monomial:
                try:
                    value *= Fraction(assignment[var]) ** exp
                except KeyError:
                    raise UnassignedVariable(var)
            total += value
        return _number(total)

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = Polynomial.constant(other)
        if not isinstance(other, Polynomial):
            return NotImplemented
        return self._terms == other._terms

    def __hash__(self):
        return self._hash

    def __repr__(self):
        return "Polynomial({0})".format(str(self))

    def _format(self, power: Callable[[str, int], str]) -> str:
        if not self._terms:
            return "0"
        text = ""
        for index, (monomial, coefficient) in enumerate(self._terms):
            factors = [power(var, exp) for var, exp in monomial]
            magnitude = abs(coefficient)
            if not factors:
                body = str(magnitude)
            elif magnitude == 1:
                body = "*".join(factors)
            else:
                body = "*".join([str(magnitude)] + factors)
            if coefficient < 0:
                text += "-" + body
            elif index == 0:
                text += body
            else:
                text += "+" + body
        return text

    def __str__(self):
        return self._format(lambda var, exp: var if exp == 1 else "{0}^{1}".format(var, exp))

    def to_its(self) -> str:
        """Render with powers spelled out as products, as the ITS grammar expects."""
        return self._format(lambda var, exp: "*".join([var] * exp))


def _tighten(poly: Polynomial) -> Polynomial:
    """Scale `poly <= 0` to integer coefficients and divide out their gcd.

    Over the integers, `g*q + c <= 0` holds exactly when `q + ceil(c/g) <= 0`.
    """
    scale = reduce(_lcm, (Fraction(c).denominator for _, c in poly.items()), 1)
    if scale != 1:
        poly = poly * scale
    coefficients = [int(c) for monomial, c in poly.items() if monomial]
    if not coefficients:
        return Polynomial() if poly.constant_term <= 0 else Polynomial.constant(1)
    divisor = reduce(gcd, (abs(c) for c in coefficients))
    if divisor == 1:
        return poly
    terms: Dict[Monomial, Number] = {m: int(c) // divisor for m, c in poly.items() if m}
    terms[()] = -((-int(poly.constant_term)) // divisor)
    return Polynomial(terms)


@dataclass(frozen=True)
class Atom:
    """The inequality `poly <= 0` over the integers.

    Every relation of the input language is normalized into this one form:
    `e1 < e2` becomes `e1 + 1 <= e2` and `e1 = e2` becomes two atoms.
    """
    poly: Polynomial

    def __post_init__(self):
        object.__setattr__(self, 'poly', _tighten(self.poly))

    @classmethod
    def le(cls, lhs, rhs) -> 'Atom':
        return cls(Polynomial._coerce(lhs) - Polynomial._coerce(rhs))

    @classmethod
    def lt(cls, lhs, rhs) -> 'Atom':
        return cls(Polynomial._coerce(lhs) + 1 - Polynomial._coerce(rhs))

    @classmethod
    def ge(cls, lhs, rhs) -> 'Atom':
        return cls.le(rhs, lhs)

    @classmethod
    def gt(cls, lhs, rhs) -> 'Atom':
        return cls.lt(rhs, lhs)

    @classmethod
    def equal(cls, lhs, rhs) -> Tuple['Atom', 'Atom']:
        return (cls.le(lhs, rhs), cls.le(rhs, lhs))

    def is_true(self) -> bool:
        return self.poly.is_zero()

    def is_false(self) -> bool:
        return self.poly.is_constant() and not self.poly.is_zero()

    def is_linear(self) -> bool:
        return self.poly.is_linear()

    def variables(self) -> FrozenSet[str]:
        return self.poly.variables()

    def holds(self, assignment: Mapping[str, Number]) -> bool:
        return self.poly.evaluate(assignment) <= 0

    def negate(self) -> 'Atom':
        return Atom(1 - self.poly)

    def substitute(self, mapping: Mapping[str, Polynomial]) -> 'Atom':
        return Atom(self.poly.substitute(mapping))

    def _render(self, show: Callable[[Polynomial], str]) -> str:
        positive = {m: c for m, c in self.poly.items() if c > 0}
        negative = {m: -c for m, c in self.poly.items() if c < 0}
        relation = "<="
        if positive.get((), 0) == 1:
            del positive[()]
            relation = "<"
        return "{0} {1} {2}".format(show(Polynomial(positive)), relation, show(Polynomial(negative)))

    def __str__(self):
        return self._render(str)

    def to_its(self) -> str:
        return self._render(Polynomial.to_its)

    def mangle(self) -> str:
        """Identifier-safe spelling, e.g. `x_lt_0` for x < 0."""
        text = str(self).replace(" <= ", "_le_").replace(" < ", "_lt_")
        for symbol, word in (("+", "p"), ("-", "m"), ("*", "_"), ("^", "e"), ("/", "d")):
            text = text.replace(symbol, word)
        return text


@dataclass(frozen=True)
class Constraint:
    """A conjunction of atoms. The empty conjunction is `true`.

    Atoms are deduplicated and sorted on construction; trivially true atoms are
    dropped and a trivially false atom swallows the rest.
    """
    atoms: Tuple[Atom, ...] = ()

    def __post_init__(self):
        unique = {atom for atom in self.atoms if not atom.is_true()}
        falsum = [atom for atom in unique if atom.is_false()]
        if falsum:
            unique = {falsum[0]}
        object.__setattr__(self, 'atoms', tuple(sorted(unique, key=str)))

    @classmethod
    def of(cls, atoms: Iterable[Atom]) -> 'Constraint':
        return cls(tuple(atoms))

    def conjoin(self, *others: 'Constraint') -> 'Constraint':
        atoms = list(self.atoms)
        for other in others:
            atoms.extend(other.atoms)
        return Constraint(tuple(atoms))

    def is_true(self) -> bool:
        return not self.atoms

    def is_false(self) -> bool:
        return any(atom.is_false() for atom in self.atoms)

    def is_linear(self) -> bool:
        return all(atom.is_linear() for atom in self.atoms)

    def linear_atoms(self) -> Tuple[Atom, ...]:
        return tuple(atom for atom in self.atoms if atom.is_linear())

    def variables(self) -> FrozenSet[str]:
        return frozenset(var for atom in self.atoms for var in atom.variables())

    def holds(self, assignment: Mapping[str, Number]) -> bool:
        return all(atom.holds(assignment) for atom in self.atoms)

    def substitute(self, mapping: Mapping[str, Polynomial]) -> 'Constraint':
        return Constraint(tuple(atom.substitute(mapping) for atom in self.atoms))

    def __iter__(self) -> Iterator[Atom]:
        return iter(self.atoms)

    def __len__(self):
        return len(self.atoms)

    def __str__(self):
        if not self.atoms:
            return "true"
        return " && ".join(str(atom) for atom in self.atoms)

    def to_its(self) -> str:
        return " && ".join(atom.to_its() for atom in self.atoms)

    def mangle(self) -> str:
        if not self.atoms:
            return "true"
        return "__".join(atom.mangle() for atom in self.atoms)


Constraint.TRUE = Constraint()
