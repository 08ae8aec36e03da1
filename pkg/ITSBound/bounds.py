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

"""The bound algebra: weakly monotone expressions over absolute values of program variables.

Bounds are built from natural constants, ω, program variables, `+`, `*` and
exponentials `k^b`. They are kept as a sum of terms

    coefficient * x1^e1 * ... * k1^(b1) * ... [* ω]

which is enough to fold constants, collect like terms and print canonically.
Every simplification preserves the value under `eval_abs`; with ω that means
`0*ω = 0`, `n*ω = ω` for n >= 1 and `ω + b = ω`.
"""

import math
from dataclasses import dataclass
from typing import Dict, FrozenSet, Iterable, Mapping, Optional, Tuple, Union

from ITSBound.exceptions import TemporaryVariableInBound, UnassignedVariable
from ITSBound.polynomials import Polynomial

import logging
log = logging.getLogger('ITSBound')

# eval_abs returns an int, or this value for ω.
OMEGA_VALUE = math.inf

ExtendedNat = Union[int, float]


def _ext_add(left: ExtendedNat, right: ExtendedNat) -> ExtendedNat:
    if left == OMEGA_VALUE or right == OMEGA_VALUE:
        return OMEGA_VALUE
    return left + right


def _ext_mul(left: ExtendedNat, right: ExtendedNat) -> ExtendedNat:
    if left == 0 or right == 0:
        return 0
    if left == OMEGA_VALUE or right == OMEGA_VALUE:
        return OMEGA_VALUE
    return left * right


def _ext_pow(base: int, exponent: ExtendedNat) -> ExtendedNat:
    if exponent == OMEGA_VALUE:
        return base if base in (0, 1) else OMEGA_VALUE
    return base ** exponent


@dataclass(frozen=True)
class Term:
    """A product of variable powers, exponentials and optionally ω (coefficient kept outside)."""
    powers: Tuple[Tuple[str, int], ...] = ()
    exponentials: Tuple[Tuple[int, 'Bound'], ...] = ()
    omega: bool = False

    def degree(self) -> int:
        return sum(exp for _, exp in self.powers)


def _term_key(term: Term):
    return (not term.omega, not term.exponentials, -term.degree(), term.powers,
            tuple((base, str(exponent)) for base, exponent in term.exponentials))


def _canonical(term: Term, coefficient: int) -> Tuple[Term, int]:
    """Fold constant exponentials and bring ω-terms into a single representative."""
    omega = term.omega
    exponentials = []
    for base, exponent in term.exponentials:
        if base == 1 or exponent.is_zero():
            continue
        if exponent.is_constant():
            coefficient *= base ** exponent.constant_value()
        elif exponent.is_omega():
            if base == 0:
                coefficient = 0
            else:
                omega = True
        else:
            exponentials.append((base, exponent))
    if coefficient == 0:
        return Term(), 0
    powers = term.powers
    if omega:
        # ω*m only depends on whether m is zero: exponents collapse to 1 and factors >= 1 vanish
        coefficient = 1
        powers = tuple((var, 1) for var, _ in powers)
        exponentials = [(base, exponent) for base, exponent in exponentials if base == 0]
    exponentials.sort(key=lambda item: (item[0], str(item[1])))
    return Term(powers, tuple(exponentials), omega), coefficient


class Bound:
    """An immutable element of the bound algebra.

        Parameters:
            terms: (dict): OPTIONAL - Maps `Term`s to natural coefficients.
    """

    __slots__ = ('_terms', '_hash')

    def __init__(self, terms: Optional[Mapping[Term, int]] = None):
        collected: Dict[Term, int] = {}
        for term, coefficient in (terms or {}).items():
            if coefficient < 0:
                raise ValueError("Bounds only have natural coefficients, got {0}".format(coefficient))
            term, coefficient = _canonical(term, coefficient)
            if coefficient == 0:
                continue
            collected[term] = collected.get(term, 0) + coefficient
        for term in collected:
            if term.omega:
                collected[term] = 1
        pure_omega = Term(omega=True)
        if pure_omega in collected:
            collected = {pure_omega: 1}
        self._terms = tuple(sorted(collected.items(), key=lambda item: _term_key(item[0])))
        self._hash = hash(self._terms)

    @classmethod
    def constant(cls, value: int) -> 'Bound':
        return cls({Term(): value})

    @classmethod
    def variable(cls, name: str) -> 'Bound':
        return cls({Term(powers=((name, 1),)): 1})

    @classmethod
    def omega(cls) -> 'Bound':
        return cls({Term(omega=True): 1})

    @classmethod
    def power(cls, base: int, exponent: 'Bound') -> 'Bound':
        if base < 0:
            raise ValueError("Exponential bounds need a natural base, got {0}".format(base))
        return cls({Term(exponentials=((base, exponent),)): 1})

    def items(self) -> Tuple[Tuple[Term, int], ...]:
        return self._terms

    def is_zero(self) -> bool:
        return not self._terms

    def is_constant(self) -> bool:
        return all(term == Term() for term, _ in self._terms)

    def constant_value(self) -> int:
        if not self.is_constant():
            raise ValueError("Bound {0} is not constant".format(self))
        return sum(coefficient for _, coefficient in self._terms)

    def is_omega(self) -> bool:
        return self._terms == ((Term(omega=True), 1),)

    def is_finite(self) -> bool:
        """True when no choice of variable values makes the bound ω."""
        for term, _ in self._terms:
            if term.omega:
                return False
            if any(not exponent.is_finite() for _, exponent in term.exponentials):
                return False
        return True

    def variables(self) -> FrozenSet[str]:
        found = set()
        for term, _ in self._terms:
            found.update(var for var, _ in term.powers)
            for _, exponent in term.exponentials:
                found.update(exponent.variables())
        return frozenset(found)

    @staticmethod
    def _coerce(other) -> Optional['Bound']:
        if isinstance(other, Bound):
            return other
        if isinstance(other, int) and other >= 0:
            return Bound.constant(other)
        return None

    def __add__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        terms: Dict[Term, int] = dict(self._terms)
        for term, coefficient in other._terms:
            terms[term] = terms.get(term, 0) + coefficient
        return Bound(terms)

    __radd__ = __add__

    def __mul__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        terms: Dict[Term, int] = {}
        for left, left_coefficient in self._terms:
            for right, right_coefficient in other._terms:
                term = _term_product(left, right)
                terms[term] = terms.get(term, 0) + left_coefficient * right_coefficient
        return Bound(terms)

    __rmul__ = __mul__

    def substitute(self, mapping: Mapping[str, 'Bound']) -> 'Bound':
        """Replace every variable by a bound. Variables missing from `mapping` stay."""
        result = Bound()
        for term, coefficient in self._terms:
            product = Bound.constant(coefficient)
            for var, exp in term.powers:
                replacement = mapping.get(var, Bound.variable(var))
                for _ in range(exp):
                    product = product * replacement
            for base, exponent in term.exponentials:
                product = product * Bound.power(base, exponent.substitute(mapping))
            if term.omega:
                product = product * Bound.omega()
            result = result + product
        return result

    def eval_abs(self, state: Mapping[str, int]) -> ExtendedNat:
        total: ExtendedNat = 0
        for term, coefficient in self._terms:
            value: ExtendedNat = coefficient
            for var, exp in term.powers:
                if var not in state:
                    raise UnassignedVariable(var)
                value = _ext_mul(value, abs(state[var]) ** exp)
            for base, exponent in term.exponentials:
                value = _ext_mul(value, _ext_pow(base, exponent.eval_abs(state)))
            if term.omega:
                value = _ext_mul(value, OMEGA_VALUE)
            total = _ext_add(total, value)
        return total

    def degree(self) -> int:
        return max((term.degree() for term, _ in self._terms), default=0)

    def classify(self) -> 'AsymptoticClass':
        if not self.is_finite():
            return INFINITE
        if any(term.exponentials and any(base >= 2 for base, _ in term.exponentials)
               for term, _ in self._terms):
            return EXPONENTIAL
        return AsymptoticClass(0, self.degree())

    def __eq__(self, other):
        if isinstance(other, int):
            other = Bound._coerce(other)
        if not isinstance(other, Bound):
            return NotImplemented
        return self._terms == other._terms

    def __hash__(self):
        return self._hash

    def __repr__(self):
        return "Bound({0})".format(str(self))

    def __str__(self):
        if not self._terms:
            return "0"
        pieces = []
        for term, coefficient in self._terms:
            factors = ["INF"] if term.omega else []
            factors += [var if exp == 1 else "{0}^{1}".format(var, exp) for var, exp in term.powers]
            factors += ["{0}^({1})".format(base, exponent) for base, exponent in term.exponentials]
            if not factors:
                pieces.append(str(coefficient))
            elif coefficient == 1:
                pieces.append("*".join(factors))
            else:
                pieces.append("*".join([str(coefficient)] + factors))
        return "+".join(pieces)


def _term_product(left: Term, right: Term) -> Term:
    powers = dict(left.powers)
    for var, exp in right.powers:
        powers[var] = powers.get(var, 0) + exp
    exponentials: Dict[int, Bound] = {}
    for base, exponent in left.exponentials + right.exponentials:
        exponentials[base] = exponentials[base] + exponent if base in exponentials else exponent
    return Term(tuple(sorted(powers.items())), tuple(exponentials.items()), left.omega or right.omega)


@dataclass(frozen=True, order=True)
class AsymptoticClass:
    """Growth class with respect to the largest initial absolute value n.

    Ordered from cheapest to most expensive: polynomial classes by degree, then
    exponential, then infinite.
    """
    rank: int
    degree: int = 0

    def is_at_most_linear(self) -> bool:
        return self.rank == 0 and self.degree <= 1

    @property
    def bucket(self) -> str:
        """Column name in batch tables."""
        if self.rank == 0 and self.degree > 2:
            return "O(n^>2)"
        return str(self)

    def __str__(self):
        if self.rank == 2:
            return "INF"
        if self.rank == 1:
            return "O(EXP)"
        if self.degree == 0:
            return "O(1)"
        if self.degree == 1:
            return "O(n)"
        return "O(n^{0})".format(self.degree)


CONSTANT = AsymptoticClass(0, 0)
LINEAR = AsymptoticClass(0, 1)
QUADRATIC = AsymptoticClass(0, 2)
EXPONENTIAL = AsymptoticClass(1)
INFINITE = AsymptoticClass(2)

ZERO = Bound()
ONE = Bound.constant(1)
OMEGA = Bound.omega()


def eval_abs(bound: Bound, state: Mapping[str, int]) -> ExtendedNat:
    return bound.eval_abs(state)


def overapprox_poly(poly: Polynomial, program_vars: Optional[Iterable[str]] = None) -> Bound:
    """⌈poly⌉: every coefficient replaced by (the ceiling of) its absolute value.

    Parameters:
        poly: (Polynomial): Polynomial over program variables.
        program_vars: (iterable): OPTIONAL - When given, any other variable raises TemporaryVariableInBound.
    """
    if program_vars is not None:
        stray = poly.variables() - frozenset(program_vars)
        if stray:
            raise TemporaryVariableInBound("Cannot bound {0}: temporary variables {1}".format(poly, sorted(stray)))
    terms: Dict[Term, int] = {}
    for monomial, coefficient in poly.items():
        term = Term(powers=monomial)
        terms[term] = terms.get(term, 0) + math.ceil(abs(coefficient))
    return Bound(terms)


def substitute(bound: Bound, mapping: Mapping[str, Bound]) -> Bound:
    return bound.substitute(mapping)


def add(left: Bound, right: Bound) -> Bound:
    return left + right


def mul(left: Bound, right: Bound) -> Bound:
    return left * right


def classify(bound: Bound) -> AsymptoticClass:
    return bound.classify()


def bound_sum(bounds: Iterable[Bound]) -> Bound:
    total = ZERO
    for bound in bounds:
        total = total + bound
    return total


def improves(new: Bound, old: Bound) -> bool:
    """Degree-based improvement: `new` replaces `old` only if its class is strictly smaller."""
    return new.classify() < old.classify()
