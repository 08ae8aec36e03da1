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

from typing import List, NamedTuple, Optional, Tuple

from lark.visitors import Transformer, v_args
from lark.lexer import Token

from ITSBound.polynomials import Atom, Constraint, Polynomial


class Head(NamedTuple):
    """A function symbol applied to arguments, `l1(x, y - 1)`."""
    location: str
    args: Tuple[Polynomial, ...]
    token: Optional[Token]


class Rule(NamedTuple):
    lhs: Head
    rhs: Head
    guard: Constraint


class ParsedITS(NamedTuple):
    """Everything the grammar gives us before program-level validation."""
    start: str
    declared_vars: Tuple[str, ...]
    rules: Tuple[Rule, ...]


@v_args(inline=True)
class ITSToProgram(Transformer):
    """Turns an ITS parse tree into polynomials, constraints and rules.

    Relational atoms are normalized here: `<`, `>` and `=` never make it past this
    transformer. Program-level checks (arity, the start location, positional renaming)
    happen in `ITSParser` which has the whole file in view.
    """

    # Expressions

    def var(self, name):
        return Polynomial.variable(str(name))

    def number(self, value):
        return Polynomial.constant(int(value))

    def add(self, left, right):
        return left + right

    def sub(self, left, right):
        return left - right

    def mul(self, left, right):
        return left * right

    def neg(self, operand):
        return -operand

    def pow(self, base, exponent):
        return base ** int(exponent)

    # Constraints

    def atom(self, lhs, relation, rhs) -> Tuple[Atom, ...]:
        if relation == "<=":
            return (Atom.le(lhs, rhs),)
        if relation == "<":
            return (Atom.lt(lhs, rhs),)
        if relation == ">=":
            return (Atom.ge(lhs, rhs),)
        if relation == ">":
            return (Atom.gt(lhs, rhs),)
        return Atom.equal(lhs, rhs)

    def guard(self, *atoms) -> Constraint:
        flattened = []
        for group in atoms:
            flattened.extend(group)
        return Constraint.of(flattened)

    # Rules

    def args(self, *exprs) -> Tuple[Polynomial, ...]:
        return tuple(exprs)

    def head(self, name, args=()) -> Head:
        return Head(str(name), tuple(args), name)

    def rule(self, lhs, rhs, guard=None) -> Rule:
        return Rule(lhs, rhs, guard if guard is not None else Constraint.TRUE)

    # Declarations

    def goal(self, *_):
        return None

    def startterm(self, name) -> str:
        return str(name)

    def vardecl(self, *names) -> List[str]:
        return [str(name) for name in names]

    def rules(self, *rules) -> Tuple[Rule, ...]:
        return tuple(rules)

    def start(self, goal, start, declared, rules) -> ParsedITS:
        return ParsedITS(start, tuple(declared), rules)
