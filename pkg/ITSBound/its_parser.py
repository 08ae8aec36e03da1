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

from io import IOBase
from typing import Dict, Tuple

from lark import Lark
from lark.exceptions import UnexpectedInput
from lark.tree import Tree

from ITSBound.transformers import ITSToProgram, Head, ParsedITS
from ITSBound.polynomials import Polynomial
from ITSBound.program import IntegerProgram, Location, Transition, location_key

# For catching exceptions
from ITSBound.exceptions import MalformedITS, InvalidProgram

import logging
log = logging.getLogger('ITSBound')


class ITSParser():
    """Parser for integer transition systems written in the TPDB complexity format.

    A file declares a goal, a start location, the variables and a list of rules:

        (GOAL COMPLEXITY)
        (STARTTERM (FUNCTIONSYMBOLS l0))
        (VAR x y)
        (RULES
          l0(x, y) -> l1(x, y)
          l1(x, y) -> l1(x - 1, y) :|: x > 0
        )

    The arguments on the left-hand side of the first rule name the program variables.
    Every other rule is renamed positionally onto them, so `l1(a, b) -> l2(a + b, b)` is
    fine as well. Anything else a rule mentions is a temporary variable.

        Parameters:
            raw_its: (str): The text of the ITS file.

            grammar: (raw str): OPTIONAL - Lark (https://github.com/lark-parser/lark) grammar for the ITS dialect. The transformer expects the rule names of the default grammar.
    """

    def __init__(self, raw_its: str, grammar: str = None):
        """Load the ITS text and set up the grammar.

        NOTE: Parsing does not happen in the init so that the steps can be run one by one.
        """
        self._catch_common_validation_issues(raw_its)
        if isinstance(raw_its, bytes):
            self.raw_its = raw_its.decode()
        elif isinstance(raw_its, str):
            self.raw_its = raw_its
        else:
            raise TypeError("ITSParser only accepts ITS programs in string or byte-string formats")
        self.tree = None
        self.parsed = None
        self.program = None
        if grammar is not None:
            self._grammar = grammar
        else:
            self._grammar = r"""
start: goal startterm vardecl rules

goal: "(" "GOAL" "COMPLEXITY" ")"
startterm: "(" "STARTTERM" "(" "FUNCTIONSYMBOLS" NAME ")" ")"
vardecl: "(" "VAR" NAME* ")"
rules: "(" "RULES" rule* ")"

rule: head "->" head guard?
head: NAME "(" args? ")"
args: sum ("," sum)*
guard: ":|:" atom ("&&" atom)*
atom: sum RELATION sum

?sum: product
    | sum "+" product -> add
    | sum "-" product -> sub
?product: unary
    | product "*" unary -> mul
?unary: power
    | "-" unary -> neg
?power: primary
    | primary "^" INT -> pow
?primary: NAME -> var
    | INT -> number
    | "(" sum ")"

// Alternatives are tried in order, so the two-character relations come first.
RELATION: "<=" | ">=" | "<" | ">" | "="
NAME: /[A-Za-z_][A-Za-z0-9_'.]*/

%import common.INT
%import common.WS
%ignore WS
"""

    @staticmethod
    def _catch_common_validation_issues(raw_its):
        """Checks for likely common input mistakes and raises exceptions to try and help identify them."""
        if raw_its is None:
            raise TypeError("Data passed as ITS program is a null object `None` keyword.")
        if isinstance(raw_its, IOBase):
            raise TypeError("Data passed as file pointer. ITSParser only accepts strings and byte-strings.")
        if isinstance(raw_its, (bytes, str)) and raw_its.strip() == raw_its[:0]:
            raise MalformedITS("Data passed as ITS program is an empty string.")

    def parse(self) -> IntegerProgram:
        """Parse the loaded text into an `IntegerProgram`.

        The intermediate results stay available as `tree` (the Lark tree) and `parsed`
        (rules before program-level validation).
        """
        self.tree = self._parse_its()
        self.parsed = ITSToProgram().transform(self.tree)
        self.program = self._build_program(self.parsed)
        log.debug("Parsed program with {0} locations and {1} transitions".format(
            len(self.program.locations), len(self.program.transitions)))
        return self.program

    def _parse_its(self) -> Tree:
        parser = Lark(self._grammar, parser='lalr')
        try:
            return parser.parse(self.raw_its)
        except UnexpectedInput as err:
            line = getattr(err, 'line', None)
            column = getattr(err, 'column', None)
            raise MalformedITS("ITS syntax error at line {0}, column {1}: {2}".format(line, column, err),
                               line=line, column=column) from err

    @staticmethod
    def _lhs_variables(head: Head) -> Tuple[str, ...]:
        """The variable names bound by a left-hand side. They must be distinct plain variables."""
        names = []
        for arg in head.args:
            variables = arg.variables()
            if len(variables) != 1 or arg != Polynomial.variable(next(iter(variables))):
                raise InvalidProgram("Left-hand side of {0} (line {1}) has a non-variable argument {2}".format(
                    head.location, getattr(head.token, 'line', '?'), arg))
            names.append(next(iter(variables)))
        if len(set(names)) != len(names):
            raise InvalidProgram("Left-hand side of {0} (line {1}) repeats a variable".format(
                head.location, getattr(head.token, 'line', '?')))
        return tuple(names)

    def _build_program(self, parsed: ParsedITS) -> IntegerProgram:
        """Validate the rules and turn them into transitions t0, t1, ... in file order."""
        if not parsed.rules:
            return IntegerProgram.build(parsed.declared_vars, parsed.start, ())
        program_vars = self._lhs_variables(parsed.rules[0].lhs)
        transitions = []
        for index, rule in enumerate(parsed.rules):
            for head in (rule.lhs, rule.rhs):
                if len(head.args) != len(program_vars):
                    raise InvalidProgram("{0} (line {1}) has {2} arguments, expected {3}".format(
                        head.location, getattr(head.token, 'line', '?'), len(head.args), len(program_vars)))
            if rule.rhs.location == parsed.start:
                raise InvalidProgram("Rule {0} (line {1}) enters the start location {2}".format(
                    index, getattr(rule.rhs.token, 'line', '?'), parsed.start))
            names = self._lhs_variables(rule.lhs)
            self._check_declared(index, rule, names, parsed.declared_vars)
            renaming = self._positional_renaming(rule, names, program_vars)
            guard = rule.guard.substitute(renaming)
            update = {var: expr.substitute(renaming) for var, expr in zip(program_vars, rule.rhs.args)}
            transitions.append(Transition.make("t{0}".format(index), rule.lhs.location, rule.rhs.location,
                                               program_vars, guard, update))
        return IntegerProgram.build(program_vars, parsed.start, transitions)

    @staticmethod
    def _check_declared(index, rule, names, declared_vars):
        """Rule arguments name program variables, so VAR must list them. Other undeclared names are temporary."""
        undeclared = [name for name in names if name not in declared_vars]
        if undeclared:
            raise InvalidProgram("Rule {0} (line {1}) has arguments missing from VAR: {2}".format(
                index, getattr(rule.lhs.token, 'line', '?'), ", ".join(undeclared)))

    @staticmethod
    def _positional_renaming(rule, names, program_vars) -> Dict[str, Polynomial]:
        """Map the rule's own variable names onto the program variables.

        A temporary variable that happens to share a name with a program variable is
        moved out of the way first.
        """
        used = set(rule.guard.variables())
        for arg in rule.rhs.args:
            used.update(arg.variables())
        renaming = {old: Polynomial.variable(new) for old, new in zip(names, program_vars) if old != new}
        taken = used | set(program_vars) | set(names)
        for var in sorted(used - set(names)):
            if var in program_vars:
                fresh = var + "'"
                while fresh in taken:
                    fresh += "'"
                taken.add(fresh)
                renaming[var] = Polynomial.variable(fresh)
        return renaming


def parse_program(text: str, grammar: str = None) -> IntegerProgram:
    """Parse ITS text into an `IntegerProgram`. Raises `MalformedITS` or `InvalidProgram`."""
    return ITSParser(text, grammar).parse()


def _location_names(program: IntegerProgram) -> Dict[Location, str]:
    names: Dict[Location, str] = {}
    taken = set()
    for location in program.sorted_locations():
        name = location_key(location)
        candidate = name
        index = 1
        while candidate in taken:
            candidate = "{0}_{1}".format(name, index)
            index += 1
        taken.add(candidate)
        names[location] = candidate
    return names


def format_program(program: IntegerProgram) -> str:
    """Print a program in the dialect `parse_program` reads.

    Labeled locations are written under their mangled names (`l2__x_lt_0`), so a refined
    program comes back with plain locations when re-parsed.
    """
    names = _location_names(program)
    variables = list(program.program_vars) + sorted(program.temp_vars)
    lhs_args = ", ".join(program.program_vars)
    lines = ["(GOAL COMPLEXITY)",
             "(STARTTERM (FUNCTIONSYMBOLS {0}))".format(names[program.initial]),
             "(VAR {0})".format(" ".join(variables)),
             "(RULES"]
    for t in program.transitions:
        rhs = ", ".join(poly.to_its() for _, poly in t.update)
        line = "  {0}({1}) -> {2}({3})".format(names[t.source], lhs_args, names[t.target], rhs)
        if not t.guard.is_true():
            line += " :|: " + t.guard.to_its()
        lines.append(line)
    lines.append(")")
    return "\n".join(lines) + "\n"
