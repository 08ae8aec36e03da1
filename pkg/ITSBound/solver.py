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

"""Linear arithmetic queries and the solvers that answer them.

Two backends answer the same `SolverQuery`:

- `Z3Backend` uses the z3 Python API in-process.
- `ProcessBackend` writes SMT-LIB2 to a `z3 -smt2 -in` process and reads the status and model back.

Every satisfying model is checked against the query before it is handed out.
"""

import math
import re
import shutil
import subprocess
from collections import OrderedDict
from dataclasses import dataclass, field
from fractions import Fraction
from functools import reduce
from typing import Dict, Iterable, List, Mapping, Optional, Tuple, Union

import z3

from ITSBound.exceptions import SolverProcessError
from ITSBound.polyhedra import project
from ITSBound.polynomials import Atom, Constraint, Number

import logging
log = logging.getLogger('ITSBound')

REAL = 'Real'
INT = 'Int'
RELATIONS = ("<=", "<", "=")
CACHE_SIZE = 4096


def _lcm(a: int, b: int) -> int:
    return a * b // math.gcd(a, b)


@dataclass(frozen=True)
class LinearExpr:
    """Σ coefficient·variable + constant, with rational coefficients."""
    coefficients: Tuple[Tuple[str, Fraction], ...] = ()
    constant: Fraction = Fraction(0)

    @classmethod
    def of(cls, coefficients: Mapping[str, Number], constant: Number = 0) -> 'LinearExpr':
        merged = {var: Fraction(c) for var, c in coefficients.items() if c != 0}
        return cls(tuple(sorted(merged.items())), Fraction(constant))

    def as_dict(self) -> Dict[str, Fraction]:
        return dict(self.coefficients)

    def variables(self):
        return frozenset(var for var, _ in self.coefficients)

    def __add__(self, other: 'LinearExpr') -> 'LinearExpr':
        merged = self.as_dict()
        for var, c in other.coefficients:
            merged[var] = merged.get(var, 0) + c
        return LinearExpr.of(merged, self.constant + other.constant)

    def __neg__(self) -> 'LinearExpr':
        return self.scale(-1)

    def __sub__(self, other: 'LinearExpr') -> 'LinearExpr':
        return self + (-other)

    def scale(self, factor: Number) -> 'LinearExpr':
        return LinearExpr.of({var: c * factor for var, c in self.coefficients}, self.constant * factor)

    def evaluate(self, model: Mapping[str, Number]) -> Fraction:
        return self.constant + sum((c * Fraction(model.get(var, 0)) for var, c in self.coefficients), Fraction(0))

    def integral(self) -> 'LinearExpr':
        """A positive multiple with integer coefficients and constant."""
        scale = reduce(_lcm, (c.denominator for _, c in self.coefficients), self.constant.denominator)
        return self.scale(scale) if scale != 1 else self


@dataclass(frozen=True)
class LinearAtom:
    """`expr <relation> 0` where the relation is `<=`, `<` or `=`."""
    expr: LinearExpr
    relation: str = "<="

    def __post_init__(self):
        if self.relation not in RELATIONS:
            raise ValueError("Unsupported relation {0}".format(self.relation))

    @classmethod
    def of(cls, coefficients: Mapping[str, Number], constant: Number = 0, relation: str = "<=") -> 'LinearAtom':
        return cls(LinearExpr.of(coefficients, constant), relation)

    @classmethod
    def from_atom(cls, atom: Atom) -> 'LinearAtom':
        if not atom.is_linear():
            raise ValueError("Atom {0} is not linear".format(atom))
        return cls(LinearExpr.of(atom.poly.linear_part(), atom.poly.constant_term), "<=")

    @property
    def coefficients(self) -> Dict[str, Fraction]:
        return self.expr.as_dict()

    @property
    def constant(self) -> Fraction:
        return self.expr.constant

    def variables(self):
        return self.expr.variables()

    def holds(self, model: Mapping[str, Number]) -> bool:
        value = self.expr.evaluate(model)
        if self.relation == "<=":
            return value <= 0
        if self.relation == "<":
            return value < 0
        return value == 0


@dataclass(frozen=True)
class Conjunction:
    items: Tuple['Formula', ...]

    def holds(self, model) -> bool:
        return all(item.holds(model) for item in self.items)


@dataclass(frozen=True)
class Disjunction:
    items: Tuple['Formula', ...]

    def holds(self, model) -> bool:
        return any(item.holds(model) for item in self.items)


Formula = Union[LinearAtom, Conjunction, Disjunction]


def _formula_variables(formula: Formula):
    if isinstance(formula, LinearAtom):
        return formula.variables()
    found = set()
    for item in formula.items:
        found.update(_formula_variables(item))
    return found


SIMPLE_SYMBOL = re.compile(r"^[A-Za-z_][A-Za-z0-9_.]*$")
RESERVED_SYMBOLS = frozenset(("and", "or", "not", "let", "par", "as", "exists", "forall", "match",
                              "true", "false", "assert", "ite", "distinct", "to_real", "to_int"))


def _symbol(name: str) -> str:
    """Simple symbols stay bare, anything else is quoted."""
    if SIMPLE_SYMBOL.match(name) and name not in RESERVED_SYMBOLS:
        return name
    return "|{0}|".format(name)


def _numeral(value: int, sort: str) -> str:
    text = str(abs(value)) + (".0" if sort == REAL else "")
    return "(- {0})".format(text) if value < 0 else text


@dataclass
class SolverQuery:
    """Declared unknowns with their sort, assertions, and optional objectives.

    Objectives are minimized lexicographically in the order given.
    """
    variables: Dict[str, str] = field(default_factory=dict)
    assertions: List[Formula] = field(default_factory=list)
    minimize: List[LinearExpr] = field(default_factory=list)

    def declare(self, name: str, sort: str = REAL) -> str:
        self.variables[name] = sort
        return name

    def add(self, *formulas: Formula):
        for formula in formulas:
            for var in _formula_variables(formula):
                if var not in self.variables:
                    raise KeyError("Undeclared solver variable {0}".format(var))
            self.assertions.append(formula)

    @property
    def logic(self) -> str:
        """QF_LIA, QF_LRA, or QF_LIRA when integer and real unknowns are mixed."""
        sorts = set(self.variables.values())
        if sorts == {INT}:
            return "QF_LIA"
        if INT in sorts:
            return "QF_LIRA"
        return "QF_LRA"

    def holds(self, model: Mapping[str, Number]) -> bool:
        return all(formula.holds(model) for formula in self.assertions)

    def _sort_of(self, expr: LinearExpr) -> str:
        sorts = {self.variables[var] for var in expr.variables()}
        if not sorts:
            return INT if self.logic == "QF_LIA" else REAL
        return INT if sorts == {INT} else REAL

    def _expr_smtlib(self, expr: LinearExpr, sort: str) -> str:
        terms = []
        for var, c in expr.coefficients:
            c = int(c)
            symbol = _symbol(var)
            if sort == REAL and self.variables[var] == INT:
                symbol = "(to_real {0})".format(symbol)
            terms.append(symbol if c == 1 else "(* {0} {1})".format(_numeral(c, sort), symbol))
        if expr.constant != 0 or not terms:
            terms.append(_numeral(int(expr.constant), sort))
        return terms[0] if len(terms) == 1 else "(+ {0})".format(" ".join(terms))

    def _formula_smtlib(self, formula: Formula) -> str:
        if isinstance(formula, LinearAtom):
            expr = formula.expr.integral()
            sort = self._sort_of(expr)
            return "({0} {1} {2})".format(formula.relation, self._expr_smtlib(expr, sort), _numeral(0, sort))
        connective = "and" if isinstance(formula, Conjunction) else "or"
        if not formula.items:
            return "true" if connective == "and" else "false"
        return "({0} {1})".format(connective, " ".join(self._formula_smtlib(item) for item in formula.items))

    def to_smtlib(self) -> str:
        lines = []
        if not self.minimize:
            lines.append("(set-logic {0})".format(self.logic))
        for name in sorted(self.variables):
            lines.append("(declare-const {0} {1})".format(_symbol(name), self.variables[name]))
        for formula in self.assertions:
            lines.append("(assert {0})".format(self._formula_smtlib(formula)))
        for objective in self.minimize:
            expr = objective.integral()
            lines.append("(minimize {0})".format(self._expr_smtlib(expr, self._sort_of(expr))))
        lines.append("(check-sat)")
        lines.append("(get-model)")
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class Sat:
    model: Dict[str, Fraction]


@dataclass(frozen=True)
class Unsat:
    pass


@dataclass(frozen=True)
class Unknown:
    reason: str = "unknown"


SolverResult = Union[Sat, Unsat, Unknown]


class SolverBackend():
    """Answers `SolverQuery`s. The last `cache_size` results are cached by the query's SMT-LIB text."""

    name = "abstract"

    def __init__(self, timeout: float = 5.0, cache_size: int = CACHE_SIZE):
        self.timeout = timeout
        self.cache_size = cache_size
        self._cache: "OrderedDict[str, SolverResult]" = OrderedDict()

    def clear_cache(self):
        self._cache.clear()

    def check_sat(self, query: SolverQuery) -> SolverResult:
        script = query.to_smtlib()
        cached = self._cache.get(script)
        if cached is not None:
            self._cache.move_to_end(script)
            return cached
        result = self._solve(query, script)
        if isinstance(result, Sat):
            model = {var: result.model.get(var, Fraction(0)) for var in query.variables}
            for var, sort in query.variables.items():
                if sort == INT and model[var].denominator != 1:
                    raise SolverProcessError("Solver returned a rational value for integer variable {0}".format(var))
            if not query.holds(model):
                raise SolverProcessError("Model returned by the {0} backend does not satisfy the query".format(self.name))
            result = Sat(model)
        elif isinstance(result, Unknown):
            log.warning("Solver answered unknown ({0})".format(result.reason))
        log.debug("{0} backend: {1} on {2} variables, {3} assertions".format(
            self.name, type(result).__name__, len(query.variables), len(query.assertions)))
        if self.cache_size > 0:
            self._cache[script] = result
            while len(self._cache) > self.cache_size:
                self._cache.popitem(last=False)
        return result

    def _solve(self, query: SolverQuery, script: str) -> SolverResult:
        raise NotImplementedError


class Z3Backend(SolverBackend):
    """In-process z3 through its Python API."""

    name = "z3"

    def _term(self, query: SolverQuery, expr: LinearExpr, symbols):
        sort = query._sort_of(expr)
        value = z3.IntVal if sort == INT else z3.RealVal
        terms = [value(int(c)) * symbols[var] for var, c in expr.coefficients]
        terms.append(value(int(expr.constant)))
        return z3.Sum(terms) if len(terms) > 1 else terms[0]

    def _formula(self, query: SolverQuery, formula: Formula, symbols):
        if isinstance(formula, LinearAtom):
            expr = formula.expr.integral()
            term = self._term(query, expr, symbols)
            if formula.relation == "<=":
                return term <= 0
            if formula.relation == "<":
                return term < 0
            return term == 0
        parts = [self._formula(query, item, symbols) for item in formula.items]
        return z3.And(parts) if isinstance(formula, Conjunction) else z3.Or(parts)

    def _solve(self, query: SolverQuery, script: str) -> SolverResult:
        symbols = {name: (z3.Int(name) if sort == INT else z3.Real(name))
                   for name, sort in query.variables.items()}
        solver = z3.Optimize() if query.minimize else z3.Solver()
        solver.set('timeout', int(self.timeout * 1000))
        for formula in query.assertions:
            solver.add(self._formula(query, formula, symbols))
        for objective in query.minimize:
            solver.minimize(self._term(query, objective.integral(), symbols))
        status = solver.check()
        if status == z3.unsat:
            return Unsat()
        if status != z3.sat:
            return Unknown(solver.reason_unknown())
        model = solver.model()
        values = {}
        for name, symbol in symbols.items():
            value = model.eval(symbol, model_completion=True)
            if z3.is_int_value(value):
                values[name] = Fraction(value.as_long())
            elif z3.is_rational_value(value):
                values[name] = Fraction(value.numerator_as_long(), value.denominator_as_long())
            else:
                raise SolverProcessError("Unexpected model value {0} for {1}".format(value, name))
        return Sat(values)


def _tokenize(text: str) -> List[str]:
    return re.findall(r"\(|\)|\|[^|]*\||[^\s()]+", text)


def _read_sexpr(tokens: List[str], position: int = 0):
    token = tokens[position]
    if token == "(":
        items = []
        position += 1
        while tokens[position] != ")":
            item, position = _read_sexpr(tokens, position)
            items.append(item)
        return items, position + 1
    return token, position + 1


def _sexpr_value(expr) -> Fraction:
    if isinstance(expr, str):
        return Fraction(expr)
    head, args = expr[0], [_sexpr_value(arg) for arg in expr[1:]]
    if head == "-":
        return -args[0] if len(args) == 1 else args[0] - sum(args[1:])
    if head == "+":
        return sum(args, Fraction(0))
    if head == "*":
        return reduce(lambda a, b: a * b, args, Fraction(1))
    if head == "/":
        return args[0] / args[1]
    if head == "to_real":
        return args[0]
    raise SolverProcessError("Cannot read model value {0}".format(expr))


def parse_model(text: str) -> Dict[str, Fraction]:
    """Read the `(define-fun name () Sort value)` entries of a `(get-model)` answer."""
    tokens = _tokenize(text)
    if not tokens:
        return {}
    try:
        tree, _ = _read_sexpr(tokens)
    except IndexError:
        raise SolverProcessError("Unbalanced model output: {0}".format(text[:200]))
    model = {}
    stack = [tree]
    while stack:
        node = stack.pop()
        if not isinstance(node, list):
            continue
        if len(node) == 5 and node[0] == "define-fun" and node[2] == []:
            model[node[1].strip("|")] = _sexpr_value(node[4])
        else:
            stack.extend(node)
    return model


class ProcessBackend(SolverBackend):
    """An external `z3` process speaking SMT-LIB2 on stdin."""

    name = "process"

    def __init__(self, timeout: float = 5.0, binary: str = "z3", cache_size: int = CACHE_SIZE):
        super().__init__(timeout, cache_size)
        self.binary = binary

    def _solve(self, query: SolverQuery, script: str) -> SolverResult:
        seconds = max(1, int(math.ceil(self.timeout)))
        command = [self.binary, "-smt2", "-T:{}".format(seconds), "-in"]
        try:
            completed = subprocess.run(command, input=script, capture_output=True, text=True,
                                       timeout=seconds + 5)
        except FileNotFoundError as err:
            raise SolverProcessError("Solver binary {0} not found".format(self.binary)) from err
        except subprocess.TimeoutExpired:
            return Unknown("timeout")
        output = completed.stdout.strip()
        status, _, rest = output.partition("\n")
        status = status.strip()
        if status == "unsat":
            return Unsat()
        if status in ("unknown", "timeout"):
            return Unknown(status)
        if status != "sat":
            raise SolverProcessError("Solver process answered {0!r} (exit code {1}): {2}".format(
                status, completed.returncode, completed.stderr.strip()[:200]))
        return Sat(parse_model(rest))


def make_backend(name: str = "auto", timeout: float = 5.0) -> SolverBackend:
    """`auto` picks the external process when `z3` is on PATH and the in-process API otherwise."""
    if name == "auto":
        name = "process" if shutil.which("z3") else "z3"
    if name == "process":
        return ProcessBackend(timeout)
    if name == "z3":
        return Z3Backend(timeout)
    raise ValueError("Unknown solver backend {0}".format(name))


_default_backend: Optional[SolverBackend] = None


def default_backend() -> SolverBackend:
    global _default_backend
    if _default_backend is None:
        _default_backend = Z3Backend()
    return _default_backend


def check_sat(query: SolverQuery, backend: Optional[SolverBackend] = None) -> SolverResult:
    return (backend or default_backend()).check_sat(query)


def _integer_query(atoms: Iterable[Atom]) -> SolverQuery:
    query = SolverQuery()
    for atom in atoms:
        linear = LinearAtom.from_atom(atom)
        for var in linear.variables():
            query.declare(var, INT)
        query.add(linear)
    return query


def satisfiable(constraint: Constraint, backend: Optional[SolverBackend] = None) -> Optional[bool]:
    """Integer satisfiability of the linear atoms of `constraint`; None when the solver gives up.

    Non-linear atoms are left out, so False is always a proof of unsatisfiability.
    """
    if constraint.is_false():
        return False
    atoms = constraint.linear_atoms()
    if not atoms:
        return True
    result = check_sat(_integer_query(atoms), backend)
    if isinstance(result, Unknown):
        return None
    return isinstance(result, Sat)


def is_unsat(constraint: Constraint, backend: Optional[SolverBackend] = None) -> bool:
    return satisfiable(constraint, backend) is False


def entailment(premise: Union[Constraint, Iterable[Atom]], conclusion: Atom,
               backend: Optional[SolverBackend] = None,
               over: Optional[Iterable[str]] = None) -> Optional[bool]:
    """Does every integer state satisfying `premise` satisfy `conclusion`? None when unknown.

    Non-linear premise atoms are dropped, which only weakens the premise. With `over`,
    the premise is first projected onto those variables, and `conclusion` may not
    mention any other.
    """
    if conclusion.is_true():
        return True
    premise = premise if isinstance(premise, Constraint) else Constraint.of(premise)
    if over is not None:
        over = frozenset(over)
        outside = conclusion.variables() - over
        if outside:
            raise ValueError("Conclusion {0} mentions {1} outside of the projection".format(
                conclusion, ", ".join(sorted(outside))))
        premise = project(premise, over)
    if premise.is_false():
        return True
    if not conclusion.is_linear():
        return None
    if conclusion in premise.atoms:
        return True
    result = check_sat(_integer_query(premise.linear_atoms() + (conclusion.negate(),)), backend)
    if isinstance(result, Unknown):
        return None
    return isinstance(result, Unsat)


def entails(premise: Union[Constraint, Iterable[Atom]], conclusion: Atom,
            backend: Optional[SolverBackend] = None, over: Optional[Iterable[str]] = None) -> bool:
    """Conservative entailment: an unknown answer counts as not entailed."""
    return entailment(premise, conclusion, backend, over) is True

