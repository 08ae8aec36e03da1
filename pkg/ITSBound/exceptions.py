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


class MalformedITS(TypeError):
    """An exception which signifies that the text being provided is not a valid ITS program.

    The text did not match the ITS grammar. The line and column of the first offending token are kept on the exception (`line`, `column`) when the parser could determine them. We won't try to guess what was meant.
    """

    def __init__(self, message, line=None, column=None):
        super().__init__(message)
        self.line = line
        self.column = column


class InvalidProgram(TypeError):
    """An exception which signifies that the program parsed fine but is not a well-formed integer program.

    Typical causes are rules that jump back into the start location, locations used with different arities, or updates that assign to something which is not a program variable.
    """


class InvalidSubProgram(ValueError):
    """An exception which signifies that a set of transitions can't be treated as a sub-program.

    Raised for empty sub-programs and for refinement requests whose transitions are spread over more than one strongly connected component.
    """


class TemporaryVariableInBound(ValueError):
    """An exception which signifies that a bound was requested for a polynomial over temporary variables.

    Bounds only ever talk about program variables. Temporary variables get fresh values on every step so nothing about their initial value is meaningful.
    """


class UnassignedVariable(KeyError):
    """An exception which signifies that a bound was evaluated in a state which does not assign one of its variables."""


class SolverProcessError(Exception):
    """An exception which signifies that the constraint solver failed rather than answered.

    This covers a missing solver binary, a crashed solver process, output we could not read, and models that do not satisfy the query they were returned for. A solver which merely gave up (timeout, resource limits) answers `Unknown` instead.
    """


class AnalysisTimeout(Exception):
    """An exception which signifies that the global analysis deadline passed.

    The analysis engine catches it and returns the bounds found so far, flagged as a timeout.
    """
