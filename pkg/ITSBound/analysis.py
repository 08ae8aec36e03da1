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

"""Global runtime and size bounds for a whole program.

Strongly connected components are treated in topological order. Inside a component,
ranking-function search and size-bound updates alternate until nothing improves. A
component whose bounds stay super-linear can be refined by partial evaluation and
analysed once more.
"""

import random
import time
from dataclasses import dataclass, field, replace
from typing import Dict, FrozenSet, Iterable, List, Mapping, Optional, Tuple

from ITSBound.bounds import INFINITE, OMEGA, ONE, AsymptoticClass, Bound, bound_sum
from ITSBound.cfr import partial_evaluate_scc, partial_evaluate_subscc
from ITSBound.exceptions import AnalysisTimeout
from ITSBound.graph import entry_transitions, remove_unreachable, sccs_topological, transitions_in_cycles
from ITSBound.invariants import strengthen_guards
from ITSBound.mprf import MultiphaseRankingFunction, find_mprf, lift_bound, lifted_bound, local_bound
from ITSBound.program import IntegerProgram, Transition, natural_key, transition_ids
from ITSBound.size_bounds import SizeBoundTable, compute_size_bounds
from ITSBound.solver import SolverBackend, is_unsat, make_backend

import logging
log = logging.getLogger('ITSBound')

MIN_DEPTH = 1
MAX_DEPTH = 10
CFR_MODES = ("off", "scc", "sub-scc", "global")
SOLVER_BACKENDS = ("auto", "process", "z3")

RuntimeBoundTable = Dict[str, Bound]

PRESETS = {
    "koat": {"mdepth": 1, "cfr_mode": "off"},
    "cfr-scc": {"mdepth": 1, "cfr_mode": "scc"},
    "cfr": {"mdepth": 1, "cfr_mode": "sub-scc"},
    "mprf5": {"mdepth": 5, "cfr_mode": "off"},
    "mprf5-cfr-scc": {"mdepth": 5, "cfr_mode": "scc"},
    "mprf5-cfr": {"mdepth": 5, "cfr_mode": "sub-scc"},
    "global-cfr": {"mdepth": 1, "cfr_mode": "global"},
}


@dataclass
class AnalysisConfig:
    """Knobs of one analysis run.

    `seed` 0 tries transitions in id order; any other seed shuffles that order
    deterministically.
    """
    mdepth: int = 5
    cfr_mode: str = "sub-scc"
    timeout: float = 300.0
    solver_timeout: float = 5.0
    solver_backend: str = "auto"
    invariants: bool = False
    seed: int = 0

    def __post_init__(self):
        if not MIN_DEPTH <= self.mdepth <= MAX_DEPTH:
            raise ValueError("mdepth must be between {0} and {1}, got {2}".format(MIN_DEPTH, MAX_DEPTH, self.mdepth))
        if self.cfr_mode not in CFR_MODES:
            raise ValueError("Unknown refinement mode {0}, expected one of {1}".format(self.cfr_mode, ", ".join(CFR_MODES)))
        if self.solver_backend not in SOLVER_BACKENDS:
            raise ValueError("Unknown solver backend {0}, expected one of {1}".format(
                self.solver_backend, ", ".join(SOLVER_BACKENDS)))
        if self.timeout <= 0 or self.solver_timeout <= 0:
            raise ValueError("Timeouts must be positive")

    @classmethod
    def from_preset(cls, name: str, **overrides) -> 'AnalysisConfig':
        if name not in PRESETS:
            raise ValueError("Unknown preset {0}, expected one of {1}".format(name, ", ".join(sorted(PRESETS))))
        settings = dict(PRESETS[name])
        settings.update(overrides)
        return cls(**settings)


@dataclass
class AnalysisResult:
    program: IntegerProgram
    rb: RuntimeBoundTable
    sb: SizeBoundTable
    overall: Bound
    complexity: AsymptoticClass
    proof_log: List[str] = field(default_factory=list)
    timeout: bool = False
    time: float = 0.0

    def to_dict(self) -> dict:
        """Plain data for JSON output."""
        return {
            "class": "INF?" if self.timeout else str(self.complexity),
            "bucket": "INF" if self.timeout else self.complexity.bucket,
            "bound": str(self.overall),
            "time": round(self.time, 3),
            "timeout": self.timeout,
            "rb": {t: str(bound) for t, bound in sorted(self.rb.items(), key=lambda item: natural_key(item[0]))},
            "sb": {"{0}/{1}".format(t, var): str(bound)
                   for (t, var), bound in sorted(self.sb.items(), key=lambda item: (natural_key(item[0][0]), item[0][1]))},
            "proof_log": list(self.proof_log),
        }


def slice_variables(program: IntegerProgram) -> IntegerProgram:
    """Drop program variables that neither guards nor the updates of guard-relevant variables read."""
    relevant = set()
    for t in program.transitions:
        relevant.update(t.guard.variables() & set(program.program_vars))
    changed = True
    while changed:
        changed = False
        for t in program.transitions:
            for var, poly in t.update:
                if var not in relevant:
                    continue
                reads = poly.variables() & set(program.program_vars)
                if not reads <= relevant:
                    relevant.update(reads)
                    changed = True
    kept = tuple(var for var in program.program_vars if var in relevant)
    if kept == program.program_vars:
        return program
    log.info("Dropping variables {0}".format(", ".join(var for var in program.program_vars if var not in relevant)))
    transitions = [replace(t, update=tuple((var, poly) for var, poly in t.update if var in relevant))
                   for t in program.transitions]
    return IntegerProgram.build(kept, program.initial, transitions)


def preprocess(program: IntegerProgram, invariants: bool = False,
               backend: Optional[SolverBackend] = None) -> IntegerProgram:
    """Remove unsatisfiable and unreachable transitions, slice away irrelevant variables, optionally add invariants."""
    def drop_unsat(p):
        kept = [t for t in p.transitions if not is_unsat(t.guard, backend)]
        if len(kept) != len(p.transitions):
            log.debug("Removed {0} transitions with unsatisfiable guards".format(len(p.transitions) - len(kept)))
        return remove_unreachable(p.with_transitions(kept))

    program = slice_variables(drop_unsat(program))
    if invariants:
        program = drop_unsat(strengthen_guards(program))
    return program


def initial_tables(program: IntegerProgram,
                   backend: Optional[SolverBackend] = None) -> Tuple[RuntimeBoundTable, SizeBoundTable]:
    """RB(t) = 1 outside of cycles and ω inside; size bounds follow from that."""
    cyclic = transitions_in_cycles(program)
    rb = {t.id: (OMEGA if t in cyclic else ONE) for t in program.transitions}
    return rb, compute_size_bounds(program, rb, backend=backend)


def _same_origin_bound(table: Mapping, old: IntegerProgram, t: Transition, key=lambda u: u.id) -> Bound:
    return bound_sum(table.get(key(u), OMEGA) for u in old.transitions if u.origin == t.origin)


class BoundAnalysis():
    """Runs the bound inference on one preprocessed program.

        Parameters:
            program: (IntegerProgram): The program to analyse.
            config: (AnalysisConfig): Depth, refinement mode and limits.
            backend: (SolverBackend): OPTIONAL - Solver to use. Built from the config when left out.
    """

    def __init__(self, program: IntegerProgram, config: AnalysisConfig, backend: Optional[SolverBackend] = None):
        self.program = program
        self.config = config
        self.backend = backend or make_backend(config.solver_backend, config.solver_timeout)
        self.proof_log: List[str] = []
        self.deadline = time.monotonic() + config.timeout
        self.rb: RuntimeBoundTable = {}
        self.sb: SizeBoundTable = {}

    def check_deadline(self):
        if time.monotonic() > self.deadline:
            raise AnalysisTimeout("No result within {0}s".format(self.config.timeout))

    def _order(self, transitions: Iterable[Transition]) -> List[Transition]:
        ordered = sorted(transitions, key=lambda t: natural_key(t.id))
        if self.config.seed:
            random.Random(self.config.seed).shuffle(ordered)
        return ordered

    def _record(self, old: Mapping[str, Bound], new: Mapping[str, Bound]) -> bool:
        improved = False
        for t_id in sorted(new, key=natural_key):
            if new[t_id] != old.get(t_id):
                self.proof_log.append("RB {0} := {1}".format(t_id, new[t_id]))
                improved = True
        return improved

    def _judge(self, program: IntegerProgram, rb, sb):
        def judge(mprf: MultiphaseRankingFunction) -> AsymptoticClass:
            locations, _ = entry_transitions(program, mprf.scope)
            local = local_bound(mprf, locations, program.program_vars)
            return lifted_bound(program, mprf, local, rb, sb).classify()
        return judge

    def _synthesize(self, program: IntegerProgram, scc: FrozenSet[Transition], t: Transition,
                    rb: RuntimeBoundTable, sb: SizeBoundTable) -> RuntimeBoundTable:
        """Escalate the depth for `t` until a ranking function improves some bound."""
        for depth in range(1, self.config.mdepth + 1):
            self.check_deadline()
            mprf = find_mprf(program, t, scc, depth, self.backend, self._judge(program, rb, sb))
            if mprf is None:
                continue
            locations, _ = entry_transitions(program, mprf.scope)
            local = local_bound(mprf, locations, program.program_vars)
            bound = lifted_bound(program, mprf, local, rb, sb)
            if not bound.is_finite():
                continue
            self.proof_log.append("MPRF d={0} scope={1} decreasing={2} {3}".format(
                depth, transition_ids(mprf.scope), transition_ids(mprf.decreasing),
                " ".join("beta({0})={1}".format(loc, local[loc]) for loc in sorted(local, key=str))))
            return lift_bound(program, mprf, local, rb, sb)
        return rb

    def _from_predecessors(self, program: IntegerProgram, scc: FrozenSet[Transition],
                           rb: RuntimeBoundTable) -> RuntimeBoundTable:
        updated = dict(rb)
        changed = True
        while changed:
            changed = False
            for t in self._order(scc):
                if updated[t.id].is_finite():
                    continue
                preds = program.predecessors(t)
                if preds and all(updated[p.id].is_finite() for p in preds):
                    updated[t.id] = bound_sum(updated[p.id] for p in preds)
                    changed = True
        return updated

    def scc_pass(self, program: IntegerProgram, scc: FrozenSet[Transition],
                 rb: RuntimeBoundTable, sb: SizeBoundTable) -> Tuple[RuntimeBoundTable, SizeBoundTable]:
        """Alternate ranking-function search and size-bound updates on one component until stable."""
        improved = True
        while improved:
            improved = False
            for t in self._order(scc):
                if rb[t.id].is_finite():
                    continue
                updated = self._synthesize(program, scc, t, rb, sb)
                improved = self._record(rb, updated) or improved
                rb = updated
            updated = self._from_predecessors(program, scc, rb)
            improved = self._record(rb, updated) or improved
            rb = updated
            self.check_deadline()
            sb = compute_size_bounds(program, rb, sb, self.backend)
        return rb, sb

    def refine(self, program: IntegerProgram, scc: FrozenSet[Transition], rb: RuntimeBoundTable,
               sb: SizeBoundTable) -> Tuple[IntegerProgram, RuntimeBoundTable, SizeBoundTable]:
        """Refine `scc` once and keep the result only if its bounds are asymptotically better."""
        t_cfr = [t for t in self._order(scc) if not rb[t.id].classify().is_at_most_linear()]
        if not t_cfr:
            return program, rb, sb
        mode = self.config.cfr_mode
        self.proof_log.append("CFR mode={0} on={1}".format(mode, transition_ids(t_cfr)))
        if mode == "scc":
            refined = partial_evaluate_scc(program, scc, backend=self.backend)
        else:
            refined = partial_evaluate_subscc(program, t_cfr, backend=self.backend)
        old_ids = {t.id for t in program.transitions}
        origins = {t.origin for t in scc}
        reset = {t.origin for t in t_cfr}
        cyclic = transitions_in_cycles(refined)
        new_rb: RuntimeBoundTable = {}
        for t in refined.transitions:
            if t.id in old_ids:
                new_rb[t.id] = rb[t.id]
            elif t not in cyclic:
                new_rb[t.id] = ONE
            elif t.origin in reset:
                new_rb[t.id] = OMEGA
            else:
                new_rb[t.id] = _same_origin_bound(rb, program, t)
        new_sb: SizeBoundTable = {}
        for t in refined.transitions:
            for var in refined.program_vars:
                if t.id in old_ids:
                    new_sb[(t.id, var)] = sb.get((t.id, var), OMEGA)
                else:
                    new_sb[(t.id, var)] = _same_origin_bound(sb, program, t, key=lambda u, v=var: (u.id, v))
        new_sb = compute_size_bounds(refined, new_rb, new_sb, self.backend)
        refined_sccs = [component for component in sccs_topological(refined)
                        if any(t.origin in origins for t in component)]
        for component in refined_sccs:
            new_rb, new_sb = self.scc_pass(refined, component, new_rb, new_sb)
        for t in refined.transitions:
            if not new_rb[t.id].is_finite() and t.id not in old_ids:
                new_rb[t.id] = _same_origin_bound(rb, program, t)
        before = bound_sum(rb[t.id] for t in scc).classify()
        after = bound_sum(new_rb[t.id] for t in refined.transitions if t.origin in origins).classify()
        if after < before:
            log.info("Refinement of {0} improved {1} to {2}".format(transition_ids(scc), before, after))
            return refined, new_rb, compute_size_bounds(refined, new_rb, new_sb, self.backend)
        log.info("Refinement of {0} did not improve {1}".format(transition_ids(scc), before))
        return program, rb, sb

    def run(self) -> Tuple[IntegerProgram, RuntimeBoundTable, SizeBoundTable]:
        program = self.program
        if self.config.cfr_mode == "global":
            for scc in sccs_topological(program):
                current = set(program.transitions)
                present = frozenset(t for t in scc if t in current)
                if present:
                    self.proof_log.append("CFR mode=global on={0}".format(transition_ids(present)))
                    program = partial_evaluate_scc(program, present, backend=self.backend)
        self.program = program
        self.rb, self.sb = initial_tables(program, self.backend)
        for scc in sccs_topological(program):
            current = set(self.program.transitions)
            scc = frozenset(t for t in scc if t in current)
            if not scc:
                continue
            log.info("Analysing component {0}".format(transition_ids(scc)))
            self.rb, self.sb = self.scc_pass(self.program, scc, self.rb, self.sb)
            if self.config.cfr_mode in ("scc", "sub-scc"):
                self.program, self.rb, self.sb = self.refine(self.program, scc, self.rb, self.sb)
            self.sb = compute_size_bounds(self.program, self.rb, self.sb, self.backend)
        return self.program, self.rb, self.sb


def analyze(program: IntegerProgram, config: Optional[AnalysisConfig] = None,
            backend: Optional[SolverBackend] = None) -> AnalysisResult:
    """Bound the runtime of `program`. A timeout yields the bounds found so far, flagged."""
    config = config or AnalysisConfig()
    started = time.monotonic()
    backend = backend or make_backend(config.solver_backend, config.solver_timeout)
    program = preprocess(program, config.invariants, backend)
    engine = BoundAnalysis(program, config, backend)
    timed_out = False
    try:
        program, rb, sb = engine.run()
    except AnalysisTimeout as err:
        log.warning(str(err))
        timed_out = True
        program = engine.program
        rb = {t.id: engine.rb.get(t.id, OMEGA) for t in program.transitions}
        sb = engine.sb
    overall = bound_sum(rb[t.id] for t in program.transitions)
    complexity = INFINITE if timed_out else overall.classify()
    return AnalysisResult(program, rb, sb, overall, complexity, engine.proof_log, timed_out,
                          time.monotonic() - started)
