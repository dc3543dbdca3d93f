"""Priority-list solver.

A strategy is an ordered list of actions.  Each round tries the actions in
order and performs the first one that applies; the loop stops when nothing
applies, when no equation is left, or at the step limit.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from itertools import combinations, permutations

from . import conventional as conv
from .calculus import curl_decompose, find_divergence
from .expr import FUNCTIONS, LinExpr
from .integrator import (IntegrationError, curl_integrate_step, detect_redundant,
                         integrate_step)
from .potentials import PotentialError
from .reduction import (Equation, ReductionError, cross_differentiate, evaluate_labels,
                        harvest_syzygy, reduce_fully, s_pairs)
from .system import System, SystemStateError

log = logging.getLogger(__name__)

ACTIONS = (
    "separate", "substitute", "single_integrate", "eliminate", "delete_redundant",
    "syzygy_integrate", "conventional_integrate", "reduce_pair", "any_integrate",
)

STRATEGIES = {
    "syzygy": ["separate", "substitute", "single_integrate", "eliminate",
               "delete_redundant", "syzygy_integrate", "reduce_pair",
               "conventional_integrate", "any_integrate"],
    "conventional": ["separate", "substitute", "single_integrate", "eliminate",
                     "conventional_integrate", "any_integrate"],
    "groebner": ["separate", "substitute", "single_integrate", "eliminate",
                 "reduce_pair", "conventional_integrate", "any_integrate"],
}


class StrategyError(ValueError):
    pass


class SolutionCheckError(AssertionError):
    pass


def parse_strategy(spec):
    """A named strategy or a comma separated list of action names."""
    if isinstance(spec, (list, tuple)):
        names = list(spec)
    elif spec in STRATEGIES:
        names = list(STRATEGIES[spec])
    else:
        names = [s.strip() for s in str(spec).split(",") if s.strip()]
    if not names:
        raise StrategyError("empty strategy")
    bad = [n for n in names if n not in ACTIONS]
    if bad:
        raise StrategyError(f"unknown action(s): {', '.join(bad)}")
    return names


@dataclass
class SolveResult:
    system: System
    status: str                    # solved | fixed_point | incomplete
    steps: int
    counters: dict = field(default_factory=dict)
    absorbable: list = field(default_factory=list)

    @property
    def exit_code(self):
        return 2 if self.status == "incomplete" else 0


class Solver:
    def __init__(self, system, strategy="syzygy", max_steps=200,
                 max_divergence_subset=None, check_every_step=True):
        self.system = system
        self.strategy = parse_strategy(strategy)
        self.max_steps = max_steps
        self.max_subset = max_divergence_subset
        self.check_every_step = check_every_step
        self.done_pairs = set()
        self.rejected = set()          # syzygies judged not useful
        self.counters = {a: 0 for a in self.strategy}

    # driver loop ------------------------------------------------------------

    def run(self):
        steps = 0
        status = "fixed_point"
        while True:
            if not self.system.equations:
                status = "solved"
                break
            if steps >= self.max_steps:
                status = "incomplete"
                break
            for action in self.strategy:
                if getattr(self, "do_" + action)():
                    self.counters[action] += 1
                    steps += 1
                    if self.check_every_step:
                        self.system.check()
                    break
            else:
                break
        verify_solution(self.system)
        return SolveResult(self.system, status, steps, dict(self.counters),
                           conv.absorbable_functions(self.system))

    def _eqs(self):
        return sorted(self.system.equations.values(), key=lambda e: _label_key(e.label))

    # actions ----------------------------------------------------------------------

    def do_separate(self):
        reg = self.system.reg
        for eq in self._eqs():
            v = conv.separable_variable(eq.value, reg)
            if v is not None:
                conv.separate_directly(self.system, eq.label, v)
                return True
        for eq in self._eqs():
            if len(conv.additive_groups(eq.value, reg)) > 1:
                conv.separate_additively(self.system, eq.label)
                return True
        return False

    def do_substitute(self):
        """Small substitutions: ``f := 0`` or ``f`` by at most two terms of
        functions of fewer variables."""
        reg = self.system.reg
        for eq in self._eqs():
            terms = list(eq.value)
            if len(terms) == 1 and not terms[0][1]:
                f = terms[0][0]
                self.system.substitute_function(f, LinExpr(FUNCTIONS), definition=eq.label)
                self.system.log("substitute", equation=eq.label, function=f, value="0")
                return True
            if len(terms) > 3:
                continue
            for f in conv.algebraic_functions(eq.value, reg):
                others = eq.value.symbols() - {f}
                if all(set(reg.deps(g)) < set(reg.deps(f)) for g in others):
                    conv.substitute_function(self.system, eq.label, f)
                    return True
        return False

    def do_single_integrate(self):
        """A single derivative in one variable: ``p f_{v..v} = 0``."""
        for eq in self._eqs():
            terms = list(eq.value)
            if len(terms) != 1:
                continue
            f, mi, p = terms[0]
            if len(mi) != 1:
                continue
            unit = LinExpr.symbol(FUNCTIONS, f, mi)
            fn, expr, new = conv.monomial_integrate(unit, self.system.reg)
            self.system.substitute_function(fn, expr)
            self.system.log("single_integrate", equation=eq.label, function=f,
                            value=self.system.reg.format(expr),
                            new_functions=[g.name for g in new])
            return True
        return False

    def do_eliminate(self):
        for eq in self._eqs():
            cands = conv.algebraic_functions(eq.value, self.system.reg)
            if cands:
                conv.substitute_function(self.system, eq.label, cands[0])
                return True
        return False

    def do_delete_redundant(self):
        hits = [(lab, s) for lab, s in detect_redundant(self.system.syzygies)
                if lab in self.system.equations]
        if not hits:
            return False
        label, s = hits[0]
        self.system.delete_redundant(label, s)
        self.system.log("delete_redundant", equation=label, syzygy=self.system.format(s))
        return True

    def do_syzygy_integrate(self):
        if self._curl_integrate():
            return True
        for syz in list(self.system.syzygies):
            if syz in self.rejected:
                continue
            if not syz.symbols() <= set(self.system.equations):
                continue
            df = find_divergence(syz, self.system.reg.variables, max_size=self.max_subset)
            if df is None:
                self.rejected.add(syz)
                continue
            try:
                report = integrate_step(self.system, syz, df)
            except (IntegrationError, PotentialError) as exc:
                log.info("integration skipped: %s", exc)
                self.rejected.add(syz)
                continue
            if report.applied:
                return True
            self.rejected.add(syz)
        return False

    def _curl_integrate(self):
        vars_ = self.system.reg.variables
        n = len(vars_)
        syz = [s for s in self.system.syzygies
               if s not in self.rejected and s.symbols() <= set(self.system.equations)]
        if n < 3 or n > 4 or len(syz) < n or len(syz) > 8:
            return False
        for group in combinations(syz, n):
            for rows in permutations(group):
                cf = curl_decompose(list(rows), vars_, None)
                if cf is None:
                    continue
                try:
                    report = curl_integrate_step(self.system, cf, rows)
                except (IntegrationError, PotentialError) as exc:
                    log.info("curl integration skipped: %s", exc)
                    continue
                if report.applied:
                    return True
        return False

    def do_reduce_pair(self):
        ranking = self.system.ranking
        eqs = [Equation(e.label, e.value, e.history) for e in self._eqs()]
        for a_lab, b_lab in s_pairs(eqs, ranking):
            key = (a_lab, b_lab, self.system.value(a_lab), self.system.value(b_lab))
            if key in self.done_pairs:
                continue
            self.done_pairs.add(key)
            by = {e.label: e for e in eqs}
            label = self.system.next_label()
            try:
                eq = cross_differentiate(by[a_lab], by[b_lab], ranking, label=label)
                eq = reduce_fully(eq, eqs, ranking)
            except ReductionError as exc:
                log.info("pair %s/%s skipped: %s", a_lab, b_lab, exc)
                continue
            syz = harvest_syzygy(eq)
            if syz is not None:
                added = self.system.add_syzygy(syz.expr)
                self.system.log("reduce_pair", pair=[a_lab, b_lab], label=label,
                                syzygy=self.system.format(syz.expr), new=added)
            elif eq.value:
                self.system.equations[label] = eq
                self.system.log("reduce_pair", pair=[a_lab, b_lab], label=label,
                                value=self.system.reg.format(eq.value))
            return True
        return False

    def do_conventional_integrate(self):
        """Integrate in the only possible variable when the result yields a
        function that can be eliminated."""
        reg = self.system.reg
        for eq in self._eqs():
            if conv.indirectly_separable(eq.value, reg):
                continue
            vs = conv.integrable_variables(eq.value, reg)
            if len(vs) != 1:
                continue
            trial = conv.exact_integrate_wrt(eq.value, vs[0], reg, dry_run=True)
            work = reg.copy()
            for d in trial.new_functions:
                if d.name not in work.functions:
                    work.add_function(d.name, d.deps, d.origin)
            if not conv.algebraic_functions(trial.value, work):
                continue
            conv.apply_exact_integration(self.system, eq.label, vs[0])
            return True
        return False

    def do_any_integrate(self):
        reg = self.system.reg
        for eq in self._eqs():
            terms = list(eq.value)
            if len(terms) == 1 and terms[0][1] and terms[0][2].is_const():
                conv.apply_monomial_integration(self.system, eq.label)
                return True
        for eq in self._eqs():
            if conv.indirectly_separable(eq.value, reg):
                continue
            vs = conv.integrable_variables(eq.value, reg)
            if vs:
                conv.apply_exact_integration(self.system, eq.label, vs[0])
                return True
        return False


def _label_key(label):
    digits = "".join(ch for ch in label if ch.isdigit())
    return (int(digits) if digits else 0, label)


def verify_solution(system):
    """Every original equation, with the solution substituted, must vanish
    modulo the remaining equations.

    An original is accepted when the chain of replacements recorded on
    retirement rewrites it exactly over the remaining equations, or else
    when it reduces to zero by them.
    """
    values = system.label_values()
    basis = [Equation(e.label, e.value, e.history) for e in system.equations.values()]
    ranking = system.ranking
    for label, value in system.originals.items():
        v = system.expand_solution(value)
        try:
            via = evaluate_labels(system.express(label), values, system.reg)
        except SystemStateError:
            via = None
        if via == v:
            continue
        r = reduce_fully(Equation(label, v, LinExpr("e")), basis, ranking)
        if r.value:
            raise SolutionCheckError(
                f"original {label} does not vanish: {system.reg.format(r.value)}")
    return True


def solve(system, strategy="syzygy", max_steps=200, **kw):
    return Solver(system, strategy, max_steps, **kw).run()
