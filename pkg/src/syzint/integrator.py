"""One syzygy based integration step.

A syzygy in divergence form ``0 = D_i P^i(e)`` is read over the unknown
functions, integrated to potentials ``Q^{ij}``, and the potentials (minus
functions of integration) become new equations.  Comparing both readings of
``P^i`` yields new syzygies, and any old equation appearing algebraically in
one of them is redundant and gets deleted.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from math import comb

from .calculus import CurlForm, DivergenceForm, find_divergence
from .expr import FUNCTIONS, LABELS, LinExpr
from .potentials import _perm_sign, curlint, divint


class IntegrationError(ValueError):
    pass


@dataclass
class IntegrationStepReport:
    used_syzygy: object
    divergence: object
    potentials: object = None
    new_equations: list = field(default_factory=list)    # labels
    auxiliary_equations: list = field(default_factory=list)
    new_functions: list = field(default_factory=list)    # FuncSymbol
    new_syzygies: list = field(default_factory=list)
    deleted: list = field(default_factory=list)
    useful: bool = True
    reason: str = ""

    @property
    def applied(self):
        return bool(self.new_equations)


def substitute_labels(P, system):
    """Components of a divergence (or curl) form read over the functions."""
    comps = P.components
    out = {}
    values = {k: e.value for k, e in system.equations.items()}
    for key, e in comps.items():
        missing = [s for s in e.symbols() if s not in values]
        if missing:
            raise IntegrationError(f"current refers to inactive equation(s) {missing}")
        out[key] = e.compose(values, FUNCTIONS, system.reg.depends)
    return out


def _solvable(e, reg, all_vars):
    """Functions occurring in ``e`` only at order zero with a constant factor,
    depending on every variable of the equation."""
    orders = {}
    for sym, mi, p in e:
        orders.setdefault(sym, []).append((mi, p))
    out = set()
    for sym, occ in orders.items():
        if len(occ) != 1:
            continue
        mi, p = occ[0]
        if mi or not p.is_const():
            continue
        if set(all_vars) <= set(reg.deps(sym)):
            out.add(sym)
    return out


def assess_usefulness(df, pot, system):
    """Whether integrating ``df`` solves for more functions than it introduces."""
    p = len(df.vars)
    if p <= 2:
        return True, "two components: one function of integration of fewer variables"
    new = comb(p, 3)
    solvable = set()
    all_vars = system.reg.variables
    for i, j in combinations(df.vars, 2):
        solvable |= _solvable(pot.get(i, j), system.reg, all_vars)
    verdict = len(solvable) > new
    reason = (f"{len(solvable)} function(s) solvable ({', '.join(sorted(solvable)) or '-'})"
              f" against {new} new function(s) of all variables")
    return verdict, reason


def detect_redundant(syzygies, exclude=()):
    """``(label, syzygy)`` for each syzygy with an algebraic, constant-factor label."""
    out = []
    for s in syzygies:
        by = {}
        for sym, mi, p in s:
            by.setdefault(sym, []).append((mi, p))
        cands = sorted(
            (sym for sym, occ in by.items()
             if sym not in exclude and len(occ) == 1 and not occ[0][0]
             and occ[0][1].is_const()),
            key=_label_key)
        if cands:
            out.append((cands[0], s))
    return out


def _label_key(label):
    digits = "".join(ch for ch in label if ch.isdigit())
    return (int(digits) if digits else 0, label)


def _apply_redundancy(system, report, new_syz, exclude):
    """Delete redundant equations found in ``new_syz``; substitute everywhere."""
    pending = list(new_syz)
    while True:
        active = [s for s in pending if s]
        hits = [(lab, s) for lab, s in detect_redundant(active, exclude)
                if lab in system.equations]
        if not hits:
            break
        label, s = hits[0]
        omega = system.delete_redundant(label, s)
        report.deleted.append(label)
        pending = [t.compose({label: omega}, LABELS) if label in t.symbols() else t
                   for t in pending if t != s]
    return [s for s in pending if s]


def _commit_registry(system, work):
    system.reg.functions = work.functions
    system.reg._counters = work._counters


def _lead_sign(e, ranking):
    sym, mi = ranking.leading(e)
    c = e.coeff(sym, mi)
    lead = c.sorted_terms()[0][1]
    return -1 if lead < 0 else 1


def integrate_step(system, syz, df=None, force=False, prefix="c"):
    """Integrate one divergence-form syzygy and update ``system`` in place.

    Unless ``force`` is set, an integration judged not useful leaves the
    system untouched and returns a report with ``useful = False``.
    """
    if df is None:
        df = find_divergence(syz, system.reg.variables)
        if df is None:
            raise IntegrationError("syzygy has no divergence form")
    P = substitute_labels(df, system)
    work = system.reg.copy()
    pot = divint(P, df.vars, work, prefix="F")
    report = IntegrationStepReport(syz, df, pot)
    report.useful, report.reason = assess_usefulness(df, pot, system)
    if not report.useful and not force:
        return report

    vars_ = df.vars
    ranking = system.ranking
    E = {}        # (i, j) -> expression over labels equal to the potential part
    new_labels = []
    if len(vars_) == 2:
        i, j = vars_
        Q = pot.get(i, j)
        if not Q:
            raise IntegrationError("vanishing potential")
        rest = [v for v in work.variables if v not in vars_]
        c = work.new_function(rest, prefix=prefix)
        report.new_functions.append(c)
        _commit_registry(system, work)
        s = _lead_sign(Q, ranking)
        value = Q.scale(s) - LinExpr.symbol(FUNCTIONS, c.name)
        lab = system.add_equation(value)
        new_labels.append(lab)
        E[(i, j)] = LinExpr.symbol(LABELS, lab, (), s)
    else:
        R = {}
        for trip in combinations(vars_, 3):
            R[trip] = work.new_function(work.variables, prefix=prefix)
            report.new_functions.append(R[trip])
        _commit_registry(system, work)
        for i, j in combinations(vars_, 2):
            value = pot.get(i, j)
            for k in vars_:
                if k in (i, j):
                    continue
                key = tuple(sorted((i, j, k), key=vars_.index))
                sign = _perm_sign((i, j, k), key)
                term = LinExpr.symbol(FUNCTIONS, R[key].name).diff(k, system.reg.depends)
                value = value - term.scale(sign)
            lab = system.add_equation(value)
            new_labels.append(lab)
            E[(i, j)] = LinExpr.symbol(LABELS, lab)
    report.new_functions.extend(pot.F)
    aux_labels = {}
    for aux in pot.E:
        lab = system.add_equation(aux.value)
        aux_labels.setdefault(aux.row, []).append(lab)
        report.auxiliary_equations.append(lab)
    report.new_equations = new_labels

    def e_ij(i, j):
        if (i, j) in E:
            return E[(i, j)]
        return -E.get((j, i), LinExpr(LABELS))

    new_syz = []
    for i in vars_:
        s = df.components[i]
        for j in vars_:
            if j != i:
                s = s - e_ij(i, j).diff(j)
        for lab in aux_labels.get((i,), []):
            s = s + LinExpr.symbol(LABELS, lab)
        if s:
            new_syz.append(s)
    if syz in system.syzygies:
        system.syzygies.remove(syz)
    system.used_syzygies.append(syz)
    for s in new_syz:
        system.add_syzygy(s)
    exclude = set(new_labels) | set(report.auxiliary_equations)
    report.new_syzygies = _apply_redundancy(system, report, new_syz, exclude)
    system.log("syzygy_integrate", syzygy=system.format(syz), vars=list(vars_),
               new_equations={lab: system.format(system.value(lab))
                              for lab in new_labels + report.auxiliary_equations},
               new_functions=[f.name for f in report.new_functions],
               deleted=report.deleted, useful=report.useful)
    return report


def curl_integrate_step(system, cf, syzygies=(), prefix="c"):
    """Integrate a vanishing curl ``0 = D_j P^{ij}`` one index higher."""
    vars_ = tuple(cf.vars)
    report = IntegrationStepReport(list(syzygies), cf)
    if not cf.components:
        report.useful, report.reason = False, "zero curl"
        return report
    P = substitute_labels(cf, system)
    work = system.reg.copy()
    pot = curlint(P, vars_, work, prefix="F")
    report.potentials = pot
    report.reason = "curl integration"
    E = {}
    new_labels = []
    triples = list(combinations(vars_, 3))
    if len(vars_) == 3:
        rest = [v for v in work.variables if v not in vars_]
        R = work.new_function(rest, prefix=prefix)
        report.new_functions.append(R)
        _commit_registry(system, work)
        value = pot.get(*vars_) - LinExpr.symbol(FUNCTIONS, R.name)
        lab = system.add_equation(value)
        new_labels.append(lab)
        E[vars_] = LinExpr.symbol(LABELS, lab)
    else:
        R = {}
        for quad in combinations(vars_, 4):
            R[quad] = work.new_function(work.variables, prefix=prefix)
            report.new_functions.append(R[quad])
        _commit_registry(system, work)
        for trip in triples:
            value = pot.get(*trip)
            for l in vars_:
                if l in trip:
                    continue
                key = tuple(sorted(trip + (l,), key=vars_.index))
                sign = _perm_sign(trip + (l,), key)
                term = LinExpr.symbol(FUNCTIONS, R[key].name).diff(l, system.reg.depends)
                value = value - term.scale(sign)
            lab = system.add_equation(value)
            new_labels.append(lab)
            E[trip] = LinExpr.symbol(LABELS, lab)
    report.new_functions.extend(pot.F)
    aux_rows = {}
    for aux in pot.E:
        lab = system.add_equation(aux.value)
        aux_rows.setdefault(aux.row, []).append(lab)
        report.auxiliary_equations.append(lab)
    report.new_equations = new_labels

    def e3(i, j, k):
        if len({i, j, k}) < 3:
            return LinExpr(LABELS)
        key = tuple(sorted((i, j, k), key=vars_.index))
        e = E[key]
        return e if _perm_sign((i, j, k), key) > 0 else -e

    new_syz = []
    for i, j in combinations(vars_, 2):
        s = cf.get(i, j) or LinExpr(LABELS)
        for k in vars_:
            if k not in (i, j):
                s = s - e3(i, j, k).diff(k)
        for lab in aux_rows.get((i, j), []):
            s = s + LinExpr.symbol(LABELS, lab)
        for lab in aux_rows.get((j, i), []):
            s = s - LinExpr.symbol(LABELS, lab)
        if s:
            new_syz.append(s)
    for syz in syzygies:
        if syz in system.syzygies:
            system.syzygies.remove(syz)
        system.used_syzygies.append(syz)
    for s in new_syz:
        system.add_syzygy(s)
    exclude = set(new_labels) | set(report.auxiliary_equations)
    report.new_syzygies = _apply_redundancy(system, report, new_syz, exclude)
    system.log("curl_integrate", vars=list(vars_),
               new_equations={lab: system.format(system.value(lab))
                              for lab in new_labels + report.auxiliary_equations},
               new_functions=[f.name for f in report.new_functions],
               deleted=report.deleted)
    return report


__all__ = [
    "CurlForm", "DivergenceForm", "IntegrationError", "IntegrationStepReport",
    "assess_usefulness", "curl_integrate_step", "detect_redundant",
    "integrate_step", "substitute_labels",
]
