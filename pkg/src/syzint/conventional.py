"""Conventional integration, separation and substitution.

These are the classical moves: integrating a pure derivative monomially,
integrating an exact equation in one variable (renaming blocking functions
``c := d_v``), splitting an equation by powers of an explicit variable or
into independent additive groups, and eliminating an algebraic function.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations

from .calculus import peel_derivative
from .expr import FUNCTIONS, LABELS, LinExpr, mi_get
from .poly import Poly


class ConventionalError(ValueError):
    pass


def redundancy_estimate(mi):
    """Pairwise overlap count ``sum_{i<j} m_i m_j`` of a monomial integration."""
    orders = [k for _, k in mi if k]
    return sum(a * b for a, b in combinations(orders, 2))


# monomial integration ---------------------------------------------------------

def monomial_integrate(value, reg, prefix="g"):
    """``0 = c * f_J`` to ``f = sum_i sum_{j < m_i} g_ij (x^i)^j``.

    Returns ``(f, expression, new_functions)``.  Variables are handled from
    the last to the first, powers in ascending order.
    """
    terms = list(value)
    if len(terms) != 1:
        raise ConventionalError("monomial integration needs a single term")
    f, mi, c = terms[0]
    if not c.is_const():
        raise ConventionalError("monomial integration needs a constant coefficient")
    expr = LinExpr(FUNCTIONS)
    new = []
    order = sorted((v for v, _ in mi), key=reg.var_index.get, reverse=True)
    for v in order:
        for j in range(mi_get(mi, v)):
            deps = [w for w in reg.deps(f) if w != v]
            g = reg.new_function(deps, prefix=prefix)
            new.append(g)
            expr = expr + LinExpr.symbol(FUNCTIONS, g.name, (), Poly.var(v, j))
    return f, expr, new


# exact integration --------------------------------------------------------------

@dataclass
class ExactIntegration:
    variable: str
    value: LinExpr                                   # 0 = S - d_new
    renames: dict = field(default_factory=dict)      # c -> D_v d
    auxiliary: list = field(default_factory=list)    # values 0 = d_v - p*c_J
    new_functions: list = field(default_factory=list)
    constant: str = ""


def _blocking_terms(rest, v, reg, eq_vars):
    """Classify un-peeled terms as renamable, auxiliary, or fatal."""
    rename, aux = [], []
    for sym, mi, p in rest:
        if eq_vars <= set(reg.deps(sym)):
            raise ConventionalError(
                f"cannot integrate in {v}: {sym} depends on all variables of the equation")
        (aux if v in p.variables() else rename).append((sym, mi, p))
    return rename, aux


def exact_integrate_wrt(value, v, reg, prefix="d", dry_run=False, allow_aux=True):
    """Integrate ``0 = value`` once in ``v``.

    Un-peeled terms of functions ``c`` of fewer variables than the equation
    are handled by renaming ``c := D_v d`` (coefficient free of ``v``) or by
    an auxiliary function ``d`` with ``0 = d_v - p c_J``.  The registry is
    only touched when ``dry_run`` is false.
    """
    work = reg if not dry_run else reg.copy()
    out = ExactIntegration(v, value)
    eq_vars = reg.expr_vars(value)
    cur = value
    for _ in range(len(value) + 2):
        _, rest = peel_derivative(cur, v, work)
        if not rest:
            break
        rename, aux = _blocking_terms(rest, v, work, eq_vars)
        names = list(work.functions)
        fresh = sorted({sym for sym, _, _ in rename if sym not in out.renames},
                       key=names.index)
        if fresh:
            renames = {}
            for sym in fresh:
                d = work.new_function(work.deps(sym), prefix=prefix)
                out.new_functions.append(d)
                renames[sym] = LinExpr.symbol(FUNCTIONS, d.name, ((v, 1),))
            out.renames.update(renames)
            cur = cur.compose(renames, FUNCTIONS, work.depends)
            continue
        if not allow_aux:
            raise ConventionalError(f"cannot integrate in {v} without auxiliary functions")
        for sym, mi, p in aux:
            term = LinExpr(FUNCTIONS, {(sym, mi): p})
            d = work.new_function(work.sort_vars(work.expr_vars(term)), prefix=prefix)
            out.new_functions.append(d)
            dv = LinExpr.symbol(FUNCTIONS, d.name).diff(v, work.depends)
            out.auxiliary.append(dv - term)
            cur = cur - term + dv
    S, rest = peel_derivative(cur, v, work)
    if rest:
        raise ConventionalError(f"cannot integrate in {v}: {work.format(rest)} is left")
    deps = [w for w in work.sort_vars(work.expr_vars(cur)) if w != v]
    c = work.new_function(deps, prefix=prefix)
    out.new_functions.append(c)
    out.constant = c.name
    out.value = S - LinExpr.symbol(FUNCTIONS, c.name)
    return out


def indirectly_separable(value, reg):
    """True when no function depends on every variable the equation involves.

    Such equations need a differentiate-separate-reintegrate treatment that
    is not implemented; integrating them only renames functions.
    """
    eq_vars = reg.expr_vars(value)
    return not any(eq_vars <= set(reg.deps(s)) for s in value.symbols())


def integrable_variables(value, reg):
    """Variables in which ``value`` integrates exactly, renaming allowed."""
    out = []
    for v in reg.variables:
        if not any(mi_get(mi, v) for _, mi, _ in value):
            continue
        try:
            exact_integrate_wrt(value, v, reg, dry_run=True, allow_aux=False)
        except ConventionalError:
            continue
        out.append(v)
    return out


# separation -------------------------------------------------------------------------

def direct_separate(value, v, reg):
    """Split by powers of ``v``; no function in ``value`` may depend on ``v``."""
    return list(separate_powers(value, v, reg).values())


def separate_powers(value, v, reg):
    """``{k: part}`` with ``value = sum v^k part``, ascending ``k``."""
    bad = sorted(s for s in value.symbols() if reg.depends(s, v))
    if bad:
        raise ConventionalError(f"{', '.join(bad)} depend(s) on {v}")
    parts = {}
    for sym, mi, p in value:
        for k, q in p.split_powers(v).items():
            parts.setdefault(k, {})[(sym, mi)] = q
    return {k: LinExpr(FUNCTIONS, parts[k]) for k in sorted(parts)}


def separable_variable(value, reg):
    """First variable occurring only explicitly (in coefficients)."""
    coeff_vars = value.coefficient_vars()
    for v in reg.variables:
        if v in coeff_vars and not any(reg.depends(s, v) for s in value.symbols()):
            return v
    return None


def additive_groups(value, reg):
    """Partition terms into groups sharing no variable (connected components)."""
    terms = [(sym, mi, p, set(reg.deps(sym)) | p.variables()) for sym, mi, p in value]
    groups = []
    for t in terms:
        hit = [g for g in groups if g[1] & t[3]]
        merged = ([t], set(t[3]))
        for g in hit:
            merged[0].extend(g[0])
            merged[1].update(g[1])
            groups.remove(g)
        groups.append(merged)
    loose = [g for g in groups if not g[1]]
    groups = [g for g in groups if g[1]]
    spare = [t for g in loose for t in g[0]]
    if spare and groups:
        groups[0][0].extend(spare)
    elif spare:
        groups = [(spare, set())]
    out = [LinExpr(FUNCTIONS, {(s, mi): p for s, mi, p, _ in g[0]}) for g in groups]
    return sorted(out, key=lambda e: min(reg.var_index[v] for v in reg.expr_vars(e))
                  if reg.expr_vars(e) else -1)


# substitution ------------------------------------------------------------------------

def algebraic_functions(value, reg, cover=True):
    """Functions occurring once, underived, with a constant factor.

    With ``cover`` they must also depend on every variable of the equation.
    """
    occ = {}
    for sym, mi, p in value:
        occ.setdefault(sym, []).append((mi, p))
    eq_vars = reg.expr_vars(value)
    out = []
    for sym in reg.functions:
        if sym not in occ or len(occ[sym]) != 1:
            continue
        mi, p = occ[sym][0]
        if mi or not p.is_const():
            continue
        if cover and not eq_vars <= set(reg.deps(sym)):
            continue
        out.append(sym)
    return out


def solve_for(value, f):
    c = value.coeff(f, ())
    if not c or not c.is_const():
        raise ConventionalError(f"{f} does not occur algebraically with a constant factor")
    rest = value - LinExpr.symbol(FUNCTIONS, f, (), c)
    return -(rest / c.const_value())


def substitute_function(system, label, f):
    """Eliminate ``f`` using equation ``label``; the equation becomes its definition."""
    if not any(f in e.value.symbols() for e in system.equations.values()):
        return system
    value = system.equations[label].value
    if f not in algebraic_functions(value, system.reg):
        raise ConventionalError(f"{f} cannot be eliminated with {label}")
    expr = solve_for(value, f)
    system.substitute_function(f, expr, definition=label)
    system.log("eliminate", equation=label, function=f, value=system.reg.format(expr))
    return system


# system level moves ----------------------------------------------------------------------

def apply_monomial_integration(system, label, prefix="g"):
    f, expr, new = monomial_integrate(system.equations[label].value, system.reg, prefix)
    system.substitute_function(f, expr)
    system.log("monomial_integrate", equation=label, function=f,
               value=system.reg.format(expr), new_functions=[g.name for g in new])
    return f, expr, new


def apply_exact_integration(system, label, v, prefix="d"):
    """Replace equation ``label`` by its ``v``-integral (syzygies follow along)."""
    res = exact_integrate_wrt(system.equations[label].value, v, system.reg, prefix)
    for c, e in res.renames.items():
        system.substitute_function(c, e)
    aux_labels = [system.add_equation(a) for a in res.auxiliary]
    new = system.add_equation(res.value)
    replacement = LinExpr.symbol(LABELS, new).diff(v)
    for lab in aux_labels:
        replacement = replacement - LinExpr.symbol(LABELS, lab)
    if label in system.equations:
        system.retire(label, "replaced", replacement, replacement=replacement)
    system.log("exact_integrate", equation=label, variable=v, new_equation=new,
               value=system.reg.format(res.value),
               renames={c: system.reg.format(e) for c, e in res.renames.items()},
               auxiliary=aux_labels, new_functions=[d.name for d in res.new_functions])
    return new, res


def apply_separation(system, label, parts, kind, **info):
    """Replace ``label`` by equations ``parts`` whose weighted sum is the original."""
    weights = info.pop("weights")
    labels = [system.add_equation(p) for p in parts]
    replacement = LinExpr(LABELS)
    for lab, w in zip(labels, weights):
        replacement = replacement + LinExpr.symbol(LABELS, lab, (), w)
    system.retire(label, "replaced", replacement, replacement=replacement)
    system.log(kind, equation=label, new_equations={
        lab: system.reg.format(system.value(lab)) for lab in labels}, **info)
    return labels


def separate_directly(system, label, v):
    by_power = separate_powers(system.equations[label].value, v, system.reg)
    weights = [Poly.var(v, k) for k in by_power]
    return apply_separation(system, label, list(by_power.values()), "separate",
                            variable=v, weights=weights)


def separate_additively(system, label, prefix="k"):
    """``A_1 + ... + A_m = 0`` with disjoint variables: ``A_i = k_i``, ``A_m = -sum k_i``."""
    groups = additive_groups(system.equations[label].value, system.reg)
    if len(groups) < 2:
        return None
    parts, total = [], LinExpr(FUNCTIONS)
    consts = []
    for g in groups[:-1]:
        k = system.reg.new_function([], prefix=prefix)
        consts.append(k.name)
        ke = LinExpr.symbol(FUNCTIONS, k.name)
        parts.append(g - ke)
        total = total + ke
    parts.append(groups[-1] + total)
    return apply_separation(system, label, parts, "separate_additive",
                            weights=[1] * len(parts), new_functions=consts)


# redundancy by name ------------------------------------------------------------------------

def _terms_of(e, g):
    return e.filter(lambda s, mi, p: s == g)


def absorbable_functions(system):
    """Greedily find free functions absorbable into a bigger free function.

    ``g`` is absorbable into ``F`` when ``F`` occurs plainly (factor 1) in an
    original function's expression, ``F`` depends on every variable of the
    ``g``-part ``T_g`` there, and ``F := F - T_g`` removes ``g`` from every
    expression and remaining equation.  Returns ``[(g, F)]``.
    """
    reg = system.reg
    dep = reg.depends
    exprs = {f: system.expand_solution(LinExpr.symbol(FUNCTIONS, f))
             for f in system.original_functions}
    remaining = {k: e.value for k, e in system.equations.items()}
    pairs = []
    changed = True
    while changed:
        changed = False
        free = sorted({s for e in list(exprs.values()) + list(remaining.values())
                       for s in e.symbols()},
                      key=lambda s: (len(reg.deps(s)), list(reg.functions).index(s)))
        for g in free:
            for f, e in exprs.items():
                tg = _terms_of(e, g)
                if not tg:
                    continue
                need = set(reg.deps(g)) | tg.coefficient_vars()
                for F in free:
                    if F == g or e.coeff(F, ()) != 1 or not need <= set(reg.deps(F)):
                        continue
                    sub = {F: LinExpr.symbol(FUNCTIONS, F) - tg}
                    new_exprs = {k: x.compose(sub, FUNCTIONS, dep) for k, x in exprs.items()}
                    new_rem = {k: x.compose(sub, FUNCTIONS, dep) for k, x in remaining.items()}
                    if any(g in x.symbols() for x in list(new_exprs.values()) + list(new_rem.values())):
                        continue
                    pairs.append((g, F))
                    exprs, remaining = new_exprs, new_rem
                    changed = True
                    break
                if changed:
                    break
            if changed:
                break
    return pairs


def reduce_equation(system, label, by):
    """Replace ``label`` by its full reduction modulo the equations ``by``."""
    from .reduction import Equation, reduce_fully
    eq = system.equations[label]
    start = Equation(label, eq.value, LinExpr.symbol(LABELS, label))
    basis = [Equation(b, system.equations[b].value, LinExpr.symbol(LABELS, b)) for b in by]
    red = reduce_fully(start, basis, system.ranking)
    if red.value == eq.value:
        return label
    k = red.history.coeff(label, ())
    if not k.is_const() or len(red.history.filter(lambda s, mi, p: s == label)) != 1:
        raise ConventionalError(f"reduction of {label} multiplied it by a non-constant")
    new = system.add_equation(red.value)
    others = red.history - LinExpr.symbol(LABELS, label, (), k)
    replacement = (LinExpr.symbol(LABELS, new) - others) / k.const_value()
    system.retire(label, "replaced", replacement, replacement=replacement)
    system.log("reduce", equation=label, by=list(by), new_equation=new,
               value=system.reg.format(red.value))
    return new


def differentiate_equation(system, label, v):
    """Add ``D_v`` of an equation as a derived equation."""
    from .reduction import Equation
    eq = system.equations[label]
    new = system.next_label()
    system.equations[new] = Equation(new, eq.value.diff(v, system.reg.depends),
                                     eq.history.diff(v))
    system.log("differentiate", equation=label, variable=v, new_equation=new,
               value=system.reg.format(system.equations[new].value))
    return new
