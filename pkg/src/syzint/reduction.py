"""Differential reduction with history tracking.

Every equation carries, next to its value over the unknown functions, a
history: the same quantity written over equation labels.  Reductions update
both in lockstep, so an equation reducing to zero leaves its history behind
as a syzygy.
"""

from __future__ import annotations

from dataclasses import dataclass

from .expr import LABELS, LinExpr, Poly, mi_divides, mi_get, mi_lcm, mi_order, mi_sub


class ReductionError(ValueError):
    pass


class Ranking:
    """Total order on derivatives ``(symbol, multi_index)``.

    ``total``: differential order first, then symbol (earlier registered is
    higher), then orders compared variable by variable in precedence order.
    ``lex``: symbol first, then orders in precedence order.
    """

    KINDS = ("total", "lex")

    def __init__(self, reg, kind="total", precedence=None):
        if kind not in self.KINDS:
            raise ValueError(f"unknown ranking {kind!r}")
        self.reg = reg
        self.kind = kind
        self.precedence = list(precedence or reg.variables)

    def key(self, sym, mi):
        names = list(self.reg.functions)
        sym_rank = -names.index(sym) if sym in self.reg.functions else 0
        orders = tuple(mi_get(mi, v) for v in self.precedence)
        if self.kind == "total":
            return (mi_order(mi), sym_rank, orders)
        return (sym_rank, orders)

    def leading(self, e):
        if e.is_zero():
            raise ReductionError("zero expression has no leading derivative")
        return max(((s, mi) for s, mi, _ in e), key=lambda k: self.key(*k))

    def sorted_terms(self, e):
        return sorted(((s, mi) for s, mi, _ in e), key=lambda k: self.key(*k), reverse=True)


@dataclass
class Equation:
    label: str
    value: LinExpr
    history: LinExpr
    status: str = "active"

    @classmethod
    def original(cls, label, value):
        return cls(label, value, LinExpr.symbol(LABELS, label))

    @property
    def is_base(self):
        return self.history == LinExpr.symbol(LABELS, self.label)


@dataclass
class Syzygy:
    expr: LinExpr

    def labels(self):
        return self.expr.symbols()


def evaluate_labels(expr, values, reg):
    """Substitute label values (expressions over functions) into ``expr``."""
    return expr.compose(values, "f", reg.depends)


def check_history(eq, values, reg):
    return evaluate_labels(eq.history, values, reg) == eq.value


def leading_derivative(eq, ranking):
    return ranking.leading(eq.value)


def leading_coefficient(eq, ranking):
    sym, mi = ranking.leading(eq.value)
    return eq.value.coeff(sym, mi)


def _combine(ka, a_val, a_hist, kb, b_val, b_hist):
    return a_val.scale(ka) - b_val.scale(kb), a_hist.scale(ka) - b_hist.scale(kb)


def cross_differentiate(a, b, ranking, label="pair"):
    """Prolong ``a`` and ``b`` to the lcm of their leading derivatives and cancel.

    The result is ``lc(b) * D_A(a) - lc(a) * D_B(b)`` in value and history.
    """
    reg = ranking.reg
    sa, ja = ranking.leading(a.value)
    sb, jb = ranking.leading(b.value)
    if sa != sb:
        raise ReductionError(f"leading derivatives of {a.label} and {b.label} "
                             f"involve different functions ({sa}, {sb})")
    ka, kb = a.value.coeff(sa, ja), b.value.coeff(sb, jb)
    lcm = mi_lcm(ja, jb)
    da, db = mi_sub(lcm, ja), mi_sub(lcm, jb)
    value, hist = _combine(
        kb, a.value.diff_mi(da, reg.depends), a.history.diff_mi(da),
        ka, b.value.diff_mi(db, reg.depends), b.history.diff_mi(db))
    if ka.is_const() and kb.is_const() and ka == kb:
        # equal constant leading coefficients: keep the plain difference
        value, hist = value / ka, hist / ka
    return Equation(label, value, hist)


def _reducible_term(a, lead, ranking):
    sym, j = lead
    cands = [(s, mi) for s, mi, _ in a.value if s == sym and mi_divides(j, mi)]
    if not cands:
        return None
    return max(cands, key=lambda k: ranking.key(*k))


def reduce(a, b, ranking):
    """One reduction of the highest reducible term of ``a`` by ``b``.

    A constant leading coefficient of ``b`` is divided out; a polynomial one
    multiplies ``a`` through (no fractions are ever formed).
    """
    reg = ranking.reg
    lead = ranking.leading(b.value)
    term = _reducible_term(a, lead, ranking)
    if term is None:
        raise ReductionError(f"{a.label} has no term reducible by {b.label}")
    c = a.value.coeff(*term)
    k = b.value.coeff(*lead)
    d = mi_sub(term[1], lead[1])
    bv, bh = b.value.diff_mi(d, reg.depends), b.history.diff_mi(d)
    if k.is_const():
        f = c / k.const_value()
        value, hist = a.value - bv.scale(f), a.history - bh.scale(f)
    else:
        value, hist = _combine(k, a.value, a.history, c, bv, bh)
    return Equation(a.label, value, hist)


def reduce_fully(a, basis, ranking, on_step=None):
    """Reduce ``a`` until no term is reducible by any equation of ``basis``."""
    basis = [b for b in basis if b.value]
    leads = [(b, ranking.leading(b.value)) for b in basis]
    while a.value:
        best = None
        for b, lead in leads:
            term = _reducible_term(a, lead, ranking)
            if term is None:
                continue
            if best is None or ranking.key(*term) > ranking.key(*best[1]):
                best = (b, term)
        if best is None:
            break
        a = reduce(a, best[0], ranking)
        if on_step is not None:
            on_step(a)
    return a


def harvest_syzygy(eq):
    if eq.value.is_zero() and not eq.history.is_zero():
        return Syzygy(eq.history)
    return None


def s_pairs(equations, ranking):
    """Label pairs with a common leading function, smallest lcm first."""
    eqs = [e for e in equations if e.value]
    leads = {e.label: ranking.leading(e.value) for e in eqs}
    out = []
    for i, a in enumerate(eqs):
        for b in eqs[i + 1:]:
            (sa, ja), (sb, jb) = leads[a.label], leads[b.label]
            if sa == sb:
                # later equation first: D(new) - D(old)
                out.append((ranking.key(sa, mi_lcm(ja, jb)), i, b.label, a.label))
    out.sort(key=lambda t: t[:2])
    return [(a, b) for _, _, a, b in out]


def find_syzygies(equations, ranking, max_pairs=None, on_step=None):
    """Process S-pairs once each; return ``(syzygies, new_equations)``.

    Nonzero remainders join the basis (with their histories) and create new
    pairs.  ``max_pairs`` bounds the work.
    """
    basis = list(equations)
    done = set()
    syzygies, new = [], []
    count = 0
    n = 0
    while max_pairs is None or count < max_pairs:
        todo = [p for p in s_pairs(basis, ranking) if p not in done]
        if not todo:
            break
        a_label, b_label = todo[0]
        done.add((a_label, b_label))
        count += 1
        by = {e.label: e for e in basis}
        n += 1
        eq = cross_differentiate(by[a_label], by[b_label], ranking, label=f"s{n}")
        if on_step is not None:
            on_step(eq)
        eq = reduce_fully(eq, basis, ranking, on_step)
        syz = harvest_syzygy(eq)
        if syz is not None:
            syzygies.append(syz)
        elif eq.value:
            basis.append(eq)
            new.append(eq)
    return syzygies, new


__all__ = [
    "Equation", "Poly", "Ranking", "ReductionError", "Syzygy", "check_history",
    "cross_differentiate", "evaluate_labels", "find_syzygies", "harvest_syzygy",
    "leading_coefficient", "leading_derivative", "reduce", "reduce_fully", "s_pairs",
]
