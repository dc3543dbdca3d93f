"""Potentials of conserved currents and of curl-free tensors.

``divint`` finds antisymmetric ``Q^{ij}`` with ``P^i = D_j Q^{ij}``.  It runs
three phases: paired transfer of ``x^j``-derivatives out of ``P^i`` into
``Q^{ij}`` (``j > i``), one-sided absorption of the remaining derivatives
(``j < i``), and finally term-wise integration of what is left, either
through the explicit coefficient or with a new auxiliary function bound by
an extra first-order equation.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations

from .expr import FUNCTIONS, LinExpr, mi_add, mi_get


class PotentialError(ValueError):
    pass


class NotConservedError(PotentialError):
    def __init__(self, residual, text=""):
        self.residual = residual
        super().__init__(f"input is not conserved, divergence = {text or residual}")


@dataclass
class AuxEquation:
    """``0 = value = D_var(func) - a*f_J``, attached to one row of the current."""

    func: str
    var: str
    row: tuple
    value: LinExpr


@dataclass
class PotentialResult:
    vars: tuple
    Q: dict = field(default_factory=dict)     # (i, j) with i before j
    E: list = field(default_factory=list)
    F: list = field(default_factory=list)

    def get(self, i, j):
        a, b = self.vars.index(i), self.vars.index(j)
        if a == b:
            return LinExpr(FUNCTIONS)
        if a < b:
            return self.Q.get((i, j), LinExpr(FUNCTIONS))
        return -self.Q.get((j, i), LinExpr(FUNCTIONS))

    def row_residual(self, P, i, reg):
        """``P^i - D_j Q^{ij} + (row-i auxiliary equations)``; zero when valid."""
        out = P.get(i, LinExpr(FUNCTIONS))
        for j in self.vars:
            if j != i:
                out = out - self.get(i, j).diff(j, reg.depends)
        for aux in self.E:
            if aux.row == (i,):
                out = out + aux.value
        return out


def divergence_of(P, vars_, reg):
    out = LinExpr(FUNCTIONS)
    for v in vars_:
        if v in P:
            out = out + P[v].diff(v, reg.depends)
    return out


def _take_derivative_term(e, j):
    """Highest ``x^j``-order term of ``e`` that carries an ``x^j``-derivative."""
    best = None
    for sym, mi, p in e:
        k = mi_get(mi, j)
        if k and (best is None or k > best[0] or (k == best[0] and (sym, mi) < best[1][:2])):
            best = (k, (sym, mi, p))
    return None if best is None else best[1]


def _shift(P, i, j, piece, reg):
    """Move ``piece`` into ``Q^{ij}``: ``P^i -= D_j piece``, ``P^j += D_i piece``."""
    P[i] = P[i] - piece.diff(j, reg.depends)
    P[j] = P[j] + piece.diff(i, reg.depends)


def _paired(P, vars_, reg, ok, addq):
    for a, i in enumerate(vars_[:-1]):
        for j in vars_[a + 1:]:
            if not ok(i, j):
                continue
            while (t := _take_derivative_term(P[i], j)) is not None:
                sym, mi, c = t
                piece = LinExpr(FUNCTIONS, {(sym, mi_add(mi, j, -1)): c})
                _shift(P, i, j, piece, reg)
                addq(i, j, piece)


def _one_sided(P, vars_, reg, ok, addq):
    # the partner update vanishes whenever the piece is free of x^i
    for a in range(1, len(vars_)):
        i = vars_[a]
        for j in vars_[:a]:
            if not ok(i, j):
                continue
            while (t := _take_derivative_term(P[i], j)) is not None:
                sym, mi, c = t
                piece = LinExpr(FUNCTIONS, {(sym, mi_add(mi, j, -1)): c})
                _shift(P, i, j, piece, reg)
                addq(i, j, piece)


def _termwise(P, vars_, reg, ok, addq, res, exclude, prefix):
    p = len(vars_)
    for a, i in enumerate(vars_):
        # candidates in cyclic order after x^i
        cyclic = [vars_[(a + k) % p] for k in range(1, p)]
        cyclic = [j for j in cyclic if ok(i, j)]
        for sym, mi, c in sorted(P[i], key=lambda t: (t[0], t[1])):
            if not cyclic:
                raise PotentialError(f"no admissible direction to integrate {sym} in row {i}")
            free = [j for j in cyclic if not reg.depends(sym, j)]
            term = LinExpr(FUNCTIONS, {(sym, mi): c})
            if free:
                j = free[0]
                q = LinExpr(FUNCTIONS, {(sym, mi): c.integrate(j)})
                _shift(P, i, j, q, reg)
                addq(i, j, q)
            else:
                j = cyclic[0]
                deps = [v for v in reg.variables if v != i and v not in exclude]
                fb = reg.new_function(deps, prefix=prefix, origin="divint_auxiliary")
                fexpr = LinExpr.symbol(FUNCTIONS, fb.name)
                res.F.append(fb)
                res.E.append(AuxEquation(fb.name, j, (i,),
                                         fexpr.diff(j, reg.depends) - term))
                P[i] = P[i] - term
                addq(i, j, fexpr)


def divint(P, vars_, reg, allowed=None, exclude=(), prefix="c", check=True, max_passes=8):
    """Potentials ``Q^{ij}`` of a conserved current.

    ``P`` maps variables to expressions over functions.  ``allowed`` (a set
    of frozen pairs) limits which ``Q^{ij}`` may be nonzero; ``exclude``
    names further variables an auxiliary function must not depend on.
    """
    vars_ = tuple(vars_)
    zero = LinExpr(FUNCTIONS)
    P = {v: P.get(v, zero) for v in vars_}
    if check:
        div = divergence_of(P, vars_, reg)
        if div:
            raise NotConservedError(div, reg.format(div))
    res = PotentialResult(vars_)
    Q = {}

    def ok(i, j):
        return allowed is None or frozenset((i, j)) in allowed

    def addq(i, j, e):
        a, b = vars_.index(i), vars_.index(j)
        key, e = ((i, j), e) if a < b else ((j, i), -e)
        Q[key] = Q.get(key, zero) + e

    for _ in range(max_passes):
        _paired(P, vars_, reg, ok, addq)
        _one_sided(P, vars_, reg, ok, addq)
        _termwise(P, vars_, reg, ok, addq, res, exclude, prefix)
        if not any(P.values()):
            break
    else:
        left = {v: reg.format(e) for v, e in P.items() if e}
        raise PotentialError(f"components left after {max_passes} passes: {left}")

    res.Q = {k: v for k, v in Q.items() if v}
    return res


def _perm_sign(seq, ref):
    """Sign of the permutation taking ``ref`` order to ``seq``."""
    idx = [ref.index(s) for s in seq]
    sign = 1
    for a in range(len(idx)):
        for b in range(a + 1, len(idx)):
            if idx[a] > idx[b]:
                sign = -sign
    return sign


@dataclass
class CurlPotentialResult:
    vars: tuple
    Q3: dict = field(default_factory=dict)    # sorted triple -> expression
    E: list = field(default_factory=list)
    F: list = field(default_factory=list)

    def get(self, i, j, k):
        trip = (i, j, k)
        if len(set(trip)) < 3:
            return LinExpr(FUNCTIONS)
        key = tuple(sorted(trip, key=self.vars.index))
        e = self.Q3.get(key, LinExpr(FUNCTIONS))
        return e if _perm_sign(trip, key) > 0 else -e

    def pair_residual(self, P2, i, j, reg):
        """``P^{ij} - D_k Q^{ijk}`` plus row auxiliaries; ``P2`` as for :func:`curlint`."""
        if (i, j) in P2:
            out = P2[(i, j)]
        else:
            out = -P2.get((j, i), LinExpr(FUNCTIONS))
        for k in self.vars:
            if k not in (i, j):
                out = out - self.get(i, j, k).diff(k, reg.depends)
        for aux in self.E:
            if aux.row == (i, j):
                out = out + aux.value
            elif aux.row == (j, i):
                out = out - aux.value
        return out


def curlint(P2, vars_, reg, prefix="c"):
    """Totally antisymmetric ``Q^{ijk}`` with ``P^{ij} = D_k Q^{ijk}``.

    ``P2`` maps ordered pairs ``(i, j)`` (``i`` before ``j``) to expressions;
    missing pairs are zero.  Rows are integrated one after another, each row
    only filling triples no earlier row has fixed.
    """
    vars_ = tuple(vars_)
    zero = LinExpr(FUNCTIONS)

    def p2(i, j):
        if i == j:
            return zero
        if vars_.index(i) < vars_.index(j):
            return P2.get((i, j), zero)
        return -P2.get((j, i), zero)

    res = CurlPotentialResult(vars_)
    for i in vars_:
        rest = [v for v in vars_ if v != i]
        row = {}
        for j in rest:
            r = p2(i, j)
            for k in rest:
                if k != j:
                    r = r - res.get(i, j, k).diff(k, reg.depends)
            for aux in res.E:
                if aux.row == (i, j):
                    r = r + aux.value
                elif aux.row == (j, i):
                    r = r - aux.value
            row[j] = r
        if not any(row.values()):
            continue
        known = set(frozenset(t) for t in res.Q3)
        allowed = {frozenset((j, k)) for j, k in combinations(rest, 2)
                   if frozenset((i, j, k)) not in known}
        try:
            sub = divint(row, rest, reg, allowed=allowed, exclude=(i,), prefix=prefix)
        except NotConservedError as exc:
            raise PotentialError(f"row {i} of the tensor is not divergence free") from exc
        except PotentialError as exc:
            raise PotentialError(f"rows cannot be merged antisymmetrically at {i}: {exc}") from exc
        for (j, k), e in sub.Q.items():
            key = tuple(sorted((i, j, k), key=vars_.index))
            res.Q3[key] = e if _perm_sign((i, j, k), key) > 0 else -e
        for aux in sub.E:
            res.E.append(AuxEquation(aux.func, aux.var, (i, aux.row[0]), aux.value))
        res.F.extend(sub.F)
    for i, j in combinations(vars_, 2):
        if res.pair_residual(P2, i, j, reg):
            raise PotentialError(f"inconsistent rows: P^{i}{j} is not reproduced")
    res.Q3 = {k: v for k, v in res.Q3.items() if v}
    return res
