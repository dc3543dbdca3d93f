"""Total derivatives, term-wise integration and divergence/curl detection."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from itertools import combinations

from .expr import FUNCTIONS, LinExpr, mi_add, mi_get

log = logging.getLogger(__name__)


def depends_for(e, reg):
    """Dependency test for the namespace of ``e`` (labels depend on everything)."""
    if e.ns == FUNCTIONS:
        if reg is None:
            raise ValueError("a registry is needed to differentiate unknown functions")
        return reg.depends
    return None


def total_derivative(e, v, reg=None):
    return e.diff(v, depends_for(e, reg))


def peel_derivative(e, v, reg=None):
    """Split ``e = D_v(S) + R`` by term-wise integration in ``v``.

    Terms carrying a ``v``-derivative are integrated highest order first (the
    coefficient's ``v``-derivative stays behind and is peeled again).  Terms
    of symbols independent of ``v`` are integrated through their coefficient.
    Whatever is left is ``R``.
    """
    depends = depends_for(e, reg)
    s = LinExpr(e.ns)
    rest = e
    while True:
        cands = [(mi_get(mi, v), sym, mi) for sym, mi, _ in rest if mi_get(mi, v)]
        if not cands:
            break
        _, sym, mi = max(cands, key=lambda c: c[0])
        piece = LinExpr(e.ns, {(sym, mi_add(mi, v, -1)): rest.coeff(sym, mi)})
        s = s + piece
        rest = rest - piece.diff(v, depends)
    if depends is not None:
        for sym, mi, p in list(rest):
            if not depends(sym, v):
                piece = LinExpr(e.ns, {(sym, mi): p.integrate(v)})
                s = s + piece
                rest = rest - piece.diff(v, depends)
    return s, rest


@dataclass
class DivergenceForm:
    vars: tuple
    components: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.vars)

    def divergence(self, reg=None):
        out = None
        for v in self.vars:
            d = total_derivative(self.components[v], v, reg)
            out = d if out is None else out + d
        return out


def divergence_decompose(e, vars_, reg=None):
    """Peel ``e`` over ``vars_`` in the given order; ``None`` unless exact.

    Every listed variable must receive a nonzero component.
    """
    comps = {}
    rest = e
    for v in vars_:
        comps[v], rest = peel_derivative(rest, v, reg)
    if rest or any(not c for c in comps.values()):
        return None
    return DivergenceForm(tuple(vars_), comps)


def find_divergence(e, variables, reg=None, max_size=None, min_size=2):
    """Smallest-first search for a divergence form of one syzygy.

    Subsets are enumerated by size, lexicographically by variable index
    within a size; each subset is peeled starting from its last variable.
    The first success is returned and further successes of that size are
    only logged.
    """
    variables = list(variables)
    max_size = len(variables) if max_size is None else min(max_size, len(variables))
    for size in range(min_size, max_size + 1):
        found = None
        for subset in combinations(variables, size):
            df = divergence_decompose(e, tuple(reversed(subset)), reg)
            if df is None:
                continue
            df = DivergenceForm(subset, {v: df.components[v] for v in subset})
            if found is None:
                found = df
            else:
                log.info("alternative divergence over %s ignored", subset)
        if found is not None:
            return found
    return None


@dataclass
class CurlForm:
    """Antisymmetric ``P^{ij}``; only pairs ``i < j`` (by position) are stored."""

    vars: tuple
    components: dict = field(default_factory=dict)

    def get(self, i, j):
        if i == j:
            return None
        a, b = self.vars.index(i), self.vars.index(j)
        if a < b:
            return self.components.get((i, j))
        c = self.components.get((j, i))
        return None if c is None else -c

    def row_divergence(self, i, reg=None):
        out = None
        for j in self.vars:
            if j == i:
                continue
            c = self.get(i, j)
            if c is None:
                continue
            d = total_derivative(c, j, reg)
            out = d if out is None else out + d
        return out


def curl_decompose(syzygies, vars_, reg=None):
    """Read syzygy number ``k`` as ``0 = D_j P^{ij}`` with ``i = vars_[k]``.

    Returns ``None`` unless every row peels exactly and the rows agree on
    ``P^{ij} = -P^{ji}``.
    """
    vars_ = tuple(vars_)
    if not syzygies or len(syzygies) != len(vars_) or len(vars_) < 3:
        return None
    rows = {}
    for i, syz in zip(vars_, syzygies):
        rest = syz
        row = {}
        for j in reversed([w for w in vars_ if w != i]):
            row[j], rest = peel_derivative(rest, j, reg)
        if rest:
            return None
        rows[i] = row
    comps = {}
    for a, i in enumerate(vars_):
        for j in vars_[a + 1:]:
            if rows[i][j] != -rows[j][i]:
                return None
            if rows[i][j]:
                comps[(i, j)] = rows[i][j]
    if not comps:
        return None
    return CurlForm(vars_, comps)
