"""Linear differential expressions with polynomial coefficients.

Two namespaces share one representation: ``"f"`` for unknown functions and
``"e"`` for equation labels.  A term is keyed by ``(symbol, multi_index)``
where a multi-index, like a monomial, is a sorted tuple of
``(variable, order)`` pairs.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction

from .poly import Poly, format_coeff_monomial

FUNCTIONS = "f"
LABELS = "e"


# multi-indices --------------------------------------------------------------

def mi_get(mi, v):
    for w, k in mi:
        if w == v:
            return k
    return 0


def mi_add(mi, v, k=1):
    d = dict(mi)
    n = d.get(v, 0) + k
    if n < 0:
        raise ValueError(f"negative derivative order in {v}")
    if n:
        d[v] = n
    else:
        d.pop(v, None)
    return tuple(sorted(d.items()))


def mi_sum(a, b):
    for v, k in b:
        a = mi_add(a, v, k)
    return a


def mi_sub(a, b):
    for v, k in b:
        a = mi_add(a, v, -k)
    return a


def mi_order(mi):
    return sum(k for _, k in mi)


def mi_divides(a, b):
    """True if every order in ``a`` is at most the one in ``b``."""
    return all(mi_get(b, v) >= k for v, k in a)


def mi_lcm(a, b):
    d = dict(a)
    for v, k in b:
        d[v] = max(d.get(v, 0), k)
    return tuple(sorted(d.items()))


def mi_from_vars(vars_):
    mi = ()
    for v in vars_:
        mi = mi_add(mi, v)
    return mi


# expressions ----------------------------------------------------------------

class LinExpr:
    """Linear homogeneous combination of derivatives of symbols."""

    __slots__ = ("ns", "terms", "_hash")

    def __init__(self, ns, terms=None):
        self.ns = ns
        self.terms = {}
        if terms:
            for key, p in terms.items():
                p = Poly.coerce(p)
                if p:
                    self.terms[key] = p
        self._hash = None

    @classmethod
    def zero(cls, ns=FUNCTIONS):
        return cls(ns)

    @classmethod
    def symbol(cls, ns, name, mi=(), coeff=1):
        return cls(ns, {(name, tuple(mi)): Poly.coerce(coeff)})

    def _check(self, other):
        if not isinstance(other, LinExpr):
            raise TypeError(f"expected LinExpr, got {type(other).__name__}")
        if other.ns != self.ns:
            raise ValueError(f"namespace mismatch: {self.ns!r} vs {other.ns!r}")

    def __add__(self, other):
        self._check(other)
        out = dict(self.terms)
        for k, p in other.terms.items():
            out[k] = out[k] + p if k in out else p
        return LinExpr(self.ns, out)

    def __neg__(self):
        return LinExpr(self.ns, {k: -p for k, p in self.terms.items()})

    def __sub__(self, other):
        self._check(other)
        return self + (-other)

    def scale(self, p):
        p = Poly.coerce(p)
        if not p:
            return LinExpr(self.ns)
        return LinExpr(self.ns, {k: c * p for k, c in self.terms.items()})

    def __mul__(self, p):
        return self.scale(p)

    __rmul__ = __mul__

    def __truediv__(self, c):
        if isinstance(c, Poly):
            c = c.const_value()
        return LinExpr(self.ns, {k: p / c for k, p in self.terms.items()})

    def is_zero(self):
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def __len__(self):
        return len(self.terms)

    def __iter__(self):
        for (sym, mi), p in self.terms.items():
            yield sym, mi, p

    def coeff(self, sym, mi=()):
        return self.terms.get((sym, tuple(mi)), Poly())

    def symbols(self):
        return {sym for sym, _ in self.terms}

    def coefficient_vars(self):
        out = set()
        for p in self.terms.values():
            out |= p.variables()
        return out

    def filter(self, pred):
        return LinExpr(self.ns, {(s, mi): p for (s, mi), p in self.terms.items()
                                 if pred(s, mi, p)})

    # differentiation ---------------------------------------------------------

    def diff(self, v, depends=None):
        """Total derivative in ``v``.

        ``depends(symbol, v)`` tells whether a symbol depends on ``v``;
        ``None`` means every symbol does (the label namespace).
        """
        out = {}
        for (sym, mi), p in self.terms.items():
            dp = p.diff(v)
            if dp:
                key = (sym, mi)
                out[key] = out[key] + dp if key in out else dp
            if depends is None or depends(sym, v):
                key = (sym, mi_add(mi, v))
                out[key] = out[key] + p if key in out else p
        return LinExpr(self.ns, out)

    def diff_mi(self, mi, depends=None):
        e = self
        for v, k in mi:
            for _ in range(k):
                e = e.diff(v, depends)
        return e

    def compose(self, mapping, ns, depends=None):
        """Replace each symbol ``s`` in ``mapping`` by ``mapping[s]``.

        A term ``p * s_J`` becomes ``p * D_J(mapping[s])``; ``depends`` is the
        dependency test of the target namespace ``ns``.  Symbols absent from
        ``mapping`` are kept, which requires ``ns == self.ns``.
        """
        out = LinExpr(ns)
        keep = {}
        for (sym, mi), p in self.terms.items():
            if sym in mapping:
                out = out + mapping[sym].diff_mi(mi, depends).scale(p)
            else:
                if ns != self.ns:
                    raise KeyError(f"no substitution for {sym!r}")
                keep[(sym, mi)] = p
        return out + LinExpr(ns, keep)

    def __eq__(self, other):
        if not isinstance(other, LinExpr):
            return NotImplemented
        return self.ns == other.ns and self.terms == other.terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.ns, frozenset(self.terms.items())))
        return self._hash

    def __repr__(self):
        return f"LinExpr({self.ns!r}, {format_expr(self)})"


# registry -------------------------------------------------------------------

@dataclass(frozen=True)
class FuncSymbol:
    name: str
    deps: tuple
    origin: str = "original"   # original | integration | divint_auxiliary


class ParseError(ValueError):
    def __init__(self, msg, pos=None, text=None, line=None):
        self.msg, self.pos, self.text, self.line = msg, pos, text, line
        where = ""
        if line is not None:
            where += f"line {line}, "
        if pos is not None:
            where += f"column {pos + 1}: "
        super().__init__(where + msg)


_TOKEN = re.compile(r"\s*(?:(\d+)|([A-Za-z][A-Za-z0-9]*)(?:_([A-Za-z0-9]+))?|(\S))")


def _tokenize(text):
    out, pos = [], 0
    while True:
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            break
        at = m.end() - len(m.group(0).lstrip())
        if m.group(1) is not None:
            out.append(("num", int(m.group(1)), at))
        elif m.group(2) is not None:
            out.append(("ident", (m.group(2), m.group(3)), at))
        elif m.group(4) in "+-*/^":
            out.append(("op", m.group(4), at))
        else:
            raise ParseError(f"unexpected character {m.group(4)!r}", at)
        pos = m.end()
    if text[pos:].strip():
        raise ParseError("unexpected input", pos)
    return out


class Registry:
    """Independent variables and unknown functions of one session."""

    def __init__(self, variables):
        self.variables = list(variables)
        if len(set(self.variables)) != len(self.variables):
            raise ValueError("duplicate variable names")
        self.var_index = {v: i for i, v in enumerate(self.variables)}
        self.functions = {}
        self._counters = {}

    def copy(self):
        r = Registry(self.variables)
        r.functions = dict(self.functions)
        r._counters = dict(self._counters)
        return r

    def add_function(self, name, deps, origin="original"):
        if name in self.functions or name in self.var_index:
            raise ValueError(f"name {name!r} already in use")
        unknown = [v for v in deps if v not in self.var_index]
        if unknown:
            raise ValueError(f"unknown variables {unknown} for {name}")
        deps = tuple(sorted(set(deps), key=self.var_index.get))
        fs = FuncSymbol(name, deps, origin)
        self.functions[name] = fs
        return fs

    def new_function(self, deps, prefix="c", origin="integration"):
        n = self._counters.get(prefix, 0)
        while True:
            n += 1
            name = f"{prefix}{n}"
            if name not in self.functions and name not in self.var_index:
                break
        self._counters[prefix] = n
        return self.add_function(name, deps, origin)

    def deps(self, name):
        return self.functions[name].deps

    def depends(self, name, v):
        return v in self.functions[name].deps

    def sort_vars(self, vars_):
        return sorted(set(vars_), key=self.var_index.get)

    def expr_vars(self, e):
        """Variables an expression over functions actually involves."""
        out = set(e.coefficient_vars())
        for sym in e.symbols():
            out |= set(self.deps(sym))
        return out

    def func(self, name, *vars_, coeff=1):
        return LinExpr.symbol(FUNCTIONS, name, mi_from_vars(vars_), coeff)

    # text ------------------------------------------------------------------------

    def _split_suffix(self, suffix, pos):
        names = sorted(self.variables, key=len, reverse=True)
        out, i = [], 0
        while i < len(suffix):
            for v in names:
                if suffix.startswith(v, i):
                    out.append(v)
                    i += len(v)
                    break
            else:
                raise ParseError(f"unknown variable in derivative suffix {suffix!r}", pos)
        return out

    def parse(self, text, ns=FUNCTIONS):
        """Parse ``coef*deriv`` terms joined by ``+``/``-``.

        A coefficient is a product of integers and variables (``x^3``), with
        optional ``/n`` divisions; a derivative is ``name`` or ``name_vars``
        (suffix order is irrelevant, ``f_zy == f_yz``).  ``"0"`` is the
        empty expression.
        """
        toks = _tokenize(text)
        if len(toks) == 1 and toks[0][:2] == ("num", 0):
            return LinExpr(ns)
        if not toks:
            raise ParseError("empty expression", 0)
        out = LinExpr(ns)
        i = 0
        n = len(toks)

        def at(k):
            return toks[k][2] if k < n else len(text)

        first = True
        while i < n:
            sign = 1
            if toks[i][0] == "op" and toks[i][1] in "+-":
                sign = -1 if toks[i][1] == "-" else 1
                i += 1
            elif not first:
                raise ParseError("expected '+' or '-'", at(i))
            first = False
            coeff, symbol, term_at = Poly.const(sign), None, at(i)
            expect_factor = True
            while i < n:
                kind, val, pos = toks[i]
                if expect_factor:
                    if kind == "num":
                        coeff = coeff * val
                        i += 1
                    elif kind == "ident":
                        name, suffix = val
                        i += 1
                        exp = 1
                        if i < n and toks[i][:2] == ("op", "^"):
                            if i + 1 >= n or toks[i + 1][0] != "num":
                                raise ParseError("malformed exponent", at(i))
                            exp = toks[i + 1][1]
                            i += 2
                        if name in self.var_index and suffix is None:
                            coeff = coeff * Poly.var(name, exp)
                        else:
                            symbol = self._parse_symbol(name, suffix, exp, symbol, ns, pos)
                    else:
                        raise ParseError(f"unexpected {val!r}", pos)
                    expect_factor = False
                elif kind == "op" and val == "*":
                    expect_factor = True
                    i += 1
                elif kind == "op" and val == "/":
                    if i + 1 >= n or toks[i + 1][0] != "num":
                        raise ParseError("division only by integers is allowed", at(i + 1))
                    if toks[i + 1][1] == 0:
                        raise ParseError("division by zero", at(i + 1))
                    coeff = coeff / toks[i + 1][1]
                    i += 2
                elif kind == "op" and val in "+-":
                    break
                else:
                    raise ParseError("missing operator between factors", pos)
            if expect_factor:
                raise ParseError("expression ends after an operator", at(i))
            if symbol is None:
                raise ParseError("term without an unknown (inhomogeneous term)", term_at)
            out = out + LinExpr.symbol(ns, symbol[0], symbol[1], coeff)
        return out

    def _parse_symbol(self, name, suffix, exp, previous, ns, pos):
        if exp != 1:
            raise ParseError("powers of unknowns are not linear", pos)
        if previous is not None:
            raise ParseError("product of two unknowns is not linear", pos)
        if ns == FUNCTIONS and name not in self.functions:
            raise ParseError(f"unknown function {name!r}", pos)
        if ns == LABELS and (name in self.functions or name in self.var_index):
            raise ParseError(f"{name!r} is not an equation label", pos)
        mi = ()
        if suffix is not None:
            for v in self._split_suffix(suffix, pos):
                mi = mi_add(mi, v)
        if ns == FUNCTIONS:
            bad = [v for v, _ in mi if not self.depends(name, v)]
            if bad:
                raise ParseError(f"{name} does not depend on {bad[0]}", pos)
        return name, mi

    def format(self, e):
        return format_expr(e, self)


def _natural_key(name):
    return [int(t) if t.isdigit() else t for t in re.findall(r"\d+|\D+", name)]


def term_sort_key(sym, mi, reg=None):
    if reg is not None and sym in reg.functions:
        sym_key = (0, list(reg.functions).index(sym), [])
        vidx = reg.var_index
    else:
        sym_key = (1, 0, _natural_key(sym))
        vidx = reg.var_index if reg is not None else {}
    mi_key = tuple(sorted((vidx.get(v, len(vidx)), v, k) for v, k in mi))
    return (sym_key, -mi_order(mi), mi_key)


def format_derivative(sym, mi, reg=None):
    if not mi:
        return sym
    vidx = reg.var_index if reg is not None else {}
    vs = sorted(mi, key=lambda vk: (vidx.get(vk[0], len(vidx)), vk[0]))
    return sym + "_" + "".join(v for v, k in vs for _ in range(k))


def format_expr(e, reg=None):
    if e.is_zero():
        return "0"
    order = reg.var_index if reg is not None else None
    parts = []
    for sym, mi in sorted(e.terms, key=lambda k: term_sort_key(k[0], k[1], reg)):
        d = format_derivative(sym, mi, reg)
        for m, c in e.terms[(sym, mi)].sorted_terms(order):
            body = format_coeff_monomial(c, m, order)
            if body == "1":
                text = d
            elif not m:
                if c.denominator == 1:
                    text = f"{abs(c.numerator)}*{d}"
                else:
                    text = f"{abs(c.numerator)}/{c.denominator}*{d}" if abs(c.numerator) != 1 \
                        else f"{d}/{c.denominator}"
            elif "/" in body:
                mono, den = body.rsplit("/", 1)
                text = f"{mono}*{d}/{den}"
            else:
                text = f"{body}*{d}"
            neg = c < 0
            if not parts:
                parts.append(("-" if neg else "") + text)
            else:
                parts.append((" - " if neg else " + ") + text)
    return "".join(parts)
