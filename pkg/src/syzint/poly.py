"""Exact multivariate polynomials over the rationals.

A monomial is a tuple of ``(variable, exponent)`` pairs sorted by variable
name with zero exponents dropped; the empty tuple is the constant monomial.
Instances are treated as immutable values.
"""

from __future__ import annotations

from fractions import Fraction
from numbers import Rational


def _mono_mul(a, b):
    exps = dict(a)
    for v, e in b:
        exps[v] = exps.get(v, 0) + e
    return tuple(sorted(exps.items()))


def _mono_degree(m):
    return sum(e for _, e in m)


class Poly:
    __slots__ = ("terms", "_hash")

    def __init__(self, terms=None):
        clean = {}
        if terms:
            for m, c in terms.items():
                c = Fraction(c)
                if c:
                    clean[m] = clean.get(m, 0) + c
        self.terms = {m: c for m, c in clean.items() if c}
        self._hash = None

    @classmethod
    def const(cls, c):
        return cls({(): c})

    @classmethod
    def var(cls, name, exp=1):
        if exp == 0:
            return cls.const(1)
        return cls({((name, exp),): 1})

    @classmethod
    def coerce(cls, value):
        if isinstance(value, Poly):
            return value
        if isinstance(value, (int, Rational)):
            return cls.const(value)
        raise TypeError(f"cannot make a polynomial from {value!r}")

    # arithmetic ----------------------------------------------------------

    def __add__(self, other):
        other = Poly.coerce(other)
        out = dict(self.terms)
        for m, c in other.terms.items():
            out[m] = out.get(m, 0) + c
        return Poly(out)

    __radd__ = __add__

    def __neg__(self):
        return Poly({m: -c for m, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-Poly.coerce(other))

    def __rsub__(self, other):
        return Poly.coerce(other) - self

    def __mul__(self, other):
        other = Poly.coerce(other)
        out = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                m = _mono_mul(m1, m2)
                out[m] = out.get(m, 0) + c1 * c2
        return Poly(out)

    __rmul__ = __mul__

    def __truediv__(self, other):
        # only division by a nonzero rational constant is exact here
        if isinstance(other, Poly):
            if not other.is_const():
                raise ValueError("division by a non-constant polynomial")
            other = other.const_value()
        other = Fraction(other)
        if not other:
            raise ZeroDivisionError("polynomial division by zero")
        return Poly({m: c / other for m, c in self.terms.items()})

    def __pow__(self, n):
        out = Poly.const(1)
        for _ in range(n):
            out = out * self
        return out

    # calculus ------------------------------------------------------------

    def diff(self, v):
        out = {}
        for m, c in self.terms.items():
            exps = dict(m)
            e = exps.get(v, 0)
            if not e:
                continue
            if e == 1:
                del exps[v]
            else:
                exps[v] = e - 1
            key = tuple(sorted(exps.items()))
            out[key] = out.get(key, 0) + c * e
        return Poly(out)

    def integrate(self, v):
        """Antiderivative in ``v`` with zero constant of integration."""
        out = {}
        for m, c in self.terms.items():
            exps = dict(m)
            e = exps.get(v, 0) + 1
            exps[v] = e
            out[tuple(sorted(exps.items()))] = c / e
        return Poly(out)

    # inspection ----------------------------------------------------------

    def is_zero(self):
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def is_const(self):
        return not self.terms or (len(self.terms) == 1 and () in self.terms)

    def const_value(self):
        if not self.is_const():
            raise ValueError(f"{self} is not constant")
        return self.terms.get((), Fraction(0))

    def variables(self):
        return {v for m in self.terms for v, _ in m}

    def degree_in(self, v):
        return max((dict(m).get(v, 0) for m in self.terms), default=0)

    def total_degree(self):
        return max((_mono_degree(m) for m in self.terms), default=0)

    def split_powers(self, v):
        """Map ``k -> coefficient of v**k`` (coefficients free of ``v``)."""
        out = {}
        for m, c in self.terms.items():
            exps = dict(m)
            k = exps.pop(v, 0)
            out.setdefault(k, {})[tuple(sorted(exps.items()))] = c
        return {k: Poly(t) for k, t in out.items()}

    def subs_zero(self, v):
        return Poly({m: c for m, c in self.terms.items() if v not in dict(m)})

    def __eq__(self, other):
        if isinstance(other, (int, Rational)):
            other = Poly.const(other)
        if not isinstance(other, Poly):
            return NotImplemented
        return self.terms == other.terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self.terms.items()))
        return self._hash

    def sorted_terms(self, order=None):
        """Terms by descending total degree, then by variable order."""
        order = order or {}

        def key(item):
            m, _ = item
            return (-_mono_degree(m),
                    tuple((order.get(v, len(order)), v, -e) for v, e in m))

        return sorted(self.terms.items(), key=key)

    def __repr__(self):
        return f"Poly({format_poly(self)})"

    def __str__(self):
        return format_poly(self)


def format_monomial(m, order=None):
    order = order or {}
    parts = []
    for v, e in sorted(m, key=lambda ve: (order.get(ve[0], len(order)), ve[0])):
        parts.append(v if e == 1 else f"{v}^{e}")
    return "*".join(parts)


def format_coeff_monomial(c, m, order=None):
    """Unsigned text for ``|c| * m``; the caller prints the sign."""
    c = abs(c)
    mono = format_monomial(m, order)
    if not mono:
        return str(c)
    if c == 1:
        return mono
    if c.denominator == 1:
        return f"{c.numerator}*{mono}"
    if c.numerator == 1:
        return f"{mono}/{c.denominator}"
    return f"{c.numerator}*{mono}/{c.denominator}"


def format_poly(p, order=None):
    if not p.terms:
        return "0"
    out = []
    for i, (m, c) in enumerate(p.sorted_terms(order)):
        body = format_coeff_monomial(c, m, order)
        if i == 0:
            out.append(("-" if c < 0 else "") + body)
        else:
            out.append((" - " if c < 0 else " + ") + body)
    return "".join(out)
