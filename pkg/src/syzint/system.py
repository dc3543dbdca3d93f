"""A PDE system under simplification.

Keeps the active equations (with histories), equations that left the system
(deleted as redundant, used as definitions, or vanished), the known
syzygies over equation labels, and the substitutions found so far.  Every
mutation keeps two facts true: each stored syzygy evaluates to zero on the
current label values, and each history evaluates to its equation's value.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .expr import FUNCTIONS, LABELS, LinExpr, Registry, format_expr
from .reduction import Equation, Ranking, evaluate_labels


class SystemStateError(ValueError):
    pass


@dataclass
class Retired:
    equation: Equation
    reason: str                       # deleted | definition | vanished | replaced
    detail: LinExpr | None = None     # solving syzygy or replacement expression
    replacement: LinExpr | None = None  # the equation in terms of other labels


@dataclass
class System:
    reg: Registry
    equations: dict = field(default_factory=dict)     # label -> Equation (active)
    retired: dict = field(default_factory=dict)       # label -> Retired
    syzygies: list = field(default_factory=list)      # LinExpr over labels
    used_syzygies: list = field(default_factory=list)
    solution: dict = field(default_factory=dict)      # function -> LinExpr
    originals: dict = field(default_factory=dict)     # label -> value as given
    original_functions: tuple = ()
    ranking_kind: str = "total"
    label_prefix: str = "e"
    counter: int = 0
    trace: list = field(default_factory=list)

    @classmethod
    def from_strings(cls, variables, functions, equations, ranking="total"):
        reg = Registry(variables)
        for name, deps in functions:
            reg.add_function(name, deps)
        sys_ = cls(reg, ranking_kind=ranking)
        sys_.original_functions = tuple(reg.functions)
        for text in equations:
            value = reg.parse(text) if isinstance(text, str) else text
            lab = sys_.add_equation(value)
            sys_.originals[lab] = value
        return sys_

    # labels ----------------------------------------------------------------

    @property
    def ranking(self):
        return Ranking(self.reg, self.ranking_kind)

    def next_label(self):
        self.counter += 1
        return f"{self.label_prefix}{self.counter}"

    def add_equation(self, value, history=None, label=None):
        label = label or self.next_label()
        if history is None:
            eq = Equation.original(label, value)
        else:
            eq = Equation(label, value, history)
        self.equations[label] = eq
        return label

    def value(self, label):
        if label in self.equations:
            return self.equations[label].value
        if label in self.retired:
            return self.retired[label].equation.value
        raise KeyError(label)

    def label_values(self):
        out = {k: e.value for k, e in self.equations.items()}
        out.update({k: r.equation.value for k, r in self.retired.items()})
        return out

    def evaluate(self, expr):
        """Value over functions of an expression over labels."""
        return evaluate_labels(expr, self.label_values(), self.reg)

    def active_functions(self):
        return [f for f in self.reg.functions if f not in self.solution]

    def log(self, action, **data):
        self.trace.append({"step": len(self.trace) + 1, "action": action, **data})

    # label-level substitution ------------------------------------------------

    def substitute_label(self, label, expr):
        """Replace ``label`` by ``expr`` (over labels) in syzygies and histories."""
        mapping = {label: expr}
        out = []
        for s in self.syzygies:
            if label in s.symbols():
                s = s.compose(mapping, LABELS)
            if s:
                out.append(s)
        self.syzygies = out
        for eq in self.equations.values():
            if label in eq.history.symbols() and eq.label != label:
                eq.history = eq.history.compose(mapping, LABELS)

    def retire(self, label, reason, detail=None, replacement=None):
        eq = self.equations.pop(label)
        self.retired[label] = Retired(eq, reason, detail, replacement)
        if not eq.is_base:
            # derived labels never appear in syzygies; their history, set
            # equal to the replacement, is a new identity over base labels
            if replacement is not None:
                self.add_syzygy(eq.history - replacement)
            return
        if replacement is not None:
            self.substitute_label(label, replacement)

    def delete_redundant(self, label, syzygy):
        """Delete ``label`` using a syzygy in which it occurs algebraically."""
        c = syzygy.coeff(label, ())
        if not c or not c.is_const():
            raise SystemStateError(f"{label} is not algebraic in the syzygy")
        rest = syzygy - LinExpr.symbol(LABELS, label, (), c)
        omega = -(rest / c.const_value())
        self.syzygies = [s for s in self.syzygies if s != syzygy]
        self.retire(label, "deleted", syzygy, replacement=omega)
        return omega

    def add_syzygy(self, s):
        if not s or s in self.syzygies or -s in self.syzygies:
            return False
        self.syzygies.append(s)
        return True

    # function-level substitution --------------------------------------------

    def substitute_function(self, name, expr, definition=None):
        """Apply ``name := expr`` everywhere; ``definition`` is the label used."""
        mapping = {name: expr}
        dep = self.reg.depends
        for eq in self.equations.values():
            if name in eq.value.symbols():
                eq.value = eq.value.compose(mapping, FUNCTIONS, dep)
        for r in self.retired.values():
            if name in r.equation.value.symbols():
                r.equation.value = r.equation.value.compose(mapping, FUNCTIONS, dep)
        for f, rhs in list(self.solution.items()):
            if name in rhs.symbols():
                self.solution[f] = rhs.compose(mapping, FUNCTIONS, dep)
        self.solution[name] = expr
        if definition is not None and definition in self.equations:
            self.retire(definition, "definition", expr,
                        replacement=LinExpr(LABELS))
        self.drop_vanished()

    def drop_vanished(self):
        for label in [k for k, e in self.equations.items() if not e.value]:
            self.retire(label, "vanished", replacement=LinExpr(LABELS))

    # checks -------------------------------------------------------------------

    def check(self):
        """Raise unless syzygies vanish and histories match values."""
        values = self.label_values()
        for s in self.syzygies:
            if evaluate_labels(s, values, self.reg):
                raise SystemStateError(f"syzygy {format_labels(s)} does not vanish")
        for eq in self.equations.values():
            if not eq.is_base and evaluate_labels(eq.history, values, self.reg) != eq.value:
                raise SystemStateError(f"history of {eq.label} is out of date")

    def express(self, label):
        """A label rewritten over active labels through the recorded replacements."""
        out = LinExpr.symbol(LABELS, label)
        for _ in range(len(self.retired) + 1):
            gone = [k for k in out.symbols() if k not in self.equations]
            if not gone:
                return out
            unknown = [k for k in gone if k not in self.retired]
            if unknown:
                raise SystemStateError(f"unknown label(s) {unknown}")
            hit = {k: self.retired[k].replacement for k in gone}
            if any(r is None for r in hit.values()):
                raise SystemStateError(f"no replacement recorded for {sorted(hit)}")
            out = out.compose(hit, LABELS)
        raise SystemStateError("cyclic replacements")

    def expand_solution(self, value):
        """Apply every recorded substitution to an expression over functions."""
        dep = self.reg.depends
        for _ in range(len(self.solution) + 1):
            hit = {f: e for f, e in self.solution.items() if f in value.symbols()}
            if not hit:
                return value
            value = value.compose(hit, FUNCTIONS, dep)
        raise SystemStateError("cyclic substitutions")

    def format(self, e):
        return self.reg.format(e) if e.ns == FUNCTIONS else format_labels(e)


def format_labels(e):
    return format_expr(e)
