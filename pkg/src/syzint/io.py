"""System files and solution reports.

A system file is JSON::

    {"variables": ["x", "y", "z"],
     "functions": [{"name": "f", "deps": ["x", "y", "z"]}],
     "equations": ["f_yzz", "f_xx + f_z"],
     "options": {"ranking": "total", "strategy": "syzygy"}}

Each equation string is a sum of terms ``rational * monomial * derivative``
(``-3*x*y^2*f_xz/2``); derivative suffixes name the variables differentiated
by, in any order.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .expr import ParseError, Registry
from .system import System

OPTION_KEYS = ("ranking", "strategy", "max_divergence_subset", "max_steps")


class SystemFileError(ValueError):
    pass


@dataclass
class SystemFile:
    variables: list
    functions: list                       # [(name, [deps])]
    equations: list                       # strings
    options: dict = field(default_factory=dict)

    def registry(self):
        reg = Registry(self.variables)
        for name, deps in self.functions:
            reg.add_function(name, deps)
        return reg

    def to_system(self, ranking=None):
        reg = self.registry()
        values = []
        for n, text in enumerate(self.equations, start=1):
            try:
                values.append(reg.parse(text))
            except ParseError as exc:
                raise ParseError(exc.msg, exc.pos, text, line=n) from None
        return System.from_strings(self.variables, self.functions, values,
                                   ranking=ranking or self.options.get("ranking", "total"))

    def canonical(self):
        """The same file with every equation in normal form."""
        reg = self.registry()
        eqs = [reg.format(reg.parse(t)) for t in self.equations]
        return SystemFile(list(self.variables), [(n, list(d)) for n, d in self.functions],
                          eqs, dict(self.options))


def loads(text):
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SystemFileError(f"line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    if not isinstance(data, dict):
        raise SystemFileError("top level must be an object")
    for key in ("variables", "functions", "equations"):
        if key not in data:
            raise SystemFileError(f"missing key {key!r}")
    funcs = []
    for f in data["functions"]:
        if isinstance(f, dict):
            funcs.append((f["name"], list(f.get("deps", []))))
        else:
            funcs.append((f[0], list(f[1])))
    options = dict(data.get("options", {}))
    unknown = [k for k in options if k not in OPTION_KEYS]
    if unknown:
        raise SystemFileError(f"unknown option(s): {', '.join(unknown)}")
    sf = SystemFile(list(data["variables"]), funcs, list(data["equations"]), options)
    try:
        sf.registry()
    except ValueError as exc:
        raise SystemFileError(str(exc)) from None
    return sf


def load(path):
    with open(path, encoding="utf-8") as fh:
        return loads(fh.read())


def dumps(sf):
    data = {
        "variables": sf.variables,
        "functions": [{"name": n, "deps": list(d)} for n, d in sf.functions],
        "equations": sf.equations,
    }
    if sf.options:
        data["options"] = sf.options
    return json.dumps(data, indent=2) + "\n"


def report(result):
    """Structured solution report (plain data, deterministic order)."""
    s = result.system
    reg = s.reg
    fmt = reg.format
    originals = {f: fmt(s.expand_solution(reg.func(f))) for f in s.original_functions}
    new_funcs = {name: list(fs.deps) for name, fs in reg.functions.items()
                 if name not in s.original_functions and name not in s.solution}
    return {
        "status": result.status,
        "solution": originals,
        "substitutions": {f: fmt(e) for f, e in s.solution.items()},
        "remaining": {k: fmt(e.value) for k, e in sorted(
            s.equations.items(), key=lambda kv: _num(kv[0]))},
        "new_functions": new_funcs,
        "deleted": {k: r.reason for k, r in sorted(s.retired.items(), key=lambda kv: _num(kv[0]))},
        "syzygies_used": [s.format(x) for x in s.used_syzygies],
        "syzygies": [s.format(x) for x in s.syzygies],
        "absorbable": [list(p) for p in result.absorbable],
        "counters": {"steps": result.steps, **result.counters},
    }


def dumps_report(result):
    return json.dumps(report(result), indent=2) + "\n"


def _num(label):
    digits = "".join(ch for ch in label if ch.isdigit())
    return (int(digits) if digits else 0, label)
