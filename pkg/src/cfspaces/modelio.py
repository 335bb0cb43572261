"""Model file formats for the compilers.

Structural models (.scm) declare noise variables with a joint law,
endogenous variables, and one function table per endogenous variable:

    scm chain
    noise Ux { 0 1 }
    noise Uy { 0 1 }
    dist { default = 1/4 }
    var X { 0 1 }
    var Y { 0 1 }
    fn X (Ux) {
      (Ux=0) = 0
      (Ux=1) = 1
    }
    fn Y (X, Uy) {
      (X=0, Uy=0) = 0
      (X=0, Uy=1) = 1
      (X=1, Uy=0) = 1
      (X=1, Uy=1) = 0
    }
    coupling {                      # optional; needed for backtracking
      ((Ux=0, Uy=0), (Ux=0, Uy=0)) = 1/4
      default = 0
    }

Potential-outcome models (.po) declare units with a law, variables, the
observed functions and the potential-outcome functions:

    po toy
    units { always never complier defier }
    dist { default = 1/4 }
    var X { 0 1 }
    var Y { P F }
    observe X { always = 1  never = 0  complier = 1  defier = 0 }
    observe Y { ... }
    potential Y given (X=1) { always = P ... }
"""

from __future__ import annotations

import itertools
from fractions import Fraction

from .compilers import POModel, SCMModel, StructuralEq
from .parser import ParseError, TokenStream


def _plain_assignments(ts: TokenStream) -> dict:
    """Parse '(Name=label, ...)' where names are bare identifiers."""
    ts.expect_sym("(")
    out: dict[str, str] = {}
    while not ts.at_sym(")"):
        tok = ts.peek()
        name = ts.expect_word().value
        ts.expect_sym("=")
        label = ts.label()
        if name in out:
            raise ParseError(f"{name!r} assigned twice", tok.line, tok.col)
        out[name] = label
        if ts.at_sym(","):
            ts.next()
    ts.expect_sym(")")
    return out


def _labels_block(ts: TokenStream) -> tuple[str, ...]:
    ts.expect_sym("{")
    labels = []
    while not ts.at_sym("}"):
        labels.append(ts.label())
    ts.expect_sym("}")
    if not labels:
        ts.error("empty label set")
    return tuple(labels)


def _grid(variables) -> list[tuple]:
    return list(itertools.product(*(labels for _, labels in variables)))


def _dist_block(ts: TokenStream, variables) -> dict:
    """Parse a joint law over named variables, with optional default."""
    open_tok = ts.peek()
    ts.expect_sym("{")
    names = [n for n, _ in variables]
    entries: dict[tuple, Fraction] = {}
    default = None
    while not ts.at_sym("}"):
        if ts.at_word("default"):
            ts.next()
            ts.expect_sym("=")
            default = ts.rational()
            continue
        tok = ts.peek()
        assignment = _plain_assignments(ts)
        if set(assignment) != set(names):
            raise ParseError(
                f"distribution entry must assign exactly {names}", tok.line, tok.col)
        key = tuple(assignment[n] for n in names)
        for (name, labels), lab in zip(variables, key):
            if lab not in labels:
                raise ParseError(f"unknown label {lab!r} for {name}", tok.line, tok.col)
        if key in entries:
            raise ParseError("duplicate distribution entry", tok.line, tok.col)
        ts.expect_sym("=")
        entries[key] = ts.rational()
    ts.expect_sym("}")
    table = {}
    for key in _grid(variables):
        if key in entries:
            table[key] = entries[key]
        elif default is not None:
            table[key] = default
        else:
            raise ParseError(
                "distribution does not cover its domain and declares no default",
                open_tok.line, open_tok.col)
    return table


def parse_scm(text: str):
    """Parse an .scm file; returns (model, coupling or None, name)."""
    ts = TokenStream(text)
    ts.expect_word("scm")
    name = ts.expect_word().value
    noise = []
    while ts.at_word("noise"):
        ts.next()
        nname = ts.expect_word().value
        if any(n == nname for n, _ in noise):
            ts.error(f"noise variable {nname!r} declared twice")
        noise.append((nname, _labels_block(ts)))
    if not noise:
        ts.error("model declares no noise variables")
    if not ts.at_word("dist"):
        ts.error("expected the noise 'dist' block")
    ts.next()
    noise_dist = _dist_block(ts, noise)

    endo = []
    while ts.at_word("var"):
        ts.next()
        vname = ts.expect_word().value
        if any(v == vname for v, _ in endo) or any(n == vname for n, _ in noise):
            ts.error(f"variable {vname!r} declared twice")
        endo.append((vname, _labels_block(ts)))
    if not endo:
        ts.error("model declares no endogenous variables")

    noise_names = {n for n, _ in noise}
    endo_names = {v for v, _ in endo}
    domains = dict(noise + endo)
    eqs = {}
    while ts.at_word("fn"):
        ts.next()
        tok = ts.peek()
        target = ts.expect_word().value
        if target not in endo_names:
            raise ParseError(f"fn target {target!r} is not a variable", tok.line, tok.col)
        if target in eqs:
            raise ParseError(f"duplicate fn for {target!r}", tok.line, tok.col)
        ts.expect_sym("(")
        inputs = []
        while not ts.at_sym(")"):
            inputs.append(ts.expect_word().value)
            if ts.at_sym(","):
                ts.next()
        ts.expect_sym(")")
        parents = tuple(i for i in inputs if i in endo_names)
        noises = tuple(i for i in inputs if i in noise_names)
        if len(parents) + len(noises) != len(inputs):
            unknown = [i for i in inputs if i not in endo_names | noise_names]
            raise ParseError(f"unknown fn inputs {unknown}", tok.line, tok.col)
        open_tok = ts.peek()
        ts.expect_sym("{")
        table = {}
        while not ts.at_sym("}"):
            etok = ts.peek()
            assignment = _plain_assignments(ts)
            if set(assignment) != set(inputs):
                raise ParseError(
                    f"fn entry must assign exactly {inputs}", etok.line, etok.col)
            key = tuple(assignment[i] for i in parents + noises)
            if key in table:
                raise ParseError("duplicate fn entry", etok.line, etok.col)
            ts.expect_sym("=")
            out = ts.label()
            if out not in domains[target]:
                raise ParseError(
                    f"fn output {out!r} is not a label of {target}", etok.line, etok.col)
            table[key] = out
        ts.expect_sym("}")
        domain = [domains[p] for p in parents] + [domains[u] for u in noises]
        if len(table) != len(list(itertools.product(*domain))):
            raise ParseError(
                f"fn table for {target} does not cover its input domain",
                open_tok.line, open_tok.col)
        eqs[target] = StructuralEq(target, parents, noises, table)

    coupling = None
    if ts.at_word("coupling"):
        ts.next()
        coupling = _coupling_block(ts, noise)

    tok = ts.peek()
    if tok.kind != "eof":
        ts.error(f"unexpected {tok.value!r} after the model")
    try:
        model = SCMModel(noise, noise_dist, endo, eqs)
    except ValueError as exc:
        raise ParseError(str(exc)) from None
    return model, coupling, name


def _coupling_block(ts: TokenStream, noise) -> dict:
    open_tok = ts.peek()
    ts.expect_sym("{")
    names = [n for n, _ in noise]
    entries = {}
    default = None
    while not ts.at_sym("}"):
        if ts.at_word("default"):
            ts.next()
            ts.expect_sym("=")
            default = ts.rational()
            continue
        tok = ts.peek()
        ts.expect_sym("(")
        u = _plain_assignments(ts)
        ts.expect_sym(",")
        u_star = _plain_assignments(ts)
        ts.expect_sym(")")
        for side in (u, u_star):
            if set(side) != set(names):
                raise ParseError(
                    f"coupling entries must assign exactly {names}", tok.line, tok.col)
        key = (tuple(u[n] for n in names), tuple(u_star[n] for n in names))
        if key in entries:
            raise ParseError("duplicate coupling entry", tok.line, tok.col)
        ts.expect_sym("=")
        entries[key] = ts.rational()
    ts.expect_sym("}")
    grid = _grid(noise)
    table = {}
    for u in grid:
        for u_star in grid:
            key = (u, u_star)
            if key in entries:
                table[key] = entries[key]
            elif default is not None:
                table[key] = default
            else:
                raise ParseError(
                    "coupling does not cover its domain and declares no default",
                    open_tok.line, open_tok.col)
    return table


def parse_po(text: str):
    """Parse a .po file; returns (model, name)."""
    ts = TokenStream(text)
    ts.expect_word("po")
    name = ts.expect_word().value
    ts.expect_word("units")
    units = _labels_block(ts)
    ts.expect_word("dist")
    open_tok = ts.peek()
    ts.expect_sym("{")
    unit_dist = {}
    default = None
    while not ts.at_sym("}"):
        if ts.at_word("default"):
            ts.next()
            ts.expect_sym("=")
            default = ts.rational()
            continue
        tok = ts.peek()
        unit = ts.label()
        if unit not in units:
            raise ParseError(f"unknown unit {unit!r}", tok.line, tok.col)
        if unit in unit_dist:
            raise ParseError("duplicate unit weight", tok.line, tok.col)
        ts.expect_sym("=")
        unit_dist[unit] = ts.rational()
    ts.expect_sym("}")
    for unit in units:
        if unit not in unit_dist:
            if default is None:
                raise ParseError(
                    "unit law does not cover every unit and declares no default",
                    open_tok.line, open_tok.col)
            unit_dist[unit] = default

    endo = []
    while ts.at_word("var"):
        ts.next()
        vname = ts.expect_word().value
        if any(v == vname for v, _ in endo):
            ts.error(f"variable {vname!r} declared twice")
        endo.append((vname, _labels_block(ts)))
    if not endo:
        ts.error("model declares no variables")
    endo_names = {v for v, _ in endo}

    def unit_fn(var):
        ts.expect_sym("{")
        fn = {}
        while not ts.at_sym("}"):
            tok = ts.peek()
            unit = ts.label()
            if unit not in units:
                raise ParseError(f"unknown unit {unit!r}", tok.line, tok.col)
            if unit in fn:
                raise ParseError("duplicate unit entry", tok.line, tok.col)
            ts.expect_sym("=")
            fn[unit] = ts.label()
        ts.expect_sym("}")
        return fn

    observed = {}
    potentials = {}
    while ts.at_word("observe") or ts.at_word("potential"):
        kind = ts.next().value
        tok = ts.peek()
        var = ts.expect_word().value
        if var not in endo_names:
            raise ParseError(f"unknown variable {var!r}", tok.line, tok.col)
        if kind == "observe":
            if var in observed:
                raise ParseError(f"duplicate observe block for {var!r}", tok.line, tok.col)
            observed[var] = unit_fn(var)
        else:
            ts.expect_word("given")
            assignment = _plain_assignments(ts)
            if not assignment:
                raise ParseError("potential outcome needs a treatment assignment",
                                 tok.line, tok.col)
            key = (var, tuple(sorted(assignment.items())))
            if key in potentials:
                raise ParseError("duplicate potential-outcome block", tok.line, tok.col)
            potentials[key] = unit_fn(var)

    tok = ts.peek()
    if tok.kind != "eof":
        ts.error(f"unexpected {tok.value!r} after the model")
    try:
        model = POModel(units, unit_dist, endo, observed, potentials)
    except ValueError as exc:
        raise ParseError(str(exc)) from None
    return model, name
