"""Textual architecture-model format: parser, printer, validator, generator.

Format (``.archmodel``, UTF-8, ``//`` line comments)::

    system NAME {
      qa_type ID higher_better;        // or lower_better
      component ID;
      function ID;
      design ID realizes ID {
        requires ID, ID;
        qa ID = NUMBER;
        utility = NUMBER;
      }
      objective ID : ID {
        require ID >= NUMBER;          // or <=
      }
    }

Identifiers may contain dots and digits after the leading letter/underscore,
so generated design names like ``f_nav_v0.75_a9_r0.5`` are plain identifiers.
"""
from __future__ import annotations

import itertools
import re
from dataclasses import dataclass

from .tomasys import (
    HIGHER_BETTER,
    LOWER_BETTER,
    NFR,
    ArchitectureModel,
    Component,
    Function,
    FunctionDesign,
    Objective,
    QAType,
)

SAFETY_THRESHOLD = 0.4
ENERGY_THRESHOLD = 0.7


@dataclass(frozen=True)
class ParseDiagnostic:
    severity: str  # "error" | "warning"
    line: int
    column: int
    message: str

    def __str__(self):
        return f"{self.line}:{self.column} {self.severity} {self.message}"


class ModelError(Exception):
    """Raised when a model cannot be parsed or fails validation."""

    def __init__(self, diagnostics):
        self.diagnostics = list(diagnostics)
        super().__init__("\n".join(str(d) for d in self.diagnostics))


# --------------------------------------------------------------------------
# tokenizer

_TOKEN_RE = re.compile(r"""
    (?P<ws>[ \t\r\n]+)
  | (?P<comment>//[^\n]*)
  | (?P<number>\d+\.\d+|\.\d+|\d+)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_.]*)
  | (?P<op>>=|<=|[{};:,=])
""", re.VERBOSE)


@dataclass(frozen=True)
class _Token:
    kind: str  # "number" | "ident" | "op" | "eof"
    text: str
    line: int
    column: int


def _tokenize(source):
    tokens, diagnostics = [], []
    line, col, pos = 1, 1, 0
    while pos < len(source):
        m = _TOKEN_RE.match(source, pos)
        if m is None:
            diagnostics.append(ParseDiagnostic(
                "error", line, col, f"unexpected character {source[pos]!r}"))
            pos += 1
            col += 1
            continue
        kind = m.lastgroup
        text = m.group()
        if kind not in ("ws", "comment"):
            tokens.append(_Token(kind, text, line, col))
        newlines = text.count("\n")
        if newlines:
            line += newlines
            col = len(text) - text.rfind("\n")
        else:
            col += len(text)
        pos = m.end()
    tokens.append(_Token("eof", "", line, col))
    return tokens, diagnostics


# --------------------------------------------------------------------------
# parser

class _Parser:
    def __init__(self, tokens):
        self.tokens = tokens
        self.pos = 0
        self.diagnostics = []

    @property
    def cur(self):
        return self.tokens[self.pos]

    def error(self, message, token=None):
        token = token or self.cur
        diag = ParseDiagnostic("error", token.line, token.column, message)
        self.diagnostics.append(diag)
        raise ModelError(self.diagnostics)

    def accept(self, kind, text=None):
        tok = self.cur
        if tok.kind == kind and (text is None or tok.text == text):
            self.pos += 1
            return tok
        return None

    def expect(self, kind, text=None):
        tok = self.accept(kind, text)
        if tok is None:
            want = text or kind
            self.error(f"expected {want!r}, found {self.cur.text!r}")
        return tok

    def ident(self):
        return self.expect("ident").text

    def keyword(self, word):
        return self.expect("ident", word)

    def number(self):
        tok = self.cur
        if tok.kind != "number":
            self.error(f"expected number, found {tok.text!r}")
        self.pos += 1
        return float(tok.text)

    def parse_system(self):
        self.keyword("system")
        name_tok = self.expect("ident")
        model = ArchitectureModel(name=name_tok.text)
        positions = model.decl_positions
        self.expect("op", "{")
        while not self.accept("op", "}"):
            tok = self.cur
            if tok.kind != "ident":
                self.error(f"expected declaration, found {tok.text!r}")
            if tok.text == "qa_type":
                self.pos += 1
                qa_name = self.ident()
                pol_tok = self.expect("ident")
                if pol_tok.text not in (HIGHER_BETTER, LOWER_BETTER):
                    self.error("polarity must be higher_better or "
                               "lower_better", pol_tok)
                self.expect("op", ";")
                model.qa_types.append(QAType(qa_name, pol_tok.text))
                positions[("qa_type", qa_name)] = (tok.line, tok.column)
            elif tok.text == "component":
                self.pos += 1
                cname = self.ident()
                self.expect("op", ";")
                model.components.append(Component(cname))
                positions[("component", cname)] = (tok.line, tok.column)
            elif tok.text == "function":
                self.pos += 1
                fname = self.ident()
                self.expect("op", ";")
                model.functions.append(Function(fname))
                positions[("function", fname)] = (tok.line, tok.column)
            elif tok.text == "design":
                model.designs.append(self.parse_design(positions))
            elif tok.text == "objective":
                model.objectives.append(self.parse_objective(positions))
            else:
                self.error(f"unknown declaration {tok.text!r}")
        self.expect("eof")
        return model

    def parse_design(self, positions):
        start = self.cur
        self.keyword("design")
        name = self.ident()
        self.keyword("realizes")
        realizes = self.ident()
        self.expect("op", "{")
        requires, estimates, utility = [], [], None
        while not self.accept("op", "}"):
            tok = self.cur
            if self.accept("ident", "requires"):
                requires.append(self.ident())
                while self.accept("op", ","):
                    requires.append(self.ident())
                self.expect("op", ";")
            elif self.accept("ident", "qa"):
                qa_name = self.ident()
                self.expect("op", "=")
                estimates.append((qa_name, self.number()))
                self.expect("op", ";")
            elif self.accept("ident", "utility"):
                self.expect("op", "=")
                utility = self.number()
                self.expect("op", ";")
            else:
                self.error(f"unexpected token {tok.text!r} in design body")
        if utility is None:
            self.error(f"design {name!r} has no utility", start)
        positions[("design", name)] = (start.line, start.column)
        return FunctionDesign(name=name, realizes=realizes,
                              requires=tuple(requires),
                              qa_estimates=tuple(estimates), utility=utility)

    def parse_objective(self, positions):
        start = self.cur
        self.keyword("objective")
        oid = self.ident()
        self.expect("op", ":")
        function = self.ident()
        self.expect("op", "{")
        nfrs = []
        while not self.accept("op", "}"):
            self.keyword("require")
            qa_name = self.ident()
            cmp_tok = self.cur
            if self.accept("op", ">="):
                comparator = ">="
            elif self.accept("op", "<="):
                comparator = "<="
            else:
                self.error("expected '>=' or '<='", cmp_tok)
            nfrs.append(NFR(qa_name, comparator, self.number()))
            self.expect("op", ";")
        positions[("objective", oid)] = (start.line, start.column)
        return Objective(id=oid, function=function, nfrs=tuple(nfrs))


def parse_model(source: str) -> ArchitectureModel:
    """Parse and validate; raises ModelError carrying positioned diagnostics."""
    tokens, diagnostics = _tokenize(source)
    if diagnostics:
        raise ModelError(diagnostics)
    parser = _Parser(tokens)
    model = parser.parse_system()
    errors = [d for d in validate(model) if d.severity == "error"]
    if errors:
        raise ModelError(errors)
    return model


# --------------------------------------------------------------------------
# validation

def validate(model: ArchitectureModel) -> list:
    """Semantic checks; an empty error set means every model invariant holds.

    Warnings flag objectives no design can satisfy even with all components
    healthy.
    """
    diagnostics = []
    positions = model.decl_positions

    def where(kind, name):
        return positions.get((kind, name), (1, 1))

    def err(kind, name, message):
        line, col = where(kind, name)
        diagnostics.append(ParseDiagnostic("error", line, col, message))

    def warn(kind, name, message):
        line, col = where(kind, name)
        diagnostics.append(ParseDiagnostic("warning", line, col, message))

    for kind, items, key in (
            ("qa_type", model.qa_types, lambda x: x.name),
            ("component", model.components, lambda x: x.name),
            ("function", model.functions, lambda x: x.name),
            ("design", model.designs, lambda x: x.name),
            ("objective", model.objectives, lambda x: x.id)):
        seen = set()
        for item in items:
            name = key(item)
            if name in seen:
                err(kind, name, f"duplicate {kind} {name!r}")
            seen.add(name)

    for design in model.designs:
        if model.function(design.realizes) is None:
            err("design", design.name,
                f"design {design.name!r} realizes undeclared function "
                f"{design.realizes!r}")
        if not design.requires:
            err("design", design.name,
                f"design {design.name!r} requires no components")
        for comp in design.requires:
            if model.component(comp) is None:
                err("design", design.name,
                    f"design {design.name!r} requires undeclared component "
                    f"{comp!r}")
        for qa_name, value in design.qa_estimates:
            if model.qa_type(qa_name) is None:
                err("design", design.name,
                    f"design {design.name!r} estimates undeclared qa_type "
                    f"{qa_name!r}")
            if not 0.0 <= value <= 1.0:
                err("design", design.name,
                    f"qa estimate {qa_name}={value} outside [0,1]")
        if not 0.0 <= design.utility <= 1.0:
            err("design", design.name,
                f"utility {design.utility} outside [0,1]")

    for objective in model.objectives:
        if model.function(objective.function) is None:
            err("objective", objective.id,
                f"objective {objective.id!r} references undeclared function "
                f"{objective.function!r}")
            continue
        realizers = model.designs_for(objective.function)
        if not realizers:
            err("objective", objective.id,
                f"no design realizes function {objective.function!r}")
        for nfr in objective.nfrs:
            qa = model.qa_type(nfr.qa_type)
            if qa is None:
                err("objective", objective.id,
                    f"NFR references undeclared qa_type {nfr.qa_type!r}")
                continue
            if not 0.0 <= nfr.threshold <= 1.0:
                err("objective", objective.id,
                    f"NFR threshold {nfr.threshold} outside [0,1]")
            expected = ">=" if qa.polarity == HIGHER_BETTER else "<="
            if nfr.comparator != expected:
                err("objective", objective.id,
                    f"NFR on {nfr.qa_type!r} uses {nfr.comparator!r} but "
                    f"polarity {qa.polarity} requires {expected!r}")
            missing = [d.name for d in realizers
                       if d.estimate(nfr.qa_type) is None]
            if missing:
                err("objective", objective.id,
                    f"designs {missing} lack an estimate for NFR qa_type "
                    f"{nfr.qa_type!r}")
        if realizers and objective.nfrs:
            feasible = [
                d for d in realizers
                if all(d.estimate(n.qa_type) is not None
                       and n.satisfied_by(d.estimate(n.qa_type))
                       for n in objective.nfrs)
            ]
            if not feasible:
                warn("objective", objective.id,
                     f"statically unsatisfiable NFR: no design realizing "
                     f"{objective.function!r} meets all thresholds of "
                     f"objective {objective.id!r}")

    return diagnostics


# --------------------------------------------------------------------------
# printer

def _fmt(value: float) -> str:
    return repr(float(value))


def print_model(model: ArchitectureModel) -> str:
    """Canonical text form; parse_model(print_model(m)) == m."""
    out = [f"system {model.name} {{"]
    for qa in model.qa_types:
        out.append(f"  qa_type {qa.name} {qa.polarity};")
    for comp in model.components:
        out.append(f"  component {comp.name};")
    for func in model.functions:
        out.append(f"  function {func.name};")
    for design in model.designs:
        out.append(f"  design {design.name} realizes {design.realizes} {{")
        out.append(f"    requires {', '.join(design.requires)};")
        for qa_name, value in design.qa_estimates:
            out.append(f"    qa {qa_name} = {_fmt(value)};")
        out.append(f"    utility = {_fmt(design.utility)};")
        out.append("  }")
    for objective in model.objectives:
        out.append(f"  objective {objective.id} : {objective.function} {{")
        for nfr in objective.nfrs:
            out.append(f"    require {nfr.qa_type} {nfr.comparator} "
                       f"{_fmt(nfr.threshold)};")
        out.append("  }")
    out.append("}")
    return "\n".join(out) + "\n"


# --------------------------------------------------------------------------
# navigation model generator

@dataclass(frozen=True)
class NavParameterSpace:
    max_vel: tuple = (0.3, 0.5, 0.75)          # m/s
    accel_lim: tuple = (3.6, 6.0, 9.0)         # m/s^2
    inflation_radius: tuple = (0.5, 0.65, 0.8)  # m

    def check(self):
        for label, values in (("max_vel", self.max_vel),
                              ("accel_lim", self.accel_lim),
                              ("inflation_radius", self.inflation_radius)):
            if not values:
                raise ValueError(f"{label} is empty")
            if any(v <= 0 for v in values):
                raise ValueError(f"{label} has non-positive values")
            if any(b <= a for a, b in zip(values, values[1:])):
                raise ValueError(f"{label} not strictly increasing")


def _num_tag(value: float) -> str:
    return format(value, "g")


def nav_design_name(max_vel, accel_lim, inflation_radius) -> str:
    return (f"f_nav_v{_num_tag(max_vel)}_a{_num_tag(accel_lim)}"
            f"_r{_num_tag(inflation_radius)}")


def clamp01(x: float) -> float:
    return 0.0 if x < 0.0 else 1.0 if x > 1.0 else x


def estimate_safety(max_vel, inflation_radius) -> float:
    """Static safety estimate: rises with clearance, falls with speed."""
    return clamp01(0.30 + 0.40 * (inflation_radius - 0.5) / 0.3
                   + 0.30 * (0.75 - max_vel) / 0.45)


def estimate_energy(max_vel, power_model=None) -> float:
    """Cruise power at the given speed as a fraction of peak power."""
    from .navsim.observers import PowerModel
    pm = power_model or PowerModel()
    return clamp01(pm.power_load(max_vel, 0.0, 20.0, 0.0) / pm.p_max)


def estimate_performance(max_vel) -> float:
    return clamp01(max_vel / 0.75)


def generate_nav_model(space: NavParameterSpace = NavParameterSpace()) \
        -> ArchitectureModel:
    """One design per (max_vel, accel_lim, inflation_radius) combination."""
    space.check()
    model = ArchitectureModel(name="factory_navigation")
    model.qa_types = [
        QAType("safety", HIGHER_BETTER),
        QAType("energy", LOWER_BETTER),
        QAType("performance", HIGHER_BETTER),
    ]
    model.components.append(Component("nav_stack"))
    model.functions.append(Function("f_navigate"))
    for v, a, r in itertools.product(space.max_vel, space.accel_lim,
                                     space.inflation_radius):
        name = nav_design_name(v, a, r)
        pseudo = "cfg" + name[len("f_nav"):]
        model.components.append(Component(pseudo))
        model.designs.append(FunctionDesign(
            name=name,
            realizes="f_navigate",
            requires=("nav_stack", pseudo),
            qa_estimates=(
                ("safety", estimate_safety(v, r)),
                ("energy", estimate_energy(v)),
                ("performance", estimate_performance(v)),
            ),
            utility=estimate_performance(v),
        ))
    model.objectives.append(Objective(
        id="o_nav",
        function="f_navigate",
        nfrs=(
            NFR("safety", ">=", SAFETY_THRESHOLD),
            NFR("energy", "<=", ENERGY_THRESHOLD),
        ),
    ))
    return model
