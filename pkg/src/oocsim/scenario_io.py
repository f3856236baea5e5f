"""Scenario files: a small sectioned key-value format, parsed and emitted.

Layout (``schema = 1``)::

    schema = 1
    name = "example2"

    [graph]
    nodes = 6
    edge = [1, 3, 1.0]          # src, dst, weight; the key repeats per edge

    [agents.1]
    A = [[0.0, 1.0], [0.0, 0.0]]
    B = [[0.0, 1.0], [1.0, -2.0]]
    C = [[1.0, 1.0]]
    K = [[3.0, 5.0], [1.5, 1.0]]                       # optional
    H = [[1.0], [2.0]]                                 # optional
    triplet = {Upsilon = [[1.5], [0.5]], Phi = [[1.0], [0.5]], Psi = [[0.5], [0.5]]}

    [costs.1]
    expr = "sin(0.2*y - (pi/2))"
    # or: quadratic = {Q = [[0.2]], b = [-2.0], c = 1.0}
    domain_box = [-10.0, 10.0]                         # optional

    [controller]
    controller = "state"                               # or "output"
    gamma1 = 8.0
    gamma2 = 1.0

    [simulation]
    horizon = 40.0
    step = 0.001

Unknown keys are rejected, agent and cost sections must be contiguous
1..N, and ``controller.v0`` may only be present when identically zero.
Repeated keys are allowed only for ``edge``.  ``[presets]`` is optional and
maps preset names to ``[gamma1, gamma2]`` pairs.
"""

import re
from pathlib import Path

import numpy as np

from .controller import GlobalGains
from .costmodel import expression_cost, quadratic_cost
from .errors import OocError, ParseError, ValidationError
from .netgraph import build_digraph
from .plantmodel import AgentPlant
from .simulator import Scenario

_SECTION_RE = re.compile(r"^\[([A-Za-z0-9_.]+)\]$")
_KEY_RE = re.compile(r"^([A-Za-z_][A-Za-z0-9_\-]*)\s*=\s*(.+)$", re.S)

_DEFAULT_BOX = (-10.0, 10.0)


# -- low-level parsing ---------------------------------------------------------

def _strip_comment(line):
    out = []
    in_string = False
    for ch in line:
        if ch == '"':
            in_string = not in_string
        if ch == "#" and not in_string:
            break
        out.append(ch)
    return "".join(out)


def _logical_lines(text):
    """Physical lines joined while brackets stay unbalanced, with line numbers."""
    pending = ""
    pending_no = None
    depth = 0
    for no, raw in enumerate(text.splitlines(), start=1):
        line = _strip_comment(raw).strip()
        if not line and not pending:
            continue
        if pending:
            pending += " " + line
        else:
            pending, pending_no = line, no
        in_string = False
        depth = 0
        for ch in pending:
            if ch == '"':
                in_string = not in_string
            elif not in_string:
                if ch in "[{":
                    depth += 1
                elif ch in "]}":
                    depth -= 1
        if depth > 0:
            continue
        if depth < 0:
            raise ParseError("unbalanced brackets", position=pending_no)
        yield pending_no, pending
        pending = ""
    if pending:
        raise ParseError("unterminated value", position=pending_no)


def _tokenize_value(text, line_no):
    tokens = []
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch.isspace():
            i += 1
            continue
        if ch in "[]{}=,":
            tokens.append((ch, ch))
            i += 1
            continue
        if ch == '"':
            j = text.find('"', i + 1)
            if j < 0:
                raise ParseError("unterminated string", position=line_no)
            tokens.append(("str", text[i + 1:j]))
            i = j + 1
            continue
        j = i
        while j < n and text[j] not in '[]{}=," \t':
            j += 1
        word = text[i:j]
        if word in ("true", "false"):
            tokens.append(("bool", word == "true"))
        else:
            try:
                if re.fullmatch(r"[+-]?\d+", word):
                    tokens.append(("num", int(word)))
                else:
                    tokens.append(("num", float(word)))
            except ValueError:
                tokens.append(("word", word))
        i = j
    tokens.append(("end", None))
    return tokens


class _ValueParser:
    def __init__(self, tokens, line_no):
        self.tokens = tokens
        self.pos = 0
        self.line_no = line_no

    def peek(self):
        return self.tokens[self.pos]

    def next(self):
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def fail(self, what):
        raise ParseError(f"bad value: expected {what}", position=self.line_no)

    def value(self):
        kind, val = self.peek()
        if kind in ("num", "str", "bool"):
            self.next()
            return val
        if kind == "[":
            return self.array()
        if kind == "{":
            return self.table()
        self.fail("number, string, boolean, array or table")

    def array(self):
        self.next()
        items = []
        while True:
            kind, _ = self.peek()
            if kind == "]":
                self.next()
                return items
            items.append(self.value())
            kind, _ = self.peek()
            if kind == ",":
                self.next()
            elif kind != "]":
                self.fail("',' or ']'")

    def table(self):
        self.next()
        out = {}
        while True:
            kind, val = self.peek()
            if kind == "}":
                self.next()
                return out
            if kind != "word":
                self.fail("key name")
            self.next()
            kind, _ = self.next()
            if kind != "=":
                self.fail("'='")
            out[val] = self.value()
            kind, _ = self.peek()
            if kind == ",":
                self.next()
            elif kind != "}":
                self.fail("',' or '}'")

    def finish(self, value):
        kind, _ = self.peek()
        if kind != "end":
            self.fail("end of value")
        return value


def parse_document(text):
    """Parse scenario text into ``{section: [(key, value), ...]}`` preserving repeats."""
    doc = {"": []}
    section = ""
    for line_no, line in _logical_lines(text):
        m = _SECTION_RE.match(line)
        if m:
            section = m.group(1)
            doc.setdefault(section, [])
            continue
        m = _KEY_RE.match(line)
        if not m:
            raise ParseError(f"expected 'key = value' or '[section]', got {line!r}",
                             position=line_no)
        key, raw = m.group(1), m.group(2)
        parser = _ValueParser(_tokenize_value(raw, line_no), line_no)
        doc[section].append((key, parser.finish(parser.value())))
    return doc


# -- document -> Scenario --------------------------------------------------------

def _as_map(section, pairs, repeatable=()):
    out = {}
    for key, value in pairs:
        if key in out and key not in repeatable:
            raise ValidationError(f"[{section}] {key}: key given twice")
        if key in repeatable:
            out.setdefault(key, []).append(value)
        else:
            out[key] = value
    return out


def _require(section, mapping, key):
    if key not in mapping:
        raise ValidationError(f"[{section}] missing required key {key!r}")
    return mapping[key]


def _check_keys(section, mapping, allowed):
    for key in mapping:
        if key not in allowed:
            raise ValidationError(f"[{section}] unknown key {key!r}")


def _matrix(section, key, value):
    try:
        mat = np.array(value, dtype=float)
    except (TypeError, ValueError):
        raise ValidationError(f"[{section}] {key}: not a numeric matrix") from None
    if mat.ndim != 2:
        raise ValidationError(f"[{section}] {key}: expected a matrix (list of rows)")
    return mat


def _vector(section, key, value):
    try:
        v = np.array(value, dtype=float)
    except (TypeError, ValueError):
        raise ValidationError(f"[{section}] {key}: not a numeric vector") from None
    if v.ndim != 1:
        raise ValidationError(f"[{section}] {key}: expected a flat list")
    return v


def _number(section, key, value):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ValidationError(f"[{section}] {key}: expected a number")
    return float(value)


def _integer(section, key, value):
    if isinstance(value, bool) or not isinstance(value, int):
        raise ValidationError(f"[{section}] {key}: expected an integer")
    return value


def scenario_from_document(doc, name=None):
    """Build and validate a :class:`Scenario` from a parsed document."""
    top = _as_map("", doc.get("", []))
    _check_keys("top level", top, {"schema", "name"})
    schema = _require("top level", top, "schema")
    if schema != 1:
        raise ValidationError(f"unsupported schema {schema!r}; this reader handles schema = 1")
    name = top.get("name", name) or "scenario"

    known = {"graph", "controller", "simulation", "presets", ""}
    for section in doc:
        if section in known or re.fullmatch(r"(agents|costs)\.\d+", section):
            continue
        raise ValidationError(f"unknown section [{section}]")

    # graph
    if "graph" not in doc:
        raise ValidationError("missing [graph] section")
    graph_map = _as_map("graph", doc["graph"], repeatable=("edge",))
    _check_keys("graph", graph_map, {"nodes", "edge"})
    n = _integer("graph", "nodes", _require("graph", graph_map, "nodes"))
    edges = []
    for entry in graph_map.get("edge", []):
        if not isinstance(entry, list) or len(entry) != 3:
            raise ValidationError("[graph] edge: expected [src, dst, weight]")
        src, dst, w = entry
        edges.append((int(src), int(dst), float(w)))
    try:
        graph = build_digraph(edges, n)
    except OocError as exc:
        raise ValidationError(f"[graph] {exc}") from exc

    # agents
    plants, Ks, Hs, triplets = [], [], [], []
    for i in range(1, n + 1):
        section = f"agents.{i}"
        if section not in doc:
            raise ValidationError(f"missing [{section}] (agent sections must cover 1..{n})")
        amap = _as_map(section, doc[section])
        _check_keys(section, amap, {"A", "B", "C", "K", "H", "triplet"})
        A = _matrix(section, "A", _require(section, amap, "A"))
        B = _matrix(section, "B", _require(section, amap, "B"))
        C = _matrix(section, "C", _require(section, amap, "C"))
        try:
            plants.append(AgentPlant(A=A, B=B, C=C))
        except ValueError as exc:
            raise ValidationError(f"[{section}] {exc}") from exc
        Ks.append(_matrix(section, "K", amap["K"]) if "K" in amap else None)
        Hs.append(_matrix(section, "H", amap["H"]) if "H" in amap else None)
        if "triplet" in amap:
            table = amap["triplet"]
            if not isinstance(table, dict) or set(table) != {"Upsilon", "Phi", "Psi"}:
                raise ValidationError(
                    f"[{section}] triplet: expected {{Upsilon = ..., Phi = ..., Psi = ...}}"
                )
            triplets.append(tuple(_matrix(section, f"triplet.{k}", table[k])
                                  for k in ("Upsilon", "Phi", "Psi")))
        else:
            triplets.append(None)
    extra = [s for s in doc if s.startswith("agents.") and int(s.split(".")[1]) > n]
    if extra:
        raise ValidationError(f"[{extra[0]}] agent index beyond nodes = {n}")

    # costs
    costs, cost_specs = [], []
    for i in range(1, n + 1):
        section = f"costs.{i}"
        if section not in doc:
            raise ValidationError(f"missing [{section}] (cost sections must cover 1..{n})")
        cmap = _as_map(section, doc[section])
        _check_keys(section, cmap, {"expr", "quadratic", "domain_box"})
        box = tuple(_vector(section, "domain_box", cmap["domain_box"])) \
            if "domain_box" in cmap else _DEFAULT_BOX
        if len(box) != 2 or box[1] <= box[0]:
            raise ValidationError(f"[{section}] domain_box: expected [lo, hi] with lo < hi")
        if ("expr" in cmap) == ("quadratic" in cmap):
            raise ValidationError(f"[{section}] needs exactly one of expr or quadratic")
        if "expr" in cmap:
            text = cmap["expr"]
            if not isinstance(text, str):
                raise ValidationError(f"[{section}] expr: expected a string")
            try:
                costs.append(expression_cost(text, box=box))
            except OocError as exc:
                raise ValidationError(f"[{section}] expr: {exc}") from exc
            cost_specs.append({"kind": "expr", "expr": text, "box": box})
        else:
            table = cmap["quadratic"]
            if not isinstance(table, dict) or "Q" not in table \
                    or not set(table) <= {"Q", "b", "c"}:
                raise ValidationError(
                    f"[{section}] quadratic: expected {{Q = ..., b = ..., c = ...}}"
                )
            Q = _matrix(section, "quadratic.Q", table["Q"])
            b = _vector(section, "quadratic.b", table["b"]) if "b" in table else None
            c = _number(section, "quadratic.c", table["c"]) if "c" in table else 0.0
            try:
                costs.append(quadratic_cost(Q, b, c))
            except OocError as exc:
                raise ValidationError(f"[{section}] quadratic: {exc}") from exc
            cost_specs.append({"kind": "quadratic", "Q": Q, "b": b, "c": c, "box": box})
    extra = [s for s in doc if s.startswith("costs.") and int(s.split(".")[1]) > n]
    if extra:
        raise ValidationError(f"[{extra[0]}] cost index beyond nodes = {n}")

    # controller
    if "controller" not in doc:
        raise ValidationError("missing [controller] section")
    ctl = _as_map("controller", doc["controller"])
    _check_keys("controller", ctl,
                {"controller", "gamma1", "gamma2", "auto_gains", "v0", "rho0"})
    mode = ctl.get("controller", "state")
    if mode not in ("state", "output"):
        raise ValidationError(
            f"[controller] controller: must be 'state' or 'output', got {mode!r}")
    gamma1 = _number("controller", "gamma1", _require("controller", ctl, "gamma1"))
    gamma2 = _number("controller", "gamma2", _require("controller", ctl, "gamma2"))
    if gamma1 <= 0 or gamma2 <= 0:
        raise ValidationError("[controller] gamma1 and gamma2 must be positive")
    auto_gains = ctl.get("auto_gains", False)
    if not isinstance(auto_gains, bool):
        raise ValidationError("[controller] auto_gains: expected true or false")
    v0 = _vector("controller", "v0", ctl["v0"]) if "v0" in ctl else None
    if v0 is not None and np.any(v0 != 0.0):
        raise ValidationError("controller.v0 must be omitted or zero")
    rho0 = _vector("controller", "rho0", ctl["rho0"]) if "rho0" in ctl else None

    # simulation
    sim = _as_map("simulation", doc.get("simulation", []))
    _check_keys("simulation", sim,
                {"horizon", "step", "stride", "seed", "tolerance",
                 "x0", "xhat0", "declared_minimizer"})
    horizon = _number("simulation", "horizon", sim.get("horizon", 50.0))
    step = _number("simulation", "step", sim.get("step", 1e-3))
    stride = _integer("simulation", "stride", sim.get("stride", 10))
    seed = _integer("simulation", "seed", sim.get("seed", 1))
    tolerance = _number("simulation", "tolerance", sim.get("tolerance", 5e-3))
    x0 = _vector("simulation", "x0", sim["x0"]) if "x0" in sim else None
    xhat0 = _vector("simulation", "xhat0", sim["xhat0"]) if "xhat0" in sim else None
    declared = sim.get("declared_minimizer")
    if declared is not None:
        declared = _number("simulation", "declared_minimizer", declared)

    presets = {}
    for key, value in doc.get("presets", []):
        if key in presets:
            raise ValidationError(f"[presets] {key}: key given twice")
        pair = _vector("presets", key, value)
        if pair.size != 2 or (pair <= 0).any():
            raise ValidationError(f"[presets] {key}: expected [gamma1, gamma2] > 0")
        presets[key] = (float(pair[0]), float(pair[1]))

    scenario = Scenario(
        name=name,
        graph=graph,
        plants=plants,
        costs=costs,
        coupling=GlobalGains(gamma1, gamma2),
        mode=mode,
        triplets=triplets if any(t is not None for t in triplets) else None,
        K=Ks if any(k is not None for k in Ks) else None,
        H=Hs if any(h is not None for h in Hs) else None,
        horizon=horizon,
        step=step,
        stride=stride,
        seed=seed,
        x0=x0,
        rho0=rho0,
        xhat0=xhat0,
        v0=v0,
        tolerance=tolerance,
        domain_box=cost_specs[0]["box"] if cost_specs else _DEFAULT_BOX,
        declared_minimizer=declared,
        auto_gains=auto_gains,
        gain_presets=presets,
        cost_specs=cost_specs,
    )
    return scenario


def load_scenario(path):
    """Read and validate a scenario file.

    Raises
    ------
    ParseError
        On malformed syntax (with the offending line number).
    ValidationError
        On a well-formed but invalid document; messages cite section and key.
    """
    path = Path(path)
    text = path.read_text()
    doc = parse_document(text)
    return scenario_from_document(doc, name=path.stem)


# -- Scenario -> text ------------------------------------------------------------

def _fmt(value):
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, str):
        return f'"{value}"'
    raise TypeError(f"cannot format {value!r}")


def _fmt_vector(v):
    return "[" + ", ".join(_fmt(float(x)) for x in np.asarray(v).ravel()) + "]"


def _fmt_matrix(m):
    rows = [_fmt_vector(row) for row in np.atleast_2d(np.asarray(m))]
    return "[" + ", ".join(rows) + "]"


def _cost_spec_of(scenario, i):
    specs = getattr(scenario, "cost_specs", None)
    if specs is None:
        raise ValueError(
            "scenario has no cost_specs; only scenarios built by the loader "
            "or the builtin catalogue can be emitted"
        )
    return specs[i]


def emit_scenario(scenario):
    """Serialize a scenario back to the file format; load(emit(s)) == s."""
    lines = ["schema = 1", f'name = "{scenario.name}"', "", "[graph]",
             f"nodes = {scenario.graph.n}"]
    for src, dst, w in scenario.graph.edge_list():
        lines.append(f"edge = [{src}, {dst}, {_fmt(float(w))}]")

    for i, plant in enumerate(scenario.plants):
        lines += ["", f"[agents.{i + 1}]",
                  f"A = {_fmt_matrix(plant.A)}",
                  f"B = {_fmt_matrix(plant.B)}",
                  f"C = {_fmt_matrix(plant.C)}"]
        K = None if scenario.K is None else scenario.K[i]
        H = None if scenario.H is None else scenario.H[i]
        trip = None if scenario.triplets is None else scenario.triplets[i]
        if K is not None:
            lines.append(f"K = {_fmt_matrix(K)}")
        if H is not None:
            lines.append(f"H = {_fmt_matrix(H)}")
        if trip is not None:
            ups, phi, psi = (trip.Upsilon, trip.Phi, trip.Psi) \
                if hasattr(trip, "Upsilon") else trip
            lines.append(
                "triplet = {Upsilon = %s, Phi = %s, Psi = %s}"
                % (_fmt_matrix(ups), _fmt_matrix(phi), _fmt_matrix(psi))
            )

    for i in range(len(scenario.costs)):
        spec = _cost_spec_of(scenario, i)
        lines += ["", f"[costs.{i + 1}]"]
        if spec["kind"] == "expr":
            lines.append(f'expr = "{spec["expr"]}"')
        else:
            parts = [f"Q = {_fmt_matrix(spec['Q'])}"]
            if spec["b"] is not None:
                parts.append(f"b = {_fmt_vector(spec['b'])}")
            parts.append(f"c = {_fmt(float(spec['c']))}")
            lines.append("quadratic = {" + ", ".join(parts) + "}")
        lines.append(f"domain_box = {_fmt_vector(spec['box'])}")

    lines += ["", "[controller]",
              f'controller = "{scenario.mode}"',
              f"gamma1 = {_fmt(scenario.coupling.gamma1)}",
              f"gamma2 = {_fmt(scenario.coupling.gamma2)}"]
    if scenario.auto_gains:
        lines.append("auto_gains = true")
    if scenario.rho0 is not None:
        lines.append(f"rho0 = {_fmt_vector(scenario.rho0)}")

    lines += ["", "[simulation]",
              f"horizon = {_fmt(float(scenario.horizon))}",
              f"step = {_fmt(float(scenario.step))}",
              f"stride = {scenario.stride}",
              f"seed = {scenario.seed}",
              f"tolerance = {_fmt(float(scenario.tolerance))}"]
    if scenario.x0 is not None:
        lines.append(f"x0 = {_fmt_vector(scenario.x0)}")
    if scenario.xhat0 is not None:
        lines.append(f"xhat0 = {_fmt_vector(scenario.xhat0)}")
    if scenario.declared_minimizer is not None:
        lines.append(f"declared_minimizer = {_fmt(float(scenario.declared_minimizer))}")

    if scenario.gain_presets:
        lines += ["", "[presets]"]
        for key in scenario.gain_presets:
            g1, g2 = scenario.gain_presets[key]
            lines.append(f"{key} = [{_fmt(float(g1))}, {_fmt(float(g2))}]")
    return "\n".join(lines) + "\n"
