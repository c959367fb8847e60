"""Declarative scenarios: loading, validation, sweeps and execution.

A scenario is a YAML (or JSON) mapping; the README describes
the format. Numeric fields may be plain numbers or arithmetic expressions
over the sweep parameters, e.g. ``"t2 + tau"``.
"""
from __future__ import annotations

import ast
import copy
import itertools
import math
import operator
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from .device import BellKind, QODevice
from .engine import Core, SimConfig, run
from .outcomes import DensityMatrix, Distribution, density_matrix, distribution, level_probability, \
    postselect, purity
from .packet_model import Shape

TOP_KEYS = {"name", "channels", "polarizations", "shape", "periods", "period_length", "order",
            "packets", "input", "circuit", "sweep", "core", "output"}
ELEMENT_ARITY = {"bs": (4, 4), "ps": (2, 2), "delay": (1, 1), "detector": (1, 2)}


class ScenarioError(ValueError):
    """Invalid scenario content; ``line`` is 1-based when known."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line else message)


# YAML loading with line numbers ---------------------------------------------

class _LineDict(dict):
    line: int | None = None


class _LineList(list):
    line: int | None = None


class _LineLoader(yaml.SafeLoader):
    pass


def _construct_mapping(loader, node):
    loader.flatten_mapping(node)
    out = _LineDict(loader.construct_pairs(node, deep=True))
    out.line = node.start_mark.line + 1
    return out


def _construct_sequence(loader, node):
    out = _LineList(loader.construct_sequence(node, deep=True))
    out.line = node.start_mark.line + 1
    return out


_LineLoader.add_constructor(yaml.resolver.BaseResolver.DEFAULT_MAPPING_TAG, _construct_mapping)
_LineLoader.add_constructor(yaml.resolver.BaseResolver.DEFAULT_SEQUENCE_TAG, _construct_sequence)


def _line(obj) -> int | None:
    return getattr(obj, "line", None)


def _plain(obj):
    """Strip line-tracking containers (for serialization)."""
    if isinstance(obj, dict):
        return {k: _plain(v) for k, v in obj.items()}
    if isinstance(obj, list):
        return [_plain(v) for v in obj]
    return obj


# Expressions -----------------------------------------------------------------

_BINOPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul,
           ast.Div: operator.truediv, ast.Pow: operator.pow}
_UNARY = {ast.USub: operator.neg, ast.UAdd: operator.pos}
_FUNCS = {"sqrt": math.sqrt, "exp": math.exp, "log": math.log, "sin": math.sin, "cos": math.cos}
_CONSTS = {"pi": math.pi, "e": math.e}


def evaluate(value, params: dict[str, float], line: int | None = None) -> float:
    """Numeric value of a field: a number or an arithmetic expression."""
    if isinstance(value, bool):
        raise ScenarioError(f"expected a number, got {value!r}", line)
    if isinstance(value, (int, float)):
        return value
    if not isinstance(value, str):
        raise ScenarioError(f"expected a number or expression, got {value!r}", line)
    try:
        tree = ast.parse(value.strip(), mode="eval")
    except SyntaxError:
        raise ScenarioError(f"cannot parse expression {value!r}", line) from None

    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            return node.value
        if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            return _BINOPS[type(node.op)](ev(node.left), ev(node.right))
        if isinstance(node, ast.UnaryOp) and type(node.op) in _UNARY:
            return _UNARY[type(node.op)](ev(node.operand))
        if isinstance(node, ast.Name):
            if node.id in params:
                return params[node.id]
            if node.id in _CONSTS:
                return _CONSTS[node.id]
            raise ScenarioError(f"unknown name {node.id!r} in {value!r}", line)
        if (isinstance(node, ast.Call) and isinstance(node.func, ast.Name)
                and node.func.id in _FUNCS and len(node.args) == 1 and not node.keywords):
            return _FUNCS[node.func.id](ev(node.args[0]))
        raise ScenarioError(f"unsupported syntax in expression {value!r}", line)

    return float(ev(tree))


# Scenario model ---------------------------------------------------------------

@dataclass
class SweepParam:
    name: str
    values: list[float]


@dataclass
class Scenario:
    """A validated scenario. ``data`` keeps the raw mapping for round trips."""

    data: dict
    sweep: list[SweepParam] = field(default_factory=list)
    cartesian: bool = False

    @property
    def name(self) -> str:
        return str(self.data.get("name", "scenario"))

    @property
    def core(self) -> str:
        return self.data.get("core", "direct")

    @property
    def output(self) -> dict:
        return self.data.get("output", {}) or {}

    def points(self) -> list[dict[str, float]]:
        if not self.sweep:
            return [{}]
        names = [p.name for p in self.sweep]
        if self.cartesian:
            combos = itertools.product(*(p.values for p in self.sweep))
        else:
            combos = zip(*(p.values for p in self.sweep))
        return [dict(zip(names, c)) for c in combos]

    def to_dict(self) -> dict:
        return _plain(copy.deepcopy(self.data))

    def dump(self) -> str:
        return yaml.safe_dump(self.to_dict(), sort_keys=False, default_flow_style=None)


def _require(cond: bool, message: str, line: int | None):
    if not cond:
        raise ScenarioError(message, line)


def _int(value, what: str, line) -> int:
    _require(isinstance(value, int) and not isinstance(value, bool), f"{what} must be an integer", line)
    return value


def _parse_sweep(spec, line) -> tuple[list[SweepParam], bool]:
    if spec is None:
        return [], False
    _require(isinstance(spec, dict), "sweep must be a mapping", line)
    line = _line(spec) or line
    cartesian = bool(spec.get("cartesian", False))
    params = []
    raw = spec.get("params", [])
    _require(isinstance(raw, list), "sweep.params must be a list", line)
    for p in raw:
        pl = _line(p) or line
        _require(isinstance(p, dict) and isinstance(p.get("name"), str), "sweep parameter needs a name", pl)
        if "values" in p:
            _require(isinstance(p["values"], list) and p["values"], "values must be a non-empty list", pl)
            values = [evaluate(v, {}, pl) for v in p["values"]]
        else:
            for k in ("start", "stop", "steps"):
                _require(k in p, f"sweep parameter {p['name']!r} needs start/stop/steps or values", pl)
            steps = _int(p["steps"], "steps", pl)
            _require(steps >= 1, "steps must be >= 1", pl)
            values = [float(x) for x in np.linspace(evaluate(p["start"], {}, pl),
                                                    evaluate(p["stop"], {}, pl), steps)]
        params.append(SweepParam(p["name"], values))
    names = [p.name for p in params]
    _require(len(set(names)) == len(names), "duplicate sweep parameter names", line)
    if not cartesian and len({len(p.values) for p in params}) > 1:
        raise ScenarioError("zipped sweep parameters need equal lengths (or set cartesian: true)", line)
    return params, cartesian


def validate(data) -> Scenario:
    """Check structure and references; returns a :class:`Scenario`."""
    _require(isinstance(data, dict), "scenario must be a mapping", _line(data))
    top = _line(data)
    unknown = set(data) - TOP_KEYS
    _require(not unknown, f"unknown keys: {sorted(unknown)}", top)
    n_ch = _int(data.get("channels"), "channels", top)
    _require(n_ch >= 1, "channels must be >= 1", top)
    n_pol = _int(data.get("polarizations", 1), "polarizations", top)
    _require(n_pol in (1, 2), "polarizations must be 1 or 2", top)
    try:
        Shape(data.get("shape", "gaussian"))
    except ValueError:
        raise ScenarioError(f"unknown packet shape {data.get('shape')!r}", top) from None
    _int(data.get("periods", 1), "periods", top)
    _require(data.get("order", "insertion") in ("insertion", "time"), "order must be insertion or time", top)
    try:
        Core(data.get("core", "direct"))
    except ValueError:
        raise ScenarioError(f"unknown core {data.get('core')!r}", top) from None

    sweep, cartesian = _parse_sweep(data.get("sweep"), top)
    params = {p.name: p.values[0] for p in sweep}

    def check_ch(ch, line):
        _require(isinstance(ch, int) and 0 <= ch < n_ch, f"channel {ch!r} out of range", line)

    def check_pol(pol, line):
        _require(isinstance(pol, int) and 0 <= pol < n_pol, f"polarization {pol!r} out of range", line)

    for rec in data.get("packets", []) or []:
        ln = _line(rec) or top
        _require(isinstance(rec, dict) and {"t", "f", "w"} <= set(rec), "packet record needs t, f, w", ln)
        _require(rec.get("shape", data.get("shape", "gaussian")) == data.get("shape", "gaussian"),
                 "packet shape must match the scenario shape", ln)
        for k in ("t", "f", "w"):
            evaluate(rec[k], params, ln)

    ids = set()
    inputs = data.get("input", []) or []
    _require(isinstance(inputs, list), "input must be a list", top)
    for rec in inputs:
        ln = _line(rec) or top
        _require(isinstance(rec, dict), "input record must be a mapping", ln)
        if "photons" in rec:
            args = rec["photons"]
            _require(isinstance(args, list) and len(args) == 6, "photons takes [n, ch, pol, t, f, w]", ln)
            _int(args[0], "photon count", ln)
            check_ch(args[1], ln)
            check_pol(args[2], ln)
            for v in args[3:]:
                evaluate(v, params, ln)
            if "id" in rec:
                _require(rec["id"] not in ids, f"duplicate id {rec['id']!r}", ln)
                ids.add(rec["id"])
        elif "bell" in rec:
            args = rec["bell"]
            _require(isinstance(args, list) and len(args) == 10,
                     "bell takes [ch1, ch2, kind, phase, t1, f1, w1, t2, f2, w2]", ln)
            _require(n_pol == 2, "bell pairs need polarizations: 2", ln)
            check_ch(args[0], ln)
            check_ch(args[1], ln)
            try:
                BellKind.parse(args[2])
            except ValueError:
                raise ScenarioError(f"unknown Bell kind {args[2]!r}", ln) from None
            for v in args[3:]:
                evaluate(v, params, ln)
        else:
            raise ScenarioError("input record must be photons or bell", ln)

    detectors = set()
    for rec in data.get("circuit", []) or []:
        ln = _line(rec) or top
        _require(isinstance(rec, dict) and len(rec) == 1, "circuit record must have exactly one key", ln)
        (kind, args), = rec.items()
        _require(kind in ELEMENT_ARITY, f"unknown circuit element {kind!r}", ln)
        lo, hi = ELEMENT_ARITY[kind]
        _require(isinstance(args, list) and lo <= len(args) <= hi, f"{kind} takes {lo}..{hi} arguments", ln)
        if kind == "bs":
            check_ch(args[0], ln)
            check_ch(args[1], ln)
            _require(args[0] != args[1], "beamsplitter channels must differ", ln)
            evaluate(args[2], params, ln)
            evaluate(args[3], params, ln)
        elif kind == "ps":
            check_ch(args[0], ln)
            evaluate(args[1], params, ln)
        elif kind == "delay":
            check_ch(args[0], ln)
            _require(data.get("periods", 1) >= 2, "delay needs periods >= 2", ln)
        else:
            check_ch(args[0], ln)
            _require(args[0] not in detectors, f"duplicate detector on channel {args[0]}", ln)
            detectors.add(args[0])
            if len(args) == 2:
                _require(isinstance(args[1], int) and args[1] >= 0, "detector condition must be a count", ln)
    _require(len(detectors) == n_ch, "every channel needs a detector", _line(data.get("circuit")) or top)

    out = data.get("output", {}) or {}
    ol = _line(out) or top
    _require(isinstance(out, dict), "output must be a mapping", ol)
    _require(out.get("resolution", "channel") in ("channel", "level"), "resolution must be channel or level", ol)
    for ch in out.get("density", []) or []:
        check_ch(ch, ol)
    for name, refs in (out.get("observables", {}) or {}).items():
        rl = _line(refs) or ol
        _require(isinstance(refs, list) and refs, f"observable {name!r} needs a list of [ch, id, pol?]", rl)
        for ref in refs:
            _require(isinstance(ref, list) and len(ref) in (2, 3), "observable entry is [ch, id] or [ch, id, pol]", rl)
            check_ch(ref[0], rl)
            _require(ref[1] in ids, f"unknown photon id {ref[1]!r}", rl)
            if len(ref) == 3:
                check_pol(ref[2], rl)
    return Scenario(data, sweep, cartesian)


def loads(text: str) -> Scenario:
    try:
        data = yaml.load(text, Loader=_LineLoader)
    except yaml.MarkedYAMLError as exc:
        line = exc.problem_mark.line + 1 if exc.problem_mark else None
        raise ScenarioError(f"YAML error: {exc.problem}", line) from None
    except yaml.YAMLError as exc:
        raise ScenarioError(f"YAML error: {exc}") from None
    return validate(data)


def load(path: str | Path) -> Scenario:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ScenarioError(f"cannot read scenario: {exc}") from None
    return loads(text)


# Execution --------------------------------------------------------------------

@dataclass
class PointResult:
    index: int
    params: dict[str, float]
    norm: float
    distribution: Distribution | None = None
    observables: dict[str, float] = field(default_factory=dict)
    density: DensityMatrix | None = None
    purity: float | None = None


def build_device(scn: Scenario, params: dict[str, float]) -> QODevice:
    data = scn.data
    dev = QODevice(data["channels"], data.get("polarizations", 1), data.get("shape", "gaussian"),
                   data.get("periods", 1), float(data.get("period_length", 0.0)),
                   order=data.get("order", "insertion"))
    for rec in data.get("packets", []) or []:
        ln = _line(rec)
        dev.def_packet(*(evaluate(rec[k], params, ln) for k in ("t", "f", "w")))
    for rec in data.get("input", []) or []:
        ln = _line(rec)
        if "photons" in rec:
            n, ch, pol, *rest = rec["photons"]
            dev.add_photons(n, ch, pol, *(evaluate(v, params, ln) for v in rest))
        else:
            ch1, ch2, kind, *rest = rec["bell"]
            dev.add_bell_pair(ch1, ch2, kind, *(evaluate(v, params, ln) for v in rest))
    for rec in data.get("circuit", []) or []:
        ln = _line(rec)
        (kind, args), = rec.items()
        if kind == "bs":
            dev.beamsplitter(args[0], args[1], evaluate(args[2], params, ln), evaluate(args[3], params, ln))
        elif kind == "ps":
            dev.phase_shifter(args[0], evaluate(args[1], params, ln))
        elif kind == "delay":
            dev.delay(args[0])
        else:
            dev.detector(*args)
    return dev


def _bundle_for_id(scn: Scenario, ident) -> int:
    # photons records map one-to-one to bundles; bell records add two
    idx = 0
    for rec in scn.data.get("input", []) or []:
        if "photons" in rec:
            if rec.get("id") == ident:
                return idx
            idx += 1
        else:
            idx += 2
    raise KeyError(ident)


def run_point(scn: Scenario, index: int, params: dict[str, float], core: str | None = None) -> PointResult:
    dev = build_device(scn, params)
    out = run(dev.builder, dev.input_state, SimConfig(core=core or scn.core))
    spec = scn.output
    res = PointResult(index, params, out.norm2())
    if spec.get("distribution", True):
        res.distribution = distribution(out, dev.builder.detectors,
                                        resolution=spec.get("resolution", "channel"),
                                        renormalize=bool(spec.get("renormalize", False)))
    for name, refs in (spec.get("observables", {}) or {}).items():
        lvls = []
        for ref in refs:
            bundle = _bundle_for_id(scn, ref[1])
            b = dev.bundles[bundle]
            pol = ref[2] if len(ref) == 3 else b.pol
            lvls.append(dev.builder.levels.level_of(ref[0], pol, dev.table.global_index(
                dev._remap[b.packet], b.period)))
        res.observables[name] = level_probability(out, lvls)
    branches = postselect(out, dev.builder.detectors) if spec.get("density") else []
    # a point where the heralding event cannot happen simply has no density matrix
    if branches:
        rho = density_matrix(branches, spec["density"], trace_packets=bool(spec.get("trace_packets", False)))
        res.density = rho
        res.purity = purity(rho)
    return res


def run_scenario(scn: Scenario, core: str | None = None) -> list[PointResult]:
    return [run_point(scn, i, p, core) for i, p in enumerate(scn.points())]


# Built-in scenarios -------------------------------------------------------------

def _hom(photons: int) -> dict:
    return {
        "name": "hom" if photons == 1 else f"hom{photons}",
        "channels": 2,
        "polarizations": 1,
        "shape": "gaussian",
        "input": [
            {"photons": [photons, 0, 0, 0.0, 1.0, 1.0]},
            {"photons": [photons, 1, 0, "dt", 1.0, 1.0]},
        ],
        "circuit": [{"bs": [0, 1, 45.0, 0.0]}, {"detector": [0]}, {"detector": [1]}],
        "sweep": {"params": [{"name": "dt", "start": 0.0, "stop": 3.0, "steps": 60}]},
        "core": "direct" if photons < 3 else "permanent",
        "output": {"distribution": True, "resolution": "channel"},
    }


def _delay_mz() -> dict:
    return {
        "name": "delay_mz",
        "channels": 2,
        "polarizations": 1,
        "shape": "exponential",
        "periods": 5,
        # slightly shorter than the 3.1 photon spacing: the delayed photon meets
        # the later one 0.01 early, partially distinguishable
        "period_length": 3.09,
        "input": [
            {"photons": [0, 0, 0, "t2", 1.0, 0.01], "id": "m2"},
            {"photons": [0, 1, 0, "t2 + tau", 1.0, 0.01], "id": "m1"},
            {"photons": [1, 0, 0, 0.001, 1.0, 0.3]},
            {"photons": [1, 1, 0, 3.101, 1.0, 0.3]},
        ],
        "circuit": [{"bs": [0, 1, 45.0, 0.0]}, {"delay": [1]}, {"bs": [0, 1, 45.0, 0.0]},
                    {"detector": [0]}, {"detector": [1]}],
        "sweep": {
            "cartesian": True,
            "params": [
                {"name": "tau", "start": 0.0, "stop": 8.0, "steps": 160},
                # reference detection times at every photon arrival
                {"name": "t2", "values": [0.001, 3.091, 3.101, 6.191]},
            ],
        },
        "core": "direct",
        "output": {"distribution": False, "observables": {"coincidence": [[0, "m2"], [1, "m1"]]}},
    }


def _swap() -> dict:
    return {
        "name": "swap",
        "channels": 4,
        "polarizations": 2,
        "shape": "gaussian",
        "input": [
            {"bell": [0, 1, "p", 0.0, 0.0, 1.0, 1.0, "dt", 1.0, 1.0]},
            {"bell": [2, 3, "p", 0.0, 0.0, 1.0, 1.0, "t3", 1.0, 1.0]},
        ],
        "circuit": [{"bs": [1, 2, 45.0, 0.0]}, {"detector": [0]}, {"detector": [1, 1]},
                    {"detector": [2, 1]}, {"detector": [3]}],
        # point 0: identical photons; point 1: |<P_1|P_2>|^2 = exp(-1/2) = 0.6065
        "sweep": {"params": [{"name": "dt", "values": [0.0, 1.0]},
                             {"name": "t3", "values": [0.0, 10.0]}]},
        "core": "direct",
        "output": {"distribution": False, "density": [0, 3]},
    }


BUILTINS = {"hom": lambda: _hom(1), "hom3": lambda: _hom(3), "delay_mz": _delay_mz, "swap": _swap}


def builtin(name: str) -> Scenario:
    try:
        data = BUILTINS[name]()
    except KeyError:
        raise ScenarioError(f"unknown built-in scenario {name!r}; choose from {sorted(BUILTINS)}") from None
    return validate(data)
