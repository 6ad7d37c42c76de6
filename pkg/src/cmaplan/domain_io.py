"""Domain files: one JSON document holding a whole planning domain.

Layout::

    {
      "schemaVersion": 1,
      "space": {"attributes": [{"name": "fuel", "range": [0, 9]},
                               {"name": "mode", "values": [0, 1]}]},
      "conditions": {"low": "fuel <= 3"},
      "effects": {"burn": {"rules": [{"attr": "fuel", "add": [-2, -1]}]},
                  "jump": {"table": {"0": [3, 4]}}},
      "actions": {"go": {"kind": "concrete", "branches": [
          {"condition": "low", "interval": ["1/3", 0.5], "effect": "burn"}]}},
      "worlds": {"start": {"children": [
          {"interval": [0.2, 0.4], "node": {"leaf": "low"}},
          {"interval": [0.6, 0.8], "node": {"leaf": {"states": [5, 6]}}}]}},
      "plans": {"p": ["go", "go"],
                "q": {"hierarchy": "h", "steps": ["N", "K"]}},
      "hierarchies": {"h": {"nodes": {"A": {"kind": "concrete", "action": "go"},
                                      "N": {"kind": "inter", "children": ["A", "B"]}}}},
      "utilities": {"u": {"expr": "2 * fuel - mode"}, "v": {"table": [0, 1, ...]}}
    }

Conditions, effects and leaves may be given inline (``{"expr": ...}``,
``{"rules": ...}``, ``{"states": ...}``) instead of by name. Probabilities
are decimals or exact rationals written as ``"p/q"`` strings.
"""

from __future__ import annotations

import ast
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any

import numpy as np

from .abstraction import INTER, INTRA, LEAF, SEQ, HNode, Hierarchy
from .actions import ABSTRACT, CONCRETE, Action, ActionBranch, Plan
from .cma import CONDITION, WORLD, Branch, Cma, Node, UtilityFn
from .errors import CmaError, ParseError
from .intervals import ProbInterval
from .state_model import ConditionExpr, Effect, EffectRule, StateSet, StateSpace, \
    compile_condition, compile_effect, effect_saturates, parse_condition
from .validation import Report

SCHEMA_VERSION = 1


# -- deterministic JSON ---------------------------------------------------------

def _fmt_float(x: float) -> str:
    if not math.isfinite(x):
        raise ValueError(f"cannot serialise non-finite number {x}")
    return format(x, ".17g")


def dumps(obj: Any, indent: int = 2) -> str:
    """JSON with sorted keys and floats at 17 significant digits, so equal
    inputs always give byte-identical text."""
    pad = " " * indent

    def emit(o, level: int) -> str:
        if isinstance(o, dict):
            if not o:
                return "{}"
            inner = pad * (level + 1)
            items = [f"{inner}{json.dumps(str(k))}: {emit(o[k], level + 1)}"
                     for k in sorted(o, key=str)]
            return "{\n" + ",\n".join(items) + "\n" + pad * level + "}"
        if isinstance(o, (list, tuple)):
            if not o:
                return "[]"
            if all(isinstance(v, (int, float, str, bool, np.integer, np.floating)) or v is None
                   for v in o):
                return "[" + ", ".join(emit(v, level) for v in o) + "]"
            inner = pad * (level + 1)
            return "[\n" + ",\n".join(inner + emit(v, level + 1) for v in o) + "\n" \
                + pad * level + "]"
        if isinstance(o, bool) or o is None:
            return json.dumps(o)
        if isinstance(o, (int, np.integer)):
            return str(int(o))
        if isinstance(o, (float, np.floating)):
            return _fmt_float(float(o))
        if isinstance(o, str):
            return json.dumps(o)
        raise TypeError(f"cannot serialise {type(o).__name__}")

    return emit(obj, 0) + "\n"


# -- numbers --------------------------------------------------------------------

def parse_number(value, where: str) -> float:
    if isinstance(value, bool):
        raise ParseError(f"{where}: expected a number, got {value!r}")
    if isinstance(value, (int, float)):
        return float(value)
    if isinstance(value, str):
        try:
            return float(Fraction(value.strip()))
        except (ValueError, ZeroDivisionError):
            pass
    raise ParseError(f"{where}: expected a number or 'p/q' rational, got {value!r}")


def _interval(value, where: str) -> ProbInterval:
    if not isinstance(value, list) or len(value) != 2:
        raise ParseError(f"{where}: interval must be a [lo, hi] pair")
    lo, hi = (parse_number(v, where) for v in value)
    try:
        return ProbInterval(lo, hi)
    except ValueError as exc:
        raise ParseError(f"{where}: {exc}") from None


# -- utilities from expressions ---------------------------------------------------

_BINOPS = {ast.Add: np.add, ast.Sub: np.subtract, ast.Mult: np.multiply,
           ast.Div: np.divide, ast.Pow: np.power}


def compile_utility(text: str, space: StateSpace) -> UtilityFn:
    """Arithmetic over attribute names: ``+ - * / **``, unary minus,
    numeric literals, ``min``/``max``/``abs``."""
    try:
        tree = ast.parse(text, mode="eval")
    except SyntaxError as exc:
        raise ParseError(f"utility {text!r}: {exc.msg} at column {exc.offset}") from None
    table = space.values_table.astype(float)

    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)) \
                and not isinstance(node.value, bool):
            return np.full(space.size, float(node.value))
        if isinstance(node, ast.Name):
            try:
                idx, _ = space.attribute(node.id)
            except CmaError:
                raise ParseError(f"utility {text!r}: unknown attribute {node.id!r}") from None
            return table[:, idx]
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            val = ev(node.operand)
            return -val if isinstance(node.op, ast.USub) else val
        if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            return _BINOPS[type(node.op)](ev(node.left), ev(node.right))
        if isinstance(node, ast.Call) and isinstance(node.func, ast.Name) \
                and node.func.id in ("min", "max", "abs") and not node.keywords:
            args = [ev(a) for a in node.args]
            if node.func.id == "abs" and len(args) == 1:
                return np.abs(args[0])
            if node.func.id != "abs" and args:
                return (np.minimum if node.func.id == "min" else np.maximum).reduce(args)
        raise ParseError(f"utility {text!r}: unsupported expression "
                         f"{ast.dump(node)[:40]}")

    with np.errstate(all="ignore"):
        values = ev(tree)
    if not np.all(np.isfinite(values)):
        raise ParseError(f"utility {text!r} is not finite on every state")
    return UtilityFn(space, tuple(values.tolist()))


# -- the model --------------------------------------------------------------------

@dataclass
class Domain:
    """A parsed domain file.

    Besides the compiled objects it keeps each entity's normalised source
    (``specs``) so the model serialises back to an equivalent file.
    """

    space: StateSpace
    conditions: dict[str, StateSet] = field(default_factory=dict)
    effects: dict[str, Effect] = field(default_factory=dict)
    actions: dict[str, Action] = field(default_factory=dict)
    worlds: dict[str, Cma] = field(default_factory=dict)
    plans: dict[str, tuple[str | None, tuple[str, ...]]] = field(default_factory=dict)
    hierarchies: dict[str, Hierarchy] = field(default_factory=dict)
    utilities: dict[str, UtilityFn] = field(default_factory=dict)
    specs: dict[str, dict] = field(default_factory=dict)

    def _get(self, table: dict, kind: str, name: str):
        try:
            return table[name]
        except KeyError:
            known = ", ".join(sorted(table)) or "none"
            raise ParseError(f"unknown {kind} {name!r} (known: {known})") from None

    def action(self, name: str) -> Action:
        return self._get(self.actions, "action", name)

    def world(self, name: str) -> Cma:
        return self._get(self.worlds, "world", name)

    def hierarchy(self, name: str) -> Hierarchy:
        return self._get(self.hierarchies, "hierarchy", name)

    def utility(self, name: str) -> UtilityFn:
        return self._get(self.utilities, "utility", name)

    def plan(self, name: str) -> tuple[Plan, Hierarchy | None]:
        """The plan's actions, plus the hierarchy its steps come from."""
        hname, steps = self._get(self.plans, "plan", name)
        if hname is None:
            return Plan(tuple(self.action(s) for s in steps)), None
        h = self.hierarchy(hname)
        return Plan(tuple(h.action(s) for s in steps)), h

    def model(self) -> tuple:
        """Comparable snapshot of every compiled entity."""
        return (
            self.space,
            tuple(sorted(self.conditions.items())),
            tuple(sorted(self.effects.items())),
            tuple(sorted((k, (a.kind, a.branches)) for k, a in self.actions.items())),
            tuple(sorted(self.worlds.items(), key=lambda kv: kv[0])),
            tuple(sorted(self.plans.items())),
            tuple(sorted((k, tuple(sorted(h.nodes.items()))) for k, h in self.hierarchies.items())),
            tuple(sorted(self.utilities.items())),
        )


def _require(obj, key: str, where: str, kind=None):
    if not isinstance(obj, dict) or key not in obj:
        raise ParseError(f"{where}: missing '{key}'")
    value = obj[key]
    if kind is not None and not isinstance(value, kind):
        raise ParseError(f"{where}.{key}: expected {kind.__name__ if isinstance(kind, type) else kind}")
    return value


def _section(doc: dict, key: str) -> dict:
    value = doc.get(key, {})
    if not isinstance(value, dict):
        raise ParseError(f"'{key}' must be an object")
    return value


def _parse_space(doc: dict) -> tuple[StateSpace, dict]:
    attrs = _require(_require(doc, "space", "domain", dict), "attributes", "space", list)
    out, spec = [], []
    for j, a in enumerate(attrs):
        where = f"space.attributes[{j}]"
        name = _require(a, "name", where, str)
        if "values" in a:
            vals = a["values"]
            if not isinstance(vals, list) or not all(isinstance(v, int) and not isinstance(v, bool)
                                                     for v in vals):
                raise ParseError(f"{where}.values: expected a list of integers")
        elif "range" in a:
            r = a["range"]
            if not (isinstance(r, list) and len(r) == 2 and all(isinstance(v, int) for v in r)):
                raise ParseError(f"{where}.range: expected [lo, hi] integers")
            vals = list(range(r[0], r[1] + 1))
        else:
            raise ParseError(f"{where}: needs 'values' or 'range'")
        out.append((name, vals))
        spec.append({"name": name, "values": sorted(set(vals))})
    try:
        return StateSpace.build(out), {"attributes": spec}
    except (ValueError, CmaError) as exc:
        raise ParseError(f"space: {exc}") from None


def _parse_condition(text, space: StateSpace, where: str) -> tuple[StateSet, str]:
    if not isinstance(text, str):
        raise ParseError(f"{where}: condition must be an expression string")
    try:
        expr: ConditionExpr = parse_condition(text)
        return compile_condition(expr, space), str(expr)
    except (CmaError, ValueError, SyntaxError) as exc:
        raise ParseError(f"{where}: {exc}") from None


def _parse_effect(spec, space: StateSpace, where: str) -> tuple[Effect, dict]:
    if not isinstance(spec, dict) or not ({"rules", "table"} & set(spec)):
        raise ParseError(f"{where}: effect needs 'rules' or 'table'")
    try:
        if "rules" in spec:
            rules, norm = [], []
            for j, r in enumerate(spec["rules"]):
                rw = f"{where}.rules[{j}]"
                attr = _require(r, "attr", rw, str)
                modes = [m for m in ("add", "set") if m in r]
                if len(modes) != 1:
                    raise ParseError(f"{rw}: needs exactly one of 'add' or 'set'")
                rng_ = r[modes[0]]
                if isinstance(rng_, int):
                    rng_ = [rng_, rng_]
                if not (isinstance(rng_, list) and len(rng_) == 2
                        and all(isinstance(v, int) for v in rng_)):
                    raise ParseError(f"{rw}.{modes[0]}: expected an integer or [lo, hi]")
                rules.append(EffectRule(attr, modes[0], rng_[0], rng_[1]))
                norm.append({"attr": attr, modes[0]: list(rng_)})
            return compile_effect(rules, space), {"rules": norm}
        table = spec["table"]
        if not isinstance(table, dict):
            raise ParseError(f"{where}.table: expected an object state -> [states]")
        parsed = {}
        for k, v in table.items():
            try:
                b = int(k)
            except ValueError:
                raise ParseError(f"{where}.table: state key {k!r} is not an index") from None
            if not 0 <= b < space.size:
                raise ParseError(f"{where}.table: state {b} out of range")
            if not isinstance(v, list) or not v or not all(
                    isinstance(s, int) and 0 <= s < space.size for s in v):
                raise ParseError(f"{where}.table[{k}]: expected a nonempty list of states")
            parsed[b] = sorted(set(v))
        return Effect.from_table(space, parsed), \
            {"table": {str(b): parsed[b] for b in sorted(parsed)}}
    except ParseError:
        raise
    except (CmaError, ValueError) as exc:
        raise ParseError(f"{where}: {exc}") from None


def _parse_world_node(spec, dom: Domain, where: str) -> tuple[Node, dict]:
    if not isinstance(spec, dict):
        raise ParseError(f"{where}: expected a node object")
    space = dom.space
    role = spec.get("role", WORLD)
    if role not in (WORLD, CONDITION):
        raise ParseError(f"{where}.role: unknown role {role!r}")
    if "leaf" in spec:
        ref = spec["leaf"]
        if isinstance(ref, str):
            states = dom._get(dom.conditions, "condition", ref)
            norm = ref
        elif isinstance(ref, dict) and "expr" in ref:
            states, text = _parse_condition(ref["expr"], space, f"{where}.leaf.expr")
            norm = {"expr": text}
        elif isinstance(ref, dict) and "states" in ref:
            ids = ref["states"]
            if not isinstance(ids, list) or not all(isinstance(s, int) and 0 <= s < space.size
                                                    for s in ids):
                raise ParseError(f"{where}.leaf.states: expected state indices")
            states = space.states(ids)
            norm = {"states": sorted(states)}
        else:
            raise ParseError(f"{where}.leaf: expected a condition name, {{expr}} or {{states}}")
        if not states:
            raise ParseError(f"{where}: leaf state set is empty")
        out = {"leaf": norm}
        if role != WORLD:
            out["role"] = role
        return Node(states, (), role), out
    kids = _require(spec, "children", where, list)
    if not kids:
        raise ParseError(f"{where}.children: must not be empty")
    branches, norm_kids = [], []
    for j, c in enumerate(kids):
        cw = f"{where}.children[{j}]"
        iv = _interval(_require(c, "interval", cw), f"{cw}.interval")
        child, cspec = _parse_world_node(_require(c, "node", cw), dom, f"{cw}.node")
        tag = c.get("tag")
        if tag is not None and not isinstance(tag, int):
            raise ParseError(f"{cw}.tag: expected an integer")
        branches.append(Branch(iv, child, tag))
        entry = {"interval": [iv.lo, iv.hi], "node": cspec}
        if tag is not None:
            entry["tag"] = tag
        norm_kids.append(entry)
    label = None
    out = {"children": norm_kids}
    if "states" in spec:
        ids = spec["states"]
        if not isinstance(ids, list) or not all(isinstance(s, int) and 0 <= s < space.size
                                                for s in ids):
            raise ParseError(f"{where}.states: expected state indices")
        label = space.states(ids)
        out["states"] = sorted(label)
    if role != WORLD:
        out["role"] = role
    return Node(label, tuple(branches), role), out


def _parse_hierarchy(spec, dom: Domain, where: str) -> tuple[Hierarchy, dict]:
    nodes_spec = _require(spec, "nodes", where, dict)
    nodes, norm = [], {}
    for name, n in nodes_spec.items():
        nw = f"{where}.nodes.{name}"
        kind = _require(n, "kind", nw, str)
        try:
            if kind == LEAF:
                aname = _require(n, "action", nw, str)
                nodes.append(HNode(name, LEAF, action=dom.action(aname)))
                norm[name] = {"kind": kind, "action": aname}
            elif kind in (INTER, SEQ, INTRA):
                children = _require(n, "children", nw, list)
                merges = n.get("merges", [])
                nodes.append(HNode(name, kind, tuple(children), merges=merges))
                norm[name] = {"kind": kind, "children": list(children)}
                if kind == INTRA:
                    norm[name]["merges"] = [list(g) for g in merges]
            else:
                raise ParseError(f"{nw}.kind: unknown kind {kind!r}")
        except ParseError as exc:
            raise ParseError(f"{nw}: {exc}") from None
        except (CmaError, TypeError) as exc:
            raise ParseError(f"{nw}: {exc}") from None
    try:
        return Hierarchy.build(nodes), {"nodes": norm}
    except CmaError as exc:
        raise ParseError(f"{where}: {exc}") from None


def from_dict(doc: dict) -> Domain:
    if not isinstance(doc, dict):
        raise ParseError("domain file must hold a JSON object")
    version = doc.get("schemaVersion", SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        raise ParseError(f"unsupported schemaVersion {version!r}")
    space, space_spec = _parse_space(doc)
    dom = Domain(space)
    dom.specs = {"space": space_spec, "conditions": {}, "effects": {}, "actions": {},
                 "worlds": {}, "plans": {}, "hierarchies": {}, "utilities": {}}

    for name, text in _section(doc, "conditions").items():
        dom.conditions[name], norm = _parse_condition(text, space, f"conditions.{name}")
        dom.specs["conditions"][name] = norm

    for name, spec in _section(doc, "effects").items():
        dom.effects[name], dom.specs["effects"][name] = \
            _parse_effect(spec, space, f"effects.{name}")

    for name, spec in _section(doc, "actions").items():
        where = f"actions.{name}"
        kind = spec.get("kind", CONCRETE) if isinstance(spec, dict) else None
        if kind not in (CONCRETE, ABSTRACT):
            raise ParseError(f"{where}.kind: must be 'concrete' or 'abstract'")
        branches, norm = [], []
        for j, br in enumerate(_require(spec, "branches", where, list)):
            bw = f"{where}.branches[{j}]"
            cref = _require(br, "condition", bw)
            if isinstance(cref, str):
                if cref not in dom.conditions:
                    raise ParseError(f"{bw}.condition: unknown condition {cref!r}")
                cond, text, cnorm = dom.conditions[cref], dom.specs["conditions"][cref], cref
            elif isinstance(cref, dict) and "expr" in cref:
                cond, text = _parse_condition(cref["expr"], space, f"{bw}.condition.expr")
                cnorm = {"expr": text}
            elif isinstance(cref, dict) and "states" in cref:
                # explicit sets; may be empty for padding branches of derived actions
                ids = cref["states"]
                if not isinstance(ids, list) or not all(
                        isinstance(b, int) and 0 <= b < space.size for b in ids):
                    raise ParseError(f"{bw}.condition.states: expected state indices")
                cond, text = space.states(ids), None
                cnorm = {"states": sorted(cond)}
            else:
                raise ParseError(f"{bw}.condition: expected a name, {{expr}} or {{states}}")
            iv = _interval(_require(br, "interval", bw), f"{bw}.interval")
            eref = _require(br, "effect", bw)
            if isinstance(eref, str):
                if eref not in dom.effects:
                    raise ParseError(f"{bw}.effect: unknown effect {eref!r}")
                eff, enorm = dom.effects[eref], eref
            else:
                eff, enorm = _parse_effect(eref, space, f"{bw}.effect")
            branches.append(ActionBranch(cond, iv, eff, text))
            norm.append({"condition": cnorm, "interval": [iv.lo, iv.hi], "effect": enorm})
        try:
            dom.actions[name] = Action(name, kind, tuple(branches))
        except (CmaError, ValueError) as exc:
            raise ParseError(f"{where}: {exc}") from None
        dom.specs["actions"][name] = {"kind": kind, "branches": norm}

    for name, spec in _section(doc, "worlds").items():
        node, norm = _parse_world_node(spec, dom, f"worlds.{name}")
        dom.worlds[name] = Cma(space, node)
        dom.specs["worlds"][name] = norm

    for name, spec in _section(doc, "hierarchies").items():
        dom.hierarchies[name], dom.specs["hierarchies"][name] = \
            _parse_hierarchy(spec, dom, f"hierarchies.{name}")

    for name, spec in _section(doc, "plans").items():
        where = f"plans.{name}"
        if isinstance(spec, list):
            hname, steps = None, spec
        elif isinstance(spec, dict):
            hname = _require(spec, "hierarchy", where, str)
            steps = _require(spec, "steps", where, list)
        else:
            raise ParseError(f"{where}: expected a list of actions or {{hierarchy, steps}}")
        if not steps or not all(isinstance(s, str) for s in steps):
            raise ParseError(f"{where}: steps must be a nonempty list of names")
        if hname is None:
            for s in steps:
                if s not in dom.actions:
                    raise ParseError(f"{where}: unknown action {s!r}")
        else:
            h = dom._get(dom.hierarchies, "hierarchy", hname)
            for s in steps:
                if s not in h.nodes:
                    raise ParseError(f"{where}: {s!r} is not a node of hierarchy {hname!r}")
        dom.plans[name] = (hname, tuple(steps))
        dom.specs["plans"][name] = list(steps) if hname is None else \
            {"hierarchy": hname, "steps": list(steps)}

    for name, spec in _section(doc, "utilities").items():
        where = f"utilities.{name}"
        if isinstance(spec, dict) and "expr" in spec:
            dom.utilities[name] = compile_utility(spec["expr"], space)
            dom.specs["utilities"][name] = {"expr": spec["expr"]}
        elif isinstance(spec, dict) and "table" in spec:
            vals = [parse_number(v, where) for v in spec["table"]]
            try:
                dom.utilities[name] = UtilityFn(space, tuple(vals))
            except ValueError as exc:
                raise ParseError(f"{where}: {exc}") from None
            dom.specs["utilities"][name] = {"table": vals}
        else:
            raise ParseError(f"{where}: expected {{expr}} or {{table}}")
    return dom


def loads(text: str) -> Domain:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    return from_dict(doc)


def load(path) -> Domain:
    with open(path, encoding="utf-8") as fh:
        return loads(fh.read())


def to_dict(dom: Domain) -> dict:
    out = {"schemaVersion": SCHEMA_VERSION}
    for key, value in dom.specs.items():
        if value or key == "space":
            out[key] = value
    return out


def serialize(dom: Domain) -> str:
    return dumps(to_dict(dom))


# -- trees and results ----------------------------------------------------------------

def node_to_dict(node: Node) -> dict:
    if node.is_leaf:
        out = {"leaf": {"states": sorted(node.states)}}
    else:
        out = {"children": [
            {"interval": [b.interval.lo, b.interval.hi], "node": node_to_dict(b.node),
             **({"tag": b.tag} if b.tag is not None else {})}
            for b in node.children]}
        if node.states is not None:
            out["states"] = sorted(node.states)
    if node.role != WORLD:
        out["role"] = node.role
    return out


def cma_to_dict(M: Cma) -> dict:
    return node_to_dict(M.root)


def cma_from_dict(spec: dict, space: StateSpace) -> Cma:
    dom = Domain(space)
    node, _ = _parse_world_node(spec, dom, "tree")
    return Cma(space, node)


def action_to_dict(a: Action) -> dict:
    return {
        "kind": a.kind,
        "branches": [{"condition": {"states": sorted(br.condition)},
                      "interval": [br.interval.lo, br.interval.hi],
                      "effect": {"table": {str(b): sorted(br.effect.image(b))
                                           for b in range(a.space.size)}}}
                     for br in a.branches],
    }


def build_domain(space: StateSpace, *, actions=(), worlds=None, hierarchies=None,
                 plans=None, utilities=None) -> Domain:
    """Domain from in-memory objects, with extensional conditions and
    effects. Hierarchy leaves must use actions passed in ``actions``."""
    doc: dict = {
        "schemaVersion": SCHEMA_VERSION,
        "space": {"attributes": [{"name": n, "values": list(v)} for n, v in space.attributes]},
        "actions": {a.name: action_to_dict(a) for a in actions},
        "worlds": {k: cma_to_dict(M) for k, M in (worlds or {}).items()},
        "hierarchies": {},
        "plans": {},
        "utilities": {k: {"table": list(u.values)} for k, u in (utilities or {}).items()},
    }
    for hname, h in (hierarchies or {}).items():
        nodes = {}
        for name, n in h.nodes.items():
            if n.kind == LEAF:
                nodes[name] = {"kind": LEAF, "action": n.action.name}
            else:
                nodes[name] = {"kind": n.kind, "children": list(n.children)}
                if n.kind == INTRA:
                    nodes[name]["merges"] = [list(g) for g in n.merges]
        doc["hierarchies"][hname] = {"nodes": nodes}
    for pname, spec in (plans or {}).items():
        doc["plans"][pname] = spec
    return from_dict(doc)


def lint(dom: Domain) -> Report:
    """File-level warnings: rule effects that saturate at a domain boundary."""
    report = Report()

    def check(spec, where):
        if isinstance(spec, dict) and "rules" in spec:
            rules = [EffectRule(r["attr"], m, *r[m]) for r in spec["rules"]
                     for m in ("add", "set") if m in r]
            if effect_saturates(rules, dom.space):
                report.warn(where, "effect saturates at an attribute domain boundary")

    for name, spec in sorted(dom.specs.get("effects", {}).items()):
        check(spec, f"effect {name}")
    for name, spec in sorted(dom.specs.get("actions", {}).items()):
        for j, br in enumerate(spec["branches"]):
            check(br["effect"], f"action {name} branch {j}")
    return report
