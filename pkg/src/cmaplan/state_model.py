"""Finite state spaces, state sets, effects and symbolic conditions.

States are attribute vectors over finite integer domains, numbered by a
mixed-radix code (first attribute most significant). Sets of states are
Python integers used as bit vectors, which keeps union, intersection and
subset tests cheap at the sizes the projection and the oracle work with.
"""

from __future__ import annotations

import ast
import bisect
import itertools
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Iterator, Mapping, Sequence

import numpy as np

from .errors import CompileError, SpaceMismatchError

DEFAULT_SIZE_CAP = 1 << 20


def _iter_bits(bits: int) -> Iterator[int]:
    while bits:
        low = bits & -bits
        yield low.bit_length() - 1
        bits ^= low


@dataclass(frozen=True)
class StateSpace:
    """Ordered attributes, each with a strictly increasing integer domain."""

    attributes: tuple[tuple[str, tuple[int, ...]], ...]

    def __post_init__(self):
        attrs = tuple((str(n), tuple(int(v) for v in d)) for n, d in self.attributes)
        object.__setattr__(self, "attributes", attrs)
        names = [n for n, _ in attrs]
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate attribute names in {names}")
        for name, dom in attrs:
            if not name.isidentifier():
                raise ValueError(f"attribute name {name!r} is not an identifier")
            if not dom:
                raise ValueError(f"attribute {name!r} has an empty domain")
            if any(a >= b for a, b in zip(dom, dom[1:])):
                raise ValueError(f"domain of {name!r} is not strictly increasing")

    @classmethod
    def build(cls, attributes: Mapping[str, Iterable[int]] | Sequence[tuple[str, Iterable[int]]],
              cap: int = DEFAULT_SIZE_CAP) -> "StateSpace":
        items = attributes.items() if isinstance(attributes, Mapping) else attributes
        space = cls(tuple((n, tuple(d)) for n, d in items))
        if space.size > cap:
            raise ValueError(f"state space has {space.size} states, cap is {cap}")
        return space

    @cached_property
    def size(self) -> int:
        n = 1
        for _, dom in self.attributes:
            n *= len(dom)
        return n

    @cached_property
    def names(self) -> tuple[str, ...]:
        return tuple(n for n, _ in self.attributes)

    @cached_property
    def strides(self) -> tuple[int, ...]:
        strides = []
        s = 1
        for _, dom in reversed(self.attributes):
            strides.append(s)
            s *= len(dom)
        return tuple(reversed(strides))

    def attribute(self, name: str) -> tuple[int, tuple[int, ...]]:
        """Position and domain of a named attribute."""
        for i, (n, dom) in enumerate(self.attributes):
            if n == name:
                return i, dom
        raise CompileError(f"unknown attribute {name!r}")

    @cached_property
    def values_table(self) -> np.ndarray:
        """Array of shape (size, n_attributes) holding every state's values."""
        idx = np.arange(self.size, dtype=np.int64)
        cols = []
        for (_, dom), stride in zip(self.attributes, self.strides):
            pos = (idx // stride) % len(dom)
            cols.append(np.asarray(dom, dtype=np.int64)[pos])
        return np.stack(cols, axis=1) if cols else np.zeros((1, 0), dtype=np.int64)

    @property
    def full(self) -> "StateSet":
        return StateSet(self, (1 << self.size) - 1)

    @property
    def empty(self) -> "StateSet":
        return StateSet(self, 0)

    def states(self, indices: Iterable[int]) -> "StateSet":
        bits = 0
        for i in indices:
            i = int(i)
            if not 0 <= i < self.size:
                raise IndexError(f"state index {i} out of range [0, {self.size})")
            bits |= 1 << i
        return StateSet(self, bits)

    def singleton(self, index: int) -> "StateSet":
        return self.states([index])


def state_index(values: Mapping[str, int] | Sequence[int], space: StateSpace) -> int:
    if isinstance(values, Mapping):
        if set(values) != set(space.names):
            raise ValueError(f"expected values for {space.names}, got {sorted(values)}")
        values = [values[n] for n in space.names]
    if len(values) != len(space.attributes):
        raise ValueError("attribute vector has the wrong length")
    index = 0
    for v, (name, dom), stride in zip(values, space.attributes, space.strides):
        pos = bisect.bisect_left(dom, v)
        if pos == len(dom) or dom[pos] != v:
            raise ValueError(f"value {v} not in domain of {name!r}")
        index += pos * stride
    return index


def state_decode(index: int, space: StateSpace) -> tuple[int, ...]:
    if not 0 <= index < space.size:
        raise IndexError(f"state index {index} out of range [0, {space.size})")
    out = []
    for (_, dom), stride in zip(space.attributes, space.strides):
        out.append(dom[(index // stride) % len(dom)])
    return tuple(out)


@dataclass(frozen=True)
class StateSet:
    """A subset of a state space stored as a bit vector."""

    space: StateSpace
    bits: int

    def _same(self, other: "StateSet") -> None:
        if self.space is not other.space and self.space != other.space:
            raise SpaceMismatchError("state sets belong to different spaces")

    def __and__(self, other: "StateSet") -> "StateSet":
        self._same(other)
        return StateSet(self.space, self.bits & other.bits)

    def __or__(self, other: "StateSet") -> "StateSet":
        self._same(other)
        return StateSet(self.space, self.bits | other.bits)

    def __sub__(self, other: "StateSet") -> "StateSet":
        self._same(other)
        return StateSet(self.space, self.bits & ~other.bits)

    def __invert__(self) -> "StateSet":
        return StateSet(self.space, self.space.full.bits & ~self.bits)

    def __le__(self, other: "StateSet") -> bool:
        self._same(other)
        return self.bits & ~other.bits == 0

    def __ge__(self, other: "StateSet") -> bool:
        return other <= self

    def __contains__(self, index: int) -> bool:
        return index >= 0 and bool(self.bits >> index & 1)

    def __iter__(self) -> Iterator[int]:
        return _iter_bits(self.bits)

    def __len__(self) -> int:
        return self.bits.bit_count()

    def __bool__(self) -> bool:
        return self.bits != 0

    def intersects(self, other: "StateSet") -> bool:
        self._same(other)
        return self.bits & other.bits != 0

    def to_mask(self) -> np.ndarray:
        n = self.space.size
        raw = self.bits.to_bytes((n + 7) // 8, "little")
        return np.unpackbits(np.frombuffer(raw, dtype=np.uint8),
                             bitorder="little")[:n].astype(bool)

    @classmethod
    def from_mask(cls, space: StateSpace, mask: np.ndarray) -> "StateSet":
        packed = np.packbits(np.asarray(mask, dtype=bool), bitorder="little")
        return cls(space, int.from_bytes(packed.tobytes(), "little"))

    def __repr__(self) -> str:
        members = list(self)
        if len(members) > 12:
            return f"StateSet(<{len(members)} states>)"
        return f"StateSet({members})"


def describe_set(s: StateSet) -> str:
    """Human-readable description, used for DOT labels."""
    space = s.space
    if not s:
        return "{}"
    if s.bits == space.full.bits:
        return "Ω"
    members = list(s)
    table = space.values_table[members]
    per_attr = [sorted(set(table[:, i].tolist())) for i in range(len(space.attributes))]
    box = 1
    for vals in per_attr:
        box *= len(vals)
    if box == len(members):
        parts = []
        for (name, dom), vals in zip(space.attributes, per_attr):
            if len(vals) == len(dom):
                continue
            parts.append(f"{name}∈{_compact(vals, dom)}")
        return ", ".join(parts)
    if len(members) <= 6:
        rows = []
        for b in members:
            vals = state_decode(b, space)
            rows.append("(" + ",".join(f"{n}={v}" for n, v in zip(space.names, vals)) + ")")
        return "{" + " ".join(rows) + "}"
    return f"<{len(members)} states>"


def _compact(vals: list[int], dom: tuple[int, ...]) -> str:
    lo, hi = dom.index(vals[0]), dom.index(vals[-1])
    if hi - lo + 1 == len(vals) and len(vals) > 2:
        return "{%d..%d}" % (vals[0], vals[-1])
    return "{" + ",".join(str(v) for v in vals) + "}"


# -- conditions ---------------------------------------------------------------

_OPS = {"<": np.less, "<=": np.less_equal, "==": np.equal,
        ">=": np.greater_equal, ">": np.greater}
_FLIP = {"<": ">", "<=": ">=", "==": "==", ">=": "<=", ">": "<"}


class ConditionExpr:
    """Boolean expression over ``attribute <op> constant`` atoms."""

    def attributes(self) -> set[str]:
        raise NotImplementedError

    def __and__(self, other: "ConditionExpr") -> "ConditionExpr":
        return And((self, other))

    def __or__(self, other: "ConditionExpr") -> "ConditionExpr":
        return Or((self, other))

    def __invert__(self) -> "ConditionExpr":
        return Not(self)


@dataclass(frozen=True)
class Const(ConditionExpr):
    value: bool

    def attributes(self):
        return set()

    def __str__(self):
        return "true" if self.value else "false"


TRUE = Const(True)
FALSE = Const(False)


@dataclass(frozen=True)
class Atom(ConditionExpr):
    attr: str
    op: str
    value: int

    def __post_init__(self):
        if self.op not in _OPS:
            raise CompileError(f"unsupported comparison {self.op!r}")

    def attributes(self):
        return {self.attr}

    def __str__(self):
        return f"{self.attr} {self.op} {self.value}"


@dataclass(frozen=True)
class And(ConditionExpr):
    parts: tuple[ConditionExpr, ...]

    def attributes(self):
        return set().union(*(p.attributes() for p in self.parts))

    def __str__(self):
        return "(" + " and ".join(str(p) for p in self.parts) + ")" if self.parts else "true"


@dataclass(frozen=True)
class Or(ConditionExpr):
    parts: tuple[ConditionExpr, ...]

    def attributes(self):
        return set().union(*(p.attributes() for p in self.parts))

    def __str__(self):
        return "(" + " or ".join(str(p) for p in self.parts) + ")" if self.parts else "false"


@dataclass(frozen=True)
class Not(ConditionExpr):
    part: ConditionExpr

    def attributes(self):
        return self.part.attributes()

    def __str__(self):
        return f"not {self.part}"


def parse_condition(text: str) -> ConditionExpr:
    """Parse ``"fuel > 3 and not (ton == 0)"`` style text."""
    try:
        tree = ast.parse(text.strip(), mode="eval")
    except SyntaxError as exc:
        raise CompileError(f"cannot parse condition {text!r}: {exc.msg}") from None
    return _from_ast(tree.body, text)


_AST_CMP = {ast.Lt: "<", ast.LtE: "<=", ast.Eq: "==", ast.GtE: ">=", ast.Gt: ">"}


def _const_int(node, text):
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, ast.USub):
        return -_const_int(node.operand, text)
    if isinstance(node, ast.Constant) and isinstance(node.value, int) \
            and not isinstance(node.value, bool):
        return node.value
    raise CompileError(f"expected an integer constant in {text!r}")


def _from_ast(node, text) -> ConditionExpr:
    if isinstance(node, ast.BoolOp):
        parts = tuple(_from_ast(v, text) for v in node.values)
        return And(parts) if isinstance(node.op, ast.And) else Or(parts)
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, ast.Not):
        return Not(_from_ast(node.operand, text))
    if isinstance(node, ast.Constant) and isinstance(node.value, bool):
        return Const(node.value)
    if isinstance(node, ast.Name) and node.id in ("true", "false"):
        return Const(node.id == "true")
    if isinstance(node, ast.Compare):
        operands = [node.left, *node.comparators]
        atoms = []
        for left, op, right in zip(operands, node.ops, operands[1:]):
            sym = _AST_CMP.get(type(op))
            if sym is None:
                raise CompileError(f"unsupported comparison in {text!r}")
            if isinstance(left, ast.Name):
                atoms.append(Atom(left.id, sym, _const_int(right, text)))
            elif isinstance(right, ast.Name):
                atoms.append(Atom(right.id, _FLIP[sym], _const_int(left, text)))
            else:
                raise CompileError(f"comparison without an attribute in {text!r}")
        return atoms[0] if len(atoms) == 1 else And(tuple(atoms))
    raise CompileError(f"unsupported expression in condition {text!r}")


def compile_condition(expr: ConditionExpr | str, space: StateSpace) -> StateSet:
    """Extensional set of states satisfying ``expr``."""
    if isinstance(expr, str):
        expr = parse_condition(expr)
    return StateSet.from_mask(space, _mask(expr, space))


def _mask(expr: ConditionExpr, space: StateSpace) -> np.ndarray:
    if isinstance(expr, Const):
        return np.full(space.size, expr.value, dtype=bool)
    if isinstance(expr, Atom):
        i, _ = space.attribute(expr.attr)
        return _OPS[expr.op](space.values_table[:, i], expr.value)
    if isinstance(expr, And):
        out = np.ones(space.size, dtype=bool)
        for p in expr.parts:
            out &= _mask(p, space)
        return out
    if isinstance(expr, Or):
        out = np.zeros(space.size, dtype=bool)
        for p in expr.parts:
            out |= _mask(p, space)
        return out
    if isinstance(expr, Not):
        return ~_mask(expr.part, space)
    raise CompileError(f"not a condition expression: {expr!r}")


# -- effects ------------------------------------------------------------------

@dataclass(frozen=True)
class EffectRule:
    """``attr += [lo, hi]`` (mode ``add``) or ``attr := [lo, hi]`` (mode ``set``)."""

    attr: str
    mode: str
    lo: int
    hi: int

    def __post_init__(self):
        if self.mode not in ("add", "set"):
            raise CompileError(f"effect rule mode must be 'add' or 'set', got {self.mode!r}")
        if int(self.lo) != self.lo or int(self.hi) != self.hi or self.lo > self.hi:
            raise CompileError(f"bad effect interval [{self.lo}, {self.hi}] on {self.attr!r}")


@dataclass(frozen=True)
class Effect:
    """Total map from each state to a nonempty set of successor states."""

    space: StateSpace
    images: tuple[int, ...]

    def __post_init__(self):
        if len(self.images) != self.space.size:
            raise ValueError("effect table does not cover every state")
        if any(img == 0 for img in self.images):
            bad = next(i for i, img in enumerate(self.images) if img == 0)
            raise ValueError(f"effect is not total: state {bad} has an empty image")

    @classmethod
    def identity(cls, space: StateSpace) -> "Effect":
        return cls(space, tuple(1 << b for b in range(space.size)))

    @classmethod
    def from_table(cls, space: StateSpace, table: Mapping[int, Iterable[int]]) -> "Effect":
        """Extensional effect; states missing from ``table`` map to themselves."""
        images = [1 << b for b in range(space.size)]
        for b, succ in table.items():
            images[int(b)] = space.states(succ).bits
        return cls(space, tuple(images))

    def image(self, b: int) -> StateSet:
        return StateSet(self.space, self.images[b])

    def apply(self, states: StateSet) -> StateSet:
        """Lifted effect ``E(B)``: union of the images of the members of B."""
        bits = 0
        images = self.images
        for b in _iter_bits(states.bits):
            bits |= images[b]
        return StateSet(self.space, bits)

    def union(self, other: "Effect") -> "Effect":
        if self.space != other.space:
            raise SpaceMismatchError("effects over different spaces")
        return Effect(self.space, tuple(a | b for a, b in zip(self.images, other.images)))

    def then(self, other: "Effect") -> "Effect":
        """Composition: apply ``self`` first, then ``other``."""
        if self.space != other.space:
            raise SpaceMismatchError("effects over different spaces")
        return Effect(self.space, tuple(
            other.apply(StateSet(self.space, img)).bits for img in self.images))

    @cached_property
    def matrix(self) -> np.ndarray:
        """Boolean adjacency matrix ``M[b, b'] = b' in E(b)``."""
        return np.stack([StateSet(self.space, img).to_mask() for img in self.images])

    def is_identity(self) -> bool:
        return all(img == 1 << b for b, img in enumerate(self.images))


def _snap(r: int, dom: tuple[int, ...]) -> tuple[int, bool]:
    """Nearest domain value to ``r`` (ties go low) and whether ``r`` saturated."""
    if r <= dom[0]:
        return dom[0], r < dom[0]
    if r >= dom[-1]:
        return dom[-1], r > dom[-1]
    j = bisect.bisect_left(dom, r)
    if dom[j] == r:
        return r, False
    lo, hi = dom[j - 1], dom[j]
    return (lo if r - lo <= hi - r else hi), False


def _rule_positions(rule: EffectRule, dom: tuple[int, ...]) -> tuple[list[set[int]], bool]:
    """For each current position in ``dom``, the set of positions reachable."""
    out, saturated = [], False
    for v in dom:
        targets = set()
        base = v if rule.mode == "add" else 0
        for r in range(base + int(rule.lo), base + int(rule.hi) + 1):
            snapped, sat = _snap(r, dom)
            saturated |= sat
            targets.add(dom.index(snapped))
        out.append(targets)
    return out, saturated


def compile_effect(rules: Sequence[EffectRule], space: StateSpace) -> Effect:
    """Build the effect that applies every rule independently.

    Results falling outside an attribute's domain saturate at the boundary;
    values between non-contiguous domain members snap to the nearest one.
    """
    return _compile_effect(rules, space)[0]


def effect_saturates(rules: Sequence[EffectRule], space: StateSpace) -> bool:
    return _compile_effect(rules, space)[1]


def _compile_effect(rules, space):
    by_attr: dict[int, list[set[int]]] = {}
    saturated = False
    for rule in rules:
        i, dom = space.attribute(rule.attr)
        if i in by_attr:
            raise CompileError(f"attribute {rule.attr!r} has more than one effect rule")
        by_attr[i], sat = _rule_positions(rule, dom)
        saturated |= sat
    if not by_attr:
        return Effect.identity(space), False
    radices = [len(dom) for _, dom in space.attributes]
    strides = space.strides
    ruled = sorted(by_attr)
    images = []
    for b in range(space.size):
        pos = [(b // strides[i]) % radices[i] for i in ruled]
        base = b - sum(p * strides[i] for p, i in zip(pos, ruled))
        bits = 0
        for combo in itertools.product(*(by_attr[i][p] for p, i in zip(pos, ruled))):
            bits |= 1 << (base + sum(q * strides[i] for q, i in zip(combo, ruled)))
        images.append(bits)
    return Effect(space, tuple(images)), saturated
