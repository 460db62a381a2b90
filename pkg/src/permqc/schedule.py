"""Layered gate programs, timestep accounting and relabeling compilation."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .gates import (
    Exchange,
    Fredkin,
    GateError,
    GateOp,
    Layer,
    PermGate,
    apply_basis_layers,
    apply_layer,
    is_basis_permuting,
    layer_support,
)
from .states import QubitPermutation, SparseState, apply_perm, compose


@dataclass(frozen=True)
class Schedule:
    """Ordered layers, each tagged with the logical gate that produced it."""

    layers: tuple[Layer, ...] = ()
    tags: tuple[str, ...] = ()

    def __post_init__(self):
        layers = tuple(self.layers)
        tags = tuple(self.tags) if self.tags else ("",) * len(layers)
        if len(tags) != len(layers):
            raise GateError("one tag per layer required")
        object.__setattr__(self, "layers", layers)
        object.__setattr__(self, "tags", tags)

    @classmethod
    def of(cls, layers: Iterable[Layer], tag: str = "") -> "Schedule":
        layers = tuple(layers)
        return cls(layers, (tag,) * len(layers))

    def __add__(self, other: "Schedule") -> "Schedule":
        return Schedule(self.layers + other.layers, self.tags + other.tags)

    def __len__(self) -> int:
        return len(self.layers)

    def retag(self, tag: str) -> "Schedule":
        return Schedule(self.layers, (tag,) * len(self.layers))

    def ops(self) -> list[GateOp]:
        return [op for layer in self.layers for op in layer.ops]

    def count(self, kind: type) -> int:
        return sum(isinstance(op, kind) for op in self.ops())

    def blocks(self) -> list[tuple[str, int]]:
        """Runs of consecutive layers sharing a tag, as (tag, layer count)."""
        out: list[tuple[str, int]] = []
        for tag in self.tags:
            if out and out[-1][0] == tag:
                out[-1] = (tag, out[-1][1] + 1)
            else:
                out.append((tag, 1))
        return out

    def to_json(self) -> dict:
        return {"layers": [{"tag": t, "ops": layer.to_json()}
                           for t, layer in zip(self.tags, self.layers)]}

    @classmethod
    def from_json(cls, data: dict) -> "Schedule":
        layers = [Layer.from_json(entry["ops"]) for entry in data["layers"]]
        tags = [entry.get("tag", "") for entry in data["layers"]]
        return cls(tuple(layers), tuple(tags))

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)


def perm_layer(perm: QubitPermutation) -> Layer:
    return Layer((PermGate(perm),))


def timesteps(schedule: Schedule) -> int:
    return sum(layer.costs_timestep for layer in schedule.layers)


def run_schedule(schedule: Schedule, state: SparseState) -> SparseState:
    # runs of basis-permuting layers are fused while their supports nest,
    # which keeps the per-run cache of local bit patterns small
    pending: list[Layer] = []
    support = 0
    for layer in schedule.layers:
        if is_basis_permuting(layer):
            sup = layer_support(layer, state.n)
            if pending and (sup | support) not in (sup, support):
                state = apply_basis_layers(state, pending)
                pending = []
            support = sup | support if pending else sup
            pending.append(layer)
            continue
        if pending:
            state = apply_basis_layers(state, pending)
            pending = []
        state = apply_layer(state, layer)
    if pending:
        state = apply_basis_layers(state, pending)
    return state


@dataclass
class RelabelMap:
    """Where the live content of each program label physically sits.

    ``current[p - 1]`` is the program (live) label whose content is stored
    on physical qubit ``p``.
    """

    current: list[int] = field(default_factory=list)

    @classmethod
    def identity(cls, n: int) -> "RelabelMap":
        return cls(list(range(1, n + 1)))

    @property
    def n(self) -> int:
        return len(self.current)

    def physical(self, live: int) -> int:
        return self.current.index(live) + 1

    def fold(self, perm: QubitPermutation) -> None:
        # content of live label j moves to live label perm(j); physical qubits stay put
        self.current = [perm(q) for q in self.current]

    def as_permutation(self) -> QubitPermutation:
        """Permutation taking the compiled state onto the original program's state."""
        return QubitPermutation(self.n, tuple(self.current))

    def to_json(self) -> dict:
        return {"current": list(self.current)}


def _remap(op: GateOp, where: dict[int, int]) -> GateOp:
    if isinstance(op, Exchange):
        return Exchange(where[op.i], where[op.j], op.theta)
    if isinstance(op, Fredkin):
        return Fredkin(where[op.control], where[op.a], where[op.b])
    return op


def compile_relabeling(schedule: Schedule, n: int | None = None) -> tuple[Schedule, RelabelMap]:
    """Drop every permutation gate, rewriting later gates through the relabeling.

    Returns the compiled schedule and the final map; applying
    ``relabel.as_permutation()`` to the compiled output reproduces the
    original schedule's output.
    """
    if n is None:
        perms = [op.perm.n for op in schedule.ops() if isinstance(op, PermGate)]
        supports = [q for op in schedule.ops() for q in op.support]
        n = max(perms + supports + [1])
    relabel = RelabelMap.identity(n)
    layers, tags = [], []
    for tag, layer in zip(schedule.tags, schedule.layers):
        perm_ops = [op for op in layer.ops if isinstance(op, PermGate)]
        for op in perm_ops:
            relabel.fold(op.perm)
        rest = [op for op in layer.ops if not isinstance(op, PermGate)]
        if not rest:
            continue
        where = {live: p for p, live in enumerate(relabel.current, start=1)}
        layers.append(Layer(tuple(_remap(op, where) for op in rest)))
        tags.append(tag)
    return Schedule(tuple(layers), tuple(tags)), relabel


def run_compiled(compiled: Schedule, relabel: RelabelMap, state: SparseState) -> SparseState:
    """Run a compiled schedule and undo the final static relabeling."""
    out = run_schedule(compiled, state)
    return apply_perm(relabel.as_permutation(), out)


def merge_permutations(perms: Sequence[QubitPermutation]) -> QubitPermutation:
    """Single permutation equal to applying ``perms`` in order."""
    out = QubitPermutation.identity(perms[0].n)
    for p in perms:
        out = compose(p, out)
    return out


__all__ = [
    "RelabelMap", "Schedule", "compile_relabeling", "merge_permutations", "perm_layer",
    "run_compiled", "run_schedule", "timesteps",
]
