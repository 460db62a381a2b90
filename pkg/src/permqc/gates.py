"""Resonant-coupling gates: exchange exponentials, Fredkin gates and layers."""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Iterable, Sequence, Union

import numpy as np

from .states import (
    QubitPermutation,
    SparseState,
    apply_perm,
    perm_from_cycles,
    permute_key,
    qubit_mask,
    random_state,
    weight_keys,
)


class GateError(ValueError):
    pass


@dataclass(frozen=True)
class PermGate:
    perm: QubitPermutation

    @property
    def support(self) -> tuple[int, ...]:
        return tuple(q for c in self.perm.nontrivial_cycles() for q in c)

    def to_json(self) -> dict:
        return {"kind": "perm", "n": self.perm.n,
                "cycles": [list(c) for c in self.perm.nontrivial_cycles()]}


@dataclass(frozen=True)
class Exchange:
    i: int
    j: int
    theta: float

    def __post_init__(self):
        if self.i == self.j:
            raise GateError(f"exchange needs two distinct qubits, got {self.i} twice")
        if not math.isfinite(self.theta):
            raise GateError("exchange angle must be finite")

    @property
    def support(self) -> tuple[int, ...]:
        return (self.i, self.j)

    def to_json(self) -> dict:
        return {"kind": "exchange", "i": self.i, "j": self.j, "theta": self.theta}


@dataclass(frozen=True)
class Fredkin:
    control: int
    a: int
    b: int

    def __post_init__(self):
        if len({self.control, self.a, self.b}) != 3:
            raise GateError(f"Fredkin qubits must be distinct: {self.control}, {self.a}, {self.b}")

    @property
    def support(self) -> tuple[int, ...]:
        return (self.control, self.a, self.b)

    def to_json(self) -> dict:
        return {"kind": "fredkin", "control": self.control, "a": self.a, "b": self.b}


@dataclass(frozen=True)
class GlobalPhase:
    phi: float

    def __post_init__(self):
        if not math.isfinite(self.phi):
            raise GateError("phase must be finite")

    support = ()

    def to_json(self) -> dict:
        return {"kind": "phase", "phi": self.phi}


GateOp = Union[PermGate, Exchange, Fredkin, GlobalPhase]


def gate_from_json(data: dict) -> GateOp:
    kind = data.get("kind")
    if kind == "perm":
        return PermGate(perm_from_cycles(int(data["n"]), data["cycles"]))
    if kind == "exchange":
        return Exchange(int(data["i"]), int(data["j"]), float(data["theta"]))
    if kind == "fredkin":
        return Fredkin(int(data["control"]), int(data["a"]), int(data["b"]))
    if kind == "phase":
        return GlobalPhase(float(data["phi"]))
    raise GateError(f"unknown gate kind {kind!r}")


@dataclass(frozen=True)
class Layer:
    """Gates executed in one timestep.

    Resonant gates in a layer must act on pairwise disjoint qubits.
    Permutation gates do not commute with anything, so a layer holding a
    permutation may hold nothing else but global phases.
    """

    ops: tuple[GateOp, ...] = ()

    def __post_init__(self):
        ops = tuple(self.ops)
        object.__setattr__(self, "ops", ops)
        perms = [op for op in ops if isinstance(op, PermGate)]
        if perms and len(perms) + sum(isinstance(op, GlobalPhase) for op in ops) != len(ops):
            raise GateError("a permutation layer cannot hold resonant gates")
        if len(perms) > 1:
            raise GateError("at most one permutation per layer")
        used: set[int] = set()
        for op in ops:
            if isinstance(op, (Exchange, Fredkin)):
                clash = used.intersection(op.support)
                if clash:
                    raise GateError(f"layer ops overlap on qubits {sorted(clash)}")
                used.update(op.support)

    @property
    def is_permutational(self) -> bool:
        return all(isinstance(op, (PermGate, GlobalPhase)) for op in self.ops)

    @property
    def costs_timestep(self) -> bool:
        # permutations are relabelings and global phases are unobservable
        return any(isinstance(op, (Exchange, Fredkin)) for op in self.ops)

    def to_json(self) -> list[dict]:
        return [op.to_json() for op in self.ops]

    @classmethod
    def from_json(cls, data: Sequence[dict]) -> "Layer":
        return cls(tuple(gate_from_json(d) for d in data))


def _check_qubits(n: int, *qs: int) -> None:
    for q in qs:
        if not 1 <= q <= n:
            raise GateError(f"qubit {q} out of range 1..{n}")


def apply_exchange(state: SparseState, i: int, j: int, theta: float) -> SparseState:
    """``(cos(theta) I + i sin(theta) swap_ij)`` applied to ``state``."""
    if i == j:
        raise GateError(f"exchange needs two distinct qubits, got {i} twice")
    _check_qubits(state.n, i, j)
    mi, mj = qubit_mask(state.n, i), qubit_mask(state.n, j)
    both = mi | mj
    c, s = math.cos(theta), 1j * math.sin(theta)
    same = c + s
    out: dict[int, complex] = {}
    for key, amp in state._terms.items():
        hit = key & both
        if hit == 0 or hit == both:
            out[key] = out.get(key, 0j) + same * amp
        else:
            out[key] = out.get(key, 0j) + c * amp
            sw = key ^ both
            out[sw] = out.get(sw, 0j) + s * amp
    return SparseState._from_raw(state.n, out, state.fixed_weight)


def apply_involution_exponential(state: SparseState, perm: QubitPermutation,
                                 theta: float) -> SparseState:
    """``exp(i theta perm) = cos(theta) I + i sin(theta) perm`` for an involution."""
    if not perm.is_involution():
        raise GateError(f"{perm} is not an involution")
    moved = apply_perm(perm, state)
    c, s = math.cos(theta), 1j * math.sin(theta)
    out = {k: c * a for k, a in state._terms.items()}
    for k, a in moved._terms.items():
        out[k] = out.get(k, 0j) + s * a
    return SparseState._from_raw(state.n, out, state.fixed_weight)


def apply_fredkin(state: SparseState, c: int, a: int, b: int) -> SparseState:
    if len({c, a, b}) != 3:
        raise GateError(f"Fredkin qubits must be distinct: {c}, {a}, {b}")
    _check_qubits(state.n, c, a, b)
    return _apply_fredkins(state, [(c, a, b)])


def _apply_fredkins(state: SparseState, triples: Iterable[tuple[int, int, int]]) -> SparseState:
    return apply_basis_layers(state, [Layer(tuple(Fredkin(*t) for t in triples))])


def is_basis_permuting(layer: Layer) -> bool:
    return all(isinstance(op, (Fredkin, PermGate, GlobalPhase)) for op in layer.ops)


def layer_support(layer: Layer, n: int) -> int:
    mask = 0
    for op in layer.ops:
        for q in op.support:
            mask |= qubit_mask(n, q)
    return mask


def _layer_key_map(layer: Layer, n: int):
    """(support mask, key -> key) for a layer of Fredkin/permutation gates."""
    support = 0
    steps = []
    fredkins = {}
    for op in layer.ops:
        if isinstance(op, Fredkin):
            _check_qubits(n, *op.support)
            mc, ma, mb = (qubit_mask(n, q) for q in op.support)
            fredkins[mc] = (ma, mb)
            support |= mc | ma | mb
        elif isinstance(op, PermGate):
            if op.perm.n != n:
                raise GateError(f"permutation on {op.perm.n} qubits applied to {n}-qubit state")
            table = op.perm.key_map()
            moved = 0
            for q in op.support:
                moved |= 1 << (n - q)
            steps.append((moved, table))
            support |= moved
    ctrl = 0
    for mc in fredkins:
        ctrl |= mc

    def run(key: int) -> int:
        # Fredkins in one layer are disjoint, so each reads the same input key
        hits = key & ctrl
        delta = 0
        while hits:
            low = hits & -hits
            ma, mb = fredkins[low]
            if bool(key & ma) != bool(key & mb):
                delta |= ma | mb
            hits ^= low
        key ^= delta
        for moved, table in steps:
            key = (key & ~moved) | permute_key(table, key & moved)
        return key

    return support, run


def apply_basis_layers(state: SparseState, layers: Sequence[Layer]) -> SparseState:
    """Apply consecutive layers that only permute basis states, in one pass.

    The result for each term depends only on its bits under the combined
    support, so the map is cached on those bits.
    """
    n = state.n
    maps = [_layer_key_map(layer, n) for layer in layers]
    phase = 0.0
    for layer in layers:
        if not is_basis_permuting(layer):
            raise GateError("layer contains gates that do not permute basis states")
        phase += sum(op.phi for op in layer.ops if isinstance(op, GlobalPhase))
    support = 0
    for sup, _ in maps:
        support |= sup
    keep = ~support
    cache: dict[int, int] = {}
    out: dict[int, complex] = {}
    for key, amp in state._terms.items():
        local = key & support
        image = cache.get(local)
        if image is None:
            image = local
            for _, run in maps:
                image = run(image)
            cache[local] = image
        out[(key & keep) | image] = amp
    result = SparseState(n, out, state.fixed_weight, _trusted=True)
    return result.scale(cmath.exp(1j * phase)) if phase else result


def apply_op(state: SparseState, op: GateOp) -> SparseState:
    if isinstance(op, PermGate):
        return apply_perm(op.perm, state)
    if isinstance(op, Exchange):
        return apply_exchange(state, op.i, op.j, op.theta)
    if isinstance(op, Fredkin):
        return apply_fredkin(state, op.control, op.a, op.b)
    if isinstance(op, GlobalPhase):
        return state.scale(cmath.exp(1j * op.phi))
    raise GateError(f"unknown gate {op!r}")


def apply_layer(state: SparseState, layer: Layer) -> SparseState:
    if is_basis_permuting(layer):
        return apply_basis_layers(state, [layer])
    for op in layer.ops:
        state = apply_op(state, op)
    return state


def pairing_perm(n_qubits: int, pairs: Iterable[tuple[int, int]]) -> QubitPermutation:
    return perm_from_cycles(n_qubits, [tuple(p) for p in pairs])


@dataclass
class Theorem1Report:
    n: int
    trials: int
    max_deviation: float
    prefactors: list[complex]

    @property
    def passed(self) -> bool:
        return self.max_deviation < 1e-12

    def to_json(self) -> dict:
        return {"n": self.n, "trials": self.trials, "max_deviation": self.max_deviation,
                "passed": self.passed}


def verify_theorem1(n: int, theta: float | None = None, trials: int = 100,
                    rng: np.random.Generator | None = None) -> Theorem1Report:
    """Compare sequential pair exchanges with the single involution exponential.

    Random states come from the single-excitation span of 2n qubits. With
    ``theta=None`` every trial draws its own angle uniformly from [0, 2pi).
    """
    if n < 1:
        raise GateError("n must be at least 1")
    rng = rng if rng is not None else np.random.default_rng(0)
    m = 2 * n
    pairs = [(2 * k - 1, 2 * k) for k in range(1, n + 1)]
    beta = pairing_perm(m, pairs)
    keys = weight_keys(m, 1)
    worst = 0.0
    prefactors = []
    for _ in range(trials):
        th = float(rng.uniform(0, 2 * math.pi)) if theta is None else theta
        psi = random_state(m, keys, rng)
        lhs = psi
        for i, j in pairs:
            lhs = apply_exchange(lhs, i, j, th)
        pref = cmath.exp(1j * (n - 1) * th)
        rhs = apply_involution_exponential(psi, beta, th).scale(pref)
        prefactors.append(pref)
        dev = max((abs(lhs.amplitude(k) - rhs.amplitude(k)) for k in keys), default=0.0)
        worst = max(worst, dev)
    return Theorem1Report(n, trials, worst, prefactors)


def row_swap_matrix(size: int, pairs: Iterable[tuple[int, int]]) -> np.ndarray:
    """Permutation matrix swapping rows i and j (1-based) for each pair."""
    m = np.eye(size)
    for i, j in pairs:
        m[[i - 1, j - 1]] = m[[j - 1, i - 1]]
    return m


@dataclass
class LemmaReport:
    n: int
    max_entry_deviation: float
    commutes: bool

    @property
    def passed(self) -> bool:
        return self.max_entry_deviation == 0.0 and self.commutes

    def to_json(self) -> dict:
        return {"n": self.n, "max_entry_deviation": self.max_entry_deviation,
                "commutes": self.commutes, "passed": self.passed}


def verify_lemma_identity(n: int, pairs: Sequence[tuple[int, int]] | None = None) -> LemmaReport:
    """Check ``P_a + P_last == P_a P_last + I`` for the pair products.

    ``pairs`` defaults to (1,2), (3,4), ..., (2n-1, 2n); the last pair plays
    the role of the appended swap. Other pairings serve as negative controls.
    """
    if n < 2:
        raise GateError("n must be at least 2")
    pairs = list(pairs) if pairs is not None else [(2 * k - 1, 2 * k) for k in range(1, n + 1)]
    size = max(max(p) for p in pairs)
    size = max(size, 2 * n)
    head = np.eye(size)
    for p in pairs[:-1]:
        head = head @ row_swap_matrix(size, [p])
    last = row_swap_matrix(size, [pairs[-1]])
    lhs = head + last
    rhs = head @ last + np.eye(size)
    return LemmaReport(n, float(np.max(np.abs(lhs - rhs))),
                       bool(np.array_equal(head @ last, last @ head)))


def u_beta(n: int, offset: int = 0) -> tuple[Layer, GlobalPhase]:
    """Parallel exchanges realizing ``exp(i pi/4 beta)`` on rows 1-2 of a block.

    ``offset`` shifts all qubit labels, to address a block inside a larger
    register. The returned phase cancels the ``exp(i (n-1) pi/4)`` prefactor
    produced by running the n exchanges side by side.
    """
    if n < 1:
        raise GateError("n must be at least 1")
    ops = tuple(Exchange(offset + j, offset + n + j, math.pi / 4) for j in range(1, n + 1))
    return Layer(ops), GlobalPhase(-(n - 1) * math.pi / 4)


__all__ = [
    "Exchange", "Fredkin", "GateError", "GateOp", "GlobalPhase", "Layer", "PermGate",
    "apply_exchange", "apply_fredkin", "apply_involution_exponential", "apply_layer",
    "apply_op", "gate_from_json", "u_beta", "verify_lemma_identity", "verify_theorem1",
]
