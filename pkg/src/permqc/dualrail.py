"""Extended dual-rail encoding on four rows of n qubits per logical qubit.

Logical qubit q of a register owns physical qubits ``4n(q-1)+1 .. 4nq``;
row r (1..4) of that block is ``4n(q-1) + (r-1)n + 1 .. 4n(q-1) + rn``.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from itertools import product
from typing import Mapping, Sequence

import numpy as np

from .gates import Fredkin, Layer, u_beta
from .schedule import RelabelMap, Schedule, perm_layer, run_schedule
from .states import (
    QubitPermutation,
    SparseState,
    apply_perm,
    make_excited,
    perm_from_cycles,
    superpose,
    tensor,
)


class EncodingError(ValueError):
    pass


def root(n: int) -> complex:
    return cmath.exp(2j * math.pi / n)


@dataclass(frozen=True)
class LogicalRegister:
    n: int
    count: int = 1

    def __post_init__(self):
        if self.n < 2:
            raise EncodingError("row width n must be at least 2")
        if self.count < 1:
            raise EncodingError("register needs at least one logical qubit")

    @property
    def num_qubits(self) -> int:
        return 4 * self.n * self.count

    def offset(self, q: int) -> int:
        if not 1 <= q <= self.count:
            raise EncodingError(f"logical qubit {q} out of range 1..{self.count}")
        return 4 * self.n * (q - 1)

    def block(self, q: int) -> list[int]:
        off = self.offset(q)
        return list(range(off + 1, off + 4 * self.n + 1))

    def row(self, q: int, r: int) -> list[int]:
        if not 1 <= r <= 4:
            raise EncodingError(f"row {r} out of range 1..4")
        off = self.offset(q) + (r - 1) * self.n
        return list(range(off + 1, off + self.n + 1))


def _check_n(n: int) -> None:
    if n < 2:
        raise EncodingError("row width n must be at least 2")


def _excited_row(n: int) -> SparseState:
    x = root(n)
    return superpose([(x ** (j - 1) / math.sqrt(n), make_excited(n, [j]))
                      for j in range(1, n + 1)])


def psi0(n: int) -> SparseState:
    _check_n(n)
    return tensor(_excited_row(n), make_excited(n))


def psi1(n: int) -> SparseState:
    _check_n(n)
    return tensor(make_excited(n), _excited_row(n))


def logical_basis(n: int) -> tuple[SparseState, SparseState]:
    p0, p1 = psi0(n), psi1(n)
    return tensor(p0, p1), tensor(p1, p0)


def logical_state(register: LogicalRegister, bits: str) -> SparseState:
    """Product of logical basis states, one character of ``bits`` per block."""
    if len(bits) != register.count or set(bits) - {"0", "1"}:
        raise EncodingError(f"need {register.count} logical bits, got {bits!r}")
    zero, one = logical_basis(register.n)
    out = None
    for b in bits:
        part = one if b == "1" else zero
        out = part if out is None else tensor(out, part)
    return out


def _block_cycles(register: LogicalRegister, q: int, local: Sequence[Sequence[int]]):
    off = register.offset(q)
    return [tuple(off + x for x in c) for c in local]


def alpha_perm(n: int, register: LogicalRegister | None = None, q: int = 1) -> QubitPermutation:
    """Logical bit flip: swap rows 1<->2 and rows 3<->4."""
    register = register or LogicalRegister(n)
    local = [(j, n + j) for j in range(1, n + 1)] + [(2 * n + j, 3 * n + j) for j in range(1, n + 1)]
    return perm_from_cycles(register.num_qubits, _block_cycles(register, q, local))


def gamma_perm(n: int, register: LogicalRegister | None = None, q: int = 1) -> QubitPermutation:
    """Cycle the third row leftwards: qubit j of the row goes to j-1, the first to the last."""
    register = register or LogicalRegister(n)
    local = [tuple(2 * n + j for j in range(n, 0, -1))]
    return perm_from_cycles(register.num_qubits, _block_cycles(register, q, local))


def latin_layers(n: int, make) -> list[Layer]:
    """Layer l gathers ``make(i, j)`` for all i, j in 1..n with (i + j) mod n == l."""
    layers = []
    for l in range(n):
        ops = []
        for i in range(1, n + 1):
            j = ((l - i - 1) % n) + 1
            ops.extend(make(i, j))
        layers.append(Layer(tuple(ops)))
    return layers


def c_beta_schedule(n: int, register: LogicalRegister | None = None, q: int = 1) -> Schedule:
    """Swap rows 3 and 4 controlled on row 2 of the same block, in n layers."""
    register = register or LogicalRegister(n)
    off = register.offset(q)
    layers = latin_layers(n, lambda j, t: [Fredkin(off + n + j, off + 2 * n + t, off + 3 * n + t)])
    return Schedule.of(layers, f"C_beta[{q}]")


@dataclass(frozen=True)
class HadamardCalibration:
    """gamma powers wrapped around C_beta U_beta C_beta to produce a Hadamard."""

    n: int
    pre: int
    post: int
    core_matrix: np.ndarray      # logical action of C_beta U_beta C_beta
    logical_matrix: np.ndarray   # logical action with corrections, equals phase * H
    global_phase: complex
    residual: float

    def to_json(self) -> dict:
        def enc(m):
            return [[[complex(v).real, complex(v).imag] for v in row] for row in m]
        return {"n": self.n, "pre": self.pre, "post": self.post,
                "core_matrix": enc(self.core_matrix),
                "logical_matrix": enc(self.logical_matrix),
                "global_phase": [self.global_phase.real, self.global_phase.imag],
                "residual": self.residual}


HADAMARD = np.array([[1, 1], [1, -1]]) / math.sqrt(2)


def _hadamard_core(register: LogicalRegister, q: int) -> Schedule:
    n = register.n
    off = register.offset(q)
    layer, phase = u_beta(n, off)
    u = Schedule.of([Layer(layer.ops + (phase,))], f"U_beta[{q}]")
    c = c_beta_schedule(n, register, q)
    return c + u + c


def logical_matrix(schedule: Schedule, n: int) -> tuple[np.ndarray, float]:
    """2x2 logical action of a single-block schedule plus leakage out of the code."""
    zero, one = logical_basis(n)
    reg = LogicalRegister(n)
    m = np.zeros((2, 2), dtype=complex)
    leak = 0.0
    for b, s in enumerate((zero, one)):
        table = decode(run_schedule(schedule, s), reg)
        m[0, b] = table.amplitudes["0"]
        m[1, b] = table.amplitudes["1"]
        leak = max(leak, table.residual)
    return m, leak


def _mod_phase_match(a: np.ndarray, b: np.ndarray) -> tuple[float, complex]:
    """(overlap |tr(a^dag b)|/2, phase c with b ~ c a)."""
    ov = np.trace(a.conj().T @ b) / 2
    return abs(ov), (ov / abs(ov) if abs(ov) > 0 else 1)


def calibrate_hadamard(n: int) -> HadamardCalibration:
    """Find gamma powers making ``gamma^post C U C gamma^pre`` a logical Hadamard.

    Raises ``EncodingError`` when no pair of powers works (n not a multiple of 4).
    """
    _check_n(n)
    core, leak = logical_matrix(_hadamard_core(LogicalRegister(n), 1), n)
    x = root(n)
    best = None
    for total in range(2 * n - 1):
        for pre in range(max(0, total - n + 1), min(total, n - 1) + 1):
            post = total - pre
            cand = np.diag([1, x ** post]) @ core @ np.diag([1, x ** pre])
            ov, phase = _mod_phase_match(HADAMARD, cand)
            if abs(ov - 1) < 1e-10:
                best = (pre, post, cand, phase)
                break
        if best:
            break
    if best is None:
        raise EncodingError(f"no gamma correction turns the core into a Hadamard at n={n}")
    pre, post, cand, phase = best
    return HadamardCalibration(n, pre, post, core, cand, complex(phase), leak)


def hadamard_schedule(register: LogicalRegister, q: int = 1,
                      calibration: HadamardCalibration | None = None) -> Schedule:
    n = register.n
    cal = calibration or calibrate_hadamard(n)
    g = gamma_perm(n, register, q)
    sched = Schedule()
    if cal.pre:
        sched = sched + Schedule.of([perm_layer(g.power(cal.pre))], f"H[{q}]:gamma^{cal.pre}")
    sched = sched + _hadamard_core(register, q)
    if cal.post:
        sched = sched + Schedule.of([perm_layer(g.power(cal.post))], f"H[{q}]:gamma^{cal.post}")
    return sched


def cnot_schedule(n: int, control: int = 1, target: int = 2,
                  register: LogicalRegister | None = None) -> Schedule:
    """Logical CNOT: 2n^2 Fredkin gates in n layers.

    Row 2 of the control block drives the row 1<->2 swap of the target and
    row 3 drives the row 3<->4 swap.
    """
    if control == target:
        raise EncodingError("control and target must be different logical qubits")
    register = register or LogicalRegister(n, max(control, target))
    oc, ot = register.offset(control), register.offset(target)

    def pair(i, j):
        return [Fredkin(oc + n + i, ot + j, ot + n + j),
                Fredkin(oc + 2 * n + i, ot + 2 * n + j, ot + 3 * n + j)]

    return Schedule.of(latin_layers(n, pair), f"CNOT[{control},{target}]")


def phase_schedule(register: LogicalRegister, q: int, power: int, tag: str) -> Schedule:
    power %= register.n
    if power == 0:
        return Schedule()
    return Schedule.of([perm_layer(gamma_perm(register.n, register, q).power(power))], tag)


@dataclass
class DecodeTable:
    amplitudes: dict[str, complex]
    residual: float

    def to_json(self) -> dict:
        return {"amplitudes": {b: [a.real, a.imag] for b, a in sorted(self.amplitudes.items())},
                "residual": self.residual}


def decode(state: SparseState, register: LogicalRegister,
           relabel: RelabelMap | None = None) -> DecodeTable:
    """Logical amplitudes <b_1...b_m|state> and the norm left outside the code space."""
    if state.n != register.num_qubits:
        raise EncodingError(f"state has {state.n} qubits, register needs {register.num_qubits}")
    if relabel is not None:
        state = apply_perm(relabel.as_permutation(), state)
    m = register.count
    w = state.weight
    if len(state) and w != 2 * m:
        raise EncodingError(f"state weight {w} differs from code weight {2 * m}")
    zero, one = logical_basis(register.n)
    lookup: dict[int, tuple[int, complex]] = {}
    for b, s in enumerate((zero, one)):
        for k, a in s.items():
            lookup[k] = (b, a.conjugate())
    width = 4 * register.n
    mask = (1 << width) - 1
    shifts = [state.n - width * q for q in range(1, m + 1)]
    amps = {"".join(bits): 0j for bits in product("01", repeat=m)}
    members: list[tuple[int, str, complex]] = []   # (key, logical bits, conj overlap)
    outside = 0.0
    for key, amp in state._terms.items():
        bits = []
        coef = 1 + 0j
        for sh in shifts:
            hit = lookup.get((key >> sh) & mask)
            if hit is None:
                break
            bits.append("01"[hit[0]])
            coef *= hit[1]
        else:
            label = "".join(bits)
            amps[label] += coef * amp
            members.append((key, label, coef))
            continue
        outside += abs(amp) ** 2
    # leftover of the projection onto span{|b_L>}, summed term by term
    for key, label, coef in members:
        outside += abs(state._terms[key] - amps[label] * coef.conjugate()) ** 2
    residual = math.sqrt(outside)
    return DecodeTable(amps, residual)


def encode_amplitudes(register: LogicalRegister, amplitudes: Mapping[str, complex]) -> SparseState:
    """Encoded state sum_b amplitudes[b] |b_L>."""
    return superpose([(a, logical_state(register, b)) for b, a in sorted(amplitudes.items())])


__all__ = [
    "DecodeTable", "EncodingError", "HadamardCalibration", "LogicalRegister", "alpha_perm",
    "c_beta_schedule", "calibrate_hadamard", "cnot_schedule", "decode", "encode_amplitudes",
    "gamma_perm", "hadamard_schedule", "logical_basis", "logical_matrix", "logical_state",
    "phase_schedule", "psi0", "psi1",
]
