"""Sparse fixed-excitation states and qubit permutations.

Qubits are labelled 1..n. A computational basis state is stored as a Python
int whose most significant bit (bit ``n - 1``) is qubit 1, so the natural
integer order of keys coincides with the lexicographic order of the bit
strings ``"b1 b2 ... bn"``.
"""
from __future__ import annotations

import cmath
import math
import re
from dataclasses import dataclass, field
from functools import reduce
from itertools import combinations
from typing import Iterable, Iterator, Mapping, Sequence

PRUNE_TOL = 1e-12
NORM_TOL = 1e-10


class StateError(ValueError):
    pass


def qubit_mask(n: int, q: int) -> int:
    if not 1 <= q <= n:
        raise StateError(f"qubit {q} out of range 1..{n}")
    return 1 << (n - q)


def basis_key(n: int, positions: Iterable[int]) -> int:
    positions = list(positions)
    if len(set(positions)) != len(positions):
        raise StateError(f"duplicate positions in {positions}")
    key = 0
    for q in positions:
        key |= qubit_mask(n, q)
    return key


def key_positions(n: int, key: int) -> tuple[int, ...]:
    """Excited qubit labels of ``key`` in increasing order."""
    out = []
    while key:
        low = key & -key
        out.append(n - (low.bit_length() - 1))
        key ^= low
    return tuple(sorted(out))


def key_bits(n: int, key: int) -> str:
    return format(key, f"0{n}b") if n else ""


def bits_key(bits: str) -> int:
    if set(bits) - {"0", "1"}:
        raise StateError(f"not a bit string: {bits!r}")
    return int(bits, 2) if bits else 0


class SparseState:
    """Amplitude map over computational basis states of ``n`` qubits.

    Instances are treated as immutable. Amplitudes with modulus below
    ``PRUNE_TOL`` are dropped on construction.
    """

    __slots__ = ("n", "_terms", "fixed_weight")

    def __init__(self, n: int, terms: Mapping[int, complex] | None = None,
                 fixed_weight: bool = False, *, _trusted: bool = False):
        if n < 1:
            raise StateError("number of qubits must be positive")
        self.n = n
        if _trusted:
            self._terms = terms
        else:
            limit = 1 << n
            clean = {}
            for key, amp in (terms or {}).items():
                amp = complex(amp)
                if not (math.isfinite(amp.real) and math.isfinite(amp.imag)):
                    raise StateError("non-finite amplitude")
                if not 0 <= key < limit:
                    raise StateError(f"basis key {key} does not fit {n} qubits")
                if abs(amp) >= PRUNE_TOL:
                    clean[key] = amp
            self._terms = clean
        self.fixed_weight = fixed_weight
        if fixed_weight and not _trusted and len({k.bit_count() for k in self._terms}) > 1:
            raise StateError("fixed-weight state has terms of different weight")

    @classmethod
    def _from_raw(cls, n: int, raw: dict[int, complex], fixed_weight: bool = False) -> "SparseState":
        return cls(n, {k: a for k, a in raw.items() if abs(a) >= PRUNE_TOL},
                   fixed_weight, _trusted=True)

    # mapping-ish access
    def __len__(self) -> int:
        return len(self._terms)

    def __iter__(self) -> Iterator[int]:
        return iter(sorted(self._terms))

    def items(self) -> list[tuple[int, complex]]:
        return sorted(self._terms.items())

    def amplitude(self, key: int) -> complex:
        return self._terms.get(key, 0j)

    def __getitem__(self, bits: str) -> complex:
        return self.amplitude(bits_key(bits))

    @property
    def weight(self) -> int | None:
        weights = {k.bit_count() for k in self._terms}
        return weights.pop() if len(weights) == 1 else None

    def norm(self) -> float:
        return math.sqrt(sum(abs(a) ** 2 for a in self._terms.values()))

    def is_normalized(self, tol: float = NORM_TOL) -> bool:
        return abs(self.norm() - 1.0) <= tol

    def normalized(self) -> "SparseState":
        nrm = self.norm()
        if nrm == 0:
            raise StateError("cannot normalize the zero state")
        return self.scale(1 / nrm)

    def scale(self, c: complex) -> "SparseState":
        return SparseState._from_raw(self.n, {k: c * a for k, a in self._terms.items()},
                                     self.fixed_weight)

    def __add__(self, other: "SparseState") -> "SparseState":
        return superpose([(1, self), (1, other)])

    def __sub__(self, other: "SparseState") -> "SparseState":
        return superpose([(1, self), (-1, other)])

    def __rmul__(self, c: complex) -> "SparseState":
        return self.scale(c)

    def __repr__(self) -> str:
        shown = ", ".join(f"{key_bits(self.n, k)}: {a:.4g}" for k, a in self.items()[:6])
        more = "" if len(self) <= 6 else f", ... ({len(self)} terms)"
        return f"SparseState(n={self.n}, {{{shown}{more}}})"

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "weight": self.weight,
            "terms": [{"bits": key_bits(self.n, k), "re": a.real, "im": a.imag}
                      for k, a in self.items()],
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "SparseState":
        n = int(data["n"])
        terms = {}
        for t in data["terms"]:
            if len(t["bits"]) != n:
                raise StateError(f"bit string {t['bits']!r} has wrong length")
            terms[bits_key(t["bits"])] = complex(t["re"], t["im"])
        return cls(n, terms, fixed_weight=data.get("weight") is not None)

    def dense(self, keys: Sequence[int]):
        """Coordinates of this state in the ordered basis ``keys``."""
        import numpy as np
        return np.array([self._terms.get(k, 0j) for k in keys], dtype=complex)


def make_excited(n: int, positions: Iterable[int] = ()) -> SparseState:
    return SparseState(n, {basis_key(n, positions): 1.0}, fixed_weight=True)


def superpose(pairs: Iterable[tuple[complex, SparseState]]) -> SparseState:
    pairs = list(pairs)
    if not pairs:
        raise StateError("empty superposition")
    n = pairs[0][1].n
    acc: dict[int, complex] = {}
    for c, s in pairs:
        if s.n != n:
            raise StateError(f"mismatched qubit counts {n} and {s.n}")
        for k, a in s._terms.items():
            acc[k] = acc.get(k, 0j) + c * a
    out = SparseState._from_raw(n, acc)
    if all(s.fixed_weight for _, s in pairs) and out.weight is not None:
        out.fixed_weight = True
    return out


def inner_product(a: SparseState, b: SparseState) -> complex:
    if a.n != b.n:
        raise StateError(f"mismatched qubit counts {a.n} and {b.n}")
    if len(a) > len(b):
        return complex(sum(a._terms[k].conjugate() * v
                           for k, v in b._terms.items() if k in a._terms))
    return complex(sum(v.conjugate() * b._terms[k] for k, v in a._terms.items() if k in b._terms))


def tensor(a: SparseState, b: SparseState) -> SparseState:
    shift = b.n
    terms = {(ka << shift) | kb: va * vb
             for ka, va in a._terms.items() for kb, vb in b._terms.items()}
    return SparseState._from_raw(a.n + b.n, terms, a.fixed_weight and b.fixed_weight)


def norm(a: SparseState) -> float:
    return a.norm()


def fidelity_mod_phase(a: SparseState, b: SparseState, tol: float = NORM_TOL) -> float:
    """``|<a|b>|`` for normalized states."""
    for s in (a, b):
        if not s.is_normalized(tol):
            raise StateError(f"state not normalized (norm {s.norm()!r})")
    return min(1.0, abs(inner_product(a, b)))


def random_state(n: int, keys: Sequence[int], rng) -> SparseState:
    """Normalized state with complex Gaussian amplitudes on ``keys``."""
    re = rng.standard_normal(len(keys))
    im = rng.standard_normal(len(keys))
    return SparseState(n, {k: complex(x, y) for k, x, y in zip(keys, re, im)}).normalized()


def weight_keys(n: int, k: int) -> list[int]:
    """All weight-``k`` basis keys of ``n`` qubits in lexicographic order."""
    if not 0 <= k <= n:
        raise StateError(f"weight {k} out of range 0..{n}")
    return sorted(basis_key(n, c) for c in combinations(range(1, n + 1), k))


@dataclass(frozen=True)
class QubitPermutation:
    """Bijection on qubit labels; ``image[j - 1]`` is where qubit j goes."""

    n: int
    image: tuple[int, ...]
    cycles: tuple[tuple[int, ...], ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        image = tuple(int(x) for x in self.image)
        if len(image) != self.n or sorted(image) != list(range(1, self.n + 1)):
            raise StateError(f"image {image} is not a permutation of 1..{self.n}")
        object.__setattr__(self, "image", image)
        object.__setattr__(self, "cycles", _cycles_of(image))

    @classmethod
    def identity(cls, n: int) -> "QubitPermutation":
        return cls(n, tuple(range(1, n + 1)))

    def __call__(self, q: int) -> int:
        return self.image[q - 1]

    def __mul__(self, other: "QubitPermutation") -> "QubitPermutation":
        return compose(self, other)

    def inverse(self) -> "QubitPermutation":
        inv = [0] * self.n
        for j, t in enumerate(self.image, start=1):
            inv[t - 1] = j
        return QubitPermutation(self.n, tuple(inv))

    def order(self) -> int:
        return reduce(math.lcm, (len(c) for c in self.cycles), 1)

    def is_identity(self) -> bool:
        return all(t == j for j, t in enumerate(self.image, start=1))

    def is_involution(self) -> bool:
        return all(len(c) <= 2 for c in self.cycles)

    def power(self, k: int) -> "QubitPermutation":
        base = self if k >= 0 else self.inverse()
        out = QubitPermutation.identity(self.n)
        for _ in range(abs(k) % self.order()):
            out = compose(base, out)
        return out

    def nontrivial_cycles(self) -> tuple[tuple[int, ...], ...]:
        return tuple(c for c in self.cycles if len(c) > 1)

    def restricted(self, labels: Sequence[int]) -> tuple[tuple[int, ...], ...]:
        """Nontrivial cycles that live inside ``labels``."""
        s = set(labels)
        return tuple(c for c in self.nontrivial_cycles() if set(c) <= s)

    def key_map(self) -> list[int]:
        """Bit-level table: entry b is the mask receiving the content of bit b."""
        n = self.n
        return [1 << (n - self.image[n - b - 1]) for b in range(n)]

    def __str__(self) -> str:
        cyc = self.nontrivial_cycles()
        return "".join("(" + ",".join(map(str, c)) + ")" for c in cyc) or "()"


def _cycles_of(image: Sequence[int]) -> tuple[tuple[int, ...], ...]:
    seen = set()
    out = []
    for start in range(1, len(image) + 1):
        if start in seen:
            continue
        cyc = [start]
        seen.add(start)
        j = image[start - 1]
        while j != start:
            cyc.append(j)
            seen.add(j)
            j = image[j - 1]
        out.append(tuple(cyc))
    return tuple(out)


def perm_from_cycles(n: int, cycles: Iterable[Sequence[int]]) -> QubitPermutation:
    """Build a permutation from disjoint cycles ``(a1, a2, ...)`` meaning a1 -> a2 -> ..."""
    image = list(range(1, n + 1))
    used: set[int] = set()
    for cyc in cycles:
        for q in cyc:
            if not 1 <= q <= n:
                raise StateError(f"label {q} out of range 1..{n}")
            if q in used:
                raise StateError(f"label {q} appears in more than one cycle")
            used.add(q)
        for a, b in zip(cyc, list(cyc[1:]) + list(cyc[:1])):
            image[a - 1] = b
    return QubitPermutation(n, tuple(image))


def parse_cycles(n: int, text: str) -> QubitPermutation:
    """Inverse of ``str(perm)``: ``"(1,2,3)(4,5)"``; ``"()"`` or ``""`` is the identity."""
    body = text.replace(" ", "")
    if not re.fullmatch(r"(\((\d+(,\d+)*)?\))*", body):
        raise StateError(f"cannot parse cycle notation {text!r}")
    cycles = [tuple(int(x) for x in grp.split(",")) for grp in re.findall(r"\(([\d,]+)\)", body)]
    return perm_from_cycles(n, cycles)


def compose(p: QubitPermutation, q: QubitPermutation) -> QubitPermutation:
    """The permutation applying ``q`` first, then ``p``."""
    if p.n != q.n:
        raise StateError("permutations act on different qubit counts")
    return QubitPermutation(p.n, tuple(p.image[t - 1] for t in q.image))


def inverse(p: QubitPermutation) -> QubitPermutation:
    return p.inverse()


def order(p: QubitPermutation) -> int:
    return p.order()


def permute_key(table: Sequence[int], key: int) -> int:
    out = 0
    while key:
        low = key & -key
        out |= table[low.bit_length() - 1]
        key ^= low
    return out


def apply_perm(perm: QubitPermutation, state: SparseState) -> SparseState:
    """Move the content of every qubit j to qubit ``perm(j)``."""
    if perm.n != state.n:
        raise StateError(f"permutation on {perm.n} qubits applied to {state.n}-qubit state")
    if perm.is_identity():
        return state
    table = perm.key_map()
    moved = 0
    for c in perm.nontrivial_cycles():
        for q in c:
            moved |= 1 << (state.n - q)
    keep = ~moved
    cache: dict[int, int] = {}
    terms = {}
    for k, a in state._terms.items():
        local = k & moved
        image = cache.get(local)
        if image is None:
            image = cache[local] = permute_key(table, local)
        terms[(k & keep) | image] = a
    return SparseState(state.n, terms, state.fixed_weight, _trusted=True)


@dataclass(frozen=True)
class InducedAction:
    """Action of a qubit permutation on the weight-k basis strings."""

    perm: QubitPermutation
    k: int
    keys: tuple[int, ...]
    image: tuple[int, ...]                  # index i -> index of permuted string
    orbits: tuple[tuple[int, ...], ...]     # each orbit listed as key indices along the cycle

    @property
    def cycle_lengths(self) -> list[int]:
        return sorted(len(o) for o in self.orbits)

    def matrix(self):
        """Dense permutation matrix M with M[image[i], i] = 1."""
        import numpy as np
        d = len(self.keys)
        m = np.zeros((d, d))
        m[list(self.image), list(range(d))] = 1.0
        return m


def induced_weight_action(perm: QubitPermutation, k: int) -> InducedAction:
    keys = weight_keys(perm.n, k)
    index = {key: i for i, key in enumerate(keys)}
    table = perm.key_map()
    image = tuple(index[permute_key(table, key)] for key in keys)
    orbits = []
    seen = [False] * len(keys)
    for start in range(len(keys)):
        if seen[start]:
            continue
        orbit = [start]
        seen[start] = True
        j = image[start]
        while j != start:
            orbit.append(j)
            seen[j] = True
            j = image[j]
        orbits.append(tuple(orbit))
    return InducedAction(perm, k, tuple(keys), image, tuple(orbits))


def root_matches(lam: complex, c: int, tol: float = 1e-9) -> bool:
    return abs(lam ** c - 1) <= tol


def eigenspace_basis(perm: QubitPermutation, k: int, lam: complex,
                     action: InducedAction | None = None) -> list[SparseState]:
    """Orthonormal basis of the ``lam``-eigenspace on weight-k strings.

    One Fourier vector per induced cycle whose length c has ``lam**c == 1``.
    """
    action = action or induced_weight_action(perm, k)
    n = perm.n
    out = []
    for orbit in action.orbits:
        c = len(orbit)
        if not root_matches(lam, c):
            continue
        amp = 1 / math.sqrt(c)
        terms = {action.keys[i]: amp * lam ** (-t) for t, i in enumerate(orbit)}
        out.append(SparseState(n, terms, fixed_weight=True))
    return out


def roots_of_unity(c: int) -> list[complex]:
    return [cmath.exp(2j * math.pi * t / c) for t in range(c)]
