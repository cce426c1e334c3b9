"""Sparse state vectors over named registers.

Honest protocol states carry at most two amplitudes per hashed-qubit block no
matter how long the witness register is, so a dict from packed basis ints to
complex amplitudes is the primary representation. Hadamard measurement of a
wide register is done analytically: the outcome distribution only depends on
the parities of ``s`` against the differences of the register values present
in the support.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from .. import config
from ..config import TOL, parity
from ..errors import (
    CapacityError,
    ContractViolation,
    NormalizationError,
    StructuralError,
)
from .layout import RegisterLayout

SQRT1_2 = 1.0 / math.sqrt(2.0)

# Above this many independent parity constraints the outcome table explodes.
_MAX_HADAMARD_RANK = 20


class Basis(str, enum.Enum):
    COMPUTATIONAL = "computational"
    HADAMARD = "hadamard"


@dataclass(frozen=True)
class MeasurementRecord:
    outcome: int
    width: int
    probability: float
    basis: Basis

    @property
    def bitstring(self) -> str:
        return format(self.outcome, f"0{self.width}b") if self.width else ""


class SparseState:
    """Immutable pure state: ``layout`` plus a map basis-int -> amplitude."""

    __slots__ = ("layout", "_amps")

    def __init__(self, layout: RegisterLayout, amplitudes: Mapping[int, complex],
                 *, check: bool | None = None):
        self.layout = layout
        limit = 1 << layout.total_width
        amps: dict[int, complex] = {}
        for basis, amp in amplitudes.items():
            basis = int(basis)
            if basis < 0 or basis >= limit:
                raise StructuralError(f"basis element {basis} outside layout width")
            amp = complex(amp)
            if abs(amp) >= TOL.prune:
                amps[basis] = amp
        self._amps = amps
        if config.DEBUG_CHECKS if check is None else check:
            n = self.norm_squared()
            if abs(n - 1.0) > TOL.norm:
                raise NormalizationError(f"state norm^2 = {n!r}")

    # -- construction -----------------------------------------------------

    @classmethod
    def basis_state(cls, layout: RegisterLayout, values: Mapping[str, int] | None = None):
        return cls(layout, {layout.pack(dict(values or {})): 1.0})

    @classmethod
    def from_register_amplitudes(cls, layout: RegisterLayout,
                                 terms: Iterable[tuple[Mapping[str, int], complex]],
                                 normalize: bool = True) -> "SparseState":
        amps: dict[int, complex] = {}
        for values, amp in terms:
            key = layout.pack(dict(values))
            amps[key] = amps.get(key, 0.0) + complex(amp)
        if normalize:
            nrm = math.sqrt(sum(abs(a) ** 2 for a in amps.values()))
            if nrm == 0:
                raise StructuralError("cannot normalise the zero vector")
            amps = {k: a / nrm for k, a in amps.items()}
        return cls(layout, amps)

    # -- inspection -------------------------------------------------------

    @property
    def amplitudes(self) -> dict[int, complex]:
        return dict(self._amps)

    def items(self):
        return self._amps.items()

    def __len__(self) -> int:
        return len(self._amps)

    def norm_squared(self) -> float:
        return float(sum(abs(a) ** 2 for a in self._amps.values()))

    def amplitude(self, values: Mapping[str, int]) -> complex:
        return self._amps.get(self.layout.pack(dict(values)), 0.0)

    def register_values(self, name: str) -> list[int]:
        return sorted({self.layout.get(b, name) for b in self._amps})

    def bitstring(self, basis: int) -> str:
        return format(basis, f"0{self.layout.total_width}b")

    def __repr__(self) -> str:
        terms = ", ".join(f"{self.bitstring(b)}: {a:.4g}" for b, a in sorted(self._amps.items()))
        return f"SparseState({self.layout.names}, {{{terms}}})"

    # -- serialization ----------------------------------------------------

    def to_json(self) -> str:
        entries = []
        for basis in sorted(self._amps):
            amp = self._amps[basis]
            entries.append(
                f'["{self.bitstring(basis)}", {_fmt17(amp.real)}, {_fmt17(amp.imag)}]'
            )
        layout = json.dumps(self.layout.to_json(), separators=(",", ":"))
        return '{"layout":' + layout + ',"amps":[' + ",".join(entries) + "]}"

    @classmethod
    def from_json(cls, text: str | bytes) -> "SparseState":
        obj = json.loads(text)
        try:
            layout = RegisterLayout(tuple((n, w) for n, w in obj["layout"]))
            width = layout.total_width
            amps = {}
            for bits, re, im in obj["amps"]:
                if len(bits) != width or set(bits) - {"0", "1"}:
                    raise StructuralError(f"bad basis string {bits!r}")
                amps[int(bits, 2) if width else 0] = complex(float(re), float(im))
        except (KeyError, TypeError, ValueError) as exc:
            raise StructuralError(f"malformed state JSON: {exc}") from exc
        return cls(layout, amps)


def _fmt17(x: float) -> str:
    text = format(float(x), ".17g")
    if "inf" in text or "nan" in text:
        raise StructuralError("non-finite amplitude")
    return text


# -- structural helpers ---------------------------------------------------


def tensor(a: SparseState, b: SparseState) -> SparseState:
    """``a (x) b`` with ``a``'s registers first."""
    overlap = set(a.layout.names) & set(b.layout.names)
    if overlap:
        raise StructuralError(f"registers {sorted(overlap)} present in both states")
    layout = RegisterLayout(a.layout.registers + b.layout.registers)
    shift = b.layout.total_width
    amps = {}
    for x, ax in a.items():
        for y, by in b.items():
            amps[(x << shift) | y] = ax * by
    return SparseState(layout, amps)


def add_register(state: SparseState, name: str, width: int, value: int = 0) -> SparseState:
    """Append a fresh register prepared in the computational basis state ``value``."""
    if name in state.layout:
        raise StructuralError(f"register {name!r} already exists")
    if value < 0 or value >> width:
        raise StructuralError(f"value {value} does not fit {width} qubits")
    layout = state.layout.with_register(name, width)
    return SparseState(layout, {(b << width) | value: a for b, a in state.items()})


def remove_register(state: SparseState, name: str) -> tuple[int, SparseState]:
    """Drop a register that is in a definite computational basis state.

    Returns the register's value and the remaining state. Raises
    :class:`ContractViolation` when the register is still in superposition or
    entangled, since dropping it would not be a pure operation.
    """
    values = state.register_values(name)
    if len(values) != 1:
        raise ContractViolation(
            f"register {name!r} holds {len(values)} distinct values; measure it first"
        )
    new_layout = state.layout.without([name])
    sh = state.layout.low_shift(name)
    width = state.layout.width(name)
    low = (1 << sh) - 1
    amps = {((b >> (sh + width)) << sh) | (b & low): a for b, a in state.items()}
    return values[0], SparseState(new_layout, amps)


def rename(state: SparseState, mapping: Mapping[str, str]) -> SparseState:
    return SparseState(state.layout.renamed(dict(mapping)), state.amplitudes, check=False)


def reorder(state: SparseState, names: Sequence[str]) -> SparseState:
    """Permute registers into the given order (all names must be listed)."""
    if sorted(names) != sorted(state.layout.names):
        raise StructuralError("reorder needs every register exactly once")
    layout = RegisterLayout(tuple((n, state.layout.width(n)) for n in names))
    amps = {}
    for b, a in state.items():
        vals = state.layout.unpack(b)
        amps[layout.pack(vals)] = a
    return SparseState(layout, amps, check=False)


def _drop_bits(layout: RegisterLayout, qubits: Sequence[tuple[str, int]]):
    """Layout after removing single qubits, plus the old shifts to strip."""
    shifts = sorted({layout.bit_shift(r, i) for r, i in qubits}, reverse=True)
    if len(shifts) != len(qubits):
        raise StructuralError("the same qubit was named twice")
    regs = []
    for name, width in layout.registers:
        removed = sum(1 for r, _ in qubits if r == name)
        if width - removed > 0:
            regs.append((name, width - removed))
    return RegisterLayout(tuple(regs)), shifts


def _strip(basis: int, shifts: Sequence[int]) -> int:
    for sh in shifts:  # descending, so lower shifts stay valid
        basis = ((basis >> (sh + 1)) << sh) | (basis & ((1 << sh) - 1))
    return basis


def equal_up_to_phase(a: SparseState, b: SparseState, tol: float = 1e-9) -> bool:
    if a.layout != b.layout:
        return False
    overlap = sum(np.conj(amp) * b.amplitudes.get(k, 0.0) for k, amp in a.items())
    return abs(1.0 - abs(overlap)) <= tol and abs(a.norm_squared() - b.norm_squared()) <= tol


# -- gates ----------------------------------------------------------------


def apply_z(state: SparseState, register: str, bit_index: int, exponent: int = 1) -> SparseState:
    sh = state.layout.bit_shift(register, bit_index)
    if not exponent & 1:
        return state
    return SparseState(state.layout, {b: (-a if (b >> sh) & 1 else a) for b, a in state.items()})


def apply_x(state: SparseState, register: str, bit_index: int, exponent: int = 1) -> SparseState:
    sh = state.layout.bit_shift(register, bit_index)
    if not exponent & 1:
        return state
    return SparseState(state.layout, {b ^ (1 << sh): a for b, a in state.items()})


def apply_h(state: SparseState, register: str, bit_index: int) -> SparseState:
    sh = state.layout.bit_shift(register, bit_index)
    amps: dict[int, complex] = {}
    for b, a in state.items():
        b0 = b & ~(1 << sh)
        b1 = b0 | (1 << sh)
        sign = -1.0 if (b >> sh) & 1 else 1.0
        amps[b0] = amps.get(b0, 0.0) + a * SQRT1_2
        amps[b1] = amps.get(b1, 0.0) + sign * a * SQRT1_2
    return SparseState(state.layout, amps)


def apply_classical_oracle(state: SparseState, input_registers: Sequence[str],
                           output_register: str, f: Callable[..., int],
                           *, require_zero_output: bool = True) -> SparseState:
    """``|in>|out> -> |in>|out xor f(in)>`` on every support element.

    ``f`` receives one int per input register, in the given order.
    """
    lay = state.layout
    width = lay.width(output_register)
    for name in input_registers:
        lay.width(name)
    if output_register in input_registers:
        raise StructuralError("output register cannot also be an input")
    amps = {}
    for b, a in state.items():
        out = lay.get(b, output_register)
        if require_zero_output and out:
            raise ContractViolation(
                f"output register {output_register!r} is not |0> on the support"
            )
        y = int(f(*(lay.get(b, n) for n in input_registers)))
        if y < 0 or y >> width:
            raise StructuralError(f"oracle output {y} does not fit {width} qubits")
        amps[lay.put(b, output_register, out ^ y)] = a
    return SparseState(lay, amps)


# -- measurements ---------------------------------------------------------


def _pick(rng: np.random.Generator, outcomes: Sequence, probs: Sequence[float]):
    u = rng.random() * float(sum(probs))
    acc = 0.0
    for outcome, p in zip(outcomes, probs):
        acc += p
        if u < acc:
            return outcome
    # rounding at the top end: fall back to the last non-zero outcome
    for outcome, p in zip(reversed(outcomes), reversed(probs)):
        if p > 0:
            return outcome
    raise ContractViolation("empty outcome distribution")


def computational_distribution(state: SparseState, register: str) -> dict[int, float]:
    dist: dict[int, float] = {}
    for b, a in state.items():
        v = state.layout.get(b, register)
        dist[v] = dist.get(v, 0.0) + abs(a) ** 2
    return dict(sorted(dist.items()))


def measure_computational(state: SparseState, register: str, rng: np.random.Generator,
                          *, outcome: int | None = None) -> tuple[MeasurementRecord, SparseState]:
    """Non-destructive computational-basis measurement of a whole register."""
    dist = computational_distribution(state, register)
    if outcome is None:
        outcome = _pick(rng, list(dist), list(dist.values()))
    prob = dist.get(outcome, 0.0)
    if prob <= 0.0:
        raise ContractViolation(f"outcome {outcome} has probability zero")
    scale = 1.0 / math.sqrt(prob)
    lay = state.layout
    post = SparseState(lay, {b: a * scale for b, a in state.items() if lay.get(b, register) == outcome})
    return MeasurementRecord(outcome, lay.width(register), prob, Basis.COMPUTATIONAL), post


def _rref(vectors: Iterable[int]) -> list[tuple[int, int]]:
    """Reduced row echelon basis over GF(2) as (pivot_bit, vector) pairs."""
    rows: list[list[int]] = []  # [pivot, vec]
    for v in vectors:
        for pivot, row in rows:
            if (v >> pivot) & 1:
                v ^= row
        if v:
            pivot = v.bit_length() - 1
            for r in rows:
                if (r[1] >> pivot) & 1:
                    r[1] ^= v
            rows.append([pivot, v])
    return [(p, v) for p, v in rows]


def _coords(v: int, basis: list[tuple[int, int]]) -> int:
    """Mask of basis rows whose sum is ``v`` (``v`` must lie in the span)."""
    mask = 0
    for i, (pivot, row) in enumerate(basis):
        if (v >> pivot) & 1:
            v ^= row
            mask |= 1 << i
    if v:
        raise AssertionError("vector outside span")
    return mask


def _group_by_register(state: SparseState, register: str):
    lay = state.layout
    m = lay.mask(register)
    sh = lay.low_shift(register)
    groups: dict[int, dict[int, complex]] = {}
    for b, a in state.items():
        groups.setdefault(b & ~m, {})[(b & m) >> sh] = a
    return groups


def hadamard_outcome_probability(state: SparseState, register: str, s: int) -> float:
    """Born probability of reading ``s`` after H on every qubit of ``register``."""
    k = state.layout.width(register)
    total = 0.0
    for vals in _group_by_register(state, register).values():
        acc = sum(a * (-1 if parity(s & v) else 1) for v, a in vals.items())
        total += abs(acc) ** 2
    return total / (1 << k)


def hadamard_pattern_table(state: SparseState, register: str):
    """Parity-pattern decomposition of the Hadamard outcome distribution.

    Returns ``(basis, probs)`` where ``basis`` is an RREF basis of the span of
    register-value differences and ``probs[q]`` is the total probability of
    the outcome coset ``{s : <s, basis_i> = q_i}``.
    """
    values = state.register_values(register)
    v0 = values[0]
    basis = _rref(v ^ v0 for v in values[1:])
    rank = len(basis)
    if rank > _MAX_HADAMARD_RANK:
        raise CapacityError(f"{rank} independent register values; analytic table too large")
    coords = {v: _coords(v ^ v0, basis) for v in values}
    groups = _group_by_register(state, register)
    probs = []
    for q in range(1 << rank):
        tot = 0.0
        for vals in groups.values():
            acc = sum(a * (-1 if parity(q & coords[v]) else 1) for v, a in vals.items())
            tot += abs(acc) ** 2
        probs.append(tot / (1 << rank))
    return basis, probs


def _project_hadamard(state: SparseState, register: str, s: int, discard: bool) -> SparseState:
    lay = state.layout
    sh = lay.low_shift(register)
    width = lay.width(register)
    amps: dict[int, complex] = {}
    for rest, vals in _group_by_register(state, register).items():
        acc = sum(a * (-1 if parity(s & v) else 1) for v, a in vals.items())
        if discard:
            key = ((rest >> (sh + width)) << sh) | (rest & ((1 << sh) - 1))
        else:
            key = rest | (s << sh)
        amps[key] = acc
    nrm = math.sqrt(sum(abs(a) ** 2 for a in amps.values()))
    new_layout = lay.without([register]) if discard else lay
    return SparseState(new_layout, {k: a / nrm for k, a in amps.items()})


def measure_hadamard_register(state: SparseState, register: str, rng: np.random.Generator,
                              *, outcome: int | None = None, discard: bool = False
                              ) -> tuple[MeasurementRecord, SparseState]:
    """Measure every qubit of ``register`` in the Hadamard basis.

    Equivalent to ``H`` on each qubit followed by a computational measurement,
    but never touches more than the distinct register values in the support.
    With ``discard`` the (now product) register is dropped from the result.
    """
    k = state.layout.width(register)
    basis, probs = hadamard_pattern_table(state, register)
    if outcome is None:
        q = _pick(rng, list(range(len(probs))), probs)
        s = config.rand_bits(rng, k)
        for i, (pivot, row) in enumerate(basis):
            if parity(s & row) != (q >> i) & 1:
                s ^= 1 << pivot
        outcome = s
    if outcome < 0 or outcome >> k:
        raise StructuralError(f"outcome {outcome} does not fit {k} qubits")
    # a single s can be astronomically unlikely on wide registers; its coset is not
    q = sum(parity(outcome & row) << i for i, (_, row) in enumerate(basis))
    if probs[q] < TOL.prune:
        raise ContractViolation(f"Hadamard outcome {outcome} has probability zero")
    prob = probs[q] / 2.0 ** (k - len(basis))
    post = _project_hadamard(state, register, outcome, discard)
    return MeasurementRecord(outcome, k, prob, Basis.HADAMARD), post


def hadamard_distribution(state: SparseState, register: str, max_width: int = 16) -> dict[int, float]:
    """Full outcome table (testing aid; enumerates all ``2**width`` outcomes)."""
    k = state.layout.width(register)
    if k > max_width:
        raise CapacityError(f"register width {k} > {max_width}")
    return {s: hadamard_outcome_probability(state, register, s) for s in range(1 << k)}


# -- Bell pairs -----------------------------------------------------------


def bell_pair(a: str = "A", b: str = "B") -> SparseState:
    """(|00> + |11>)/sqrt(2) on two one-qubit registers."""
    layout = RegisterLayout.of((a, 1), (b, 1))
    return SparseState(layout, {0b00: SQRT1_2, 0b11: SQRT1_2})


def bell_distribution(state: SparseState, qa: tuple[str, int], qb: tuple[str, int]):
    """Map ``(x, z) -> (probability, unnormalised residual amplitudes)``."""
    lay = state.layout
    sa = lay.bit_shift(*qa)
    sb = lay.bit_shift(*qb)
    new_layout, shifts = _drop_bits(lay, [qa, qb])
    table = {}
    for x in (0, 1):
        for z in (0, 1):
            amps: dict[int, complex] = {}
            for basis, amp in state.items():
                p = (basis >> sa) & 1
                q = (basis >> sb) & 1
                if p ^ q != x:
                    continue
                rest = _strip(basis, shifts)
                sign = -1.0 if (z and p) else 1.0
                amps[rest] = amps.get(rest, 0.0) + sign * amp * SQRT1_2
            prob = sum(abs(v) ** 2 for v in amps.values())
            table[(x, z)] = (prob, amps)
    return new_layout, table


def bell_measure(state: SparseState, qa: tuple[str, int], qb: tuple[str, int],
                 rng: np.random.Generator, *, outcome: tuple[int, int] | None = None
                 ) -> tuple[tuple[int, int], SparseState]:
    """Project two qubits on ``{|0x> + (-1)^z |1 x-bar>}`` and remove them."""
    if state.layout.total_width < 2:
        raise StructuralError("Bell measurement needs at least two qubits")
    new_layout, table = bell_distribution(state, qa, qb)
    keys = sorted(table)
    if outcome is None:
        outcome = _pick(rng, keys, [table[k][0] for k in keys])
    prob, amps = table[outcome]
    if prob <= TOL.prune:
        raise ContractViolation(f"Bell outcome {outcome} has probability zero")
    scale = 1.0 / math.sqrt(prob)
    return outcome, SparseState(new_layout, {k: a * scale for k, a in amps.items()})
