"""Boolean circuits for the relations, built from the toy SPN.

Gates are XOR, AND, NOT and the constant 1. The builder folds constants, so
key additions cost nothing but NOT gates and the permutation is pure
rewiring. S-boxes are expanded from their algebraic normal form.

Input layout (little-endian): for each block position ``p`` and each
``d in {0, 1}`` the ``witness_len`` bits of ``w_d`` (bit ``j`` of ``w`` at
offset ``j``), followed for ``semicollapse`` by one bit ``t_c`` per block.
Outputs: the digest bits of every ``(p, d)`` (bit ``j`` of the digest at
offset ``j``), then check bits that must all be 1.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Union

from ..hashfam import SBOX, TOY_ROUNDS, HashKey, Profile, ToySpn
from ..errors import CapabilityError
from .relations import StatementKind, ZkStatement, ZkWitness

XOR, AND, NOT, ONE = 0, 1, 2, 3

Signal = Union[int, bool]  # wire index, or a folded constant


@dataclass
class Circuit:
    n_inputs: int
    gates: list[tuple[int, int, int, int]] = field(default_factory=list)  # (op, out, a, b)
    outputs: list[int] = field(default_factory=list)
    n_wires: int = 0
    n_and: int = 0

    def evaluate(self, x: int) -> int:
        """Plain (single-party) evaluation; returns outputs packed little-endian."""
        v = [0] * self.n_wires
        for i in range(self.n_inputs):
            v[i] = (x >> i) & 1
        for op, o, a, b in self.gates:
            if op == XOR:
                v[o] = v[a] ^ v[b]
            elif op == AND:
                v[o] = v[a] & v[b]
            elif op == NOT:
                v[o] = v[a] ^ 1
            else:
                v[o] = 1
        return sum(v[w] << j for j, w in enumerate(self.outputs))


class CircuitBuilder:
    def __init__(self, n_inputs: int):
        self.c = Circuit(n_inputs, n_wires=n_inputs)

    def _new(self, op: int, a: int = -1, b: int = -1) -> int:
        o = self.c.n_wires
        self.c.n_wires += 1
        self.c.gates.append((op, o, a, b))
        if op == AND:
            self.c.n_and += 1
        return o

    def xor(self, a: Signal, b: Signal) -> Signal:
        if isinstance(a, bool):
            a, b = b, a
        if isinstance(b, bool):
            if isinstance(a, bool):
                return a ^ b
            return self.not_(a) if b else a
        return self._new(XOR, a, b)

    def and_(self, a: Signal, b: Signal) -> Signal:
        if isinstance(a, bool):
            a, b = b, a
        if isinstance(b, bool):
            if isinstance(a, bool):
                return a and b
            return a if b else False
        return self._new(AND, a, b)

    def not_(self, a: Signal) -> Signal:
        if isinstance(a, bool):
            return not a
        return self._new(NOT, a)

    def or_(self, a: Signal, b: Signal) -> Signal:
        return self.xor(self.xor(a, b), self.and_(a, b))

    def wire(self, a: Signal) -> int:
        """Materialise a constant so it can be an output."""
        if not isinstance(a, bool):
            return a
        one = self._new(ONE)
        return one if a else self._new(NOT, one)

    def output(self, a: Signal) -> None:
        self.c.outputs.append(self.wire(a))


def sbox_anf() -> list[dict[int, int]]:
    """ANF of each S-box output bit: monomial mask -> coefficient (Moebius transform)."""
    out = []
    for bit in range(4):
        coeffs = [(SBOX[x] >> bit) & 1 for x in range(16)]
        for i in range(4):
            for u in range(16):
                if u >> i & 1:
                    coeffs[u] ^= coeffs[u ^ (1 << i)]
        out.append({u: 1 for u in range(16) if coeffs[u]})
    return out


_ANF = sbox_anf()


def _sbox(bld: CircuitBuilder, nib: list[Signal]) -> list[Signal]:
    mono: dict[int, Signal] = {0: True}
    for u in range(1, 16):
        top = u.bit_length() - 1
        mono[u] = bld.and_(mono[u ^ (1 << top)], nib[top])
    outs = []
    for bit in range(4):
        acc: Signal = False
        for u in _ANF[bit]:
            acc = bld.xor(acc, mono[u])
        outs.append(acc)
    return outs


def spn_gadget(bld: CircuitBuilder, spn: ToySpn, x: list[Signal]) -> list[Signal]:
    """Circuit for ``ToySpn.__call__``; ``x`` is the input, least significant bit first."""
    w = spn.width
    s: list[Signal] = list(x) + [False] * (w - len(x))
    for r in range(TOY_ROUNDS):
        rk = spn.round_keys[r]
        s = [bld.xor(s[j], bool((rk >> j) & 1)) for j in range(w)]
        for k in range(spn.n_sboxes):
            s[4 * k:4 * k + 4] = _sbox(bld, s[4 * k:4 * k + 4])
        out: list[Signal] = [False] * w
        for j, p in enumerate(spn.perm):
            out[p] = s[j]
        s = out
    rk = spn.round_keys[TOY_ROUNDS]
    s = [bld.xor(s[j], bool((rk >> j) & 1)) for j in range(w)]
    return s[:spn.output_len]


@dataclass(frozen=True)
class RelationCircuit:
    circuit: Circuit
    n_checks: int

    def expected_output(self, statement: ZkStatement) -> int:
        ol = statement.hash_key.output_len
        val = 0
        off = 0
        for h0, h1 in statement.digests:
            val |= h0 << off
            val |= h1 << (off + ol)
            off += 2 * ol
        return val | (((1 << self.n_checks) - 1) << off)


def _shape(statement: ZkStatement):
    return (statement.kind, statement.hash_key, statement.n, statement.predicate)


def relation_circuit(statement: ZkStatement) -> RelationCircuit:
    if statement.hash_key.profile is not Profile.TOY:
        raise CapabilityError("relation circuits exist only for the toy hash profile")
    return _relation_circuit(*_shape(statement))


@lru_cache(maxsize=64)
def _relation_circuit(kind, key: HashKey, n: int, predicate) -> RelationCircuit:
    wl = key.witness_len
    semi = kind is StatementKind.SEMICOLLAPSE
    n_in = 2 * n * wl + (n if semi else 0)
    bld = CircuitBuilder(n_in)
    spn = key.spn
    flags: list[Signal] = []
    for p in range(n):
        block_flag: Signal = False
        for d in (0, 1):
            base = (2 * p + d) * wl
            x = list(range(base, base + wl)) + [bool(d)]
            for bit in spn_gadget(bld, spn, x):
                bld.output(bit)
            block_flag = bld.or_(block_flag, base + wl - 1)
        flags.append(block_flag)
    checks: list[Signal] = []
    if not semi:
        any_flag: Signal = False
        for f in flags:
            any_flag = bld.or_(any_flag, f)
        checks.append(any_flag)
    else:
        t = [2 * n * wl + p for p in range(n)]
        # t_c implies a flagged preimage in block c
        for p in range(n):
            checks.append(bld.not_(bld.and_(t[p], bld.not_(flags[p]))))
        pred_ok: Signal = False
        for subset in predicate.true_sets():
            term: Signal = True
            for p in range(n):
                term = bld.and_(term, t[p] if (p + 1) in subset else bld.not_(t[p]))
            pred_ok = bld.or_(pred_ok, term)
        checks.append(pred_ok)
    for chk in checks:
        bld.output(chk)
    return RelationCircuit(bld.c, len(checks))


def encode_witness(statement: ZkStatement, witness: ZkWitness) -> int:
    wl = statement.hash_key.witness_len
    x = 0
    for p, pair in enumerate(witness.preimages):
        for d, pre in enumerate(pair):
            x |= pre.w << ((2 * p + d) * wl)
    if statement.kind is StatementKind.SEMICOLLAPSE:
        for c in witness.measured_set or ():
            x |= 1 << (2 * statement.n * wl + c - 1)
    return x


def decode_witness(statement: ZkStatement, x: int) -> ZkWitness:
    wl = statement.hash_key.witness_len
    mask = (1 << wl) - 1
    ws = [((x >> (2 * p * wl)) & mask, (x >> ((2 * p + 1) * wl)) & mask)
          for p in range(statement.n)]
    t = None
    if statement.kind is StatementKind.SEMICOLLAPSE:
        base = 2 * statement.n * wl
        t = frozenset(c for c in range(1, statement.n + 1) if (x >> (base + c - 1)) & 1)
    return ZkWitness.from_witness_ints(ws, wl, t)
