"""Hashed qubits: a data qubit tied to a witness register by two public digests.

Block ``c`` lives in registers ``D{c}`` (data, 1 qubit) and ``W{c}``
(witness, ``witness_len`` qubits, first qubit is the dummy flag) of a
shared SparseState. A superposed block is
``(|0>|w_0> + (-1)^r |1>|w_1>)/sqrt(2)`` with both flags 0; a collapsed
block is ``|l>|w_l>`` and publishes a dummy digest for a flagged ``w_{1-l}``.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .config import inner_product, rand_bit, rand_bits
from .errors import ContractViolation, StructuralError
from .hashfam import HashKey, Preimage, digest_hex, eval_hash
from .qsim import (
    RegisterLayout,
    SparseState,
    add_register,
    apply_classical_oracle,
    measure_computational,
    measure_hadamard_register,
    remove_register,
)

FLAG_REGISTER = "FLAG"


def data_register(c: int) -> str:
    return f"D{c}"


def witness_register(c: int) -> str:
    return f"W{c}"


class BlockMode(str, enum.Enum):
    SUPERPOSED = "superposed"
    COLLAPSED = "collapsed"


@dataclass(frozen=True)
class BlockSecrets:
    mode: BlockMode
    w0: int
    w1: int
    witness_len: int
    r: Optional[int] = None  # superposed
    l: Optional[int] = None  # collapsed

    def __post_init__(self):
        mode = BlockMode(self.mode)
        object.__setattr__(self, "mode", mode)
        top = self.witness_len - 1
        f0, f1 = (self.w0 >> top) & 1, (self.w1 >> top) & 1
        if mode is BlockMode.SUPERPOSED:
            if self.r not in (0, 1) or f0 or f1:
                raise StructuralError("superposed block needs a phase bit and two clean witnesses")
        else:
            if self.l not in (0, 1):
                raise StructuralError("collapsed block needs its bit l")
            if (f0, f1)[self.l] != 0 or (f0, f1)[1 - self.l] != 1:
                raise StructuralError("collapsed block must flag exactly the off branch")

    def w(self, d: int) -> int:
        return self.w1 if d else self.w0

    def preimage(self, d: int) -> Preimage:
        return Preimage.from_w(d, self.w(d), self.witness_len)


@dataclass(frozen=True)
class HashedQubitBlock:
    index: int
    h0: int
    h1: int
    state: Optional[SparseState] = None

    @property
    def data_register(self) -> str:
        return data_register(self.index)

    @property
    def witness_register(self) -> str:
        return witness_register(self.index)

    @property
    def digests(self) -> tuple[int, int]:
        return (self.h0, self.h1)

    def to_json(self, key: HashKey) -> str:
        return json.dumps({"c": self.index, "h0_hex": digest_hex(key, self.h0),
                           "h1_hex": digest_hex(key, self.h1)}, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "HashedQubitBlock":
        obj = json.loads(text)
        return cls(int(obj["c"]), int(obj["h0_hex"], 16), int(obj["h1_hex"], 16))


def clean_witness(witness_len: int, rng: np.random.Generator) -> int:
    """Uniform ``w`` with flag bit 0."""
    return rand_bits(rng, witness_len - 1)


def dummy_witness(witness_len: int, rng: np.random.Generator) -> int:
    """Uniform ``w`` with flag bit 1."""
    return (1 << (witness_len - 1)) | rand_bits(rng, witness_len - 1)


def sample_secrets(mode: BlockMode | str, witness_len: int, rng: np.random.Generator, *,
                   r: Optional[int] = None, l: Optional[int] = None) -> BlockSecrets:
    mode = BlockMode(mode)
    if mode is BlockMode.SUPERPOSED:
        w0 = clean_witness(witness_len, rng)
        w1 = clean_witness(witness_len, rng)
        r = rand_bit(rng) if r is None else r
        return BlockSecrets(mode, w0, w1, witness_len, r=r)
    l = rand_bit(rng) if l is None else l
    w_on = clean_witness(witness_len, rng)
    w_off = dummy_witness(witness_len, rng)
    w0, w1 = (w_on, w_off) if l == 0 else (w_off, w_on)
    return BlockSecrets(mode, w0, w1, witness_len, l=l)


def block_digests(key: HashKey, secrets: BlockSecrets) -> tuple[int, int]:
    return (eval_hash(key, secrets.preimage(0).to_int()),
            eval_hash(key, secrets.preimage(1).to_int()))


def block_state(index: int, secrets: BlockSecrets) -> SparseState:
    layout = RegisterLayout.of((data_register(index), 1), (witness_register(index), secrets.witness_len))
    dr, wr = data_register(index), witness_register(index)
    if secrets.mode is BlockMode.SUPERPOSED:
        sign = -1.0 if secrets.r else 1.0
        return SparseState.from_register_amplitudes(
            layout, [({dr: 0, wr: secrets.w0}, 1.0), ({dr: 1, wr: secrets.w1}, sign)])
    return SparseState.basis_state(layout, {dr: secrets.l, wr: secrets.w(secrets.l)})


def sample_block(mode: BlockMode | str, key: HashKey, rng: np.random.Generator, index: int = 0,
                 *, r: Optional[int] = None, l: Optional[int] = None
                 ) -> tuple[HashedQubitBlock, BlockSecrets]:
    secrets = sample_secrets(mode, key.witness_len, rng, r=r, l=l)
    h0, h1 = block_digests(key, secrets)
    return HashedQubitBlock(index, h0, h1, block_state(index, secrets)), secrets


def attach_witness(state: SparseState, data_reg: str, witness_reg: str,
                   w0: int, w1: int, witness_len: int) -> SparseState:
    """The isometry ``|x> -> |x>|w_x>`` on one data qubit."""
    state = add_register(state, witness_reg, witness_len)
    return apply_classical_oracle(state, [data_reg], witness_reg, lambda x: w1 if x else w0)


def membership_oracle(key: HashKey, h0: int, h1: int):
    """``f(x, w) = [w[1] != 1 and h(x || w) in {h0, h1}]``."""
    top = key.witness_len - 1
    allowed = {h0, h1}

    def f(x: int, w: int) -> int:
        if (w >> top) & 1:
            return 0
        return int(eval_hash(key, (x << key.witness_len) | w) in allowed)

    return f


@dataclass(frozen=True)
class ShrinkResult:
    passed: bool
    s: Optional[int]
    state: SparseState
    flag_probability: float


def verify_and_shrink(state: SparseState, block: HashedQubitBlock, key: HashKey,
                      rng: np.random.Generator) -> ShrinkResult:
    """Check one block and reduce it to its data qubit.

    A fresh flag qubit receives the membership oracle and is measured first.
    On flag 0 the block's registers are discarded and ``passed`` is False.
    On flag 1 the witness register is measured in the Hadamard basis
    (outcome ``s``) and removed, leaving ``D{c}`` in ``state``.
    """
    dr, wr = block.data_register, block.witness_register
    if state.layout.width(dr) != 1 or state.layout.width(wr) != key.witness_len:
        raise StructuralError(f"block {block.index} registers have the wrong widths")
    work = add_register(state, FLAG_REGISTER, 1)
    work = apply_classical_oracle(work, [dr, wr], FLAG_REGISTER, membership_oracle(key, block.h0, block.h1))
    rec, work = measure_computational(work, FLAG_REGISTER, rng)
    _, work = remove_register(work, FLAG_REGISTER)
    if rec.outcome == 0:
        return ShrinkResult(False, None, _discard(work, [dr, wr], rng), rec.probability)
    hrec, work = measure_hadamard_register(work, wr, rng, discard=True)
    return ShrinkResult(True, hrec.outcome, work, rec.probability)


def _discard(state: SparseState, registers: list[str], rng: np.random.Generator) -> SparseState:
    # tracing out is modelled by measuring and dropping
    for name in registers:
        _, state = measure_computational(state, name, rng)
        _, state = remove_register(state, name)
    return state


def decode_phase(secrets: BlockSecrets, s: int, z: int) -> int:
    """``r xor <s, w_0 xor w_1> xor z`` for a superposed block."""
    if secrets.mode is not BlockMode.SUPERPOSED:
        raise ContractViolation("collapsed blocks carry no phase to decode")
    return secrets.r ^ inner_product(s, secrets.w0 ^ secrets.w1) ^ (z & 1)


def phase_bit(secrets: BlockSecrets, s: int) -> int:
    """``r xor <s, w_0 xor w_1>``: the phase left on the data qubit after shrinking."""
    return decode_phase(secrets, s, 0)
