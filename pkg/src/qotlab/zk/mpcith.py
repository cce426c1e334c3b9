"""Non-interactive MPC-in-the-head proofs (3 parties, open 2) over a random oracle.

Per repetition the prover splits the circuit input into three XOR shares,
runs a simulated 3-party evaluation of the relation circuit, and commits to
each party's view with the oracle. The Fiat-Shamir challenge picks ``e``
per repetition; the proof opens parties ``e`` and ``e+1``.

Parties 0 and 1 derive their input share from their seed; party 2's share
is explicit and part of its view. Party 0 holds all public constants. All
repetitions are evaluated together: every wire carries an ``R``-bit integer
whose bit ``r`` belongs to repetition ``r``.
"""

from __future__ import annotations

import hashlib
import json
import struct
from dataclasses import dataclass
from typing import Iterable, Optional

import numpy as np

from ..errors import ContractViolation, StructuralError
from .circuit import AND, NOT, XOR, Circuit, decode_witness, encode_witness, relation_circuit
from .relations import ZkStatement, ZkWitness, relation_check
from .ro import RandomOracle

MAGIC = b"QZKP"
VERSION = 1
SEED_BYTES = 16
DIGEST_BYTES = 32
DEFAULT_REPETITIONS = 40


@dataclass(frozen=True)
class Opening:
    """What one repetition reveals: two seeds, one view, one foreign commitment."""

    unopened_commitment: bytes
    seed_a: bytes
    seed_b: bytes
    x2_share: Optional[bytes]  # present when party 2 is opened
    view_b: bytes  # AND-gate outputs of party e+1


@dataclass(frozen=True)
class NizkProof:
    statement_digest: bytes
    challenges: bytes  # one byte per repetition, values 0..2
    repetitions: tuple[Opening, ...]
    challenge_transcript: bytes = b""  # oracle output the challenges were expanded from

    def to_bytes(self) -> bytes:
        openings = b"".join(
            o.seed_a + o.seed_b + (o.x2_share or b"") + o.view_b for o in self.repetitions
        )
        commitments = b"".join(o.unopened_commitment for o in self.repetitions)
        sections = [self.statement_digest, self.challenges, commitments, openings]
        return MAGIC + bytes([VERSION]) + b"".join(struct.pack(">I", len(s)) + s for s in sections)

    @classmethod
    def from_bytes(cls, data: bytes, n_inputs: int, n_and: int) -> "NizkProof":
        """Strict parser: any deviation from the canonical encoding is an error."""
        if data[:4] != MAGIC:
            raise StructuralError("bad proof magic")
        if len(data) < 5 or data[4] != VERSION:
            raise StructuralError("unsupported proof version")
        pos = 5
        sections = []
        for _ in range(4):
            if pos + 4 > len(data):
                raise StructuralError("truncated proof")
            (ln,) = struct.unpack_from(">I", data, pos)
            pos += 4
            if pos + ln > len(data):
                raise StructuralError("truncated proof section")
            sections.append(data[pos:pos + ln])
            pos += ln
        if pos != len(data):
            raise StructuralError("trailing bytes after proof")
        digest, challenges, commitments, openings = sections
        if len(digest) != DIGEST_BYTES:
            raise StructuralError("bad statement digest length")
        reps = len(challenges)
        if any(c > 2 for c in challenges):
            raise StructuralError("challenge out of range")
        if len(commitments) != reps * DIGEST_BYTES:
            raise StructuralError("commitment section length mismatch")
        x2_len = (n_inputs + 7) // 8
        view_len = (n_and + 7) // 8
        out = []
        off = 0
        for r, e in enumerate(challenges):
            has_x2 = 2 in (e, (e + 1) % 3)
            size = 2 * SEED_BYTES + (x2_len if has_x2 else 0) + view_len
            chunk = openings[off:off + size]
            if len(chunk) != size:
                raise StructuralError("opening section too short")
            off += size
            seed_a = chunk[:SEED_BYTES]
            seed_b = chunk[SEED_BYTES:2 * SEED_BYTES]
            rest = chunk[2 * SEED_BYTES:]
            x2 = None
            if has_x2:
                x2, rest = rest[:x2_len], rest[x2_len:]
                _check_padding(x2, n_inputs)
            _check_padding(rest, n_and)
            out.append(Opening(commitments[r * DIGEST_BYTES:(r + 1) * DIGEST_BYTES],
                               seed_a, seed_b, x2, rest))
        if off != len(openings):
            raise StructuralError("opening section too long")
        return cls(digest, challenges, tuple(out))

    def to_json(self) -> str:
        return json.dumps({
            "statement_digest": self.statement_digest.hex(),
            "challenges": list(self.challenges),
            "challenge_transcript": self.challenge_transcript.hex(),
            "repetitions": [
                {"unopened_commitment": o.unopened_commitment.hex(), "seed_a": o.seed_a.hex(),
                 "seed_b": o.seed_b.hex(), "x2_share": o.x2_share.hex() if o.x2_share else None,
                 "view_b": o.view_b.hex()}
                for o in self.repetitions
            ],
        }, indent=1)


def _check_padding(data: bytes, nbits: int) -> None:
    if nbits % 8 and data and data[-1] >> (nbits % 8):
        raise StructuralError("nonzero padding bits")


# -- bitsliced helpers ----------------------------------------------------


def _tape(seed: bytes, nbits: int) -> bytes:
    return hashlib.shake_256(b"qotlab/mpc-tape|" + seed).digest(max(1, (nbits + 7) // 8))


def _columns(rows: list[bytes], nbits: int) -> list[int]:
    """Transpose per-repetition bit rows into per-bit ``R``-bit integers."""
    if nbits == 0:
        return []
    nbytes = (nbits + 7) // 8
    arr = np.frombuffer(b"".join(r[:nbytes] for r in rows), dtype=np.uint8).reshape(len(rows), nbytes)
    bits = np.unpackbits(arr, axis=1, bitorder="little")[:, :nbits]
    packed = np.packbits(np.ascontiguousarray(bits.T), axis=1, bitorder="little")
    return [int.from_bytes(p.tobytes(), "little") for p in packed]


def _rows(cols: list[int], reps: int) -> list[bytes]:
    """Inverse of ``_columns``; rows are zero-padded to whole bytes."""
    if not cols:
        return [b""] * reps
    rb = (reps + 7) // 8
    arr = np.frombuffer(b"".join(c.to_bytes(rb, "little") for c in cols),
                        dtype=np.uint8).reshape(len(cols), rb)
    bits = np.unpackbits(arr, axis=1, bitorder="little")[:, :reps]
    packed = np.packbits(np.ascontiguousarray(bits.T), axis=1, bitorder="little")
    return [p.tobytes() for p in packed]


def _mask(reps: Iterable[bool]) -> int:
    return sum(1 << r for r, on in enumerate(reps) if on)


def _run_three(circ: Circuit, inputs: list[list[int]], rand: list[list[int]], full: int):
    v0 = inputs[0] + [0] * (circ.n_wires - circ.n_inputs)
    v1 = inputs[1] + [0] * (circ.n_wires - circ.n_inputs)
    v2 = inputs[2] + [0] * (circ.n_wires - circ.n_inputs)
    r0, r1, r2 = rand
    a0: list[int] = []
    a1: list[int] = []
    a2: list[int] = []
    k = 0
    for op, o, a, b in circ.gates:
        if op == XOR:
            v0[o] = v0[a] ^ v0[b]
            v1[o] = v1[a] ^ v1[b]
            v2[o] = v2[a] ^ v2[b]
        elif op == AND:
            x0, x1, x2 = v0[a], v1[a], v2[a]
            y0, y1, y2 = v0[b], v1[b], v2[b]
            z0 = (x0 & y0) ^ (x1 & y0) ^ (x0 & y1) ^ r0[k] ^ r1[k]
            z1 = (x1 & y1) ^ (x2 & y1) ^ (x1 & y2) ^ r1[k] ^ r2[k]
            z2 = (x2 & y2) ^ (x0 & y2) ^ (x2 & y0) ^ r2[k] ^ r0[k]
            v0[o], v1[o], v2[o] = z0, z1, z2
            a0.append(z0)
            a1.append(z1)
            a2.append(z2)
            k += 1
        elif op == NOT:
            v0[o] = v0[a] ^ full
            v1[o] = v1[a]
            v2[o] = v2[a]
        else:
            v0[o], v1[o], v2[o] = full, 0, 0
    outs = [[v[w] for w in circ.outputs] for v in (v0, v1, v2)]
    return [a0, a1, a2], outs


def _run_two(circ: Circuit, in_a: list[int], in_b: list[int], rand_a: list[int],
             rand_b: list[int], view_b: list[int], const_a: int, const_b: int):
    va = in_a + [0] * (circ.n_wires - circ.n_inputs)
    vb = in_b + [0] * (circ.n_wires - circ.n_inputs)
    ands: list[int] = []
    k = 0
    for op, o, a, b in circ.gates:
        if op == XOR:
            va[o] = va[a] ^ va[b]
            vb[o] = vb[a] ^ vb[b]
        elif op == AND:
            xa, xb, ya, yb = va[a], vb[a], va[b], vb[b]
            z = (xa & ya) ^ (xb & ya) ^ (xa & yb) ^ rand_a[k] ^ rand_b[k]
            va[o] = z
            vb[o] = view_b[k]
            ands.append(z)
            k += 1
        elif op == NOT:
            va[o] = va[a] ^ const_a
            vb[o] = vb[a] ^ const_b
        else:
            va[o], vb[o] = const_a, const_b
    return ands, [va[w] for w in circ.outputs], [vb[w] for w in circ.outputs]


def _challenge(ro: RandomOracle, digest: bytes, commits, outputs, reps: int):
    data = digest + b"".join(c for rep in commits for c in rep) + b"".join(
        y for rep in outputs for y in rep)
    h = ro.query("mpc-challenge", data)
    trits: list[int] = []
    counter = 0
    while len(trits) < reps:
        block = ro.query("mpc-challenge-expand", h + counter.to_bytes(4, "big"))
        trits.extend(b % 3 for b in block if b < 255)
        counter += 1
    return bytes(trits[:reps]), h


def _xor_bytes(*parts: bytes) -> bytes:
    n = len(parts[0])
    acc = 0
    for p in parts:
        acc ^= int.from_bytes(p, "little")
    return acc.to_bytes(n, "little")


# -- prove / verify / extract ---------------------------------------------


def nizk_prove(statement: ZkStatement, witness: ZkWitness, ro: RandomOracle,
               rng: np.random.Generator, repetitions: int = DEFAULT_REPETITIONS) -> NizkProof:
    """Prove ``relation_check(statement, witness)``; refuses invalid witnesses."""
    if not relation_check(statement, witness):
        raise ContractViolation("refusing to prove with a witness that fails the relation")
    if repetitions < 1:
        raise StructuralError("need at least one repetition")
    rc = relation_circuit(statement)
    circ = rc.circuit
    n_in, n_and, reps = circ.n_inputs, circ.n_and, repetitions
    full = (1 << reps) - 1
    x = encode_witness(statement, witness)

    seeds = [[rng.bytes(SEED_BYTES) for _ in range(3)] for _ in range(reps)]
    tapes = [_columns([_tape(seeds[r][i], n_in + n_and) for r in range(reps)], n_in + n_and)
             for i in range(3)]
    in0, in1 = tapes[0][:n_in], tapes[1][:n_in]
    in2 = [(full if (x >> k) & 1 else 0) ^ in0[k] ^ in1[k] for k in range(n_in)]
    ands, outs = _run_three(circ, [in0, in1, in2], [t[n_in:] for t in tapes], full)

    x2_rows = _rows(in2, reps)
    and_rows = [_rows(a, reps) for a in ands]
    y_rows = [_rows(o, reps) for o in outs]
    digest = statement.digest()
    commits = []
    for r in range(reps):
        row = []
        for i in range(3):
            view = (x2_rows[r] if i == 2 else b"") + and_rows[i][r]
            row.append(ro.query("mpc-commit", seeds[r][i] + view))
        commits.append(row)
    outputs = [[y_rows[i][r] for i in range(3)] for r in range(reps)]
    challenges, transcript = _challenge(ro, digest, commits, outputs, reps)

    openings = []
    for r, e in enumerate(challenges):
        a, b, u = e, (e + 1) % 3, (e + 2) % 3
        openings.append(Opening(commits[r][u], seeds[r][a], seeds[r][b],
                                x2_rows[r] if 2 in (a, b) else None, and_rows[b][r]))
    return NizkProof(digest, challenges, tuple(openings), transcript)


def nizk_verify(statement: ZkStatement, proof: NizkProof | bytes, ro: RandomOracle,
                repetitions: int = DEFAULT_REPETITIONS) -> bool:
    """Total: any malformed input yields False."""
    try:
        return _verify(statement, proof, ro, repetitions)
    except (StructuralError, ValueError, IndexError, TypeError, struct.error):
        return False


def _verify(statement: ZkStatement, proof: NizkProof | bytes, ro: RandomOracle,
            repetitions: int) -> bool:
    rc = relation_circuit(statement)
    circ = rc.circuit
    n_in, n_and = circ.n_inputs, circ.n_and
    if isinstance(proof, (bytes, bytearray)):
        proof = NizkProof.from_bytes(bytes(proof), n_in, n_and)
    else:
        # re-parse so object proofs get the same strictness as wire proofs
        proof = NizkProof.from_bytes(proof.to_bytes(), n_in, n_and)
    reps = len(proof.challenges)
    if reps != repetitions:
        return False
    digest = statement.digest()
    if proof.statement_digest != digest:
        return False
    es = list(proof.challenges)
    a_party = es
    b_party = [(e + 1) % 3 for e in es]
    zero_x2 = bytes((n_in + 7) // 8)

    tape_a = [_tape(o.seed_a, n_in + n_and) for o in proof.repetitions]
    tape_b = [_tape(o.seed_b, n_in + n_and) for o in proof.repetitions]
    cols_a = _columns(tape_a, n_in + n_and)
    cols_b = _columns(tape_b, n_in + n_and)
    x2_cols = _columns([o.x2_share or zero_x2 for o in proof.repetitions], n_in)
    two_a = _mask(p == 2 for p in a_party)
    two_b = _mask(p == 2 for p in b_party)
    in_a = [(cols_a[k] & ~two_a) | (x2_cols[k] & two_a) for k in range(n_in)]
    in_b = [(cols_b[k] & ~two_b) | (x2_cols[k] & two_b) for k in range(n_in)]
    view_b = _columns([o.view_b for o in proof.repetitions], n_and)
    const_a = _mask(p == 0 for p in a_party)
    const_b = _mask(p == 0 for p in b_party)
    ands_a, out_a, out_b = _run_two(circ, in_a, in_b, cols_a[n_in:], cols_b[n_in:], view_b,
                                    const_a, const_b)
    and_rows_a = _rows(ands_a, reps)
    ya_rows = _rows(out_a, reps)
    yb_rows = _rows(out_b, reps)
    n_out = len(circ.outputs)
    expected = rc.expected_output(statement).to_bytes((n_out + 7) // 8, "little")

    commits = []
    outputs = []
    for r, o in enumerate(proof.repetitions):
        a, b, u = a_party[r], b_party[r], (a_party[r] + 2) % 3
        c = [b""] * 3
        y = [b""] * 3
        c[a] = ro.query("mpc-commit", o.seed_a + (o.x2_share if a == 2 else b"") + and_rows_a[r])
        c[b] = ro.query("mpc-commit", o.seed_b + (o.x2_share if b == 2 else b"") + o.view_b)
        c[u] = o.unopened_commitment
        y[a], y[b] = ya_rows[r], yb_rows[r]
        y[u] = _xor_bytes(expected, ya_rows[r], yb_rows[r])
        commits.append(c)
        outputs.append(y)
    challenges, _ = _challenge(ro, digest, commits, outputs, reps)
    return challenges == proof.challenges


def nizk_extract(statement: ZkStatement, proof: NizkProof | bytes,
                 ro_query_log: RandomOracle | list) -> Optional[ZkWitness]:
    """Recover a witness from an accepted proof using the prover's logged oracle queries.

    Returns None when the unopened commitments were never queried in the log
    (an adversary outside the classical-query model) or the proof is invalid.
    """
    rc = relation_circuit(statement)
    circ = rc.circuit
    n_in, n_and = circ.n_inputs, circ.n_and
    try:
        if isinstance(proof, (bytes, bytearray)):
            proof = NizkProof.from_bytes(bytes(proof), n_in, n_and)
    except StructuralError:
        return None
    log = ro_query_log.log if isinstance(ro_query_log, RandomOracle) else ro_query_log
    index = {out: data for tag, data, out in log if tag == "mpc-commit"}
    x2_len = (n_in + 7) // 8
    in_mask = (1 << n_in) - 1
    for e, o in zip(proof.challenges, proof.repetitions):
        pre = index.get(o.unopened_commitment)
        if pre is None:
            continue
        a, b, u = e, (e + 1) % 3, (e + 2) % 3
        seeds = {a: o.seed_a, b: o.seed_b, u: pre[:SEED_BYTES]}
        x2 = o.x2_share if u != 2 else pre[SEED_BYTES:SEED_BYTES + x2_len]
        if x2 is None or len(x2) != x2_len:
            continue
        shares = [int.from_bytes(_tape(seeds[i], n_in + n_and)[:x2_len], "little") & in_mask
                  for i in (0, 1)]
        x = shares[0] ^ shares[1] ^ int.from_bytes(x2, "little")
        witness = decode_witness(statement, x)
        try:
            if relation_check(statement, witness):
                return witness
        except StructuralError:
            continue
    return None
