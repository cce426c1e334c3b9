"""The two NP relations the protocols prove.

``bit_ot``: four digests ``h_d^c`` (blocks ``c`` in {0, 1}); the witness
holds every preimage and at least one of them carries the dummy flag.

``semicollapse``: ``2n`` digests; the witness also names the measured set
``T``, which must satisfy the public predicate, and every block in ``T``
must have a flagged preimage.

Blocks are stored by position ``0 .. n-1``. For ``semicollapse`` position
``p`` is block ``c = p + 1``; ``T`` uses the 1-based block numbers.
"""

from __future__ import annotations

import enum
import hashlib
import json
import struct
from dataclasses import dataclass
from typing import Optional

from ..errors import StructuralError
from ..hashfam import HashKey, Preimage, eval_hash
from ..predicates import Predicate


class StatementKind(str, enum.Enum):
    BIT_OT = "bit_ot"
    SEMICOLLAPSE = "semicollapse"


@dataclass(frozen=True)
class ZkStatement:
    kind: StatementKind
    hash_key: HashKey
    digests: tuple[tuple[int, int], ...]
    predicate: Optional[Predicate] = None

    def __post_init__(self):
        kind = StatementKind(self.kind)
        object.__setattr__(self, "kind", kind)
        digests = tuple((int(a), int(b)) for a, b in self.digests)
        object.__setattr__(self, "digests", digests)
        limit = 1 << self.hash_key.output_len
        for pair in digests:
            for h in pair:
                if not 0 <= h < limit:
                    raise StructuralError(f"digest does not fit {self.hash_key.output_len} bits")
        if kind is StatementKind.BIT_OT:
            if len(digests) != 2:
                raise StructuralError("bit_ot statements carry exactly two blocks")
            if self.predicate is not None:
                raise StructuralError("bit_ot statements have no predicate")
        else:
            if self.predicate is None:
                raise StructuralError("semicollapse statements need a predicate")
            if self.predicate.n != len(digests):
                raise StructuralError("predicate size differs from the block count")

    @property
    def n(self) -> int:
        return len(self.digests)

    def to_bytes(self) -> bytes:
        """Canonical encoding, used for hashing and on the wire."""
        key = self.hash_key.to_json().encode()
        pred = self.predicate.to_bytes() if self.predicate is not None else b""
        dlen = (self.hash_key.output_len + 7) // 8
        out = [self.kind.value.encode(), b"\x00",
               struct.pack(">I", len(key)), key,
               struct.pack(">I", len(pred)), pred,
               struct.pack(">H", self.n)]
        for h0, h1 in self.digests:
            out.append(h0.to_bytes(dlen, "big"))
            out.append(h1.to_bytes(dlen, "big"))
        return b"".join(out)

    def digest(self) -> bytes:
        return hashlib.sha256(b"qotlab/statement|" + self.to_bytes()).digest()

    def to_json(self) -> dict:
        return {
            "kind": self.kind.value,
            "hash_key": json.loads(self.hash_key.to_json()),
            "digests": [[format(a, "x"), format(b, "x")] for a, b in self.digests],
            "predicate": self.predicate.describe() if self.predicate else None,
        }


@dataclass(frozen=True)
class ZkWitness:
    preimages: tuple[tuple[Preimage, Preimage], ...]
    measured_set: Optional[frozenset[int]] = None
    aux_witness: Optional[bytes] = None

    def preimage(self, position: int, d: int) -> Preimage:
        return self.preimages[position][d]

    @classmethod
    def from_witness_ints(cls, ws: list[tuple[int, int]], witness_len: int,
                          measured_set=None) -> "ZkWitness":
        pre = tuple((Preimage.from_w(0, w0, witness_len), Preimage.from_w(1, w1, witness_len))
                    for w0, w1 in ws)
        t = frozenset(measured_set) if measured_set is not None else None
        return cls(pre, t)


def _check_shapes(statement: ZkStatement, witness: ZkWitness) -> None:
    if len(witness.preimages) != statement.n:
        raise StructuralError(f"witness has {len(witness.preimages)} blocks, statement {statement.n}")
    wl = statement.hash_key.witness_len
    for pair in witness.preimages:
        if len(pair) != 2:
            raise StructuralError("each block needs two preimages")
        for d, p in enumerate(pair):
            if p.witness_len != wl:
                raise StructuralError(f"preimage witness length {p.witness_len} != {wl}")
            if p.data_bit != d:
                raise StructuralError("preimage data bit does not match its slot")
    if statement.kind is StatementKind.SEMICOLLAPSE:
        if witness.measured_set is None:
            raise StructuralError("semicollapse witness needs the measured set T")
        if any(not 1 <= c <= statement.n for c in witness.measured_set):
            raise StructuralError("measured set outside [n]")


def relation_check(statement: ZkStatement, witness: ZkWitness) -> bool:
    """True iff the witness satisfies the statement's relation.

    Shape mismatches raise StructuralError instead of returning False.
    """
    _check_shapes(statement, witness)
    key = statement.hash_key
    for pair, digests in zip(witness.preimages, statement.digests):
        for p, h in zip(pair, digests):
            if eval_hash(key, p.to_int()) != h:
                return False
    flagged = [any(p.flag_bit for p in pair) for pair in witness.preimages]
    if statement.kind is StatementKind.BIT_OT:
        return any(flagged)
    t = witness.measured_set
    if not statement.predicate(t):
        return False
    return all(flagged[c - 1] for c in t)
