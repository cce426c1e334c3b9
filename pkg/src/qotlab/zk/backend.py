"""Interchangeable ZK backends with a common prove/verify surface.

``prove`` returns the payload of one frame, ``verify`` consumes it. The
ideal backend sends a ticket (ZKMSG) and therefore needs both parties in
one process; the NIZK backend sends a proof (ZKPROOF) and works anywhere.
"""

from __future__ import annotations

import struct
from typing import Optional

import numpy as np

from ..errors import StructuralError
from ..wire import FrameType
from .ideal import IdealZk
from .mpcith import DEFAULT_REPETITIONS, NizkProof, nizk_prove, nizk_verify
from .relations import ZkStatement, ZkWitness
from .ro import RandomOracle


class ZkBackend:
    name = ""
    frame_type = FrameType.ZKPROOF

    def prove(self, statement: ZkStatement, witness: Optional[ZkWitness],
              rng: np.random.Generator) -> bytes:
        raise NotImplementedError

    def verify(self, statement: ZkStatement, payload: bytes) -> bool:
        raise NotImplementedError


class IdealBackend(ZkBackend):
    name = "ideal"
    frame_type = FrameType.ZKMSG

    def __init__(self, fzk: Optional[IdealZk] = None):
        self.fzk = fzk or IdealZk()

    def prove(self, statement, witness, rng) -> bytes:
        return struct.pack(">Q", self.fzk.submit(statement, witness))

    def verify(self, statement, payload) -> bool:
        if len(payload) != 8:
            return False
        (ticket,) = struct.unpack(">Q", payload)
        got = self.fzk.deliver(ticket)
        return got is not None and got == statement


class NizkBackend(ZkBackend):
    name = "nizk"
    frame_type = FrameType.ZKPROOF

    def __init__(self, ro: Optional[RandomOracle] = None, repetitions: int = DEFAULT_REPETITIONS):
        self.ro = ro or RandomOracle(b"qotlab/session-ro")
        self.repetitions = repetitions
        self.last_proof: Optional[NizkProof] = None

    def prove(self, statement, witness, rng) -> bytes:
        proof = nizk_prove(statement, witness, self.ro, rng, self.repetitions)
        self.last_proof = proof
        return proof.to_bytes()

    def verify(self, statement, payload) -> bool:
        return nizk_verify(statement, payload, self.ro.fork(), self.repetitions)


def make_backend(name: str, *, fzk: Optional[IdealZk] = None,
                 repetitions: int = DEFAULT_REPETITIONS) -> ZkBackend:
    if name == "ideal":
        return IdealBackend(fzk)
    if name == "nizk":
        return NizkBackend(repetitions=repetitions)
    raise StructuralError(f"unknown ZK backend {name!r}")
