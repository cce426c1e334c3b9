"""Party state machines: bit OT, semi-collapse ZKoQS and predicate OT.

Each party is a function of its channel. Messages are bundles of frames
closed by ``flush``; a session runner hosts Alice on the calling thread and
Bob on a worker thread. Any failure on either side ends with an ABORT frame
(unless the peer already aborted) and both parties output None.

Message shapes (``crs`` mode):

* bit OT: Alice ``[CONFIG, DIGESTS, ZK, QSTATE]``, Bob ``[SVEC, ZVEC]``.
* ZKoQS: prover ``[CONFIG, DIGESTS, ZK, QSTATE]``, verifier ``[SVEC]``.
* predicate OT: the ZKoQS messages, then Bob ``[ZVEC]``.

In ``plain`` mode Bob opens with ``[CONFIG, HASHKEY]``.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import struct
import threading
from dataclasses import dataclass, field
from typing import Any, Callable, Optional

import numpy as np

from . import hashfam
from .config import rand_bit
from .errors import ContractViolation, ProtocolError, QotError, StructuralError
from .hashedqubit import (
    BlockMode,
    BlockSecrets,
    HashedQubitBlock,
    attach_witness,
    block_digests,
    block_state,
    data_register,
    decode_phase,
    phase_bit,
    sample_secrets,
    verify_and_shrink,
    witness_register,
)
from .hashfam import FhMode, HashKey, Profile
from .net import Channel, PeerAbort, mem_pair, socket_pair
from .predicates import Predicate
from .qsim import (
    RegisterLayout,
    SparseState,
    apply_h,
    apply_z,
    measure_computational,
    measure_hadamard_register,
    rename,
    reorder,
    tensor,
)
from .wire import FrameType
from .zk import IdealZk, StatementKind, ZkBackend, ZkStatement, ZkWitness, make_backend

BOT = None  # the abort output


# -- configuration --------------------------------------------------------


@dataclass(frozen=True)
class SessionConfig:
    zk_backend: str = "ideal"
    fh_mode: str = "crs"
    hash_profile: str = "toy"
    witness_len: int = 8
    output_len: Optional[int] = None
    n: int = 2
    predicate: Optional[Predicate] = None
    seed: int = 0
    crs_seed_hex: Optional[str] = None
    repetitions: int = 40

    def __post_init__(self):
        if self.zk_backend not in ("ideal", "nizk"):
            raise StructuralError(f"unknown ZK backend {self.zk_backend!r}")
        FhMode(self.fh_mode)
        Profile(self.hash_profile)
        if self.witness_len < 2:
            raise StructuralError("witness_len must be at least 2 (flag plus one bit)")
        if self.zk_backend == "nizk" and self.hash_profile != "toy":
            raise StructuralError("the NIZK backend needs the toy hash profile")
        if self.hash_profile == "toy" and self.witness_len + 1 > hashfam.TOY_MAX_INPUT:
            raise StructuralError("toy profile allows witness_len up to 23")
        if self.predicate is not None and self.predicate.n != self.n:
            raise StructuralError("predicate size differs from n")

    @property
    def crs_seed(self) -> bytes:
        if self.crs_seed_hex:
            return bytes.fromhex(self.crs_seed_hex)
        return hashlib.sha256(b"qotlab/crs|" + str(self.seed).encode()).digest()

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["predicate"] = self.predicate.describe() if self.predicate else None
        return d

    def to_bytes(self) -> bytes:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":")).encode()

    @classmethod
    def from_dict(cls, d: dict) -> "SessionConfig":
        d = dict(d)
        if d.get("predicate") is not None:
            d["predicate"] = Predicate.from_description(d["predicate"])
        return cls(**d)

    @classmethod
    def from_bytes(cls, data: bytes) -> "SessionConfig":
        try:
            return cls.from_dict(json.loads(data))
        except (TypeError, ValueError) as exc:
            raise ProtocolError(f"malformed CONFIG frame: {exc}") from exc

    def replace(self, **kw) -> "SessionConfig":
        return dataclasses.replace(self, **kw)


@dataclass
class PartyRngs:
    main: np.random.Generator
    zk: np.random.Generator


def party_rngs(seed: int) -> dict[str, PartyRngs]:
    """Independent streams per party; ZK randomness is split off so the rest
    is identical whichever backend runs."""
    a, b, azk, bzk = np.random.SeedSequence(seed).spawn(4)
    return {
        "alice": PartyRngs(np.random.default_rng(a), np.random.default_rng(azk)),
        "bob": PartyRngs(np.random.default_rng(b), np.random.default_rng(bzk)),
    }


# -- results and transcripts ----------------------------------------------


@dataclass
class PartyResult:
    output: Any
    aborted: bool = False
    abort_site: Optional[str] = None
    extra: dict = field(default_factory=dict)


@dataclass(frozen=True)
class TranscriptEntry:
    message: int
    direction: str
    ftype: str
    payload: bytes

    @property
    def byte_length(self) -> int:
        return 5 + len(self.payload)


@dataclass
class Transcript:
    entries: list[TranscriptEntry] = field(default_factory=list)
    outputs: dict = field(default_factory=dict)

    @classmethod
    def from_channel(cls, chan: Channel, me: str = "alice", peer: str = "bob") -> "Transcript":
        entries = [TranscriptEntry(rec.message,
                                   f"{me}->{peer}" if rec.direction == "out" else f"{peer}->{me}",
                                   rec.ftype.name, rec.payload)
                   for rec in chan.log]
        return cls(entries)

    @property
    def message_count(self) -> int:
        return len({e.message for e in self.entries})

    @property
    def total_bytes(self) -> int:
        return sum(e.byte_length for e in self.entries)

    def bytes_of(self, ftype: str) -> int:
        return sum(e.byte_length for e in self.entries if e.ftype == ftype)

    def types(self) -> list[str]:
        return [e.ftype for e in self.entries]

    def to_jsonl(self) -> str:
        lines = [json.dumps({"msg": e.message, "dir": e.direction, "type": e.ftype,
                             "len": e.byte_length, "payload_hex": e.payload.hex()},
                            sort_keys=True) for e in self.entries]
        lines.append(json.dumps({"outputs": self.outputs}, sort_keys=True, default=str))
        return "\n".join(lines) + "\n"

    @classmethod
    def from_jsonl(cls, text: str) -> "Transcript":
        t = cls()
        for line in text.splitlines():
            if not line.strip():
                continue
            obj = json.loads(line)
            if "outputs" in obj:
                t.outputs = obj["outputs"]
            else:
                t.entries.append(TranscriptEntry(obj["msg"], obj["dir"], obj["type"],
                                                 bytes.fromhex(obj["payload_hex"])))
        return t

    def digest(self) -> str:
        return hashlib.sha256(self.to_jsonl().encode()).hexdigest()


@dataclass
class SessionResult:
    alice: PartyResult
    bob: PartyResult
    transcript: Transcript

    @property
    def aborted(self) -> bool:
        return self.alice.aborted or self.bob.aborted


# -- abort plumbing -------------------------------------------------------

PartyBody = Callable[[Channel], PartyResult]


class LocalAbort(QotError):
    def __init__(self, site: str):
        super().__init__(site)
        self.site = site


def run_party(chan: Channel, body: Callable[[], PartyResult]) -> PartyResult:
    """Run ``body``; turn every failure into an abort output, notifying the peer."""
    try:
        return body()
    except PeerAbort as exc:
        return PartyResult(BOT, True, f"peer:{exc.reason}")
    except LocalAbort as exc:
        site = exc.site
    except (QotError, ValueError, TimeoutError) as exc:
        site = f"error:{type(exc).__name__}:{exc}"
    try:
        chan.send_abort(site)
    except (QotError, OSError):
        pass
    return PartyResult(BOT, True, site)


def run_session(alice_body: Callable[[Channel], PartyResult],
                bob_body: Callable[[Channel], PartyResult],
                channel: str | tuple[Channel, Channel] = "mem") -> SessionResult:
    """Alice on this thread, Bob on a worker thread."""
    if isinstance(channel, tuple):
        ca, cb = channel
    elif channel == "mem":
        ca, cb = mem_pair()
    elif channel == "socket":
        ca, cb = socket_pair()
    else:
        raise StructuralError(f"unknown channel kind {channel!r}")
    box: dict[str, PartyResult] = {}

    def _bob():
        box["bob"] = run_party(cb, lambda: bob_body(cb))

    t = threading.Thread(target=_bob, daemon=True)
    t.start()
    alice = run_party(ca, lambda: alice_body(ca))
    t.join(ca.timeout + 5)
    bob = box.get("bob", PartyResult(BOT, True, "bob:no-result"))
    if not isinstance(channel, tuple):
        ca.close()
        cb.close()
    transcript = Transcript.from_channel(ca)
    transcript.outputs = {"alice": _jsonable(alice.output), "bob": _jsonable(bob.output),
                          "alice_abort": alice.abort_site, "bob_abort": bob.abort_site}
    return SessionResult(alice, bob, transcript)


def _jsonable(x):
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (int, str, float, bool)) or x is None:
        return x
    return repr(x)


# -- payload codecs -------------------------------------------------------


def _dlen(key: HashKey) -> int:
    return (key.output_len + 7) // 8


def encode_digests(key: HashKey, digests) -> bytes:
    out = [struct.pack(">H", len(digests))]
    for h0, h1 in digests:
        out.append(h0.to_bytes(_dlen(key), "big"))
        out.append(h1.to_bytes(_dlen(key), "big"))
    return b"".join(out)


def decode_digests(key: HashKey, payload: bytes, n: int) -> tuple[tuple[int, int], ...]:
    dl = _dlen(key)
    if len(payload) != 2 + 2 * n * dl or struct.unpack_from(">H", payload)[0] != n:
        raise ProtocolError("DIGESTS frame has the wrong size")
    vals = [int.from_bytes(payload[2 + i * dl:2 + (i + 1) * dl], "big") for i in range(2 * n)]
    if any(v >> key.output_len for v in vals):
        raise ProtocolError("digest wider than output_len")
    return tuple((vals[2 * i], vals[2 * i + 1]) for i in range(n))


def encode_svec(witness_len: int, svals: list[int]) -> bytes:
    wb = (witness_len + 7) // 8
    return b"".join(s.to_bytes(wb, "big") for s in svals)


def decode_svec(witness_len: int, payload: bytes, n: int) -> list[int]:
    wb = (witness_len + 7) // 8
    if len(payload) != n * wb:
        raise ProtocolError("SVEC frame has the wrong size")
    vals = [int.from_bytes(payload[i * wb:(i + 1) * wb], "big") for i in range(n)]
    if any(v >> witness_len for v in vals):
        raise ProtocolError("SVEC entry wider than the witness register")
    return vals


def encode_bits(bits: list[int]) -> bytes:
    v = sum((b & 1) << i for i, b in enumerate(bits))
    return v.to_bytes((len(bits) + 7) // 8, "little")


def decode_bits(payload: bytes, n: int) -> list[int]:
    if len(payload) != (n + 7) // 8:
        raise ProtocolError("bit vector has the wrong size")
    v = int.from_bytes(payload, "little")
    if v >> n:
        raise ProtocolError("bit vector has bits beyond n")
    return [(v >> i) & 1 for i in range(n)]


def block_layout(indices, witness_len: int) -> RegisterLayout:
    regs = []
    for c in indices:
        regs += [(data_register(c), 1), (witness_register(c), witness_len)]
    return RegisterLayout(tuple(regs))


def decode_qstate(payload: bytes, expected: RegisterLayout) -> SparseState:
    try:
        state = SparseState.from_json(payload)
    except (QotError, ValueError) as exc:
        raise ProtocolError(f"malformed QSTATE: {exc}") from exc
    if state.layout != expected:
        raise ProtocolError("QSTATE layout does not match the session")
    return state


# -- hash key distribution --------------------------------------------------


def _key_alice(chan: Channel, config: SessionConfig) -> HashKey:
    if config.fh_mode == "plain":
        peer = SessionConfig.from_bytes(chan.recv_expect(FrameType.CONFIG))
        if peer != config:
            raise LocalAbort("config-mismatch")
    return hashfam.f_h_distribute(config.fh_mode, chan, "alice", profile=config.hash_profile,
                                  witness_len=config.witness_len, output_len=config.output_len,
                                  crs_seed=config.crs_seed)


def _key_bob(chan: Channel, config: SessionConfig, rng: np.random.Generator) -> HashKey:
    if config.fh_mode == "plain":
        chan.send(FrameType.CONFIG, config.to_bytes())
    return hashfam.f_h_distribute(config.fh_mode, chan, "bob", profile=config.hash_profile,
                                  witness_len=config.witness_len, output_len=config.output_len,
                                  rng=rng, crs_seed=config.crs_seed)


def send_prover_message(chan: Channel, config: SessionConfig, key: HashKey, digests,
                        backend: ZkBackend, zk_payload: bytes, state: SparseState) -> None:
    chan.send(FrameType.CONFIG, config.to_bytes())
    chan.send(FrameType.DIGESTS, encode_digests(key, digests))
    chan.send(backend.frame_type, zk_payload)
    chan.send(FrameType.QSTATE, state.to_json().encode())
    chan.flush()


def recv_prover_message(chan: Channel, config: SessionConfig, key: HashKey, n: int,
                        backend: ZkBackend):
    peer = SessionConfig.from_bytes(chan.recv_expect(FrameType.CONFIG))
    if peer != config:
        raise LocalAbort("config-mismatch")
    digests = decode_digests(key, chan.recv_expect(FrameType.DIGESTS), n)
    zk_payload = chan.recv_expect(backend.frame_type)
    qstate = chan.recv_expect(FrameType.QSTATE)
    return digests, zk_payload, qstate


def _prove(backend: ZkBackend, statement: ZkStatement, witness: ZkWitness,
           rng: np.random.Generator) -> bytes:
    try:
        return backend.prove(statement, witness, rng)
    except ContractViolation as exc:
        raise LocalAbort("zk-prove-refused") from exc


# -- bit OT -----------------------------------------------------------------


@dataclass
class BitOtAliceState:
    """What honest Alice keeps between her two steps."""
    b: int
    secrets: dict[int, BlockSecrets]
    statement: ZkStatement
    witness: ZkWitness
    state: SparseState


def bit_ot_alice_prepare(b: int, key: HashKey, rng: np.random.Generator) -> BitOtAliceState:
    """Superposed block at ``b``, collapsed block (random ``l``) at ``1-b``."""
    l = rand_bit(rng)
    secrets = {
        b: sample_secrets(BlockMode.SUPERPOSED, key.witness_len, rng),
        1 - b: sample_secrets(BlockMode.COLLAPSED, key.witness_len, rng, l=l),
    }
    digests = tuple(block_digests(key, secrets[c]) for c in (0, 1))
    statement = ZkStatement(StatementKind.BIT_OT, key, digests)
    witness = ZkWitness(tuple((secrets[c].preimage(0), secrets[c].preimage(1)) for c in (0, 1)))
    state = tensor(block_state(0, secrets[0]), block_state(1, secrets[1]))
    return BitOtAliceState(b, secrets, statement, witness, state)


def bit_ot_alice(chan: Channel, b: int, config: SessionConfig, backend: ZkBackend,
                 rngs: PartyRngs) -> PartyResult:
    if b not in (0, 1):
        raise LocalAbort("alice-input")
    key = _key_alice(chan, config)
    prep = bit_ot_alice_prepare(b, key, rngs.main)
    payload = _prove(backend, prep.statement, prep.witness, rngs.zk)
    send_prover_message(chan, config, key, prep.statement.digests, backend, payload, prep.state)
    svals = decode_svec(key.witness_len, chan.recv_expect(FrameType.SVEC), 2)
    z = decode_bits(chan.recv_expect(FrameType.ZVEC), 2)
    out = decode_phase(prep.secrets[b], svals[b], z[b])
    return PartyResult(out, extra={"key": key})


def bob_check_blocks(state: SparseState, digests, indices, key: HashKey,
                     rng: np.random.Generator) -> tuple[SparseState, list[int]]:
    """verify_and_shrink every block in order; abort on the first flag 0."""
    svals = []
    for c, (h0, h1) in zip(indices, digests):
        res = verify_and_shrink(state, HashedQubitBlock(c, h0, h1), key, rng)
        if not res.passed:
            raise LocalAbort(f"flag-check:{c}")
        state = res.state
        svals.append(res.s)
    return state, svals


def rotate_and_read(state: SparseState, register: str, m: int, rng: np.random.Generator):
    """``Z^m`` then a Hadamard-basis read-out of a one-qubit register."""
    state = apply_z(state, register, 1, m)
    rec, state = measure_hadamard_register(state, register, rng, discard=True)
    return rec.outcome, state


def bit_ot_bob(chan: Channel, m: tuple[int, int], config: SessionConfig, backend: ZkBackend,
               rngs: PartyRngs) -> PartyResult:
    if m is None or len(m) != 2 or any(v not in (0, 1) for v in m):
        raise LocalAbort("bob-input")
    key = _key_bob(chan, config, rngs.zk)
    digests, zk_payload, qstate = recv_prover_message(chan, config, key, 2, backend)
    statement = ZkStatement(StatementKind.BIT_OT, key, digests)
    if not backend.verify(statement, zk_payload):
        raise LocalAbort("zk-verify")
    state = decode_qstate(qstate, block_layout((0, 1), key.witness_len))
    state, svals = bob_check_blocks(state, digests, (0, 1), key, rngs.main)
    z = []
    for c in (0, 1):
        zc, state = rotate_and_read(state, data_register(c), m[c], rngs.main)
        z.append(zc)
    chan.send(FrameType.SVEC, encode_svec(key.witness_len, svals))
    chan.send(FrameType.ZVEC, encode_bits(z))
    chan.flush()
    return PartyResult("ack")


def _session_backend(config: SessionConfig, backend: Optional[ZkBackend]) -> ZkBackend:
    return backend or make_backend(config.zk_backend, fzk=IdealZk(), repetitions=config.repetitions)


def bit_ot_bodies(b: Optional[int], m: Optional[tuple[int, int]], config: SessionConfig,
                  backend: Optional[ZkBackend] = None) -> tuple[PartyBody, PartyBody]:
    """Alice and Bob as channel callables; either input may be None when only
    the other side runs in this process."""
    config = config.replace(n=2, predicate=None)
    backend = _session_backend(config, backend)
    rngs = party_rngs(config.seed)
    return (lambda ch: bit_ot_alice(ch, b, config, backend, rngs["alice"]),
            lambda ch: bit_ot_bob(ch, m, config, backend, rngs["bob"]))


def run_bit_ot(b: int, m: tuple[int, int], config: SessionConfig,
               channel: str | tuple[Channel, Channel] = "mem",
               backend: Optional[ZkBackend] = None) -> SessionResult:
    return run_session(*bit_ot_bodies(b, m, config, backend), channel)


# -- semi-collapse ZKoQS ----------------------------------------------------


def honest_input_state(n: int, measured: frozenset[int], rng: np.random.Generator
                       ) -> tuple[SparseState, list[int]]:
    """``|a_i>`` with uniform ``a_i`` on ``T`` and ``|+>`` elsewhere, on ``Q1..Qn``.

    With ``|+>`` inputs the prover's phase bits ``omega_s`` name the residual
    Hadamard-basis states exactly.
    """
    a = [rand_bit(rng) if i in measured else 0 for i in range(1, n + 1)]
    return product_input_state(n, measured, a), a


def product_input_state(n: int, measured: frozenset[int], a: list[int]) -> SparseState:
    layout = RegisterLayout(tuple((f"Q{i}", 1) for i in range(1, n + 1)))
    state = SparseState.basis_state(layout, {f"Q{i}": a[i - 1] for i in range(1, n + 1)})
    for i in range(1, n + 1):
        if i not in measured:
            state = apply_h(state, f"Q{i}", 1)
    return state


@dataclass
class ZkoqsProverState:
    measured: frozenset[int]
    secrets: dict[int, BlockSecrets]
    r: dict[int, int]
    outcomes: dict[int, int]
    statement: ZkStatement
    witness: ZkWitness
    state: SparseState


def zkoqs_prover_prepare(rho: SparseState, measured: frozenset[int], predicate: Predicate,
                         key: HashKey, rng: np.random.Generator) -> ZkoqsProverState:
    """Measure ``T``, rotate the rest, attach witnesses, build statement and witness."""
    n = predicate.n
    wl = key.witness_len
    secrets: dict[int, BlockSecrets] = {}
    r: dict[int, int] = {}
    outcomes: dict[int, int] = {}
    state = rho
    for c in range(1, n + 1):
        if c in measured:
            rec, state = measure_computational(state, f"Q{c}", rng)
            outcomes[c] = rec.outcome
            secrets[c] = sample_secrets(BlockMode.COLLAPSED, wl, rng, l=rec.outcome)
        else:
            r[c] = rand_bit(rng)
            state = apply_z(state, f"Q{c}", 1, r[c])
            secrets[c] = sample_secrets(BlockMode.SUPERPOSED, wl, rng, r=r[c])
    state = rename(state, {f"Q{c}": data_register(c) for c in range(1, n + 1)})
    for c in range(1, n + 1):
        state = attach_witness(state, data_register(c), witness_register(c),
                               secrets[c].w0, secrets[c].w1, wl)
    state = reorder(state, block_layout(range(1, n + 1), wl).names)
    digests = tuple(block_digests(key, secrets[c]) for c in range(1, n + 1))
    statement = ZkStatement(StatementKind.SEMICOLLAPSE, key, digests, predicate)
    witness = ZkWitness(tuple((secrets[c].preimage(0), secrets[c].preimage(1))
                              for c in range(1, n + 1)), frozenset(measured))
    return ZkoqsProverState(frozenset(measured), secrets, r, outcomes, statement, witness, state)


def zkoqs_prover(chan: Channel, config: SessionConfig, predicate: Predicate,
                 measured: frozenset[int], rho: Optional[SparseState], backend: ZkBackend,
                 rngs: PartyRngs) -> tuple[dict[int, int], ZkoqsProverState, HashKey]:
    """Prover side; returns ``omega_s`` as ``{i: bit}`` for ``i`` outside ``T``."""
    if not predicate(measured):
        raise LocalAbort("predicate")
    key = _key_alice(chan, config)
    if rho is None:
        rho, _ = honest_input_state(predicate.n, measured, rngs.main)
    prep = zkoqs_prover_prepare(rho, measured, predicate, key, rngs.main)
    payload = _prove(backend, prep.statement, prep.witness, rngs.zk)
    send_prover_message(chan, config, key, prep.statement.digests, backend, payload, prep.state)
    svals = decode_svec(key.witness_len, chan.recv_expect(FrameType.SVEC), predicate.n)
    omega = {c: phase_bit(prep.secrets[c], svals[c - 1])
             for c in range(1, predicate.n + 1) if c not in measured}
    return omega, prep, key


def zkoqs_verifier(chan: Channel, config: SessionConfig, predicate: Predicate,
                   backend: ZkBackend, rngs: PartyRngs) -> tuple[SparseState, list[int], HashKey]:
    """Verifier side; returns the residual state on ``D1..Dn`` and the ``s`` values."""
    n = predicate.n
    key = _key_bob(chan, config, rngs.zk)
    digests, zk_payload, qstate = recv_prover_message(chan, config, key, n, backend)
    statement = ZkStatement(StatementKind.SEMICOLLAPSE, key, digests, predicate)
    if not backend.verify(statement, zk_payload):
        raise LocalAbort("zk-verify")
    state = decode_qstate(qstate, block_layout(range(1, n + 1), key.witness_len))
    state, svals = bob_check_blocks(state, digests, range(1, n + 1), key, rngs.main)
    chan.send(FrameType.SVEC, encode_svec(key.witness_len, svals))
    chan.flush()
    return state, svals, key


def zkoqs_bodies(measured, config: SessionConfig, rho: Optional[SparseState] = None,
                 backend: Optional[ZkBackend] = None) -> tuple[PartyBody, PartyBody]:
    if config.predicate is None:
        raise StructuralError("ZKoQS needs a predicate on T")
    predicate = config.predicate
    measured = frozenset(measured or ())
    backend = _session_backend(config, backend)
    rngs = party_rngs(config.seed)

    def alice(ch):
        omega, prep, _ = zkoqs_prover(ch, config, predicate, measured, rho, backend, rngs["alice"])
        return PartyResult(omega, extra={"prep": prep})

    def bob(ch):
        state, svals, _ = zkoqs_verifier(ch, config, predicate, backend, rngs["bob"])
        return PartyResult(state, extra={"s": svals})

    return alice, bob


def run_zkoqs_semicollapse(measured, config: SessionConfig, rho: Optional[SparseState] = None,
                           channel: str | tuple[Channel, Channel] = "mem",
                           backend: Optional[ZkBackend] = None) -> SessionResult:
    """Prover output: ``omega_s`` (dict). Verifier output: residual SparseState."""
    return run_session(*zkoqs_bodies(measured, config, rho, backend), channel)


# -- predicate OT -----------------------------------------------------------


def predicate_ot_bodies(chosen, messages: Optional[list[int]], config: SessionConfig,
                        backend: Optional[ZkBackend] = None) -> tuple[PartyBody, PartyBody]:
    if config.predicate is None:
        raise StructuralError("predicate OT needs a predicate on B")
    pred_b = config.predicate
    n = pred_b.n
    backend = _session_backend(config, backend)
    rngs = party_rngs(config.seed)

    def alice(ch):
        if chosen is None or not pred_b(chosen):
            raise LocalAbort("predicate")
        chosen_set = frozenset(chosen)
        measured = frozenset(range(1, n + 1)) - chosen_set
        r = [rand_bit(rngs["alice"].main) for _ in range(n)]
        rho = product_input_state(n, measured, r)
        omega, prep, _ = zkoqs_prover(ch, config, pred_b.complement(), measured, rho, backend,
                                      rngs["alice"])
        z = decode_bits(ch.recv_expect(FrameType.ZVEC), n)
        out = {i: r[i - 1] ^ omega[i] ^ z[i - 1] for i in sorted(chosen_set)}
        return PartyResult(out)

    def bob(ch):
        if messages is None or len(messages) != n or any(v not in (0, 1) for v in messages):
            raise LocalAbort("bob-input")
        state, _, _ = zkoqs_verifier(ch, config, pred_b.complement(), backend, rngs["bob"])
        z = []
        for c in range(1, n + 1):
            zc, state = rotate_and_read(state, data_register(c), messages[c - 1], rngs["bob"].main)
            z.append(zc)
        ch.send(FrameType.ZVEC, encode_bits(z))
        ch.flush()
        return PartyResult("ack")

    return alice, bob


def run_predicate_ot(chosen, messages: list[int], config: SessionConfig,
                     channel: str | tuple[Channel, Channel] = "mem",
                     backend: Optional[ZkBackend] = None) -> SessionResult:
    """Alice picks ``B`` with ``Pred(B)``; she learns ``(m_i)_{i in B}`` as a dict."""
    return run_session(*predicate_ot_bodies(chosen, messages, config, backend), channel)


def string_ot_config(m: int, **kw) -> SessionConfig:
    from .predicates import string_ot
    return SessionConfig(n=2 * m, predicate=string_ot(m), **kw)


def k_out_of_n_config(k: int, l: int, m: int, **kw) -> SessionConfig:
    from .predicates import k_out_of_n
    return SessionConfig(n=l * m, predicate=k_out_of_n(k, l, m), **kw)
