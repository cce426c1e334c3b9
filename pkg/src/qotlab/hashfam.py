"""Keyed hash family ``h_k`` and its distribution (CRS or sent by Bob).

Two profiles exist. ``demo`` is a keyed SHA-256 construction in counter mode,
truncated to ``output_len`` bits; nobody is expected to invert it. ``toy`` is
a three-round substitution-permutation network over at most 24 input bits,
small enough that every preimage and collision can be found by enumeration.
The toy network is also the circuit the NIZK backend proves statements about.

Inputs are ``d || w`` packed into an int with ``d`` as the most significant
bit and ``w[1]`` (the dummy flag) right below it.
"""

from __future__ import annotations

import enum
import hashlib
import json
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Optional

import numpy as np

from .errors import CapabilityError, ProtocolError, StructuralError

TOY_MAX_INPUT = 24
TOY_MAX_WIDTH = 32
TOY_ROUNDS = 3
SEED_BYTES = 32
TAG_BYTES = 4
DEFAULT_DEMO_WITNESS = 160
DEFAULT_TOY_WITNESS = 8

# PRESENT 4-bit S-box
SBOX = (0xC, 0x5, 0x6, 0xB, 0x9, 0x0, 0xA, 0xD, 0x3, 0xE, 0xF, 0x8, 0x4, 0x7, 0x1, 0x2)


class Profile(str, enum.Enum):
    DEMO = "demo"
    TOY = "toy"


@dataclass(frozen=True)
class HashKey:
    profile: Profile
    key_bytes: bytes
    input_len: int
    output_len: int

    def __post_init__(self):
        object.__setattr__(self, "profile", Profile(self.profile))
        object.__setattr__(self, "key_bytes", bytes(self.key_bytes))

    @property
    def witness_len(self) -> int:
        """Width of the witness register ``w`` (flag bit included)."""
        return self.input_len - 1

    @property
    def seed(self) -> bytes:
        return self.key_bytes[:SEED_BYTES]

    @cached_property
    def spn(self) -> "ToySpn":
        if self.profile is not Profile.TOY:
            raise CapabilityError("only the toy profile has an SPN description")
        return ToySpn.from_key(self)

    def to_json(self) -> str:
        return json.dumps({
            "profile": self.profile.value,
            "input_len": self.input_len,
            "output_len": self.output_len,
            "key_hex": self.key_bytes.hex(),
        }, sort_keys=True, separators=(",", ":"))

    @classmethod
    def from_json(cls, text: str | bytes) -> "HashKey":
        try:
            obj = json.loads(text)
            return cls(Profile(obj["profile"]), bytes.fromhex(obj["key_hex"]),
                       int(obj["input_len"]), int(obj["output_len"]))
        except (KeyError, ValueError, TypeError) as exc:
            raise StructuralError(f"malformed key JSON: {exc}") from exc


@dataclass(frozen=True)
class Preimage:
    """``d || w`` with ``w = flag || tail``."""

    data_bit: int
    flag_bit: int
    tail: int
    tail_len: int

    @property
    def witness_len(self) -> int:
        return self.tail_len + 1

    @property
    def w(self) -> int:
        return (self.flag_bit << self.tail_len) | self.tail

    def to_int(self) -> int:
        return (self.data_bit << self.witness_len) | self.w

    def bits(self) -> str:
        return format(self.to_int(), f"0{self.witness_len + 1}b")

    @classmethod
    def from_int(cls, x: int, input_len: int) -> "Preimage":
        tail_len = input_len - 2
        return cls((x >> (input_len - 1)) & 1, (x >> tail_len) & 1,
                   x & ((1 << tail_len) - 1), tail_len)

    @classmethod
    def from_w(cls, data_bit: int, w: int, witness_len: int) -> "Preimage":
        tail_len = witness_len - 1
        return cls(data_bit, (w >> tail_len) & 1, w & ((1 << tail_len) - 1), tail_len)


# -- key generation and membership ----------------------------------------


def _tag(profile: Profile, input_len: int, output_len: int, seed: bytes) -> bytes:
    h = hashlib.sha256(b"qotlab/hash-key/v1|")
    h.update(f"{profile.value}|{input_len}|{output_len}|".encode())
    h.update(seed)
    return h.digest()[:TAG_BYTES]


def _check_lengths(profile: Profile, input_len: int, output_len: int) -> None:
    if input_len < 3 or output_len < 1:
        raise StructuralError(f"bad lengths input={input_len} output={output_len}")
    if profile is Profile.TOY:
        if input_len > TOY_MAX_INPUT:
            raise StructuralError(f"toy profile allows input_len <= {TOY_MAX_INPUT}, got {input_len}")
        if output_len > TOY_MAX_WIDTH:
            raise StructuralError(f"toy profile allows output_len <= {TOY_MAX_WIDTH}")


def key_from_seed(profile: Profile | str, seed: bytes, witness_len: int,
                  output_len: Optional[int] = None) -> HashKey:
    profile = Profile(profile)
    if output_len is None:
        output_len = 2 * witness_len if profile is Profile.DEMO else witness_len
    input_len = 1 + witness_len
    _check_lengths(profile, input_len, output_len)
    if len(seed) != SEED_BYTES:
        raise StructuralError(f"seed must be {SEED_BYTES} bytes")
    return HashKey(profile, seed + _tag(profile, input_len, output_len, seed), input_len, output_len)


def gen(profile: Profile | str, security_param: int, rng: np.random.Generator,
        witness_len: Optional[int] = None, output_len: Optional[int] = None) -> HashKey:
    """Sample a key.

    For the toy profile ``witness_len`` defaults to ``security_param`` and the
    digest length to ``witness_len`` (one bit of compression). For the demo
    profile ``witness_len`` defaults to 160 and the digest to twice that.
    """
    profile = Profile(profile)
    if witness_len is None:
        witness_len = security_param if profile is Profile.TOY else DEFAULT_DEMO_WITNESS
    return key_from_seed(profile, rng.bytes(SEED_BYTES), witness_len, output_len)


def crs_key(crs_seed: bytes, profile: Profile | str, witness_len: int,
            output_len: Optional[int] = None) -> HashKey:
    """Key both parties derive from a shared CRS seed (no messages)."""
    seed = hashlib.sha256(b"qotlab/crs->key|" + bytes(crs_seed)).digest()
    return key_from_seed(profile, seed, witness_len, output_len)


def is_valid_key(key: HashKey) -> bool:
    """Decide ``k in K``."""
    try:
        _check_lengths(key.profile, key.input_len, key.output_len)
    except StructuralError:
        return False
    if len(key.key_bytes) != SEED_BYTES + TAG_BYTES:
        return False
    return key.key_bytes[SEED_BYTES:] == _tag(key.profile, key.input_len, key.output_len, key.seed)


# -- evaluation -----------------------------------------------------------


@dataclass(frozen=True)
class ToySpn:
    width: int
    round_keys: tuple[int, ...]  # TOY_ROUNDS + 1 whitening keys
    perm: tuple[int, ...]  # bit j moves to perm[j]
    input_len: int
    output_len: int

    @classmethod
    def from_key(cls, key: HashKey) -> "ToySpn":
        width = max(key.input_len, key.output_len)
        nbytes = (width + 7) // 8
        stream = hashlib.shake_256(b"qotlab/toy-spn|" + key.seed).digest(nbytes * (TOY_ROUNDS + 1))
        mask = (1 << width) - 1
        rks = tuple(int.from_bytes(stream[i * nbytes:(i + 1) * nbytes], "big") & mask
                    for i in range(TOY_ROUNDS + 1))
        mult = next(m for m in range(5, 5 + width + 1) if math.gcd(m, width) == 1)
        perm = tuple((mult * j + 1) % width for j in range(width))
        return cls(width, rks, perm, key.input_len, key.output_len)

    @property
    def n_sboxes(self) -> int:
        return self.width // 4

    def _sub(self, s: int) -> int:
        for k in range(self.n_sboxes):
            nib = (s >> (4 * k)) & 0xF
            s = (s & ~(0xF << (4 * k))) | (SBOX[nib] << (4 * k))
        return s

    def _permute(self, s: int) -> int:
        out = 0
        for j, p in enumerate(self.perm):
            out |= ((s >> j) & 1) << p
        return out

    def __call__(self, x: int) -> int:
        s = x
        for r in range(TOY_ROUNDS):
            s = self._permute(self._sub(s ^ self.round_keys[r]))
        s ^= self.round_keys[TOY_ROUNDS]
        return s & ((1 << self.output_len) - 1)

    def eval_many(self, xs: np.ndarray) -> np.ndarray:
        s = np.asarray(xs, dtype=np.uint64)
        table = np.array(SBOX, dtype=np.uint64)
        for r in range(TOY_ROUNDS):
            s = s ^ np.uint64(self.round_keys[r])
            for k in range(self.n_sboxes):
                sh = np.uint64(4 * k)
                nib = (s >> sh) & np.uint64(0xF)
                s = (s & ~(np.uint64(0xF) << sh)) | (table[nib] << sh)
            out = np.zeros_like(s)
            for j, p in enumerate(self.perm):
                out |= ((s >> np.uint64(j)) & np.uint64(1)) << np.uint64(p)
            s = out
        s = s ^ np.uint64(self.round_keys[TOY_ROUNDS])
        return s & np.uint64((1 << self.output_len) - 1)


def _demo_eval(key: HashKey, x: int) -> int:
    nbytes_in = (key.input_len + 7) // 8
    nblocks = (key.output_len + 255) // 256
    prefix = b"qotlab/demo-h|" + key.key_bytes + key.input_len.to_bytes(2, "big")
    data = x.to_bytes(nbytes_in, "big")
    digest = b"".join(
        hashlib.sha256(prefix + i.to_bytes(2, "big") + data).digest() for i in range(nblocks)
    )
    return int.from_bytes(digest, "big") >> (256 * nblocks - key.output_len)


def eval_hash(key: HashKey, x: int) -> int:
    """``h_k(x)`` for an ``input_len``-bit input, as an ``output_len``-bit int."""
    if not isinstance(x, (int, np.integer)) or x < 0 or int(x) >> key.input_len:
        raise StructuralError(f"input must be a {key.input_len}-bit value")
    if key.profile is Profile.TOY:
        return key.spn(int(x))
    return _demo_eval(key, int(x))


def digest_hex(key: HashKey, digest: int) -> str:
    return digest.to_bytes((key.output_len + 7) // 8, "big").hex()


def all_digests(key: HashKey) -> np.ndarray:
    """Digest of every input, indexed by input (toy profile only)."""
    if key.profile is not Profile.TOY:
        raise CapabilityError("exhaustive evaluation needs the toy profile")
    return key.spn.eval_many(np.arange(1 << key.input_len, dtype=np.uint64))


def preimages(key: HashKey, digest: int) -> list[int]:
    table = all_digests(key)
    return [int(i) for i in np.nonzero(table == np.uint64(digest))[0]]


def find_collision_bruteforce(key: HashKey) -> Optional[tuple[int, int]]:
    """Smallest colliding pair ``x < x'`` over the whole domain, or None."""
    table = all_digests(key)
    order = np.argsort(table, kind="stable")
    sorted_d = table[order]
    hits = np.nonzero(sorted_d[1:] == sorted_d[:-1])[0]
    if hits.size == 0:
        return None
    pairs = []
    for i in hits:
        a, b = int(order[i]), int(order[i + 1])
        pairs.append((min(a, b), max(a, b)))
    return min(pairs)


# -- F_h distribution ----------------------------------------------------


class FhMode(str, enum.Enum):
    CRS = "crs"
    PLAIN = "plain"


def f_h_distribute(mode: FhMode | str, channel, role: str, *, profile: Profile | str,
                   witness_len: int, output_len: Optional[int] = None,
                   rng: Optional[np.random.Generator] = None,
                   crs_seed: Optional[bytes] = None, flush: bool = True) -> HashKey:
    """Give both parties the same key.

    ``crs``: each side derives the key from the shared seed; nothing is sent.
    ``plain``: Bob samples the key and sends one HASHKEY frame; Alice accepts
    it only if it passes the membership test, otherwise ProtocolError.
    ``channel`` is any object with ``send(type, payload)``, ``flush()`` and
    ``recv_expect(type)``.
    """
    from .wire import FrameType

    mode = FhMode(mode)
    if mode is FhMode.CRS:
        if crs_seed is None:
            raise StructuralError("CRS mode needs a crs_seed")
        return crs_key(crs_seed, profile, witness_len, output_len)
    if role == "bob":
        if rng is None:
            raise StructuralError("plain mode sampling needs an rng")
        key = gen(profile, witness_len, rng, witness_len=witness_len, output_len=output_len)
        channel.send(FrameType.HASHKEY, key.to_json().encode())
        if flush:
            channel.flush()
        return key
    payload = channel.recv_expect(FrameType.HASHKEY)
    key = HashKey.from_json(payload)
    if not is_valid_key(key):
        raise ProtocolError("received hash key is not in K")
    if key.profile is not Profile(profile) or key.witness_len != witness_len:
        raise ProtocolError("received hash key does not match the session parameters")
    return key
