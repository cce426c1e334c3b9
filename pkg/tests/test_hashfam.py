import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qotlab import hashfam
from qotlab.errors import CapabilityError, ProtocolError, StructuralError
from qotlab.hashfam import HashKey, Preimage
from qotlab.harness import best_linear_flag_advantage
from qotlab.net import mem_pair


def test_gen_parameter_plumbing():
    rng = np.random.default_rng(0)
    k = hashfam.gen("toy", 16, rng)
    assert (k.input_len, k.output_len, k.witness_len) == (17, 16, 16)
    d = hashfam.gen("demo", 128, rng, witness_len=160)
    assert (d.input_len, d.output_len) == (161, 320)
    assert hashfam.is_valid_key(k) and hashfam.is_valid_key(d)


def test_same_seed_same_key():
    a = hashfam.gen("toy", 8, np.random.default_rng(4))
    b = hashfam.gen("toy", 8, np.random.default_rng(4))
    assert a == b
    assert HashKey.from_json(a.to_json()) == a


def test_toy_input_cap():
    with pytest.raises(StructuralError):
        hashfam.gen("toy", 24, np.random.default_rng(0))


def test_eval_deterministic_and_length_checked():
    k = hashfam.gen("demo", 64, np.random.default_rng(1), witness_len=64)
    x = (1 << 64) | 12345
    assert hashfam.eval_hash(k, x) == hashfam.eval_hash(k, x)
    assert hashfam.eval_hash(k, x) >> k.output_len == 0
    with pytest.raises(StructuralError):
        hashfam.eval_hash(k, 1 << 65)


def test_toy_vectorised_matches_scalar():
    k = hashfam.gen("toy", 10, np.random.default_rng(2))
    table = hashfam.all_digests(k)
    for x in range(0, 1 << k.input_len, 37):
        assert int(table[x]) == hashfam.eval_hash(k, x)


def test_preimage_enumeration_is_complete():
    k = hashfam.gen("toy", 8, np.random.default_rng(3), output_len=6)
    target = hashfam.eval_hash(k, 77)
    found = hashfam.preimages(k, target)
    assert 77 in found
    assert found == [x for x in range(1 << k.input_len) if hashfam.eval_hash(k, x) == target]


def test_preimage_layout():
    p = Preimage.from_w(1, 0b1011, 4)
    assert (p.data_bit, p.flag_bit, p.tail) == (1, 1, 0b011)
    assert p.to_int() == 0b11011
    assert Preimage.from_int(p.to_int(), 5) == p


def test_collision_search():
    rng = np.random.default_rng(5)
    comp = hashfam.gen("toy", 8, rng, output_len=6)
    x, y = hashfam.find_collision_bruteforce(comp)
    assert x != y and hashfam.eval_hash(comp, x) == hashfam.eval_hash(comp, y)
    # an injective instance: the toy SPN is a permutation when output_len >= input_len
    inj = hashfam.gen("toy", 8, rng, output_len=9)
    table = hashfam.all_digests(inj)
    assert len(set(table.tolist())) == table.size
    assert hashfam.find_collision_bruteforce(inj) is None
    with pytest.raises(CapabilityError):
        hashfam.find_collision_bruteforce(hashfam.gen("demo", 16, rng, witness_len=16))


def test_crs_distribution_sends_nothing():
    ca, cb = mem_pair()
    seed = bytes(range(32))
    ka = hashfam.f_h_distribute("crs", ca, "alice", profile="toy", witness_len=8, crs_seed=seed)
    kb = hashfam.f_h_distribute("crs", cb, "bob", profile="toy", witness_len=8, crs_seed=seed)
    assert ka == kb
    assert ca.message_count == cb.message_count == 0


def test_plain_distribution_one_message_and_validation():
    ca, cb = mem_pair()
    kb = hashfam.f_h_distribute("plain", cb, "bob", profile="toy", witness_len=8,
                                rng=np.random.default_rng(0))
    ka = hashfam.f_h_distribute("plain", ca, "alice", profile="toy", witness_len=8)
    assert ka == kb and cb.message_count == 1
    # corrupted tag fails membership
    bad = HashKey(kb.profile, kb.key_bytes[:-1] + bytes([kb.key_bytes[-1] ^ 1]), kb.input_len, kb.output_len)
    assert not hashfam.is_valid_key(bad)
    from qotlab.wire import FrameType
    cb.send(FrameType.HASHKEY, bad.to_json().encode())
    cb.flush()
    with pytest.raises(ProtocolError):
        hashfam.f_h_distribute("plain", ca, "alice", profile="toy", witness_len=8)


@settings(max_examples=50, deadline=None)
@given(seed=st.binary(min_size=32, max_size=32), wl=st.integers(2, 20))
def test_key_membership_round_trip(seed, wl):
    k = hashfam.key_from_seed("toy", seed, wl)
    assert hashfam.is_valid_key(k)
    assert HashKey.from_json(k.to_json()) == k


def test_flag_bit_linear_bias_report():
    # soft check: print the best parity bias, fail only on a gross leak
    biases = []
    for width in (8, 16):
        k = hashfam.gen("toy", width, np.random.default_rng(width))
        biases.append(best_linear_flag_advantage(k))
    print("best linear flag bias at widths 8, 16:", biases)
    assert max(biases) < 0.5
