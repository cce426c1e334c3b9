"""Acceptance suite: one PASS/FAIL line per criterion.

Run under pytest (lines appear in the terminal summary) or directly with
``python tests/test_acceptance.py``. Every check compares against an oracle
that shares no code with the component under test where one exists:
closed forms, numpy eigenvalues, the dense simulator in ``helpers``, or
set-theoretic predicate definitions.
"""

from __future__ import annotations

import itertools
import math
import sys
import time
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from helpers import dense_vec, full_op, run_random_program  # noqa: E402
from qotlab.functionalities import check_postponable, check_semicollapsed_membership  # noqa: E402
from qotlab.harness import (  # noqa: E402
    binomial_stderr,
    game_g1,
    game_g4,
    projection_trace_distance,
    run_attack,
)
from qotlab.predicates import any_subset, k_out_of_n, k_out_of_n_choices, singleton, string_ot  # noqa: E402
from qotlab.protocols import (  # noqa: E402
    SessionConfig,
    bit_ot_alice_prepare,
    k_out_of_n_config,
    run_bit_ot,
    run_predicate_ot,
    run_zkoqs_semicollapse,
    string_ot_config,
)
from qotlab.qsim import pure_density, to_density_matrix  # noqa: E402
from qotlab import hashfam  # noqa: E402
from qotlab.zk import RandomOracle, nizk_extract, nizk_prove, nizk_verify, relation_check  # noqa: E402

RESULTS: dict[int, tuple[bool, str]] = {}


def record(n: int, ok: bool, detail: str) -> None:
    RESULTS[n] = (ok, detail)
    print(f"criterion {n:2d} {'PASS' if ok else 'FAIL'}: {detail}")


def eig_trace_distance(a: np.ndarray, b: np.ndarray) -> float:
    return 0.5 * float(np.sum(np.abs(np.linalg.eigvalsh(a - b))))


# -- criteria -----------------------------------------------------------------


def criterion_1():
    grid = [("ideal", wl, fh, 100) for wl in (8, 64, 160) for fh in ("crs", "plain")]
    grid += [("nizk", wl, fh, 100) for wl in (8, 16) for fh in ("crs", "plain")]
    runs = wrong = aborts = 0
    timing = {"ideal": 0.0, "nizk": 0.0}
    for zk, wl, fh, count in grid:
        profile = "toy" if wl <= 16 else "demo"
        t0 = time.perf_counter()
        for k in range(count):
            seed = runs
            b, m = k & 1, ((k >> 1) & 1, (k >> 2) & 1)
            res = run_bit_ot(b, m, SessionConfig(zk_backend=zk, fh_mode=fh, hash_profile=profile,
                                                 witness_len=wl, seed=seed))
            runs += 1
            if res.aborted:
                aborts += 1
            elif res.alice.output != m[b]:
                wrong += 1
        timing[zk] += time.perf_counter() - t0
    ok = runs == 1000 and wrong == 0 and aborts == 0 and timing["ideal"] < 60 and timing["nizk"] < 600
    return ok, (f"{runs} runs, {wrong} wrong, {aborts} aborts; ideal {timing['ideal']:.1f}s, "
                f"nizk {timing['nizk']:.1f}s")


def criterion_2():
    counts = {}
    for fh in ("crs", "plain"):
        res = run_bit_ot(1, (0, 1), SessionConfig(zk_backend="nizk", fh_mode=fh, seed=2))
        counts[fh] = res.transcript.message_count
    return counts == {"crs": 2, "plain": 3}, f"messages {counts}"


def criterion_3():
    runs = bad = 0
    for m in (1, 2, 3):
        for msgs in itertools.product((0, 1), repeat=2 * m):
            for half in (0, 1):
                chosen = set(range(half * m + 1, half * m + m + 1))
                res = run_predicate_ot(chosen, list(msgs), string_ot_config(m, seed=runs))
                runs += 1
                bad += res.alice.output != {i: msgs[i - 1] for i in chosen}
    for l in (1, 2):
        for blocks in (1, 2, 3):
            for k in range(0, min(2, blocks) + 1):
                for msgs in itertools.product((0, 1), repeat=l * blocks):
                    for chosen in k_out_of_n_choices(k, l, blocks):
                        res = run_predicate_ot(chosen, list(msgs), k_out_of_n_config(k, l, blocks, seed=runs))
                        runs += 1
                        bad += res.alice.output != {i: msgs[i - 1] for i in chosen}
    return bad == 0, f"{runs} string/k-of-n runs, {bad} wrong"


def criterion_4():
    rng = np.random.default_rng(2024)
    amp = dist = 0.0
    for _ in range(500):
        a, d = run_random_program(rng)
        amp, dist = max(amp, a), max(dist, d)
    return amp <= 1e-9 and dist <= 1e-12, f"500 programs, max amplitude gap {amp:.1e}, max probability gap {dist:.1e}"


def criterion_5():
    rng = np.random.default_rng(5)
    worst = 0.0
    for beta in [k / 10 for k in range(11)]:
        for _ in range(100):
            td, _ = projection_trace_distance(beta, rng=rng)
            worst = max(worst, abs(td - math.sqrt(beta)))
    return worst <= 1e-9, f"1100 instances, max |TD - sqrt(beta)| = {worst:.1e}"


def criterion_6():
    worst = 0.0
    for wl in (2, 3, 4, 5):
        rep = game_g1(witness_len=wl, rng=wl, pairs=25)
        for case in rep.cases:
            dim = 1 << (1 + wl)
            ex, ey = np.eye(dim)[case["x"]], np.eye(dim)[case["y"]]
            mixed = 0.5 * (np.outer(ex, ex) + np.outer(ey, ey))
            plus, minus = (ex + ey) / math.sqrt(2), (ex - ey) / math.sqrt(2)
            rotated = 0.5 * (np.outer(plus, plus) + np.outer(minus, minus))
            worst = max(worst, eig_trace_distance(mixed, rotated), case["td"])
    return worst < 1e-12, f"100 pairs at widths 3..6, max TD {worst:.1e}"


def criterion_7():
    rep = game_g4(rng=7, instances=10)
    worst = max(c["td"] - 2 * math.sqrt(c["beta"]) for c in rep.cases)
    closed = max(abs(c["td"] - 2 * math.sqrt(c["beta"] * (1 - c["beta"]))) for c in rep.cases)
    ok = rep.holds and worst <= 1e-9 and closed <= 1e-9
    return ok, f"{len(rep.cases)} states, max TD - 2sqrt(beta) = {worst:.2e}, closed-form gap {closed:.1e}"


def criterion_8():
    parts = []
    ok = True
    for beta in (0.25, 0.5):
        rep = run_attack("zk_in_superposition", trials=2000, rng=8, beta=beta)
        p = rep.frequencies["collision_rate"]
        floor = beta - 3 * binomial_stderr(beta, 2000)
        ok &= p >= floor
        parts.append(f"beta={beta}: {p:.4f} (floor {floor:.4f})")
    return ok, "; ".join(parts)


def criterion_9():
    gap = td = 0.0
    same = True
    cases = 0
    for n in (1, 2, 3):
        for pred in (any_subset(n), singleton(n)):
            rep = check_postponable(pred)
            # both regimes: some qubits measured, some rotated
            same &= any(c["T"] for c in rep.cases) and any(len(c["T"]) < n for c in rep.cases)
            same &= rep.outcome_sets_equal
            gap, td = max(gap, rep.max_probability_gap), max(td, rep.max_trace_distance)
            cases += len(rep.cases)
    ok = same and gap <= 1e-12 and td <= 1e-9
    return ok, f"{cases} generator cases, probability gap {gap:.1e}, TD {td:.1e}"


def _cnot(vec, n, control, target):
    out = np.zeros_like(vec)
    for i, a in enumerate(vec):
        bits = list(format(i, f"0{n}b"))
        if bits[control] == "1":
            bits[target] = "1" if bits[target] == "0" else "0"
        out[int("".join(bits), 2)] += a
    return out


def _ry(theta):
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    return np.array([[c, -s], [s, c]])


def criterion_10():
    rng = np.random.default_rng(10)
    preds = [singleton(2), singleton(3), singleton(4), string_ot(2), k_out_of_n(1, 2, 2)]
    honest_ok = perturbed_rejected = 0
    for trial in range(500):
        pred = preds[trial % len(preds)]
        n = pred.n
        choices = pred.true_sets()
        t = choices[int(rng.integers(len(choices)))]
        cfg = SessionConfig(n=n, predicate=pred, seed=trial)
        res = run_zkoqs_semicollapse(t, cfg)
        names = [f"D{i}" for i in range(1, n + 1)]
        rho = to_density_matrix(res.bob.output, names)
        rep = check_semicollapsed_membership(rho, pred, claimed=(t, res.alice.output))
        honest_ok += bool(rep.in_subclass)
        # perturb every qubit of T: entangle it with a Hadamard-basis partner or tilt it off-basis
        assert list(res.bob.output.layout.names) == names
        vec = dense_vec(res.bob.output)
        partners = [i for i in range(1, n + 1) if i not in t]
        for j, q in enumerate(sorted(t)):
            if trial % 2 == 0 and j < len(partners):
                vec = _cnot(vec, n, partners[j] - 1, q - 1)
            else:
                vec = full_op(n, q - 1, _ry(float(rng.uniform(0.2, math.pi - 0.2)))) @ vec
        bad = check_semicollapsed_membership(pure_density(vec), pred)
        perturbed_rejected += not bad.in_language
    ok = honest_ok == 500 and perturbed_rejected == 500
    return ok, f"honest in sub-class {honest_ok}/500, perturbed rejected {perturbed_rejected}/500"


def criterion_11():
    rep = run_attack("bob_basis_probe", trials=5000, rng=11)
    p = rep.frequencies["guess_rate"]
    return abs(p - 0.5) <= 0.03, f"guess rate {p:.4f} over 5000 trials, |p - 0.5| = {abs(p - 0.5):.4f}"


def criterion_12():
    complete = accepted_mutants = extracted = 0
    proofs = []
    for seed in range(200):
        key = hashfam.gen("toy", 8, np.random.default_rng(seed))
        prep = bit_ot_alice_prepare(seed & 1, key, np.random.default_rng(10_000 + seed))
        ro = RandomOracle(seed.to_bytes(4, "big"))
        proof = nizk_prove(prep.statement, prep.witness, ro, np.random.default_rng(seed))
        complete += nizk_verify(prep.statement, proof.to_bytes(), ro.fork())
        proofs.append((prep.statement, proof, ro))
    rng = np.random.default_rng(12)
    for k in range(1000):
        stmt, proof, ro = proofs[k % 200]
        raw = bytearray(proof.to_bytes())
        pos = int(rng.integers(len(raw) * 8))
        raw[pos // 8] ^= 1 << (pos % 8)
        accepted_mutants += nizk_verify(stmt, bytes(raw), ro.fork())
    for stmt, proof, ro in proofs[:100]:
        wit = nizk_extract(stmt, proof, ro)
        extracted += wit is not None and relation_check(stmt, wit)
    ok = complete == 200 and accepted_mutants == 0 and extracted == 100
    return ok, f"completeness {complete}/200, mutants accepted {accepted_mutants}/1000, extracted {extracted}/100"


CRITERIA = {n: globals()[f"criterion_{n}"] for n in range(1, 13)}


@pytest.mark.parametrize("number", sorted(CRITERIA))
def test_criterion(number):
    ok, detail = CRITERIA[number]()
    record(number, ok, detail)
    assert ok, detail


if __name__ == "__main__":
    failed = 0
    for number, fn in CRITERIA.items():
        ok, detail = fn()
        record(number, ok, detail)
        failed += not ok
    sys.exit(1 if failed else 0)
