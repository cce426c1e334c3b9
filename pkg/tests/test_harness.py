import csv
import io
import json
import math

import numpy as np
import pytest

from qotlab import hashfam
from qotlab.errors import StructuralError
from qotlab.harness import (
    WorldOutcome,
    binomial_stderr,
    collision_extraction_trial,
    default_attack_config,
    dual_superposition_trial,
    estimate_distinguishing_advantage,
    find_collision_plant,
    flag_world,
    game_g1,
    game_g4,
    mixture_pair_matrices,
    planted_rotation_distance,
    projection_trace_distance,
    run_attack,
    run_hybrid_game,
)
from qotlab.qsim import trace_distance


def test_naive_plus_always_rejected():
    rep = run_attack("naive_plus", trials=300, rng=0)
    assert rep.frequencies["rejection_rate"] == 1.0 and rep.holds
    assert any("registered strategies" in n for n in rep.notes)


def test_dual_superposition_born_rule():
    rep = run_attack("dual_superposition", trials=2000, rng=1)
    assert abs(rep.frequencies["pass_rate"] - 0.5) <= 0.05
    assert rep.frequencies["collapsed_given_pass"] == 1.0


def test_dual_superposition_trial_rate_tracks_beta():
    key = hashfam.gen("toy", 8, np.random.default_rng(0))
    rng = np.random.default_rng(1)
    for beta in (0.0, 0.2, 1.0):
        passes = sum(dual_superposition_trial(key, beta, rng)[0] for _ in range(500))
        assert abs(passes / 500 - (1 - beta)) <= 4 * binomial_stderr(max(min(1 - beta, 0.99), 0.01), 500)


def test_collision_plant_is_a_real_collision():
    cfg = default_attack_config(output_len=6)
    plant = find_collision_plant(cfg, np.random.default_rng(0))
    key = plant.key
    assert plant.x_star != plant.x_prime
    assert (plant.x_prime >> (key.witness_len - 1)) & 1 == 0
    assert hashfam.eval_hash(key, plant.x_star) == hashfam.eval_hash(key, plant.x_prime)
    rng = np.random.default_rng(2)
    # all weight on the colliding branch: every trial passes and yields a collision
    assert all(collision_extraction_trial(plant, 1.0, rng) == (True, True) for _ in range(50))
    assert not any(collision_extraction_trial(plant, 0.0, rng)[1] for _ in range(50))


@pytest.mark.parametrize("beta", [0.25, 0.5])
def test_collision_extraction_meets_beta(beta):
    rep = run_attack("zk_in_superposition", trials=1000, rng=3, beta=beta)
    p = rep.frequencies["collision_rate"]
    assert p >= beta - 3 * binomial_stderr(beta, 1000)


def test_bob_basis_probe_near_half():
    rep = run_attack("bob_basis_probe", trials=1500, rng=4)
    assert abs(rep.frequencies["guess_rate"] - 0.5) <= 3 * binomial_stderr(0.5, 1500)


def test_unknown_strategy_and_game():
    with pytest.raises(StructuralError):
        run_attack("nope")
    with pytest.raises(StructuralError):
        run_hybrid_game("g9")


def test_report_serialisation_embeds_config():
    rep = run_attack("naive_plus", trials=20, rng=5)
    d = json.loads(rep.to_json())
    assert d["config"]["zk_backend"] == "ideal" and d["seed"] == 5
    rows = list(csv.reader(io.StringIO(rep.to_csv())))
    assert rows[0][0] == "strategy" and len(rows) >= 2


def test_mixture_pair_matrices_oracle():
    rho_l, rho_r = mixture_pair_matrices(3, 12, 4)
    ex, ey = np.eye(16)[3], np.eye(16)[12]
    want = 0.5 * (np.outer(ex, ex) + np.outer(ey, ey))
    assert np.allclose(rho_l.entries, want) and np.allclose(rho_r.entries, want)
    assert trace_distance(rho_l, rho_r) < 1e-12


def test_games_hold():
    assert game_g1(witness_len=4, pairs=30).holds
    for gid in ("g2", "g3"):
        assert run_hybrid_game(gid).holds
    rep = game_g4(betas=[0.0, 0.25, 1.0])
    assert rep.holds
    assert all(c["td"] <= c["bound"] + 1e-9 for c in rep.cases)


@pytest.mark.parametrize("beta", [0.0, 0.1, 0.25, 0.5, 0.9, 1.0])
def test_planted_rotation_matches_closed_form(beta):
    td, exact = planted_rotation_distance(beta, rng=int(beta * 10))
    assert td == pytest.approx(exact, abs=1e-12)
    assert td <= 2 * math.sqrt(beta) + 1e-9


@pytest.mark.parametrize("beta", [0.0, 0.3, 0.7, 1.0])
def test_projection_distance_is_sqrt_beta(beta):
    rng = np.random.default_rng(0)
    for _ in range(20):
        td, want = projection_trace_distance(beta, rng=rng)
        assert abs(td - want) <= 1e-9


def test_advantage_identical_worlds():
    world = lambda rng: WorldOutcome({"bit": int(rng.integers(2))})
    adv, se = estimate_distinguishing_advantage(world, world, lambda o: o.outputs["bit"], 2000, 0)
    assert abs(adv) <= 3 * se


def test_advantage_deterministic_gap():
    one = lambda rng: WorldOutcome({"bit": 1})
    zero = lambda rng: WorldOutcome({"bit": 0})
    adv, se = estimate_distinguishing_advantage(one, zero, lambda o: o.outputs["bit"], 100, 0)
    assert adv == 1.0 and se == 0.0


def test_flag_world_trend_is_reported():
    # computational step: printed as a trend, not asserted
    advs = []
    for wl in (8, 16):
        key = hashfam.gen("toy", wl, np.random.default_rng(wl))
        dist = lambda o: o.outputs["digest"] & 1
        adv, se = estimate_distinguishing_advantage(flag_world(key, 0), flag_world(key, 1), dist, 2000, wl)
        advs.append((wl, round(adv, 4), round(se, 4)))
    print("flag-world low-bit advantage (width, adv, se):", advs)
