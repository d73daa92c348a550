import json
import math

import pytest

import lhvswap


def test_closed_forms():
    assert lhvswap.singlet_correlation((0, 0), (60, 0)) == pytest.approx(-0.5)
    assert lhvswap.partial_swap_singlet_prob(1.0) == pytest.approx(0.25)
    assert lhvswap.partial_swap_visibility(1.0) == pytest.approx(0.75)
    assert lhvswap.quantum_outcome_correlation("psi_minus", (0, 0), (0, 0)) == pytest.approx(-1.0)


def test_unknown_outcome_rejected():
    with pytest.raises(ValueError):
        lhvswap.quantum_outcome_correlation("psi", (0, 0), (0, 0))


def test_run_is_deterministic():
    config = json.dumps(
        {"scenario": "partial_swap", "eta": 1, "samples": 2000, "seed": 7, "shards": 3,
         "alice": "0,0", "bob": ["60,0", "90,45"]}
    )
    first = lhvswap.run(config)
    assert first == lhvswap.run(config)
    assert first.splitlines()[0].startswith("setting")
    assert json.loads(lhvswap.run(config, "json"))["rows"]


def test_bad_config_raises():
    with pytest.raises(lhvswap.ConfigError):
        lhvswap.run(json.dumps({"eta": 2}))


def test_sweep_limit_tracks_oracle():
    rows = lhvswap.sweep_limit([0.0, 0.5, 1.0], 200_000, seed=3, shards=2)
    assert rows[0]["p_result"] == 1.0
    assert rows[2]["p_result"] == 0.0
    oracle = lhvswap.oracle_bell_result_prob(0.5, grid=100)
    assert abs(rows[1]["p_result"] - oracle) < 5 * rows[1]["std_error"] + 2e-3


def test_fidelity_near_one_at_high_limit():
    rows = lhvswap.fidelity_curve([0.99], 300_000, seed=5, shards=2)
    assert rows[0]["fidelity"] == pytest.approx(1.0, abs=0.02)
    assert lhvswap.oracle_fidelity_curve([0.99], grid=60)[0] == pytest.approx(1.0, abs=0.02)


def test_oracle_branch_symmetry():
    a, b = (35, 20), (80, 140)
    lhs = lhvswap.oracle_complete_swap_correlation(0.3, "phi_minus", a, b, grid=20)
    theta, phi = b
    # Rotation by pi about x maps (theta, phi) to (pi - theta, -phi).
    rhs = lhvswap.oracle_complete_swap_correlation(0.3, "psi_minus", a, (180 - theta, -phi), grid=20)
    assert math.isclose(lhs, rhs, abs_tol=1e-12)


def test_verify_rows_pass():
    rows = lhvswap.verify(samples=50_000, oracle_grid=30, oracle_tolerance=2e-2)
    assert rows and all(r["pass"] for r in rows)
