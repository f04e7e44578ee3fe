import numpy as np
import pytest

import rise


def unit(v):
    return v / np.linalg.norm(v)


def test_exp_log_round_trip():
    rng = np.random.default_rng(0)
    n, v = unit(rng.standard_normal(12)), unit(rng.standard_normal(12))
    xi = rise.log_map(n, v)
    assert abs(xi @ n) < 1e-12
    np.testing.assert_allclose(rise.exp_map(n, xi), v, atol=1e-12)
    assert rise.geodesic_distance(n, v) == pytest.approx(np.linalg.norm(xi), abs=1e-12)


def test_rotor_sends_n_to_pole():
    rng = np.random.default_rng(1)
    n = unit(rng.standard_normal(7))
    e1 = np.eye(7)[0]
    for backend in (rise.Backend.householder, rise.Backend.givens, rise.Backend.two_step):
        r = rise.Rotor(n, backend)
        np.testing.assert_allclose(r.apply(n), e1, atol=1e-12)
        np.testing.assert_allclose(r.apply_transpose(r.apply(n)), n, atol=1e-12)
    assert rise.Rotor(e1).kind == "identity"


def test_planted_recovery_and_prediction():
    neutral, variant, truth = rise.synth(dim=16, n_pairs=60, magnitude=0.3, seed=4)
    p = rise.learn_prototype(neutral, variant, phenomenon="planted")
    np.testing.assert_allclose(p.vec, truth.vec, atol=1e-9)
    assert p.pair_count == 60
    assert p.phenomenon == "planted"
    np.testing.assert_allclose(rise.predict_batch(neutral, p), variant, atol=1e-9)
    report = rise.score(neutral, variant, p)
    assert report.mean == pytest.approx(1.0, abs=1e-12)
    assert report.n == 60


def test_baseline_identity():
    neutral, variant, truth = rise.synth(dim=32, n_pairs=80, sigma=0.05, seed=2)
    p = rise.learn_prototype(neutral, variant)
    s = rise.score(neutral, variant, p).mean
    b = rise.random_baseline(neutral, variant, s, p.magnitude, trials=50, seed=1)
    assert b["advantage_ratio"] * b["random_mean"] == pytest.approx(s, abs=1e-12)
    assert b["advantage_ratio"] > 1.0


def test_commutativity_gap_vanishes_for_zero():
    rng = np.random.default_rng(3)
    n0 = unit(rng.standard_normal(8))
    _, _, b = rise.synth(dim=8, seed=1)
    assert rise.commutativity_gap(n0, rise.Prototype.zero(8), b) == 0.0


def test_prototype_json_round_trip(tmp_path):
    _, _, truth = rise.synth(dim=10, seed=7)
    truth.language = "de"
    path = tmp_path / "p.json"
    truth.save(path)
    assert rise.Prototype.load(path) == truth
    assert rise.Prototype.from_json(truth.to_json()) == truth


def test_identity_map_ports_unchanged():
    rng = np.random.default_rng(5)
    anchors = np.array([unit(rng.standard_normal(6)) for _ in range(20)])
    m = rise.fit_map(anchors, anchors)
    np.testing.assert_allclose(m.matrix, np.eye(6), atol=1e-10)
    _, _, p = rise.synth(dim=6, seed=3)
    np.testing.assert_allclose(rise.port_prototype(p, m).vec, p.vec, atol=1e-10)


def test_errors_carry_exit_codes():
    with pytest.raises(rise.RiseError) as info:
        rise.log_map(np.array([1.0, 0.0]), np.array([-1.0, 0.0]))
    assert info.value.code == 6
    with pytest.raises(rise.RiseError) as info:
        rise.normalize(np.zeros(3))
    assert info.value.code == 3
    with pytest.raises(rise.RiseError) as info:
        rise.fit_map(np.eye(4)[:2], np.eye(4)[:2])
    assert info.value.code == 13
