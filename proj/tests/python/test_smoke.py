import math

import pytest

import ladderwalk as lw

STRONG = (0.08, 0.36, 0.21, 0.35)


def strong_env():
    return lw.Environment.homogeneous(lw.SiteLaw(*STRONG))


def test_site_law_fields():
    w = lw.SiteLaw(*STRONG)
    assert w.drift == pytest.approx(0.21 + 0.70 - 0.36 - 0.16)
    assert w.prob(-2) == 0.08
    with pytest.raises(Exception):
        lw.SiteLaw(0.5, 0.5, 0.5, 0.5)


def test_wald_identity_row_one():
    env = strong_env()
    h = lw.homogeneous_root(lw.SiteLaw(*STRONG))
    t1 = lw.expected_t1(env)
    assert t1.converged
    assert t1.value * lw.SiteLaw(*STRONG).drift == pytest.approx(1 - h, abs=1e-9)
    assert 1 - h == pytest.approx(1.467727692, abs=1e-9)


def test_exit_methods_agree_with_oracle():
    env = lw.Environment.periodic([lw.SiteLaw(*STRONG), lw.SiteLaw(0.19, 0.3, 0.3, 0.21)])
    for method in (lw.ExitMethod.Recursive, lw.ExitMethod.TransferMatrix):
        t = lw.exit_probabilities(env, -4, 4, method)
        for k in range(-3, 4):
            assert t.at(k, 4) == pytest.approx(lw.solve_exit(env, -4, 4, k, 4), abs=1e-10)


def test_hitting_limit():
    h = lw.homogeneous_root(lw.SiteLaw(*STRONG))
    p = lw.hit_from_below(strong_env(), 0, 0)
    assert p.converged
    assert p.f1 == pytest.approx(1 + h, abs=1e-9)
    assert p.f2 == pytest.approx(-h, abs=1e-9)


def test_branching_model():
    model = lw.BranchingModel(strong_env())
    q = model.mean_matrix(0)
    assert len(q) == 9 and all(len(row) == 9 for row in q)
    assert sum(model.immigration()) == pytest.approx(1.0)


def test_simulation_is_seeded_and_worker_invariant():
    env = strong_env()
    a = lw.run_ensemble(env, 7, 4000, 1)
    b = lw.run_ensemble(env, 7, 4000, 4)
    assert a == b
    assert a.stopped == 4000
    assert abs(a.mean_t1 - lw.expected_t1(env).value) < 5 * a.se_t1


def test_path_decomposition_identity():
    env = strong_env()
    for seed in range(50):
        path = lw.run_to_ladder(env, seed)
        d = lw.decompose(path)
        assert d.t1 == path.t1
        assert lw.verify_identity(d, path)


def test_point_mass_velocity_is_drift():
    w = lw.SiteLaw(*STRONG)
    v = lw.velocity(lw.EnvLaw.point_mass(w), 4)
    assert v.velocity_drift == pytest.approx(w.drift, abs=1e-8)
    assert math.isfinite(v.velocity_abs)


def test_environment_from_json():
    env = lw.Environment.from_json('{"kind": "periodic", "laws": [{"q2": 0.08, "q1": 0.36, "p1": 0.21, "p2": 0.35}]}')
    assert env.law_at(5) == lw.SiteLaw(*STRONG)
