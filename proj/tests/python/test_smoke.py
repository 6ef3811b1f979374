import math

import pytest

import bomuse


def test_benchmarks():
    assert bomuse.benchmark_names() == ["matyas-2d", "ackley-4d", "rastrigin-5d", "levy-6d"]
    assert bomuse.benchmark_eval("matyas-2d", [0.0, 0.0]) == 0.0
    assert bomuse.benchmark_eval("rastrigin-5d", [1, 0, 0, 0, 0]) == pytest.approx(1.0)
    lo, hi = bomuse.benchmark_bounds("levy-6d")
    assert lo == [-10.0] * 6 and hi == [10.0] * 6
    with pytest.raises(bomuse.InputError):
        bomuse.benchmark_eval("matyas-2d", [0.0])


def test_gp_one_point_closed_form():
    mean, var = bomuse.gp_predict({"family": "squared_exponential", "lengthscale": 1.0},
                                  [[0.0]], [2.0], 1.0, [[0.0]])
    assert mean[0] == pytest.approx(1.0)
    assert var[0] == pytest.approx(0.5)


def test_schedule_functions():
    beta = bomuse.bo_muse_beta(math.exp(-1.0), 0.0, 1.0, 1.0)
    assert beta == pytest.approx(7.0 * (math.sqrt(3.0) + 1.0) ** 2, rel=1e-12)
    assert bomuse.confidence_chi(math.exp(-1.0), 0.0, 1.0, 1.0) == pytest.approx(beta / 7.0)
    assert 7.30 <= bomuse.zeta_lower_bound(math.log(1.5)) <= 7.40
    with pytest.raises(bomuse.DomainError):
        bomuse.zeta_lower_bound(1.0)
    assert bomuse.srinivas_beta(2, 0.1) > bomuse.srinivas_beta(1, 0.1)
    assert bomuse.generalized_mean(-1.0, [1.0, 3.0]) == pytest.approx(1.5)


def test_run_session_is_deterministic():
    cfg = bomuse.default_config("matyas-2d", "bo_muse", seed=3, evaluations=4)
    assert cfg["budget_batches"] == 2
    a = bomuse.run_session(cfg)
    b = bomuse.run_session(cfg)
    assert a["csv"] == b["csv"]
    assert len(a["observations"]) == 7
    assert len(a["records"]) == 2
    regret = a["simple_regret"]
    assert all(x >= y for x, y in zip(regret, regret[1:]))


def test_verify_theory():
    report = bomuse.verify_theory(200)
    assert report["passed"] is True
