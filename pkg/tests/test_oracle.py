import numpy as np
import pytest

from srbrw.core import ModelParams
from srbrw.errors import BudgetExceeded
from srbrw.oracle import (
    OracleConfig,
    action_of_generations,
    brute_force_minimum,
    oracle_minimum,
    verify_structural_claims,
)


@pytest.mark.parametrize(
    "N,beta,q,w",
    [(1, 1.0, 1, 2), (1, 3.0, 2, 2), (2, 1.0, 1, 2), (2, 0.6, 2, 1), (2, 5.0, 1, 1)],
)
def test_oracle_matches_labelling_brute_force(N, beta, q, w):
    cfg = OracleConfig(ModelParams(N, beta, 1.0), window=w, refine=q, budget=10 ** 8)
    assert oracle_minimum(cfg).value == pytest.approx(brute_force_minimum(cfg), abs=1e-12)


def test_argmin_values_are_consistent():
    p = ModelParams(3, 1.0, 1.0)
    res = oracle_minimum(OracleConfig(p, window=4, refine=2))
    assert res.argmin
    for gens in res.argmin:
        assert action_of_generations(gens, p) == pytest.approx(res.value, abs=1e-9)
        assert [len(g) for g in gens] == [2, 4, 8]


def test_argmin_closed_under_reflection():
    p = ModelParams(2, 0.7, 1.0)
    res = oracle_minimum(OracleConfig(p, window=2, refine=2))
    finals = {tuple(np.round(g[-1], 9)) for g in res.argmin}
    for f in finals:
        assert tuple(sorted(np.round(-np.array(f), 9))) in finals


def test_structural_claims_at_n3():
    p = ModelParams(3, 1.0, 1.0)
    for q in (1, 2):
        res = oracle_minimum(OracleConfig(p, window=4, refine=q))
        assert not res.touches_window
        for gens in res.argmin:
            assert verify_structural_claims(gens, 1.0).all_hold


def test_structural_report_detects_off_grid():
    rep = verify_structural_claims([np.array([-1.0, 1.0]), np.array([-1.0, 0.0, 0.0, 1.0])], 1.0)
    assert not rep.grid_supported


def test_budget_guard():
    cfg = OracleConfig(ModelParams(4, 1.0, 1.0), window=6, refine=2, budget=10 ** 6)
    with pytest.raises(BudgetExceeded) as exc:
        oracle_minimum(cfg)
    assert exc.value.size > 10 ** 5


def test_config_limits():
    with pytest.raises(ValueError):
        OracleConfig(ModelParams(5, 1.0, 1.0))
    cfg = OracleConfig(ModelParams(2, 1.0, 1.0), window=2, refine=2)
    pos = cfg.positions(np.arange(cfg.n_points) + cfg.index_range[0])
    assert pos[0] == pytest.approx(-2.5) and pos[-1] == pytest.approx(2.5)
