import numpy as np
import pytest

from embgame.evaluation import classical_value, value_dense
from embgame.games import accept_all_game, ghz_game, main_game, ms_game
from embgame.seesaw import SeesawConfig, seesaw_optimize

# main game, 2 qubits per player, 4 restarts, seed 0: pinned from the first run
MAIN_2Q_BEST = 0.989903983395
MAIN_2Q_MARGIN = 0.01


def monotone(trace):
    return all(b >= a - 1e-12 for a, b in zip(trace, trace[1:]))


def test_config_validation():
    with pytest.raises(ValueError):
        SeesawConfig((1, -1, 1))
    with pytest.raises(ValueError):
        SeesawConfig((1, 1, 1), restarts=0)
    with pytest.raises(ValueError):
        SeesawConfig((1, 1, 1), tol=0)
    with pytest.raises(ValueError):
        seesaw_optimize(ghz_game(), SeesawConfig((1, 1)))
    with pytest.raises(ValueError):
        seesaw_optimize(ghz_game(), SeesawConfig((6, 6, 6)))


def test_ghz_one_qubit():
    res = seesaw_optimize(ghz_game(), SeesawConfig((1, 1, 1), restarts=20, seed=0))
    assert res.best >= 0.99
    assert res.best <= 1 + 1e-12
    assert all(monotone(t) for t in res.traces)
    # the returned strategy is feasible and really achieves the value
    rep = value_dense(ghz_game(), res.strategy)
    assert rep.total == pytest.approx(res.best, abs=1e-9)


def test_zero_qubits_is_classical():
    res = seesaw_optimize(ghz_game(), SeesawConfig((0, 0, 0), restarts=5, seed=2))
    assert res.best <= float(classical_value(ghz_game()).value) + 1e-9


def test_accept_all_first_sweep():
    res = seesaw_optimize(accept_all_game(), SeesawConfig((1, 1), restarts=2, seed=4))
    assert res.trace[1] == pytest.approx(1.0, abs=1e-12)


def test_reproducible():
    cfg = SeesawConfig((1, 1, 1), restarts=3, seed=11)
    a = seesaw_optimize(ghz_game(), cfg)
    b = seesaw_optimize(ghz_game(), cfg)
    assert a.traces == b.traces
    assert np.array_equal(a.strategy.state.amplitudes, b.strategy.state.amplitudes)


def test_threads_do_not_change_result(monkeypatch):
    cfg = SeesawConfig((1, 1), restarts=4, seed=3)
    monkeypatch.setenv("EMBGAME_THREADS", "1")
    a = seesaw_optimize(ms_game(), cfg)
    monkeypatch.setenv("EMBGAME_THREADS", "3")
    b = seesaw_optimize(ms_game(), cfg)
    assert a.traces == b.traces and a.restart == b.restart


def test_ms_sandwich():
    res = seesaw_optimize(ms_game(), SeesawConfig((2, 2), restarts=3, seed=1))
    assert float(classical_value(ms_game()).value) - 1e-9 <= res.best <= 1 + 1e-12
    assert all(monotone(t) for t in res.traces)
    best, strategy, trace = res
    assert value_dense(ms_game(), strategy).total == pytest.approx(best, abs=1e-9)


@pytest.mark.slow
def test_main_game_two_qubits_regression():
    res = seesaw_optimize(main_game(), SeesawConfig((2, 2, 2), restarts=4, seed=0))
    assert res.best < 1 - MAIN_2Q_MARGIN
    assert res.best == pytest.approx(MAIN_2Q_BEST, abs=1e-6)
    assert all(monotone(t) for t in res.traces)
