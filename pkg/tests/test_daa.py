import math

import pytest

from radium_lab import core_model as cm
from radium_lab import daa, sim_engine

T = 600.0


@pytest.fixture
def params():
    return cm.ProtocolParams(k=2.0)


# --- ChainState ------------------------------------------------------------

def test_state_validation():
    with pytest.raises(ValueError):
        daa.ChainState(difficulty=0.0)
    with pytest.raises(ValueError):
        daa.ChainState(difficulty=1.0, window=0)
    with pytest.raises(ValueError):
        daa.ChainState(difficulty=1.0, history=(100.0, -3.0))
    with pytest.raises(ValueError):
        daa.ChainState(difficulty=1.0, history=(1.0, 2.0, 3.0), window=2)


def test_record_block_ring_eviction():
    state = daa.ChainState(difficulty=600.0, history=(100.0, 200.0), window=2)
    state = daa.record_block(state, 300.0)
    assert state.history == (200.0, 300.0)
    assert state.difficulty == 600.0  # recording never adjusts


def test_record_block_window_one():
    state = daa.ChainState(difficulty=600.0, window=1)
    state = daa.record_block(state, 42.0)
    assert state.history == (42.0,)


def test_record_block_rejects_nonpositive():
    state = daa.ChainState(difficulty=600.0)
    with pytest.raises(ValueError):
        daa.record_block(state, -5.0)


def test_empty_history_errors(params):
    state = daa.ChainState(difficulty=600.0)
    with pytest.raises(ValueError):
        daa.bitcoin_adjust(state, params)
    with pytest.raises(ValueError):
        daa.radium_adjust(state, params)


# --- bitcoin rule ------------------------------------------------------------

def test_bitcoin_at_rest(params):
    state = daa.ChainState(difficulty=600.0, history=(T, T))
    assert daa.bitcoin_adjust(state, params) == pytest.approx(600.0, rel=1e-15)


def test_bitcoin_direct_substitution(params):
    state = daa.ChainState(difficulty=100.0, history=(300.0,), window=1)
    assert daa.bitcoin_adjust(state, params) == pytest.approx(200.0, rel=1e-15)


def test_bitcoin_vanishes_for_slow_blocks(params):
    state = daa.ChainState(difficulty=100.0, history=(1e12,), window=1)
    assert daa.bitcoin_adjust(state, params) < 1e-7


def test_bitcoin_never_moves_when_forced_to_target(params):
    state = daa.ChainState(difficulty=600.0, window=2)
    for _ in range(50):
        state = daa.record_block(state, T)
        state = daa.ChainState(daa.bitcoin_adjust(state, params), state.history, state.window)
    assert state.difficulty == pytest.approx(600.0, rel=1e-12)


# --- radium rule -------------------------------------------------------------

def test_radium_fixed_point(params):
    t_fix = (params.k / params.a) ** (1 / params.k)
    assert t_fix == pytest.approx(677.03, abs=0.01)
    state = daa.ChainState(difficulty=100.0, history=(t_fix, t_fix))
    assert daa.radium_adjust(state, params) == pytest.approx(100.0, rel=1e-12)


def test_radium_direct_substitution(params):
    # D' = D * k / (a * mean^k) at mean = 600 s
    state = daa.ChainState(difficulty=100.0, history=(600.0, 600.0))
    expected = 100.0 * 2.0 / (cm.tuning_constant(2.0, T) * 600.0 ** 2)
    assert expected == pytest.approx(127.32, abs=0.01)
    assert daa.radium_adjust(state, params) == pytest.approx(expected, rel=1e-12)


def test_radium_vanishes_for_slow_blocks(params):
    state = daa.ChainState(difficulty=100.0, history=(1e12,), window=1)
    assert daa.radium_adjust(state, params) < 1e-7


# --- shared properties --------------------------------------------------------

@pytest.mark.parametrize("adjust", [daa.bitcoin_adjust, daa.radium_adjust])
def test_homogeneous_degree_one(params, adjust):
    history = (123.0, 841.0)
    lo = daa.ChainState(difficulty=50.0, history=history)
    hi = daa.ChainState(difficulty=100.0, history=history)
    assert adjust(hi, params) == pytest.approx(2 * adjust(lo, params), rel=1e-12)


def test_radium_is_bitcoin_after_pit_for_single_sample(params):
    # window 1: rescaling with the exponential-equivalent time reproduces the
    # bitcoin rule exactly
    for t in (30.0, 300.0, 600.0, 677.0, 2500.0):
        state = daa.ChainState(difficulty=240.0, history=(t,), window=1)
        direct = daa.radium_adjust(state, params)
        transformed = daa.ChainState(
            difficulty=240.0, history=(cm.pit_transform(t, params),), window=1)
        via_bitcoin = daa.bitcoin_adjust(transformed, params)
        assert abs(direct / via_bitcoin - 1.0) < 1e-9


def test_closed_loop_radium_median_near_target(params):
    # long-run behavior of the two-sample controller: median block time of
    # the warmed-up loop stays within 3% of the target
    res = sim_engine.run_daa_experiment("radium", params, blocks_per_trial=30,
                                        trials=1000, window=2, seed=7)
    warmed = res.median[10:]
    med = sorted(warmed)[len(warmed) // 2]
    assert abs(med / T - 1.0) < 0.03
