import math

import numpy as np
import pytest

from radium_lab import analysis, core_model as cm

T = 600.0


@pytest.fixture
def params():
    return cm.ProtocolParams(k=2.0)


# --- attacker expected time --------------------------------------------------

def test_recovers_conventional_mining(params):
    # at full hash rate and the time where g(t) = G, the expected block time
    # is the plain target time
    t_conv = T / (math.pi / 2)  # k=2: g(t)/G = (pi/2) * t / T
    assert analysis.attacker_expected_time(1.0, t_conv, params) == pytest.approx(T, rel=1e-12)


def test_attacker_time_example(params):
    expected = T / (0.3 * math.pi / 2)
    assert expected == pytest.approx(1273.24, abs=0.01)
    assert analysis.attacker_expected_time(0.3, T, params) == pytest.approx(expected, rel=1e-12)


def test_attacker_time_halving_q_doubles(params):
    one = analysis.attacker_expected_time(0.4, 900.0, params)
    two = analysis.attacker_expected_time(0.2, 900.0, params)
    assert two == pytest.approx(2 * one, rel=1e-12)


def test_attacker_time_q_scaling_invariant(params):
    # q * E[T] depends only on t*
    vals = {q * analysis.attacker_expected_time(q, 750.0, params) for q in (0.1, 0.25, 0.5, 1.0)}
    assert max(vals) - min(vals) < 1e-9 * max(vals)


def test_attacker_time_zero_tstar_signals(params):
    with pytest.raises(cm.InfiniteDifficultyError):
        analysis.attacker_expected_time(0.3, 0.0, params)


# --- future mining bound ------------------------------------------------------

def test_bound_example(params):
    # both factors evaluated independently of the implementation
    mean_att = 1273.2395
    factor_att = 1.0 - math.exp(-T / mean_att)
    factor_surv = math.exp(-0.7 * cm.tuning_constant(2.0, T) * T ** 2 / 2.0)
    assert factor_att == pytest.approx(0.3758, abs=2e-4)
    assert factor_surv == pytest.approx(0.5771, abs=2e-4)
    assert analysis.future_mine_bound(0.3, T, params) == \
        pytest.approx(factor_att * factor_surv, rel=1e-6)


def test_bound_limits(params):
    assert analysis.future_mine_bound(0.3, 1e-9, params) < 1e-6
    assert analysis.future_mine_bound(0.3, 1e7, params) < 1e-6


def test_bound_has_interior_maximum(params):
    grid = np.arange(30.0, 3000.0, 30.0)
    vals = [analysis.future_mine_bound(0.3, t, params) for t in grid]
    peak = int(np.argmax(vals))
    assert 0 < peak < len(grid) - 1
    assert all(a < b for a, b in zip(vals[:peak], vals[1:peak + 1]))
    assert all(a > b for a, b in zip(vals[peak:], vals[peak + 1:]))


def test_attack_bound_record(params):
    b = analysis.attack_bound(0.3, T, params)
    assert b.bound == pytest.approx(
        (1 - math.exp(-T / b.attacker_mean_time)) * b.compliant_survival, rel=1e-12)
    assert 0 <= b.bound <= 1 and 0 <= b.compliant_survival <= 1


# --- equilibrium future-mining time --------------------------------------------

def test_equilibrium_tau_nominal_rate(params):
    tgt = cm.NormalizedTarget(g=1.0 / 600.0)
    r_at_target = params.base_reward * cm.subtarget(tgt, T, params)
    tau = analysis.equilibrium_tau(r_at_target, params, tgt)
    assert tau == pytest.approx(T, abs=1e-5)


def test_equilibrium_tau_linear_in_rate_for_k2(params):
    tgt = cm.NormalizedTarget(g=1.0 / 600.0)
    r = params.base_reward * cm.subtarget(tgt, 200.0, params)
    assert analysis.equilibrium_tau(2 * r, params, tgt) == \
        pytest.approx(2 * analysis.equilibrium_tau(r, params, tgt), rel=1e-5)


def test_equilibrium_tau_monotone(params):
    tgt = cm.NormalizedTarget(g=1.0 / 600.0)
    rates = [params.base_reward * cm.subtarget(tgt, t, params) for t in (100, 400, 900, 5000)]
    taus = [analysis.equilibrium_tau(r, params, tgt) for r in rates]
    assert all(a < b for a, b in zip(taus, taus[1:]))


def test_equilibrium_tau_range_errors(params):
    tgt = cm.NormalizedTarget(g=1.0 / 600.0)
    too_high = params.base_reward * 1.001  # above the saturated sub-target rate
    with pytest.raises(ValueError):
        analysis.equilibrium_tau(too_high, params, tgt)
    with pytest.raises(ValueError):
        analysis.equilibrium_tau(0.0, params, tgt)
    with pytest.raises(ValueError):
        analysis.equilibrium_tau(1.0, cm.ProtocolParams(k=1.0), tgt)


def test_saturation_time(params):
    tgt = cm.NormalizedTarget(g=1.0 / 600.0)
    t_sat = analysis.saturation_time(tgt, params)
    assert cm.subtarget(tgt, t_sat, params) == pytest.approx(1.0, rel=1e-9)


# --- bobtail equivalence --------------------------------------------------------

def test_bobtail_j_against_numeric_root():
    # independent oracle: solve 6*(4/pi - 1)*(j^2 + j) - (8 j + 4) = 0 numerically
    c = 4.0 / math.pi - 1.0
    roots = np.roots([6.0 * c, 6.0 * c - 8.0, -4.0])
    numeric = max(roots)
    assert numeric == pytest.approx(4.430, abs=5e-4)
    assert analysis.bobtail_equivalent_j() == pytest.approx(numeric, rel=1e-12)


def test_bobtail_j_exceeds_four():
    assert analysis.bobtail_equivalent_j() > 4.0


def test_bobtail_back_substitution():
    j = analysis.bobtail_equivalent_j()
    assert abs(analysis.bobtail_variance_ratio(j) - (4.0 / math.pi - 1.0)) < 1e-9


# --- exponential reference percentiles ------------------------------------------

def test_exponential_percentiles():
    p5, med, p95 = analysis.exponential_percentiles(T)
    assert p5 == pytest.approx(T * math.log(20.0 / 19.0), rel=1e-12)
    assert med == pytest.approx(T * math.log(2.0), rel=1e-12)
    assert p95 == pytest.approx(T * math.log(20.0), rel=1e-12)


def test_exponential_percentiles_validation():
    with pytest.raises(ValueError):
        analysis.exponential_percentiles(0.0)
    with pytest.raises(ValueError):
        analysis.exponential_percentiles(600.0, probs=(0.0, 0.5))
