"""Closed-form evaluators for attack and incentive analysis.

Everything here is analytic: the future-mining success bound and its
ingredients, the equilibrium future-mining time implied by a competing
reward rate, reference exponential percentiles, and the proof-count at
which the multi-proof (bobtail-style) variance reduction matches shape-2
dynamic mining.  These serve both as results in their own right and as
independent oracles for the Monte Carlo engine.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .core_model import (
    InfiniteDifficultyError,
    NormalizedTarget,
    ProtocolParams,
    block_time_survival,
    instantaneous_rate,
    subtarget,
)


def attacker_expected_time(q: float, t_star: float, params: ProtocolParams) -> float:
    """Mean block time of a miner with hash share q mining the fixed sub-target g(t*).

    Mining a fixed threshold is memoryless, so the time is exponential with
    mean G / (q * g(t*)) * target_time = 1 / (q * a * t*^(k-1)).
    """
    if not 0.0 < q <= 1.0:
        raise ValueError(f"hash share q must be in (0, 1], got {q}")
    if t_star < 0:
        raise ValueError(f"t_star must be positive, got {t_star}")
    rate = instantaneous_rate(t_star, params)
    if rate == 0.0:
        raise InfiniteDifficultyError(
            f"sub-target is zero at t*={t_star} for k={params.k}; expected time is unbounded"
        )
    return 1.0 / (q * rate)


def future_mine_bound(q: float, t_star: float, params: ProtocolParams) -> float:
    """Lower bound on the probability that a future-mining attacker wins the block.

    P(attacker finds a block before t*) * P(the compliant remainder finds
    none by t*): the attacker's held block survives to its release time.
    """
    mean_attacker = attacker_expected_time(q, t_star, params)
    attacker_cdf = 1.0 - math.exp(-t_star / mean_attacker)
    compliant_survival = block_time_survival(t_star, 1.0 - q, params) if q < 1.0 else 1.0
    return attacker_cdf * compliant_survival


@dataclass(frozen=True)
class AttackBound:
    """Future-mining bound with its two factors, for reporting."""

    q: float
    t_star: float
    bound: float
    attacker_mean_time: float
    compliant_survival: float

    def __post_init__(self):
        for name in ("bound", "compliant_survival"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} must be a probability, got {value}")


def attack_bound(q: float, t_star: float, params: ProtocolParams) -> AttackBound:
    mean_attacker = attacker_expected_time(q, t_star, params)
    survival = block_time_survival(t_star, 1.0 - q, params) if q < 1.0 else 1.0
    return AttackBound(
        q=q,
        t_star=t_star,
        bound=(1.0 - math.exp(-t_star / mean_attacker)) * survival,
        attacker_mean_time=mean_attacker,
        compliant_survival=survival,
    )


def saturation_time(target: NormalizedTarget, params: ProtocolParams) -> float:
    """Elapsed time at which the sub-target fills the whole hash space (k > 1)."""
    if params.k == 1:
        raise ValueError("the sub-target is constant for k = 1 and never saturates")
    rate0 = params.a * params.target_time * target.g  # g(t) = rate0 * t**(k-1)
    return (1.0 / rate0) ** (1.0 / (params.k - 1.0))


BISECTION_TOL = 1e-6


def equilibrium_tau(prevailing_rate: float, params: ProtocolParams,
                    target: NormalizedTarget) -> float:
    """Future-mining time at which mining this chain matches a competing reward rate.

    The per-hash reward rate of future mining to time t is modeled as
    R(t) = C * g(t): the chance a single hash meets the sub-target times the
    nominal payout.  R is strictly increasing for k > 1, so R(tau) = r has a
    unique root; preemption losses at the equilibrium are second order and
    ignored.  Solved by bisection on [granularity, saturation] to 1e-6 s.
    """
    if params.k == 1:
        raise ValueError("the reward rate is constant for k = 1; no unique equilibrium")
    if prevailing_rate <= 0:
        raise ValueError(f"prevailing reward rate must be positive, got {prevailing_rate}")

    def rate(t: float) -> float:
        return params.base_reward * subtarget(target, t, params)

    lo, hi = 1.0, saturation_time(target, params)
    if not rate(lo) <= prevailing_rate <= rate(hi):
        raise ValueError(
            f"prevailing rate {prevailing_rate} outside the achievable range "
            f"[{rate(lo)}, {rate(hi)}]"
        )
    while hi - lo > BISECTION_TOL:
        mid = 0.5 * (lo + hi)
        if rate(mid) < prevailing_rate:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def bobtail_variance_ratio(j: float) -> float:
    """Variance of a j-proof multi-sample block time relative to conventional PoW."""
    if j <= 0:
        raise ValueError(f"proof count must be positive, got {j}")
    return (8.0 * j + 4.0) / (6.0 * (j * j + j))


def bobtail_equivalent_j() -> float:
    """Proof count whose variance reduction equals shape-2 dynamic mining.

    Positive root of 4/pi - 1 = (8j + 4) / (6 (j^2 + j)):
    j = (7 pi - 12 + sqrt(144 - 72 pi + 25 pi^2)) / (6 (4 - pi)), a little
    above 4 proofs per block.
    """
    pi = math.pi
    disc = math.sqrt(144.0 - 72.0 * pi + 25.0 * pi * pi)
    return (7.0 * pi - 12.0 + disc) / (6.0 * (4.0 - pi))


def exponential_percentiles(mean: float, probs=(0.05, 0.5, 0.95)) -> tuple[float, ...]:
    """Percentiles of the exponential block-time law with the given mean.

    The reference distribution for an ideally tuned fixed-target chain:
    t_p = -mean * ln(1 - p).
    """
    if mean <= 0:
        raise ValueError(f"mean must be positive, got {mean}")
    if any(not 0.0 < p < 1.0 for p in probs):
        raise ValueError("percentile probabilities must be in (0, 1)")
    return tuple(-mean * math.log1p(-p) for p in probs)
