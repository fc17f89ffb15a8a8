"""Protocol mathematics for fixed- and dynamic-target proof-of-work mining.

The hash space is normalized to size 1: a mining target is the fraction of
the space a hash must fall below, and difficulty is its reciprocal, the
expected number of hashes per block.  Conventional mining at a fixed target
produces exponential block inter-arrival times.  Dynamic-target mining
(RTT/Radium style) instead grows the target while the current block ages:
with instantaneous block rate

    lambda(t) = a * t**(k - 1)

the inter-arrival time is Weibull distributed with shape ``k``, and the
tuning constant ``a`` is fixed so the mean inter-arrival equals the
protocol's target block time.  ``k = 1`` collapses to conventional mining.

All functions are pure; the samplers take an explicit ``numpy.random.Generator``
so concurrent callers only need to own distinct generators.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

DEFAULT_TARGET_TIME = 600.0  # seconds, bitcoin-like cadence
DEFAULT_BASE_REWARD = 12.5   # coins paid for a block mined in target time

# Block timestamps are integral seconds on deployed chains; rewards are
# never evaluated below this elapsed time (the reward function diverges
# as t -> 0 for k > 1).
REWARD_TIME_GRANULARITY = 1.0

_TINY = np.finfo(float).tiny


class InfiniteDifficultyError(ValueError):
    """The sub-target is zero at the requested time, so difficulty is unbounded."""


def tuning_constant(k: float, target_time: float = DEFAULT_TARGET_TIME) -> float:
    """Rate constant ``a`` making the mean Weibull(k, a) block time equal target_time.

    a = k * (gamma(1 + 1/k) / target_time) ** k, units s**(-k).
    """
    if k < 1:
        raise ValueError(f"security exponent k must be >= 1, got {k}")
    if target_time <= 0:
        raise ValueError(f"target_time must be positive, got {target_time}")
    return k * (math.gamma(1.0 + 1.0 / k) / target_time) ** k


@dataclass(frozen=True)
class ProtocolParams:
    """Protocol constants: security exponent, target block time, base reward.

    The tuning constant ``a`` is always derived from (k, target_time); it is
    never set independently.
    """

    k: float = 2.0
    target_time: float = DEFAULT_TARGET_TIME
    base_reward: float = DEFAULT_BASE_REWARD
    a: float = field(init=False, repr=False)

    def __post_init__(self):
        if self.target_time <= 0:
            raise ValueError(f"target_time must be positive, got {self.target_time}")
        if self.base_reward <= 0:
            raise ValueError(f"base_reward must be positive, got {self.base_reward}")
        object.__setattr__(self, "a", tuning_constant(self.k, self.target_time))

    @property
    def weibull_scale(self) -> float:
        """Scale (k/a)**(1/k) of the at-rest block-time distribution."""
        return (self.k / self.a) ** (1.0 / self.k)


@dataclass(frozen=True)
class NormalizedTarget:
    """A mining target as a fraction g of the unit hash space, 0 < g <= 1."""

    g: float

    def __post_init__(self):
        if not 0.0 < self.g <= 1.0:
            raise ValueError(f"target fraction must be in (0, 1], got {self.g}")

    @property
    def difficulty(self) -> float:
        """Expected hashes per block: the reciprocal of the target fraction."""
        return 1.0 / self.g

    @classmethod
    def from_difficulty(cls, difficulty: float) -> "NormalizedTarget":
        if difficulty < 1.0:
            raise ValueError(f"difficulty must be >= 1 in the unit hash space, got {difficulty}")
        return cls(g=1.0 / difficulty)


# Miner strategies understood by the simulation engine.
COMPLIANT = "compliant"
FUTURE_MINE = "future_mine"
DEFACTO = "defacto"
SWITCH = "switch"
PRIVATE_ATTACKER = "private_attacker"

_STRATEGIES = (COMPLIANT, FUTURE_MINE, DEFACTO, SWITCH, PRIVATE_ATTACKER)

FRACTION_SUM_TOL = 1e-12


@dataclass(frozen=True)
class MinerSpec:
    """A miner's hash-rate fraction and mining strategy.

    ``t_star`` is the future-mining release time, ``tau`` the common initial
    target time of defacto future mining, and ``multiple`` the hash-rate
    multiple applied when switch-mining.
    """

    hash_fraction: float
    strategy: str = COMPLIANT
    t_star: float | None = None
    tau: float | None = None
    multiple: float | None = None

    def __post_init__(self):
        if not 0.0 < self.hash_fraction <= 1.0:
            raise ValueError(f"hash_fraction must be in (0, 1], got {self.hash_fraction}")
        if self.strategy not in _STRATEGIES:
            raise ValueError(f"unknown strategy {self.strategy!r}")
        if self.strategy == FUTURE_MINE and (self.t_star is None or self.t_star <= 0):
            raise ValueError("future_mine requires a release time t_star > 0")
        if self.strategy == DEFACTO and (self.tau is None or self.tau <= 0):
            raise ValueError("defacto requires an initial target time tau > 0")
        if self.strategy == SWITCH and (self.multiple is None or self.multiple < 1):
            raise ValueError("switch requires a hash multiple >= 1")


def validate_fractions(fractions) -> None:
    """Require a scenario's hash fractions to sum to 1 within FRACTION_SUM_TOL."""
    total = math.fsum(fractions)
    if abs(total - 1.0) > FRACTION_SUM_TOL:
        raise ValueError(f"hash fractions must sum to 1, got {total!r}")


def instantaneous_rate(t: float, params: ProtocolParams) -> float:
    """Expected blocks per second at elapsed time t: lambda(t) = a * t**(k-1)."""
    if t < 0:
        raise ValueError(f"elapsed time must be >= 0, got {t}")
    if params.k == 1:
        return params.a
    return params.a * t ** (params.k - 1.0)


def subtarget(target: NormalizedTarget, t: float, params: ProtocolParams) -> float:
    """Time-varying mining threshold g(t) = G * lambda(t) / lambda, clamped to <= 1.

    Returned as a bare fraction of the hash space: it is 0 at t = 0 for
    k > 1 and saturates at the whole space for very large t, neither of
    which is a representable NormalizedTarget.
    """
    g = target.g * instantaneous_rate(t, params) * params.target_time
    return min(g, 1.0)


def sub_difficulty(t: float, target: NormalizedTarget, params: ProtocolParams) -> float:
    """Expected hashes per block at the instantaneous sub-target, 1/g(t)."""
    g = subtarget(target, t, params)
    if g == 0.0:
        raise InfiniteDifficultyError(
            f"sub-target is zero at t={t} for k={params.k}; sub-difficulty is unbounded"
        )
    return 1.0 / g


def reward(t: float, params: ProtocolParams) -> float:
    """Payout for a block mined at elapsed time t.

    Scales with sub-difficulty so the expected reward per hash is constant:
    r(t) = C * d(t) / d(target_time) = C * (target_time / t)**(k - 1).  The
    target fraction cancels, so the payout depends only on t and k.  Exactly
    C at the target time, decreasing in t, constant for k = 1.
    """
    if t < REWARD_TIME_GRANULARITY:
        raise ValueError(
            f"reward is evaluated at timestamps >= {REWARD_TIME_GRANULARITY} s, got {t}"
        )
    return params.base_reward * (params.target_time / t) ** (params.k - 1.0)


def expected_reward_at_rest(params: ProtocolParams) -> float:
    """Mean payout per block mined compliantly with the controller at rest.

    E[r(T)] for T ~ Weibull(k, a) is C * gamma(1 + 1/k)**(k-1) * gamma(1/k),
    which exceeds C for k > 1 (early cheap blocks pay large rewards).  Used
    to express simulated rewards in units anchored to the nominal payout.
    The 1-second timestamp granularity perturbs this by a negligible amount
    at deployed scales.
    """
    k = params.k
    if k == 1:
        return params.base_reward
    return params.base_reward * math.gamma(1.0 + 1.0 / k) ** (k - 1.0) * math.gamma(1.0 / k)


def _effective_rate(hash_fraction: float, params: ProtocolParams, difficulty: float | None) -> float:
    """Weibull rate constant for a miner owning ``hash_fraction`` of the unit
    hash rate while the conventional target corresponds to ``difficulty``
    (None means the at-rest value, target_time)."""
    if not 0.0 < hash_fraction <= 1.0:
        raise ValueError(f"hash_fraction must be in (0, 1], got {hash_fraction}")
    scale = 1.0
    if difficulty is not None:
        if difficulty <= 0:
            raise ValueError(f"difficulty must be positive, got {difficulty}")
        scale = params.target_time / difficulty
    return params.a * hash_fraction * scale


def block_time_from_uniform(u, hash_fraction: float, params: ProtocolParams,
                            difficulty: float | None = None):
    """Inverse-CDF map from uniform draws to block inter-arrival times.

    t = (-k * ln(u) / a_eff)**(1/k) with a_eff the rate constant scaled for
    hash share and (optionally) an off-rest difficulty.  Array-friendly.
    """
    a_eff = _effective_rate(hash_fraction, params, difficulty)
    u = np.maximum(u, _TINY)  # u = 0 has measure zero but would yield inf
    return (-params.k * np.log(u) / a_eff) ** (1.0 / params.k)


def sample_block_time(rng: np.random.Generator, hash_fraction: float, params: ProtocolParams,
                      size: int | None = None, difficulty: float | None = None):
    """Draw block inter-arrival times: Weibull(k, hash_fraction * a) at rest.

    For k = 1 and full hash rate this is exponential with the target mean.
    """
    u = rng.random(size)
    return block_time_from_uniform(u, hash_fraction, params, difficulty)


def block_time_cdf(t, hash_fraction: float, params: ProtocolParams,
                   difficulty: float | None = None):
    """P(T <= t) for the block-time law of ``sample_block_time``."""
    a_eff = _effective_rate(hash_fraction, params, difficulty)
    t = np.asarray(t, dtype=float)
    out = 1.0 - np.exp(-a_eff * t ** params.k / params.k)
    return float(out) if out.ndim == 0 else out


def block_time_survival(t, hash_fraction: float, params: ProtocolParams):
    """P(T > t) for the block-time law of ``sample_block_time``."""
    return 1.0 - block_time_cdf(t, hash_fraction, params)


def pit_transform(t, params: ProtocolParams):
    """Conventional-PoW-equivalent inter-arrival time of a dynamic-target block.

    Maps T through its Weibull CDF and back through the exponential inverse
    CDF at the same target: t' = a * t**k * target_time / k.  Strictly
    increasing, preserves CDF values pointwise.
    """
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("elapsed time must be >= 0")
    out = params.a * t ** params.k * params.target_time / params.k
    return float(out) if out.ndim == 0 else out


def variance_ratio(k: float) -> float:
    """Block-time variance of shape-k dynamic mining relative to conventional PoW.

    gamma(1 + 2/k) / gamma(1 + 1/k)**2 - 1; equals 1 at k = 1 and decreases
    with k (4/pi - 1 ~ 0.27 at k = 2).
    """
    if k < 1:
        raise ValueError(f"security exponent k must be >= 1, got {k}")
    g1 = math.gamma(1.0 + 1.0 / k)
    return math.gamma(1.0 + 2.0 / k) / (g1 * g1) - 1.0
