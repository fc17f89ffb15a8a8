"""Seeded Monte Carlo experiments over the protocol models.

Reproducibility contract: every experiment derives its randomness from a
64-bit master seed through ``numpy.random.SeedSequence`` entropy pairs.
Trial-structured experiments give trial ``i`` its own stream seeded with
``(seed, i)`` and consume it in a fixed documented order; bulk experiments
(orphan rate, switch episodes, fairness) draw uniforms in fixed-size row
blocks, block ``b`` coming from stream ``(seed, b)``.  Outcome arrays are
stitched back by index and aggregated with order-insensitive reductions
(counts, sorted pooled samples), so results are byte-identical regardless
of worker count or execution order.

``RADIUM_LAB_THREADS`` caps the worker pool; the default is serial.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import analysis, daa
from .core_model import (
    ProtocolParams,
    block_time_from_uniform,
    expected_reward_at_rest,
    validate_fractions,
    REWARD_TIME_GRANULARITY,
)

PROTOCOLS = ("bitcoin", "radium")

_MASK64 = (1 << 64) - 1
_TINY = np.finfo(float).tiny
_BULK_BLOCK = 1 << 16  # rows per stream for bulk (non-trial) experiments


def trial_rng(seed: int, index: int) -> np.random.Generator:
    """The dedicated random stream of one trial: entropy (master seed, index)."""
    return np.random.default_rng(np.random.SeedSequence(entropy=(seed & _MASK64, index)))


def thread_count() -> int:
    raw = os.environ.get("RADIUM_LAB_THREADS", "1")
    try:
        n = int(raw)
    except ValueError as exc:
        raise ValueError(f"RADIUM_LAB_THREADS must be an integer, got {raw!r}") from exc
    return max(1, n)


def _chunked(n: int, workers: int):
    """Split range(n) into per-worker index arrays (order preserved)."""
    size = max(1, math.ceil(n / max(1, workers)))
    return [np.arange(lo, min(lo + size, n)) for lo in range(0, n, size)]


def _run_chunks(worker, n: int):
    """Run ``worker(indices) -> dict[str, ndarray]`` over all indices, possibly
    in parallel, and stitch the pieces back in index order."""
    workers = thread_count()
    chunks = _chunked(n, workers)
    if workers == 1 or len(chunks) == 1:
        parts = [worker(c) for c in chunks]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(worker, chunks))
    return {key: np.concatenate([p[key] for p in parts]) for key in parts[0]}


def _trial_uniforms(seed: int, indices: np.ndarray, width: int) -> np.ndarray:
    """Row i holds the first ``width`` uniforms of trial indices[i]'s stream."""
    out = np.empty((len(indices), width))
    for row, idx in enumerate(indices):
        out[row] = trial_rng(seed, int(idx)).random(width)
    return out


def _bulk_uniforms(seed: int, rows: int, width: int) -> np.ndarray:
    """Uniform matrix drawn in _BULK_BLOCK-row blocks, one stream per block."""
    out = np.empty((rows, width))
    for block, lo in enumerate(range(0, rows, _BULK_BLOCK)):
        hi = min(lo + _BULK_BLOCK, rows)
        out[lo:hi] = trial_rng(seed, block).random((hi - lo, width))
    return out


def _effective_params(protocol: str, params: ProtocolParams) -> ProtocolParams:
    """Bitcoin is the k = 1 member of the same block-time family."""
    if protocol not in PROTOCOLS:
        raise ValueError(f"unknown protocol {protocol!r}")
    return replace(params, k=1.0) if protocol == "bitcoin" else params


@dataclass(frozen=True)
class ExperimentConfig:
    """Full parameterization of one experiment run, echoed into manifests."""

    protocol: str
    k: float
    trials: int
    seed: int
    blocks_per_trial: int = 30
    window: int = 2
    orphan_window: float = 3.0
    sweep: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.protocol not in PROTOCOLS + ("both",):
            raise ValueError(f"unknown protocol {self.protocol!r}")
        if self.trials < 1:
            raise ValueError(f"trials must be >= 1, got {self.trials}")
        if not 0 <= self.seed <= _MASK64:
            raise ValueError("seed must fit in 64 bits")


@dataclass(frozen=True)
class TrialRecord:
    """One trial's outcome payload; reproducible from (master seed, trial index)."""

    trial_index: int
    values: dict


@dataclass(frozen=True)
class SummaryStats:
    """Per-grid-point aggregates.  Fields not produced by an experiment are None."""

    trial_count: int
    successes: int | None = None
    success_rate: float | None = None
    p5: float | None = None
    median: float | None = None
    p95: float | None = None
    orphan_rate: float | None = None
    reward_per_second: float | None = None

    def __post_init__(self):
        for name in ("success_rate", "orphan_rate"):
            value = getattr(self, name)
            if value is not None and not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} must be in [0, 1], got {value}")
        if None not in (self.p5, self.median, self.p95):
            if not self.p5 <= self.median <= self.p95:
                raise ValueError("percentiles must be ordered p5 <= median <= p95")


def _summary_from_times(times: np.ndarray, **extra) -> SummaryStats:
    pooled = np.sort(times, axis=None)  # order-insensitive aggregation
    p5, med, p95 = np.percentile(pooled, (5, 50, 95))
    return SummaryStats(p5=float(p5), median=float(med), p95=float(p95), **extra)


# ---------------------------------------------------------------------------
# future mining attack
# ---------------------------------------------------------------------------

def _future_mine_trials(q: float, t_star: float, params: ProtocolParams,
                        seed: int, indices: np.ndarray) -> dict:
    """Uniform consumption per trial: (attacker fixed-target draw, compliant
    draw, attacker post-release compliant draw)."""
    k, a = params.k, params.a
    u = _trial_uniforms(seed, indices, 3)
    mean_attacker = analysis.attacker_expected_time(q, t_star, params)
    t_att = -mean_attacker * np.log(np.maximum(u[:, 0], _TINY))
    t_comp = block_time_from_uniform(u[:, 1], 1.0 - q, params)
    # Held block survives iff no compliant block appears before its release.
    early_win = (t_att < t_star) & (t_comp > t_star)
    both_late = (t_att >= t_star) & (t_comp >= t_star)
    # Past t* the attacker reverts to compliant mining; the race continues
    # with both Weibull clocks aged t* (inverse of the conditional survival).
    t_att2 = (t_star ** k - k * np.log(np.maximum(u[:, 2], _TINY)) / (q * a)) ** (1.0 / k)
    success = early_win | (both_late & (t_att2 < t_comp))
    return {"success": success, "early": early_win}


def run_future_mine_attack(q: float, t_star: float, params: ProtocolParams,
                           trials: int, seed: int) -> SummaryStats:
    """Success frequency of future mining to release time t* with hash share q.

    The attacker grinds the fixed threshold g(t*) and withholds any find
    until t*; compliant miners (share 1 - q) follow the dynamic target.  The
    attacker wins by finding before t* with no compliant block by t*, or by
    winning the compliant race after everyone passes t*.
    """
    if not 0.0 < q < 1.0:
        raise ValueError(f"attacker share q must be in (0, 1), got {q}")
    if t_star <= 0:
        raise ValueError(f"t_star must be positive, got {t_star}")
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    out = _run_chunks(lambda idx: _future_mine_trials(q, t_star, params, seed, idx), trials)
    successes = int(out["success"].sum())
    return SummaryStats(trial_count=trials, successes=successes,
                        success_rate=successes / trials)


# ---------------------------------------------------------------------------
# defacto future mining
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DefactoResult:
    """Outcome of every miner future-mining to a common time tau."""

    block_time: SummaryStats
    race_rate: float
    win_rates: tuple[float, ...]
    preemptor: int
    preemption_advantage: float

    @property
    def preemptor_win_rate(self) -> float:
        return self.win_rates[self.preemptor]


def _defacto_trials(tau: float, fractions: tuple, params: ProtocolParams,
                    seed: int, preemptor: int, indices: np.ndarray) -> dict:
    """Uniform consumption per trial: one fixed-target draw per miner, one
    post-tau compliant draw per miner, one tie-break uniform."""
    k, a = params.k, params.a
    m = len(fractions)
    u = _trial_uniforms(seed, indices, 2 * m + 1)
    means = np.array([analysis.attacker_expected_time(f, tau, params) for f in fractions])
    t1 = -means * np.log(np.maximum(u[:, :m], _TINY))
    found = t1 < tau
    n_found = found.sum(axis=1)
    race = n_found >= 2

    winner = np.empty(len(indices), dtype=np.int64)
    block_time = np.full(len(indices), tau)

    # All finds are released together at tau; the preemptor's epsilon-earlier
    # release beats every tie, remaining ties fall to a fair pick.
    pre_win = found[:, preemptor]
    winner[pre_win] = preemptor
    other = ~pre_win & (n_found > 0)
    pick = np.floor(u[:, 2 * m] * n_found.clip(min=1)).astype(np.int64)
    order = np.cumsum(found, axis=1)
    chosen = (order == (pick + 1)[:, None]) & found
    winner[other] = chosen.argmax(axis=1)[other]

    # Nobody found by tau: everyone mines compliantly with clocks aged tau.
    late = n_found == 0
    if late.any():
        frac = np.asarray(fractions)
        t2 = (tau ** k - k * np.log(np.maximum(u[:, m:2 * m], _TINY)) / (frac * a)) ** (1.0 / k)
        winner[late] = t2.argmin(axis=1)[late]
        block_time[late] = t2.min(axis=1)[late]

    return {"winner": winner, "race": race, "block_time": block_time}


def run_defacto_future_mine(tau: float, miner_fractions, params: ProtocolParams,
                            trials: int, seed: int, preemptor: int = 0) -> DefactoResult:
    """Every miner future-mines to the common equilibrium time tau, then turns
    compliant.  Reports block-time statistics, how often multiple finds race
    at tau, and how much the tie-winning preemptor beats its fair share."""
    if tau <= 0:
        raise ValueError(f"tau must be positive, got {tau}")
    fractions = tuple(float(f) for f in miner_fractions)
    validate_fractions(fractions)
    if not 0 <= preemptor < len(fractions):
        raise ValueError("preemptor index out of range")
    out = _run_chunks(
        lambda idx: _defacto_trials(tau, fractions, params, seed, preemptor, idx), trials)
    wins = np.bincount(out["winner"], minlength=len(fractions))
    win_rates = tuple(float(w) / trials for w in wins)
    return DefactoResult(
        block_time=_summary_from_times(out["block_time"], trial_count=trials),
        race_rate=float(out["race"].mean()),
        win_rates=win_rates,
        preemptor=preemptor,
        preemption_advantage=win_rates[preemptor] - fractions[preemptor],
    )


# ---------------------------------------------------------------------------
# closed-loop difficulty adjustment
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DaaResult:
    """Per-block-index percentiles across trials plus their across-block medians."""

    protocol: str
    blocks: int
    trials: int
    p5: tuple[float, ...]
    median: tuple[float, ...]
    p95: tuple[float, ...]
    overall: SummaryStats


def _daa_trials(protocol: str, params: ProtocolParams, blocks: int, window: int,
                seed: int, indices: np.ndarray) -> dict:
    """Uniform consumption per trial: one draw per block, in block order."""
    eff = _effective_params(protocol, params)
    adjust = daa.bitcoin_adjust if protocol == "bitcoin" else daa.radium_adjust
    times = np.empty((len(indices), blocks))
    for row, idx in enumerate(indices):
        u = trial_rng(seed, int(idx)).random(blocks)
        # At rest for the unit hash rate the difficulty equals the target time.
        state = daa.ChainState(difficulty=eff.target_time, window=window)
        for b in range(blocks):
            t = float(block_time_from_uniform(u[b], 1.0, eff, difficulty=state.difficulty))
            times[row, b] = t
            state = daa.record_block(state, t)
            state = replace(state, difficulty=adjust(state, eff))
    return {"times": times}


def run_daa_experiment(protocol: str, params: ProtocolParams, blocks_per_trial: int = 30,
                       trials: int = 1000, window: int = 2, seed: int = 1) -> DaaResult:
    """Closed loop: sample a block at the current difficulty, record it, adjust,
    repeat.  Statistics are taken per block index across trials; the headline
    row is the median over block indices of each statistic."""
    if blocks_per_trial < 1 or trials < 1:
        raise ValueError("blocks_per_trial and trials must be >= 1")
    out = _run_chunks(
        lambda idx: _daa_trials(protocol, params, blocks_per_trial, window, seed, idx),
        trials)
    times = out["times"]
    p5, med, p95 = np.percentile(times, (5, 50, 95), axis=0)
    overall = SummaryStats(
        trial_count=trials,
        p5=float(np.median(p5)),
        median=float(np.median(med)),
        p95=float(np.median(p95)),
    )
    return DaaResult(protocol=protocol, blocks=blocks_per_trial, trials=trials,
                     p5=tuple(p5), median=tuple(med), p95=tuple(p95), overall=overall)


# ---------------------------------------------------------------------------
# orphan rate
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class OrphanResult:
    protocol: str
    blocks: int
    orphan_window: float
    orphans: int
    orphan_rate: float


def run_orphan_experiment(protocol: str, params: ProtocolParams, blocks: int = 850_000,
                          orphan_window: float = 3.0, seed: int = 1) -> OrphanResult:
    """Fork-coincidence rate between two equal compliant halves of the network.

    Per block height both halves draw completion times at the at-rest
    difficulty; an orphan is counted when they finish within the orphan
    window of each other.  Uniform consumption: one (half-1, half-2) row per
    block, drawn in bulk blocks.
    """
    if blocks < 1:
        raise ValueError(f"blocks must be >= 1, got {blocks}")
    if orphan_window <= 0:
        raise ValueError(f"orphan_window must be positive, got {orphan_window}")
    eff = _effective_params(protocol, params)
    u = _bulk_uniforms(seed, blocks, 2)
    t1 = block_time_from_uniform(u[:, 0], 0.5, eff)
    t2 = block_time_from_uniform(u[:, 1], 0.5, eff)
    orphans = int(np.count_nonzero(np.abs(t1 - t2) < orphan_window))
    return OrphanResult(protocol=protocol, blocks=blocks, orphan_window=orphan_window,
                        orphans=orphans, orphan_rate=orphans / blocks)


# ---------------------------------------------------------------------------
# doublespend race
# ---------------------------------------------------------------------------

def _doublespend_trials(protocol: str, q: float, z: int, params: ProtocolParams,
                        seed: int, indices: np.ndarray, horizon: int,
                        horizon_deficit: int, clock: str) -> dict:
    eff = _effective_params(protocol, params)
    k, a = eff.k, eff.a
    n = len(indices)

    if clock == "shared":
        # One sub-target clock serves both chains: each round the attacker's
        # and the honest candidates race from the same reset, so each block
        # falls to the attacker with exactly his hash share (proportional
        # hazards) and block production stays fair.  For the memoryless
        # bitcoin law this is distributionally identical to fully
        # independent chains.  Consumption per trial: rounds x (attacker
        # uniform, honest uniform).
        rounds = int((horizon + 1) / (1.0 - q)) + 300
        u = _trial_uniforms(seed, indices, 2 * rounds)
        u_att, u_hon = u[:, :rounds], u[:, rounds:]
        t_att = block_time_from_uniform(u_att, q, eff)
        t_hon = block_time_from_uniform(u_hon, 1.0 - q, eff)
        att_win = t_att < t_hon
        walk = np.cumsum(np.where(att_win, 1, -1), axis=1)  # private - honest length
        n_honest = np.cumsum(~att_win, axis=1)
    else:
        # Independent per-chain clocks: each chain's Weibull clock restarts
        # only on its own blocks.  Kept for comparison; for k > 1 a minority
        # chain solo-mines disproportionately fast (mean scales as
        # q**(-1/k)), so block production is no longer fair.
        if clock != "independent":
            raise ValueError(f"unknown clock model {clock!r}")
        n_hon = horizon + 1
        n_att = int((horizon + 1) * max(1.0, 2.0 * q / (1.0 - q))) + 300
        u = _trial_uniforms(seed, indices, n_hon + n_att)
        cum_h = np.cumsum(block_time_from_uniform(u[:, :n_hon], 1.0 - q, eff), axis=1)
        cum_a = np.cumsum(block_time_from_uniform(u[:, n_hon:], q, eff), axis=1)
        events = np.concatenate([cum_h, cum_a], axis=1)
        is_att = np.zeros(n_hon + n_att, dtype=bool)
        is_att[n_hon:] = True
        order = np.argsort(events, axis=1, kind="stable")
        att_ord = is_att[order]
        walk = np.cumsum(np.where(att_ord, 1, -1), axis=1)
        n_honest = np.cumsum(~att_ord, axis=1)

    big = walk.shape[1] + 1
    # The merchant ships once the honest chain has z confirmations; from then
    # on the attacker publishes as soon as his private chain has caught up
    # (the classic break-even rule the race oracle prices).
    catch = (n_honest >= z) & (walk >= 0)
    quit_ = walk <= -horizon_deficit
    over = n_honest > horizon
    catch_i = np.where(catch.any(axis=1), catch.argmax(axis=1), big)
    quit_i = np.where(quit_.any(axis=1), quit_.argmax(axis=1), big)
    over_i = np.where(over.any(axis=1), over.argmax(axis=1), big)
    success = (catch_i < quit_i) & (catch_i <= over_i) & (catch_i < big)
    return {"success": success}


def run_doublespend(q: float, z: int, protocol: str, params: ProtocolParams,
                    trials: int, seed: int, horizon: int = 500,
                    horizon_deficit: int = 20, clock: str = "shared") -> SummaryStats:
    """Success frequency of a private-chain doublespend against z confirmations.

    Both sides mine at the fixed at-rest difficulty under the selected
    protocol's block-time law.  A trial fails when the attacker falls
    ``horizon_deficit`` blocks behind or the honest chain passes ``horizon``
    blocks.
    """
    if not 0.0 < q < 1.0:
        raise ValueError(f"attacker share q must be in (0, 1), got {q}")
    if z < 0:
        raise ValueError(f"embargo depth z must be >= 0, got {z}")
    if horizon < 1 or horizon_deficit < 1:
        raise ValueError("horizon and horizon_deficit must be >= 1")
    out = _run_chunks(
        lambda idx: _doublespend_trials(protocol, q, z, params, seed, idx,
                                        horizon, horizon_deficit, clock),
        trials)
    successes = int(out["success"].sum())
    return SummaryStats(trial_count=trials, successes=successes,
                        success_rate=successes / trials)


# ---------------------------------------------------------------------------
# switch mining
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SwitchResult:
    """Aggregate profitability of a two-block hash-rate excursion."""

    x: float
    trials: int
    reward_per_second: float      # sum(rewards) / sum(times), the headline
    episode_mean: float           # mean of per-episode (R1+R2)/(T1+T2)
    baseline: float               # C / target_time, the no-switching rate


def run_switch_mine(x: float, params: ProtocolParams, trials: int, seed: int) -> SwitchResult:
    """Reward per second of switch-mining: one block at hash multiple x, the
    controller retunes, one block at multiple 1/x.

    Payouts are taken at the realized block times and expressed in units
    where the at-rest expected payout per block equals the nominal reward, so
    the no-switching baseline sits at C / target_time for every k.  Uniform
    consumption: one (block-1, block-2) row per episode, drawn in bulk blocks.
    """
    if x < 1:
        raise ValueError(f"hash multiple x must be >= 1, got {x}")
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    k, a = params.k, params.a
    unit = params.base_reward / expected_reward_at_rest(params)
    u = _bulk_uniforms(seed, trials, 2)
    t1 = (-k * np.log(np.maximum(u[:, 0], _TINY)) / (x * a)) ** (1.0 / k)
    t2 = (-k * np.log(np.maximum(u[:, 1], _TINY)) / (a / x)) ** (1.0 / k)
    c, T, kk = params.base_reward, params.target_time, params.k
    r1 = unit * c * (T / np.maximum(t1, REWARD_TIME_GRANULARITY)) ** (kk - 1.0)
    r2 = unit * c * (T / np.maximum(t2, REWARD_TIME_GRANULARITY)) ** (kk - 1.0)
    return SwitchResult(
        x=x,
        trials=trials,
        reward_per_second=float((r1.sum() + r2.sum()) / (t1.sum() + t2.sum())),
        episode_mean=float(np.mean((r1 + r2) / (t1 + t2))),
        baseline=params.base_reward / params.target_time,
    )


# ---------------------------------------------------------------------------
# fairness baseline
# ---------------------------------------------------------------------------

def run_fairness(miner_fractions, params: ProtocolParams, blocks: int, seed: int) -> tuple:
    """Block-win frequency per compliant miner on a shared chain.

    All clocks share the chain's elapsed time, so each block goes to miner i
    with probability equal to its hash fraction.  Uniform consumption: one
    row of per-miner uniforms per block, drawn in bulk blocks.
    """
    fractions = tuple(float(f) for f in miner_fractions)
    validate_fractions(fractions)
    u = _bulk_uniforms(seed, blocks, len(fractions))
    times = np.empty_like(u)
    for j, f in enumerate(fractions):
        times[:, j] = block_time_from_uniform(u[:, j], f, params)
    wins = np.bincount(times.argmin(axis=1), minlength=len(fractions))
    return tuple(float(w) / blocks for w in wins)


def run_variance_probe(params: ProtocolParams, samples: int, seed: int) -> float:
    """Sample variance of at-rest block times over the squared target time.

    Monte Carlo counterpart of ``core_model.variance_ratio``; uniform
    consumption: one draw per sample, in bulk blocks.
    """
    if samples < 2:
        raise ValueError(f"samples must be >= 2, got {samples}")
    u = _bulk_uniforms(seed, samples, 1)[:, 0]
    t = block_time_from_uniform(u, 1.0, params)
    return float(np.var(t) / params.target_time ** 2)


def trial_records(arrays: dict) -> list[TrialRecord]:
    """Materialize per-trial outcome records from stitched outcome arrays."""
    length = len(next(iter(arrays.values())))
    return [
        TrialRecord(trial_index=i, values={key: arrays[key][i] for key in arrays})
        for i in range(length)
    ]
