"""Difficulty adjustment rules.

Two feedback controllers steer the mean block time toward the protocol
target: the bitcoin-style proportional rule D' = D * target / mean(T), and
the radium rule D' = D * k / (a * mean(T)**k), which rescales difficulty
through the exponential-equivalent time of the observed blocks.  Both are
exercised here with a short sliding window (two samples by default) rather
than bitcoin's 2016-block epochs.

``ChainState`` is an immutable value; operations return new states, so
concurrent simulations each own their own chain.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from .core_model import ProtocolParams


@dataclass(frozen=True)
class ChainState:
    """Current difficulty plus the recent block inter-arrival history.

    ``history`` holds at most ``window`` samples, oldest first.
    """

    difficulty: float
    history: tuple[float, ...] = ()
    window: int = 2

    def __post_init__(self):
        if self.difficulty <= 0:
            raise ValueError(f"difficulty must be positive, got {self.difficulty}")
        if self.window < 1:
            raise ValueError(f"window must be >= 1, got {self.window}")
        if any(t <= 0 for t in self.history):
            raise ValueError("history times must all be positive")
        if len(self.history) > self.window:
            raise ValueError("history longer than window")

    @property
    def mean_time(self) -> float:
        if not self.history:
            raise ValueError("no block history recorded")
        return sum(self.history) / len(self.history)


def record_block(state: ChainState, inter_arrival: float) -> ChainState:
    """Append an observed inter-arrival time, evicting beyond the window."""
    if inter_arrival <= 0:
        raise ValueError(f"inter-arrival time must be positive, got {inter_arrival}")
    history = (state.history + (inter_arrival,))[-state.window:]
    return replace(state, history=history)


def bitcoin_adjust(state: ChainState, params: ProtocolParams) -> float:
    """Proportional controller: D' = D * target_time / mean(history)."""
    return state.difficulty * params.target_time / state.mean_time


def radium_adjust(state: ChainState, params: ProtocolParams) -> float:
    """Single-window dynamic-target controller: D' = D * k / (a * mean(history)**k).

    The window mean is taken over the raw inter-arrival times and then
    raised to the k (this reading reproduces the reference block-time
    statistics; see the closed-loop tests).  For window = 1 this is exactly
    the bitcoin rule applied to the exponential-equivalent time.
    """
    return state.difficulty * params.k / (params.a * state.mean_time ** params.k)
