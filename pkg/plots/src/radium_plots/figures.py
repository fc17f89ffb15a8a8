"""Render the four standard result figures from radium-lab CSV files.

fig1  future-mining success curves: analytic bound (solid) and simulated
      frequency (dashed) against the release time, one color per attacker
      share.
fig2  closed-loop block times: per-block median (solid) with dashed
      5th/95th percentile bands on a log time axis; a second CSV overlays
      another protocol.
fig3  switch-mining profitability: reward per second against the hash
      multiple, one curve per security exponent, dashed no-switching
      baseline.
fig4  doublespend success against the embargo depth: bitcoin solid,
      radium dashed, one color per attacker share.

Rendering is read-only over its inputs and deterministic given identical
CSV bytes.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

plt.rcParams["figure.figsize"] = (6.4, 4.2)
plt.rcParams["font.size"] = 10
plt.rcParams["axes.grid"] = True
plt.rcParams["grid.alpha"] = 0.25

REQUIRED_COLUMNS = {
    "fig1": ("q", "t_star", "success_rate", "bound"),
    "fig2": ("block_index", "p5", "median", "p95"),
    "fig3": ("k", "x", "reward_per_second", "baseline"),
    "fig4": ("protocol", "q", "z", "success_rate"),
}
FIGURE_IDS = tuple(REQUIRED_COLUMNS)

# y-axis scale per figure; fig2 spans orders of magnitude
AXIS_SCALES = {"fig1": "linear", "fig2": "log", "fig3": "linear", "fig4": "linear"}

# column whose distinct values define the plotted series
SERIES_COLUMN = {"fig1": "q", "fig2": None, "fig3": "k", "fig4": "q"}


class MissingColumnsError(ValueError):
    """An input CSV lacks columns the figure contract requires."""


@dataclass(frozen=True)
class FigureSpec:
    """One figure request: which renderer, its CSV inputs, and the image path."""

    figure_id: str
    inputs: tuple[str, ...]
    output: str
    y_scale: str = field(init=False)
    series_column: str | None = field(init=False)

    def __post_init__(self):
        if self.figure_id not in FIGURE_IDS:
            raise ValueError(f"unknown figure id {self.figure_id!r}; expected one of {FIGURE_IDS}")
        if not self.inputs:
            raise ValueError("at least one input CSV is required")
        object.__setattr__(self, "y_scale", AXIS_SCALES[self.figure_id])
        object.__setattr__(self, "series_column", SERIES_COLUMN[self.figure_id])


def load_table(path: str, required: tuple[str, ...]) -> list[dict]:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        missing = [c for c in required if c not in header]
        if missing:
            raise MissingColumnsError(
                f"{path} is missing required columns {missing}; found {header}")
        rows = []
        for raw in reader:
            row = dict(raw)
            for key, value in raw.items():
                try:
                    row[key] = float(value)
                except (TypeError, ValueError):
                    pass
            rows.append(row)
    return rows


def _series(rows, column):
    """Distinct values of a grouping column, in order of first appearance."""
    seen = []
    for row in rows:
        if row[column] not in seen:
            seen.append(row[column])
    return seen


def _finish(fig, ax, spec, xlabel, ylabel):
    ax.set_yscale(spec.y_scale)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(spec.output)
    return fig


def _render_fig1(spec):
    rows = load_table(spec.inputs[0], REQUIRED_COLUMNS["fig1"])
    fig, ax = plt.subplots()
    for i, q in enumerate(_series(rows, "q")):
        pts = sorted((r for r in rows if r["q"] == q), key=lambda r: r["t_star"])
        ts = [r["t_star"] for r in pts]
        ax.plot(ts, [r["bound"] for r in pts], "-", color=f"C{i}",
                label=f"q={q:g} bound")
        ax.plot(ts, [r["success_rate"] for r in pts], "--", color=f"C{i}",
                label=f"q={q:g} simulated")
    return _finish(fig, ax, spec, "future mining time t* (s)", "block win probability")


def _render_fig2(spec):
    fig, ax = plt.subplots()
    for i, path in enumerate(spec.inputs):
        rows = load_table(path, REQUIRED_COLUMNS["fig2"])
        rows.sort(key=lambda r: r["block_index"])
        blocks = [r["block_index"] for r in rows]
        color = ("C3", "C0")[i % 2]
        stem = Path(path).stem
        ax.plot(blocks, [r["median"] for r in rows], "-", color=color,
                label=f"{stem} median")
        ax.plot(blocks, [r["p5"] for r in rows], "--", color=color, alpha=0.7,
                label=f"{stem} 5th/95th")
        ax.plot(blocks, [r["p95"] for r in rows], "--", color=color, alpha=0.7)
    return _finish(fig, ax, spec, "block index", "block time (s)")


def _render_fig3(spec):
    rows = load_table(spec.inputs[0], REQUIRED_COLUMNS["fig3"])
    fig, ax = plt.subplots()
    for i, k in enumerate(_series(rows, "k")):
        pts = sorted((r for r in rows if r["k"] == k), key=lambda r: r["x"])
        ax.plot([r["x"] for r in pts], [r["reward_per_second"] for r in pts],
                "-", color=f"C{i}", label=f"k={k:g}")
    ax.axhline(rows[0]["baseline"], linestyle="--", color="black",
               label="no switching")
    return _finish(fig, ax, spec, "hash-rate multiple x", "reward per second (coins/s)")


def _render_fig4(spec):
    rows = []
    for path in spec.inputs:
        rows.extend(load_table(path, REQUIRED_COLUMNS["fig4"]))
    fig, ax = plt.subplots()
    styles = {"bitcoin": "-", "radium": "--"}
    for i, q in enumerate(_series(rows, "q")):
        for protocol, style in styles.items():
            pts = sorted((r for r in rows if r["q"] == q and r["protocol"] == protocol),
                         key=lambda r: r["z"])
            if pts:
                ax.plot([r["z"] for r in pts], [r["success_rate"] for r in pts],
                        style, color=f"C{i}", label=f"q={q:g} {protocol}")
    return _finish(fig, ax, spec, "embargo depth z (blocks)", "doublespend success probability")


_RENDERERS = {
    "fig1": _render_fig1,
    "fig2": _render_fig2,
    "fig3": _render_fig3,
    "fig4": _render_fig4,
}


def render(spec: FigureSpec):
    """Render one figure to ``spec.output``; returns the matplotlib Figure."""
    return _RENDERERS[spec.figure_id](spec)
