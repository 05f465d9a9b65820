"""Network-entropy diagnostics and switching-rate traces.

The cross-section entropy is Shannon entropy (nats) of the normalized
current magnitudes crossing a cut that separates the input from the output;
it decreases as current concentrates onto the emerging solution path. The
full-network variant runs the same formula over every edge.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .circuit import SolveResult
from .errors import ZeroCurrentError
from .topology import Network, grid_horizontal_edge


@dataclass(frozen=True)
class CrossSection:
    """Edges crossed by a cut, with per-edge signs mapping each edge's
    reference direction onto the input-to-output crossing direction."""

    edges: tuple[int, ...]
    orientations: tuple[int, ...]

    def __post_init__(self):
        if len(self.edges) != len(self.orientations):
            raise ValueError("edges and orientations must align")


@dataclass
class EntropyTrace:
    times: np.ndarray
    values: np.ndarray
    variant: str  # "cross-section" or "full-network"


def grid_cross_section(net: Network, column: int, input: int, output: int
                       ) -> CrossSection:
    """The horizontal edges crossed by a vertical line between grid columns
    column-1 and column, oriented toward the output side.

    The cut must lie strictly between the terminal columns; separation is
    verified by construction (every path between columns crosses it).
    """
    if net.grid_shape is None:
        raise ValueError("not a grid network")
    rows, cols = net.grid_shape
    in_col = int(round(net.node(input).position[0]))
    out_col = int(round(net.node(output).position[0]))
    if in_col == out_col:
        raise ValueError("terminals share a column; no vertical cut separates them")
    lo, hi = sorted((in_col, out_col))
    if not (lo < column <= hi):
        raise ValueError(f"column {column} is outside the terminal span ({lo}, {hi}]")
    edges = tuple(grid_horizontal_edge(net, r, column - 1) for r in range(rows))
    sign = 1 if in_col < out_col else -1
    orientations = tuple(sign for _ in edges)

    cut = set(edges)
    seen = {input}
    stack = [input]
    while stack:
        x = stack.pop()
        for eid in net.adjacency[x]:
            if eid in cut:
                continue
            y = net.other_end(eid, x)
            if y not in seen:
                seen.add(y)
                stack.append(y)
    if output in seen:
        raise ValueError("cut does not separate the terminals")
    return CrossSection(edges, orientations)


def _entropy_of(currents: np.ndarray) -> float:
    mags = np.abs(currents)
    total = mags.sum()
    if total == 0.0:
        raise ZeroCurrentError("no current crosses the section")
    p = mags / total
    nz = p[p > 0.0]
    return float(-(nz * np.log(nz)).sum())


def cross_section_entropy(result: SolveResult, section: CrossSection) -> float:
    """Entropy (nats) of the normalized crossing-current magnitudes.

    Zero-current terms contribute 0 (the x*ln(x) limit)."""
    cur = np.array([result.edge_currents[e] * s
                    for e, s in zip(section.edges, section.orientations)])
    return _entropy_of(cur)


def full_network_entropy(result: SolveResult) -> float:
    """Same formula over every edge of the network."""
    cur = np.array(sorted(result.edge_currents.items()))[:, 1] \
        if result.edge_currents else np.zeros(0)
    return _entropy_of(cur)


def entropy_trace(traj, section: CrossSection | None = None) -> EntropyTrace:
    """Entropy at every recorded sample of a trajectory; section None means
    the full-network variant."""
    if section is not None:
        cols = [traj.column(e) for e in section.edges]
        values = [_entropy_of(traj.edge_current[k, cols])
                  for k in range(len(traj.times))]
        variant = "cross-section"
    else:
        values = [_entropy_of(traj.edge_current[k])
                  for k in range(len(traj.times))]
        variant = "full-network"
    return EntropyTrace(np.asarray(traj.times), np.array(values), variant)


@dataclass
class SwitchingRateTrace:
    """Forward-difference dR/dt per recorded interval, per edge."""

    times: np.ndarray            # start of each interval
    rates: np.ndarray            # [interval, edge]
    edge_ids: tuple[int, ...]


def switching_rate_trace(traj, edges) -> SwitchingRateTrace:
    edges = tuple(edges)
    cols = [traj.column(e) for e in edges]
    r = traj.unit_resistance[:, cols]
    dts = np.diff(traj.times)
    rates = np.diff(r, axis=0) / dts[:, None]
    return SwitchingRateTrace(np.asarray(traj.times[:-1]), rates, edges)


def first_on_times(traj, edges, threshold: float) -> dict[int, float | None]:
    """Time of the first recorded sample at or below the ON cutoff, per edge
    (None if an edge never crosses it)."""
    out: dict[int, float | None] = {}
    for e in edges:
        series = traj.resistance_series(e)
        below = series <= threshold
        out[e] = float(traj.times[int(np.argmax(below))]) if below.any() else None
    return out
