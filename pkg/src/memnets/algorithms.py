"""The three network computations: shortest path, healing, and the
traveling-salesman heuristic, plus ON-state classification and reading of
solutions out of the converged state.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .device import DeviceParams, DynamicsMode, unit_resistance
from .dynamics import (PulseSpec, SimConfig, apply_pulse, random_pulse_schedule,
                       run_pulse_sequence)
from .errors import (DisconnectedTerminalsError, NoOnPathError,
                     SimulationNotConverged)
from .topology import Network, connected, reduced_network, reset_states

PATH_CAP = 16


def on_threshold(params: DeviceParams) -> float:
    """Unit-resistance cutoff for calling an edge ON: the log-midpoint
    (geometric mean) of the unit's ON and OFF limiting values."""
    return float(np.sqrt(params.unit_r_on * params.unit_r_off))


def threshold_amplitude(net: Network, input: int, output: int) -> float:
    """Smallest voltage across the pair at which some edge current reaches
    the device threshold (exact by linearity of the DC solve).

    Random networks have no reference amplitude in the literature; scenarios
    drive them at a margin above this instance-specific value. Floating
    components are tolerated (they carry no current).
    """
    from .circuit import LaplacianSystem, SourceSpec
    sys_ = LaplacianSystem(net, SourceSpec.pair(input, output, 1.0),
                           allow_floating=True)
    _, currents = sys_.solve(sys_.conductances())
    peak = float(np.abs(currents).max())
    if peak <= 0.0:
        raise DisconnectedTerminalsError(
            f"no current flows between {input} and {output}")
    return net.params.i_threshold / peak


def classify_on(net: Network) -> list[int]:
    """Edge ids whose unit resistance is at or below the ON cutoff."""
    thr = on_threshold(net.params)
    return [eid for eid in net.edge_ids()
            if unit_resistance(net.edges[eid].unit) <= thr]


@dataclass
class PathExtraction:
    """Simple input-to-output paths over an ON subgraph, with diagnostics."""

    paths: list[list[int]]
    dead_ends: list[int]      # degree-1 ON nodes other than the terminals
    disconnected: bool        # some ON edges unreachable from the input
    cap_hit: bool


@dataclass
class PathResult:
    on_edges: list[int]
    paths: list[list[int]]    # sorted by (hops, geometric length)
    degenerate: bool          # >= 2 edge-disjoint minimal-hop paths
    geometric_length: float   # of the best path
    hop_count: int            # of the best path
    dead_ends: list[int] = field(default_factory=list)
    cap_hit: bool = False


@dataclass
class TourResult:
    on_edges: list[int]
    tour: list[int] | None    # closed node sequence (first node repeated last)
    valid: bool
    tour_length: float
    post_process_passes: int
    city_order: list[int] = field(default_factory=list)


def extract_paths(net: Network, on_edges, input: int, output: int,
                  cap: int = PATH_CAP) -> PathExtraction:
    """Enumerate simple input->output paths over the given edges (up to cap)
    and report dead ends and disconnected ON segments."""
    on = sorted(set(on_edges))
    adj: dict[int, list[tuple[int, int]]] = {}
    degree: dict[int, int] = {}
    for eid in on:
        e = net.edge(eid)
        adj.setdefault(e.u, []).append((e.v, eid))
        adj.setdefault(e.v, []).append((e.u, eid))
        degree[e.u] = degree.get(e.u, 0) + 1
        degree[e.v] = degree.get(e.v, 0) + 1
    for lst in adj.values():
        lst.sort()

    paths: list[list[int]] = []
    cap_hit = False

    def dfs(node: int, path: list[int], seen: set[int]):
        nonlocal cap_hit
        if len(paths) >= cap:
            cap_hit = True
            return
        if node == output:
            paths.append(list(path))
            return
        for nb, _eid in adj.get(node, ()):
            if nb not in seen:
                seen.add(nb)
                path.append(nb)
                dfs(nb, path, seen)
                path.pop()
                seen.discard(nb)

    if input in adj:
        dfs(input, [input], {input})

    dead = sorted(n for n, d in degree.items()
                  if d == 1 and n not in (input, output))
    reach = set()
    if input in adj:
        stack = [input]
        reach.add(input)
        while stack:
            x = stack.pop()
            for nb, _ in adj.get(x, ()):
                if nb not in reach:
                    reach.add(nb)
                    stack.append(nb)
    disconnected = any(n not in reach for n in adj)
    return PathExtraction(paths, dead, disconnected, cap_hit)


def _path_geo_length(net: Network, path: list[int]) -> float:
    total = 0.0
    for a, b in zip(path, path[1:]):
        for eid in net.adjacency[a]:
            if net.other_end(eid, a) == b:
                total += net.edges[eid].length
                break
    return total


def _path_edge_set(net: Network, path: list[int]) -> set[int]:
    out = set()
    for a, b in zip(path, path[1:]):
        for eid in net.adjacency[a]:
            if net.other_end(eid, a) == b:
                out.add(eid)
                break
    return out


def _build_path_result(net: Network, on: list[int], input: int, output: int
                       ) -> PathResult:
    ext = extract_paths(net, on, input, output)
    if not ext.paths:
        raise NoOnPathError(
            f"no ON path joins {input} and {output} "
            f"({len(on)} edges classified ON)", on_edges=on)
    ranked = sorted(ext.paths,
                    key=lambda p: (len(p) - 1, _path_geo_length(net, p), p))
    best = ranked[0]
    min_hops = len(best) - 1
    minimal = [p for p in ranked if len(p) - 1 == min_hops]
    degenerate = False
    for i in range(len(minimal)):
        ei = _path_edge_set(net, minimal[i])
        for j in range(i + 1, len(minimal)):
            if not (ei & _path_edge_set(net, minimal[j])):
                degenerate = True
                break
        if degenerate:
            break
    return PathResult(
        on_edges=on,
        paths=ranked,
        degenerate=degenerate,
        geometric_length=_path_geo_length(net, best),
        hop_count=min_hops,
        dead_ends=ext.dead_ends,
        cap_hit=ext.cap_hit,
    )


def solve_shortest_path(net: Network, input: int, output: int, amplitude: float,
                        cfg: SimConfig | None = None
                        ) -> tuple[Network, PathResult]:
    """Full three-stage run: re-initialize all devices OFF, apply one pulse
    to steady state, read the ON set. Returns the evolved network and the
    extracted solution."""
    cfg = cfg or SimConfig()
    fresh = reset_states(net)
    evolved, traj = apply_pulse(fresh, PulseSpec(input, output, amplitude), cfg)
    if not traj.reached_steady:
        raise SimulationNotConverged(
            f"no steady state within {cfg.max_steps} steps",
            network=evolved, trajectory=traj)
    return evolved, _build_path_result(evolved, classify_on(evolved), input, output)


def heal(net: Network, input: int, output: int, amplitude: float,
         cfg: SimConfig | None = None) -> tuple[Network, PathResult]:
    """Repair pulse on a damaged, previously-solved network.

    Deliberately skips re-initialization: the surviving ON segments are the
    memory that steers the repair around the damage."""
    cfg = cfg or SimConfig()
    if not connected(net, input, output):
        raise DisconnectedTerminalsError(
            f"damage disconnected {input} from {output}")
    evolved, traj = apply_pulse(net, PulseSpec(input, output, amplitude), cfg)
    if not traj.reached_steady:
        raise SimulationNotConverged(
            f"no steady state within {cfg.max_steps} steps",
            network=evolved, trajectory=traj)
    return evolved, _build_path_result(evolved, classify_on(evolved), input, output)


def post_process(net: Network, on_edges, terminals, amplitude: float,
                 cfg: SimConfig | None = None, passes: int = 1,
                 schedule: tuple[int, int, float | None] | None = None,
                 stop_when=None) -> tuple[list[int], int]:
    """Rerun the same algorithm on the reduced network of ON edges.

    terminals is an (input, output) pair for the shortest-path algorithm;
    with schedule=(n_pulses, seed, duration) it is instead the city set and
    each pass reruns the random-pulse schedule (pass k derives its seed as
    seed + k). Passes stop early at a fixed point of the ON set or when
    stop_when(on_edges) says the solution is good enough.

    Returns the final ON set and the number of passes actually run.
    """
    cfg = cfg or SimConfig()
    on = sorted(set(on_edges))
    if not on:
        raise NoOnPathError("empty ON set", on_edges=[])
    passes_run = 0
    for k in range(1, passes + 1):
        if stop_when is not None and stop_when(on):
            break
        reduced = reduced_network(net, on)
        if schedule is None:
            a, b = terminals
            if a not in reduced.nodes or b not in reduced.nodes \
                    or not connected(reduced, a, b):
                raise NoOnPathError(
                    "reduced network does not join the terminals", on_edges=on)
            _, result = solve_shortest_path(reduced, a, b, amplitude, cfg)
            new_on = result.on_edges
        else:
            n_pulses, seed, duration = schedule
            cities = list(terminals)
            if any(c not in reduced.nodes for c in cities):
                break  # a city lost all its ON edges; cannot improve further
            if not _all_connected(reduced, cities):
                break
            pulses = random_pulse_schedule(cities, n_pulses, amplitude,
                                           seed + k, duration)
            evolved, _ = run_pulse_sequence(reduced, pulses, cfg)
            new_on = classify_on(evolved)
        passes_run = k
        if not new_on:
            raise NoOnPathError(f"pass {k} switched nothing ON", on_edges=on)
        if sorted(new_on) == on:
            on = sorted(new_on)
            break
        on = sorted(new_on)
    return on, passes_run


def _all_connected(net: Network, nodes) -> bool:
    nodes = list(nodes)
    return all(connected(net, nodes[0], b) for b in nodes[1:])


def extract_tour(net: Network, on_edges, cities) -> TourResult:
    """Closed-tour reading of an ON set.

    Valid iff the ON subgraph is a single cycle through every city: each ON
    node has degree exactly 2 and the subgraph is connected. Intermediate
    non-city nodes are allowed on tour legs.
    """
    cities = sorted(set(cities))
    on = sorted(set(on_edges))
    adj: dict[int, list[tuple[int, int]]] = {}
    total_len = 0.0
    for eid in on:
        e = net.edge(eid)
        adj.setdefault(e.u, []).append((e.v, eid))
        adj.setdefault(e.v, []).append((e.u, eid))
        total_len += e.length
    invalid = TourResult(on, None, False, float("nan"), 0)
    if not on or any(c not in adj for c in cities):
        return invalid
    if any(len(v) != 2 for v in adj.values()):
        return invalid
    start = cities[0]
    seq = [start]
    prev, node = None, start
    while True:
        nxt = [nb for nb, _ in adj[node] if nb != prev]
                   # at degree exactly 2, one neighbor goes back, one forward
        step = nxt[0] if prev is not None else max(nxt)
        prev, node = node, step
        if node == start:
            break
        seq.append(node)
        if len(seq) > len(adj):
            return invalid
    if len(seq) != len(adj):   # more than one cycle
        return invalid
    order = [n for n in seq if n in set(cities)]
    if len(order) != len(cities):
        return invalid
    return TourResult(on, seq + [start], True, total_len, 0, city_order=order)


def solve_tsp(net: Network, cities, n_pulses: int, amplitude: float, seed: int,
              cfg: SimConfig | None = None, passes: int = 2,
              pulse_duration: float | None = None) -> TourResult:
    """Traveling-salesman heuristic: unipolar random-pulse schedule over the
    city pairs from an all-OFF start, post-processing passes on the reduced
    ON network, then closed-tour extraction.

    A missing pulse_duration is calibrated to 10% of the run-to-steady time
    of a single pulse between the geometrically farthest city pair, so that
    no single pulse can saturate a full path on its own.
    """
    cities = sorted(set(cities))
    if len(cities) < 3:
        raise ValueError("need at least 3 cities")
    for c in cities:
        net.node(c)
    if not _all_connected(net, cities):
        raise DisconnectedTerminalsError("cities are not mutually connected")
    base = cfg or SimConfig()
    cfg = SimConfig(dt=base.dt, max_steps=base.max_steps,
                    record_stride=base.record_stride,
                    mode=DynamicsMode.UNIPOLAR, check_kcl=base.check_kcl)

    fresh = reset_states(net)
    if pulse_duration is None:
        pulse_duration = calibrate_tsp_pulse_duration(fresh, cities, amplitude, cfg)

    pulses = random_pulse_schedule(cities, n_pulses, amplitude, seed,
                                   pulse_duration)
    evolved, _ = run_pulse_sequence(fresh, pulses, cfg)
    on = classify_on(evolved)
    if not on:
        return TourResult([], None, False, float("nan"), 0)

    def good(on_set) -> bool:
        return extract_tour(net, on_set, cities).valid

    on, passes_run = post_process(evolved, on, cities, amplitude, cfg,
                                  passes=passes,
                                  schedule=(n_pulses, seed, pulse_duration),
                                  stop_when=good)
    result = extract_tour(net, on, cities)
    result.post_process_passes = passes_run
    return result


def calibrate_tsp_pulse_duration(net: Network, cities, amplitude: float,
                                 cfg: SimConfig, fraction: float = 0.1) -> float:
    """Fraction of the single-pulse time-to-steady between the farthest pair."""
    cities = list(cities)
    best, pair = -1.0, None
    for i, a in enumerate(cities):
        pa = net.nodes[a].position
        for b in cities[i + 1:]:
            pb = net.nodes[b].position
            d = float(np.hypot(pa[0] - pb[0], pa[1] - pb[1]))
            if d > best:
                best, pair = d, (a, b)
    probe = reset_states(net)
    _, traj = apply_pulse(probe, PulseSpec(pair[0], pair[1], abs(amplitude)),
                          SimConfig(dt=cfg.dt, max_steps=cfg.max_steps,
                                    record_stride=cfg.max_steps, mode=cfg.mode))
    if not traj.reached_steady or traj.t_end == 0.0:
        raise SimulationNotConverged(
            "calibration pulse did not reach steady state", trajectory=traj)
    return fraction * traj.t_end
