"""Independent reference implementations used to verify emergent results:
classical shortest paths, exact small-instance TSP, and a dense-matrix
circuit solve with no sparsity assumptions.
"""

from __future__ import annotations

import enum
import heapq
from itertools import count

import numpy as np

from .circuit import SolveResult, SourceSpec
from .errors import DisconnectedTerminalsError, SingularNetworkError
from .topology import Network


class Metric(enum.Enum):
    HOP_COUNT = "hop_count"
    GEOMETRIC_LENGTH = "geometric_length"


def _weight(net: Network, eid: int, metric: Metric) -> float:
    return 1.0 if metric is Metric.HOP_COUNT else net.edges[eid].length


def dijkstra(net: Network, src: int, dst: int, metric: Metric = Metric.HOP_COUNT
             ) -> tuple[list[int], float]:
    """Minimum-weight path and its weight; ties broken toward the smallest
    predecessor id so results are reproducible."""
    net.node(src), net.node(dst)
    if src == dst:
        return [], 0.0
    dist: dict[int, float] = {src: 0.0}
    prev: dict[int, int] = {}
    pq: list[tuple[float, int]] = [(0.0, src)]
    done: set[int] = set()
    while pq:
        d, x = heapq.heappop(pq)
        if x in done:
            continue
        done.add(x)
        if x == dst:
            break
        for eid in sorted(net.adjacency[x]):
            y = net.other_end(eid, x)
            nd = d + _weight(net, eid, metric)
            old = dist.get(y)
            if old is None or nd < old:
                dist[y] = nd
                prev[y] = x
                heapq.heappush(pq, (nd, y))
            elif nd == old and x < prev.get(y, x + 1):
                prev[y] = x
    if dst not in dist:
        raise DisconnectedTerminalsError(f"{src} and {dst} are not connected")
    path = [dst]
    while path[-1] != src:
        path.append(prev[path[-1]])
    return path[::-1], dist[dst]


def all_shortest_paths(net: Network, src: int, dst: int,
                       metric: Metric = Metric.HOP_COUNT, cap: int = 64
                       ) -> tuple[list[list[int]], bool]:
    """Every minimum-weight path (up to cap; the flag reports a hit cap)."""
    net.node(src), net.node(dst)
    if src == dst:
        return [[]], False
    dist: dict[int, float] = {src: 0.0}
    pq: list[tuple[float, int]] = [(0.0, src)]
    done: set[int] = set()
    while pq:
        d, x = heapq.heappop(pq)
        if x in done:
            continue
        done.add(x)
        for eid in net.adjacency[x]:
            y = net.other_end(eid, x)
            nd = d + _weight(net, eid, metric)
            if y not in dist or nd < dist[y] - 1e-12 * max(1.0, abs(nd)):
                dist[y] = nd
                heapq.heappush(pq, (nd, y))
    if dst not in dist:
        raise DisconnectedTerminalsError(f"{src} and {dst} are not connected")

    paths: list[list[int]] = []
    cap_hit = False

    def backtrack(node: int, tail: list[int]):
        nonlocal cap_hit
        if len(paths) >= cap:
            cap_hit = True
            return
        if node == src:
            paths.append([src] + tail[::-1])
            return
        for eid in sorted(net.adjacency[node]):
            y = net.other_end(eid, node)
            w = _weight(net, eid, metric)
            dy = dist.get(y)
            if dy is not None and abs(dy + w - dist[node]) <= 1e-12 * max(1.0, dist[node]):
                backtrack(y, tail + [node])

    backtrack(dst, [])
    return paths, cap_hit


def city_distance_matrix(net: Network, cities, metric: Metric = Metric.GEOMETRIC_LENGTH
                         ) -> np.ndarray:
    """Pairwise graph-shortest-path distances between city nodes."""
    cities = list(cities)
    n = len(cities)
    d = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            _, w = dijkstra(net, cities[i], cities[j], metric)
            d[i, j] = d[j, i] = w
    return d


def brute_force_tsp(cities, distances: np.ndarray) -> tuple[list[int], float]:
    """Exact optimal closed tour by subset dynamic programming (Held-Karp).

    Returns the city order (starting at the first city, not closed in the
    list) and the total closed-tour length. Sizes 3..15 only.
    """
    cities = list(cities)
    n = len(cities)
    if not (3 <= n <= 15):
        raise ValueError(f"need 3..15 cities, got {n}")
    d = np.asarray(distances, dtype=float)
    if d.shape != (n, n):
        raise ValueError("distance matrix shape mismatch")
    if not np.all(np.isfinite(d)):
        raise DisconnectedTerminalsError("some city pair is disconnected")

    # dp[mask][j]: best cost of a path over {cities in mask}, starting at 0,
    # ending at j (0 excluded from mask; j indexes cities 1..n-1).
    m = n - 1
    full = (1 << m) - 1
    dp = np.full((full + 1, m), np.inf)
    parent = np.full((full + 1, m), -1, dtype=np.int64)
    for j in range(m):
        dp[1 << j][j] = d[0][j + 1]
    for mask in range(1, full + 1):
        row = dp[mask]
        for j in range(m):
            if not (mask >> j) & 1:
                continue
            cj = row[j]
            if not np.isfinite(cj):
                continue
            for k in range(m):
                if (mask >> k) & 1:
                    continue
                nmask = mask | (1 << k)
                cost = cj + d[j + 1][k + 1]
                if cost < dp[nmask][k]:
                    dp[nmask][k] = cost
                    parent[nmask][k] = j
    best_cost, best_j = np.inf, -1
    for j in range(m):
        cost = dp[full][j] + d[j + 1][0]
        if cost < best_cost:
            best_cost, best_j = cost, j
    order_idx = []
    mask, j = full, best_j
    while j >= 0:
        order_idx.append(j + 1)
        pj = parent[mask][j]
        mask ^= 1 << j
        j = pj
    order_idx.append(0)
    order_idx.reverse()
    return [cities[i] for i in order_idx], float(best_cost)


def dense_solve(net: Network, src: SourceSpec) -> SolveResult:
    """Full-matrix reference for solve_dc: no sparsity, plain elimination.

    Fixed nodes keep identity rows; a floating component leaves a singular
    Laplacian block and raises."""
    if net.n_nodes > 500:
        raise ValueError("dense solve is limited to 500 nodes")
    ids = net.node_ids()
    pos = {nid: i for i, nid in enumerate(ids)}
    n = len(ids)
    G = np.zeros((n, n))
    for e in net.edges.values():
        g = 1.0 / e.unit.device_a.x + 1.0 / e.unit.device_b.x
        iu, iv = pos[e.u], pos[e.v]
        G[iu, iu] += g
        G[iv, iv] += g
        G[iu, iv] -= g
        G[iv, iu] -= g
    b = np.zeros(n)
    for nid, pot in src.fixed_potentials.items():
        i = pos[nid]
        G[i, :] = 0.0
        G[i, i] = 1.0
        b[i] = pot
    try:
        phi = np.linalg.solve(G, b)
    except np.linalg.LinAlgError as exc:
        raise SingularNetworkError(str(exc)) from exc
    if not np.all(np.isfinite(phi)):
        raise SingularNetworkError("non-finite solution")
    potentials = {nid: float(phi[pos[nid]]) for nid in ids}
    edge_currents = {}
    for eid in net.edge_ids():
        e = net.edges[eid]
        g = 1.0 / e.unit.device_a.x + 1.0 / e.unit.device_b.x
        edge_currents[eid] = float((phi[pos[e.u]] - phi[pos[e.v]]) * g)
    injections = {}
    for nid in sorted(src.fixed_potentials):
        out = 0.0
        for eid in net.adjacency[nid]:
            e = net.edges[eid]
            out += edge_currents[eid] if e.u == nid else -edge_currents[eid]
        injections[nid] = out
    source = sum(x for x in injections.values() if x > 0.0)
    return SolveResult(potentials, edge_currents, injections, float(source))
