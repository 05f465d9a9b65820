"""Network construction: regular grids, random planar networks, damage,
and reduced-network extraction.

Node ids are dense integers that stay stable across damage: removing edges
never renumbers nodes. Edge ids are likewise stable, so an ON-set computed
on a network is meaningful on any network derived from it.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .device import BasicUnit, DeviceParams
from .errors import SamplingError, UnknownEdgeError, UnknownNodeError


@dataclass(frozen=True)
class Node:
    id: int
    position: tuple[float, float]


@dataclass
class Edge:
    """One basic unit between two nodes; (u, v) is the reference direction."""

    id: int
    u: int
    v: int
    unit: BasicUnit
    length: float


class Network:
    """Node positions plus memristive edges with an adjacency index.

    The topology is fixed after construction; the mutable simulation state is
    the set of device memristances inside the edges' units.
    """

    def __init__(self, nodes: dict[int, Node], edges: dict[int, Edge],
                 params: DeviceParams, grid_shape: tuple[int, int] | None = None):
        self.nodes = nodes
        self.edges = edges
        self.params = params
        self.grid_shape = grid_shape
        self.adjacency: dict[int, list[int]] = {nid: [] for nid in nodes}
        for e in edges.values():
            if e.u == e.v:
                raise ValueError(f"edge {e.id} is a self-loop")
            if e.u not in nodes or e.v not in nodes:
                raise ValueError(f"edge {e.id} references unknown node")
            self.adjacency[e.u].append(e.id)
            self.adjacency[e.v].append(e.id)

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    def node_ids(self) -> list[int]:
        return sorted(self.nodes)

    def edge_ids(self) -> list[int]:
        return sorted(self.edges)

    def edge(self, eid: int) -> Edge:
        try:
            return self.edges[eid]
        except KeyError:
            raise UnknownEdgeError(f"no edge {eid}") from None

    def node(self, nid: int) -> Node:
        try:
            return self.nodes[nid]
        except KeyError:
            raise UnknownNodeError(f"no node {nid}") from None

    def other_end(self, eid: int, nid: int) -> int:
        e = self.edge(eid)
        return e.v if nid == e.u else e.u

    def nearest_node(self, xy: tuple[float, float]) -> int:
        ids = self.node_ids()
        pos = np.array([self.nodes[i].position for i in ids])
        d2 = (pos[:, 0] - xy[0]) ** 2 + (pos[:, 1] - xy[1]) ** 2
        return ids[int(np.argmin(d2))]

    def unit_resistances(self) -> dict[int, float]:
        from .device import unit_resistance
        return {eid: unit_resistance(e.unit) for eid, e in sorted(self.edges.items())}

    def copy(self) -> "Network":
        edges = {eid: Edge(e.id, e.u, e.v, e.unit, e.length)
                 for eid, e in self.edges.items()}
        return Network(dict(self.nodes), edges, self.params, self.grid_shape)


def _fresh_edges(pairs_lengths, params: DeviceParams) -> dict[int, Edge]:
    return {i: Edge(i, u, v, BasicUnit.fresh(params), ln)
            for i, (u, v, ln) in enumerate(pairs_lengths)}


def generate_grid(rows: int, cols: int, params: DeviceParams | None = None) -> Network:
    """rows x cols lattice with unit-length nearest-neighbor edges.

    Node (r, c) has id r*cols + c and position (x=c, y=r). Horizontal edges
    come first (reference direction left to right, row-major), then vertical
    (top to bottom), so the horizontal edge (r, c)-(r, c+1) has id
    r*(cols-1) + c.
    """
    if rows < 2 or cols < 2:
        raise ValueError("grid needs rows >= 2 and cols >= 2")
    params = params or DeviceParams()
    nodes = {r * cols + c: Node(r * cols + c, (float(c), float(r)))
             for r in range(rows) for c in range(cols)}
    pairs = []
    for r in range(rows):
        for c in range(cols - 1):
            pairs.append((r * cols + c, r * cols + c + 1, 1.0))
    for r in range(rows - 1):
        for c in range(cols):
            pairs.append((r * cols + c, (r + 1) * cols + c, 1.0))
    return Network(nodes, _fresh_edges(pairs, params), params, grid_shape=(rows, cols))


def grid_node(net: Network, row: int, col: int) -> int:
    if net.grid_shape is None:
        raise ValueError("not a grid network")
    rows, cols = net.grid_shape
    if not (0 <= row < rows and 0 <= col < cols):
        raise ValueError(f"({row}, {col}) outside {rows}x{cols} grid")
    return row * cols + col


def grid_horizontal_edge(net: Network, row: int, col: int) -> int:
    """Id of the edge between (row, col) and (row, col+1)."""
    if net.grid_shape is None:
        raise ValueError("not a grid network")
    rows, cols = net.grid_shape
    if not (0 <= row < rows and 0 <= col < cols - 1):
        raise ValueError(f"no horizontal edge at ({row}, {col})")
    return row * (cols - 1) + col


def generate_random(n_scale: int, seed: int, params: DeviceParams | None = None,
                    min_dist: float = 0.9, connect_radius: float = 1.5,
                    node_count: int | None = None,
                    max_rejections: int = 10000) -> Network:
    """Random planar network in an n_scale x n_scale square.

    Nodes are placed by rejection sampling under the pairwise min_dist
    constraint (strict: a candidate closer than min_dist to any accepted
    node is rejected); every pair closer than connect_radius gets an edge.
    Edge crossings are left unresolved. Deterministic for a fixed seed.

    The default node count 0.75*n_scale^2 stays safely below the jamming
    density of sequential rejection sampling at min_dist 0.9 (about
    0.86 nodes per unit area), where the rejection cap would trigger.
    """
    if n_scale < 2:
        raise ValueError("n_scale must be >= 2")
    params = params or DeviceParams()
    count = node_count if node_count is not None else round(0.75 * n_scale * n_scale)
    rng = np.random.default_rng(seed)

    cell = float(min_dist)
    buckets: dict[tuple[int, int], list[np.ndarray]] = {}
    pts: list[np.ndarray] = []
    rejections = 0
    while len(pts) < count:
        p = rng.uniform(0.0, n_scale, 2)
        ci, cj = int(p[0] / cell), int(p[1] / cell)
        ok = True
        for di in (-1, 0, 1):
            for dj in (-1, 0, 1):
                for q in buckets.get((ci + di, cj + dj), ()):
                    if float(np.hypot(p[0] - q[0], p[1] - q[1])) < min_dist:
                        ok = False
                        break
                if not ok:
                    break
            if not ok:
                break
        if ok:
            pts.append(p)
            buckets.setdefault((ci, cj), []).append(p)
            rejections = 0
        else:
            rejections += 1
            if rejections > max_rejections:
                raise SamplingError(
                    f"placed {len(pts)}/{count} nodes before {max_rejections} "
                    f"consecutive rejections; lower node_count or min_dist")

    nodes = {i: Node(i, (float(p[0]), float(p[1]))) for i, p in enumerate(pts)}

    cell = float(connect_radius)
    buckets2: dict[tuple[int, int], list[int]] = {}
    for i, p in enumerate(pts):
        buckets2.setdefault((int(p[0] / cell), int(p[1] / cell)), []).append(i)
    pairs = []
    for i, p in enumerate(pts):
        ci, cj = int(p[0] / cell), int(p[1] / cell)
        for di in (-1, 0, 1):
            for dj in (-1, 0, 1):
                for j in buckets2.get((ci + di, cj + dj), ()):
                    if j > i:
                        d = float(np.hypot(p[0] - pts[j][0], p[1] - pts[j][1]))
                        if d < connect_radius:
                            pairs.append((i, j, d))
    pairs.sort(key=lambda t: (t[0], t[1]))
    return Network(nodes, _fresh_edges(pairs, params), params)


def remove_edges(net: Network, edge_ids) -> Network:
    """Network without the given edges; nodes and other edge states unchanged."""
    ids = list(edge_ids)
    if len(set(ids)) != len(ids):
        raise UnknownEdgeError("duplicate edge id in removal set")
    for eid in ids:
        if eid not in net.edges:
            raise UnknownEdgeError(f"no edge {eid}")
    doomed = set(ids)
    edges = {eid: Edge(e.id, e.u, e.v, e.unit, e.length)
             for eid, e in net.edges.items() if eid not in doomed}
    return Network(dict(net.nodes), edges, net.params, net.grid_shape)


def reduced_network(net: Network, on_edges) -> Network:
    """Subnetwork of the given edges and their endpoints, states re-initialized.

    Used by post-processing: the previous solution's ON set becomes a fresh
    all-OFF network for a rerun of the same algorithm. Node and edge ids are
    preserved.
    """
    ids = sorted(set(on_edges))
    if not ids:
        raise ValueError("empty edge set")
    edges = {}
    keep_nodes = set()
    for eid in ids:
        e = net.edge(eid)
        edges[eid] = Edge(e.id, e.u, e.v, BasicUnit.fresh(net.params), e.length)
        keep_nodes.add(e.u)
        keep_nodes.add(e.v)
    nodes = {nid: net.nodes[nid] for nid in sorted(keep_nodes)}
    return Network(nodes, edges, net.params, grid_shape=None)


def reset_states(net: Network) -> Network:
    """Copy of the network with every device re-initialized to r_off."""
    edges = {eid: Edge(e.id, e.u, e.v, BasicUnit.fresh(net.params), e.length)
             for eid, e in net.edges.items()}
    return Network(dict(net.nodes), edges, net.params, net.grid_shape)


def connected(net: Network, a: int, b: int) -> bool:
    """True iff a path of edges joins a and b."""
    net.node(a), net.node(b)
    if a == b:
        return True
    seen = {a}
    stack = [a]
    while stack:
        x = stack.pop()
        for eid in net.adjacency[x]:
            y = net.other_end(eid, x)
            if y == b:
                return True
            if y not in seen:
                seen.add(y)
                stack.append(y)
    return False
