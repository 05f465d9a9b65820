"""DC solve of Kirchhoff's current law on a memristive network.

Fixed-potential (Dirichlet) nodes are eliminated from the weighted-graph
Laplacian; the reduced symmetric positive definite system is solved by a
direct sparse factorization, switching to conjugate gradients with diagonal
preconditioning beyond 50k unknowns.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .device import unit_conductance
from .errors import SingularNetworkError, UnknownEdgeError, UnknownNodeError
from .topology import Network

_DIRECT_LIMIT = 50_000


@dataclass(frozen=True)
class SourceSpec:
    """Fixed node potentials (volts). Typically input at V and output at 0."""

    fixed_potentials: dict[int, float]

    def __post_init__(self):
        if not self.fixed_potentials:
            raise ValueError("at least one node must be fixed")

    @classmethod
    def pair(cls, input_node: int, output_node: int, amplitude: float) -> "SourceSpec":
        if input_node == output_node:
            raise ValueError("input and output must differ")
        return cls({input_node: float(amplitude), output_node: 0.0})


@dataclass
class SolveResult:
    """Node potentials, signed edge currents (in each edge's reference
    direction), per-fixed-node injected currents, and the total source
    current (sum of positive injections)."""

    potentials: dict[int, float]
    edge_currents: dict[int, float]
    injections: dict[int, float]
    source_current: float


class LaplacianSystem:
    """Reusable assembly of the reduced Kirchhoff system for one network
    topology and one set of fixed nodes.

    The sparsity pattern, index maps and right-hand-side scatter are built
    once; only conductance values change between solves, which is what the
    per-step loop of the dynamics engine needs.

    Components with no fixed node make the reduced system singular; by
    default that raises. With allow_floating=True such components are pinned
    at 0 V instead, which leaves all their edge currents exactly zero (the
    physical behavior of an isolated island).
    """

    def __init__(self, net: Network, src: SourceSpec, allow_floating: bool = False,
                 _topo: "LaplacianSystem | None" = None):
        for nid in src.fixed_potentials:
            net.node(nid)
        self.net = net
        self.src = src
        if _topo is not None:
            self.edge_ids = _topo.edge_ids
            self.node_ids = _topo.node_ids
            self.u = _topo.u
            self.v = _topo.v
            dense = _topo._dense
        else:
            self.edge_ids = np.array(net.edge_ids(), dtype=np.int64)
            eu = np.array([net.edges[e].u for e in self.edge_ids], dtype=np.int64)
            ev = np.array([net.edges[e].v for e in self.edge_ids], dtype=np.int64)
            node_ids = np.array(net.node_ids(), dtype=np.int64)
            dense = {int(n): i for i, n in enumerate(node_ids)}
            self.node_ids = node_ids
            self.u = np.array([dense[int(x)] for x in eu], dtype=np.int64)
            self.v = np.array([dense[int(x)] for x in ev], dtype=np.int64)
        self._dense = dense

        n = len(self.node_ids)
        fixed_dense = np.array(sorted(dense[nid] for nid in src.fixed_potentials),
                               dtype=np.int64)
        self.vfixed = np.zeros(n)
        for nid, pot in src.fixed_potentials.items():
            self.vfixed[dense[nid]] = pot
        is_fixed = np.zeros(n, dtype=bool)
        is_fixed[fixed_dense] = True

        reach = self._reachable_from(fixed_dense)
        if not reach.all():
            if not allow_floating:
                bad = int(np.count_nonzero(~reach))
                raise SingularNetworkError(
                    f"{bad} node(s) lie in components with no fixed potential")
            is_fixed[~reach] = True  # pinned at 0 V
        self.is_fixed = is_fixed

        free = np.where(~is_fixed)[0]
        self.free = free
        pos = -np.ones(n, dtype=np.int64)
        pos[free] = np.arange(len(free))
        uu, vv = pos[self.u], pos[self.v]
        u_free, v_free = uu >= 0, vv >= 0
        both = u_free & v_free
        self._rows = np.concatenate([uu[u_free], vv[v_free], uu[both], vv[both]])
        self._cols = np.concatenate([uu[u_free], vv[v_free], vv[both], uu[both]])
        self._sign = np.concatenate([np.ones(u_free.sum() + v_free.sum()),
                                     -np.ones(2 * both.sum())])
        self._gidx = np.concatenate([np.where(u_free)[0], np.where(v_free)[0],
                                     np.where(both)[0], np.where(both)[0]])
        self._rhs_u = np.where(u_free & ~v_free)[0]  # edges: u free, v fixed
        self._rhs_v = np.where(v_free & ~u_free)[0]
        self._uu, self._vv = uu, vv

    def _reachable_from(self, seeds: np.ndarray) -> np.ndarray:
        n = len(self.node_ids)
        adj_rows = np.concatenate([self.u, self.v])
        adj_cols = np.concatenate([self.v, self.u])
        A = sp.csr_matrix((np.ones(len(adj_rows)), (adj_rows, adj_cols)), shape=(n, n))
        reach = np.zeros(n, dtype=bool)
        reach[seeds] = True
        frontier = seeds
        while len(frontier):
            nxt = np.unique(A[frontier].indices)
            nxt = nxt[~reach[nxt]]
            reach[nxt] = True
            frontier = nxt
        return reach

    def conductances(self) -> np.ndarray:
        """Current unit conductances in edge_ids order."""
        return np.array([unit_conductance(self.net.edges[int(e)].unit)
                         for e in self.edge_ids])

    def solve(self, g: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Potentials (dense-node order) and signed edge currents for the
        given per-edge conductances."""
        nfree = len(self.free)
        phi = self.vfixed.copy()
        if nfree:
            L = sp.csc_matrix((self._sign * g[self._gidx], (self._rows, self._cols)),
                              shape=(nfree, nfree))
            b = np.zeros(nfree)
            eu = self._rhs_u
            np.add.at(b, self._uu[eu], g[eu] * self.vfixed[self.v[eu]])
            ev = self._rhs_v
            np.add.at(b, self._vv[ev], g[ev] * self.vfixed[self.u[ev]])
            if nfree <= _DIRECT_LIMIT:
                lu = spla.splu(L, permc_spec="MMD_AT_PLUS_A",
                               options=dict(SymmetricMode=True))
                x = lu.solve(b)
            else:
                M = sp.diags(1.0 / L.diagonal())
                x, info = spla.cg(L, b, rtol=1e-12, atol=0.0, M=M)
                if info != 0:
                    raise SingularNetworkError(f"CG failed to converge (info={info})")
            if not np.all(np.isfinite(x)):
                raise SingularNetworkError("singular reduced system")
            phi[self.free] = x
        currents = (phi[self.u] - phi[self.v]) * g
        return phi, currents

    def injections(self, currents: np.ndarray) -> dict[int, float]:
        inj = {}
        for nid in sorted(self.src.fixed_potentials):
            dense = int(np.where(self.node_ids == nid)[0][0])
            out = currents[self.u == dense].sum() - currents[self.v == dense].sum()
            inj[nid] = float(out)
        return inj

    def kcl_residual(self, currents: np.ndarray) -> float:
        """Largest |net current| over free nodes."""
        n = len(self.node_ids)
        acc = np.zeros(n)
        np.add.at(acc, self.u, -currents)
        np.add.at(acc, self.v, currents)
        if not len(self.free):
            return 0.0
        return float(np.abs(acc[self.free]).max())


def solve_dc(net: Network, src: SourceSpec) -> SolveResult:
    """One DC operating point. Raises SingularNetworkError when a connected
    component contains no fixed node, and on non-finite conductances."""
    if net.n_edges == 0:
        raise ValueError("network has no edges")
    sys_ = LaplacianSystem(net, src)
    g = sys_.conductances()
    if not np.all(np.isfinite(g)):
        raise SingularNetworkError("non-finite conductance")
    phi, currents = sys_.solve(g)
    inj = sys_.injections(currents)
    source = sum(x for x in inj.values() if x > 0.0)
    potentials = {int(n): float(phi[i]) for i, n in enumerate(sys_.node_ids)}
    edge_currents = {int(e): float(c) for e, c in zip(sys_.edge_ids, currents)}
    return SolveResult(potentials, edge_currents, inj, float(source))


def cross_section_currents(net: Network, result: SolveResult,
                           section) -> list[tuple[int, float]]:
    """Signed currents crossing a cut, oriented from the input side toward
    the output side.

    The input side is the side of the cut holding the fixed node with the
    largest positive injection. The section must actually separate that node
    from some other fixed node.
    """
    section = list(section)
    for eid in section:
        if eid not in net.edges:
            raise UnknownEdgeError(f"no edge {eid}")
    if not result.injections:
        raise ValueError("result has no source nodes")
    input_node = max(result.injections, key=lambda k: result.injections[k])

    cut = set(section)
    side = {input_node}
    stack = [input_node]
    while stack:
        x = stack.pop()
        for eid in net.adjacency[x]:
            if eid in cut:
                continue
            y = net.other_end(eid, x)
            if y not in side:
                side.add(y)
                stack.append(y)
    others = [n for n in result.injections if n != input_node]
    if any(n in side for n in others):
        raise ValueError("section does not separate the input from the output")

    out = []
    for eid in section:
        e = net.edges[eid]
        sign = 1.0 if e.u in side else -1.0
        out.append((eid, sign * result.edge_currents[eid]))
    return out
