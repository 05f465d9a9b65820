"""Network state snapshots and trace files.

Snapshots are JSON with node positions, edge endpoint pairs, and both device
memristances per edge: enough to resume a simulation or re-render. Traces
are CSV, one row per recorded sample. All float formatting is fixed so
identical runs produce byte-identical files.
"""

from __future__ import annotations

import json

import numpy as np

from .device import BasicUnit, DeviceParams, MemristiveDevice
from .topology import Edge, Network, Node

FORMAT = "memnets-state-v1"


def _f(x: float) -> float:
    # round-trippable and stable across runs
    return float(repr(float(x)))


def network_snapshot(net: Network, sources: dict | None = None) -> dict:
    p = net.params
    snap = {
        "format": FORMAT,
        "device": {"r_on": p.r_on, "r_off": p.r_off, "gamma": p.gamma,
                   "i_threshold": p.i_threshold},
        "grid_shape": list(net.grid_shape) if net.grid_shape else None,
        "nodes": [[nid, _f(net.nodes[nid].position[0]), _f(net.nodes[nid].position[1])]
                  for nid in net.node_ids()],
        "edges": [[eid, net.edges[eid].u, net.edges[eid].v,
                   _f(net.edges[eid].length),
                   _f(net.edges[eid].unit.device_a.x),
                   _f(net.edges[eid].unit.device_b.x)]
                  for eid in net.edge_ids()],
    }
    if sources:
        snap["sources"] = sources
    return snap


def network_from_snapshot(snap: dict) -> Network:
    if snap.get("format") != FORMAT:
        raise ValueError(f"unsupported snapshot format {snap.get('format')!r}")
    d = snap["device"]
    params = DeviceParams(d["r_on"], d["r_off"], d["gamma"], d["i_threshold"])
    nodes = {int(nid): Node(int(nid), (float(x), float(y)))
             for nid, x, y in snap["nodes"]}
    edges = {}
    for eid, u, v, length, xa, xb in snap["edges"]:
        unit = BasicUnit(MemristiveDevice(float(xa), 1, params),
                         MemristiveDevice(float(xb), -1, params))
        edges[int(eid)] = Edge(int(eid), int(u), int(v), unit, float(length))
    gs = snap.get("grid_shape")
    return Network(nodes, edges, params, tuple(gs) if gs else None)


def write_snapshot(net: Network, path, sources: dict | None = None) -> None:
    with open(path, "w") as fh:
        json.dump(network_snapshot(net, sources), fh, sort_keys=True,
                  separators=(",", ":"))
        fh.write("\n")


def read_snapshot(path) -> Network:
    with open(path) as fh:
        return network_from_snapshot(json.load(fh))


def write_trace(path, times, source_current, entropy, tracked: dict) -> None:
    """CSV trace: time, source_current, entropy, then one unit-resistance
    column per tracked edge (columns sorted by edge id)."""
    cols = sorted(tracked)
    with open(path, "w") as fh:
        header = ["time_s", "source_current_a", "entropy_nats"] + \
                 [f"r_edge_{e}" for e in cols]
        fh.write(",".join(header) + "\n")
        ent = entropy if entropy is not None else [float("nan")] * len(times)
        for k in range(len(times)):
            row = [f"{times[k]:.12g}", f"{source_current[k]:.12g}", f"{ent[k]:.12g}"]
            row += [f"{tracked[e][k]:.12g}" for e in cols]
            fh.write(",".join(row) + "\n")
