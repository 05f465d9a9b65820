"""Time integration of the network under applied voltage pulses.

Each step is quasi-static: solve the DC operating point, then advance every
device one explicit Euler step with the edge current (synchronous update),
clamping states to [r_on, r_off]. Steady state is the exact fixed point "a
full step changes no device state": with a constant source the next solve is
then identical, so the network is frozen forever. This is decidable without
an epsilon because sub-threshold devices have exactly zero rate and clamped
devices stay clamped.

Note the detection condition is state change, not "all currents below
threshold": a converged solution path holds ON devices at the r_on clamp
while they carry well over the threshold current, so a literal
below-threshold test would never fire on exactly the states the solver is
meant to reach.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field, replace

import numpy as np

from .circuit import LaplacianSystem, SourceSpec
from .device import BasicUnit, DeviceParams, DynamicsMode, MemristiveDevice
from .errors import DisconnectedTerminalsError
from .topology import Edge, Network, connected


@dataclass(frozen=True)
class PulseSpec:
    """One square voltage pulse across a node pair.

    duration None means run to steady state; a float is a pulse width in
    seconds.
    """

    input: int
    output: int
    amplitude: float
    duration: float | None = None

    def __post_init__(self):
        if self.input == self.output:
            raise ValueError("input and output must differ")
        if not np.isfinite(self.amplitude):
            raise ValueError("amplitude must be finite")
        if self.duration is not None and self.duration <= 0:
            raise ValueError("duration must be positive")


@dataclass(frozen=True)
class SimConfig:
    """Integration controls.

    dt None picks the step so the largest state change of the pulse's first
    step is 1% of (r_off - r_on). record_stride n keeps every n-th sample
    (plus the initial state). check_kcl accumulates the worst per-step
    Kirchhoff residual, relative to max(source current, 1 uA).
    """

    dt: float | None = None
    max_steps: int = 1_000_000
    record_stride: int = 1
    mode: DynamicsMode = DynamicsMode.BIPOLAR
    check_kcl: bool = False

    def __post_init__(self):
        if self.dt is not None and self.dt <= 0:
            raise ValueError("dt must be positive")
        if self.max_steps < 1:
            raise ValueError("max_steps must be >= 1")
        if self.record_stride < 1:
            raise ValueError("record_stride must be >= 1")


@dataclass
class Trajectory:
    """Sampled time series of one pulse.

    Arrays are indexed [sample, edge-column]; edge_ids maps columns to edge
    ids. Sample count is floor(steps_taken / record_stride) + 1, the initial
    state included. dt is the first step's size (with automatic stepping the
    time axis is non-uniform; use times).
    """

    times: np.ndarray
    unit_resistance: np.ndarray
    edge_current: np.ndarray
    source_current: np.ndarray
    edge_ids: np.ndarray
    reached_steady: bool
    steps_taken: int
    dt: float
    t_end: float
    max_kcl_residual: float = 0.0

    def column(self, edge_id: int) -> int:
        idx = np.where(self.edge_ids == edge_id)[0]
        if not len(idx):
            raise KeyError(f"edge {edge_id} not recorded")
        return int(idx[0])

    def resistance_series(self, edge_id: int) -> np.ndarray:
        return self.unit_resistance[:, self.column(edge_id)]

    def current_series(self, edge_id: int) -> np.ndarray:
        return self.edge_current[:, self.column(edge_id)]


@dataclass
class PulseOutcome:
    steps_taken: int
    reached_steady: bool
    t_end: float
    final_source_current: float


@dataclass
class SequenceSummary:
    pulses: list[PulseOutcome] = field(default_factory=list)


class _Engine:
    """Vectorized device state shared across the pulses of one simulation."""

    def __init__(self, net: Network):
        self.net = net
        self.edge_ids = np.array(net.edge_ids(), dtype=np.int64)
        self.xa = np.array([net.edges[int(e)].unit.device_a.x for e in self.edge_ids])
        self.xb = np.array([net.edges[int(e)].unit.device_b.x for e in self.edge_ids])
        self.params = net.params
        self._sys_cache: dict[tuple[int, ...], LaplacianSystem] = {}
        self._proto: LaplacianSystem | None = None

    def system(self, src: SourceSpec) -> LaplacianSystem:
        key = tuple(sorted(src.fixed_potentials.items()))
        sys_ = self._sys_cache.get(key)
        if sys_ is None:
            sys_ = LaplacianSystem(self.net, src, allow_floating=True,
                                   _topo=self._proto)
            self._proto = self._proto or sys_
            self._sys_cache[key] = sys_
        return sys_

    def run_pulse(self, pulse: PulseSpec, cfg: SimConfig,
                  record: bool = True) -> tuple[Trajectory, PulseOutcome]:
        p = self.params
        gamma, i_t = p.gamma, p.i_threshold
        r_on, r_off = p.r_on, p.r_off
        unipolar = cfg.mode is DynamicsMode.UNIPOLAR

        src = SourceSpec.pair(pulse.input, pulse.output, pulse.amplitude)
        sys_ = self.system(src)
        in_dense = int(np.where(sys_.node_ids == pulse.input)[0][0])
        src_u = sys_.u == in_dense
        src_v = sys_.v == in_dense

        stride = cfg.record_stride
        times, res_hist, cur_hist, src_hist = [], [], [], []
        max_rel_residual = 0.0

        xa, xb = self.xa, self.xb
        duration = pulse.duration
        first_dt = None
        steps = 0
        reached_steady = False
        t = 0.0
        source_now = 0.0
        range_cap = 0.01 * (r_off - r_on)

        while True:
            g = 1.0 / xa + 1.0 / xb
            _, ie = sys_.solve(g)
            source_now = float(ie[src_u].sum() - ie[src_v].sum())

            if cfg.check_kcl:
                res = sys_.kcl_residual(ie)
                rel = res / max(abs(source_now), 1e-6)
                if rel > max_rel_residual:
                    max_rel_residual = rel

            # device-frame currents: a has orientation +1, b has -1
            excess = np.abs(ie) - i_t
            rate = np.where(excess > 0.0, gamma * excess, 0.0)
            if unipolar:
                da = -rate
                db = -rate
            else:
                da = np.sign(ie) * rate
                db = -da

            if record and steps % stride == 0:
                times.append(t)
                res_hist.append(1.0 / g)
                cur_hist.append(ie.copy())
                src_hist.append(source_now)

            if duration is not None and t >= duration * (1.0 - 1e-12):
                break
            if steps >= cfg.max_steps:
                break

            if cfg.dt is not None:
                dt = cfg.dt
            else:
                # Size each step so the fastest state that can actually move
                # changes by at most 1% of (r_off - r_on). Devices pushed
                # further into a clamp contribute nothing regardless of
                # their current.
                eff_a = np.abs(da) * (((da < 0) & (xa > r_on)) | ((da > 0) & (xa < r_off)))
                eff_b = np.abs(db) * (((db < 0) & (xb > r_on)) | ((db > 0) & (xb < r_off)))
                mx = max(eff_a.max(), eff_b.max())
                if mx == 0.0:
                    # Frozen now and, under a constant source, forever.
                    reached_steady = True
                    if duration is not None:
                        t = duration
                    break
                dt = range_cap / mx
                if duration is not None:
                    dt = min(dt, duration - t)
            if first_dt is None:
                first_dt = dt

            na = np.clip(xa + da * dt, r_on, r_off)
            nb = np.clip(xb + db * dt, r_on, r_off)
            if np.array_equal(na, xa) and np.array_equal(nb, xb):
                reached_steady = True
                if duration is not None:
                    t = duration
                break
            xa, xb = na, nb
            steps += 1
            t += dt

        self.xa, self.xb = xa, xb
        traj = Trajectory(
            times=np.array(times),
            unit_resistance=np.array(res_hist) if res_hist else np.zeros((0, len(self.edge_ids))),
            edge_current=np.array(cur_hist) if cur_hist else np.zeros((0, len(self.edge_ids))),
            source_current=np.array(src_hist),
            edge_ids=self.edge_ids.copy(),
            reached_steady=reached_steady,
            steps_taken=steps,
            dt=float(first_dt) if first_dt is not None else 0.0,
            t_end=float(t),
            max_kcl_residual=max_rel_residual,
        )
        outcome = PulseOutcome(steps, reached_steady, float(t), source_now)
        return traj, outcome

    def network(self) -> Network:
        """Materialize the current device states as a new Network."""
        net = self.net
        edges = {}
        for col, eid in enumerate(self.edge_ids):
            e = net.edges[int(eid)]
            unit = BasicUnit(
                MemristiveDevice(float(self.xa[col]), 1, net.params),
                MemristiveDevice(float(self.xb[col]), -1, net.params),
            )
            edges[int(eid)] = Edge(e.id, e.u, e.v, unit, e.length)
        return Network(dict(net.nodes), edges, net.params, net.grid_shape)


def apply_pulse(net: Network, pulse: PulseSpec, cfg: SimConfig | None = None
                ) -> tuple[Network, Trajectory]:
    """Run one pulse and return the evolved network plus its trajectory.

    Run-to-steady pulses that exhaust max_steps return with
    reached_steady=False and the partial state; callers that require
    convergence should check the flag.
    """
    cfg = cfg or SimConfig()
    if net.n_edges == 0:
        raise ValueError("network has no edges")
    if not connected(net, pulse.input, pulse.output):
        raise DisconnectedTerminalsError(
            f"nodes {pulse.input} and {pulse.output} are not connected")
    eng = _Engine(net)
    traj, _ = eng.run_pulse(pulse, cfg)
    return eng.network(), traj


def run_pulse_sequence(net: Network, pulses, cfg: SimConfig | None = None
                       ) -> tuple[Network, SequenceSummary]:
    """Apply pulses in order, carrying device state across pulses.

    Trajectories are not recorded (the summary keeps per-pulse step counts);
    sequences are how the traveling-salesman schedule accumulates its memory
    of previous pulses.
    """
    cfg = cfg or SimConfig()
    pulses = list(pulses)
    for p in pulses:
        if not connected(net, p.input, p.output):
            raise DisconnectedTerminalsError(
                f"nodes {p.input} and {p.output} are not connected")
    summary = SequenceSummary()
    if not pulses:
        return net.copy(), summary
    eng = _Engine(net)
    for p in pulses:
        _, outcome = eng.run_pulse(p, cfg, record=False)
        summary.pulses.append(outcome)
    return eng.network(), summary


def random_pulse_schedule(cities, n_pulses: int, amplitude: float, seed: int,
                          duration: float | None = None) -> list[PulseSpec]:
    """Pulses between uniformly random distinct city pairs, random polarity.

    Deterministic for a fixed seed. Polarity only flips the sign of the
    applied voltage; in unipolar mode the device response is
    polarity-independent, matching hardware that rectifies the edge voltage.
    """
    cities = list(cities)
    if len(cities) < 2:
        raise ValueError("need at least 2 cities")
    rng = np.random.default_rng(seed)
    pairs = list(itertools.combinations(sorted(cities), 2))
    out = []
    for _ in range(n_pulses):
        a, b = pairs[int(rng.integers(len(pairs)))]
        sign = 1.0 if rng.integers(2) else -1.0
        out.append(PulseSpec(a, b, sign * amplitude, duration))
    return out
