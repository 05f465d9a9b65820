"""Scenario configuration: the pydantic models double as the YAML config
schema for the CLI and the request schema of the HTTP service.

Device defaults reproduce the reference parameter set (r_off 200 ohm,
gamma 1e6 ohm/(s*A), threshold 10 mA, r_on 10 ohm), so an empty device
block runs the standard grid experiments.
"""

from __future__ import annotations

from typing import Literal, Union

import yaml
from pydantic import BaseModel, Field, ValidationError, model_validator

from .device import DeviceParams
from .errors import ConfigError
from .topology import Network, generate_grid, generate_random, grid_horizontal_edge, grid_node


class GridSpec(BaseModel):
    kind: Literal["grid"] = "grid"
    rows: int = Field(ge=2)
    cols: int = Field(ge=2)


class RandomSpec(BaseModel):
    kind: Literal["random"] = "random"
    n_scale: int = Field(ge=2)
    seed: int = 0
    node_count: int | None = None
    min_dist: float = 0.9
    connect_radius: float = 1.5


NetworkSpec = Union[GridSpec, RandomSpec]


class DeviceSpec(BaseModel):
    r_on: float = 10.0
    r_off: float = 200.0
    gamma: float = 1.0e6
    i_threshold: float = 0.010

    def to_params(self) -> DeviceParams:
        return DeviceParams(self.r_on, self.r_off, self.gamma, self.i_threshold)


class NodeRef(BaseModel):
    """A node by id, by grid (row, col), or by nearest position."""

    id: int | None = None
    row: int | None = None
    col: int | None = None
    near: tuple[float, float] | None = None

    @model_validator(mode="after")
    def _one_form(self):
        forms = [self.id is not None,
                 self.row is not None or self.col is not None,
                 self.near is not None]
        if sum(forms) != 1:
            raise ValueError("give exactly one of: id, row/col, near")
        if (self.row is None) != (self.col is None):
            raise ValueError("row and col go together")
        return self

    def resolve(self, net: Network) -> int:
        if self.id is not None:
            return net.node(self.id).id
        if self.row is not None:
            return grid_node(net, self.row, self.col)
        return net.nearest_node(self.near)


class EdgeRef(BaseModel):
    """An edge by id or as the horizontal grid unit at (row, col)-(row, col+1)."""

    id: int | None = None
    row: int | None = None
    col: int | None = None

    @model_validator(mode="after")
    def _one_form(self):
        if (self.id is None) == (self.row is None):
            raise ValueError("give either id or row/col")
        if (self.row is None) != (self.col is None):
            raise ValueError("row and col go together")
        return self

    def resolve(self, net: Network) -> int:
        if self.id is not None:
            return net.edge(self.id).id
        return grid_horizontal_edge(net, self.row, self.col)


class SimSpec(BaseModel):
    dt: float | None = None
    max_steps: int = 1_000_000
    record_stride: int = 1


class TspSpec(BaseModel):
    n_pulses: int = 120
    schedule_seed: int = 0
    passes: int = 2
    duration_fraction: float = 0.1
    pulse_duration: float | None = None


class EntropyStudySpec(BaseModel):
    """One run-to-steady pulse per (memory-content ratio, voltage) pair; the
    reported trace holds the frozen state for hold_factor-1 extra trajectory
    lengths, emulating a pulse width chosen longer than the switching
    transient."""

    ratios: list[float] = [20.0, 10.0, 4.0, 1.25]
    voltages: list[float] = [6.0, 6.75, 10.0, 15.25]
    hold_factor: float = 2.0

    @model_validator(mode="after")
    def _aligned(self):
        if len(self.ratios) != len(self.voltages):
            raise ValueError("ratios and voltages must align")
        return self


class ScenarioConfig(BaseModel):
    name: str = "scenario"
    algorithm: Literal["shortest_path", "heal", "tsp", "entropy_study"]
    network: NetworkSpec = Field(discriminator="kind")
    device: DeviceSpec = DeviceSpec()
    amplitude: float = 6.0
    terminals: list[NodeRef] | None = None
    cities: list[NodeRef] | None = None
    sim: SimSpec = SimSpec()
    post_process_passes: int = 0
    damage: list[EdgeRef] | None = None
    tsp: TspSpec = TspSpec()
    entropy_study: EntropyStudySpec = EntropyStudySpec()
    cross_section_column: int | None = None
    render: bool = True

    @model_validator(mode="after")
    def _needs(self):
        if self.algorithm in ("shortest_path", "heal"):
            if not self.terminals or len(self.terminals) != 2:
                raise ValueError(f"{self.algorithm} needs exactly 2 terminals")
        if self.algorithm == "heal" and not self.damage:
            raise ValueError("heal needs a damage list")
        if self.algorithm == "tsp":
            if not self.cities or len(self.cities) < 3:
                raise ValueError("tsp needs at least 3 cities")
        return self

    def build_network(self, seed_override: int | None = None) -> Network:
        params = self.device.to_params()
        if isinstance(self.network, GridSpec):
            return generate_grid(self.network.rows, self.network.cols, params)
        r = self.network
        seed = r.seed if seed_override is None else seed_override
        return generate_random(r.n_scale, seed, params, r.min_dist,
                               r.connect_radius, r.node_count)


def load_config(path: str) -> ScenarioConfig:
    try:
        with open(path) as fh:
            raw = yaml.safe_load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: top level must be a mapping")
    try:
        return ScenarioConfig.model_validate(raw)
    except ValidationError as exc:
        lines = [f"{'.'.join(str(p) for p in e['loc'])}: {e['msg']}"
                 for e in exc.errors()]
        raise ConfigError(f"{path}: " + "; ".join(lines)) from exc
