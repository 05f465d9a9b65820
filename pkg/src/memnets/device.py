"""Threshold-type bipolar memristive devices and the anti-parallel basic unit.

A device is a resistor whose memristance x (ohms) is itself the internal
state: it drifts at rate gamma*(|i| - i_threshold) when the magnitude of the
current through it exceeds the threshold, in the direction given by the
current sign, and is hard-clamped to [r_on, r_off].

A basic unit is one network edge: two such devices wired in parallel with
opposite polarity, which symmetrizes the edge response to the sign of the
applied voltage. The state-driving current for each device is the full unit
(edge) current in that device's orientation frame; an edge therefore starts
switching as soon as the edge current magnitude crosses the device threshold.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace


class DynamicsMode(enum.Enum):
    """State-update rule selector.

    BIPOLAR follows the signed rate equation. UNIPOLAR drives the state
    toward r_on regardless of current direction (used only by the
    traveling-salesman procedure, where it prevents back-and-forth device
    switching under random-polarity pulses).
    """

    BIPOLAR = "bipolar"
    UNIPOLAR = "unipolar"


@dataclass(frozen=True)
class DeviceParams:
    """Device constants: limiting memristances, switching rate, threshold."""

    r_on: float = 10.0          # ohm
    r_off: float = 200.0        # ohm
    gamma: float = 1.0e6        # ohm / (s * A)
    i_threshold: float = 0.010  # A

    def __post_init__(self):
        if not (0.0 < self.r_on < self.r_off):
            raise ValueError(f"need 0 < r_on < r_off, got {self.r_on}, {self.r_off}")
        if self.gamma <= 0.0:
            raise ValueError("gamma must be positive")
        if self.i_threshold < 0.0:
            raise ValueError("i_threshold must be non-negative")

    @property
    def memory_content(self) -> float:
        return self.r_off / self.r_on

    @classmethod
    def from_memory_content(cls, ratio: float, r_off: float = 200.0,
                            gamma: float = 1.0e6, i_threshold: float = 0.010) -> "DeviceParams":
        """Build params with a given r_off/r_on ratio at fixed r_off."""
        return cls(r_on=r_off / ratio, r_off=r_off, gamma=gamma, i_threshold=i_threshold)

    # Basic-unit limiting values: OFF is both devices at r_off, ON is the
    # (r_on, r_off) combination.
    @property
    def unit_r_on(self) -> float:
        return self.r_on * self.r_off / (self.r_on + self.r_off)

    @property
    def unit_r_off(self) -> float:
        return self.r_off / 2.0


@dataclass(frozen=True)
class MemristiveDevice:
    """One device: memristance x, polarity relative to the edge direction."""

    x: float
    orientation: int  # +1 or -1
    params: DeviceParams

    def __post_init__(self):
        if self.orientation not in (1, -1):
            raise ValueError("orientation must be +1 or -1")
        if not (self.params.r_on <= self.x <= self.params.r_off):
            raise ValueError(f"x={self.x} outside [{self.params.r_on}, {self.params.r_off}]")


def device_resistance(d: MemristiveDevice) -> float:
    """R(x) is the identity: the state variable is the memristance."""
    return d.x


def state_derivative(d: MemristiveDevice, i_device: float, mode: DynamicsMode) -> float:
    """Unclamped dx/dt for the current through this device (its own frame).

    Zero inside the threshold deadband. Unipolar mode forces the sign
    negative (always toward r_on).
    """
    p = d.params
    excess = abs(i_device) - p.i_threshold
    if excess <= 0.0:
        return 0.0
    rate = p.gamma * excess
    if mode is DynamicsMode.UNIPOLAR:
        return -rate
    return math.copysign(rate, i_device)


def step_device(d: MemristiveDevice, i_device: float, dt: float,
                mode: DynamicsMode) -> MemristiveDevice:
    """One explicit Euler step with hard clamping at r_on / r_off."""
    if dt <= 0.0:
        raise ValueError("dt must be positive")
    x = d.x + state_derivative(d, i_device, mode) * dt
    x = min(max(x, d.params.r_on), d.params.r_off)
    return replace(d, x=x)


@dataclass(frozen=True)
class BasicUnit:
    """An edge's device pair: device_a at +1, device_b at -1 orientation."""

    device_a: MemristiveDevice
    device_b: MemristiveDevice

    def __post_init__(self):
        if self.device_a.orientation != 1 or self.device_b.orientation != -1:
            raise ValueError("device_a must have orientation +1 and device_b -1")

    @classmethod
    def fresh(cls, params: DeviceParams) -> "BasicUnit":
        """Both devices initialized to the OFF (high-resistance) state."""
        return cls(MemristiveDevice(params.r_off, 1, params),
                   MemristiveDevice(params.r_off, -1, params))


def unit_conductance(u: BasicUnit) -> float:
    """Parallel conductance 1/x_a + 1/x_b (siemens)."""
    return 1.0 / u.device_a.x + 1.0 / u.device_b.x


def unit_resistance(u: BasicUnit) -> float:
    return 1.0 / unit_conductance(u)


def step_unit(u: BasicUnit, i_unit: float, dt: float, mode: DynamicsMode) -> BasicUnit:
    """Step both devices synchronously with the unit current.

    Each device sees the full edge current multiplied by its orientation, so
    the pair responds symmetrically: one device is driven toward r_on, the
    other toward r_off, whichever matches the current sign.
    """
    return BasicUnit(
        step_device(u.device_a, i_unit * u.device_a.orientation, dt, mode),
        step_device(u.device_b, i_unit * u.device_b.orientation, dt, mode),
    )
