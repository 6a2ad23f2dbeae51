"""Free-space channel: a phase rotation frozen over a stationarity window plus scalar loss."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .quantum import StateVector, gate_u_theta, _apply_matrix, _check_target


class Orbit(enum.Enum):
    LEO = "LEO"
    MEO = "MEO"
    GEO = "GEO"


DEFAULT_WINDOW_S = {Orbit.LEO: 0.5, Orbit.MEO: 0.5, Orbit.GEO: 10.0}


def orbit_windows(overrides: dict[Orbit, float] | None = None) -> dict[Orbit, float]:
    """Stationarity window per orbit; GEO must outlast MEO, which must not undercut LEO."""
    windows = dict(DEFAULT_WINDOW_S)
    if overrides:
        windows.update(overrides)
    if any(t <= 0 for t in windows.values()):
        raise ValueError("stationarity windows must be positive")
    if not windows[Orbit.GEO] > windows[Orbit.MEO] >= windows[Orbit.LEO]:
        raise ValueError(f"orbit windows violate GEO > MEO >= LEO: {windows}")
    return windows


def parse_orbit(value: str | Orbit) -> Orbit:
    if isinstance(value, Orbit):
        return value
    try:
        return Orbit(value.upper())
    except ValueError:
        raise ValueError(f"unknown orbit {value!r}; expected LEO, MEO or GEO") from None


@dataclass(frozen=True)
class ChannelInstance:
    theta: float
    window_s: float

    def __post_init__(self):
        if not (math.isfinite(self.theta) and 0.0 <= self.theta < 2 * math.pi):
            raise ValueError(f"channel angle {self.theta!r} outside [0, 2pi)")
        if not self.window_s > 0:
            raise ValueError("stationarity window must be positive")

    @property
    def gate(self) -> np.ndarray:
        return gate_u_theta(self.theta)


@dataclass(frozen=True)
class LinkParams:
    rep_rate_hz: float = 100e6
    window_s: float | None = None
    attenuation: float = 5e-5
    orbit: Orbit = Orbit.LEO
    windows: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "orbit", parse_orbit(self.orbit))
        if self.window_s is None:
            object.__setattr__(self, "window_s", orbit_windows(self.windows)[self.orbit])
        if not self.rep_rate_hz > 0:
            raise ValueError("repetition rate must be positive")
        if not self.window_s > 0:
            raise ValueError("stationarity window must be positive")
        if not 0 < self.attenuation <= 1:
            raise ValueError("attenuation must lie in (0, 1]")


def sample_channel(
    orbit: Orbit | str,
    rng: np.random.Generator,
    *,
    theta: float | None = None,
    window_s: float | None = None,
    windows: dict[Orbit, float] | None = None,
) -> ChannelInstance:
    """Draw one stationarity window's rotation, uniform on [0, 2pi).

    Successive windows are independent draws.
    """
    orbit = parse_orbit(orbit)
    if theta is None:
        theta = float(rng.uniform(0.0, 2 * math.pi))
    if window_s is None:
        window_s = orbit_windows(windows)[orbit]
    return ChannelInstance(theta, window_s)


def rotate(state: StateVector, theta: float, targets: Sequence[int]) -> StateVector:
    """Apply ``U_theta`` independently to each listed qubit."""
    _check_target(state, *targets)
    gate = gate_u_theta(theta)
    amps = state.amplitudes
    for t in targets:
        amps = _apply_matrix(amps, state.num_qubits, gate, (t,))
    return StateVector._trusted(amps)


def damage(state: StateVector, instance: ChannelInstance, targets: Sequence[int]) -> StateVector:
    return rotate(state, instance.theta, targets)


def transmit_count(
    sent: int, delta: float, mode: str = "expected", rng: np.random.Generator | None = None
) -> int:
    """Number of qubits surviving attenuation ``delta``."""
    if sent < 0:
        raise ValueError("sent count must be non-negative")
    if not 0 < delta <= 1:
        raise ValueError("attenuation must lie in (0, 1]")
    if mode == "expected":
        return round(sent * delta)
    if mode == "bernoulli":
        if rng is None:
            raise ValueError("bernoulli mode needs an rng")
        return int(rng.binomial(sent, delta))
    raise ValueError(f"unknown transmit mode {mode!r}")
