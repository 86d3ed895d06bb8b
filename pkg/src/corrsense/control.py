"""Gaussian STIRAP pulses, the two-tone drive and the three driving conditions."""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import OutOfWindow
from .model import EigenFrame


@dataclass(frozen=True)
class PulseSpec:
    peak: float
    width: float
    center: float
    shape: str = "gaussian"

    def __post_init__(self):
        if self.peak < 0:
            raise ValueError("peak must be non-negative")
        if not self.width > 0:
            raise ValueError("width must be positive")
        if self.shape != "gaussian":
            raise ValueError("only gaussian pulses are supported")


def envelope(p: PulseSpec, t):
    """``peak * exp(-(t - center)**2 / (2 width**2))``; accepts scalars or arrays."""
    x = (np.asarray(t, dtype=float) - p.center) / p.width
    return p.peak * np.exp(-0.5 * x * x)


class DrivingCondition(enum.Enum):
    COND_I = 1.0
    COND_II = 2.0
    COND_III = 0.5

    @property
    def ratio(self) -> float:
        """Pump peak over Stokes peak."""
        return self.value


CONDITIONS = (DrivingCondition.COND_I, DrivingCondition.COND_II, DrivingCondition.COND_III)


@dataclass(frozen=True)
class ProtocolTiming:
    """Pulse timing shared by all driving conditions (time in units of 1/eps)."""

    omega0: float = 0.08
    width: float = 150.0
    delay: float = 225.0
    margin: float = 5.0  # window edge distance from the outer pulse centres, in widths
    shape: str = "gaussian"

    def validate(self):
        if self.shape != "gaussian":
            raise ValueError("only gaussian pulses are supported")
        if not (self.omega0 > 0 and self.width > 0 and self.margin > 0):
            raise ValueError("omega0, width and margin must be positive")
        if not self.delay > 0:
            raise ValueError("delay must be positive (Stokes first)")

    @property
    def duration(self) -> float:
        return self.delay + 2 * self.margin * self.width


@dataclass(frozen=True)
class DriveSpec:
    stokes: PulseSpec
    pump: PulseSpec
    omega_20: float
    omega_12: float
    t_start: float
    t_final: float

    def __post_init__(self):
        if not self.stokes.center < self.pump.center:
            raise ValueError("Stokes pulse must precede the pump pulse")
        if not self.t_final > self.t_start:
            raise ValueError("empty time window")

    def pump_envelope(self, t):
        return envelope(self.pump, t)

    def stokes_envelope(self, t):
        return envelope(self.stokes, t)


def drive_value(d: DriveSpec, t):
    t = np.asarray(t, dtype=float)
    span = d.t_final - d.t_start
    if np.any(t < d.t_start - 1e-12 * span) or np.any(t > d.t_final + 1e-12 * span):
        raise OutOfWindow("t outside [%g, %g]" % (d.t_start, d.t_final))
    return (envelope(d.pump, t) * np.cos(d.omega_20 * t)
            + envelope(d.stokes, t) * np.cos(d.omega_12 * t))


def make_protocol(cond: DrivingCondition, timing: ProtocolTiming, frame: EigenFrame,
                  stokes_peak: float | None = None, pump_peak: float | None = None) -> DriveSpec:
    """Counterintuitive Stokes-then-pump pulse pair for one driving condition.

    ``stokes_peak``/``pump_peak`` override the condition-derived amplitudes
    (e.g. a pump-only drive for Rabi checks).
    """
    timing.validate()
    cond = DrivingCondition(cond)
    w = timing.width
    t_mid = timing.margin * w + 0.5 * timing.delay
    s_peak = timing.omega0 if stokes_peak is None else stokes_peak
    p_peak = cond.ratio * timing.omega0 if pump_peak is None else pump_peak
    return DriveSpec(
        stokes=PulseSpec(s_peak, w, t_mid - 0.5 * timing.delay),
        pump=PulseSpec(p_peak, w, t_mid + 0.5 * timing.delay),
        omega_20=frame.omega_20,
        omega_12=frame.omega_12,
        t_start=0.0,
        t_final=timing.duration,
    )
