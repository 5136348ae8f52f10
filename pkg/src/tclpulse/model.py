"""Physical parameters, spectral densities and pulse schedules.

Units are dimensionless throughout: the bath cutoff frequency, hbar and
k_B are all set to one, so frequencies are in units of the cutoff and
times in units of its inverse.

Pulses are ideal, instantaneous pi rotations.  A bit-flip (``"X"``)
toggles the sign of the dephasing coupling, a phase-flip (``"Z"``)
toggles the sign of the decay coupling.  Both effects are fully captured
by the flip counters ``Nx(t)`` and ``Nz(t)``, which count the events of
each kind in ``[0, t]`` (right-continuous: an event at ``t`` counts).
"""
from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "PhysicalParams", "SpectralDensity", "PulseSchedule", "SegmentDecomposition",
    "make_bb", "make_bp", "counters", "signs", "decompose", "params_from_tau",
    "thermal_weight", "AXES",
]

AXES = ("X", "Z")

# below this value of beta*omega the coth factor switches to its Taylor series
_SERIES_THRESHOLD = 1e-4
# relative slack when deciding whether j*dt still lies inside [0, t_max]
_GRID_EPS = 1e-12


@dataclass(frozen=True)
class PhysicalParams:
    """Model constants in cutoff units.

    Parameters
    ----------
    omega0 : float
        Qubit level splitting.
    beta : float
        Inverse temperature.
    g_theta, g_lambda : float
        Coupling constants of the Ohmic dephasing and decay spectra.
    """

    omega0: float = 0.1
    beta: float = 1000.0
    g_theta: float = 0.0
    g_lambda: float = 0.0

    def __post_init__(self):
        if not self.omega0 > 0:
            raise ValueError(f"omega0 must be positive, got {self.omega0}")
        if not self.beta > 0:
            raise ValueError(f"beta must be positive, got {self.beta}")
        if not (self.g_theta >= 0 and self.g_lambda >= 0):
            raise ValueError("coupling constants must be non-negative")
        if not all(map(math.isfinite, (self.omega0, self.g_theta, self.g_lambda))):
            raise ValueError("parameters must be finite")

    @property
    def tau_theta(self) -> float:
        """Dephasing correlation time, ``(1/(2 G_theta))**0.5``."""
        return math.inf if self.g_theta == 0 else math.sqrt(1 / (2 * self.g_theta))

    @property
    def tau_lambda(self) -> float:
        """Decay correlation time, ``(2/G_lambda)**0.5``."""
        return math.inf if self.g_lambda == 0 else math.sqrt(2 / self.g_lambda)

    @property
    def tau_c(self) -> float:
        """Combined correlation time, ``tau_c**-2 = tau_theta**-2 + tau_lambda**-2``."""
        inv = 2 * self.g_theta + self.g_lambda / 2
        return math.inf if inv == 0 else 1 / math.sqrt(inv)

    @property
    def theta_density(self) -> "SpectralDensity":
        return SpectralDensity(self.g_theta)

    @property
    def lambda_density(self) -> "SpectralDensity":
        return SpectralDensity(self.g_lambda)


@dataclass(frozen=True)
class SpectralDensity:
    """Ohmic spectral density with exponential cutoff, ``I(w) = g w exp(-w)``."""

    g: float

    def __call__(self, omega):
        omega = np.asarray(omega, dtype=float)
        return self.g * omega * np.exp(-omega)


def thermal_weight(spec: SpectralDensity, beta: float, omega):
    """Return ``I(omega) * coth(beta*omega/2)``, finite at ``omega = 0``.

    For ``beta*omega`` below 1e-4 the two-term expansion
    ``coth(x/2) ~ 2/x + x/6`` is used, so the limit at zero is ``2 g / beta``.
    """
    if beta <= 0:
        raise ValueError("beta must be positive")
    w = np.asarray(omega, dtype=float)
    if np.any(w < 0):
        raise ValueError("omega must be non-negative")
    x = beta * w
    small = x < _SERIES_THRESHOLD
    xs = np.where(small, 1.0, x)
    # omega*coth(x/2) written as omega/tanh(x/2) on the regular branch
    reg = w / np.tanh(xs / 2)
    ser = 2 / beta + w * x / 6
    out = spec.g * np.exp(-w) * np.where(small, ser, reg)
    return out if out.ndim else float(out)


def _coth_half(beta: float, omega):
    """``coth(beta*omega/2)`` for strictly positive ``omega``."""
    return 1 / np.tanh(beta * np.asarray(omega, dtype=float) / 2)


@dataclass(frozen=True)
class SegmentDecomposition:
    """Partition of ``[0, t]`` at pulse events, with per-segment parities."""

    boundaries: np.ndarray
    sx_parity: np.ndarray
    sz_parity: np.ndarray

    @property
    def starts(self) -> np.ndarray:
        return self.boundaries[:-1]

    @property
    def ends(self) -> np.ndarray:
        return self.boundaries[1:]

    def __len__(self):
        return len(self.sx_parity)


@dataclass(frozen=True)
class PulseSchedule:
    """Ordered instantaneous flip events.

    ``events`` is a sequence of ``(time, axis)`` pairs with strictly
    increasing positive times and ``axis`` in ``{"X", "Z"}``.
    """

    events: tuple = ()
    _x_times: tuple = field(init=False, repr=False, compare=False)
    _z_times: tuple = field(init=False, repr=False, compare=False)
    _times: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        events = tuple((float(t), str(a).upper()) for t, a in self.events)
        last = 0.0
        for t, a in events:
            if a not in AXES:
                raise ValueError(f"unknown pulse axis {a!r}")
            if not (math.isfinite(t) and t > last):
                raise ValueError("event times must be positive and strictly increasing")
            last = t
        object.__setattr__(self, "events", events)
        object.__setattr__(self, "_times", tuple(t for t, _ in events))
        object.__setattr__(self, "_x_times", tuple(t for t, a in events if a == "X"))
        object.__setattr__(self, "_z_times", tuple(t for t, a in events if a == "Z"))

    @classmethod
    def from_events(cls, events: Iterable[tuple[float, str]]) -> "PulseSchedule":
        return cls(tuple(events))

    @property
    def times(self) -> tuple:
        return self._times

    @property
    def has_x(self) -> bool:
        return bool(self._x_times)

    @property
    def has_z(self) -> bool:
        return bool(self._z_times)

    def __len__(self):
        return len(self.events)

    def counters(self, t: float) -> tuple[int, int]:
        return counters(self, t)

    def signs(self, t: float) -> tuple[int, int]:
        return signs(self, t)

    def decompose(self, t: float) -> SegmentDecomposition:
        return decompose(self, t)


def _check_grid(dt, t_max):
    if not (dt > 0 and t_max > 0):
        raise ValueError(f"dt and t_max must be positive, got dt={dt}, t_max={t_max}")
    return int(math.floor(t_max / dt * (1 + _GRID_EPS)))


def make_bb(dt: float, t_max: float) -> PulseSchedule:
    """Periodic bit-flips at ``j*dt``, ``j >= 1``, up to ``t_max``."""
    n = _check_grid(dt, t_max)
    return PulseSchedule(tuple((j * dt, "X") for j in range(1, n + 1)))


def make_bp(dt: float, t_max: float) -> PulseSchedule:
    """Alternating bit-flips at ``(2j-1)*dt`` and phase-flips at ``2j*dt``."""
    n = _check_grid(dt, t_max)
    return PulseSchedule(tuple((j * dt, "X" if j % 2 else "Z") for j in range(1, n + 1)))


def counters(schedule: PulseSchedule, t: float) -> tuple[int, int]:
    """Numbers of X and Z events at times ``<= t``."""
    if t < 0:
        raise ValueError("t must be non-negative")
    return (bisect.bisect_right(schedule._x_times, t),
            bisect.bisect_right(schedule._z_times, t))


def signs(schedule: PulseSchedule, t: float) -> tuple[int, int]:
    """``((-1)**Nx(t), (-1)**Nz(t))``."""
    nx, nz = counters(schedule, t)
    return (-1 if nx % 2 else 1, -1 if nz % 2 else 1)


def decompose(schedule: PulseSchedule, t: float) -> SegmentDecomposition:
    """Split ``[0, t]`` at every event strictly before ``t``."""
    if not t > 0:
        raise ValueError("t must be positive")
    k = bisect.bisect_left(schedule._times, t)
    bounds = np.array((0.0,) + schedule._times[:k] + (float(t),))
    sx = np.empty(k + 1, dtype=np.int8)
    sz = np.empty(k + 1, dtype=np.int8)
    x = z = 1
    sx[0] = sz[0] = 1
    for i, (_, axis) in enumerate(schedule.events[:k], start=1):
        if axis == "X":
            x = -x
        else:
            z = -z
        sx[i], sz[i] = x, z
    return SegmentDecomposition(bounds, sx, sz)


def params_from_tau(tau_c: float, ratio: float, omega0: float = 0.1,
                    beta: float = 1000.0) -> PhysicalParams:
    """Coupling constants for a combined correlation time and ratio
    ``tau_lambda / tau_theta``.

    ``ratio = inf`` gives pure dephasing (``g_lambda = 0``).
    """
    if not (tau_c > 0 and ratio > 0):
        raise ValueError("tau_c and ratio must be positive")
    if math.isinf(ratio):
        return PhysicalParams(omega0, beta, 1 / (2 * tau_c**2), 0.0)
    tau_theta = tau_c * math.sqrt(1 + ratio**-2)
    tau_lambda = ratio * tau_theta
    return PhysicalParams(omega0, beta, 1 / (2 * tau_theta**2), 2 / tau_lambda**2)
