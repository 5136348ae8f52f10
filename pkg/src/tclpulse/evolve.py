"""Fixed-step RK4 integration of the toggling-frame equations of motion.

The state is ``(rho11, rho10)``; ``rho00 = 1 - rho11`` and
``rho01 = conj(rho10)`` are implied.  The equations are

    d rho11 / dt = -gamma11 rho11 + eta11
    d rho10 / dt = -gamma10_re Re(rho10) - i gamma10_im Im(rho10)

Rates jump at pulse times, so every inter-pulse segment is integrated on
its own with an equal substep that divides it exactly.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .model import PhysicalParams, PulseSchedule
from .quadrature import QuadratureSpec
from .rates import RateEngine, RateSet

__all__ = ["QubitState", "Trajectory", "evolve", "observables", "convergence_check",
           "PositivityWarning", "PLUS", "PLUS_I"]

_POSITIVITY_SLACK = 1e-3
_PHASE_FLOOR = 1e-12


class PositivityWarning(RuntimeWarning):
    """The population left [0, 1] by more than the allowed slack."""


@dataclass(frozen=True)
class QubitState:
    rho11: float
    rho10: complex

    def __post_init__(self):
        r11 = float(self.rho11)
        r10 = complex(self.rho10)
        if not (0 <= r11 <= 1):
            raise ValueError(f"rho11 must lie in [0, 1], got {r11}")
        if abs(r10)**2 > r11 * (1 - r11) + 1e-12:
            raise ValueError("|rho10|**2 exceeds rho11*rho00: state is not positive")
        object.__setattr__(self, "rho11", r11)
        object.__setattr__(self, "rho10", r10)

    def matrix(self) -> np.ndarray:
        """Density matrix in the (|1>, |0>) basis."""
        return np.array([[self.rho11, self.rho10],
                         [np.conj(self.rho10), 1 - self.rho11]], dtype=complex)


PLUS = QubitState(0.5, 0.5)
PLUS_I = QubitState(0.5, 0.5j)


@dataclass
class Trajectory:
    """Time series of states, observables and rates.

    All fields are 1-d arrays of equal length; ``rates`` has columns
    gamma11, eta11, gamma10_re, gamma10_im.
    """

    t: np.ndarray
    rho11: np.ndarray
    rho10: np.ndarray
    rates: np.ndarray
    shifts: np.ndarray = field(default=None)

    def __post_init__(self):
        if self.shifts is None:
            self.shifts = np.zeros((len(self.t), 2))

    def __len__(self):
        return len(self.t)

    @property
    def abs_rho10(self) -> np.ndarray:
        return np.abs(self.rho10)

    @property
    def delta_theta(self) -> np.ndarray:
        return observables(self.rho10, self.rho10[0])[1]

    def at(self, t: float) -> int:
        """Index of the sample nearest to ``t``."""
        return int(np.argmin(np.abs(self.t - t)))

    def records(self):
        dth = self.delta_theta
        for i in range(len(self.t)):
            yield (self.t[i], self.rho11[i], self.rho10[i], abs(self.rho10[i]), dth[i],
                   RateSet(*self.rates[i], *self.shifts[i]))


def observables(rho10, rho10_initial):
    """``(|rho10|, delta_theta)`` with the phase unwrapped along the series.

    ``delta_theta`` is ``nan`` wherever ``|rho10| < 1e-12``.
    """
    z = np.atleast_1d(np.asarray(rho10, dtype=complex))
    if abs(rho10_initial) < _PHASE_FLOOR:
        raise ValueError("initial coherence vanishes; phase shift undefined")
    mag = np.abs(z)
    ok = mag >= _PHASE_FLOOR
    dth = np.full(z.shape, np.nan)
    if ok.any():
        rel = np.angle(z[ok] / rho10_initial)
        dth[ok] = np.unwrap(rel)
    if np.ndim(rho10) == 0:
        return float(mag[0]), float(dth[0])
    return mag, dth


def _substeps(length, steps_per_interval, max_step):
    n = steps_per_interval
    while max_step is not None and length / n > max_step:
        n *= 2
    return n


def evolve(params: PhysicalParams, schedule: PulseSchedule | None, rho0: QubitState,
           t_max: float, steps_per_interval: int = 16, quad: QuadratureSpec | None = None,
           max_step: float | None = 0.1, frequency_shift: bool = True,
           engine: RateEngine | None = None) -> Trajectory:
    """Integrate from ``t = 0`` to ``t_max``.

    Each inter-pulse segment gets ``steps_per_interval * 2**k`` RK4 steps,
    ``k`` being the smallest value that keeps the step below ``max_step``.
    With ``frequency_shift`` the imaginary parts of the decay-channel
    integrals are kept, making the coherence rates complex.
    """
    if not t_max > 0:
        raise ValueError("t_max must be positive")
    n0 = int(steps_per_interval)
    if n0 < 4 or n0 & (n0 - 1):
        raise ValueError("steps_per_interval must be a power of two >= 4")
    schedule = schedule if schedule is not None else PulseSchedule()
    eng = engine or RateEngine(params, schedule, t_max, quad)
    bounds = eng.boundaries

    plan = [_substeps(bounds[k + 1] - bounds[k], n0, max_step) for k in range(eng.n_segments)]
    for k, n in enumerate(plan):
        h = (bounds[k + 1] - bounds[k]) / n
        if h * params.omega0 >= 0.5:
            raise ValueError(f"step {h:.3g} does not resolve omega0 (h*omega0 >= 0.5)")
    total = sum(plan) + 1

    ts = np.empty(total)
    y = np.empty((total, 3))
    rates = np.zeros((total, 4))
    shifts = np.zeros((total, 2))
    ts[0] = 0.0
    y[0] = rho0.rho11, rho0.rho10.real, rho0.rho10.imag

    def deriv(r, v):
        g11, e11, gre, gim = r.gamma11, r.eta11, r.gamma10_re, r.gamma10_im
        if frequency_shift:
            gre = complex(gre, r.shift_re)
            gim = complex(gim, r.shift_im)
        d10 = -gre * v[1] - 1j * gim * v[2]
        return np.array([-g11 * v[0] + e11, d10.real, d10.imag])

    i = 0
    for k, n in enumerate(plan):
        a, b = bounds[k], bounds[k + 1]
        h = (b - a) / n
        cache = {}

        def rate(j2):
            # j2 counts half-steps from the segment start
            if j2 not in cache:
                tt = b if j2 == 2 * n else a + 0.5 * j2 * h
                cache[j2] = eng.rates(tt, k)
            return cache[j2]

        if k:
            # right-limit rates at the pulse boundary
            r = rate(0)
            rates[i], shifts[i] = r.as_tuple(), (r.shift_re, r.shift_im)
        v = y[i]
        for j in range(n):
            r1, r2, r3 = rate(2 * j), rate(2 * j + 1), rate(2 * j + 2)
            k1 = deriv(r1, v)
            k2 = deriv(r2, v + 0.5 * h * k1)
            k3 = deriv(r2, v + 0.5 * h * k2)
            k4 = deriv(r3, v + h * k3)
            v = v + (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4)
            i += 1
            ts[i] = b if j == n - 1 else a + (j + 1) * h
            y[i] = v
            rates[i], shifts[i] = r3.as_tuple(), (r3.shift_re, r3.shift_im)
        del cache

    assert np.all(np.diff(ts) > 0)
    lo, hi = y[:, 0].min(), y[:, 0].max()
    if lo < -_POSITIVITY_SLACK or hi > 1 + _POSITIVITY_SLACK:
        warnings.warn(f"rho11 left [0, 1] (range {lo:.4g} .. {hi:.4g})", PositivityWarning)
    return Trajectory(ts, y[:, 0].copy(), y[:, 1] + 1j * y[:, 2], rates, shifts)


def convergence_check(coarse: Trajectory, fine: Trajectory, rtol: float = 1e-9) -> float:
    """Largest ``|d rho11|`` or ``|d rho10|`` over the samples both runs share."""
    scale = max(abs(coarse.t[-1]), 1.0)
    idx = np.searchsorted(fine.t, coarse.t)
    idx = np.clip(idx, 0, len(fine.t) - 1)
    lower = np.clip(idx - 1, 0, len(fine.t) - 1)
    pick = np.where(np.abs(fine.t[lower] - coarse.t) < np.abs(fine.t[idx] - coarse.t), lower, idx)
    match = np.abs(fine.t[pick] - coarse.t) <= rtol * scale
    if not match.any():
        raise ValueError("trajectories share no sample times")
    a = np.flatnonzero(match)
    b = pick[match]
    d11 = np.abs(coarse.rho11[a] - fine.rho11[b])
    d10 = np.abs(coarse.rho10[a] - fine.rho10[b])
    return float(max(d11.max(), d10.max()))
