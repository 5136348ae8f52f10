"""Independent reference solutions used to validate the rate engine.

* :func:`exact_dephasing_gamma` -- closed-form decoherence exponent of the
  linearly coupled pure-dephasing model under arbitrary bit-flip
  sequences (filter-function form).
* :func:`golden_rule_rate` -- long-time limit of the no-pulse decay rate.
* :func:`few_mode_evolve` -- brute-force Schrodinger evolution of the qubit
  plus a handful of truncated harmonic modes.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla
from scipy import optimize, sparse
from scipy.sparse import linalg as spla

from .evolve import QubitState, Trajectory
from .model import PhysicalParams, PulseSchedule, SpectralDensity, thermal_weight
from .quadrature import QuadratureSpec, integrate, initial_width, thermal_breakpoints

__all__ = ["exact_dephasing_gamma", "golden_rule_rate", "FewModeBath", "few_mode_evolve",
           "recurrence_time"]

MAX_DIMENSION = 2**14
_DENSE_LIMIT = 4096


def _filter_amplitude(omega, edges, parity):
    """``F(w) = sum_seg s_seg int_seg exp(i w t) dt`` for every ``w``."""
    omega = np.asarray(omega, dtype=float)[:, None]
    a, b = edges[None, :-1], edges[None, 1:]
    half = 0.5 * (b - a)
    # exp(i w (a+b)/2) * 2 sin(w half) / w, written with sinc to stay finite at w = 0
    seg = np.exp(1j * omega * (a + b) / 2) * 2 * half * np.sinc(omega * half / np.pi)
    return seg @ parity


def exact_dephasing_gamma(t: float, schedule: PulseSchedule | None, g_theta: float,
                          beta: float, quad: QuadratureSpec | None = None) -> float:
    """Decoherence exponent ``Gamma(t)`` for pure dephasing under X flips.

    ``|rho10(t)| = |rho10(0)| exp(-Gamma(t))`` holds exactly for the linear
    dephasing coupling with a thermal bath.  Z flips commute with the
    coupling and must not be present.
    """
    if t < 0:
        raise ValueError("t must be non-negative")
    schedule = schedule if schedule is not None else PulseSchedule()
    if schedule.has_z:
        raise ValueError("exact dephasing oracle accepts bit-flip schedules only")
    if t == 0 or g_theta == 0:
        return 0.0
    times = [s for s in schedule.times if s < t]
    edges = np.array([0.0, *times, t])
    parity = np.array([(-1.0) ** j for j in range(len(edges) - 1)])
    spec = SpectralDensity(g_theta)

    def func(omega):
        F = _filter_amplitude(omega, edges, parity)
        return 2 * thermal_weight(spec, beta, omega) * np.abs(F)**2

    quad = quad or QuadratureSpec()
    res = integrate(func, quad, width=initial_width(t), breakpoints=thermal_breakpoints(beta))
    return float(res.value[0])


def golden_rule_rate(params: PhysicalParams) -> float:
    """``2 pi I_lambda(omega0) coth(beta omega0 / 2)``."""
    return float(2 * math.pi * thermal_weight(params.lambda_density, params.beta, params.omega0))


@dataclass(frozen=True)
class FewModeBath:
    """Discrete bath modes coupled to both qubit channels.

    ``g_theta`` and ``g_lambda`` are the (real) per-mode couplings.
    ``coverage`` is the fraction of the continuum ``int I dw`` that lies in
    the discretized band, before any renormalization.
    """

    frequencies: np.ndarray
    g_theta: np.ndarray
    g_lambda: np.ndarray
    n_max: int = 3
    coverage: float = 1.0

    @property
    def n_modes(self) -> int:
        return len(self.frequencies)

    @property
    def dimension(self) -> int:
        return 2 * (self.n_max + 1) ** self.n_modes

    @classmethod
    def from_params(cls, params: PhysicalParams, n_modes: int = 5, n_max: int = 3,
                    band: tuple[float, float] | None = None, normalize: bool = True,
                    scale: float = 1.0) -> "FewModeBath":
        """Equal-weight binning of the Ohmic density over ``band``.

        Each bin carries the same ``int I dw``; the mode sits at the bin
        centroid and ``|g_k|**2`` equals the bin integral.  With ``normalize``
        the couplings are rescaled so that ``sum |g_k|**2`` equals the full
        continuum strength ``G``.  ``scale`` multiplies every ``|g_k|**2``.
        """
        lo, hi = band if band is not None else (0.0, 5 * params.omega0)
        if not 0 <= lo < hi:
            raise ValueError("invalid band")

        def cum(x):
            # int_0^x w exp(-w) dw
            return 1 - (1 + x) * math.exp(-x)

        def first_moment(x):
            # int_0^x w^2 exp(-w) dw
            return 2 - (x * x + 2 * x + 2) * math.exp(-x)

        c_lo, c_hi = cum(lo), cum(hi)
        targets = np.linspace(c_lo, c_hi, n_modes + 1)
        edges = [lo]
        for c in targets[1:-1]:
            edges.append(optimize.brentq(lambda x: cum(x) - c, lo, hi, xtol=1e-15))
        edges.append(hi)
        edges = np.array(edges)
        mass = np.diff([cum(x) for x in edges])
        centroid = np.diff([first_moment(x) for x in edges]) / mass
        coverage = c_hi - c_lo
        norm = (1 / coverage if normalize else 1.0) * scale
        g_th = np.sqrt(params.g_theta * mass * norm)
        g_la = np.sqrt(params.g_lambda * mass * norm)
        return cls(centroid, g_th, g_la, n_max, coverage)


def recurrence_time(bath: FewModeBath) -> float:
    """``2 pi / (smallest mode spacing)``, the earliest revival scale."""
    w = np.sort(bath.frequencies)
    gaps = np.diff(np.concatenate([[0.0], w]))
    return float(2 * math.pi / gaps.min())


def _operators(bath: FewModeBath, omega0: float):
    n = bath.n_max + 1
    m = bath.n_modes
    a = sparse.diags(np.sqrt(np.arange(1, n)), 1, format="csr")
    eye = sparse.identity(n, format="csr")

    def embed(op, k):
        out = sparse.identity(1, format="csr")
        for j in range(m):
            out = sparse.kron(out, op if j == k else eye, format="csr")
        return out

    # qubit basis (|1>, |0>): sz = diag(1, -1), s+ = |1><0|
    sz = sparse.csr_matrix(np.diag([1.0, -1.0]))
    sp = sparse.csr_matrix(np.array([[0.0, 1.0], [0.0, 0.0]]))
    sm = sp.T.tocsr()
    ib = sparse.identity(n**m, format="csr")
    iq = sparse.identity(2, format="csr")
    H = 0.5 * omega0 * sparse.kron(sz, ib)
    for k in range(m):
        ak = embed(a, k)
        H = H + bath.frequencies[k] * sparse.kron(iq, ak.T @ ak)
        H = H + bath.g_theta[k] * sparse.kron(sz, ak + ak.T)
        H = H + bath.g_lambda[k] * (sparse.kron(sm, ak.T) + sparse.kron(sp, ak))
    return H.tocsr()


def _pulse(axis, t, omega0):
    """Lab-frame flip at time ``t``: ``-i sigma`` rotated by the free precession."""
    if axis == "Z":
        return -1j * np.diag([1.0, -1.0]).astype(complex)
    c, s = math.cos(omega0 * t), math.sin(omega0 * t)
    # sigma_x cos + sigma_y sin in the (|1>, |0>) basis
    return -1j * np.array([[0, c - 1j * s], [c + 1j * s, 0]])


def _sigma(axis):
    if axis == "X":
        return np.array([[0, 1], [1, 0]], dtype=complex)
    return np.diag([1.0, -1.0]).astype(complex)


def few_mode_evolve(bath: FewModeBath, params: PhysicalParams, schedule: PulseSchedule | None,
                    rho0: QubitState, t_max: float, dt_exact: float) -> Trajectory:
    """Exact evolution of qubit plus truncated modes, initial bath in vacuum.

    Returns the reduced state in the toggling frame (flip operators and the
    free qubit precession removed) so it is directly comparable with
    :func:`tclpulse.evolve.evolve`.  Rates in the result are ``nan``.
    """
    if bath.dimension > MAX_DIMENSION:
        raise ValueError(f"Hilbert dimension {bath.dimension} exceeds {MAX_DIMENSION}")
    if not (t_max > 0 and dt_exact > 0):
        raise ValueError("t_max and dt_exact must be positive")
    schedule = schedule if schedule is not None else PulseSchedule()
    w0 = params.omega0
    H = _operators(bath, w0)
    nb = H.shape[0] // 2

    if H.shape[0] <= _DENSE_LIMIT:
        energies, vecs = sla.eigh(H.toarray())

        def propagate(psi, tau):
            return vecs @ (np.exp(-1j * energies * tau)[:, None] * (vecs.conj().T @ psi))
    else:
        Hc = (-1j * H).tocsc()

        def propagate(psi, tau):
            return spla.expm_multiply(Hc * tau, psi)

    # mixed initial states are evolved as an ensemble of eigenvectors
    p, u = np.linalg.eigh(rho0.matrix())
    keep = p > 1e-15
    psi = np.zeros((H.shape[0], int(keep.sum())), dtype=complex)
    for col, (pk, vk) in enumerate(zip(p[keep], u[:, keep].T)):
        psi[0 * nb, col] = math.sqrt(pk) * vk[0]
        psi[1 * nb, col] = math.sqrt(pk) * vk[1]

    events = [(s, ax) for s, ax in schedule.events if s < t_max]
    edges = [0.0] + [s for s, _ in events] + [float(t_max)]
    ts, r11, r10 = [], [], []
    frame = np.eye(2, dtype=complex)  # accumulated toggling operator

    def record(t, psi):
        amp = psi.reshape(2, nb, -1)
        rho = np.einsum("ikc,jkc->ij", amp, amp.conj())
        rot = np.diag([np.exp(0.5j * w0 * t), np.exp(-0.5j * w0 * t)])
        rho_i = rot @ rho @ rot.conj().T
        tog = frame.conj().T @ rho_i @ frame
        ts.append(t)
        r11.append(tog[0, 0].real)
        r10.append(tog[0, 1])

    record(0.0, psi)
    for k in range(len(edges) - 1):
        a, b = edges[k], edges[k + 1]
        n = max(1, int(math.ceil((b - a) / dt_exact - 1e-9)))
        h = (b - a) / n
        for j in range(n):
            psi = propagate(psi, h)
            record(b if j == n - 1 else a + (j + 1) * h, psi)
        if k < len(events):
            s, axis = events[k]
            op = _pulse(axis, s, w0)
            psi = (op @ psi.reshape(2, -1)).reshape(psi.shape)
            frame = (-1j * _sigma(axis)) @ frame

    n = len(ts)
    return Trajectory(np.array(ts), np.array(r11), np.array(r10), np.full((n, 4), np.nan),
                      np.full((n, 2), np.nan))
