"""
======================================
Pure dephasing: engine versus exact form
======================================

With only the dephasing coupling, second order is exact and the coherence
decays as ``exp(-Gamma)`` with a filter-function exponent.  The integrator
should track it to the quadrature tolerance.
"""
# %%
import math

import numpy as np

from tclpulse import PLUS_I, PulseSchedule, evolve, make_bb, params_from_tau
from tclpulse.oracle import exact_dephasing_gamma

tau_c = 0.4 * 2 * math.pi
p = params_from_tau(tau_c, math.inf)
t_max = 10 * tau_c

for name, sched in (("no pulses", PulseSchedule()), ("bb 2^-3", make_bb(tau_c / 8, t_max))):
    traj = evolve(p, sched, PLUS_I, t_max)
    idx = np.linspace(0, len(traj.t) - 1, 21).astype(int)
    exact = np.array([0.5 * math.exp(-exact_dephasing_gamma(traj.t[i], sched, p.g_theta, p.beta))
                      for i in idx])
    dev = np.max(np.abs(traj.abs_rho10[idx] / exact - 1))
    print(f"{name:>10}: final |rho10| {traj.abs_rho10[-1]:.6f}, max rel deviation {dev:.1e}")

# %%
# At zero temperature the unpulsed exponent has the closed form 2 g ln(1 + t**2).
for t in (1.0, 5.0, 20.0):
    print(t, exact_dephasing_gamma(t, None, p.g_theta, 1e12), 2 * p.g_theta * math.log1p(t * t))
