"""
=====================================
Time-dependent rates under flip trains
=====================================

The four rates are frequency integrals of the bath spectrum against time
kernels whose signs follow the flip schedule.  Without pulses the population
decay rate climbs to its long-time plateau; periodic flips cut the
coherence decay rate down to a small residual.
"""
# %%
import math

import numpy as np

from tclpulse import PulseSchedule, RateEngine, make_bb, make_bp, params_from_tau
from tclpulse.oracle import golden_rule_rate

tau_c = 0.4 * 2 * math.pi
params = params_from_tau(tau_c, ratio=2.0)
t_max = 10 * tau_c
dt = tau_c / 8

# %%
# A ``RateEngine`` fixes one frequency grid per trajectory, which makes
# repeated evaluation cheap.  Samples sit in the middle of every other interval.
engines = {"none": RateEngine(params, PulseSchedule(), t_max),
           "bb": RateEngine(params, make_bb(dt, t_max), t_max),
           "bp": RateEngine(params, make_bp(dt, t_max), t_max)}
times = (np.arange(1, 41) * 2 - 0.5) * dt
for name, eng in engines.items():
    g11 = np.array([eng.rates(t).gamma11 for t in times])
    g10 = np.array([eng.rates(t).gamma10_re for t in times])
    print(f"{name:>4}: mean gamma11 {g11.mean():+.4f}   mean gamma10_re {g10.mean():+.4f}")

# %%
# Far beyond the bath memory the unpulsed decay rate approaches the
# golden-rule value.  The approach is slow: ripples fall off like 1/t**2.
eng = RateEngine(params, PulseSchedule(), 200.0)
for t in (25.0, 50.0, 100.0, 200.0):
    print(f"t={t:5.0f}  gamma11/golden = {eng.rates(t).gamma11 / golden_rule_rate(params):.4f}")
