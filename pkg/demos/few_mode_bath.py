"""
====================================
A five-mode bath as a brute-force check
====================================

Replace the continuum by five harmonic modes and solve the Schrodinger
equation directly.  Before the discrete bath recurs, bb flips should hold
the coherence above the unpulsed curve when dephasing dominates.
"""
# %%
import math

from tclpulse import params_from_tau
from tclpulse.cli import few_mode_comparison
from tclpulse.oracle import FewModeBath, recurrence_time

tau_c = 0.4 * 2 * math.pi
dt = tau_c / 8

bath = FewModeBath.from_params(params_from_tau(tau_c, 2.0), n_modes=5, band=(0.02, 0.5))
print("mode frequencies", bath.frequencies.round(4), "recurrence", round(recurrence_time(bath), 1))

# %%
for ratio in (math.inf, 50.0, 2.0):
    times, ref, bb, window = few_mode_comparison(params_from_tau(tau_c, ratio), dt)
    step = max(1, len(times) // 6)
    print(f"ratio {ratio:g}")
    for t, a, b in list(zip(times, ref, bb))[::step]:
        print(f"  t={t:6.2f}  none {a:.3f}  bb {b:.3f}")

# %%
# With a strong decay channel bb alone leaves the sigma_x part of that
# coupling untouched, and the low-lying discrete modes drain the coherence.
