"""
===========================
Flip schedules and counters
===========================

Two periodic schedules ship with the package.  ``bb`` applies a bit flip
every interval, ``bp`` alternates bit and phase flips.  Everything the rate
kernels need from a schedule is the pair of flip counters and the partition
of ``[0, t]`` into stretches of constant sign.
"""
# %%
# Build both schedules on a unit interval and look at the events.
from tclpulse import PulseSchedule, counters, decompose, make_bb, make_bp, signs

bb = make_bb(1.0, 4.0)
bp = make_bp(1.0, 4.0)
print("bb:", bb.events)
print("bp:", bp.events)

# %%
# Counters are right-continuous, so a flip at ``t`` is already counted at ``t``.
for t in (0.5, 1.0, 2.5, 3.0):
    print(f"t={t}:  bb {counters(bb, t)}  bp {counters(bp, t)}  bp signs {signs(bp, t)}")

# %%
# The decomposition lists segment edges with the x and z parity on each one.
seg = decompose(bp, 2.5)
for a, b, sx, sz in zip(seg.starts, seg.ends, seg.sx_parity, seg.sz_parity):
    print(f"[{a:.1f}, {b:.1f}]  sx={sx:+d}  sz={sz:+d}")

# %%
# Arbitrary schedules work the same way, e.g. a Hahn echo followed by a phase flip.
custom = PulseSchedule(((1.0, "X"), (1.5, "Z"), (2.0, "X")))
print(counters(custom, 1.7), decompose(custom, 2.2).boundaries)
