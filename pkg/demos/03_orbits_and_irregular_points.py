"""Trajectories: level sets, stopping times and a point whose ratio never settles.

Sampling a typical point of nu_q and watching its running Birkhoff ratio
shows concentration near alpha(q). Gluing ever longer blocks of the two
fixed points of System B gives a point whose running ratio keeps swinging
between the two fixed-point values. How wide the swing gets depends on how
fast the blocks grow; the last table makes that explicit.
"""
import numpy as np

from thermospec.orbits import (BlockSchedule, birkhoff_ratio, dense_splice, irregular_point,
                               level_set_concentration, sample_orbit, stopping_time)
from thermospec.systems import system_b
from thermospec.temperature import alpha, nu_q

fam = system_b()
SEED = 20240601

for q in (-1.0, 0.0, 2.0):
    res = level_set_concentration(fam, q, 5000, 2000, 0.02, seed=SEED)
    print(f"q = {q:+.1f}: alpha = {res.alpha:.6f}, mean ratio = {res.mean_ratio:.6f} "
          f"(sd {res.std_ratio:.4f}), fraction within 0.02 = {res.fraction:.4f}")

orbit = sample_orbit(nu_q(fam, 0.0), 20_000, seed=SEED)
print(f"\nfirst 40 symbols of a nu_0-typical orbit: {str(orbit)[:40]}")
for n in (10, 100, 1000, 20_000):
    print(f"  running ratio after {n:6d} steps: {birkhoff_ratio(fam, orbit, n):.6f}")
print(f"  alpha(0) = {alpha(fam, 0.0):.6f}")

print("\nstopping times m(r): the last m with prod |Jac|^-1 > r")
for r in (1e-1, 1e-3, 1e-10, 1e-100):
    print(f"  r = {r:.0e}: m = {stopping_time(fam, orbit, r)}")

# A prefix glued in front of a typical tail does not move the limit.
spliced = dense_splice(fam.sft, "1111111111", orbit)
print(f"\nspliced orbit starts {str(spliced[:14].tolist())}; ratio at 10^4: "
      f"{birkhoff_ratio(fam, spliced, 10_000):.6f} vs tail {birkhoff_ratio(fam, orbit, 10_000):.6f}")

print("\nalternating blocks of 0^inf and 1^inf, horizon 10^6")
print("growth  tail min  tail max  spread  (0.8 * |1 - 0.5| = 0.4)")
for growth in (4, 8, 16, 64):
    rec = irregular_point(fam, "0", "1", BlockSchedule.geometric(1, growth, 10**6), 10**6)
    print(f"{growth:6d}  {rec.tail_min:.4f}    {rec.tail_max:.4f}    {rec.spread:.4f}  "
          f"{'certified' if rec.certified else 'below threshold'}")

# With each block exactly G times its prefix, the share of 1s tends to
# 1/(G+2) at the end of a 0-block and to (G+1)/(G+2) at the end of a
# 1-block. The running ratio is 1/(1 + share), so the tail swing tends to
# G(G+2) / ((G+3)(2G+3)), which reaches 0.4 only once G >= 4 + sqrt(34).
G = np.array([4, 8, 16, 64])
print("\nlimit spread G(G+2)/((G+3)(2G+3)):", np.round(G * (G + 2) / ((G + 3) * (2 * G + 3)), 4))
print(f"smallest growth factor reaching 0.4: {4 + np.sqrt(34):.3f}")
