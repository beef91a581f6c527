"""Temperature function and dimension spectrum of an asymmetric full 2-shift.

System B weights symbol 0 with log-Jacobian log 2 and symbol 1 with 2 log 2,
and uses the normalised potential g = -log 2 on both symbols. For this pair
the root of P(q g - t jac) = 0 is known in closed form, so the numbers
below can be compared line by line.

Run with ``python demos/01_temperature_and_spectrum.py``.
"""
import numpy as np

from thermospec.spectrum import endpoints, legendre_check
from thermospec.systems import system_b, system_b_T, system_b_alpha
from thermospec.temperature import temperature_curve

fam = system_b()
grid = np.round(np.arange(-80, 81) / 10, 10)
curve = temperature_curve(fam, grid)

print("q      T(q)          closed form   alpha(q)      S = T + q alpha")
for q in (-4.0, -1.0, 0.0, 1.0, 4.0):
    i = curve.index_of(q)
    T, a = curve.T[i], curve.alpha[i]
    print(f"{q:5.1f}  {T:.10f}  {float(system_b_T(q)):.10f}  {a:.10f}  {T + q * a:.10f}")

i0 = curve.index_of(0.0)
print(f"\nT''(0) by finite differences {curve.T_second_fd[i0]:.10f}")
print(f"T''(0) from the asymptotic variance {curve.T_second_var[i0]:.10f}")
print(f"closed form ln2 / (5 sqrt 5)      {np.log(2) / (5 * np.sqrt(5)):.10f}")
print(f"variance convention selected: {curve.convention_used}")

# The spectrum peaks at q = 0, where S equals T(0), and closes at the two
# endpoints carried by the fixed points.
S = curve.T + grid * curve.alpha
print(f"\nmax S = {S.max():.10f} at q = {grid[np.argmax(S)]}")
e = endpoints(fam, 12)
print(f"alpha range from periodic orbits: [{e.alpha1}, {e.alpha2}] "
      f"(orbits {e.orbit1!r} and {e.orbit2!r})")
print(f"alpha(+40) = {e.alpha1_probe:.8f}, alpha(-40) = {e.alpha2_probe:.8f}, "
      f"closed form alpha(40) = {float(system_b_alpha(40.0)):.8f}")

r = legendre_check(curve)
print(f"\nLegendre audit: |dS/dalpha - q| <= {r.slope:.2e}, "
      f"reconstruction of T <= {r.reconstruction:.2e}, concave: {r.concavity <= 1e-9}")
