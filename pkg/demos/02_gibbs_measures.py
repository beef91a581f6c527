"""Gibbs bounds, conformality and the variational principle on the golden-mean shift.

The golden-mean shift forbids the word 11. Here g is the constant -h_top
and the log-Jacobian is log 2 on symbol 0 and log 3 on symbol 1, so no
closed form is available and every check is against an independent
computation.
"""
from thermospec.orbits import empirical_gibbs_check
from thermospec.spectrum import variational_principle_check
from thermospec.systems import golden_mean_system
from thermospec.temperature import nu_q, solve_T
from thermospec.transfer import conformality_check, cylinder_measure, gibbs_certificate

fam = golden_mean_system()
print(f"h_top = {-fam.g.values[0]:.12f}  (log of the golden ratio)")
print(f"T(0)  = {solve_T(fam, 0.0):.12f}  (root of 2^-t + 6^-t = 1)")

for q in (-2.0, 0.0, 2.0):
    T = solve_T(fam, q)
    phi = fam.phi(q, T)
    cert = gibbs_certificate(fam.sft, phi, 12)
    defect = conformality_check(fam.sft, phi, 10)
    print(f"\nq = {q:+.1f}: T = {T:.10f}")
    print(f"  Gibbs constants [{cert.c1:.6f}, {cert.c2:.6f}], observed "
          f"[{cert.worst_ratio_low:.6f}, {cert.worst_ratio_high:.6f}] over "
          f"{cert.n_cylinders} cylinders")
    print(f"  eigenmeasure conformality defect {defect:.1e}")
    vp = variational_principle_check(fam, q, 200, seed=1)
    print(f"  h + int phi - P at nu_q: {vp.equality_defect:.1e}; best of 200 random "
          f"Markov measures falls short by {-vp.max_excess:.3e}")

# Negative control: nu_1 (the measure for q = 1) is tested against the
# q = 0 potential and leaves the Gibbs corridor as the depth grows.
T = solve_T(fam, 0.0)
phi = fam.phi(0.0, T)
nu, wrong = nu_q(fam, 0.0, T), nu_q(fam, 1.0)
print(f"\nnu_0 of the cylinder 0101: {cylinder_measure(nu, (0, 1, 0, 1)):.8f}")
for depth in (5, 15, 30):
    good = empirical_gibbs_check(nu, phi, 300, depth, seed=2)
    bad = empirical_gibbs_check(wrong, phi, 300, depth, seed=2)
    print(f"depth {depth:2d}: matched ratios in [{good.low:.4f}, {good.high:.4f}], "
          f"mismatched in [{bad.low:.3e}, {bad.high:.3e}] -> inside: {bad.inside}")
print(f"(corridor [{good.c1:.4f}, {good.c2:.4f}])")
