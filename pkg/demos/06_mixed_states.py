#!/usr/bin/env python3
"""Density states: spectral mixtures and the truncation tail.

P(Y=1) for a density state is the spectral-weighted sum of the pure
results.  Truncating the spectral list to finitely many terms costs at
most ||phi||^2 times the dropped weight, which the error bound carries.
"""

from spatialzeno import (
    GridScheme,
    convergence_study,
    make_density,
    make_state,
    prob_y1_mixed,
    prob_y1_pure,
    uniform_grid,
)

weights = [0.4, 0.3, 0.2, 0.1]
modes = [make_state("sine_mode", k=k) for k in (1, 2, 3, 4)]
rho = make_density(list(zip(weights, modes)))
phi = make_state("uniform")

level = uniform_grid(8)
mixed = prob_y1_mixed(rho, phi, level)
print("4-term mixture of sine modes, phi = 1, n = 8")
print(f"  P(Y=1) = {mixed.p_y1:.10f}")
manual = sum(w * prob_y1_pure(s, phi, level).p_y1 for w, s in zip(weights, modes))
print(f"  weighted pure sum = {manual:.10f}")

truncated = make_density(list(zip([0.4, 0.3, 0.2], modes[:3])))
r = prob_y1_mixed(truncated, phi, level)
print("\nDropping the last 10% of spectral weight:")
print(f"  P(Y=1) = {r.p_y1:.10f}")
print(f"  error bound (includes the 0.1 tail) = {r.p_y1_error_bound:.3f}")

rec = convergence_study(rho, phi, GridScheme("uniform", d=1),
                        [4, 8, 16, 32, 64, 128, 256, 512, 1024])
print("\nThe mixture decays like every pure state does:")
for row in rec.rows[::2]:
    print(f"  n={row.n:>5}: P(Y=1) = {row.p_y1:.6e}")
print(f"fitted rate {rec.fitted_rate:.3f}")
