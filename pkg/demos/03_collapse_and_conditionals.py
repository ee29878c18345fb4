#!/usr/bin/env python3
"""Collapse after the position readout, and the two routes to P(Y=1).

After outcome X lands in bin B, the state becomes P_B psi normalised.
P(Y=1) can be assembled either from the conditional probabilities of the
collapsed states weighted by the bin masses, or directly from the bin
amplitudes; the two routes agree identically.
"""

import numpy as np

from spatialzeno import (
    bin_mass,
    collapse,
    inner_product,
    make_state,
    prob_y1_given_bin,
    prob_y1_pure,
    uniform_grid,
)

psi = make_state("sine_mode", k=2)
phi = make_state("sine_mode", k=1)
level = uniform_grid(4)

print("psi = sqrt(2) sin(2 pi x), phi = sqrt(2) sin(pi x), n = 4\n")
print(f"{'bin':>4} {'mass':>10} {'P(Y=1|X)':>10} {'via collapse':>13}")
total = 0.0
for j, b in enumerate(level.bins()):
    m = bin_mass(psi, b)
    cond = prob_y1_given_bin(psi, phi, b)
    psi_prime = collapse(psi, b)
    cond2 = abs(inner_product(phi, psi_prime)) ** 2
    total += cond * m
    print(f"{j:>4} {m:>10.6f} {cond:>10.6f} {cond2:>13.6f}")

direct = prob_y1_pure(psi, phi, level).p_y1
print(f"\nsum of cond * mass = {total:.12f}")
print(f"direct amplitude sum = {direct:.12f}")
print(f"difference = {abs(total - direct):.2e}")

print("\nThe collapsed state really is the restriction, renormalised:")
psi_prime = collapse(psi, level.bin(1))
xs = np.array([0.3, 0.4, 0.45])
print("  psi'(x) =", np.round(psi_prime.evaluate(xs), 4))
print("  outside its bin:", psi_prime.evaluate(np.array([0.8])))
print("  norm^2 =", psi_prime.norm_squared())
