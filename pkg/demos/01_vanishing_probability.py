#!/usr/bin/env python3
"""A particle pinned down in space is nowhere to be found in Hilbert space.

Prepare a state psi on [0,1), measure which of n bins contains the
particle, then measure the projection onto a fixed phi.  However phi is
chosen, the probability of outcome 1 dies off as the bins shrink; this
script prints that decay for several (psi, phi) pairs.
"""

from spatialzeno import make_state, prob_y1_pure, superpose, uniform_grid

pairs = [
    ("psi = phi = 1", make_state("uniform"), make_state("uniform")),
    ("psi = phi = sqrt(2) sin(pi x)",
     make_state("sine_mode", k=1), make_state("sine_mode", k=1)),
    ("psi singular x^(-1/4), phi = 1",
     make_state("power_singular", alpha=0.25), make_state("uniform")),
    ("psi = mix of two modes, phi = e^(2 pi i x)",
     superpose([(0.8, make_state("sine_mode", k=1)),
                (0.6, make_state("sine_mode", k=3))]),
     make_state("complex_exponential", k=1)),
]

ns = [1, 4, 16, 64, 256, 1024, 4096]

for label, psi, phi in pairs:
    print(f"\n{label}")
    print(f"  {'n':>6}  {'P(Y=1)':>12}  {'n * P(Y=1)':>12}")
    for n in ns:
        r = prob_y1_pure(psi, phi, uniform_grid(n), keep_per_bin=False)
        print(f"  {n:>6}  {r.p_y1:>12.6e}  {n * r.p_y1:>12.6f}")

print("\nP(Y=1) ~ c/n for every pair: the scaled column settles at the")
print("integral of |phi|^2 |psi|^2, and the raw probability goes to zero.")
print("No vector or density matrix reproduces a limit that vanishes for")
print("every phi, which is the point of the construction.")
