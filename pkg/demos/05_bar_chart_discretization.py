#!/usr/bin/env python3
"""Bar-chart discretization f_n and its L2 convergence to f.

f_n takes on each bin the average of f there.  For f(x) = x the distance
||f_n - f|| is exactly 1/(sqrt(12) n); for smooth states it decays at the
same first-order rate.  The identity ||f_n||^2 = sum_j |I_j|^2 / |B_j|
with f = conj(phi) psi ties the bar chart to the measurement amplitudes.
"""

import numpy as np

from spatialzeno import (
    discretization_error,
    discretize,
    make_state,
    norm_identity_check,
    uniform_grid,
)

print("f(x) = x against the exact law 1/(sqrt(12) n):")
for n in (2, 4, 16, 64, 256):
    err = discretization_error(lambda x: x, uniform_grid(n))
    print(f"  n={n:>4}: ||f_n - f|| = {err:.8e}   exact {1/(np.sqrt(12)*n):.8e}")

print("\nBin averages of sqrt(2) sin(pi x) at n=2 (both halves equal by symmetry):")
disc = discretize(make_state("sine_mode", k=1), uniform_grid(2))
print("  averages:", np.round(np.real(disc.averages), 10), "= 2 sqrt(2)/pi")

print("\nError decay for catalog states:")
for state in (make_state("sine_mode", k=1), make_state("complex_exponential", k=2)):
    errs = [discretization_error(state, uniform_grid(n)) for n in (2, 8, 32, 128)]
    print(f"  {state.label:<28}", ["%.3e" % e for e in errs])

print("\nNorm identity at n=4 for phi = psi = sqrt(2) sin(pi x):")
s = make_state("sine_mode", k=1)
lhs, rhs = norm_identity_check(s, s, uniform_grid(4))
print(f"  ||f_4||^2 = {lhs:.12f}")
print(f"  sum |amp|^2 / |B| = {rhs:.12f}   (1 + 4/pi^2 = {1 + 4/np.pi**2:.12f})")

try:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    xs = np.linspace(0, 1, 600)
    fig, ax = plt.subplots(figsize=(7, 4))
    ax.plot(xs, np.sqrt(2) * np.sin(np.pi * xs), "k", label=r"$f$")
    for n, color in ((4, "tab:blue"), (16, "tab:orange")):
        d = discretize(make_state("sine_mode", k=1), uniform_grid(n))
        ax.step(np.linspace(0, 1, n + 1)[:-1], np.real(d.averages),
                where="post", color=color, label=rf"$f_{{{n}}}$")
    ax.set_xlabel("x")
    ax.legend()
    fig.tight_layout()
    fig.savefig("bar_chart_discretization.png", dpi=120)
    print("\nwrote bar_chart_discretization.png")
except ImportError:
    print("\nmatplotlib not available; skipped the figure")
