"""Quantized levels of the deformed Dirac oscillator and how they approach the bound."""
import math

from minlength.oscillator import OscillatorConfig, bound_gap, energy_expansions, spectrum

cfg = OscillatorConfig(beta_tilde=0.2, omega_tilde=0.5)
print(f"beta~={cfg.beta_tilde} omega~={cfg.omega_tilde} lambda={cfg.lam:g}")
print(f"upper bound 1/sqrt(beta~) = {1 / math.sqrt(cfg.beta_tilde):.12f}")
for point in spectrum(cfg, 4):
    print(f"n={point.n:2d} tau={point.tau:+d} p0~={point.p0:+.12f} e_n={point.e_n:.12f}")

# the levels crowd against the bound
for n in (10, 1000, 10 ** 6):
    print(f"n={n:>7d} gap to bound {bound_gap(cfg, n):.3e}")

# small deformation: exact level against the first-order expansion
small = OscillatorConfig(1e-4, 0.5)
ex = energy_expansions(small, 4, 1)
print(f"exact {ex.exact:.12f} first order {ex.terms['first_order']:.12f} undeformed {ex.leading:.12f}")
