"""Residuals, normalization and the uncertainty relation for one level."""
from minlength.oscillator import (
    OscillatorConfig,
    closed_form_norms,
    dirac_residual,
    normalization_integral,
    wavefunctions,
)
from minlength.uncertainty import uncertainty_report

cfg = OscillatorConfig(0.2, 0.5)
for n, tau in ((0, 1), (3, 1), (3, -1)):
    pair = wavefunctions(cfg, n, tau)
    quad = normalization_integral(pair)
    print(f"n={n} tau={tau:+d} residual {dirac_residual(cfg, pair):.1e} "
          f"norm {quad.value:.15f} closed form {sum(closed_form_norms(pair)):.15f}")

# moving p0 off the quantized value breaks the coupled equations
pair = wavefunctions(cfg, 3, 1)
detuned = wavefunctions(cfg, 3, 1, p0=pair.p0 + 0.01)
print(f"detuned residual {dirac_residual(cfg, detuned):.3e}")

report = uncertainty_report(cfg)
print(f"ground state dX dP = {report['lhs']:.12f} bound {report['rhs']:.12f} dX_min {report['dx_min']:.12f}")
