"""Build a relativistic equilibrium star and inspect its vacuum surface.

The default model is the capped polytrope P = rho^(3/2)/(1 + 3 sqrt(rho))
with G = c = 1 and central density 1e-3.  The integration switches to the
enthalpy as independent variable near the surface, so the vacuum boundary
u = 0 is reached exactly and the surface scalars come out clean.
"""

import numpy as np

from tovpulse import eos, tov

model = eos.EosModel()
print("EOS: capped polytrope, A=%g gamma=%g b=%g (sound speed < c everywhere)"
      % (model.A, model.gamma, model.cap_b))

report = eos.validate_assumptions(model, rho_max=1.0)
print("assumption check:", "all OK" if report.all_ok else report.details)

eq = tov.integrate_outward(model, rho_c=1e-3)
print()
print("surface radius  r_+    = %.10f" % eq.r_plus)
print("total mass      m_+    = %.10f" % eq.m_plus)
print("lapse factor    kappa  = %.10f   (1 - 2Gm_+/c^2 r_+)" % eq.kappa)
print("surface slope   K      = %.6e   (= G m_+ / r_+^2 kappa)" % eq.K)
print("compactness     2Gm/c^2r = %.4f" % (1 - eq.kappa))

# the density vanishes like (r_+ - r)^(1/(gamma-1)) = (r_+ - r)^2
fit = tov.surface_exponent_check(eq)
print()
print("surface density fit: rho ~ C (r_+ - r)^p")
print("  exponent  p = %.6f   (expected %.1f)" % (fit.exponent, fit.exponent_expected))
print("  amplitude C = %.6e (expected %.6e = ((gamma-1)K/A gamma)^(1/(gamma-1)))"
      % (fit.amplitude, fit.amplitude_expected))

# ratios r/m and the rescaled second ratio stay finite to u = 0 (the
# practical face of surface analyticity)
sc = tov.surface_chart(eq)
print()
print("surface chart limits: r_+/m_+ = %.6f, second ratio = %.6e"
      % (sc.Xstar, sc.Ystar))
print("Chebyshev tail decay rates (analyticity proxy): %.3f, %.3f"
      % (sc.cheb_decay_rate_X, sc.cheb_decay_rate_Y))

# compare against the Newtonian polytrope (c -> 1e6): the n = 2 Lane-Emden
# star of the same central density
newt = tov.integrate_outward(eos.EosModel(c=1e6), rho_c=1e-3, storage_points=512)
print()
print("Newtonian comparison: r_+ = %.4f (GR %.4f), m_+ = %.4f (GR %.4f)"
      % (newt.r_plus, eq.r_plus, newt.m_plus, eq.m_plus))

out = "demo_equilibrium.csv"
tov.save_equilibrium(eq, out, "demo_equilibrium.json")
print()
print("wrote", out, "and demo_equilibrium.json")
