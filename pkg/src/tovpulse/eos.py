"""Barotropic equations of state for the stellar pipeline.

The workhorse is the capped polytrope

    P(rho) = A rho^gamma / (1 + b rho^(gamma-1)),

an analytic pressure law whose low-density expansion is a power series in
rho^(gamma-1) and whose sound speed stays below c for every density once
b >= A*gamma*max(...)/c^2 (default b = 2*A*gamma/c^2).  A relativistic
free-neutron gas is provided as a validation example only; its low-density
exponent 5/3 is not an admissible pipeline value because 5/3 / (2/3) is not
an integer.

All thermodynamic functions are pure and vectorized over density.
"""

from dataclasses import dataclass
from functools import lru_cache
import math

import numpy as np
from numpy.polynomial import chebyshev as ncheb

from .errors import DomainError, NumericalError

CAPPED_POLYTROPE = "capped_polytrope"
NEUTRON_FERMI_GAS = "neutron_fermi_gas"

# Gauss-Legendre rule shared by the enthalpy quadratures.
_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(80)


@dataclass(frozen=True)
class EosModel:
    """Parameters of a barotropic pressure law.

    cap_b is the relativistic softening coefficient b; None selects the
    default 2*A*gamma/c^2.  c may be math.inf for the strict Newtonian limit.
    """

    A: float = 1.0
    gamma: float = 1.5
    cap_b: float | None = None
    c: float = 1.0
    G: float = 1.0
    kind: str = CAPPED_POLYTROPE
    fermi_K: float = 1.0

    def __post_init__(self):
        if self.kind not in (CAPPED_POLYTROPE, NEUTRON_FERMI_GAS):
            raise DomainError(f"unknown EOS kind {self.kind!r}")
        if self.A <= 0 or self.c <= 0 or self.G <= 0:
            raise DomainError("A, c, G must be positive")
        if not 1.0 < self.gamma < 2.0:
            raise DomainError("gamma must lie in (1, 2)")
        if self.cap_b is None:
            b = 2.0 * self.A * self.gamma / self.c**2
            object.__setattr__(self, "cap_b", 0.0 if not math.isfinite(b) else b)
        if self.cap_b < 0:
            raise DomainError("cap_b must be nonnegative")

    @property
    def inv_c2(self):
        return 0.0 if math.isinf(self.c) else 1.0 / self.c**2

    @property
    def n_index(self):
        """The chart parameter N = 2*gamma/(gamma-1)."""
        return 2.0 * self.gamma / (self.gamma - 1.0)


@dataclass(frozen=True)
class ThermoPoint:
    rho: float
    P: float
    dPdrho: float
    u: float
    gammaP: float


def _as_rho(rho, allow_zero=True):
    rho = np.asarray(rho, dtype=float)
    if np.any(rho < 0) or (not allow_zero and np.any(rho == 0)):
        raise DomainError("density must be %s" % ("nonnegative" if allow_zero else "positive"))
    return rho


def _sigma(model, rho):
    # sigma = rho^(gamma-1), the natural low-density expansion variable
    return rho ** (model.gamma - 1.0)


def pressure(model, rho):
    """Pressure P(rho); zero at rho = 0 and strictly increasing."""
    rho = _as_rho(rho)
    if model.kind == NEUTRON_FERMI_GAS:
        return _fermi_pressure(model, rho)
    s = _sigma(model, rho)
    return model.A * rho * s / (1.0 + model.cap_b * s)


def dpressure_drho(model, rho):
    """Sound speed squared dP/drho."""
    rho = _as_rho(rho)
    if model.kind == NEUTRON_FERMI_GAS:
        z = _fermi_zeta_of_rho(model, rho)
        return model.c**2 * z**2 / (3.0 * (1.0 + z**2))
    s = _sigma(model, rho)
    D = 1.0 + model.cap_b * s
    return model.A * s * (model.gamma + model.cap_b * s) / D**2


def d2pressure_drho2(model, rho):
    rho = _as_rho(rho, allow_zero=False)
    if model.kind == NEUTRON_FERMI_GAS:
        raise DomainError("second pressure derivative is only provided for the capped polytrope")
    g, b = model.gamma, model.cap_b
    s = _sigma(model, rho)
    D = 1.0 + b * s
    return model.A * (g - 1.0) * rho ** (g - 2.0) * (g + (2.0 - g) * b * s) / D**3


def p_over_rho(model, rho):
    """P/rho evaluated without the 0/0 at the vacuum boundary."""
    rho = _as_rho(rho)
    if model.kind == NEUTRON_FERMI_GAS:
        with np.errstate(invalid="ignore", divide="ignore"):
            out = np.where(rho > 0, _fermi_pressure(model, rho) / np.where(rho > 0, rho, 1.0), 0.0)
        return out
    s = _sigma(model, rho)
    return model.A * s / (1.0 + model.cap_b * s)


def gamma_p(model, rho):
    """Local adiabatic index (rho/P) dP/drho; tends to gamma as rho -> 0."""
    rho = _as_rho(rho, allow_zero=False)
    if model.kind == NEUTRON_FERMI_GAS:
        return rho * dpressure_drho(model, rho) / _fermi_pressure(model, rho)
    s = _sigma(model, rho)
    return (model.gamma + model.cap_b * s) / (1.0 + model.cap_b * s)


def gamma_p_limit(model, rho):
    """gamma_p extended by its limit value gamma at rho = 0."""
    rho = _as_rho(rho)
    if model.kind == NEUTRON_FERMI_GAS:
        lim = 5.0 / 3.0
    else:
        lim = model.gamma
    rho_safe = np.where(rho > 0, rho, 1.0)
    return np.where(rho > 0, gamma_p(model, rho_safe), lim)


def dgamma_p_drho(model, rho):
    rho = _as_rho(rho, allow_zero=False)
    g, b = model.gamma, model.cap_b
    s = _sigma(model, rho)
    D = 1.0 + b * s
    return -b * (g - 1.0) ** 2 * s / (rho * D**2)


def d2gamma_p_drho2(model, rho):
    rho = _as_rho(rho, allow_zero=False)
    g, b = model.gamma, model.cap_b
    s = _sigma(model, rho)
    D = 1.0 + b * s
    return -b * (g - 1.0) ** 2 * s / rho**2 / D**2 * ((g - 2.0) - 2.0 * b * (g - 1.0) * s / D)


# ---------------------------------------------------------------------------
# specific enthalpy u = int dP / (rho + P/c^2)
#
# In the variable s = rho^(gamma-1) the integrand is analytic:
#   du = (A/(gamma-1)) (gamma + b s) (1 + b s)^-2 (1 + P/(c^2 rho))^-1 ds
# so a fixed Gauss rule converges spectrally and no singular split is needed.


def _u_integrand(model, s):
    b = model.cap_b
    D = 1.0 + b * s
    X = model.A * s * model.inv_c2 / D  # P/(c^2 rho)
    return (model.gamma + b * s) / D**2 / (1.0 + X)


def _u_from_sigma_quad(model, s):
    """Cumulative enthalpy integral by per-point Gauss-Legendre in sigma."""
    s = np.asarray(s, dtype=float)
    half = 0.5 * s
    nodes = half[..., None] * (_GL_NODES + 1.0)
    vals = _u_integrand(model, nodes)
    integral = half * (vals * _GL_WEIGHTS).sum(axis=-1)
    return model.A / (model.gamma - 1.0) * integral


@lru_cache(maxsize=32)
def _u_table(model, sigma_cap):
    """Chebyshev fit of h(s) = u(s)/s on [0, sigma_cap], with tail check."""
    def h(s):
        s = np.asarray(s, dtype=float)
        out = np.empty_like(s)
        tiny = s <= 0
        out[tiny] = model.A * model.gamma / (model.gamma - 1.0)
        out[~tiny] = _u_from_sigma_quad(model, s[~tiny]) / s[~tiny]
        return out

    deg = 80
    fit = ncheb.Chebyshev.interpolate(h, deg, domain=[0.0, sigma_cap])
    tail = np.max(np.abs(fit.coef[-6:]))
    scale = np.max(np.abs(fit.coef))
    if not np.isfinite(tail) or tail > 1e-13 * scale:
        raise NumericalError(
            "enthalpy quadrature table did not converge: tail %.3e of scale %.3e "
            "on sigma in [0, %.3e]" % (tail, scale, sigma_cap)
        )
    return fit, fit.deriv()


def _sigma_cap_for(sigma_needed):
    if sigma_needed <= 0:
        return 1.0
    return float(2.0 ** math.ceil(math.log2(sigma_needed * 1.0000001)))


def enthalpy_u(model, rho):
    """Specific enthalpy u(rho) with u(0) = 0.

    Newtonian models (c = inf) use the closed form; finite c uses a cached
    spectral quadrature table accurate to ~1e-14 relative.
    """
    rho = _as_rho(rho)
    if model.kind == NEUTRON_FERMI_GAS:
        z = _fermi_zeta_of_rho(model, rho)
        return 0.5 * model.c**2 * np.log1p(z**2)
    g, b, A = model.gamma, model.cap_b, model.A
    s = _sigma(model, rho)
    if math.isinf(model.c):
        if b == 0.0:
            return A * g / (g - 1.0) * s
        return A / ((g - 1.0) * b) * np.log1p(b * s) + A * s / (1.0 + b * s)
    fit, _ = _u_table(model, _sigma_cap_for(float(np.max(s, initial=0.0))))
    return s * fit(s)


def rho_of_u(model, u):
    """Inverse of enthalpy_u by Newton iteration seeded with the leading term.

    Round-trips satisfy |enthalpy_u(rho_of_u(u)) - u| <= 1e-12 max(u, tiny).
    """
    u = np.asarray(u, dtype=float)
    if np.any(u < 0):
        raise DomainError("enthalpy must be nonnegative")
    if model.kind == NEUTRON_FERMI_GAS:
        z2 = np.expm1(2.0 * u / model.c**2)
        return _fermi_rho_of_zeta(model, np.sqrt(z2))
    g, b, A = model.gamma, model.cap_b, model.A
    target = (g - 1.0) * u / A  # = sigma * h(sigma) * (gamma-1)/(A)
    if math.isinf(model.c) and b == 0.0:
        return (target / g) ** (1.0 / (g - 1.0))

    if math.isinf(model.c):
        def F(s):
            return np.log1p(b * s) / b + (g - 1.0) * s / (1.0 + b * s)

        def dF(s):
            return (g + b * s) / (1.0 + b * s) ** 2
    else:
        fit, dfit = _u_table(model, _sigma_cap_for(float(np.max(target, initial=0.0)) / (g * 0.5)))

        def F(s):
            return s * fit(s) * (g - 1.0) / A

        def dF(s):
            return (fit(s) + s * dfit(s)) * (g - 1.0) / A

    s = np.where(target > 0, target / g, 0.0)
    for _ in range(60):
        f = F(s) - target
        step = f / dF(np.maximum(s, 0.0))
        s_new = np.maximum(s - step, 0.0)
        if np.allclose(s_new, s, rtol=1e-15, atol=1e-300):
            s = s_new
            break
        s = s_new
    rho = s ** (1.0 / (g - 1.0))
    # round-trip guard
    res = np.abs(enthalpy_u(model, rho) - u)
    floor = 1e-30
    if np.any(res > 1e-12 * np.maximum(u, floor) + 1e-300):
        raise NumericalError("enthalpy inversion residual %.3e" % float(np.max(res)))
    return rho


def du_drho(model, rho):
    """du/drho = (dP/drho) / (rho + P/c^2)."""
    rho = _as_rho(rho, allow_zero=False)
    P = pressure(model, rho)
    return dpressure_drho(model, rho) / (rho + P * model.inv_c2)


def thermo_point(model, rho):
    rho_f = float(rho)
    P = float(pressure(model, rho_f))
    cs2 = float(dpressure_drho(model, rho_f))
    u = float(enthalpy_u(model, rho_f))
    gp = float(gamma_p_limit(model, rho_f))
    return ThermoPoint(rho=rho_f, P=P, dPdrho=cs2, u=u, gammaP=gp)


# ---------------------------------------------------------------------------
# relativistic free-neutron gas (validation example, not a pipeline EOS)


def _fermi_PR_of_zeta(K, c, zeta):
    z = np.asarray(zeta, dtype=float)
    root = np.sqrt(1.0 + z**2)
    ash = np.arcsinh(z)
    with np.errstate(invalid="ignore"):
        P = K * c**5 / 8.0 * (z * (2.0 * z**2 - 3.0) * root + 3.0 * ash)
        rho = 3.0 * K * c**3 / 8.0 * (z * (2.0 * z**2 + 1.0) * root - ash)
    # the closed forms cancel catastrophically as zeta -> 0
    small = z < 0.05
    if np.any(small):
        zs = z[small] if z.ndim else z
        Pser = K * c**5 * zs**5 * (0.2 - zs**2 / 14.0 + zs**4 / 24.0 - 5.0 * zs**6 / 176.0)
        Rser = 3.0 * K * c**3 * zs**3 * (1.0 / 3.0 + zs**2 / 10.0 - zs**4 / 56.0 + zs**6 / 144.0)
        if z.ndim:
            P[small] = Pser
            rho[small] = Rser
        else:
            P = Pser
            rho = Rser
    return P, rho


def _fermi_pressure(model, rho):
    z = _fermi_zeta_of_rho(model, rho)
    return _fermi_PR_of_zeta(model.fermi_K, model.c, z)[0]


def _fermi_rho_of_zeta(model, zeta):
    return _fermi_PR_of_zeta(model.fermi_K, model.c, zeta)[1]


def _fermi_zeta_of_rho(model, rho):
    rho = np.asarray(rho, dtype=float)
    # seed with the degenerate limit rho ~ K c^3 zeta^3, then Newton
    z = np.cbrt(rho / (model.fermi_K * model.c**3))
    for _ in range(60):
        f = _fermi_rho_of_zeta(model, z) - rho
        df = 3.0 * model.fermi_K * model.c**3 * z**2 * np.sqrt(1.0 + z**2)
        step = np.where(df > 0, f / np.where(df > 0, df, 1.0), 0.0)
        z_new = np.maximum(z - step, 0.0)
        if np.allclose(z_new, z, rtol=1e-15, atol=1e-300):
            z = z_new
            break
        z = z_new
    return z


def neutron_fermi_gas(K, zeta, c=1.0):
    """Closed-form P, rho of the ideal neutron gas at Fermi parameter zeta."""
    if K <= 0:
        raise DomainError("K must be positive")
    if np.any(np.asarray(zeta) < 0):
        raise DomainError("zeta must be nonnegative")
    P, rho = _fermi_PR_of_zeta(K, c, zeta)
    z = np.asarray(zeta, dtype=float)
    with np.errstate(invalid="ignore", divide="ignore"):
        cs2 = c**2 * z**2 / (3.0 * (1.0 + z**2))
        u = 0.5 * c**2 * np.log1p(z**2)
        gp = np.where(P > 0, rho * cs2 / np.where(P > 0, P, 1.0), 5.0 / 3.0)
    return ThermoPoint(rho=float(rho), P=float(P), dPdrho=float(cs2), u=float(u), gammaP=float(gp))


# ---------------------------------------------------------------------------
# assumption checks


@dataclass(frozen=True)
class ValidationReport:
    ok_positivity: bool
    ok_low_density: bool
    ok_integer_index: bool
    details: dict

    @property
    def all_ok(self):
        return self.ok_positivity and self.ok_low_density and self.ok_integer_index


def validate_assumptions(model, rho_max):
    """Sample [0, rho_max] logarithmically and test the standing assumptions.

    Checked: positivity with a subluminal sound speed over the whole range,
    low-density pressure exponent equal to gamma within 1e-3, and integrality
    of gamma/(gamma-1) (required by the pulsation pipeline).
    """
    if rho_max <= 0:
        raise DomainError("rho_max must be positive")
    details = {}

    grid = np.logspace(math.log10(rho_max) - 12.0, math.log10(rho_max), 4000)
    P = pressure(model, grid)
    cs2 = dpressure_drho(model, grid)
    c2 = model.c**2
    ok_pos = bool(np.all(P > 0) and np.all(cs2 > 0) and np.all(cs2 < c2))
    details["max_cs2_over_c2"] = float(np.max(cs2) / c2) if math.isfinite(c2) else 0.0
    details["P_at_zero"] = float(pressure(model, 0.0))

    low = grid[grid <= grid[0] * 1e2]
    slope, logA = np.polyfit(np.log(low), np.log(pressure(model, low)), 1)
    if model.kind == NEUTRON_FERMI_GAS:
        gamma_expect = 5.0 / 3.0
    else:
        gamma_expect = model.gamma
    ok_a1 = bool(abs(slope - gamma_expect) <= 1e-3)
    details["low_density_exponent"] = float(slope)
    details["low_density_exponent_expected"] = gamma_expect

    ratio = gamma_expect / (gamma_expect - 1.0)
    ok_a2 = bool(abs(ratio - round(ratio)) <= 1e-9)
    details["gamma_over_gamma_minus_1"] = float(ratio)

    return ValidationReport(ok_positivity=ok_pos, ok_low_density=ok_a1,
                            ok_integer_index=ok_a2, details=details)
