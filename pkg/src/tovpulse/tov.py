"""Relativistic hydrostatic equilibria with an exact vacuum surface.

The structure equations

    dm/dr = 4 pi r^2 rho
    du/dr = -G (m + 4 pi r^3 P/c^2) / (r^2 (1 - 2Gm/c^2 r))

are integrated in the specific enthalpy u (so dP = (rho + P/c^2) du), starting
from a center series at r = delta and switching to u as the independent
variable once u falls below a small fraction of its central value.  The
surface u = 0 is then reached exactly, with no extrapolation in the surface
radius.  All coefficient functions needed downstream (metric potentials,
Sturm-Liouville data, the normal-form potential) are evaluated analytically
from (r, m, u) and the EOS derivatives, never by numerical differentiation
of stored profiles.
"""

import json
import math
from dataclasses import dataclass, field
from types import SimpleNamespace

import numpy as np
from scipy.integrate import solve_ivp

from . import eos as eosmod
from .errors import (
    CollapseError,
    DomainError,
    LongEquilibriumError,
    NumericalError,
    StallError,
)
from .spectral import cheb_lobatto, cheb_coefficients


# ---------------------------------------------------------------------------
# center expansion


@dataclass(frozen=True)
class CenterSeries:
    """Series data at the center: m = m3 r^3 + m5 r^5, P = P_c + P2 r^2 + P4 r^4,
    u = u_c + u2 r^2 + u4 r^4, rho = rho_c + rho2 r^2."""

    rho_c: float
    P_c: float
    u_c: float
    m3: float
    m5: float
    P2: float
    P4: float
    u2: float
    u4: float
    rho2: float

    def m(self, r):
        return self.m3 * r**3 + self.m5 * r**5

    def u(self, r):
        return self.u_c + self.u2 * r**2 + self.u4 * r**4

    def P(self, r):
        return self.P_c + self.P2 * r**2 + self.P4 * r**4


def center_series(model, rho_c):
    if rho_c <= 0:
        raise DomainError("central density must be positive")
    G, ic2 = model.G, model.inv_c2
    P_c = float(eosmod.pressure(model, rho_c))
    u_c = float(eosmod.enthalpy_u(model, rho_c))
    cs2_c = float(eosmod.dpressure_drho(model, rho_c))
    m3 = 4.0 * math.pi / 3.0 * rho_c
    n0 = m3 + 4.0 * math.pi * P_c * ic2
    u2 = -0.5 * G * n0
    P2 = (rho_c + P_c * ic2) * u2
    rho2 = P2 / cs2_c
    m5 = 4.0 * math.pi / 5.0 * rho2
    n2 = m5 + 4.0 * math.pi * P2 * ic2
    n2_eff = n2 + 2.0 * G * m3 * n0 * ic2
    u4 = -0.25 * G * n2_eff
    P4 = -0.25 * G * ((rho_c + P_c * ic2) * n2_eff + (rho2 + P2 * ic2) * n0)
    return CenterSeries(rho_c=rho_c, P_c=P_c, u_c=u_c, m3=m3, m5=m5,
                        P2=P2, P4=P4, u2=u2, u4=u4, rho2=rho2)


def center_expansion(model, rho_c, delta):
    """Evaluate the center series at radius delta.

    Returns a namespace exposing m(delta), P(delta), the leading mass
    coefficient 4 pi rho_c / 3, the leading pressure-deficit coefficient
    (rho_c + P_c/c^2) G (4 pi rho_c/3 + 4 pi P_c/c^2)/2, and the next-order
    coefficients.  Refuses deltas where the next-order correction exceeds
    1e-4 of the leading term.
    """
    cs = center_series(model, rho_c)
    rel_m = abs(cs.m5) * delta**2 / cs.m3
    rel_p = abs(cs.P4) * delta**2 / abs(cs.P2) if cs.P2 != 0 else 0.0
    rel = max(rel_m, rel_p)
    if rel > 1e-4:
        suggested = delta * math.sqrt(1e-6 / rel)
        raise DomainError(
            "delta=%g too large for the center series (relative correction %.2e); "
            "try delta <= %.3e" % (delta, rel, suggested)
        )
    return SimpleNamespace(
        m_delta=cs.m(delta),
        P_delta=cs.P(delta),
        u_delta=cs.u(delta),
        mass_r3_coef=cs.m3,
        pressure_r2_deficit=-cs.P2,
        series=cs,
        truncation_rel=rel,
    )


# ---------------------------------------------------------------------------
# equilibrium object


@dataclass
class Equilibrium:
    """A short equilibrium: profiles, surface scalars, and dense evaluators."""

    eos: eosmod.EosModel
    rho_c: float
    u_c: float
    P_c: float
    r_plus: float
    m_plus: float
    kappa: float
    K: float
    delta: float
    u_switch: float
    r_switch: float
    grid_r: np.ndarray
    m: np.ndarray
    rho: np.ndarray
    P: np.ndarray
    u: np.ndarray
    F: np.ndarray
    H: np.ndarray
    center: CenterSeries = field(repr=False)
    _sol_r: object = field(repr=False)
    _sol_u: object = field(repr=False)
    _seed_r: np.ndarray = field(repr=False, default=None)
    _seed_u: np.ndarray = field(repr=False, default=None)

    # -- raw profile evaluation ------------------------------------------

    def raw(self, r):
        """(m, u) at radii r, using series / r-chart / u-chart branches."""
        r = np.atleast_1d(np.asarray(r, dtype=float))
        if np.any(r < 0) or np.any(r > self.r_plus * (1 + 1e-12)):
            raise DomainError("radius outside [0, r_plus]")
        m = np.empty_like(r)
        u = np.empty_like(r)
        inner = r < self.delta
        mid = (~inner) & (r <= self.r_switch)
        outer = (~inner) & (~mid)
        if np.any(inner):
            m[inner] = self.center.m(r[inner])
            u[inner] = self.center.u(r[inner])
        if np.any(mid):
            vals = self._sol_r(r[mid])
            m[mid] = vals[0]
            u[mid] = vals[1]
        if np.any(outer):
            u_out = self._invert_surface_radius(r[outer])
            m[outer] = self._sol_u(u_out)[1]
            u[outer] = u_out
        return m, u

    def raw_from_u(self, u):
        """(r, m) at enthalpy values u <= u_switch (the surface chart)."""
        u = np.atleast_1d(np.asarray(u, dtype=float))
        if np.any(u < 0) or np.any(u > self.u_switch * (1 + 1e-9)):
            raise DomainError("u outside [0, u_switch]")
        vals = self._sol_u(np.clip(u, 0.0, self.u_switch))
        return vals[0], vals[1]

    def _invert_surface_radius(self, r):
        # Newton for u with r(u) from the u-chart solution
        u = np.interp(r, self._seed_r, self._seed_u)
        u = np.clip(u, 0.0, self.u_switch)
        model = self.eos
        for _ in range(50):
            vals = self._sol_u(u)
            r_cur, m_cur = vals[0], vals[1]
            resid = r_cur - r
            rho = eosmod.rho_of_u(model, u)
            P = eosmod.pressure(model, rho)
            dudr = -model.G * (m_cur + 4 * np.pi * r_cur**3 * P * model.inv_c2) / (
                r_cur**2 * (1.0 - 2.0 * model.G * m_cur / (model.c**2 * r_cur))
            )
            u_new = np.clip(u - resid * dudr, 0.0, self.u_switch)
            if np.max(np.abs(u_new - u)) <= 1e-15 * self.u_c:
                u = u_new
                break
            u = u_new
        return u

    # -- derived fields ---------------------------------------------------

    def fields(self, r=None, u=None, order=2):
        """All pointwise quantities derived from (r, m, u); see _derived."""
        if (r is None) == (u is None):
            raise DomainError("pass exactly one of r or u")
        if r is not None:
            r = np.atleast_1d(np.asarray(r, dtype=float))
            m, uu = self.raw(r)
        else:
            uu = np.atleast_1d(np.asarray(u, dtype=float))
            r, m = self.raw_from_u(uu)
        return derived_fields(self.eos, self.kappa, r, m, uu, order=order)

    def g00(self, r):
        """Time-time metric component, interior and exterior."""
        r = np.atleast_1d(np.asarray(r, dtype=float))
        out = np.empty_like(r)
        ins = r <= self.r_plus
        if np.any(ins):
            _, u = self.raw(r[ins])
            out[ins] = self.kappa * np.exp(-2.0 * u * self.eos.inv_c2)
        if np.any(~ins):
            out[~ins] = 1.0 - 2.0 * self.eos.G * self.m_plus * self.eos.inv_c2 / r[~ins]
        return out

    def g11(self, r):
        """Radial metric component (negative of the inverse lapse factor)."""
        r = np.atleast_1d(np.asarray(r, dtype=float))
        out = np.empty_like(r)
        ins = r <= self.r_plus
        if np.any(ins):
            m, _ = self.raw(r[ins])
            with np.errstate(divide="ignore"):
                denom = 1.0 - 2.0 * self.eos.G * m * self.eos.inv_c2 / np.where(r[ins] > 0, r[ins], 1.0)
            denom[r[ins] == 0] = 1.0
            out[ins] = -1.0 / denom
        if np.any(~ins):
            out[~ins] = -1.0 / (1.0 - 2.0 * self.eos.G * self.m_plus * self.eos.inv_c2 / r[~ins])
        return out


def derived_fields(model, kappa, r, m, u, order=2):
    """Pointwise analytic fields at (r, m, u).

    Log-derivative combinations that are singular at the endpoints (sigma and
    its derivative, needed for the normal-form potential) are only meaningful
    at interior points; everything else is regular on the closed interval.
    """
    G, ic2, c2 = model.G, model.inv_c2, model.c**2
    f = SimpleNamespace(r=r, m=m, u=u)
    f.rho = eosmod.rho_of_u(model, u)
    f.P = eosmod.pressure(model, f.rho)
    f.cs2 = eosmod.dpressure_drho(model, f.rho)
    f.P_over_rho = eosmod.p_over_rho(model, f.rho)
    f.X = f.P_over_rho * ic2
    f.one_plus_X = 1.0 + f.X
    f.gp = eosmod.gamma_p_limit(model, f.rho)
    f.rho_dgp = -model.cap_b * (model.gamma - 1.0) ** 2 * f.rho ** (model.gamma - 1.0) \
        / (1.0 + model.cap_b * f.rho ** (model.gamma - 1.0)) ** 2

    with np.errstate(divide="ignore", invalid="ignore"):
        r_safe = np.where(r > 0, r, 1.0)
        f.gbar = 2.0 * G * m * ic2 / r_safe           # 2Gm/(c^2 r)
        f.gbar = np.where(r > 0, f.gbar, 0.0)
        f.e_m2H = 1.0 - f.gbar                         # e^{-2H}
        if np.any(f.e_m2H <= 0):
            raise CollapseError("2Gm/c^2 r reached 1")
        f.e2H = 1.0 / f.e_m2H
        f.H = -0.5 * np.log(f.e_m2H)
        f.F = -u * ic2 + 0.5 * math.log(kappa)
        f.eF = np.exp(f.F)
        f.e2F = np.exp(2.0 * f.F)

        # first derivatives in r
        mu = np.where(r > 0, m / r_safe**3, 4.0 * math.pi * f.rho / 3.0)  # m/r^3
        f.n_of_r = mu + 4.0 * math.pi * f.P * ic2
        f.u1_over_r = -G * f.n_of_r * f.e2H
        f.u1 = f.u1_over_r * r
        f.m1 = 4.0 * math.pi * r**2 * f.rho
        f.P1 = (f.rho + f.P * ic2) * f.u1
        f.rho_over_cs2 = _rho_over_cs2(model, f.rho)
        f.rho1 = f.one_plus_X * f.rho_over_cs2 * f.u1
        f.F1 = -f.u1 * ic2
        f.H1 = G * ic2 * f.e2H * (4.0 * math.pi * r * f.rho - mu * r)
        f.Theta1 = (1.0 - 1.0 / f.gp) * f.u1 * ic2

        if order >= 2:
            N_num = m + 4.0 * math.pi * r**3 * f.P * ic2
            D_den = r**2 - 2.0 * G * m * r * ic2
            N1 = f.m1 + 4.0 * math.pi * ic2 * (3.0 * r**2 * f.P + r**3 * f.P1)
            D1 = 2.0 * r - 2.0 * G * ic2 * (f.m1 * r + m)
            f.u2 = np.where(
                r > 0,
                -G * (N1 * D_den - N_num * D1) / np.where(D_den > 0, D_den, 1.0) ** 2,
                2.0 * (-0.5 * G * f.n_of_r),
            )
            f.P2 = (f.rho1 + f.P1 * ic2) * f.u1 + (f.rho + f.P * ic2) * f.u2
            f.H2 = G * ic2 * (
                2.0 * f.H1 * f.e2H * (4.0 * math.pi * r * f.rho - mu * r)
                + f.e2H * (4.0 * math.pi * f.rho + 4.0 * math.pi * r * f.rho1 - f.m1 / r_safe**2 + 2.0 * mu)
            )
            # interior-only log-derivative data
            f.lnP1 = f.P1 / f.P
            f.lnrho1 = f.rho1 / f.rho
            dgp = eosmod.dgamma_p_drho(model, np.where(f.rho > 0, f.rho, 1.0))
            d2gp = eosmod.d2gamma_p_drho2(model, np.where(f.rho > 0, f.rho, 1.0))
            f.lngp1 = dgp * f.rho1 / f.gp
            cs2_1 = eosmod.d2pressure_drho2(model, np.where(f.rho > 0, f.rho, 1.0)) * f.rho1
            f.rho2 = f.P2 / f.cs2 - f.P1 * cs2_1 / f.cs2**2
            f.lnP2 = f.P2 / f.P - f.lnP1**2
            f.lnrho2 = f.rho2 / f.rho - f.lnrho1**2
            f.lngp2 = (d2gp * f.rho1**2 + dgp * f.rho2) / f.gp - f.lngp1**2
            X1 = f.X * (f.lnP1 - f.lnrho1)
            X2 = X1 * (f.lnP1 - f.lnrho1) + f.X * (f.lnP2 - f.lnrho2)
            f.Theta2 = X2 / f.one_plus_X - f.Theta1**2
            f.sigma = f.lngp1 + f.lnP1 + f.lnrho1 + 8.0 / r_safe + 4.0 * f.H1 - 2.0 * f.Theta1
            f.sigma1 = f.lngp2 + f.lnP2 + f.lnrho2 - 8.0 / r_safe**2 + 4.0 * f.H2 - 2.0 * f.Theta2

    # Sturm-Liouville data (regular on the closed interval)
    f.E2 = f.e_m2H * f.gp * f.P / np.where(f.rho > 0, f.rho + f.P * ic2, 1.0)
    f.E2 = np.where(f.rho > 0, f.E2, 0.0)
    f.E0 = (4.0 * math.pi * G * ic2) * 3.0 * (f.gp - 1.0) * f.P + f.u1_over_r * (
        -1.0 + 3.0 * f.e_m2H * ((f.gp - 1.0) / f.one_plus_X + f.rho_dgp / f.gp)
    )
    f.Q = -f.e2F * f.one_plus_X * f.E0
    f.a_coef = f.gp * f.P * r**4 * f.eF * np.sqrt(f.e2H) / f.one_plus_X
    f.b_coef = f.rho * r**4 * f.e2H ** 1.5 / (f.eF * f.one_plus_X)
    f.a_over_b = f.cs2 * f.e2F * f.e_m2H
    with np.errstate(divide="ignore"):
        f.sqrt_b_over_a = np.where(f.cs2 > 0, np.sqrt(f.e2H / np.where(f.cs2 > 0, f.cs2, 1.0)) / f.eF, np.inf)
    if order >= 2:
        # E1/E2 from the linearized momentum balance; equals (ln a)'
        f.E1_over_E2 = (
            4.0 * math.pi * G * ic2 * f.e2H * (f.rho + f.P * ic2) * r
            - f.Theta1 + 3.0 / r_safe + f.lngp1 + f.lnP1 + 1.0 / r_safe
        )
        f.q_potential = f.Q + 0.25 * f.a_over_b * (
            f.sigma1 - 0.25 * f.sigma**2 + f.E1_over_E2 * f.sigma
        )
    return f


def _rho_over_cs2(model, rho):
    # rho / (dP/drho), continuous (-> 0) at the surface for gamma < 2
    g, b, A = model.gamma, model.cap_b, model.A
    s = rho ** (g - 1.0)
    D = 1.0 + b * s
    return rho ** (2.0 - g) * D**2 / (A * (g + b * s))


# ---------------------------------------------------------------------------
# outward integration


def integrate_outward(model, rho_c, rtol=1e-10, u_switch_frac=1e-3,
                      r_max_factor=1e4, storage_points=2048, delta=None):
    """Integrate the structure equations from the center to the surface.

    Phase 1 runs in r from the series start delta until u drops below
    u_switch_frac * u_c; phase 2 runs in u down to u = 0 exactly.  Raises
    LongEquilibriumError if no surface is found below r_max, CollapseError
    if 2Gm/c^2 r approaches 1, StallError if u stops decreasing.
    """
    rep = eosmod.validate_assumptions(model, rho_c)
    if not rep.ok_positivity:
        raise DomainError("EOS violates positivity/subluminal-sound assumptions "
                          "below rho_c: %s" % rep.details)
    cs = center_series(model, rho_c)
    u_c, P_c = cs.u_c, cs.P_c
    G, ic2 = model.G, model.inv_c2

    # length scale of the near-center enthalpy well
    L = math.sqrt(2.0 * u_c / (G * (cs.m3 + 4.0 * math.pi * P_c * ic2)))
    if delta is None:
        cand = [1e-3 * L]
        if cs.m5 != 0.0:
            cand.append(math.sqrt(1e-12 * cs.m3 / abs(cs.m5)))
        if cs.P4 != 0.0 and cs.P2 != 0.0:
            cand.append(math.sqrt(1e-12 * abs(cs.P2) / abs(cs.P4)))
        delta = min(cand)
    u_switch = u_switch_frac * u_c
    r_max = r_max_factor * L

    def rhs_r(r, y):
        m, u = y
        rho = float(eosmod.rho_of_u(model, min(max(u, 0.0), u_c)))
        P = float(eosmod.pressure(model, rho))
        denom = 1.0 - 2.0 * G * m * ic2 / r
        dudr = -G * (m + 4.0 * math.pi * r**3 * P * ic2) / (r**2 * denom)
        return [4.0 * math.pi * r**2 * rho, dudr]

    def hit_switch(r, y):
        return y[1] - u_switch

    hit_switch.terminal = True
    hit_switch.direction = -1

    def domain_exit(r, y):
        return 1.0 - 2.0 * G * y[0] * ic2 / r - 1e-9

    domain_exit.terminal = True
    domain_exit.direction = -1

    y0 = [cs.m(delta), cs.u(delta)]
    atol = [rtol * cs.m3 * L**3 * 1e-3, rtol * u_c * 1e-3]
    sol1 = solve_ivp(rhs_r, (delta, r_max), y0, method="DOP853", rtol=rtol,
                     atol=atol, events=[hit_switch, domain_exit], dense_output=True)
    if not sol1.success:
        raise NumericalError("phase-1 integration failed: %s" % sol1.message)
    if sol1.t_events[1].size:
        raise CollapseError("2Gm/c^2 r approached 1 at r=%.6g" % sol1.t_events[1][0])
    if not sol1.t_events[0].size:
        raise LongEquilibriumError("no surface found below r_max=%.3g; "
                                   "the equilibrium may be long" % r_max)
    r_switch = float(sol1.t_events[0][0])
    m_switch = float(sol1.y_events[0][0][0])

    def rhs_u(u, y):
        r, m = y
        rho = float(eosmod.rho_of_u(model, max(u, 0.0)))
        P = float(eosmod.pressure(model, rho))
        denom = 1.0 - 2.0 * G * m * ic2 / r
        drdu = -(r**2 * denom) / (G * (m + 4.0 * math.pi * r**3 * P * ic2))
        return [drdu, 4.0 * math.pi * r**2 * rho * drdu]

    sol2 = solve_ivp(rhs_u, (u_switch, 0.0), [r_switch, m_switch], method="DOP853",
                     rtol=rtol, atol=[rtol * r_switch * 1e-3, rtol * m_switch * 1e-3],
                     dense_output=True)
    if not sol2.success:
        raise NumericalError("phase-2 integration failed: %s" % sol2.message)
    r_plus = float(sol2.y[0, -1])
    m_plus = float(sol2.y[1, -1])

    kappa = 1.0 - 2.0 * G * m_plus * ic2 / r_plus
    if not 0.0 < kappa < 1.0 + 1e-14:
        raise CollapseError("surface lapse factor kappa=%.6g outside (0,1)" % kappa)
    K = G * m_plus / (r_plus**2 * kappa)

    eq = Equilibrium(
        eos=model, rho_c=rho_c, u_c=u_c, P_c=P_c,
        r_plus=r_plus, m_plus=m_plus, kappa=kappa, K=K,
        delta=delta, u_switch=u_switch, r_switch=r_switch,
        grid_r=None, m=None, rho=None, P=None, u=None, F=None, H=None,
        center=cs, _sol_r=sol1.sol, _sol_u=sol2.sol,
    )
    # monotone (r, u) seed table for the surface-branch Newton inversion,
    # clustered toward u = 0 via an s = sqrt(u) spacing
    s_seed = np.linspace(0.0, math.sqrt(u_switch), 400)
    u_seed = s_seed**2
    r_seed = sol2.sol(u_seed)[0]
    order = np.argsort(r_seed)
    eq._seed_r = r_seed[order]
    eq._seed_u = u_seed[order]

    grid_r = cheb_lobatto(storage_points - 1) * r_plus
    grid_r[-1] = r_plus
    m_arr, u_arr = eq.raw(grid_r)
    m_arr[0], u_arr[0] = 0.0, u_c
    u_arr[-1] = 0.0
    eq.grid_r = grid_r
    eq.m = m_arr
    eq.u = u_arr
    eq.rho = eosmod.rho_of_u(model, np.maximum(u_arr, 0.0))
    eq.P = eosmod.pressure(model, eq.rho)
    eq.F = -u_arr * ic2 + 0.5 * math.log(kappa)
    with np.errstate(divide="ignore"):
        lapse = 1.0 - 2.0 * G * m_arr * ic2 / np.where(grid_r > 0, grid_r, 1.0)
    lapse[0] = 1.0
    eq.H = -0.5 * np.log(lapse)

    _assert_invariants(eq, lapse)
    return eq


def _assert_invariants(eq, lapse):
    if np.any(lapse <= 0):
        raise CollapseError("domain invariant 1 - 2Gm/c^2 r > 0 violated on grid")
    if abs(lapse[-1] - eq.kappa) > 1e-8 * eq.kappa:
        raise NumericalError("grid lapse at surface does not reach kappa")
    dm = np.diff(eq.m)
    if np.any(dm < -1e-12 * eq.m_plus):
        raise NumericalError("mass profile not monotone")
    du = np.diff(eq.u)
    if np.any(du > 1e-12 * eq.u_c):
        raise StallError("enthalpy failed to decrease monotonically")


# ---------------------------------------------------------------------------
# auxiliary system and surface analysis


@dataclass
class AuxXYU:
    r: np.ndarray
    u: np.ndarray
    x_aux: np.ndarray
    y_aux: np.ndarray
    alpha: np.ndarray
    beta: np.ndarray
    omega: np.ndarray
    Gtilde: np.ndarray


def aux_xyu(eq, r):
    """The (x, y, u) auxiliary variables and their coefficient functions."""
    f = eq.fields(r=r, order=1)
    model = eq.eos
    x_aux = f.m / (f.u * f.r)
    y_aux = 4.0 * math.pi * f.r**2 * f.rho**2 / f.P
    alpha = f.P_over_rho / f.u
    beta = f.one_plus_X * f.u * (2.0 / f.cs2 - 1.0 / f.P_over_rho)
    omega = f.P_over_rho**2 / f.u
    Gtilde = model.G * (1.0 + 4.0 * math.pi * f.r**3 * f.P * model.inv_c2 / f.m) / f.e_m2H
    return AuxXYU(r=f.r, u=f.u, x_aux=x_aux, y_aux=y_aux,
                  alpha=alpha, beta=beta, omega=omega, Gtilde=Gtilde)


def shortness_criterion(aux, G=1.0):
    """Radius bound r0 exp(1/(G x(r0) - 1)) from the first-passage criterion.

    Returns the sharpest bound over the sampled profile, or None when
    x = m/(u r) never exceeds 1/G on the samples.
    """
    mask = aux.x_aux > 1.0 / G
    if not np.any(mask):
        return None
    bounds = aux.r[mask] * np.exp(1.0 / (G * aux.x_aux[mask] - 1.0))
    return float(np.min(bounds))


@dataclass
class SurfaceChart:
    u_grid: np.ndarray
    Xcheck: np.ndarray
    Ycheck: np.ndarray
    Xstar: float
    Ystar: float
    cheb_decay_rate_X: float
    cheb_decay_rate_Y: float


def surface_chart(eq, n_points=257, rel_tol=5e-3):
    """X/u and Y/u^(gamma/(gamma-1)) along the profile, continuous to u = 0.

    Verifies the u -> 0 limits r_plus/m_plus and the closed-form constant for
    the second ratio (which carries an extra 1/A relative to the A = 1 case),
    and estimates the geometric decay rate of the Chebyshev coefficients as a
    practical analyticity check.
    """
    model = eq.eos
    g = model.gamma
    u_hi = eq.u_switch * 0.999
    u_grid = cheb_lobatto(n_points - 1) * u_hi
    r, m = eq.raw_from_u(u_grid)
    rho = eosmod.rho_of_u(model, u_grid)
    s = rho ** (g - 1.0)
    t_ratio = np.empty_like(u_grid)
    pos = u_grid > 0
    t_ratio[pos] = s[pos] / u_grid[pos]
    t_ratio[~pos] = (g - 1.0) / (model.A * g)
    Xcheck = r / m
    Ycheck = 4.0 * math.pi * r**4 / m**2 * t_ratio ** ((2.0 - g) / (g - 1.0)) \
        * (1.0 + model.cap_b * s) / model.A

    Xstar = eq.r_plus / eq.m_plus
    Ystar = 4.0 * math.pi * ((g - 1.0) / (model.A * g)) ** ((2.0 - g) / (g - 1.0)) \
        * eq.r_plus**4 / eq.m_plus**2 / model.A
    # limits tested by linear extrapolation from interior nodes, so the u = 0
    # sample (which uses the limit branch) does not certify itself
    x_lim = Xcheck[1] + (Xcheck[1] - Xcheck[2]) * u_grid[1] / (u_grid[2] - u_grid[1])
    y_lim = Ycheck[1] + (Ycheck[1] - Ycheck[2]) * u_grid[1] / (u_grid[2] - u_grid[1])
    if abs(x_lim - Xstar) > rel_tol * Xstar:
        raise NumericalError("X/u limit %.8g disagrees with r_plus/m_plus %.8g"
                             % (x_lim, Xstar))
    if abs(y_lim - Ystar) > rel_tol * Ystar:
        raise NumericalError("Y-ratio limit %.8g disagrees with closed form %.8g"
                             % (y_lim, Ystar))

    rate_x = _cheb_decay_rate(Xcheck)
    rate_y = _cheb_decay_rate(Ycheck)
    return SurfaceChart(u_grid=u_grid, Xcheck=Xcheck, Ycheck=Ycheck,
                        Xstar=Xstar, Ystar=Ystar,
                        cheb_decay_rate_X=rate_x, cheb_decay_rate_Y=rate_y)


def _cheb_decay_rate(values):
    coef = np.abs(cheb_coefficients(values))
    scale = coef.max()
    k = np.arange(coef.size)
    keep = coef > scale * 1e-14
    k_used = k[keep][1:]
    c_used = coef[keep][1:]
    if k_used.size < 4:
        return 0.0
    slope = np.polyfit(k_used, np.log(c_used), 1)[0]
    return float(np.exp(slope))


def surface_exponent_check(eq, window=(1e-4, 1e-3), n_points=48):
    """Fit rho ~ C (r_plus - r)^p in the given (r_plus - r)/r_plus window.

    Returns fitted (exponent, amplitude) and the predicted values
    p = 1/(gamma-1), C = ((gamma-1) K / (A gamma))^(1/(gamma-1)).
    """
    g = eq.eos.gamma
    depth = np.geomspace(window[0], window[1], n_points) * eq.r_plus
    if depth[0] < 1e3 * np.finfo(float).eps * eq.r_plus:
        raise DomainError("fit window underresolved: inner depth %.3e below "
                          "floating-point resolution of the profile" % depth[0])
    r = eq.r_plus - depth
    _, u_grid = eq.raw(r)
    rho = eosmod.rho_of_u(eq.eos, u_grid)
    p_fit, logc = np.polyfit(np.log(depth), np.log(rho), 1)
    amp_fit = math.exp(logc)
    p_expect = 1.0 / (g - 1.0)
    amp_expect = ((g - 1.0) * eq.K / (eq.eos.A * g)) ** (1.0 / (g - 1.0))
    return SimpleNamespace(exponent=float(p_fit), amplitude=float(amp_fit),
                           exponent_expected=p_expect, amplitude_expected=amp_expect)


def metric_potentials(eq, h_frac=2e-3):
    """Static metric components with one-sided surface-derivative checks.

    Interior derivatives of g00 are estimated by one-sided finite differences
    of the profile and compared against the exterior Schwarzschild values
    2Gm_plus/c^2 r_plus^2 and -4Gm_plus/c^2 r_plus^3; the second enthalpy
    derivative at the surface is compared with its closed form.
    """
    model = eq.eos
    G, ic2 = model.G, model.inv_c2
    h = h_frac * eq.r_plus
    # 5-point one-sided stencils at r_plus - j h
    r_nodes = eq.r_plus - h * np.arange(5)
    g00_in = eq.g00(r_nodes)
    d1 = (25.0 * g00_in[0] - 48.0 * g00_in[1] + 36.0 * g00_in[2]
          - 16.0 * g00_in[3] + 3.0 * g00_in[4]) / (12.0 * h)
    d2 = (35.0 * g00_in[0] - 104.0 * g00_in[1] + 114.0 * g00_in[2]
          - 56.0 * g00_in[3] + 11.0 * g00_in[4]) / (12.0 * h**2)
    d1_ext = 2.0 * G * eq.m_plus * ic2 / eq.r_plus**2
    d2_ext = -4.0 * G * eq.m_plus * ic2 / eq.r_plus**3

    fsurf = eq.fields(u=np.array([0.0]))
    u2_surface = float(fsurf.u2[0])
    u2_expected = 2.0 * G * eq.m_plus / (eq.r_plus**3 * eq.kappa) \
        + 2.0 * ic2 * (G * eq.m_plus / (eq.r_plus**2 * eq.kappa)) ** 2

    rel1 = abs(d1 - d1_ext) / abs(d1_ext)
    rel2 = abs(d2 - d2_ext) / abs(d2_ext)
    relu = abs(u2_surface - u2_expected) / abs(u2_expected)
    report = SimpleNamespace(
        dg00_interior=float(d1), dg00_exterior=float(d1_ext), dg00_rel=float(rel1),
        d2g00_interior=float(d2), d2g00_exterior=float(d2_ext), d2g00_rel=float(rel2),
        d2u_surface=u2_surface, d2u_expected=u2_expected, d2u_rel=float(relu),
    )
    if max(rel1, rel2, relu) > 1e-4:
        raise NumericalError("surface matching derivatives disagree: %r" % (report,))
    return report


# ---------------------------------------------------------------------------
# independent consistency diagnostics


def tov_residual(eq):
    """Max residual of the pressure equation using spline differentiation."""
    from scipy.interpolate import CubicSpline

    sel = slice(8, -8)
    r = eq.grid_r[sel]
    spl = CubicSpline(eq.grid_r, eq.P)
    dPdr = spl(r, 1)
    f = eq.fields(r=r, order=1)
    rhs = -(f.rho + f.P * eq.eos.inv_c2) * eq.eos.G * (
        f.m + 4.0 * math.pi * r**3 * f.P * eq.eos.inv_c2
    ) / (r**2 * f.e_m2H)
    scale = np.max(np.abs(rhs))
    return float(np.max(np.abs(dPdr - rhs)) / scale)


def mass_consistency(eq):
    """|m(r) - 4 pi int rho r'^2 dr'| / m_plus by independent quadrature."""
    from .spectral import gauss_panels

    nodes, weights, _ = gauss_panels(eq.grid_r, nodes_per_panel=8)
    f = eq.fields(r=nodes, order=0)
    integrand = 4.0 * math.pi * nodes**2 * f.rho
    cumulative = np.concatenate([[0.0], np.cumsum((integrand * weights).reshape(-1, 8).sum(axis=1))])
    return float(np.max(np.abs(cumulative - eq.m)) / eq.m_plus)


# ---------------------------------------------------------------------------
# persistence


def save_equilibrium(eq, csv_path, json_path, code_version="0.1.0", tolerances=None):
    """Write the profile CSV and its JSON sidecar (the downstream contract)."""
    import hashlib

    cols = np.column_stack([eq.grid_r, eq.m, eq.rho, eq.P, eq.u, eq.F, eq.H])
    with open(csv_path, "w") as fh:
        fh.write("r,m,rho,P,u,F,H\n")
        for row in cols:
            fh.write(",".join("%.16e" % v for v in row) + "\n")
    with open(csv_path, "rb") as fh:
        digest = hashlib.sha256(fh.read()).hexdigest()
    meta = {
        "r_plus": eq.r_plus,
        "m_plus": eq.m_plus,
        "kappa": eq.kappa,
        "K": eq.K,
        "rho_c": eq.rho_c,
        "gamma": eq.eos.gamma,
        "A": eq.eos.A,
        "cap_b": eq.eos.cap_b,
        "G": eq.eos.G,
        "c": eq.eos.c,
        "tolerances": tolerances or {},
        "code_version": code_version,
        "csv_sha256": digest,
    }
    with open(json_path, "w") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return meta
