"""Linearized radial-oscillation operator on a fixed equilibrium.

The operator is assembled in three charts: the fluid radius r (self-adjoint
Sturm-Liouville form with data a, b, Q), the acoustic coordinate
xi = int sqrt(b/a) dr (normal form -d^2/dxi^2 + q), and the compactified
x = sin^2(pi xi / 2 xi_plus) in [0, 1], where the operator becomes the
hypergeometric-type model part plus analytic corrections L1, L0.  The
spectrum is solved by a Galerkin method in the Jacobi basis orthonormal
under x^(3/2) (1-x)^(N/2-1), in which the model part is exactly diagonal
with eigenvalues n (n + (N+3)/2); a shooting method on the normal form
provides an independent cross-check of every eigenvalue.
"""

import json
import math
from dataclasses import dataclass, field
from types import SimpleNamespace

import numpy as np
from scipy.optimize import brentq

from .errors import ConvergenceError, DomainError, NumericalError
from .spectral import gauss_jacobi01, gauss_panels, orthonormal_jacobi

_GL12, _GW12 = np.polynomial.legendre.leggauss(12)


# ---------------------------------------------------------------------------
# Sturm-Liouville coefficients in the r chart


@dataclass
class SLCoefficients:
    eq: object
    r: np.ndarray
    a: np.ndarray
    b: np.ndarray
    Q: np.ndarray
    E2: np.ndarray
    E1_over_E2: np.ndarray
    E0: np.ndarray
    checks: SimpleNamespace = field(repr=False, default=None)


def build_coefficients(eq, a_form_tol=1e-6):
    """Evaluate the operator data on the interior of the storage grid.

    Cross-checks the closed form of the leading coefficient a against
    exp(int E1/E2 dr), and the background identity
    4 pi G e^{2H} (rho + P/c^2) r = F' + H' used in its derivation.
    """
    r = eq.grid_r[1:-1]
    f = eq.fields(r=r, order=2)
    model = eq.eos

    identity_lhs = f.F1 + f.H1
    identity_rhs = 4.0 * math.pi * model.G * model.inv_c2 * f.e2H * (f.rho + f.P * model.inv_c2) * r
    identity_resid = float(np.max(np.abs(identity_lhs - identity_rhs))
                           / np.max(np.abs(identity_rhs)))

    # a(r_j)/a(r_i) against exp of the panel quadrature of E1/E2
    sel = slice(len(r) // 8, -len(r) // 8, 16)
    r_sel = r[sel]
    nodes, weights, shape = gauss_panels(r_sel, nodes_per_panel=12)
    fe = eq.fields(r=nodes, order=2)
    seg = (fe.E1_over_E2 * weights).reshape(shape).sum(axis=1)
    ratio_quad = np.exp(np.cumsum(seg))
    a_sel = f.a_coef[sel]
    ratio_closed = a_sel[1:] / a_sel[0]
    a_resid = float(np.max(np.abs(ratio_quad - ratio_closed) / ratio_closed))
    if a_resid > a_form_tol:
        raise NumericalError(
            "closed-form a disagrees with exp(int E1/E2) at %.2e; "
            "refine the equilibrium tolerance" % a_resid
        )

    checks = SimpleNamespace(identity_residual=identity_resid, a_form_residual=a_resid)
    return SLCoefficients(eq=eq, r=r, a=f.a_coef, b=f.b_coef, Q=f.Q,
                          E2=f.E2, E1_over_E2=f.E1_over_E2, E0=f.E0, checks=checks)


# ---------------------------------------------------------------------------
# acoustic chart


@dataclass
class LiouvilleChart:
    """Cumulative acoustic coordinate with an s = sqrt(u) surface leg.

    Piece A covers r in [0, r_switch] with panel quadrature of sqrt(b/a);
    piece B covers the surface layer parametrized by s = sqrt(u), where the
    integrand 2 s sqrt(b/a) |dr/du| is analytic through s = 0.
    """

    eq: object
    xi_plus: float
    rA: np.ndarray
    xiA: np.ndarray
    sB: np.ndarray
    XiB: np.ndarray
    q_xi0_limit: float
    q_xi1_limit: float

    # -- forward maps -----------------------------------------------------

    def _sqrt_b_over_a_r(self, r):
        return self.eq.fields(r=r, order=0).sqrt_b_over_a

    def _g_of_s(self, s):
        f = self.eq.fields(u=s**2, order=1)
        return 2.0 * s * f.sqrt_b_over_a / np.abs(f.u1)

    def xi_of_r(self, r):
        r = np.atleast_1d(np.asarray(r, dtype=float))
        out = np.empty_like(r)
        inA = r <= self.rA[-1]
        if np.any(inA):
            ra = r[inA]
            idx = np.clip(np.searchsorted(self.rA, ra) - 1, 0, len(self.rA) - 2)
            lo = self.rA[idx]
            half = 0.5 * (ra - lo)
            nodes = lo[:, None] + half[:, None] * (_GL12 + 1.0)
            vals = self._sqrt_b_over_a_r(nodes.ravel()).reshape(nodes.shape)
            out[inA] = self.xiA[idx] + (vals * _GW12).sum(axis=1) * half
        if np.any(~inA):
            _, u = self.eq.raw(r[~inA])
            out[~inA] = self.xi_of_u(u)
        return out

    def Xi_of_s(self, s):
        s = np.atleast_1d(np.asarray(s, dtype=float))
        out = np.zeros_like(s)
        pos = s > 0
        if np.any(pos):
            sp = s[pos]
            idx = np.clip(np.searchsorted(self.sB, sp) - 1, 0, len(self.sB) - 2)
            lo = self.sB[idx]
            half = 0.5 * (sp - lo)
            nodes = lo[:, None] + half[:, None] * (_GL12 + 1.0)
            vals = self._g_of_s(nodes.ravel()).reshape(nodes.shape)
            out[pos] = self.XiB[idx] + (vals * _GW12).sum(axis=1) * half
        return out

    def xi_of_u(self, u):
        return self.xi_plus - self.Xi_of_s(np.sqrt(np.maximum(u, 0.0)))

    def x_of_r(self, r):
        return np.sin(0.5 * math.pi * self.xi_of_r(r) / self.xi_plus) ** 2

    def eta_weight(self, r):
        f = self.eq.fields(r=r, order=0)
        return (f.a_coef * f.b_coef) ** 0.25

    # -- inversion --------------------------------------------------------

    def locate_xi(self, xi):
        """Invert xi -> (r, u) by Newton in the appropriate piece."""
        xi = np.atleast_1d(np.asarray(xi, dtype=float))
        if np.any(xi < 0) or np.any(xi > self.xi_plus * (1 + 1e-12)):
            raise DomainError("xi outside [0, xi_plus]")
        r_out = np.empty_like(xi)
        u_out = np.empty_like(xi)
        at0 = xi == 0.0
        at1 = xi >= self.xi_plus
        r_out[at0] = 0.0
        u_out[at0] = self.eq.u_c
        r_out[at1] = self.eq.r_plus
        u_out[at1] = 0.0
        inA = (~at0) & (~at1) & (xi <= self.xiA[-1])
        inB = (~at0) & (~at1) & (~inA)
        if np.any(inA):
            tgt = xi[inA]
            rr = np.interp(tgt, self.xiA, self.rA)
            for _ in range(60):
                resid = self.xi_of_r(rr) - tgt
                slope = np.maximum(self._sqrt_b_over_a_r(np.maximum(rr, 1e-300)), 1e-300)
                rr_new = np.clip(rr - resid / slope, 0.0, self.rA[-1])
                if np.max(np.abs(rr_new - rr)) <= 1e-15 * self.eq.r_plus:
                    rr = rr_new
                    break
                rr = rr_new
            r_out[inA] = rr
            _, u = self.eq.raw(rr)
            u_out[inA] = u
        if np.any(inB):
            tgt = self.xi_plus - xi[inB]
            ss = np.interp(tgt, self.XiB, self.sB)
            ss = np.maximum(ss, 1e-14 * self.sB[-1])
            for _ in range(60):
                resid = self.Xi_of_s(ss) - tgt
                slope = np.maximum(self._g_of_s(ss), 1e-300)
                ss_new = np.clip(ss - resid / slope, 1e-200, self.sB[-1])
                if np.max(np.abs(ss_new - ss)) <= 1e-16 * self.sB[-1]:
                    ss = ss_new
                    break
                ss = ss_new
            u_out[inB] = ss**2
            r_out[inB], _ = self.eq.raw_from_u(ss**2)
        return r_out, u_out

    def q_at(self, r=None, u=None):
        return self.eq.fields(r=r, u=u, order=2).q_potential


def liouville_transform(coeffs, n_panels_surface=256):
    """Build the acoustic chart and verify the endpoint behavior of q."""
    eq = coeffs.eq

    rA = eq.grid_r[eq.grid_r <= eq.r_switch]
    if rA[-1] < eq.r_switch:
        rA = np.append(rA, eq.r_switch)
    nodes, weights, shape = gauss_panels(rA, nodes_per_panel=12)
    f = eq.fields(r=nodes, order=0)
    segA = (f.sqrt_b_over_a * weights).reshape(shape).sum(axis=1)
    xiA = np.concatenate([[0.0], np.cumsum(segA)])

    s_sw = math.sqrt(eq.u_switch)
    sB = np.linspace(0.0, s_sw, n_panels_surface + 1)
    nodes, weights, shape = gauss_panels(sB, nodes_per_panel=12)
    fu = eq.fields(u=nodes**2, order=1)
    gvals = 2.0 * nodes * fu.sqrt_b_over_a / np.abs(fu.u1)
    segB = (gvals * weights).reshape(shape).sum(axis=1)
    XiB = np.concatenate([[0.0], np.cumsum(segB)])

    xi_plus = float(xiA[-1] + XiB[-1])
    chart = LiouvilleChart(eq=eq, xi_plus=xi_plus, rA=rA, xiA=xiA, sB=sB, XiB=XiB,
                           q_xi0_limit=math.nan, q_xi1_limit=math.nan)

    # endpoint behavior of the normal-form potential (extrapolated limits)
    xi_small = xi_plus * np.array([4e-4, 2e-4, 1e-4])
    r_small, _ = chart.locate_xi(xi_small)
    qx2 = chart.q_at(r=r_small) * xi_small**2
    chart.q_xi0_limit = float(qx2[-1] + (qx2[-1] - qx2[-2]))
    tau_small = xi_plus * np.array([4e-4, 2e-4, 1e-4])
    _, u_small = chart.locate_xi(xi_plus - tau_small)
    qt2 = chart.q_at(u=u_small) * tau_small**2
    chart.q_xi1_limit = float(qt2[-1] + (qt2[-1] - qt2[-2]))
    return chart


# ---------------------------------------------------------------------------
# compactified chart


@dataclass
class XChart:
    eq: object
    chart: LiouvilleChart
    xi_plus: float
    N: int
    C0: float
    C1: float

    def x_of_r(self, r):
        return self.chart.x_of_r(r)

    def points(self, x, order=2):
        """Equilibrium fields plus chart factors at x values in [0, 1].

        Endpoint entries receive their exact limit values for the factors
        that degenerate there (dx/dr, B, L1).
        """
        x = np.atleast_1d(np.asarray(x, dtype=float))
        if np.any(x < 0) or np.any(x > 1):
            raise DomainError("x outside [0, 1]")
        xi = 2.0 * self.xi_plus / math.pi * np.arcsin(np.sqrt(np.clip(x, 0.0, 1.0)))
        r, u = self.chart.locate_xi(xi)
        ends0 = x == 0.0
        ends1 = x == 1.0
        r[ends0] = 0.0
        u[ends0] = self.eq.u_c
        r[ends1] = self.eq.r_plus
        u[ends1] = 0.0
        interior = ~(ends0 | ends1)

        m = np.empty_like(r)
        if np.any(interior):
            m[interior] = self.eq.raw(r[interior])[0]
        m[ends0] = 0.0
        m[ends1] = self.eq.m_plus
        from .tov import derived_fields

        f = derived_fields(self.eq.eos, self.eq.kappa, r, m, u, order=order)
        f.x = x
        pi_over_xip = math.pi / self.xi_plus

        with np.errstate(invalid="ignore", divide="ignore"):
            dxdr = pi_over_xip * np.sqrt(x * (1.0 - x)) * f.sqrt_b_over_a
        dxdr[ends0] = 0.0
        dxdr[ends1] = pi_over_xip**2 * self.C1
        f.dxdr = dxdr
        T = np.empty_like(x)  # (1/r) dx/dr, finite on [0, 1]
        T[interior] = dxdr[interior] / r[interior]
        T[ends0] = 2.0 * pi_over_xip**2 / self.C0**2
        T[ends1] = pi_over_xip**2 * self.C1 / self.eq.r_plus
        f.T = T
        f.rdxdr = np.where(x > 0, dxdr * r, 0.0)

        if order >= 2:
            g = self.eq.eos.gamma
            B = np.empty_like(x)
            with np.errstate(invalid="ignore", divide="ignore"):
                B[interior] = (
                    0.5 * (1.0 - 2.0 * x[interior])
                    + 0.5 / pi_over_xip * np.sqrt(x[interior] * (1.0 - x[interior]))
                    / f.sqrt_b_over_a[interior] * f.sigma[interior]
                )
            B[ends0] = 2.5
            B[ends1] = -g / (g - 1.0)
            f.B = B
            f.L1 = 2.5 * (1.0 - x) - 0.5 * self.N * x - B
            f.L0 = f.Q / pi_over_xip**2
        return f


def build_x_chart(coeffs, chart):
    """Extract the endpoint scale constants and wrap the compactified chart."""
    eq = coeffs.eq
    model = eq.eos
    g = model.gamma
    n_float = 2.0 * g / (g - 1.0)
    if abs(n_float - round(n_float)) > 1e-9:
        raise DomainError("2 gamma/(gamma-1) = %.6f is not an integer; "
                          "the compactified chart requires it" % n_float)
    N = int(round(n_float))

    f0 = eq.fields(r=np.array([0.0]), order=0)
    C0 = float(2.0 * np.sqrt(f0.cs2[0]) * f0.eF[0])  # e^{-H} = 1 at the center
    C1 = 1.0 / ((g - 1.0) * eq.kappa**2 * eq.K)
    if not (math.isfinite(C0) and math.isfinite(C1) and C0 > 0 and C1 > 0):
        raise NumericalError("endpoint constant extraction failed: C0=%r C1=%r" % (C0, C1))
    return XChart(eq=eq, chart=chart, xi_plus=chart.xi_plus, N=N, C0=C0, C1=C1)


# ---------------------------------------------------------------------------
# Galerkin eigensolver


@dataclass
class Spectrum:
    lambdas: np.ndarray
    coeffs: np.ndarray  # (basis_size, n_modes), unit coefficient norm
    alpha: float
    beta: float
    N: int
    xi_plus: float
    basis_size: int
    doubling_rel: np.ndarray
    c0: np.ndarray = None
    c1: np.ndarray = None

    def psi(self, x, n=None):
        """Eigenfunction values on x; column n or all columns."""
        vals, _ = orthonormal_jacobi(np.atleast_1d(np.asarray(x, float)),
                                     self.basis_size, self.alpha, self.beta)
        out = vals @ (self.coeffs if n is None else self.coeffs[:, n])
        return out

    def dpsi(self, x, n=None):
        _, dvals = orthonormal_jacobi(np.atleast_1d(np.asarray(x, float)),
                                      self.basis_size, self.alpha, self.beta, deriv=True)
        return dvals @ (self.coeffs if n is None else self.coeffs[:, n])


def _assemble(xchart, basis_size, nq, model_operator):
    alpha = 0.5 * xchart.N - 1.0
    beta = 1.5
    xm, wm = gauss_jacobi01(nq, alpha, beta)
    xs, ws = gauss_jacobi01(nq, alpha + 1.0, beta + 1.0)
    Vm, _ = orthonormal_jacobi(xm, basis_size, alpha, beta)
    _, dVs = orthonormal_jacobi(xs, basis_size, alpha, beta, deriv=True)
    if model_operator:
        W = np.ones_like(xm)
        Atil = np.ones_like(xs)
        Qm = np.zeros_like(xm)
    else:
        fm = xchart.points(xm, order=2)
        fs = xchart.points(xs, order=0)
        # physical weight b dr = W * x^{3/2}(1-x)^{N/2-1} dx
        W = fm.b_coef / fm.dxdr / (xm**beta * (1.0 - xm) ** alpha)
        Atil = fs.a_coef * fs.dxdr / (xs ** (beta + 1.0) * (1.0 - xs) ** (alpha + 1.0))
        Qm = fm.Q
    M = Vm.T @ (Vm * (wm * W)[:, None])
    A = dVs.T @ (dVs * (ws * Atil)[:, None]) + Vm.T @ (Vm * (wm * W * Qm)[:, None])
    A = 0.5 * (A + A.T)
    M = 0.5 * (M + M.T)
    return A, M, alpha, beta


def _solve(xchart, basis_size, nq, model_operator):
    from scipy.linalg import eigh

    A, M, alpha, beta = _assemble(xchart, basis_size, nq, model_operator)
    lam, V = eigh(A, M)
    return lam, V, alpha, beta


def solve_spectrum(xchart, n_modes=4, basis_size=96, model_operator=False,
                   doubling_tol=1e-6):
    """Lowest eigenpairs of the pulsation operator by weighted Galerkin.

    Eigenvalues are physical (time^-2).  model_operator=True drops the
    analytic corrections and the physical weight, exposing the exactly
    diagonal model problem with eigenvalues n (n + (N+3)/2).  The requested
    modes must agree between basis_size and 2*basis_size to doubling_tol.
    """
    if n_modes > basis_size // 2:
        raise DomainError("n_modes too large for basis_size")
    nq = 2 * basis_size + 24
    lam, V, alpha, beta = _solve(xchart, basis_size, nq, model_operator)
    lam2, _, _, _ = _solve(xchart, 2 * basis_size, 4 * basis_size + 24, model_operator)
    scale = np.maximum(np.abs(lam2[:n_modes]), np.abs(lam2[max(0, n_modes - 1)]))
    doubling = np.abs(lam[:n_modes] - lam2[:n_modes]) / scale
    if np.max(doubling) > doubling_tol:
        raise ConvergenceError(
            "eigenvalues not converged under basis doubling: max rel change %.2e "
            "(basis %d -> %d); increase basis_size" % (np.max(doubling), basis_size, 2 * basis_size)
        )

    coeffs = V[:, :n_modes]
    coeffs = coeffs / np.linalg.norm(coeffs, axis=0)  # unit norm in the model weight
    spec = Spectrum(lambdas=lam[:n_modes].copy(), coeffs=coeffs, alpha=alpha,
                    beta=beta, N=xchart.N, xi_plus=xchart.xi_plus,
                    basis_size=basis_size, doubling_rel=doubling)
    # sign convention: positive surface amplitude
    psi1 = spec.psi(np.array([1.0]))
    flip = np.sign(psi1[0])
    flip[flip == 0] = 1.0
    spec.coeffs *= flip
    spec.c1 = spec.psi(np.array([1.0]))[0]
    spec.c0 = spec.psi(np.array([0.0]))[0]
    return spec


def eigenfunction_endpoints(spec, fit_width=0.02, fit_points=24):
    """Endpoint values of every mode plus first-order Taylor fits.

    Raises if any endpoint value vanishes (the recessive branch at both
    degenerate ends is bounded away from zero for true eigenfunctions).
    """
    n_modes = spec.coeffs.shape[1]
    x0 = np.linspace(0.0, fit_width, fit_points)
    x1 = 1.0 - x0
    v0 = spec.psi(x0)
    v1 = spec.psi(x1)
    c0 = v0[0].copy()
    c1 = v1[0].copy()
    if np.any(np.abs(c0) < 1e-10) or np.any(np.abs(c1) < 1e-10):
        raise NumericalError("eigenfunction endpoint value vanished: c0=%r c1=%r" % (c0, c1))
    slopes0 = np.empty(n_modes)
    resid0 = np.empty(n_modes)
    slopes1 = np.empty(n_modes)
    resid1 = np.empty(n_modes)
    for n in range(n_modes):
        p0 = np.polyfit(x0, v0[:, n] / c0[n], 1)
        slopes0[n] = p0[0]
        resid0[n] = np.max(np.abs(np.polyval(p0, x0) - v0[:, n] / c0[n]))
        p1 = np.polyfit(x0, v1[:, n] / c1[n], 1)
        slopes1[n] = p1[0]
        resid1[n] = np.max(np.abs(np.polyval(p1, x0) - v1[:, n] / c1[n]))
    return SimpleNamespace(c0=c0, c1=c1, taylor_slope0=slopes0, taylor_slope1=slopes1,
                           fit_residual0=resid0, fit_residual1=resid1)


# ---------------------------------------------------------------------------
# shooting cross-check on the normal form


@dataclass
class _Leg:
    h: float
    coef: np.ndarray   # d xi/d t at t_i and midpoints (signed)
    q: np.ndarray      # potential at the same sample points
    eta0: float
    p0: float


class ShootingProblem:
    """Fixed-path shooting for -eta'' + q eta = lambda eta.

    The recessive solution is launched from each endpoint (eta ~ xi^2 at the
    center, eta ~ (xi_plus - xi)^{5/2} at the surface) along precomputed
    coefficient arrays; the Wronskian mismatch at an interior matching point
    vanishes exactly at eigenvalues.
    """

    def __init__(self, chart, start_frac=1e-3, n_steps=3000):
        eq = chart.eq
        self.chart = chart
        xi0 = start_frac * chart.xi_plus
        r0, _ = chart.locate_xi(np.array([xi0]))
        self.r0 = float(r0[0])
        self.xi0 = float(chart.xi_of_r(self.r0)[0])
        xi_mid = 0.5 * chart.xi_plus
        r_mid, _ = chart.locate_xi(np.array([xi_mid]))
        self.r_mid = float(r_mid[0])
        tau0 = start_frac * chart.xi_plus
        s0 = float(np.interp(tau0, chart.XiB, chart.sB))
        # polish s0 so tau0 is exact
        for _ in range(40):
            resid = float(chart.Xi_of_s(np.array([s0]))[0]) - tau0
            s0 -= resid / float(chart._g_of_s(np.array([s0]))[0])
        self.s0 = s0
        self.tau0 = tau0

        def leg_r(r_from, r_to, eta0, p0):
            n = n_steps
            t = np.linspace(r_from, r_to, 2 * n + 1)
            f = eq.fields(r=t, order=2)
            return _Leg(h=(r_to - r_from) / n, coef=f.sqrt_b_over_a,
                        q=f.q_potential, eta0=eta0, p0=p0)

        # left: recessive eta = xi^2 launched toward the matching radius
        self.legL = leg_r(self.r0, self.r_mid, self.xi0**2, 2.0 * self.xi0)
        # right: surface leg in s, then inward in r
        n = n_steps
        t_s = np.linspace(self.s0, math.sqrt(eq.u_switch), 2 * n + 1)
        fs = eq.fields(u=t_s**2, order=2)
        g_s = 2.0 * t_s * fs.sqrt_b_over_a / np.abs(fs.u1)
        self.legR1 = _Leg(h=(t_s[-1] - t_s[0]) / n, coef=-g_s, q=fs.q_potential,
                          eta0=self.tau0**2.5, p0=-2.5 * self.tau0**1.5)
        self.legR2_template = leg_r(eq.r_switch, self.r_mid, 0.0, 0.0)

    @staticmethod
    def _integrate(leg, lam, eta0=None, p0=None):
        eta = leg.eta0 if eta0 is None else eta0
        p = leg.p0 if p0 is None else p0
        h = leg.h
        coef = leg.coef
        qm = leg.q - lam
        n = (len(coef) - 1) // 2
        for i in range(n):
            c0, cm, c1 = coef[2 * i], coef[2 * i + 1], coef[2 * i + 2]
            q0, qm_, q1 = qm[2 * i], qm[2 * i + 1], qm[2 * i + 2]
            k1e = c0 * p
            k1p = c0 * q0 * eta
            k2e = cm * (p + 0.5 * h * k1p)
            k2p = cm * qm_ * (eta + 0.5 * h * k1e)
            k3e = cm * (p + 0.5 * h * k2p)
            k3p = cm * qm_ * (eta + 0.5 * h * k2e)
            k4e = c1 * (p + h * k3p)
            k4p = c1 * q1 * (eta + h * k3e)
            eta += h / 6.0 * (k1e + 2.0 * k2e + 2.0 * k3e + k4e)
            p += h / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p)
            # renormalize to avoid growth across stiff stretches
            scale = max(abs(eta), abs(p))
            if scale > 1e100:
                eta /= scale
                p /= scale
        return eta, p

    def mismatch(self, lam):
        """Normalized Wronskian of the two recessive solutions at the middle."""
        etaL, pL = self._integrate(self.legL, lam)
        eta1, p1 = self._integrate(self.legR1, lam)
        etaR, pR = self._integrate(self.legR2_template, lam, eta0=eta1, p0=p1)
        W = etaL * pR - pL * etaR
        return W / ((abs(etaL) + abs(pL)) * (abs(etaR) + abs(pR)))

    def refine(self, lam_guess, bracket_rel=2e-3):
        lo = lam_guess * (1.0 - bracket_rel)
        hi = lam_guess * (1.0 + bracket_rel)
        flo, fhi = self.mismatch(lo), self.mismatch(hi)
        grow = 0
        while flo * fhi > 0 and grow < 12:
            lo -= lam_guess * bracket_rel * 2**grow
            hi += lam_guess * bracket_rel * 2**grow
            flo, fhi = self.mismatch(lo), self.mismatch(hi)
            grow += 1
        if flo * fhi > 0:
            raise ConvergenceError("no sign change of the shooting mismatch near %.6g" % lam_guess)
        return brentq(self.mismatch, lo, hi, rtol=1e-12)


def shooting_crosscheck(chart, lam, **kw):
    """Mismatch value of the normal-form shooting at trial eigenvalue lam."""
    return ShootingProblem(chart, **kw).mismatch(lam)


def frobenius_indices(chart):
    """Recessive indices at the two singular ends from the q limits."""
    c0 = chart.q_xi0_limit
    c1 = chart.q_xi1_limit
    nu0 = 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * c0))
    nu1 = 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * c1))
    return nu0, nu1


# ---------------------------------------------------------------------------
# time-periodic linear solutions


@dataclass
class PeriodicMode:
    n: int
    lam: float
    Theta0: float
    spec: Spectrum
    is_periodic: bool

    @property
    def omega(self):
        return math.sqrt(abs(self.lam))

    @property
    def period(self):
        if not self.is_periodic:
            raise DomainError("mode is not oscillatory")
        return 2.0 * math.pi / self.omega

    def psi(self, x):
        return self.spec.psi(x, self.n)

    def Y1(self, t, x):
        psi = self.psi(x)
        if self.is_periodic:
            return np.sin(self.omega * t + self.Theta0) * psi
        return np.sinh(self.omega * t + self.Theta0) * psi

    def dY1_dt(self, t, x):
        psi = self.psi(x)
        if self.is_periodic:
            return self.omega * np.cos(self.omega * t + self.Theta0) * psi
        return self.omega * np.cosh(self.omega * t + self.Theta0) * psi

    def V1(self, t, x, J0):
        """Velocity partner (1/J0) dY1/dt on given J0 = e^F (1 + P/c^2 rho)."""
        return self.dY1_dt(t, x) / J0


def periodic_mode(spec, n=0, Theta0=0.0):
    lam = float(spec.lambdas[n])
    return PeriodicMode(n=n, lam=lam, Theta0=Theta0, spec=spec, is_periodic=lam > 0)


# ---------------------------------------------------------------------------
# persistence


def save_spectrum(spec, json_path, csv_path, x_out, upstream_hashes=None,
                  tolerances=None):
    import hashlib

    psis = spec.psi(x_out)
    cols = np.column_stack([x_out] + [psis[:, n] for n in range(psis.shape[1])])
    with open(csv_path, "w") as fh:
        fh.write("x," + ",".join("psi%d" % n for n in range(psis.shape[1])) + "\n")
        for row in cols:
            fh.write(",".join("%.16e" % v for v in row) + "\n")
    with open(csv_path, "rb") as fh:
        digest = hashlib.sha256(fh.read()).hexdigest()
    meta = {
        "gamma": float(spec.N / (spec.N - 2.0)),
        "N": spec.N,
        "xi_plus": spec.xi_plus,
        "lambdas": [float(v) for v in spec.lambdas],
        "endpoint_constants": [[float(a), float(b)] for a, b in zip(spec.c0, spec.c1)],
        "basis_size": spec.basis_size,
        "doubling_rel": [float(v) for v in spec.doubling_rel],
        "tolerances": tolerances or {},
        "upstream": upstream_hashes or {},
        "csv_sha256": digest,
    }
    with open(json_path, "w") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return meta
