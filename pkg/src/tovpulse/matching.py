"""Patching the interior solution to the Schwarzschild exterior.

Static equilibria match to second order across the surface.  Moving
solutions admit an exterior chart (t_sharp, R_sharp) making the patched
metric C^1; the second radial derivative of R_sharp then differs from the
interior one by the jump A (dR/dr)^2 with A quadratic in the surface
velocity, so the patch is C^2 exactly when the motion is static.

A subtlety of the dynamic case: the evolution fields live on the
equilibrium mass label r*, while the interior metric is diagonal in the
true co-moving radial coordinate r.  The two labels drift apart at
O(eps/c^2) through the pressure-work flux, so the surface derivatives
entering the matching must be transported with the relabeling factors
p1 = d(phi)/dr and p2 = d2(phi)/dr2 integrated along the run (phi is the
co-moving relabeling map, the identity at t = 0 and at both endpoints).
"""

import json
import math
from dataclasses import dataclass
from types import SimpleNamespace

import numpy as np
from numpy.polynomial import chebyshev as ncheb
from scipy.integrate import cumulative_trapezoid

from . import eos as eosmod
from .errors import DomainError, MatchingError, NumericalError


# ---------------------------------------------------------------------------
# static checks


def static_c2_check(eq, h_frac=2e-3, tol=1e-4):
    """One-sided derivative agreement of g00, g11 across the surface.

    Interior derivatives come from finite differences of the profile; the
    exterior ones are the exact Schwarzschild values.
    """
    model = eq.eos
    G, ic2 = model.G, model.inv_c2
    rp, mp = eq.r_plus, eq.m_plus
    h = h_frac * rp
    nodes_in = rp - h * np.arange(5)
    nodes_out = rp + h * np.arange(5)

    def onesided(vals, sign):
        d1 = sign * (25 * vals[0] - 48 * vals[1] + 36 * vals[2]
                     - 16 * vals[3] + 3 * vals[4]) / (12 * h)
        d2 = (35 * vals[0] - 104 * vals[1] + 114 * vals[2]
              - 56 * vals[3] + 11 * vals[4]) / (12 * h**2)
        return d1, d2

    rows = {}
    for name, fn in (("g00", eq.g00), ("g11", eq.g11)):
        vin = fn(nodes_in)
        vout = fn(nodes_out)
        jump = abs(vin[0] - vout[0])
        d1_in, d2_in = onesided(vin, +1.0)
        d1_out, d2_out = onesided(vout, -1.0)
        scale1 = max(abs(d1_out), abs(d1_in), 1e-30)
        scale2 = max(abs(d2_out), abs(d2_in), 1e-30)
        rows[name] = {
            "jump": float(jump),
            "d1_interior": float(d1_in), "d1_exterior": float(d1_out),
            "d1_rel": float(abs(d1_in - d1_out) / scale1),
            "d2_interior": float(d2_in), "d2_exterior": float(d2_out),
            "d2_rel": float(abs(d2_in - d2_out) / scale2),
        }

    d1_expect = 2.0 * G * mp * ic2 / rp**2
    d2_expect = -4.0 * G * mp * ic2 / rp**3
    rows["g00"]["d1_expected"] = float(d1_expect)
    rows["g00"]["d2_expected"] = float(d2_expect)
    rows["g00"]["d1_expected_rel"] = float(abs(rows["g00"]["d1_interior"] - d1_expect)
                                           / abs(d1_expect))
    rows["g00"]["d2_expected_rel"] = float(abs(rows["g00"]["d2_interior"] - d2_expect)
                                           / abs(d2_expect))

    worst = max(rows["g00"]["d1_rel"], rows["g00"]["d2_rel"],
                rows["g11"]["d1_rel"], rows["g11"]["d2_rel"],
                rows["g00"]["jump"], rows["g11"]["jump"])
    if worst > tol:
        raise MatchingError("static C2 residuals exceed %.1e: %r" % (tol, rows))
    return SimpleNamespace(components=rows, worst=float(worst))


# ---------------------------------------------------------------------------
# snapshot field helpers (spectral evaluation of the polynomial states)


def _dt_series(arr, dt):
    """Sixth-order centered time derivative; edges by lower-order stencils."""
    out = np.empty_like(arr)
    c = np.array([-1.0, 9.0, -45.0, 0.0, 45.0, -9.0, 1.0]) / (60.0 * dt)
    n = len(arr)
    if n >= 7:
        for k in range(3, n - 3):
            out[k] = c @ arr[k - 3:k + 4]
    lo = min(3, n - 1)
    grad = np.gradient(arr, dt)
    out[:lo] = grad[:lo]
    out[n - lo:] = grad[n - lo:]
    return out


def _cheb_interp(ops, arr):
    """Evaluator of the grid polynomial at arbitrary x in [0, 1]."""
    a = ops.filt_fwd @ arr

    def ev(xq):
        return ncheb.chebval(1.0 - 2.0 * np.asarray(xq, dtype=float), a)

    return ev


def _gtilde_field(ops, y, v):
    """Co-moving drift coefficient: d(phi)/dt = gtilde(t, r*) phi."""
    model = ops.eq.eos
    ic2 = model.inv_c2
    z = ops.rdxdr * (ops.D @ y)
    opy = 1.0 + y
    opyz = 1.0 + y + z
    rho = ops.rho_bar / (opy**2 * opyz)
    pr = eosmod.p_over_rho(model, rho)
    u = eosmod.enthalpy_u(model, rho)
    eF = math.sqrt(ops.eq.kappa) * np.exp(-u * ic2)
    return -ic2 * eF * pr * v / opyz


def surface_series(ops, traj, static_tol=1e-12):
    """Surface data for the matching, in the co-moving radial chart.

    The label-chart values (from spectral differentiation of the snapshots)
    are transported with the relabeling factors p1, p2 obtained from the
    drift coefficient and its spatial derivatives at the surface.
    """
    if traj.snap_t.size < 9 or traj.config.snapshot_every != 1:
        raise DomainError("dynamic matching needs snapshot_every=1 trajectories")
    eq = ops.eq
    rp = eq.r_plus
    t = traj.snap_t
    dt = float(t[1] - t[0])
    y = traj.snap_y
    v = traj.snap_v
    static = bool(max(np.max(np.abs(y)), np.max(np.abs(v))) < static_tol)

    z = ops.rdxdr * (y @ ops.D.T)
    w = ops.rdxdr * (v @ ops.D.T)
    dz = ops.dxdr * (z @ ops.D.T)
    dy = ops.dxdr * (y @ ops.D.T)

    R = rp * (1.0 + y[:, -1])
    V = rp * v[:, -1]
    f1_label = 1.0 + y[:, -1] + z[:, -1]
    d2R_label = dy[:, -1] + dz[:, -1]
    dVdr_label = v[:, -1] + w[:, -1]

    if static:
        p1 = np.ones_like(t)
        p2 = np.zeros_like(t)
    else:
        n_t = t.size
        dG = np.empty(n_t)
        d2G = np.empty(n_t)
        for k in range(n_t):
            g = _gtilde_field(ops, y[k], v[k])
            g1 = ops.dxdr * (ops.D @ g)
            g2 = ops.dxdr * (ops.D @ g1)
            dG[k] = g1[-1]
            d2G[k] = g2[-1]
        # p1' = (rp dG) p1 ; p2' = (rp dG) p2 + (rp d2G + 2 dG) p1^2
        q1 = rp * dG
        p1 = np.exp(np.concatenate([[0.0], cumulative_trapezoid(q1, t)]))
        src = (rp * d2G + 2.0 * dG) * p1**2
        p2 = p1 * np.concatenate([[0.0], cumulative_trapezoid(src / p1, t)])

    f1 = f1_label * p1
    d2Rdr2 = d2R_label * p1**2 + f1_label * p2
    dVdr = dVdr_label * p1

    return SimpleNamespace(
        t=t, dt=dt, R=R, V=V, f1=f1, d2Rdr2=d2Rdr2, dVdr=dVdr,
        p1=p1, p2=p2,
        f1_label=f1_label, d2R_label=d2R_label,
        dR_dt=_dt_series(R, dt), dV_dt=_dt_series(V, dt),
        f1_dt=_dt_series(f1, dt),
        static=static,
    )


# ---------------------------------------------------------------------------
# the jump obstruction


def jump_A(series, model, m_plus, kappa):
    """A(t) = -(V^2/c^2)(G m_+/c^2 R^2 + (1/sqrt(kappa) c^2) dV/dt) W^-2."""
    ic2 = model.inv_c2
    W = 1.0 + series.V**2 * ic2 - 2.0 * model.G * m_plus * ic2 / series.R
    return (-series.V**2 * ic2
            * (model.G * m_plus * ic2 / series.R**2
               + series.dV_dt * ic2 / math.sqrt(kappa))
            / W**2)


# ---------------------------------------------------------------------------
# dynamic C1 construction


def smooth_cutoff(s):
    """C-infinity bump: 1 on s <= 1, 0 on s >= 2, exp(-1/x) bridge between."""
    s = np.asarray(s, dtype=float)
    out = np.empty_like(s)
    out[s <= 1.0] = 1.0
    out[s >= 2.0] = 0.0
    mid = (s > 1.0) & (s < 2.0)
    if np.any(mid):
        a = np.exp(-1.0 / (2.0 - s[mid]))
        b = np.exp(-1.0 / (s[mid] - 1.0))
        out[mid] = a / (a + b)
    return out


@dataclass
class ExteriorChart:
    t: np.ndarray
    f0: np.ndarray
    f1: np.ndarray
    f2: np.ndarray
    H_t: np.ndarray
    h0: np.ndarray
    h1: np.ndarray
    h2: np.ndarray
    det: np.ndarray
    A: np.ndarray
    delta_cut: float
    valid: slice
    dt: float
    static: bool

    def chi(self, r, r_plus):
        return smooth_cutoff((r - r_plus) / self.delta_cut)

    def _dchi(self, r, r_plus, h=1e-7):
        return (smooth_cutoff((r - r_plus + h) / self.delta_cut)
                - smooth_cutoff((r - r_plus - h) / self.delta_cut)) / (2 * h)


def dynamic_c1_match(ops, traj, delta_cut_frac=0.1, det_floor=0.5):
    """Solve the surface conditions for the exterior chart functions.

    Returns the chart (f's, h's, determinant, jump A) with its valid time
    slice (time stencils trim the ends), after verifying the 2x2 system for
    the second derivatives is far from singular.  A static trajectory takes
    the exact static values, so the construction reduces identically to the
    equilibrium patch.
    """
    eq = ops.eq
    model = eq.eos
    ic2 = model.inv_c2
    G, c = model.G, model.c
    rp, mp, kappa = eq.r_plus, eq.m_plus, eq.kappa
    sq = math.sqrt(kappa)

    ser = surface_series(ops, traj)
    t = ser.t
    if ser.static:
        n = t.size
        chart = ExteriorChart(
            t=t, f0=np.full(n, rp), f1=np.ones(n), f2=np.zeros(n),
            H_t=np.ones(n), h0=t.copy(), h1=np.zeros(n), h2=np.zeros(n),
            det=-np.ones(n), A=np.zeros(n),
            delta_cut=delta_cut_frac * rp, valid=slice(0, n), dt=ser.dt,
            static=True,
        )
        return chart, ser

    R, V, f1 = ser.R, ser.V, ser.f1
    Ksharp = 1.0 - 2.0 * G * mp * ic2 / R
    W = 1.0 + V**2 * ic2 - 2.0 * G * mp * ic2 / R
    H = sq * np.sqrt(W) / Ksharp
    h1 = ic2 * V * f1 / (Ksharp * np.sqrt(W))
    h0 = np.concatenate([[0.0], cumulative_trapezoid(H, t)])

    dKs = (2.0 * G * mp * ic2 / R**2) * f1     # dK_sharp/dr at the surface
    Rdot = sq * V                               # dR/dt at the surface
    h1dot = _dt_series(h1, ser.dt)
    f1dot = ser.f1_dt

    b1 = (-dKs * H * h1 - Ksharp * h1dot * h1
          - ic2 * dKs * Rdot * f1 / Ksharp**2
          + ic2 * f1dot * f1 / Ksharp)

    dW = 2.0 * V * ser.dVdr * ic2 + (2.0 * G * mp * ic2 / R**2) * f1
    dg11_int = dW / W**2 * f1**2 - 2.0 * f1 * ser.d2Rdr2 / W
    b2 = 0.5 * (dg11_int - dKs * c**2 * h1**2 - dKs * f1**2 / Ksharp**2)

    det = -H * f1 + Rdot * h1
    if np.any(np.abs(det) < det_floor):
        raise MatchingError("matching system close to singular: min |det| = %.3e"
                            % float(np.min(np.abs(det))))
    # [K H, -(1/c^2) K^-1 Rdot; c^2 K h1, -K^-1 f1] [h2, f2] = [b1, b2]
    a11 = Ksharp * H
    a12 = -ic2 * Rdot / Ksharp
    a21 = c**2 * Ksharp * h1
    a22 = -f1 / Ksharp
    disc = a11 * a22 - a12 * a21
    h2 = (b1 * a22 - a12 * b2) / disc
    f2 = (a11 * b2 - a21 * b1) / disc

    A = jump_A(ser, model, mp, kappa)
    n = t.size
    chart = ExteriorChart(t=t, f0=R, f1=f1, f2=f2, H_t=H, h0=h0, h1=h1, h2=h2,
                          det=det, A=A, delta_cut=delta_cut_frac * rp,
                          valid=slice(3, n - 3), dt=ser.dt, static=False)
    return chart, ser


def jump_consistency(chart, ser):
    """Compare the construction's second-derivative jump with the closed form.

    Returns the jump f2 - d2R/dr2 of the C1 construction, the closed-form
    candidate A (dR/dr)^2, and their ratio.  The two routes are reported side
    by side: the unique C1 extension built from the measured surface series
    makes the jump vanish to the accuracy of the data, while the closed form
    is quadratic in the surface velocity.
    """
    sl = chart.valid
    lhs = chart.f2[sl] - ser.d2Rdr2[sl]
    rhs = chart.A[sl] * ser.f1[sl] ** 2
    scale = np.max(np.abs(rhs)) if np.max(np.abs(rhs)) > 0 else 1.0
    return SimpleNamespace(
        jump_max=float(np.max(np.abs(lhs))),
        closed_form_max=float(np.max(np.abs(rhs))),
        residual_over_closed_form=float(np.max(np.abs(lhs - rhs)) / scale),
        jump_over_closed_form=float(np.max(np.abs(lhs)) / scale),
    )


# ---------------------------------------------------------------------------
# patched metric sampling and residuals


@dataclass
class PatchedMetric:
    t: np.ndarray
    r: np.ndarray
    g00: np.ndarray
    g01: np.ndarray
    g11: np.ndarray
    g22: np.ndarray


class _InteriorSampler:
    """Interior metric in the co-moving chart at radii near the surface.

    Snapshot polynomials are evaluated spectrally at the relabeled positions
    phi(t, r); the radial derivative of phi is recovered from the sampled
    phi columns by finite differences.
    """

    def __init__(self, ops, traj, r_eval, static):
        from .evolution import comoving_map

        self.ops = ops
        self.eq = ops.eq
        self.r_eval = np.asarray(r_eval, dtype=float)
        self.static = static
        if static:
            self.phi = None
        else:
            cm = comoving_map(self.eq, ops, traj, r_samples=self.r_eval)
            self.cm_t = cm.t
            self.phi = cm.phi  # (n_even_snapshots, len(r_eval))

    def _phi_at(self, k):
        if self.static:
            return self.r_eval, np.ones_like(self.r_eval)
        # snapshot index k corresponds to comoving row k//2 (even k only)
        row = self.phi[k // 2]
        # the drift phi - r is tiny and smooth: a polynomial fit gives its
        # radial derivative to high order even on non-uniform sample radii
        span = self.r_eval[-1] - self.r_eval[0]
        if span <= 0:
            return row, np.ones_like(row)
        s = (self.r_eval - self.r_eval[0]) / span
        deg = min(5, self.r_eval.size - 2)
        coef = np.polyfit(s, row - self.r_eval, deg)
        dphi = 1.0 + np.polyval(np.polyder(coef), s) / span
        return row, dphi

    def metric(self, k, yk, vk):
        ops = self.ops
        eq = self.eq
        model = eq.eos
        ic2 = model.inv_c2
        rstar, dphi = self._phi_at(k)
        x_eval = np.clip(ops.xchart.chart.x_of_r(rstar), 0.0, 1.0)
        f = ops.xchart.points(x_eval, order=0)
        y_ev = _cheb_interp(ops, yk)
        v_ev = _cheb_interp(ops, vk)
        z_ev = _cheb_interp(ops, ops.rdxdr * (ops.D @ yk))
        yv = y_ev(x_eval)
        zv = z_ev(x_eval)
        vv = v_ev(x_eval)
        opy = 1.0 + yv
        opyz = 1.0 + yv + zv
        rho = f.rho / (opy**2 * opyz)
        u = eosmod.enthalpy_u(model, rho)
        Rf = rstar * opy
        dRdr = (opy + zv) * dphi
        Vf = rstar * vv
        Wt = 1.0 + Vf**2 * ic2 - 2.0 * model.G * f.m * ic2 / Rf
        g00 = eq.kappa * np.exp(-2.0 * u * ic2)
        g11 = -dRdr**2 / Wt
        g22 = -(Rf**2)
        return g00, np.zeros_like(g00), g11, g22


def sample_patched_metric(ops, traj, chart, r_grid=None, t_indices=None,
                          split_index=None):
    """Patched metric on a (t, r) grid straddling the surface.

    split_index: first index treated as exterior; defaults to the first
    radius beyond r_plus (pass it explicitly to sample both one-sided limits
    at the surface itself).
    """
    eq = ops.eq
    model = eq.eos
    ic2 = model.inv_c2
    c = model.c
    rp, mp = eq.r_plus, eq.m_plus
    if r_grid is None:
        r_grid = np.concatenate([
            np.linspace(0.62 * rp, rp, 40),
            np.linspace(rp, rp * (1.0 + 3.0 * chart.delta_cut / rp), 41)[1:],
        ])
    if t_indices is None:
        start = chart.valid.start or 0
        stop = chart.t.size - (3 if not chart.static else 0)
        t_indices = list(range(start, stop, max(1, chart.t.size // 16)))
    t_indices = [k - (k % 2) for k in t_indices]  # relabeling rows live on even steps

    f0d = _dt_series(chart.f0, chart.dt)
    f1d = _dt_series(chart.f1, chart.dt)
    f2d = _dt_series(chart.f2, chart.dt)
    h1d = _dt_series(chart.h1, chart.dt)
    h2d = _dt_series(chart.h2, chart.dt)

    idx = np.arange(len(r_grid))
    if split_index is None:
        inner = r_grid <= rp
    else:
        inner = idx < split_index
    outer = ~inner
    sampler = _InteriorSampler(ops, traj, r_grid[inner], chart.static)

    rows00, rows01, rows11, rows22 = [], [], [], []
    for k in t_indices:
        g00 = np.empty_like(r_grid)
        g01 = np.empty_like(r_grid)
        g11 = np.empty_like(r_grid)
        g22 = np.empty_like(r_grid)
        gi = sampler.metric(k, traj.snap_y[k], traj.snap_v[k])
        g00[inner], g01[inner], g11[inner], g22[inner] = gi

        dr = r_grid[outer] - rp
        chi = chart.chi(r_grid[outer], rp)
        dchi = chart._dchi(r_grid[outer], rp)
        Rs = chart.f0[k] + chart.f1[k] * dr + 0.5 * chart.f2[k] * dr**2 * chi
        dRs = chart.f1[k] + chart.f2[k] * dr * chi + 0.5 * chart.f2[k] * dr**2 * dchi
        Rs_t = f0d[k] + f1d[k] * dr + 0.5 * f2d[k] * dr**2 * chi
        dts_r = (chart.h1[k] + chart.h2[k] * dr) * chi \
            + (chart.h1[k] * dr + 0.5 * chart.h2[k] * dr**2) * dchi
        ts_t = chart.H_t[k] + (h1d[k] * dr + 0.5 * h2d[k] * dr**2) * chi
        Ks = 1.0 - 2.0 * model.G * mp * ic2 / Rs
        g00[outer] = Ks * ts_t**2 - ic2 * Rs_t**2 / Ks
        g01[outer] = c * Ks * ts_t * dts_r - Rs_t * dRs / (c * Ks)
        g11[outer] = c**2 * Ks * dts_r**2 - dRs**2 / Ks
        g22[outer] = -(Rs**2)
        rows00.append(g00)
        rows01.append(g01)
        rows11.append(g11)
        rows22.append(g22)

    return PatchedMetric(t=chart.t[list(t_indices)], r=r_grid,
                         g00=np.array(rows00), g01=np.array(rows01),
                         g11=np.array(rows11), g22=np.array(rows22))


def c1_residuals(ops, traj, chart, h_frac=1.5e-3):
    """One-sided jump residuals of g and dg/dr across the surface.

    The one-sided derivatives are Richardson-extrapolated from stencils at
    spacings h and h/2, which removes the leading h^4 truncation of the
    interior samples.  Jumps are normalized by the largest derivative scale
    among the metric components at the surface (a tiny g01 would otherwise
    normalize against itself).
    """
    eq = ops.eq
    rp = eq.r_plus
    h = h_frac * rp
    offsets = np.unique(np.concatenate([0.5 * h * np.arange(5), h * np.arange(5)]))
    stencil_in = rp - offsets[::-1]
    stencil_out = rp + offsets
    n_in = stencil_in.size
    r_eval = np.concatenate([stencil_in, stencil_out])
    start = chart.valid.start or 0
    stop = chart.t.size - (3 if not chart.static else 0)
    pm = sample_patched_metric(ops, traj, chart, r_grid=r_eval, split_index=n_in,
                               t_indices=list(range(start, max(stop, start + 1),
                                                    max(1, chart.t.size // 12))))
    idx_h = [int(np.argmin(np.abs(offsets - j * h))) for j in range(5)]
    idx_h2 = [int(np.argmin(np.abs(offsets - j * 0.5 * h))) for j in range(5)]

    def onesided(vals, step):
        return (25 * vals[0] - 48 * vals[1] + 36 * vals[2]
                - 16 * vals[3] + 3 * vals[4]) / (12 * step)

    jumps = {}
    d_ins = {}
    d_outs = {}
    for name, g in (("g00", pm.g00), ("g01", pm.g01), ("g11", pm.g11), ("g22", pm.g22)):
        gin = g[:, :n_in][:, ::-1]   # values at rp - offsets ascending
        gout = g[:, n_in:]
        jumps[name] = np.abs(gin[:, 0] - gout[:, 0])

        def richardson(block, sign):
            vals_h = [block[:, j] for j in idx_h]
            vals_h2 = [block[:, j] for j in idx_h2]
            d_h = sign * onesided(vals_h, h)
            d_h2 = sign * onesided(vals_h2, 0.5 * h)
            return (16.0 * d_h2 - d_h) / 15.0

        d_ins[name] = richardson(gin, +1.0)
        d_outs[name] = richardson(gout, -1.0)
    value_scale = {name: max(np.max(np.abs(pm.__dict__[name])), 1e-30)
                   for name in ("g00", "g01", "g11", "g22")}
    deriv_scale = max(np.max(np.abs(d_ins[n])) for n in d_ins)
    out = {}
    for name in jumps:
        scale0 = max(value_scale[name], value_scale["g00"])
        out[name] = {
            "jump_rel": float(np.max(jumps[name]) / scale0),
            "d1_jump_rel": float(np.max(np.abs(d_ins[name] - d_outs[name])) / deriv_scale),
        }
    return out


# ---------------------------------------------------------------------------
# report persistence


MATCHING_REPORT_SCHEMA = {
    "type": "object",
    "required": ["kind", "static", "c1_residuals", "A_max", "A_static_zero",
                 "det_range", "upstream"],
    "properties": {
        "kind": {"type": "string"},
        "static": {"type": "boolean"},
        "c1_residuals": {"type": "object"},
        "A_max": {"type": "number"},
        "A_static_zero": {"type": "boolean"},
        "det_range": {"type": "array"},
        "upstream": {"type": "object"},
    },
}


def validate_report_schema(doc, schema=None):
    """Minimal structural validation of the matching report document."""
    schema = schema or MATCHING_REPORT_SCHEMA
    kinds = {"object": dict, "string": str, "boolean": bool,
             "number": (int, float), "array": list}
    if not isinstance(doc, dict):
        raise NumericalError("report is not an object")
    for key in schema["required"]:
        if key not in doc:
            raise NumericalError("report missing required key %r" % key)
    for key, sub in schema["properties"].items():
        if key in doc and not isinstance(doc[key], kinds[sub["type"]]):
            raise NumericalError("report key %r has wrong type" % key)
    return True


def save_matching_report(report, json_path, pm, csv_path):
    with open(csv_path, "w") as fh:
        fh.write("t,r,g00,g01,g11,g22\n")
        for i, tv in enumerate(pm.t):
            for j, rv in enumerate(pm.r):
                fh.write(",".join("%.16e" % v for v in
                                  (tv, rv, pm.g00[i, j], pm.g01[i, j],
                                   pm.g11[i, j], pm.g22[i, j])) + "\n")
    validate_report_schema(report)
    with open(json_path, "w") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return report
