import math

import numpy as np
import pytest

from tovpulse import eos, evolution as evo, pulsation as pul
from tovpulse.errors import BlowupError, DomainError


class TestRightHandSides:
    def test_equilibrium_fixed_point(self, ops, model, eq):
        zeros = np.zeros_like(ops.x)
        dy, dv = evo.rhs_nonlinear(ops, zeros, zeros)
        scale = model.G * eq.m_plus / eq.r_plus**2
        assert np.max(np.abs(dv)) <= 1e-8 * scale
        assert np.max(np.abs(dy)) == 0.0

    def test_zero_state_linear(self, ops):
        zeros = np.zeros_like(ops.x)
        dy, dv = evo.rhs_linear(ops, zeros, zeros)
        assert np.all(dy == 0) and np.all(dv == 0)

    def test_state_derivatives_vanish_at_center(self, ops, mode1):
        state = evo.mode_initial_state(ops, mode1, 1e-3)
        z, w = evo.state_derivatives(ops, state)
        assert z[0] == 0.0 and w[0] == 0.0
        assert np.all(np.isfinite(z)) and np.all(np.isfinite(w))

    def test_linear_matches_mode_derivative(self, ops, mode1):
        y0 = mode1.Y1(0.0, ops.x)
        v0 = mode1.V1(0.0, ops.x, ops.Jdeg)
        dy, dv = evo.rhs_linear(ops, y0, v0)
        dy_exact = mode1.dY1_dt(0.0, ops.x)
        assert np.max(np.abs(dy - dy_exact)) <= 1e-10 * np.max(np.abs(dy_exact))
        # at Theta0 = 0 the acceleration vanishes with the displacement
        assert np.max(np.abs(dv)) * mode1.period <= 1e-4

    def test_epsilon_scaling_of_nonlinearity(self, ops, mode1):
        y1 = mode1.Y1(0.25 * mode1.period, ops.x)
        v1 = mode1.V1(0.25 * mode1.period, ops.x, ops.Jdeg)
        lin_y, lin_v = evo.rhs_linear(ops, y1, v1)
        errs = []
        eps_list = (1e-3, 1e-4, 1e-5)
        for eps in eps_list:
            ny, nv = evo.rhs_nonlinear(ops, eps * y1, eps * v1)
            errs.append(np.max(np.abs(nv - eps * lin_v)))
        errs = np.array(errs)
        exponent = np.polyfit(np.log(eps_list), np.log(errs), 1)[0]
        assert exponent == pytest.approx(2.0, abs=0.1)

    def test_positivity_violation_raises(self, ops):
        y = np.full_like(ops.x, -1.5)
        with pytest.raises(BlowupError):
            evo.rhs_nonlinear(ops, y, np.zeros_like(ops.x))

    def test_newtonian_limit_structure(self, newtonian_pipeline):
        # at c = 1e6 the right side reduces to -G m/R^2 - 4 pi R^2 dP/dm
        model, eq_n, xc, ops_n = newtonian_pipeline
        x = ops_n.x
        y = 1e-3 * (0.5 + 0.3 * x - 0.2 * x**2)
        v = np.zeros_like(x)
        dy, dv = evo.rhs_nonlinear(ops_n, y, v)
        z = ops_n.rdxdr * (ops_n.D @ y)
        opy, opyz = 1 + y, 1 + y + z
        rho = ops_n.rho_bar / (opy**2 * opyz)
        u = eos.enthalpy_u(model, rho)
        dxu = ops_n.D @ (u - ops_n.ubar) + ops_n.dx_ubar
        newt = -model.G * ops_n.mu / opy**2 - opy**2 / (opy**2 * opyz) * ops_n.T * dxu
        scale = np.max(np.abs(newt))
        assert np.max(np.abs(dv - newt)) <= 1e-6 * scale

    def test_newtonian_j_tends_to_one(self, newtonian_pipeline):
        _, _, _, ops_n = newtonian_pipeline
        assert np.max(np.abs(ops_n.Jdeg - 1.0)) < 1e-6


class TestStepping:
    def test_zero_state_stays_zero_linear(self, ops, mode1):
        cfg = evo.EvolutionConfig(dt=mode1.period / 2000, t_end=0.0, mode="linear",
                                  scheme="collocation")
        state = evo.PerturbationState(0.0, np.zeros_like(ops.x), np.zeros_like(ops.x))
        out = evo.step(ops, state, cfg)
        assert np.all(out.y == 0) and np.all(out.v == 0)

    def test_cfl_guard(self, ops, mode1):
        cfg = evo.EvolutionConfig(dt=10 * evo.cfl_limit(ops), t_end=100.0,
                                  mode="nonlinear")
        state = evo.PerturbationState(0.0, np.zeros_like(ops.x), np.zeros_like(ops.x))
        with pytest.raises(DomainError, match="CFL"):
            evo.run(ops, state, cfg)

    def test_rk4_order(self, ops, mode1, spectrum):
        st0 = evo.mode_initial_state(ops, mode1, 1e-3)
        amp = 1e-3 * np.max(np.abs(spectrum.psi(ops.x, 0)))
        errs = []
        for steps in (400, 800):
            cfg = evo.EvolutionConfig(dt=mode1.period / steps, t_end=mode1.period,
                                      mode="linear", scheme="collocation")
            tr = evo.run(ops, st0, cfg)
            errs.append(np.max(np.abs(tr.final.y - st0.y)) / amp)
        assert errs[0] / errs[1] == pytest.approx(16.0, abs=8.0)

    def test_time_reversal(self, ops, mode1, spectrum):
        st0 = evo.mode_initial_state(ops, mode1, 1e-3)
        cfg = evo.EvolutionConfig(dt=mode1.period / 2000, t_end=mode1.period / 4,
                                  mode="linear", scheme="collocation")
        fwd = evo.run(ops, st0, cfg)
        back = evo.PerturbationState(0.0, fwd.final.y.copy(), -fwd.final.v.copy())
        bwd = evo.run(ops, back, cfg)
        scale = np.max(np.abs(st0.v))
        assert np.max(np.abs(bwd.final.y - st0.y)) <= 1e-6 * scale
        assert np.max(np.abs(bwd.final.v + st0.v)) <= 1e-6 * scale


class TestLinearRuns:
    def test_period_return_modal(self, linear_traj, ops, mode1, spectrum):
        st0 = evo.mode_initial_state(ops, mode1, 1e-3)
        amp = 1e-3 * np.max(np.abs(spectrum.psi(ops.x, 0)))
        assert np.max(np.abs(linear_traj.final.y - st0.y)) <= 1e-6 * amp
        assert np.max(np.abs(linear_traj.final.v - st0.v)) <= 1e-6 * np.max(np.abs(st0.v))

    def test_energy_conservation(self, linear_traj):
        drift = np.max(np.abs(linear_traj.E_lin - linear_traj.E_lin[0]))
        assert drift <= 1e-8 * abs(linear_traj.E_lin[0])

    def test_rayleigh_quotient_constant(self, ops, mode1):
        traj = evo.run_mode(ops, mode1, epsilon=1e-3, n_periods=0.25,
                            steps_per_period=2000, mode_kind="linear",
                            scheme="collocation", snapshot_every=50)
        wq = ops.quad_w * ops.w_tilde
        quotients = []
        for k in range(traj.snap_t.size):
            y = traj.snap_y[k]
            if np.max(np.abs(y)) < 1e-12:
                continue
            Ly = evo.apply_operator(ops, y)
            quotients.append(float((wq @ (y * Ly)) / (wq @ y**2)))
        quotients = np.array(quotients)
        assert np.max(np.abs(quotients - mode1.lam)) <= 1e-8 * mode1.lam

    def test_surface_radius_series(self, linear_traj, eq):
        assert linear_traj.R_plus[0] == pytest.approx(eq.r_plus, rel=1e-12)
        amp = np.max(np.abs(linear_traj.R_plus - eq.r_plus))
        assert amp > 1e-3 * eq.r_plus * 1e-3

    def test_frequency_from_surface(self, linear_traj, mode1, eq):
        from scipy.optimize import curve_fit

        y_surf = linear_traj.R_plus / eq.r_plus - 1.0

        def sine(t, a, w, ph):
            return a * np.sin(w * t + ph)

        popt, _ = curve_fit(sine, linear_traj.t, y_surf,
                            p0=[np.max(y_surf), mode1.omega * 1.02, 0.0])
        assert abs(abs(popt[1]) - mode1.omega) / mode1.omega < 1e-3


class TestNonlinearRuns:
    def test_defect_scaling(self, nonlinear_traj, nonlinear_traj_half):
        ratio = np.max(nonlinear_traj.defect) / np.max(nonlinear_traj_half.defect)
        assert 1.6 <= ratio <= 2.4

    def test_lagrangian_mass_invariant(self, ops, nonlinear_traj, eq):
        # 4 pi int rho R^2 dR/dr dr recomputed from the state stays constant
        # (the quadrature itself carries a sqrt-endpoint bias of ~1e-5, but
        # the recomputed mass must not drift)
        m_of_t = []
        core = slice(1, -1)
        for k in range(0, nonlinear_traj.snap_t.size, 200):
            y = nonlinear_traj.snap_y[k]
            z = ops.rdxdr * (ops.D @ y)
            rho = ops.rho_bar / ((1 + y) ** 2 * (1 + y + z))
            Rf = ops.r * (1 + y)
            dRdr = (1 + y + z)
            integrand = np.zeros_like(y)
            integrand[core] = (4 * math.pi * rho * Rf**2 * dRdr)[core] / ops.dxdr[core]
            m_of_t.append(float(ops.quad_w @ integrand))
        m_of_t = np.array(m_of_t)
        assert np.max(np.abs(m_of_t - m_of_t[0])) <= 1e-8 * eq.m_plus
        assert m_of_t[0] == pytest.approx(eq.m_plus, rel=1e-4)

    def test_vacuum_boundary_fixed(self, nonlinear_traj, eq):
        # the boundary node remains the material surface: R_plus moves but the
        # state stays finite there and the run conserves the linear energy to
        # the nonlinear scale
        assert np.all(np.isfinite(nonlinear_traj.snap_y[:, -1]))
        rel = np.max(np.abs(nonlinear_traj.E_lin - nonlinear_traj.E_lin[0])) \
            / abs(nonlinear_traj.E_lin[0])
        assert rel < 1e-2

    def test_blowup_reports_time(self, ops, mode1):
        # a strongly contracting start crosses 1 + y = 0 within a few steps
        state = evo.PerturbationState(
            0.0, np.zeros_like(ops.x), -50.0 * np.ones_like(ops.x))
        cfg = evo.EvolutionConfig(dt=evo.cfl_limit(ops) * 0.5, t_end=300.0,
                                  mode="nonlinear")
        with pytest.raises(BlowupError) as err:
            evo.run(ops, state, cfg)
        assert err.value.t_last is not None


class TestFrechet:
    def test_linearization_consistency(self, ops, spectrum):
        rep = evo.frechet_check(ops, spectrum, s=1e-5)
        assert rep.linearization_rel_v <= 1e-4
        assert rep.linearization_rel_y <= 1e-8

    def test_rayleigh_quotients(self, ops, spectrum):
        rep = evo.frechet_check(ops, spectrum)
        assert np.all(rep.rayleigh_rel <= 1e-4)

    def test_degeneracy_exponent(self, ops, spectrum):
        rep = evo.frechet_check(ops, spectrum)
        assert rep.degeneracy_exponent >= 0.95

    def test_central_difference_order(self, ops, spectrum):
        errs = evo.fd_order_sweep(ops, spectrum, svals=(1e-2, 1e-3, 1e-4))
        assert errs[0] / errs[1] == pytest.approx(100.0, rel=0.3)
        # the third value sits near the round-off floor but never grows
        assert errs[2] <= errs[1]


class TestComoving:
    def test_equilibrium_identity(self, ops, static_traj, eq):
        cm = evo.comoving_map(eq, ops, static_traj)
        assert np.max(np.abs(cm.phi - cm.r[None, :])) <= 1e-10

    def test_endpoints_fixed(self, ops, nonlinear_traj, eq):
        cm = evo.comoving_map(eq, ops, nonlinear_traj)
        assert np.max(np.abs(cm.phi[:, 0])) <= 1e-10
        assert np.max(np.abs(cm.phi[:, -1] - eq.r_plus)) <= 1e-10

    def test_drift_scales_linearly(self, ops, nonlinear_traj, nonlinear_traj_half, eq):
        cm1 = evo.comoving_map(eq, ops, nonlinear_traj)
        cm2 = evo.comoving_map(eq, ops, nonlinear_traj_half)
        d1 = np.max(np.abs(cm1.phi - cm1.r[None, :]))
        d2 = np.max(np.abs(cm2.phi - cm2.r[None, :]))
        assert d1 / d2 == pytest.approx(2.0, abs=0.2)
        assert d1 < 1e-2 * eq.r_plus


class TestCauchy:
    def test_zero_data_static(self, ops):
        state, rep = evo.cauchy_setup(ops, lambda x: np.zeros_like(x),
                                      lambda x: np.zeros_like(x))
        assert np.max(np.abs(rep.R0 - ops.r)) == 0.0
        assert np.max(np.abs(rep.dRdt0)) == 0.0

    def test_initial_velocity_formula(self, ops, eq, model):
        psi1 = 1e-3 * (1.0 + 0.5 * ops.x)
        state, rep = evo.cauchy_setup(ops, lambda x: np.zeros_like(x), psi1)
        expected = (1.0 / model.c) * math.sqrt(eq.kappa) \
            * np.exp(-ops.ubar * model.inv_c2) * ops.r * psi1
        assert rep.dRdt0 == pytest.approx(expected, rel=1e-12)

    def test_smallness_warning(self, ops):
        with pytest.warns(UserWarning, match="smallness"):
            evo.cauchy_setup(ops, lambda x: 0.5 * np.ones_like(x),
                             lambda x: np.zeros_like(x))

    def test_spectral_data_evolves_as_cosine(self, ops, spectrum, mode1):
        # psi0 = delta psi_1, psi1 = 0 evolves like delta cos(omega t) psi_1
        delta = 1e-3
        psi = spectrum.psi(ops.x, 0)
        state = evo.PerturbationState(0.0, delta * psi, np.zeros_like(ops.x))
        cfg = evo.EvolutionConfig(dt=mode1.period / 2000, t_end=mode1.period / 3,
                                  mode="nonlinear", snapshot_every=100)
        traj = evo.run(ops, state, cfg)
        worst = 0.0
        for k in range(traj.snap_t.size):
            expect = delta * math.cos(mode1.omega * traj.snap_t[k]) * psi
            worst = max(worst, float(np.max(np.abs(traj.snap_y[k] - expect))))
        assert worst <= 60.0 * delta**2


class TestEnergies:
    def test_linear_energy_positive(self, ops, mode1):
        st = evo.mode_initial_state(ops, mode1, 1e-3)
        E = evo.energy_linear(ops, st.y, st.v)
        assert E > 0

    def test_weighted_energy_monitored(self, ops, nonlinear_traj):
        # the model-weighted variant is a monitored diagnostic, not a
        # conserved quantity of the primitive system: finite and positive
        E = nonlinear_traj.E_weighted
        assert np.all(np.isfinite(E))
        assert np.all(E > 0)
