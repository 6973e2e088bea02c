import math

import numpy as np
import pytest

from tovpulse import pulsation as pul
from tovpulse.errors import ConvergenceError, DomainError
from tovpulse.spectral import cheb_diff_matrix, cheb_lobatto


class TestCoefficients:
    def test_background_identity(self, sl_coeffs):
        assert sl_coeffs.checks.identity_residual <= 1e-8

    def test_a_closed_form_vs_quadrature(self, sl_coeffs):
        assert sl_coeffs.checks.a_form_residual <= 1e-6

    def test_positive_weights(self, sl_coeffs):
        assert np.all(sl_coeffs.E2 > 0)
        assert np.all(sl_coeffs.a > 0)
        assert np.all(sl_coeffs.b > 0)

    def test_leading_coefficient_at_center(self, eq):
        # a(r)/r^4 tends to the central value of gamma_p P e^(F+H)/(1+P/c^2 rho)
        f0 = eq.fields(r=np.array([0.0]), order=0)
        limit = float(f0.gp[0] * f0.P[0] * f0.eF[0] / f0.one_plus_X[0])
        r = np.array([1e-4 * eq.r_plus])
        f = eq.fields(r=r, order=0)
        assert float(f.a_coef[0] / r[0] ** 4) == pytest.approx(limit, rel=1e-6)

    def test_self_adjoint_form_identity(self, eq, sl_coeffs):
        # -(1/b)(a y')' + Q y == -(a/b) y'' - (a'/b) y' + Q y with a' = a E1/E2,
        # exercised on polynomial test functions with independent derivatives
        rng = np.random.default_rng(0)
        r = eq.grid_r[200:-200:100]
        f = eq.fields(r=r, order=2)
        a1 = f.a_coef * f.E1_over_E2
        for _ in range(5):
            c = rng.standard_normal(4)
            y = np.polynomial.polynomial.polyval(r / eq.r_plus, c)
            y1 = np.polynomial.polynomial.polyval(
                r / eq.r_plus, np.polynomial.polynomial.polyder(c)) / eq.r_plus
            y2 = np.polynomial.polynomial.polyval(
                r / eq.r_plus, np.polynomial.polynomial.polyder(c, 2)) / eq.r_plus**2
            lhs = -(f.a_coef * y2 + a1 * y1) / f.b_coef + f.Q * y
            rhs = -(f.a_coef / f.b_coef) * y2 - (a1 / f.b_coef) * y1 + f.Q * y
            assert np.max(np.abs(lhs - rhs)) <= 1e-10 * np.max(np.abs(rhs))


class TestLiouville:
    def test_center_asymptote(self, chart):
        assert chart.q_xi0_limit == pytest.approx(2.0, rel=0.01)

    def test_surface_asymptote(self, chart, model):
        g = model.gamma
        expected = (g + 1) * (3 - g) / (4 * (g - 1) ** 2)
        assert expected == pytest.approx(15.0 / 4.0, rel=1e-14)
        assert chart.q_xi1_limit == pytest.approx(expected, rel=0.01)

    def test_limit_point_criterion(self, chart):
        assert chart.q_xi0_limit > 0.75
        assert chart.q_xi1_limit > 0.75

    def test_map_monotone_and_invertible(self, chart, eq):
        r = np.linspace(0.05, 0.999, 40) * eq.r_plus
        xi = chart.xi_of_r(r)
        assert np.all(np.diff(xi) > 0)
        r_back, _ = chart.locate_xi(xi)
        assert np.max(np.abs(r_back - r)) < 1e-10 * eq.r_plus

    def test_eta_weight_matches_closed_form(self, chart, eq):
        r = np.array([0.3, 0.6]) * eq.r_plus
        f = eq.fields(r=r, order=0)
        expected = (f.gp * f.rho * f.P) ** 0.25 * r**2 * f.one_plus_X**-0.5 \
            * np.sqrt(f.e2H)
        assert chart.eta_weight(r) == pytest.approx(expected, rel=1e-12)


class TestXChart:
    def test_parameters(self, xchart, eq, model):
        assert xchart.N == 6
        f0 = eq.fields(r=np.array([0.0]), order=0)
        c0_expected = 2 * math.sqrt(float(f0.cs2[0])) * float(f0.eF[0])
        assert xchart.C0 == pytest.approx(c0_expected, rel=1e-12)
        c1_expected = 1.0 / ((model.gamma - 1) * eq.kappa**2 * eq.K)
        assert xchart.C1 == pytest.approx(c1_expected, rel=1e-12)

    def test_drift_coefficient_endpoints(self, xchart, model):
        f = xchart.points(np.array([1e-7, 1.0 - 1e-7]))
        assert f.B[0] == pytest.approx(2.5, abs=1e-4)
        assert f.B[1] == pytest.approx(-model.gamma / (model.gamma - 1), abs=1e-4)

    def test_l1_vanishes_like_x_one_minus_x(self, xchart):
        x = np.array([1e-5, 1e-4, 0.3, 0.7, 1 - 1e-4, 1 - 1e-5])
        f = xchart.points(x)
        ratio = f.L1 / (x * (1 - x))
        assert np.all(np.isfinite(ratio))
        assert np.max(np.abs(ratio)) < 100

    def test_map_delegate_roundtrip(self, xchart, eq):
        r = np.array([0.2, 0.5, 0.9]) * eq.r_plus
        x = xchart.x_of_r(r)
        f = xchart.points(x, order=0)
        assert np.max(np.abs(f.r - r)) < 1e-10 * eq.r_plus

    def test_surface_linearization_constant(self, xchart, eq):
        # 1 - x ~ (pi/xi_plus)^2 C1 (r_plus - r) near the surface
        xs = np.array([1 - 1e-4, 1 - 3e-5, 1 - 1e-5])
        f = xchart.points(xs, order=0)
        fitted = (1 - xs) / (eq.r_plus - f.r) * (xchart.xi_plus / math.pi) ** 2
        assert fitted[-1] == pytest.approx(xchart.C1, rel=0.01)

    def test_gamma_without_integer_index_rejected(self, sl_coeffs, chart):
        class FakeEos:
            gamma = 1.41

        class FakeEq:
            eos = FakeEos()

        class FakeCoeffs:
            eq = FakeEq()

        with pytest.raises(DomainError):
            pul.build_x_chart(FakeCoeffs(), chart)


class TestSpectrum:
    def test_model_operator_oracle(self, xchart):
        spec = pul.solve_spectrum(xchart, n_modes=4, basis_size=32, model_operator=True)
        n = np.arange(4)
        expected = n * (n + (xchart.N + 3) / 2.0)
        assert np.max(np.abs(spec.lambdas - expected)) <= 1e-10
        assert expected == pytest.approx([0.0, 5.5, 13.0, 22.5], rel=1e-15)

    def test_ordered_simple(self, spectrum):
        lam = spectrum.lambdas
        assert np.all(np.diff(lam) > 0)
        gaps = np.diff(lam) / lam[1:]
        assert np.min(gaps) > 1e-3

    def test_doubling_convergence(self, spectrum):
        assert np.max(spectrum.doubling_rel) <= 1e-8

    def test_weighted_symmetry(self, xchart):
        A, M, _, _ = pul._assemble(xchart, 48, 120, False)
        assert np.max(np.abs(A - A.T)) <= 1e-12 * np.max(np.abs(A))
        assert np.max(np.abs(M - M.T)) <= 1e-12 * np.max(np.abs(M))

    def test_spectral_convergence_geometric(self, xchart):
        # the analytic coefficients make the convergence so fast that the
        # truncation error is only visible at very small bases; by basis 16
        # the lowest eigenvalue sits at the round-off floor
        lams = []
        for basis in (4, 6, 8, 16, 32):
            spec = pul.solve_spectrum(xchart, n_modes=2, basis_size=basis,
                                      doubling_tol=1.0)
            lams.append(spec.lambdas[0])
        lam_ref = lams[-1]
        errs = np.abs(np.array(lams[:-1]) - lam_ref) / lam_ref
        assert errs[1] < errs[0]
        assert errs[2] < errs[1]
        assert errs[3] < 1e-10

    def test_surface_sign_convention(self, spectrum):
        psi1 = spectrum.psi(np.array([1.0]))
        assert np.all(psi1[0] > 0)

    def test_sign_changes_count(self, spectrum):
        x = np.linspace(1e-4, 1 - 1e-4, 4000)
        psis = spectrum.psi(x)
        for n in range(spectrum.coeffs.shape[1]):
            vals = psis[:, n]
            signs = np.sign(vals[np.abs(vals) > 1e-8 * np.max(np.abs(vals))])
            changes = int(np.sum(signs[1:] * signs[:-1] < 0))
            assert changes == n

    def test_requires_reasonable_basis(self, xchart):
        with pytest.raises(DomainError):
            pul.solve_spectrum(xchart, n_modes=20, basis_size=16)

    def test_unconverged_raises(self, xchart):
        with pytest.raises(ConvergenceError):
            pul.solve_spectrum(xchart, n_modes=4, basis_size=10, doubling_tol=1e-15)


class TestEndpoints:
    def test_nonzero_endpoint_values(self, spectrum):
        rep = pul.eigenfunction_endpoints(spectrum)
        assert np.all(np.abs(rep.c0) > 1e-6)
        assert np.all(np.abs(rep.c1) > 1e-6)

    def test_first_order_taylor_fit(self, spectrum):
        # residual of the linear fit over a 0.02-wide window is quadratic in
        # the window and grows with the mode curvature
        rep = pul.eigenfunction_endpoints(spectrum)
        assert np.max(rep.fit_residual0) < 2e-2
        assert np.max(rep.fit_residual1) < 2e-2
        assert rep.fit_residual0[0] < 1e-3
        assert rep.fit_residual1[0] < 1e-3

    def test_coefficient_decay(self, spectrum):
        # analytic eigenfunctions: Jacobi coefficients decay geometrically
        coef = np.abs(spectrum.coeffs[:, 0])
        scale = coef.max()
        k = np.arange(coef.size)
        keep = coef > 1e-14 * scale
        slope = np.polyfit(k[keep], np.log(coef[keep]), 1)[0]
        assert slope < -0.1


class TestShooting:
    def test_frobenius_indices(self, chart):
        nu0, nu1 = pul.frobenius_indices(chart)
        assert nu0 == pytest.approx(2.0, abs=0.01)
        assert nu1 == pytest.approx(2.5, abs=0.01)

    def test_matches_galerkin(self, chart, spectrum):
        prob = pul.ShootingProblem(chart)
        for n in range(4):
            lam = spectrum.lambdas[n]
            root = prob.refine(lam)
            assert root == pytest.approx(lam, rel=1e-6)

    def test_sign_change_brackets(self, chart, spectrum):
        prob = pul.ShootingProblem(chart)
        for n in range(3):
            lam = spectrum.lambdas[n]
            lo = prob.mismatch(lam * (1 - 2e-3))
            hi = prob.mismatch(lam * (1 + 2e-3))
            assert lo * hi < 0

    def test_mismatch_function_public(self, chart, spectrum):
        val = pul.shooting_crosscheck(chart, spectrum.lambdas[0] * 1.01, n_steps=500)
        assert np.isfinite(val) and val != 0.0


class TestChartConsistency:
    def test_three_chart_agreement(self, eq, xchart, ops):
        # apply the operator to random smooth functions through the radial,
        # acoustic, and compactified forms; all chain-rule factors analytic
        rng = np.random.default_rng(42)
        x = ops.x
        interior = slice(4, -4)
        pi2 = ops.pi2
        f = eq.fields(r=ops.r, order=2)
        x_r = ops.dxdr
        w_norm = ops.quad_w * ops.w_tilde
        core = slice(1, -1)
        # analytic second derivative of the chart map and the log-derivative
        # of sqrt(b/a), both interior-only
        logS1 = 0.5 * f.sigma - f.E1_over_E2           # d/dr ln sqrt(b/a)
        x_rr = np.full_like(x, np.nan)
        x_rr[core] = x_r[core] * (
            0.5 * (1 - 2 * x[core]) * x_r[core] / (x[core] * (1 - x[core]))
            + logS1[core])
        for _ in range(10):
            c = rng.standard_normal(6)
            y = np.polynomial.polynomial.polyval(x, c)
            y_x = np.polynomial.polynomial.polyval(
                x, np.polynomial.polynomial.polyder(c))
            y_xx = np.polynomial.polynomial.polyval(
                x, np.polynomial.polynomial.polyder(c, 2))
            # compactified chart (model + corrections)
            Lx = pi2 * (-(x * (1 - x)) * y_xx - ops.B * y_x) + ops.Q * y
            # radial chart via the E-coefficients
            y_r = y_x * x_r
            y_rr = y_xx * x_r**2 + y_x * x_rr
            Lr = -(f.a_over_b) * y_rr - (f.a_over_b * f.E1_over_E2) * y_r + f.Q * y
            # acoustic chart through the normal form with eta = (ab)^(1/4) y
            s4 = 0.25 * f.sigma
            eta_fac_y = s4**2 + 0.25 * f.sigma1
            eta_xixi_over_omega = f.a_over_b * (
                (eta_fac_y - logS1 * s4) * y + (0.5 * f.sigma - logS1) * y_r + y_rr)
            Lxi = -eta_xixi_over_omega + f.q_potential * y
            scale = math.sqrt(float(w_norm[interior] @ Lx[interior] ** 2))
            err_rx = math.sqrt(float(w_norm[interior] @ (Lr - Lx)[interior] ** 2))
            err_xix = math.sqrt(float(w_norm[interior] @ (Lxi - Lx)[interior] ** 2))
            assert err_rx <= 1e-6 * scale
            assert err_xix <= 1e-6 * scale


class TestPeriodicMode:
    def test_periodicity_exact(self, mode1, ops):
        x = ops.x
        y0 = mode1.Y1(0.3, x)
        y1 = mode1.Y1(0.3 + mode1.period, x)
        assert np.max(np.abs(y1 - y0)) <= 1e-12 * np.max(np.abs(y0))

    def test_wave_equation_residual(self, mode1, ops, spectrum):
        from tovpulse.evolution import apply_operator

        psi = mode1.psi(ops.x)
        resid = apply_operator(ops, psi) - mode1.lam * psi
        assert np.max(np.abs(resid)) <= 1e-6 * mode1.lam * np.max(np.abs(psi))

    def test_initial_velocity_formula(self, mode1, ops):
        v1 = mode1.V1(0.0, ops.x, ops.Jdeg)
        expected = mode1.omega * np.cos(mode1.Theta0) * mode1.psi(ops.x) / ops.Jdeg
        assert v1 == pytest.approx(expected, rel=1e-14)

    def test_unstable_mode_flagged(self, spectrum):
        import copy

        fake = copy.copy(spectrum)
        fake.lambdas = spectrum.lambdas.copy()
        fake.lambdas[0] = -abs(fake.lambdas[0])
        m = pul.periodic_mode(fake, 0)
        assert not m.is_periodic
        with pytest.raises(DomainError):
            _ = m.period


class TestPersistence:
    def test_save_spectrum(self, spectrum, tmp_path):
        import json

        x_out = cheb_lobatto(32)
        meta = pul.save_spectrum(spectrum, tmp_path / "s.json", tmp_path / "s.csv",
                                 x_out, upstream_hashes={"equilibrium_csv": "x"})
        doc = json.loads((tmp_path / "s.json").read_text())
        assert doc["N"] == 6
        assert len(doc["lambdas"]) == spectrum.lambdas.size
        assert doc["csv_sha256"] == meta["csv_sha256"]
