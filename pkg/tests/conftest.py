import numpy as np
import pytest

from tovpulse import eos, evolution as evo, pulsation as pul, tov


@pytest.fixture(scope="session")
def model():
    return eos.EosModel()  # A=1, gamma=3/2, G=c=1, default cap


@pytest.fixture(scope="session")
def eq(model):
    return tov.integrate_outward(model, 1e-3)


@pytest.fixture(scope="session")
def sl_coeffs(eq):
    return pul.build_coefficients(eq)


@pytest.fixture(scope="session")
def chart(sl_coeffs):
    return pul.liouville_transform(sl_coeffs)


@pytest.fixture(scope="session")
def xchart(sl_coeffs, chart):
    return pul.build_x_chart(sl_coeffs, chart)


@pytest.fixture(scope="session")
def spectrum(xchart):
    return pul.solve_spectrum(xchart, n_modes=6, basis_size=96)


@pytest.fixture(scope="session")
def ops(xchart):
    return evo.build_grid_ops(xchart, grid_points=96)


@pytest.fixture(scope="session")
def mode1(spectrum):
    return pul.periodic_mode(spectrum, 0)


@pytest.fixture(scope="session")
def linear_traj(ops, mode1):
    return evo.run_mode(ops, mode1, epsilon=1e-3, n_periods=1.0,
                        steps_per_period=2000, mode_kind="linear", scheme="modal")


@pytest.fixture(scope="session")
def nonlinear_traj(ops, mode1):
    # one full period with dense snapshots, shared by the scaling and
    # matching tests
    return evo.run_mode(ops, mode1, epsilon=1e-3, n_periods=1.0,
                        steps_per_period=2000, mode_kind="nonlinear",
                        snapshot_every=1)


@pytest.fixture(scope="session")
def nonlinear_traj_half(ops, mode1):
    return evo.run_mode(ops, mode1, epsilon=5e-4, n_periods=1.0,
                        steps_per_period=2000, mode_kind="nonlinear",
                        snapshot_every=1)


@pytest.fixture(scope="session")
def static_traj(ops, mode1):
    zeros = np.zeros_like(ops.x)
    state = evo.PerturbationState(0.0, zeros.copy(), zeros.copy())
    cfg = evo.EvolutionConfig(dt=mode1.period / 2000, t_end=mode1.period / 50,
                              mode="nonlinear", snapshot_every=1)
    return evo.run(ops, state, cfg)


@pytest.fixture(scope="session")
def newtonian_pipeline():
    """Light pipeline for the c -> infinity trend checks."""
    model = eos.EosModel(c=1e6)
    eq_n = tov.integrate_outward(model, 1e-3, storage_points=1024)
    co = pul.build_coefficients(eq_n)
    ch = pul.liouville_transform(co, n_panels_surface=128)
    xc = pul.build_x_chart(co, ch)
    ops_n = evo.build_grid_ops(xc, grid_points=64)
    return model, eq_n, xc, ops_n
