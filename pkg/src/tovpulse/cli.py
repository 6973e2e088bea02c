"""Command-line pipeline: tov | spectrum | evolve | cauchy | match | all.

Every stage writes machine-readable artifacts that embed the SHA-256 of the
files they consumed; a downstream stage aborts when the chain is broken.
Exit codes: 0 ok, 2 config/domain error, 3 numerical non-convergence,
4 evolution blow-up, 5 matching failure.
"""

import argparse
import hashlib
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import __version__, config as cfgmod, eos as eosmod, evolution as evo
from . import matching as mat
from . import pulsation as pul
from . import tov as tovmod
from .errors import (
    BlowupError,
    CollapseError,
    ConvergenceError,
    DomainError,
    IntegrityError,
    LongEquilibriumError,
    MatchingError,
    NumericalError,
    StallError,
)


def _sha(path):
    with open(path, "rb") as fh:
        return hashlib.sha256(fh.read()).hexdigest()


def _outdir(cfg, override=None):
    path = override or cfg["output"]["dir"]
    os.makedirs(path, exist_ok=True)
    return path


def _write_json(path, doc):
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


# ---------------------------------------------------------------------------
# pipeline stages (shared by subcommands and the in-process test harness)


def build_equilibrium(cfg):
    model = cfgmod.eos_from_config(cfg)
    rep = eosmod.validate_assumptions(model, cfg["eos"]["rho_max"])
    if not rep.ok_integer_index:
        raise DomainError("(A2) violated: gamma/(gamma-1) = %.6g is not an integer"
                          % rep.details["gamma_over_gamma_minus_1"])
    if not rep.all_ok:
        raise DomainError("EOS assumption check failed: %r" % rep.details)
    sec = cfg["tov"]
    return tovmod.integrate_outward(
        model, sec["rho_c"], rtol=sec["rtol"], u_switch_frac=sec["u_switch_frac"],
        r_max_factor=sec["r_max_factor"], storage_points=int(sec["storage_points"]))


def stage_tov(cfg, out):
    eq = build_equilibrium(cfg)
    csv_path = os.path.join(out, "equilibrium.csv")
    json_path = os.path.join(out, "equilibrium.json")
    tols = {"rtol": cfg["tov"]["rtol"], "u_switch_frac": cfg["tov"]["u_switch_frac"]}
    tovmod.save_equilibrium(eq, csv_path, json_path, code_version=__version__,
                            tolerances=tols)
    fit = tovmod.surface_exponent_check(eq)
    print("equilibrium: r_plus=%.12g m_plus=%.12g kappa=%.12g K=%.12g" %
          (eq.r_plus, eq.m_plus, eq.kappa, eq.K))
    print("surface fit: exponent=%.6f (expected %.6f)  amplitude=%.6e (expected %.6e)"
          % (fit.exponent, fit.exponent_expected, fit.amplitude, fit.amplitude_expected))
    return eq


def _check_equilibrium_files(out):
    csv_path = os.path.join(out, "equilibrium.csv")
    json_path = os.path.join(out, "equilibrium.json")
    if not (os.path.exists(csv_path) and os.path.exists(json_path)):
        raise DomainError("equilibrium files missing in %s; run the tov stage first" % out)
    with open(json_path) as fh:
        meta = json.load(fh)
    if meta.get("csv_sha256") != _sha(csv_path):
        raise IntegrityError("equilibrium CSV does not match its sidecar hash")
    return csv_path, json_path, meta


def build_pulsation(cfg, eq):
    coeffs = pul.build_coefficients(eq)
    chart = pul.liouville_transform(coeffs)
    xchart = pul.build_x_chart(coeffs, chart)
    return coeffs, chart, xchart


def stage_spectrum(cfg, out, oracle=False):
    csv_path, json_path, _ = _check_equilibrium_files(out)
    eq = build_equilibrium(cfg)
    coeffs, chart, xchart = build_pulsation(cfg, eq)
    sec = cfg["pulsation"]
    if oracle:
        n = np.arange(int(sec["n_modes"]))
        expect = n * (n + (xchart.N + 3) / 2.0)
        spec_model = pul.solve_spectrum(xchart, n_modes=int(sec["n_modes"]),
                                        basis_size=32, model_operator=True)
        err = float(np.max(np.abs(spec_model.lambdas - expect)))
        print("model-operator oracle: eigenvalues %s  max deviation %.3e"
              % (np.array2string(spec_model.lambdas, precision=6), err))
        if err > 1e-10:
            raise ConvergenceError("model-operator spectrum deviates by %.3e" % err)
    spec = pul.solve_spectrum(xchart, n_modes=int(sec["n_modes"]),
                              basis_size=int(sec["basis_size"]),
                              doubling_tol=sec["doubling_tol"])
    x_out = evo.cheb_lobatto(int(cfg["evolution"]["grid_points"]))
    upstream = {"equilibrium_csv": _sha(csv_path), "equilibrium_json": _sha(json_path)}
    gamma = eq.eos.gamma
    c_plus = (gamma + 1.0) * (3.0 - gamma) / (4.0 * (gamma - 1.0) ** 2)
    meta = pul.save_spectrum(spec, os.path.join(out, "spectrum.json"),
                             os.path.join(out, "spectrum.csv"), x_out,
                             upstream_hashes=upstream,
                             tolerances={"doubling_tol": sec["doubling_tol"]})
    print("eigenvalues:", " ".join("%.10e" % v for v in spec.lambdas))
    print("q asymptotes: center %.6f (expected 2)  surface %.6f (expected %.6f)"
          % (chart.q_xi0_limit, chart.q_xi1_limit, c_plus))
    return eq, xchart, spec, meta


def _check_spectrum_files(out):
    spath = os.path.join(out, "spectrum.json")
    scsv = os.path.join(out, "spectrum.csv")
    if not (os.path.exists(spath) and os.path.exists(scsv)):
        raise DomainError("spectrum files missing in %s; run the spectrum stage first" % out)
    with open(spath) as fh:
        meta = json.load(fh)
    if meta.get("csv_sha256") != _sha(scsv):
        raise IntegrityError("spectrum CSV does not match its sidecar hash")
    csv_path, json_path, _ = _check_equilibrium_files(out)
    if meta["upstream"].get("equilibrium_csv") != _sha(csv_path):
        raise IntegrityError("spectrum was built from a different equilibrium CSV")
    return spath, scsv, meta


def _write_trajectory(out, traj, upstream, diagnostics, cfg):
    tpath = os.path.join(out, "trajectory.csv")
    with open(tpath, "w") as fh:
        fh.write("t,E_lin,R_plus,sup_y,sup_v\n")
        for k in range(traj.t.size):
            fh.write(",".join("%.16e" % v for v in
                              (traj.t[k], traj.E_lin[k], traj.R_plus[k],
                               traj.sup_y[k], traj.sup_v[k])) + "\n")
    spath = os.path.join(out, "snapshots.csv")
    if traj.snap_t.size:
        with open(spath, "w") as fh:
            fh.write("t,x,y,v\n")
            xg = evo.cheb_lobatto(traj.snap_y.shape[1] - 1)
            for k in range(traj.snap_t.size):
                for j in range(xg.size):
                    fh.write(",".join("%.16e" % v for v in
                                      (traj.snap_t[k], xg[j],
                                       traj.snap_y[k, j], traj.snap_v[k, j])) + "\n")
    manifest = {
        "config": cfg,
        "upstream": upstream,
        "diagnostics": diagnostics,
        "trajectory_csv_sha256": _sha(tpath),
        "code_version": __version__,
    }
    _write_json(os.path.join(out, "trajectory_manifest.json"), manifest)
    return tpath


def stage_evolve(cfg, out, epsilon=None, epsilon_pair=False):
    spath, scsv, smeta = _check_spectrum_files(out)
    eq = build_equilibrium(cfg)
    coeffs, chart, xchart = build_pulsation(cfg, eq)
    spec = pul.solve_spectrum(xchart, n_modes=int(cfg["pulsation"]["n_modes"]),
                              basis_size=int(cfg["pulsation"]["basis_size"]),
                              doubling_tol=cfg["pulsation"]["doubling_tol"])
    ops = evo.build_grid_ops(xchart, grid_points=int(cfg["evolution"]["grid_points"]))
    sec = cfg["evolution"]
    eps = float(epsilon if epsilon is not None else sec["epsilon"])
    mode = pul.periodic_mode(spec, int(sec["mode_index"]))

    traj = evo.run_mode(ops, mode, epsilon=eps, n_periods=sec["n_periods"],
                        steps_per_period=int(sec["steps_per_period"]),
                        mode_kind=sec["mode"], scheme=sec["scheme"],
                        filter_strength=sec["filter_strength"],
                        snapshot_every=int(sec["snapshot_every"]))
    drift = float(np.max(np.abs(traj.E_lin - traj.E_lin[0])) / abs(traj.E_lin[0]))
    st0 = evo.mode_initial_state(ops, mode, eps)
    amp = eps * float(np.max(np.abs(spec.psi(ops.x, int(sec["mode_index"])))))
    period_err = float(max(np.max(np.abs(traj.final.y - st0.y)),
                           np.max(np.abs(traj.final.v - st0.v))) / amp)
    diagnostics = {"epsilon": eps, "energy_drift": drift,
                   "period_return_error": period_err,
                   "defect": float(np.max(traj.defect))}
    print("run: mode=%s epsilon=%g period-return=%.3e energy-drift=%.3e D(eps)=%.4e"
          % (sec["mode"], eps, period_err, drift, np.max(traj.defect)))

    if epsilon_pair:
        traj2 = evo.run_mode(ops, mode, epsilon=eps / 2.0, n_periods=sec["n_periods"],
                             steps_per_period=int(sec["steps_per_period"]),
                             mode_kind=sec["mode"], scheme=sec["scheme"],
                             filter_strength=sec["filter_strength"],
                             snapshot_every=0)
        ratio = float(np.max(traj.defect) / np.max(traj2.defect))
        diagnostics["defect_half"] = float(np.max(traj2.defect))
        diagnostics["defect_ratio"] = ratio
        print("D(eps)/D(eps/2) = %.4f" % ratio)

    upstream = {"spectrum_json": _sha(spath), "spectrum_csv": _sha(scsv),
                "equilibrium_csv": smeta["upstream"]["equilibrium_csv"]}
    _write_trajectory(out, traj, upstream, diagnostics, cfg)
    return eq, ops, spec, traj


def stage_cauchy(cfg, out):
    spath, scsv, smeta = _check_spectrum_files(out)
    eq = build_equilibrium(cfg)
    coeffs, chart, xchart = build_pulsation(cfg, eq)
    spec = pul.solve_spectrum(xchart, n_modes=int(cfg["pulsation"]["n_modes"]),
                              basis_size=int(cfg["pulsation"]["basis_size"]),
                              doubling_tol=cfg["pulsation"]["doubling_tol"])
    ops = evo.build_grid_ops(xchart, grid_points=int(cfg["evolution"]["grid_points"]))
    sec = cfg["evolution"]
    p0c = list(sec["cauchy_psi0"]) or [0.0]
    p1c = list(sec["cauchy_psi1"]) or [0.0]
    psi0 = np.polynomial.polynomial.polyval(ops.x, np.asarray(p0c, dtype=float))
    psi1 = np.polynomial.polynomial.polyval(ops.x, np.asarray(p1c, dtype=float))
    state0, report = evo.cauchy_setup(ops, psi0, psi1,
                                      delta_max=sec["cauchy_delta_max"])
    mode = pul.periodic_mode(spec, 0)
    dt = mode.period / int(sec["steps_per_period"])
    config = evo.EvolutionConfig(dt=dt, t_end=sec["n_periods"] * mode.period,
                                 mode="nonlinear",
                                 filter_strength=sec["filter_strength"],
                                 snapshot_every=int(sec["snapshot_every"]))
    traj = evo.run(ops, state0, config)
    diagnostics = {"sup_initial": report.sup_norm,
                   "sup_final_y": float(np.max(np.abs(traj.final.y))),
                   "sup_final_v": float(np.max(np.abs(traj.final.v)))}
    print("cauchy run: sup|psi| = %.3e  sup|y(T)| = %.3e"
          % (report.sup_norm, diagnostics["sup_final_y"]))
    upstream = {"spectrum_json": _sha(spath), "spectrum_csv": _sha(scsv),
                "equilibrium_csv": smeta["upstream"]["equilibrium_csv"]}
    _write_trajectory(out, traj, upstream, diagnostics, cfg)
    return traj


def _load_snapshots(out, grid_points):
    spath = os.path.join(out, "snapshots.csv")
    if not os.path.exists(spath):
        raise DomainError("snapshots.csv missing; run evolve with snapshot_every=1")
    data = np.loadtxt(spath, delimiter=",", skiprows=1)
    n_x = grid_points + 1
    n_t = data.shape[0] // n_x
    t = data[::n_x, 0]
    y = data[:, 2].reshape(n_t, n_x)
    v = data[:, 3].reshape(n_t, n_x)
    return t, y, v


def stage_match(cfg, out):
    tpath = os.path.join(out, "trajectory.csv")
    mpath = os.path.join(out, "trajectory_manifest.json")
    if not (os.path.exists(tpath) and os.path.exists(mpath)):
        raise DomainError("trajectory files missing in %s; run evolve first" % out)
    with open(mpath) as fh:
        manifest = json.load(fh)
    if manifest.get("trajectory_csv_sha256") != _sha(tpath):
        raise IntegrityError("trajectory CSV does not match its manifest hash")

    eq = build_equilibrium(cfg)
    static_rep = mat.static_c2_check(eq, h_frac=cfg["matching"]["h_frac"] * 4.0 / 3.0)
    coeffs, chart, xchart = build_pulsation(cfg, eq)
    ops = evo.build_grid_ops(xchart, grid_points=int(cfg["evolution"]["grid_points"]))

    snap_t, snap_y, snap_v = _load_snapshots(out, int(cfg["evolution"]["grid_points"]))
    traj = evo.Trajectory(
        t=snap_t, E_lin=np.zeros_like(snap_t), E_weighted=np.zeros_like(snap_t),
        R_plus=eq.r_plus * (1 + snap_y[:, -1]), sup_y=np.max(np.abs(snap_y), axis=1),
        sup_v=np.max(np.abs(snap_v), axis=1), defect=np.zeros_like(snap_t),
        snap_t=snap_t, snap_y=snap_y, snap_v=snap_v,
        config=evo.EvolutionConfig(dt=float(snap_t[1] - snap_t[0]),
                                   t_end=float(snap_t[-1]), snapshot_every=1),
        final=evo.PerturbationState(t=float(snap_t[-1]), y=snap_y[-1], v=snap_v[-1]),
    )
    chart_e, ser = mat.dynamic_c1_match(ops, traj,
                                        delta_cut_frac=cfg["matching"]["delta_cut_frac"])
    residuals = mat.c1_residuals(ops, traj, chart_e, h_frac=cfg["matching"]["h_frac"])
    jc = mat.jump_consistency(chart_e, ser)
    pm = mat.sample_patched_metric(ops, traj, chart_e)
    sl = chart_e.valid
    A_max = float(np.max(np.abs(chart_e.A[sl])))
    report = {
        "kind": "dynamic" if not chart_e.static else "static",
        "static": bool(chart_e.static),
        "static_c2_worst": static_rep.worst,
        "c1_residuals": residuals,
        "A_max": A_max,
        "A_static_zero": bool(chart_e.static and A_max == 0.0),
        "det_range": [float(np.min(chart_e.det[sl])), float(np.max(chart_e.det[sl]))],
        "jump_comparison": vars(jc),
        "upstream": {"trajectory_csv": _sha(tpath)},
    }
    mat.save_matching_report(report, os.path.join(out, "matching.json"), pm,
                             os.path.join(out, "matching_metric.csv"))
    worst = max(v["d1_jump_rel"] for v in residuals.values())
    print("matching: static=%s  C1 residual max=%.3e  |A|max=%.4e  det in [%.4f, %.4f]"
          % (chart_e.static, worst, A_max, report["det_range"][0], report["det_range"][1]))
    if worst > 1e-6:
        raise MatchingError("C1 residuals exceed 1e-6: %.3e" % worst)
    return report


# ---------------------------------------------------------------------------
# argument parsing


def _sweep_tov(cfg, out, rho_values):
    def job(rho):
        sub = os.path.join(out, "rho_c_%s" % ("%.6e" % rho))
        os.makedirs(sub, exist_ok=True)
        job_cfg = json.loads(json.dumps(cfg))
        job_cfg["tov"]["rho_c"] = rho
        stage_tov(job_cfg, sub)
        return sub

    workers = int(os.environ.get("TOVPULSE_THREADS", "0")) or min(4, os.cpu_count() or 1)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        for sub in pool.map(job, rho_values):
            print("wrote", sub)


def main(argv=None):
    parser = argparse.ArgumentParser(prog="tovpulse",
                                     description="relativistic stellar equilibria, "
                                                 "pulsation spectra, and Lagrangian evolution")
    parser.add_argument("command",
                        choices=["tov", "spectrum", "evolve", "cauchy", "match", "all"])
    parser.add_argument("--config", help="TOML configuration file")
    parser.add_argument("--out", help="output directory (overrides [output] dir)")
    parser.add_argument("--rho-c", help="central density, or comma-separated sweep values")
    parser.add_argument("--modes", type=int, help="number of eigenmodes")
    parser.add_argument("--epsilon", type=float, help="perturbation amplitude")
    parser.add_argument("--epsilon-pair", action="store_true",
                        help="also run epsilon/2 and print the defect ratio")
    parser.add_argument("--oracle", action="store_true",
                        help="check the model-operator spectrum first")
    args = parser.parse_args(argv)

    try:
        if args.config:
            cfg = cfgmod.load_config(args.config)
        else:
            cfg = cfgmod.validate(cfgmod.merge_defaults({}))
        if args.modes:
            cfg["pulsation"]["n_modes"] = args.modes
        out = _outdir(cfg, args.out)

        if args.command == "tov":
            if args.rho_c and "," in args.rho_c:
                _sweep_tov(cfg, out, [float(v) for v in args.rho_c.split(",")])
            else:
                if args.rho_c:
                    cfg["tov"]["rho_c"] = float(args.rho_c)
                stage_tov(cfg, out)
        elif args.command == "spectrum":
            stage_spectrum(cfg, out, oracle=args.oracle)
        elif args.command == "evolve":
            stage_evolve(cfg, out, epsilon=args.epsilon, epsilon_pair=args.epsilon_pair)
        elif args.command == "cauchy":
            stage_cauchy(cfg, out)
        elif args.command == "match":
            stage_match(cfg, out)
        elif args.command == "all":
            stage_tov(cfg, out)
            stage_spectrum(cfg, out, oracle=args.oracle)
            stage_evolve(cfg, out, epsilon=args.epsilon)
            stage_match(cfg, out)
    except (DomainError, IntegrityError) as exc:
        print("error:", exc, file=sys.stderr)
        return 2
    except (ConvergenceError, CollapseError, StallError, LongEquilibriumError,
            NumericalError) as exc:
        print("error:", exc, file=sys.stderr)
        return 3
    except BlowupError as exc:
        print("error: evolution blow-up at t=%s: %s" % (exc.t_last, exc), file=sys.stderr)
        return 4
    except MatchingError as exc:
        print("error:", exc, file=sys.stderr)
        return 5
    return 0


if __name__ == "__main__":
    sys.exit(main())
