"""Command-line interface.

Subcommands: profile (solve and export a similarity profile), simulate
(run the physical solver from a config file), diagnose (transform snapshots
and emit entropy time series), report (summarize a time series), verify
(run the acceptance suite).  Exit codes: 0 success, 1 configuration or
domain error, 2 numerical failure, 3 verification violation.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from .dynamics import PhysicalState, SolverConfig, run
from .errors import ConfigError, DomainError, NumericalFailure, SolverFailure
from .lab import (
    emit_report,
    fit_decay_rate,
    parse_config,
    parse_report,
    read_csv,
    run_experiment,
    write_csv,
)
from .profile import LimitSpec, solve_profile
from .thermo import PressureLaw

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_NUMERICAL = 2
EXIT_VIOLATION = 3


def _cmd_profile(args):
    law = PressureLaw(k=args.k, gamma=args.gamma)
    limits = LimitSpec(args.rho_minus, args.rho_plus, args.alpha)
    prof = solve_profile(limits, law, L=args.L, dy=args.dy)
    write_csv(
        args.out,
        {"theta": prof.theta, "mu": prof.mu, "K": prof.K_const,
         "rho_minus": args.rho_minus, "rho_plus": args.rho_plus,
         "alpha": args.alpha, "gamma": args.gamma, "k": args.k},
        {"y": prof.y, "rho_star": prof.rho_star, "n_star": prof.n_star,
         "r_star": prof.r_star, "ode_residual": prof.ode_residual},
    )
    print(f"wrote {args.out}: theta={prof.theta:.6g} mu={prof.mu:.6g} "
          f"K={prof.K_const:.6g}")
    return EXIT_OK


def _cmd_simulate(args):
    cfg = parse_config(args.config)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)

    from .lab import build_initial, cell_grid, tau_schedule

    law = PressureLaw(k=cfg.k, gamma=cfg.gamma)
    limits = LimitSpec(cfg.rho_minus, cfg.rho_plus, cfg.alpha)
    profile = None
    if not limits.same_limits and cfg.initial_base == "profile":
        profile = solve_profile(limits, law, dy=cfg.dy)
    x = cell_grid(cfg.X, cfg.dx)
    rho0, m0 = build_initial(cfg, x, limits, profile)
    t_snap = np.expm1(tau_schedule(cfg))
    scfg = SolverConfig(cfl=cfg.cfl, order=cfg.order,
                        snapshot_times=tuple(t_snap[1:]))
    result = run(PhysicalState(x, rho0, m0, 0.0), scfg, law, limits,
                 float(t_snap[-1]), scaled_halfwidth=cfg.L_y)
    header = {"gamma": cfg.gamma, "k": cfg.k, "alpha": cfg.alpha,
              "rho_minus": cfg.rho_minus, "rho_plus": cfg.rho_plus,
              "dx": cfg.dx}
    for snap in result.snapshots:
        name = out / f"snapshot_{snap.t:.6f}.csv"
        write_csv(name, {**header, "t": snap.t},
                  {"x": snap.x, "rho": snap.rho, "m": snap.m})
    meta = result.meta
    write_csv(out / "run_meta.csv", header, {
        "t": meta["t"], "dt": meta["dt"], "mass": meta["mass"],
        "momentum": meta["momentum"],
        "boundary_flux_mass": meta["boundary_flux_mass"],
        "boundary_flux_momentum": meta["boundary_flux_momentum"],
    })
    print(f"wrote {len(result.snapshots)} snapshots to {out}")
    return EXIT_OK


def _cmd_diagnose(args):
    cfg = parse_config(args.config)
    if args.reference:
        cfg.reference = args.reference.replace("smoothed_step", "smoothed-step")
    out = Path(args.out)

    if args.in_dir:
        # re-run diagnostics over previously written snapshots
        from .entropy import error_terms, total_relative_entropy
        from .lab import make_reference, node_grid, theoretical_bound
        from .scaling import to_scaled

        law = PressureLaw(k=cfg.k, gamma=cfg.gamma)
        limits = LimitSpec(cfg.rho_minus, cfg.rho_plus, cfg.alpha)
        profile = None
        if not limits.same_limits:
            profile = solve_profile(limits, law, dy=cfg.dy)
        ref, _ = make_reference(cfg, limits, law, profile)
        y = node_grid(cfg.L_y, cfg.dy)
        snaps = sorted(Path(args.in_dir).glob("snapshot_*.csv"),
                       key=lambda p: float(p.stem.split("_")[1]))
        if not snaps:
            raise ConfigError(f"no snapshot files in {args.in_dir}")
        taus, Es, Ds, X1, X2, X3 = [], [], [], [], [], []
        for path in snaps:
            meta, cols = read_csv(path)
            state = PhysicalState(cols["x"], cols["rho"], cols["m"], meta["t"])
            fld = to_scaled(state, y)
            write_csv(out.parent / f"scaled_{fld.tau:.6f}.csv",
                      {"tau": fld.tau},
                      {"y": fld.y, "rho": fld.rho, "n": fld.n})
            totals = total_relative_entropy(fld, ref, cfg.alpha, law)
            terms = error_terms(fld, ref, fld.tau, cfg.alpha, law)
            taus.append(fld.tau)
            Es.append(totals.E)
            Ds.append(totals.D_alpha)
            X1.append(terms.Xi[0]); X2.append(terms.Xi[1]); X3.append(terms.Xi[2])
        taus = np.array(taus)
        E = np.array(Es)
        theta = profile.theta if profile is not None else 0.0
        mu = profile.mu if profile is not None else 0.0
        K = profile.K_const if profile is not None else 0.0
        if limits.same_limits or theta > 0:
            env = theoretical_bound(taus, float(E[0]), theta, mu, K,
                                    limits.same_limits)
        else:
            env = np.full_like(taus, np.nan)
        res = np.zeros_like(taus)
        if len(taus) > 1:
            from .lab import _inequality_residual

            res[1:] = _inequality_residual(
                taus, E, np.array(Ds),
                np.array(X1) + np.array(X2) + np.array(X3))
        write_csv(out, {"theta": theta, "mu": mu, "K_const": K,
                        "E0": float(E[0])},
                  {"tau": taus, "E": E, "D_alpha": np.array(Ds),
                   "Xi1": np.array(X1), "Xi2": np.array(X2),
                   "Xi3": np.array(X3), "envelope": env,
                   "ineq_residual": res})
    else:
        report = run_experiment(cfg)
        emit_report(report, out)
    print(f"wrote {out}")
    return EXIT_OK


def _cmd_report(args):
    report = parse_report(args.timeseries)
    tau = report.tau
    print(f"samples: {len(tau)}, tau in [{tau[0]:g}, {tau[-1]:g}]")
    for key in ("theta", "mu", "K_const", "E0"):
        if key in report.meta:
            print(f"{key} = {report.meta[key]}")
    print(f"E: {report.E[0]:.6e} -> {report.E[-1]:.6e}")
    if np.all(report.E > 0) and tau[-1] > 0.5:
        rate, rms = fit_decay_rate(report, (min(0.5, tau[-1] / 2), tau[-1]))
        print(f"fitted decay rate {rate:.4f} (rms {rms:.2e})")
    if np.all(np.isfinite(report.envelope)):
        print(f"max E/envelope = {np.max(report.E / report.envelope):.4f}")
    return EXIT_OK


def _cmd_verify(args):
    from .verify import run_all

    results = run_all()
    failed = [r for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} checks passed")
    return EXIT_VIOLATION if failed else EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(
        prog="diffusionwave",
        description="Numerical laboratory for damped Euler flow relaxing "
                    "to a nonlinear diffusion wave",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("profile", help="solve a similarity profile")
    p.add_argument("--rho-minus", type=float, required=True)
    p.add_argument("--rho-plus", type=float, required=True)
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--gamma", type=float, default=2.0)
    p.add_argument("--k", type=float, default=1.0)
    p.add_argument("--L", type=float, default=None)
    p.add_argument("--dy", type=float, default=0.01)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_profile)

    p = sub.add_parser("simulate", help="run the physical solver")
    p.add_argument("--config", required=True)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("diagnose", help="entropy diagnostics in scaling variables")
    p.add_argument("--config", required=True)
    p.add_argument("--in-dir", default=None,
                   help="snapshot directory from a previous simulate run; "
                        "omitted: simulate internally")
    p.add_argument("--reference", default=None,
                   choices=["constant", "smoothed-step", "profile"])
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_diagnose)

    p = sub.add_parser("report", help="summarize an entropy time series")
    p.add_argument("timeseries")
    p.set_defaults(func=_cmd_report)

    p = sub.add_parser("verify", help="run the acceptance suite")
    p.set_defaults(func=_cmd_verify)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, DomainError, SolverFailure) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalFailure as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
