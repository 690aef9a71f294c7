"""Command line interface: ``nsf run|sweep|plot|check-eos``.

Exit codes: 0 success, 1 configuration error, 2 minimum-principle
violation, 3 numerical blowup (or floor breach), 4 structural-hypothesis
failure.
"""
from __future__ import annotations

import argparse
import itertools
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from . import __version__
from . import io as nio
from .config import ConfigError, RunConfig, boundary_times, build_laws, build_scenario, \
    build_structural, parse_config, parse_config_text, render_config
from .constitutive import GasEOS, check_structural, eval_rho_cv
from .diagnostics import ballistic_residual
from .minprinciple import HypothesisFailure, check_state, derive_M, make_schedule, \
    reaction_coefficient
from .solver1d import CFL, RHO_FLOOR, THETA_FLOOR, ScenarioError, run

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_VIOLATION = 2
EXIT_BLOWUP = 3
EXIT_HYPOTHESIS = 4


@dataclass
class RunOutcome:
    cfg: RunConfig
    exit_code: int
    status: str
    structural: object = None
    structural_p: object = None
    schedule: object = None
    trajectory: object = None
    reports: list = field(default_factory=list)
    balances: list = field(default_factory=list)
    oracle: Optional[dict] = None
    messages: list = field(default_factory=list)

    @property
    def V_min(self) -> float:
        return min((r.V_min for r in self.reports), default=float("nan"))

    @property
    def min_theta_margin(self) -> float:
        return min((r.worst_margin for r in self.reports), default=float("nan"))

    @property
    def final_margin(self) -> float:
        vals = [b.inequality_margin for b in self.balances if np.isfinite(b.inequality_margin)]
        return vals[-1] if vals else float("nan")


def execute(cfg: RunConfig) -> RunOutcome:
    """Structural scan, bound schedule, simulation and all checks."""
    laws = build_laws(cfg)
    base = build_structural(cfg)
    report = check_structural(GasEOS(base, cfg.eos.a), laws)
    out = RunOutcome(cfg, EXIT_OK, "ok", structural=report, structural_p=base)
    if not report.ok:
        out.exit_code, out.status = EXIT_HYPOTHESIS, "hypothesis"
        out.messages += [f"{v.hypothesis}: {v.message} ({v.count} grid points, e.g. {v.worst})"
                         for v in report.violations]
        return out
    sc = build_scenario(cfg)
    if cfg.checks.minprinciple:
        try:
            theta_b = np.concatenate([sc.thetaB_left(boundary_times(cfg)),
                                      sc.thetaB_right(boundary_times(cfg))])
            out.schedule = make_schedule(report.constants, laws, sc.theta0(sc.grid.centers),
                                         theta_b, cfg.checks.M_variant)
        except HypothesisFailure as exc:
            out.exit_code, out.status = EXIT_HYPOTHESIS, "hypothesis"
            out.messages.append(str(exc))
            return out
    traj = run(sc)
    out.trajectory = traj
    # snapshots just before a blowup may overflow; that is reported, not warned
    with np.errstate(over="ignore", invalid="ignore"):
        if out.schedule is not None:
            out.reports = [check_state(s, out.schedule, tol=cfg.checks.tol_violation)
                           for s in traj.snapshots]
        if cfg.checks.diagnostics and len(traj.snapshots) >= 2:
            out.balances = ballistic_residual(traj, sc, cfg.checks.derivative)
    if cfg.checks.oracle and traj.ok:
        out.oracle = oracle_comparison(cfg, sc, traj)
    if not traj.ok:
        out.exit_code, out.status = EXIT_BLOWUP, traj.failure.reason
        out.messages.append(str(traj.failure))
    elif any(r.violated for r in out.reports):
        out.exit_code, out.status = EXIT_VIOLATION, "violation"
        worst = min(out.reports, key=lambda r: r.V_min)
        out.messages.append(f"minimum principle violated: V_min = {worst.V_min:.3e} "
                            f"at t = {worst.t:.6g}")
    return out


def oracle_comparison(cfg, sc, traj) -> dict:
    from .oracle import heat_oracle, sample_at
    final = traj.snapshots[-1]
    n = cfg.checks.oracle_intervals
    xv = np.linspace(sc.grid.x_left, sc.grid.x_right, n + 1)
    rho_v = sc.rho0(xv)
    res = heat_oracle(sc.theta0, sc.thetaB_left, sc.thetaB_right, sc.laws.kappa,
                      lambda th: eval_rho_cv(sc.eos, rho_v, th), final.t, n,
                      cfg.checks.oracle_dt, sc.grid.x_left, sc.grid.x_right)
    ref = sample_at(res, sc.grid.centers)
    err = float(np.max(np.abs(final.theta - ref)) / np.max(np.abs(ref)))
    return {"t": final.t, "x": sc.grid.centers, "theta": final.theta, "theta_oracle": ref,
            "relative_max_discrepancy": err, "oracle_steps": res.steps,
            "oracle_intervals": n}


def manifest_data(out: RunOutcome, files: list) -> dict:
    cfg = out.cfg
    data = {"version": __version__, "config": cfg.as_dict(), "exit_status": out.exit_code,
            "status": out.status, "messages": out.messages,
            "constants": {"rho_floor": RHO_FLOOR, "theta_floor": THETA_FLOOR, "cfl": cfg.time.cfl,
                          "default_cfl": CFL, "tol_violation": cfg.checks.tol_violation}}
    if out.structural is not None:
        c = out.structural.constants
        data["structural"] = {
            "kappa_ratio_lo": c.kappa_ratio_lo, "kappa_ratio_hi": c.kappa_ratio_hi,
            "kappa_ratio_argmin_theta": c.kappa_ratio_argmin, "Lambda": c.Lambda,
            "Lambda_argmin_theta": c.Lambda_argmin, "P_bar": c.P_bar, "a": c.a,
            "e_lo": c.e_lo, "e_hi": c.e_hi, "p_inf": out.structural_p.p_inf,
            "Z_bar": out.structural_p.Z_bar,
            "violations": [v.hypothesis for v in out.structural.violations],
            "notes": out.structural.notes,
        }
        if out.structural.ok:
            data["structural"]["reaction_coefficient"] = reaction_coefficient(
                c, cfg.checks.M_variant)
    if out.schedule is not None:
        data["bound"] = {"M": out.schedule.M, "Y0": out.schedule.Y0,
                         "M_variant": cfg.checks.M_variant}
        if out.reports:
            data["bound"]["V_min"] = out.V_min
            data["bound"]["worst_theta_margin"] = out.min_theta_margin
    traj = out.trajectory
    if traj is not None:
        dts = np.asarray(traj.dts) if traj.dts else np.array([np.nan])
        data["run"] = {"steps": traj.steps, "snapshots": len(traj.snapshots),
                       "dt_min": float(np.min(dts)), "dt_max_used": float(np.max(dts)),
                       "min_eps_source": traj.min_eps_source,
                       "min_viscous_heating": traj.min_viscous_heating,
                       "failure": traj.failure.as_dict() if traj.failure else None}
    if out.balances:
        data["balance"] = {
            "min_margin": float(np.nanmin([b.inequality_margin for b in out.balances])),
            "max_abs_energy_residual": float(np.nanmax(np.abs(
                [b.energy_residual for b in out.balances]))),
            "min_dissipation": float(min(b.dissipation for b in out.balances)),
            "derivative": cfg.checks.derivative,
        }
    if out.oracle is not None:
        data["oracle"] = {k: out.oracle[k] for k in
                          ("t", "relative_max_discrepancy", "oracle_steps", "oracle_intervals")}
    data["files"] = files
    return data


def write_artifacts(out: RunOutcome, directory: Path) -> list:
    directory.mkdir(parents=True, exist_ok=True)
    names = []
    cfg = out.cfg
    (directory / "config.ini").write_text(render_config(cfg.as_dict()))
    names.append("config.ini")
    traj = out.trajectory
    if traj is not None:
        nio.write_trajectory(directory / nio.TRAJECTORY_FILE, traj)
        names.append(nio.TRAJECTORY_FILE)
        by_t = {round(r.t, 15): r for r in out.reports}
        rows = []
        bal = out.balances or [None] * len(traj.snapshots)
        for snap, b in zip(traj.snapshots, bal):
            r = by_t.get(round(snap.t, 15))
            nan = float("nan")
            rows.append({
                "t": snap.t, "mass": float(np.sum(snap.rho) * snap.grid.dx),
                "ballistic": b.ballistic_energy if b else nan,
                "dissipation": b.dissipation if b else nan, "rhs": b.rhs if b else nan,
                "margin": b.inequality_margin if b else nan,
                "min_theta": float(min(snap.theta.min(), snap.theta_b.min())),
                "bound": r.bound if r else nan, "V_min": r.V_min if r else nan,
            })
        nio.write_rows(directory / nio.DIAGNOSTICS_FILE, nio.DIAGNOSTICS_COLUMNS, rows)
        names.append(nio.DIAGNOSTICS_FILE)
    if out.reports:
        nio.write_rows(directory / nio.MINPRINCIPLE_FILE, nio.MINPRINCIPLE_COLUMNS,
                       [r.row() for r in out.reports])
        names.append(nio.MINPRINCIPLE_FILE)
    if out.oracle is not None:
        o = out.oracle
        nio.write_rows(directory / nio.ORACLE_FILE, ("x", "theta", "theta_oracle"),
                       [{"x": x, "theta": a, "theta_oracle": b}
                        for x, a, b in zip(o["x"], o["theta"], o["theta_oracle"])])
        names.append(nio.ORACLE_FILE)
    if traj is not None and traj.failure is not None:
        nio.write_json(directory / nio.STATUS_FILE, {"status": out.status,
                                                     **traj.failure.as_dict()})
        names.append(nio.STATUS_FILE)
    elif out.exit_code != EXIT_OK:
        nio.write_json(directory / nio.STATUS_FILE, {"status": out.status,
                                                     "messages": out.messages})
        names.append(nio.STATUS_FILE)
    if cfg.output.plots and traj is not None and len(traj.snapshots) >= 2:
        from .plotting import plot_run
        names += [p.name for p in plot_run(directory)]
    files = nio.inventory(directory, names)
    nio.write_json(directory / nio.MANIFEST_FILE, manifest_data(out, files))
    return names + [nio.MANIFEST_FILE]


def _load(path) -> RunConfig:
    return parse_config(path)


def _report_config_error(exc: ConfigError):
    print("configuration error:", file=sys.stderr)
    for e in exc.errors:
        print(f"  - {e}", file=sys.stderr)


def cmd_run(args) -> int:
    try:
        cfg = _load(args.config)
    except ConfigError as exc:
        _report_config_error(exc)
        return EXIT_CONFIG
    try:
        out = execute(cfg)
    except ScenarioError as exc:
        _report_config_error(ConfigError([str(exc)]))
        return EXIT_CONFIG
    directory = Path(args.out or cfg.output.directory)
    write_artifacts(out, directory)
    for m in out.messages:
        print(m, file=sys.stderr)
    summary = f"status={out.status} exit={out.exit_code}"
    if out.reports:
        summary += f" V_min={out.V_min:.6e}"
    if out.schedule is not None:
        summary += f" M={out.schedule.M:.6g} Y0={out.schedule.Y0:.6g}"
    print(summary)
    print(f"artifacts written to {directory}")
    return out.exit_code


def _sweep_member(cfg, eps, delta, n_cells) -> dict:
    if isinstance(cfg, str):
        cfg = parse_config_text(cfg)
    cfg = cfg.override("regularization", eps=eps, delta=delta)
    cfg = cfg.override("grid", n_cells=n_cells)
    cfg = cfg.override("output", plots=False)
    try:
        out = execute(cfg)
    except ScenarioError as exc:
        return {"eps": eps, "delta": delta, "n_cells": n_cells, "V_min": float("nan"),
                "min_margin_theta": float("nan"), "final_margin": float("nan"), "steps": 0,
                "status": f"config: {exc}", "exit": EXIT_CONFIG}
    steps = out.trajectory.steps if out.trajectory is not None else 0
    return {"eps": eps, "delta": delta, "n_cells": n_cells, "V_min": out.V_min,
            "min_margin_theta": out.min_theta_margin, "final_margin": out.final_margin,
            "steps": steps, "status": out.status, "exit": out.exit_code}


def worker_count(cfg: RunConfig) -> int:
    env = os.environ.get("NSF_WORKERS")
    if env:
        return max(1, int(env))
    if cfg.sweep.workers:
        return cfg.sweep.workers
    return os.cpu_count() or 1


def sweep_members(cfg: RunConfig) -> list:
    sw = cfg.sweep
    eps = sw.eps or (cfg.regularization.eps,)
    delta = sw.delta or (cfg.regularization.delta,)
    cells = tuple(int(n) for n in sw.n_cells) or (cfg.grid.n_cells,)
    return list(itertools.product(eps, delta, cells))


def run_sweep(cfg: RunConfig, workers: int = 1) -> list:
    members = sweep_members(cfg)
    if workers <= 1:
        return [_sweep_member(cfg, *m) for m in members]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        # section classes are built at runtime, so workers get INI text
        text = render_config(cfg.as_dict())
        futures = [pool.submit(_sweep_member, text, *m) for m in members]
        return [f.result() for f in futures]


def sweep_exit(rows) -> int:
    codes = [r["exit"] for r in rows]
    return max(codes) if codes else EXIT_OK


def cmd_sweep(args) -> int:
    try:
        cfg = _load(args.config)
    except ConfigError as exc:
        _report_config_error(exc)
        return EXIT_CONFIG
    sw = cfg.sweep
    if not (sw.eps or sw.delta or sw.n_cells):
        _report_config_error(ConfigError(["[sweep] needs at least one nonempty list "
                                          "(eps, delta or n_cells)"]))
        return EXIT_CONFIG
    rows = run_sweep(cfg, worker_count(cfg))
    directory = Path(args.out or cfg.output.directory)
    directory.mkdir(parents=True, exist_ok=True)
    nio.write_rows(directory / nio.SWEEP_FILE, nio.SWEEP_COLUMNS, rows)
    for r in rows:
        print(f"eps={r['eps']:<8g} delta={r['delta']:<8g} n={r['n_cells']:<5d} "
              f"V_min={r['V_min']:.4e} status={r['status']}")
    code = sweep_exit(rows)
    print(f"sweep summary written to {directory / nio.SWEEP_FILE}; exit={code}")
    return code


def cmd_plot(args) -> int:
    from .plotting import MissingArtifacts, plot_run
    try:
        paths = plot_run(args.directory)
    except MissingArtifacts as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    for p in paths:
        print(p)
    return EXIT_OK


def cmd_check_eos(args) -> int:
    from .mollifier import excess_rate_study, make_kernel, mollify, verify_mollified
    try:
        cfg = _load(args.config)
    except ConfigError as exc:
        _report_config_error(exc)
        return EXIT_CONFIG
    base = build_structural(cfg)
    report = check_structural(GasEOS(base, cfg.eos.a), build_laws(cfg))
    c = report.constants
    print(f"structural function: {base.name}")
    print(f"kappa_ratio_lo = {c.kappa_ratio_lo:.6g} (at theta = {c.kappa_ratio_argmin:.3g})")
    print(f"kappa_ratio_hi = {c.kappa_ratio_hi:.6g}")
    print(f"Lambda = {c.Lambda:.6g} (at theta = {c.Lambda_argmin:.3g})")
    print(f"P_bar = {c.P_bar:.6g}")
    if report.ok:
        print(f"M ({cfg.checks.M_variant}) = {derive_M(c, cfg.checks.M_variant):.6g}")
    for v in report.violations:
        print(f"VIOLATION {v.hypothesis}: {v.message} ({v.count} points, e.g. {v.worst})")
    for n in report.notes:
        print(f"note: {n}")
    m = cfg.mollify
    study = excess_rate_study(base, z_max=m.z_max, n=m.points)
    molly = mollify(base, make_kernel(m.delta))
    pres = verify_mollified(base, molly, np.linspace(m.delta, m.z_max, m.points),
                            slope_C=study.slope_C)
    print(f"mollifier delta = {m.delta:g}")
    for name, ok in pres.checks.items():
        print(f"  {name:<12s} {'pass' if ok else 'FAIL'}")
    ratios = ", ".join(f"{r:.3f}" for r in study.ratios)
    print(f"  excess ratios per halving: {ratios} (window {study.window}); "
          f"fitted order {study.order:.2f} -> {'pass' if study.ok else 'FAIL'}")
    return EXIT_OK if report.ok else EXIT_HYPOTHESIS


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="nsf", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("run", help="run one scenario and write its artifacts")
    p.add_argument("config")
    p.add_argument("--out", help="output directory (overrides [output] directory)")
    p.set_defaults(func=cmd_run)
    p = sub.add_parser("sweep", help="run the eps/delta/grid cross product")
    p.add_argument("config")
    p.add_argument("--out", help="output directory (overrides [output] directory)")
    p.set_defaults(func=cmd_sweep)
    p = sub.add_parser("plot", help="render SVG figures of a run directory")
    p.add_argument("directory")
    p.set_defaults(func=cmd_plot)
    p = sub.add_parser("check-eos", help="scan structural hypotheses and mollifier checks")
    p.add_argument("config")
    p.set_defaults(func=cmd_check_eos)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
