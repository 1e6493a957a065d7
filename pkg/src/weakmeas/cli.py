"""Command-line driver: reproduce the standard experiments as CSV/JSON.

Subcommands: trajectory, ensemble, sweep, goalprog, discord.  Every output
file starts with a comment line carrying the tool version, the hash of the
canonical configuration, and the master seed; runs with the same
configuration are byte-identical regardless of worker count.

Column conventions: trajectory/ensemble files use absolute time (units of
the inverse Rabi amplitude); sweep/goalprog files use time in Rabi periods.
Fidelity-based confidence/backaction are emitted both raw and as
one-minus-value; infinities are written as the token ``inf``.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from . import __version__
from .config import (SCENARIOS, ConfigError, ExperimentConfig,
                     apply_env_overrides, config_hash, effective_kappa,
                     parse_file)
from .discord import RouteDisagreementError, discord_lower_bound, \
    povm_confidence, random_basis
from .dynamics import SimConfig, run_ensemble_filter, run_trajectory
from .ensemble import run_ensemble
from .goalprog import GoalConfig, GoalResult, sweep as goal_sweep, \
    surfaces as me2_surfaces
from .metrics import series_from_bloch
from .qstate import StateValidityError, left_state, maximally_mixed, random_state

TRAJECTORY_COLUMNS = ["t", "P_L_real", "P_L_est", "P_L_ideal", "C_fid",
                      "B_fid", "one_minus_C_fid", "one_minus_B_fid", "C_re",
                      "B_re", "E_re"]
ENSEMBLE_EXTRA_COLUMNS = ["P_L_real_stderr", "P_L_est_stderr", "C_fid_stderr",
                          "B_fid_stderr", "C_re_stderr", "B_re_stderr",
                          "E_re_stderr", "C_fid_mom", "B_fid_mom", "C_re_mom",
                          "B_re_mom", "E_re_mom"]
SWEEP_COLUMNS = ["t", "kappa", "C_re", "B_re", "E_re", "cross"]
GOALPROG_COLUMNS = ["t", "kappa", "O", "d1p", "d1m", "d2p", "d2m"]
DISCORD_COLUMNS = ["state", "basis", "theta", "phi", "confidence", "discord"]

# default weight/target cases for the goal program
GOALPROG_CASES = (
    ("a", 1.0, 1.0, 0.1, 0.1),
    ("b", 1.0, 1.0, 0.2, 0.2),
    ("c", 1.0, 0.5, 0.1, 0.1),
    ("d", 0.5, 1.0, 0.1, 0.1),
)


def _fmt(value) -> str:
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    v = float(value)
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return repr(v)


def _write_csv(path: str, header_comment: str, names: list[str],
               columns: list[np.ndarray]) -> None:
    n = len(columns[0])
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(header_comment + "\n")
        fh.write(",".join(names) + "\n")
        for i in range(n):
            fh.write(",".join(_fmt(col[i]) for col in columns) + "\n")


def _header(cfg: ExperimentConfig) -> str:
    return (f"# weakmeas {__version__} scenario={cfg.scenario} "
            f"config={config_hash(cfg)} seed={cfg.seed} "
            f"format_version={cfg.format_version}")


def _sim_config(cfg: ExperimentConfig, periods: float | None = None,
                kappa: float | None = None) -> SimConfig:
    return SimConfig.from_periods(
        periods=cfg.periods if periods is None else periods,
        steps_per_period=cfg.steps_per_period,
        omega=cfg.omega, epsilon=cfg.epsilon,
        kappa=effective_kappa(cfg) if kappa is None else kappa,
        seed=cfg.seed, points=cfg.points)


def cmd_trajectory(cfg: ExperimentConfig) -> str:
    sim = _sim_config(cfg)
    rec = run_trajectory(sim, left_state(), maximally_mixed(2))
    ms = series_from_bloch(rec.times, rec.bloch_R, rec.bloch_E, rec.bloch_I)
    cols = [rec.times,
            0.5 * (1.0 + rec.bloch_R[:, 2]),
            0.5 * (1.0 + rec.bloch_E[:, 2]),
            0.5 * (1.0 + rec.bloch_I[:, 2]),
            ms.confidence_fid, ms.backaction_fid,
            1.0 - ms.confidence_fid, 1.0 - ms.backaction_fid,
            ms.confidence_re, ms.backaction_re, ms.epitome_re]
    path = os.path.join(cfg.out, "trajectory.csv")
    _write_csv(path, _header(cfg), TRAJECTORY_COLUMNS, cols)
    return path


def cmd_ensemble(cfg: ExperimentConfig) -> str:
    sim = _sim_config(cfg)
    res = run_ensemble(sim, cfg.realizations, left_state(), maximally_mixed(2),
                       workers=cfg.workers)
    mm = res.metrics_mean
    mom = res.metrics_of_mean
    names = list(TRAJECTORY_COLUMNS) + list(ENSEMBLE_EXTRA_COLUMNS)
    cols = [res.times,
            res.p_l_real, res.p_l_est,
            0.5 * (1.0 + res.bloch_ideal[:, 2]),
            mm.confidence_fid, mm.backaction_fid,
            1.0 - mm.confidence_fid, 1.0 - mm.backaction_fid,
            mm.confidence_re, mm.backaction_re, mm.epitome_re,
            res.p_l_real_stderr, res.p_l_est_stderr,
            mm.confidence_fid_stderr, mm.backaction_fid_stderr,
            mm.confidence_re_stderr, mm.backaction_re_stderr,
            mm.epitome_re_stderr,
            mom.confidence_fid, mom.backaction_fid,
            mom.confidence_re, mom.backaction_re, mom.epitome_re]
    if cfg.compare_me2:
        _, _, bloch_me2 = run_ensemble_filter(sim, left_state(), maximally_mixed(2))
        names = names + ["P_L_me2"]
        cols = cols + [0.5 * (1.0 + bloch_me2[:, 2])]
    path = os.path.join(cfg.out, "ensemble.csv")
    _write_csv(path, _header(cfg), names, cols)
    return path


def _sweep_template(cfg: ExperimentConfig) -> SimConfig:
    return SimConfig.from_periods(
        periods=cfg.t_max_periods, steps_per_period=cfg.steps_per_period,
        omega=cfg.omega, epsilon=cfg.epsilon, kappa=cfg.kappa_max,
        seed=cfg.seed, points=cfg.points)


def cmd_sweep(cfg: ExperimentConfig) -> str:
    t_grid = np.linspace(0.0, cfg.t_max_periods, cfg.t_points)
    kappa_grid = np.linspace(cfg.kappa_min, cfg.kappa_max, cfg.kappa_points)
    surf = me2_surfaces(t_grid, kappa_grid, _sweep_template(cfg))
    n_t, n_k = len(t_grid), len(kappa_grid)
    rows_t = np.tile(t_grid, n_k)
    rows_k = np.repeat(kappa_grid, n_t)
    cross = np.zeros((n_k, n_t), dtype=np.int64)
    for j, idx in enumerate(surf.crossing_index):
        if idx >= 0:
            cross[j, idx] = 1
    cols = [rows_t, rows_k, surf.confidence.ravel(), surf.backaction.ravel(),
            surf.epitome.ravel(), cross.ravel()]
    path = os.path.join(cfg.out, "sweep.csv")
    _write_csv(path, _header(cfg), SWEEP_COLUMNS, cols)
    return path


def cmd_goalprog(cfg: ExperimentConfig) -> str:
    t_grid = np.linspace(0.0, cfg.t_max_periods, cfg.t_points)
    kappa_grid = np.linspace(cfg.kappa_min, cfg.kappa_max, cfg.kappa_points)
    if cfg.eta1 is not None:
        missing = [k for k in ("eta2", "delta_c", "delta_b")
                   if getattr(cfg, k) is None]
        if missing:
            raise ConfigError(f"custom goalprog case needs {missing}")
        cases = [("custom", cfg.eta1, cfg.eta2, cfg.delta_c, cfg.delta_b)]
    else:
        cases = list(GOALPROG_CASES)

    surf = me2_surfaces(t_grid, kappa_grid, _sweep_template(cfg))
    summary = {"tool": f"weakmeas {__version__}", "config": config_hash(cfg),
               "seed": cfg.seed, "cases": {}}
    n_t, n_k = len(t_grid), len(kappa_grid)
    rows_t = np.tile(t_grid, n_k)
    rows_k = np.repeat(kappa_grid, n_t)
    last_path = ""
    for name, eta1, eta2, delta_c, delta_b in cases:
        gcfg = GoalConfig(eta1=eta1, eta2=eta2, delta_c=delta_c,
                          delta_b=delta_b, t_grid=t_grid, kappa_grid=kappa_grid)
        d1p = np.maximum(surf.confidence - delta_c, 0.0)
        d1m = np.maximum(delta_c - surf.confidence, 0.0)
        d2p = np.maximum(surf.backaction - delta_b, 0.0)
        d2m = np.maximum(delta_b - surf.backaction, 0.0)
        result = GoalResult(config=gcfg, surfaces=surf,
                            objective=eta1 * d1p + eta2 * d2p,
                            d1_plus=d1p, d1_minus=d1m, d2_plus=d2p, d2_minus=d2m)
        cols = [rows_t, rows_k, result.objective.ravel(), d1p.ravel(),
                d1m.ravel(), d2p.ravel(), d2m.ravel()]
        last_path = os.path.join(cfg.out, f"goalprog_{name}.csv")
        _write_csv(last_path, _header(cfg), GOALPROG_COLUMNS, cols)
        box = result.best_bounding_box()
        summary["cases"][name] = {
            "eta1": eta1, "eta2": eta2, "delta_c": delta_c, "delta_b": delta_b,
            "best_set": box if box is not None else {"n_best": 0},
        }
    summary_path = os.path.join(cfg.out, "goalprog_summary.json")
    with open(summary_path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return last_path


def cmd_discord(cfg: ExperimentConfig) -> str:
    rng = np.random.Generator(np.random.Philox(
        key=(cfg.seed & 0xFFFFFFFFFFFFFFFF, 0x9E3779B9)))
    col_state, col_basis = [], []
    col_theta, col_phi, col_conf, col_disc = [], [], [], []
    for s in range(cfg.states):
        rho = random_state(4, rng)
        bound, _ = discord_lower_bound(rho, resolution=cfg.resolution)
        for b in range(cfg.bases):
            basis = random_basis(rng)
            col_state.append(s)
            col_basis.append(b)
            col_theta.append(basis.theta)
            col_phi.append(basis.phi)
            col_conf.append(povm_confidence(rho, basis))
            col_disc.append(bound)
    path = os.path.join(cfg.out, "discord.csv")
    _write_csv(path, _header(cfg), DISCORD_COLUMNS,
               [np.array(col_state), np.array(col_basis), np.array(col_theta),
                np.array(col_phi), np.array(col_conf), np.array(col_disc)])
    return path


_COMMANDS = {
    "trajectory": cmd_trajectory,
    "ensemble": cmd_ensemble,
    "sweep": cmd_sweep,
    "goalprog": cmd_goalprog,
    "discord": cmd_discord,
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="weakmeas",
        description="Continuous weak measurement experiments for a double-dot qubit")
    sub = parser.add_subparsers(dest="scenario", required=True)
    for name in SCENARIOS:
        p = sub.add_parser(name)
        p.add_argument("--config", metavar="PATH", help="INI configuration file")
        p.add_argument("--seed", type=int, help="master seed")
        p.add_argument("--out", metavar="DIR", help="output directory")
        p.add_argument("--fast", action="store_true",
                       help="10000 integration steps per Rabi period instead of 150000")
        p.add_argument("--workers", type=int, help="worker thread cap")
        if name in ("trajectory", "ensemble"):
            p.add_argument("--kappa", type=float, help="measurement strength")
            p.add_argument("--periods", type=float, help="run length in Rabi periods")
        if name == "ensemble":
            p.add_argument("--realizations", type=int, help="ensemble size")
            p.add_argument("--compare-me2", action="store_true",
                           help="append the nonstochastic-estimator population column")
    return parser


def _resolve_config(args: argparse.Namespace) -> ExperimentConfig:
    if args.config:
        cfg = parse_file(args.config, args.scenario)
    else:
        cfg = ExperimentConfig(scenario=args.scenario)
    cfg = apply_env_overrides(cfg)
    updates = {}
    for flag, key in (("seed", "seed"), ("out", "out"), ("workers", "workers"),
                      ("kappa", "kappa"), ("periods", "periods"),
                      ("realizations", "realizations")):
        value = getattr(args, flag, None)
        if value is not None:
            updates[key] = value
    if updates.get("kappa") is not None:
        # an explicit strength beats configured detector parameters
        updates["transparency"] = None
    if getattr(args, "compare_me2", False):
        updates["compare_me2"] = True
    if args.fast:
        updates["steps_per_period"] = 10000
    if updates:
        from dataclasses import replace
        cfg = replace(cfg, **updates)
    return cfg


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cfg = _resolve_config(args)
        os.makedirs(cfg.out, exist_ok=True)
        path = _COMMANDS[cfg.scenario](cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (StateValidityError, RouteDisagreementError, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
