"""Command-line front end: ``ccpb solve|limits|sweep|nonneutral|verify``."""
from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import verify as verify_mod
from .asymptotics import nonneutral_checks
from .config import ConfigError, ExperimentConfig, load_config
from .limits import c_star_bracket, c_star_neutral, gamma_sweep, solve_tc
from .presets import PRESETS, get_preset
from .solver import solve

log = logging.getLogger("ccpb")

SOLUTION_HEADER = ["x", "phi"]
SUMMARY_HEADER = ["eps", "phi0", "phi1", "iters", "c_eps"]
LIMITS_HEADER = ["gamma", "t", "c", "t_minus_c", "c_star_neutral", "c_star_bracket"]
DIAG_HEADER = ["check", "value", "reference", "tolerance", "passed", "advisory"]


def fmt(v, precision: int = 6) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return f"{float(v):.{precision}g}"


def write_csv(path: Path, header, rows, precision: int = 6) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([c if isinstance(c, str) else fmt(c, precision) for c in row])
    return path


def _eps_tag(eps: float) -> str:
    k = -np.log2(eps)
    return f"eps2m{int(round(k))}" if abs(k - round(k)) < 1e-12 else f"eps{eps:.6g}"


def _map(fn, items, workers: int):
    if workers <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _solve_item(item):
    cfg, label, model, eps = item
    blk = next(s for s in cfg.species if s.label == label)
    rep = solve(blk.system(), cfg.boundary(eps), eps, cfg.grid.build(eps), cfg.solver.build(), model)
    return label, model, eps, rep


def cmd_solve(cfg: ExperimentConfig, out: Path, workers: int = 1) -> int:
    items = [(cfg, s.label, m, e) for s in cfg.species for m in cfg.models for e in cfg.eps]
    results = _map(_solve_item, items, workers)
    prec = cfg.outputs.precision
    status = 0
    summary: dict = {}
    for label, model, eps, rep in results:
        stem = f"{cfg.outputs.prefix}{cfg.name}_{label}_{model}"
        write_csv(out / f"{stem}_{_eps_tag(eps)}.csv", SOLUTION_HEADER,
                  zip(rep.field.x, rep.phi), prec)
        summary.setdefault(stem, []).append(
            (eps, rep.field.at(0.0), rep.phi[-1], rep.iterations, rep.first_integral_constant))
        print(f"{label} {model} eps={eps:g}: phi(0)={rep.field.at(0.0):.4f} "
              f"phi(1)={rep.phi[-1]:.4f} iters={rep.iterations} converged={rep.converged}")
        if not rep.converged:
            status = 2
            print(f"  not converged: {rep.message} (final delta {rep.final_delta_sup:.3e})",
                  file=sys.stderr)
    for stem, rows in summary.items():
        write_csv(out / f"{stem}_summary.csv", SUMMARY_HEADER, rows, prec)
    return status


def _limit_rows(sys_, phi_plus, gammas):
    cs = c_star_neutral(sys_, phi_plus)
    rows = []
    for g in gammas:
        p = solve_tc(sys_, phi_plus, float(g))
        rows.append((p.gamma, p.t, p.c, p.t_minus_c, cs, c_star_bracket(p.t)))
    return rows


def cmd_limits(cfg: ExperimentConfig, out: Path, workers: int = 1) -> int:
    gammas = cfg.gamma_values()
    if np.any(~np.isfinite(gammas)):
        raise ConfigError("eta_rule gives gamma = inf; pass explicit gammas")
    for blk in cfg.species:
        rows = _limit_rows(blk.system(), cfg.phi_plus, gammas)
        write_csv(out / f"{cfg.outputs.prefix}{cfg.name}_{blk.label}_limits.csv",
                  LIMITS_HEADER, rows, cfg.outputs.precision)
        for r in rows:
            print(f"{blk.label} gamma={r[0]:g}: t={r[1]:.4f} c={r[2]:.4f} "
                  f"c*={r[4]:.4f} c_*={r[5]:.4f}")
    return 0


def _sweep_item(item):
    cfg, label = item
    blk = next(s for s in cfg.species if s.label == label)
    return label, gamma_sweep(blk.system(), cfg.phi_plus, cfg.gamma_values())


def cmd_sweep(cfg: ExperimentConfig, out: Path, workers: int = 1) -> int:
    results = _map(_sweep_item, [(cfg, s.label) for s in cfg.species], workers)
    for label, tab in results:
        rows = [(g, t, c, t - c, tab.c_star, c_star_bracket(t))
                for g, t, c in zip(tab.gamma, tab.t, tab.c)]
        write_csv(out / f"{cfg.outputs.prefix}{cfg.name}_{label}_sweep.csv",
                  LIMITS_HEADER, rows, cfg.outputs.precision)
        print(f"{label}: monotone_t={str(tab.monotone_t).lower()} "
              f"monotone_tc={str(tab.monotone_tc).lower()} c_extrema={len(tab.c_extrema)}")
    return 0


def cmd_nonneutral(cfg: ExperimentConfig, out: Path, workers: int = 1) -> int:
    status = 0
    for blk in cfg.species:
        sys_ = blk.system()
        if len(sys_.anions) != 1 or len(sys_.cations) != 1 or sys_.a[0] != 1 or sys_.b[0] != 1:
            raise ConfigError("nonneutral runs need one monovalent anion and one monovalent cation")
        alpha, beta = float(sys_.alpha[0]), float(sys_.beta[0])
        if not alpha < beta:
            raise ConfigError(f"need alpha < beta (got {alpha:g}, {beta:g}); "
                              "swap the anion and cation roles")
        for eps in cfg.eps:
            rep = solve(sys_, cfg.boundary(eps), eps, cfg.grid.build(eps), cfg.solver.build())
            if not rep.converged:
                print(f"not converged: {rep.message}", file=sys.stderr)
                return 2
            for kappa in cfg.kappa:
                diag = nonneutral_checks(rep.field, alpha, beta, eps, kappa)
                rows = [(c.name, c.value, c.reference, c.tolerance, c.passed, c.advisory)
                        for c in diag.checks]
                rows.append(("lambda_eps", diag.extra["lambda_eps"], 0.0, float("nan"), True, True))
                write_csv(out / f"{cfg.outputs.prefix}{cfg.name}_{blk.label}_{_eps_tag(eps)}"
                          f"_kappa{kappa:g}.csv", DIAG_HEADER, rows, cfg.outputs.precision)
                print(f"{blk.label} eps={eps:g} kappa={kappa:g}")
                for line in diag.lines():
                    print("  " + line)
                if not diag.passed:
                    status = 1
    return status


COMMANDS = {"solve": cmd_solve, "limits": cmd_limits, "sweep": cmd_sweep,
            "nonneutral": cmd_nonneutral}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ccpb", description=__doc__)
    p.add_argument("command", nargs="?", choices=[*COMMANDS, "verify"])
    p.add_argument("--preset", help="named experiment (see --list-presets)")
    p.add_argument("--config", help="JSON experiment config")
    p.add_argument("--out", default="ccpb_out", help="output directory (default: ccpb_out)")
    p.add_argument("--workers", type=int, default=1, help="parallel worker processes")
    p.add_argument("--list-presets", action="store_true", help="print preset names and exit")
    p.add_argument("--dump-config", action="store_true", help="print the resolved config as JSON")
    p.add_argument("--list", action="store_true", help="verify: print the check inventory only")
    p.add_argument("--golden", help="verify: reference-value JSON (default: bundled)")
    p.add_argument("--only", action="append", metavar="CHECK",
                   help="verify: run only this check (repeatable)")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def _resolve(args) -> ExperimentConfig:
    if args.preset and args.config:
        raise ConfigError("give either --preset or --config, not both")
    if args.config:
        return load_config(args.config)
    if args.preset:
        return get_preset(args.preset)
    raise ConfigError("need --preset or --config")


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.list_presets:
        for name, cfg in PRESETS.items():
            print(f"{name:16s} {cfg.command:10s} {cfg.description}")
        return 0
    if args.command == "verify":
        if args.list:
            for chk in verify_mod.CHECKS:
                print(f"{chk.name:28s} {'advisory' if chk.advisory else 'required'}  {chk.doc}")
            return 0
        known = {c.name for c in verify_mod.CHECKS}
        unknown = sorted(set(args.only or ()) - known)
        if unknown:
            print(f"error: unknown check(s) {unknown}; see --list", file=sys.stderr)
            return 2
        try:
            golden = verify_mod.load_golden(args.golden)
        except (OSError, ValueError) as exc:
            print(f"error: cannot read golden file: {exc}", file=sys.stderr)
            return 2
        return verify_mod.run(golden, out=sys.stdout, names=args.only)
    if args.command is None and not args.dump_config:
        build_parser().print_usage(sys.stderr)
        return 2
    try:
        cfg = _resolve(args)
        if args.dump_config:
            print(cfg.dumps())
            return 0
        if cfg.command != args.command:
            print(f"note: config {cfg.name!r} is a {cfg.command} preset; running {args.command}",
                  file=sys.stderr)
        return COMMANDS[args.command](cfg, Path(args.out), max(1, args.workers))
    except (ConfigError, KeyError, ValueError, ArithmeticError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
