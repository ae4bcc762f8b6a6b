"""``adiastab`` command line: spectra, verify, sweep and mincut.

Exit status: 0 when every applicable check passes (skips allowed), 1 on any
failed inequality or integrator failure, 2 on configuration/usage errors.
"""

import argparse
import os
import sys

import numpy as np

from . import __version__
from .bounds import (
    SCHEMA,
    lemma_checks,
    rhs_all,
    rhs_static,
    stoquastic_corollary,
    sweep_constants,
)
from .checks import count
from .exceptions import AdiastabError, ConfigError, CutSizeError, StepBudgetError
from .io import dumps, load_config, write_csv, write_json
from .linalg import matrix_to_json
from .propagators import NAMES, evolve, grid_snapshots
from .stoquastic import balance_and_gamma_tilde, canonical_cut, cut_profile, min_cut

SPECTRA_COLUMNS = (
    "s", "lambda", "lambda_1", "lambda_max", "gamma", "mu", "mu1", "mubar", "mubar1", "Gamma_S",
    "Gamma_Sbar", "h", "lambda_S", "kappa", "c", "eta", "norm_Delta", "norm_Delta_perp", "mass_S",
    "mass_Sbar", "rank_P_mu", "rank_P_mubar", "rank_Pi", "support_on_S",
)
SWEEP_COLUMNS = (
    "member", "T", "s", "h", "Gamma_S", "Gamma_Sbar", "gamma", "kappa", "c", "eta", "B", "C",
    "tunnel_term", "adiab_term", "rhs_main_s", "static_term",
)
SWEEP_SUMMARY_COLUMNS = (
    "member", "T", "rhs_main", "rhs_tunnel", "rhs_adiab", "rhs_static", "rhs_folk", "rhs_stoq",
    "lhs_main", "lhs_tunnel", "lhs_adiab", "lhs_static", "eps_T", "T_star",
)

EPILOG = """\
config (JSON):
  family        {"generator": name, "params": {...}} or {"file": path}
                generators: double-well, rotating-block, random-graded,
                transverse-chain, static, diagonal, frustrated-triangle
  grading       index list for S, or "search" (min-cut); default: generator's
  T             number, list, or {"logspace": [a, b, n]}
  s_grid        point count (default 257) or increasing list from 0 to 1
  tolerances    overrides, e.g. {"step": 1e-8}
  seed          integer root seed
  ensemble      member count (random-graded only)
  out, bounds_only, q_matrix, self_check, stoquastic ("auto"|true|false),
  cut, max_dim, cut_grid, dump_unitaries

outputs:
  spectra  spectra.json, spectra.csv with columns
           member + """ + ", ".join(SPECTRA_COLUMNS) + """
  verify   verify.json (BoundReports, lemma checks), verify.csv (one row per check)
  sweep    sweep.json, sweep.csv (long form over (T, s)), sweep_summary.csv
  mincut   mincut.json
Without an output directory the JSON document goes to stdout.
ADIASTAB_MAX_STEPS overrides the integrator step budget.
"""


def build_parser():
    p = argparse.ArgumentParser(
        prog="adiastab",
        description="Numerical checks of graded adiabatic bounds.",
        epilog=EPILOG,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("command", choices=("spectra", "verify", "sweep", "mincut"))
    p.add_argument("--config", required=True, help="experiment config (JSON)")
    p.add_argument("--out", help="output directory (overrides config)")
    p.add_argument("--bounds-only", action="store_true", help="skip propagation; eps_T taken as 0")
    p.add_argument("--dump-unitaries", action="store_true", help="write final propagators (verify)")
    p.add_argument("--cut", help="explicit cut, e.g. 0,1")
    p.add_argument("--q-matrix", choices=("full", "block"), help="matrix used for Q")
    p.add_argument("--seed", type=int, help="seed (overrides config)")
    return p


def _parse_cut(text):
    try:
        idx = [int(x) for x in text.split(",") if x.strip() != ""]
    except ValueError:
        raise ConfigError("--cut", f"expected comma-separated integers, got {text!r}") from None
    if not idx:
        raise ConfigError("--cut", "empty cut")
    return sorted(set(idx))


def _apply_overrides(cfg, args):
    if args.out is not None:
        cfg.out = args.out
    if args.bounds_only:
        cfg.bounds_only = True
    if args.dump_unitaries:
        cfg.dump_unitaries = True
    if args.cut is not None:
        cfg.cut = _parse_cut(args.cut)
    if args.q_matrix is not None:
        cfg.q_matrix = args.q_matrix
    if args.seed is not None:
        if args.seed < 0:
            raise ConfigError("--seed", "must be nonnegative")
        cfg.seed = args.seed
    return cfg


def _families(cfg):
    fams = cfg.families()
    for f in fams:
        if cfg.cut is not None and max(cfg.cut) >= f.dim:
            raise ConfigError("cut", f"index {max(cfg.cut)} out of range for N = {f.dim}")
    if cfg.grading == "search":
        out = []
        for f in fams:
            if cfg.cut is not None:
                S = canonical_cut(cfg.cut, f.dim)
            else:
                S = min_cut(f, cfg.cut_grid, max_dim=cfg.max_dim).best_cut
            out.append(f.regrade(S))
        fams = out
    return fams


def _grid(cfg, uniform=False):
    if uniform and not np.isscalar(cfg.s_grid):
        raise ConfigError("s_grid", "verify and sweep report on a uniform grid; give a point count")
    return np.linspace(0.0, 1.0, cfg.s_grid) if np.isscalar(cfg.s_grid) else np.asarray(cfg.s_grid)


def _emit(cfg, name, doc, csvs=()):
    if cfg.out:
        os.makedirs(cfg.out, exist_ok=True)
        write_json(os.path.join(cfg.out, name + ".json"), doc)
        for fname, header, rows in csvs:
            write_csv(os.path.join(cfg.out, fname), header, rows)
        print(f"wrote {os.path.join(cfg.out, name + '.json')}", file=sys.stderr)
    else:
        sys.stdout.write(dumps(doc))


def _config_echo(cfg):
    return {
        "family": cfg.family, "grading": cfg.grading, "T": cfg.T, "s_grid": cfg.s_grid,
        "tolerances": cfg.tolerances, "seed": cfg.seed, "bounds_only": cfg.bounds_only,
        "q_matrix": cfg.q_matrix, "self_check": cfg.self_check, "stoquastic": cfg.stoquastic,
        "cut": cfg.cut, "ensemble": cfg.ensemble,
    }


# -- commands ----------------------------------------------------------------------------

def cmd_spectra(cfg):
    grid = _grid(cfg)
    members, rows = [], []
    for i, fam in enumerate(_families(cfg)):
        snaps = grid_snapshots(fam, grid)
        table = [sn.scalars() for sn in snaps]
        members.append({"family": fam.name, "grading": list(fam.grading.s_indices), "rows": table})
        rows += [[i] + [r[c] for c in SPECTRA_COLUMNS] for r in table]
    doc = {"schema": SCHEMA, "command": "spectra", "config": _config_echo(cfg), "members": members}
    _emit(cfg, "spectra", doc, [("spectra.csv", ("member",) + SPECTRA_COLUMNS, rows)])
    return 0


def _verify_member(cfg, fam):
    out = {"family": fam.name, "grading": list(fam.grading.s_indices), "reports": [], "errors": []}
    grid = _grid(cfg, uniform=True)
    lem = lemma_checks(fam, cfg.cut_grid)
    out["lemmas"] = {"checks": [c.to_json() for c in lem], "counts": count(lem)}
    checks = list(lem)
    snaps = grid_snapshots(fam, grid)
    consts = sweep_constants(fam, grid, snaps)
    stoq_auto = cfg.stoquastic is True or (
        cfg.stoquastic == "auto" and all(balance_and_gamma_tilde(fam.A(s)).balanced for s in grid[:: max(1, len(grid) // 16)])
    )
    for T in cfg.T:
        props = None
        if not cfg.bounds_only:
            try:
                props = evolve(fam, T, NAMES, tol_step=fam.tol.step, n_report=len(grid))
            except StepBudgetError as e:
                out["errors"].append({"T": T, "error": str(e)})
                continue
        rep = rhs_all(fam, T, props=props, bounds_only=cfg.bounds_only, tol_step=fam.tol.step,
                      n_report=len(grid), q_matrix=cfg.q_matrix, self_check=cfg.self_check,
                      snaps=snaps, consts=consts, stoq=stoq_auto)
        doc = rep.to_json()
        if cfg.dump_unitaries and props is not None:
            doc["unitaries"] = {name: matrix_to_json(props.final(name)) for name in props.names}
        out["reports"].append(doc)
        checks += rep.checks
        if cfg.stoquastic is True:
            try:
                cor = stoquastic_corollary(fam, T, cut=cfg.cut, cut_grid=cfg.cut_grid,
                                           bounds_only=True, n_report=len(grid),
                                           q_matrix=cfg.q_matrix, max_dim=cfg.max_dim)
            except CutSizeError as e:
                raise ConfigError("max_dim", str(e)) from e
            out.setdefault("corollary", []).append(cor.to_json(curves=False))
            checks += cor.checks
    out["counts"] = count(checks)
    out["passed"] = out["counts"]["failed"] == 0 and not out["errors"]
    return out, checks


def cmd_verify(cfg):
    members, rows = [], []
    ok = True
    for i, fam in enumerate(_families(cfg)):
        m, checks = _verify_member(cfg, fam)
        members.append(m)
        ok &= m["passed"]
        for c in checks:
            j = c.to_json()
            rows.append([i, j["name"], j["s"], j["lhs"], j["rhs"], j["margin"], j["tol"], j["applicable"], j["passed"]])
        print(f"[{i}] {fam.name}: {m['counts']['total']} checks, {m['counts']['skipped']} skipped, "
              f"{m['counts']['failed']} failed", file=sys.stderr)
    doc = {"schema": SCHEMA, "command": "verify", "config": _config_echo(cfg), "members": members, "passed": ok}
    header = ("member", "check", "s", "lhs", "rhs", "margin", "tol", "applicable", "passed")
    _emit(cfg, "verify", doc, [("verify.csv", header, rows)])
    return 0 if ok else 1


def cmd_sweep(cfg):
    grid = _grid(cfg, uniform=True)
    long_rows, summary_rows, members = [], [], []
    for i, fam in enumerate(_families(cfg)):
        snaps = grid_snapshots(fam, grid)
        consts = sweep_constants(fam, grid, snaps)
        member = {"family": fam.name, "grading": list(fam.grading.s_indices), "points": []}
        for T in cfg.T:
            rep = rhs_all(fam, T, bounds_only=cfg.bounds_only, tol_step=fam.tol.step, n_report=len(grid),
                          q_matrix=cfg.q_matrix, snaps=snaps, consts=consts)
            point = {k: rep.to_json(curves=False)[k] for k in ("T", "rhs", "lhs", "B", "C", "eps_T", "crossover_T_star", "applicable")}
            member["points"].append(point)
            cv = rep.curves
            h0 = float(consts["h"][0])
            stat = rhs_static(h0, T) if fam.is_static() else None
            summary_rows.append([i, T] + [rep.rhs[k] for k in ("main", "tunnel", "adiab", "static", "folk", "stoq")]
                                + [rep.lhs.get(k) for k in ("main", "tunnel", "adiab", "static")]
                                + [rep.eps_T, rep.crossover_T_star])
            for j, s in enumerate(grid):
                have = "hB" in cv
                tt = cv["tunnel_term"][j] if have else None
                aa = cv["adiab_term"][j] if have else None
                long_rows.append([
                    i, T, float(s), consts["h"][j], consts["Gamma_S"][j], consts["Gamma_Sbar"][j],
                    consts["gamma"][j], consts["kappa"][j], consts["c"][j], consts["eta"][j],
                    cv["B"][j] if have else None, cv["C"][j] if have else None,
                    tt, aa, (tt + aa) if have else None, stat,
                ])
        members.append(member)
    doc = {"schema": SCHEMA, "command": "sweep", "config": _config_echo(cfg), "members": members}
    _emit(cfg, "sweep", doc, [
        ("sweep.csv", SWEEP_COLUMNS, long_rows),
        ("sweep_summary.csv", SWEEP_SUMMARY_COLUMNS, summary_rows),
    ])
    return 0


def cmd_mincut(cfg):
    members = []
    for fam in cfg.families():
        if cfg.cut is not None:
            if max(cfg.cut) >= fam.dim:
                raise ConfigError("cut", f"index {max(cfg.cut)} out of range for N = {fam.dim}")
            S = canonical_cut(cfg.cut, fam.dim)
            s, h = cut_profile(fam, S, cfg.cut_grid)
            members.append({"family": fam.name, "best_cut": list(S), "h_min": float(np.max(h)),
                            "evaluated_cuts": 1, "s": s, "h_best_cut": h, "explicit_cut": True})
            continue
        try:
            r = min_cut(fam, cfg.cut_grid, max_dim=cfg.max_dim)
        except CutSizeError as e:
            raise ConfigError("cut", str(e)) from e
        members.append(dict(r.to_json(), family=fam.name, explicit_cut=False))
    doc = {"schema": SCHEMA, "command": "mincut", "config": _config_echo(cfg), "members": members}
    _emit(cfg, "mincut", doc)
    return 0


COMMANDS = {"spectra": cmd_spectra, "verify": cmd_verify, "sweep": cmd_sweep, "mincut": cmd_mincut}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _apply_overrides(load_config(args.config), args)
        return COMMANDS[args.command](cfg)
    except ConfigError as e:
        print(f"adiastab: config error: {e}", file=sys.stderr)
        return 2
    except AdiastabError as e:
        print(f"adiastab: {type(e).__name__}: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
