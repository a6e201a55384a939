"""Command line entry point: ``hartmann-layer run|check|sweep|perturb``.

Exit codes: 0 success, 1 configuration or I/O failure, 2 monotonicity lost,
3 numerical blow-up or rejected step, 4 member-run failure in a sweep or
perturbation study, 5 study completed but outside its acceptance window.
"""
import argparse
import json
import math
import os
import sys

import numpy as np

from . import estimates as est
from .config import parse_config
from .errors import (ConfigError, HartmannError, HypothesisFailed, MonotonicityLost,
                     UnsupportedExponent)
from .norms import membership_check, norm_report
from .profiles import (equivalence_family, random_bandlimited_fields, random_decaying_fields,
                       random_zero_trace_fields)
from .serialize import CSV_COLUMNS, record_row, write_snapshot, write_table
from .solver import init_from_profile, run

EXIT_OK, EXIT_IO, EXIT_MONOTONICITY, EXIT_BLOWUP, EXIT_MEMBER, EXIT_WINDOW = range(6)
_STOP_CODES = {"completed": EXIT_OK, "MonotonicityLost": EXIT_MONOTONICITY,
               "NumericalBlowup": EXIT_BLOWUP, "StepRejected": EXIT_BLOWUP}


def _write_json(path, payload):
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True, default=_jsonable)
        fh.write("\n")


def _jsonable(value):
    if isinstance(value, (np.floating, np.integer)):
        return value.item()
    if isinstance(value, est.CheckVerdict):
        return {"name": value.name, "lhs": value.lhs, "rhs": value.rhs, "ratio": value.ratio,
                "passed": value.passed}
    raise TypeError(type(value).__name__)


def _clean(x):
    """JSON has no inf/nan; encode them as strings."""
    if isinstance(x, float) and not math.isfinite(x):
        return repr(x)
    return x


# ------------------------------------------------------------------ run

def run_command(cfg, out):
    p, grid, outer = cfg.params, cfg.grid, cfg.outer
    try:
        state0 = init_from_profile(outer, p, grid)
    except MonotonicityLost as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_MONOTONICITY
    result = run(state0, p, cfg.record_every)
    records = result.records
    summary = None
    if len(records) >= 1:
        summary = est.summarize(records, p, outer, grid, cfg.C_P, cfg.C_s)
    C_energy = summary.C_energy if summary else None
    C_env = summary.C_envelope if summary else None
    rows = [record_row(r, result.stop_reason if i == len(records) - 1 else "", C_energy, C_env)
            for i, r in enumerate(records)]
    write_table(os.path.join(out, "diagnostics.csv"), CSV_COLUMNS, rows)
    if cfg.snapshots:
        snap_dir = os.path.join(out, "snapshots")
        os.makedirs(snap_dir, exist_ok=True)
        for i, snap in enumerate(result.snapshots):
            write_snapshot(os.path.join(snap_dir, f"snap_{i:05d}.bin"), snap, p)
    info = {"stop_reason": result.stop_reason, "n_samples": len(records)}
    if result.error is not None:
        info["error"] = str(result.error)
    if summary is not None:
        info.update(C_energy=_clean(summary.C_energy), C_envelope=_clean(summary.C_envelope),
                    blowup_time=_clean(summary.blowup_time),
                    verdicts=[_verdict_dict(v) for v in
                              (summary.bound_verdict, summary.envelope_upper, summary.envelope_lower)])
    _write_json(os.path.join(out, "summary.json"), info)
    return _STOP_CODES.get(result.stop_reason, EXIT_BLOWUP)


def _verdict_dict(v):
    return {"name": v.name, "lhs": _clean(v.lhs), "rhs": _clean(v.rhs),
            "ratio": _clean(v.ratio), "passed": v.passed}


# ---------------------------------------------------------------- check

VERDICT_COLUMNS = ["suite", "name", "lhs", "rhs", "ratio", "passed", "hard", "status", "note"]


def _row(suite, v, hard):
    return [suite, v.name, v.lhs, v.rhs, v.ratio, v.passed, hard, "ok", v.note]


def _hardy_rows(cfg, rng):
    grid = cfg.grid
    decaying = random_decaying_fields(rng, cfg.check["n_fields"], grid)
    zero_trace = random_zero_trace_fields(rng, cfg.check["n_zero_trace"], grid)
    rows = []
    for lam in cfg.check["hardy_lambdas"]:
        name = f"hardy[lambda={lam:g}]"
        variant, family = ("decay", decaying) if lam > -0.5 else ("zero_trace", zero_trace)
        try:
            verdicts = [est.hardy_check(f, grid, lam, variant) for f in family]
        except (UnsupportedExponent, HypothesisFailed) as exc:
            rows.append(["hardy", name, None, None, None, None, True, "skipped",
                         f"{type(exc).__name__}: {exc}"])
            continue
        worst = max(verdicts, key=lambda v: v.ratio)
        rows.append(["hardy", f"{name} worst of {len(verdicts)} ({variant})", worst.lhs, worst.rhs,
                     worst.ratio, all(v.passed for v in verdicts), True, "ok", ""])
    return rows


def _embedding_rows(cfg, rng):
    fields = random_bandlimited_fields(rng, cfg.check["n_embedding"], cfg.grid)
    ratios = [est.embedding_check(f, cfg.grid) for f in fields]
    worst = max(ratios)
    return [["embedding", f"sup ratio worst of {len(ratios)}", worst, 1.0, worst,
             bool(np.isfinite(worst)), False, "ok", "constant unspecified; ratio reported"]]


def _state_rows(label, state, p):
    rows = []
    report = norm_report(state, p)
    for v in est.equivalence_check(state, p, report):
        rows.append(_row("equivalence", _relabel(v, label), math.isfinite(v.tolerance)))
    for v in est.velocity_bounds_check(state, p, report).values():
        rows.append(_row("velocity", _relabel(v, label), math.isfinite(v.tolerance)))
    m = membership_check(state, p, report.h_s_gamma)
    rows.append(["membership", f"{label} in H^(s,gamma)_(sigma,delta)", m.floor_margin, m.I_margin,
                 m.delta_eff, m.in_space, False, "ok",
                 "lhs = floor margin, rhs = I margin, ratio = effective delta"])
    return rows


def _relabel(v, label):
    return est.CheckVerdict(f"{label} {v.name}", v.lhs, v.rhs, v.ratio, v.passed, v.tolerance, v.note)


def check_command(cfg, out):
    rng = np.random.default_rng(cfg.seed)
    rows = _hardy_rows(cfg, rng) + _embedding_rows(cfg, rng)
    p, grid = cfg.params, cfg.grid
    flows = [("config", cfg.outer)] + [(f"family[{i}]", f) for i, f in
                                       enumerate(equivalence_family(p.s))]
    for label, outer in flows:
        try:
            rows += _state_rows(label, init_from_profile(outer, p, grid), p)
        except HartmannError as exc:
            rows.append(["state", label, None, None, None, None, False, "skipped",
                         f"{type(exc).__name__}: {exc}"])
    write_table(os.path.join(out, "verdicts.csv"), VERDICT_COLUMNS, rows)
    hard_ok = all(r[5] for r in rows if r[6] and r[7] == "ok")
    return EXIT_OK if hard_ok else EXIT_WINDOW


# ---------------------------------------------------------------- studies

def sweep_command(cfg, out):
    table = est.epsilon_sweep(cfg.outer, cfg.grid, cfg.params, cfg.eps_list)
    rows = []
    for i, eps in enumerate(table.eps):
        diff = table.diffs[i] if i < len(table.diffs) else None
        ratio = table.ratios[i - 1] if 0 < i <= len(table.ratios) else None
        order = table.orders[i - 1] if 0 < i <= len(table.orders) else None
        rows.append([eps, table.failures.get(eps, "completed"), diff, ratio, order])
    write_table(os.path.join(out, "sweep.csv"),
                ["eps", "stop_reason", "diff_to_next", "ratio", "order"], rows)
    _write_json(os.path.join(out, "sweep_verdict.json"),
                {"passed": table.passed, "window": [2.5, 6.0],
                 "ratios": [_clean(r) for r in table.ratios]})
    if table.failures:
        return EXIT_MEMBER
    return EXIT_OK if table.passed else EXIT_WINDOW


def perturb_command(cfg, out):
    study = est.perturbation_study(cfg.outer, cfg.grid, cfg.params, cfg.amplitude, cfg.record_every)
    write_table(os.path.join(out, "perturb.csv"), ["t", "gbar"], zip(study.times, study.gbar))
    fit = study.fit
    _write_json(os.path.join(out, "perturb_verdict.json"),
                {"stop_reason": study.stop_reason, "amplitude": cfg.amplitude,
                 "C": _clean(fit.C) if fit else None, "branch": fit.branch if fit else None,
                 "max_gbar": _clean(fit.max_gbar) if fit else None,
                 "passed": bool(fit and fit.passed)})
    if study.stop_reason != "completed":
        return EXIT_MEMBER
    return EXIT_OK if fit is not None and fit.passed else EXIT_WINDOW


COMMANDS = {"run": run_command, "check": check_command, "sweep": sweep_command,
            "perturb": perturb_command}


def main(argv=None):
    parser = argparse.ArgumentParser(prog="hartmann-layer",
                                     description="Magnetic Prandtl boundary-layer solver and estimate checks.")
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("--config", required=True, help="JSON configuration file")
    parser.add_argument("--out", required=True, help="output directory")
    parser.add_argument("--seed", type=int, default=None, help="overrides the config seed")
    args = parser.parse_args(argv)
    try:
        with open(args.config) as fh:
            cfg = parse_config(fh.read())
        if args.seed is not None:
            cfg.seed = args.seed
        os.makedirs(args.out, exist_ok=True)
        _write_json(os.path.join(args.out, "config.json"), cfg.to_dict())
        return COMMANDS[args.command](cfg, args.out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_IO
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except HartmannError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
