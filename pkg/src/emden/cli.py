"""Command-line interface.

Subcommands: ``shoot``, ``classify``, ``sweep``, ``verify-forms``,
``identities``, ``decay``, ``bootstrap`` and ``potential``.  A summary is
printed to stdout as JSON (tables as CSV or JSON); ``--out`` writes profiles
or tables to disk.  Exit status is 0 on success, 2 when the request is
rejected (regime, parameters, preconditions) and 1 when a computation fails;
errors are reported on stderr as one JSON record.
"""

import argparse
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import __version__
from ._validation import same_threshold
from .errors import EmdenError, GridError, RegimeError
from .identities import (
    bootstrap,
    energy_identity,
    pohozaev_ball,
    pohozaev_entire,
    pohozaev_q,
)
from .integrator import OutcomeTag, integrate, profile_from_closed_form
from .io import (
    COMMANDS,
    GridSpec,
    RunConfig,
    atomic_write,
    dumps,
    emit_profile,
    table_text,
)
from .model import (
    SystemParams,
    bubble_form,
    bubble_scale_for_center_value,
    cylinder_lift,
    regime,
    residual_closed_form,
    singular_form,
)
from .potentials import reconstruct_ie, verify_ie
from .shooting import classify, decay_fit, find_threshold

DETERMINISTIC_ENV = "EMDEN_SEED_DETERMINISTIC"


def _require_shooting(params):
    reg = regime(params)
    if reg.shooting_admissible:
        return reg
    if params.p < params.critical and not same_threshold(params.p, params.critical):
        bound = f"p < 2*\u22121 = {params.critical:g}"
    else:
        bound = "p < 2"
    raise RegimeError(f"regime not shooting-admissible ({bound})")


def _decay_record(profile):
    if profile.outcome.tag is not OutcomeTag.ENTIRE_POSITIVE:
        return None
    fit = decay_fit(profile)
    return {
        "rate": fit.rate,
        "window": list(fit.window),
        "amplitude_band": list(fit.amplitude_band),
        "regression_residual": fit.regression_residual,
        "n_samples": fit.n_samples,
        "slow_rate": profile.params.slow_rate,
        "fast_rate": profile.params.fast_rate,
    }


def _outcome_record(outcome):
    return {
        "outcome": outcome.tag.value,
        "r_event": outcome.radius if outcome.vanished else None,
    }


def _write_profile(cfg, profile, summary):
    if cfg.out:
        written = emit_profile(profile, cfg.format, cfg.out, extra=summary)
        summary["files"] = [str(p) for p in written]


def cmd_shoot(cfg):
    params = cfg.params
    _require_shooting(params)
    res = find_threshold(params, bisect_tol=cfg.bisect_tol, r_max=cfg.r_max, tol=cfg.tol)
    prof = res.profile_at_star
    summary = {
        "command": "shoot",
        "n": params.n,
        "p": params.p,
        "a_star": res.a_star,
        "bracket": list(res.bracket),
        "bracket_outcomes": [o.tag.value for o in res.bracket_outcomes],
        "iterations": res.iterations,
        "classification_horizon": res.horizon,
        "sync_deviation": prof.sync_deviation(),
        "decay": _decay_record(prof),
        **_outcome_record(prof.outcome),
    }
    _write_profile(cfg, prof, summary)
    return summary


def cmd_classify(cfg):
    if cfg.a is None:
        raise GridError("classify needs --a")
    params = cfg.params
    summary = {"command": "classify", "n": params.n, "p": params.p, "a": cfg.a}
    if cfg.out:
        prof = integrate(params, cfg.a, r_max=cfg.r_max, tol=cfg.tol)
        summary.update(_outcome_record(prof.outcome))
        summary["decay"] = _decay_record(prof)
        _write_profile(cfg, prof, summary)
    else:
        summary.update(_outcome_record(classify(params, cfg.a, r_max=cfg.r_max, tol=cfg.tol)))
    return summary


def _error_text(exc):
    return f"{exc.kind}: {exc}"


def _sweep_row(job):
    over, value, n, p, a, r_max, tol = job
    if over == "a":
        row = {"a": value, "outcome": None, "r_event": None, "error": None}
        params = SystemParams(n, p)
        a_val = value
    else:
        row = {"p": value, "regime": None, "Q": None, "shooting_admissible": None,
               "outcome": None, "r_event": None, "error": None}
        a_val = a
    try:
        if over == "p":
            params = SystemParams(n, value)
            reg = regime(params)
            row["regime"] = reg.tag.value
            row["Q"] = pohozaev_q(n, value)
            row["shooting_admissible"] = reg.shooting_admissible
        row.update(_outcome_record(classify(params, a_val, r_max=r_max, tol=tol)))
    except EmdenError as exc:
        row["error"] = _error_text(exc)
    return row


def _parallel():
    return os.environ.get(DETERMINISTIC_ENV, "") != "1"


def cmd_sweep(cfg):
    values = cfg.grid.points()
    a = 1.0 if cfg.a is None else cfg.a
    jobs = [(cfg.over, float(v), cfg.n, cfg.p, a, cfg.r_max, cfg.tol) for v in values]
    if _parallel() and len(jobs) > 1:
        with ProcessPoolExecutor() as pool:
            rows = list(pool.map(_sweep_row, jobs))
    else:
        rows = [_sweep_row(j) for j in jobs]
    if cfg.over == "a":
        columns = ["a", "outcome", "r_event", "error"]
    else:
        columns = ["p", "regime", "Q", "shooting_admissible", "outcome", "r_event", "error"]
    text = table_text(rows, columns, cfg.format)
    summary = {"command": "sweep", "over": cfg.over, "rows": len(rows),
               "errors": sum(r["error"] is not None for r in rows)}
    if cfg.out:
        atomic_write(cfg.out, text)
        summary["files"] = [cfg.out]
        return summary
    return text


def _max_residuals(form, points):
    res = np.array([residual_closed_form(form, x) for x in points])
    return {"max_residual_u": float(res[:, 0].max()), "max_residual_v": float(res[:, 1].max())}


def cmd_verify_forms(cfg):
    params = cfg.params
    radii = cfg.grid.points()
    rows = []

    def on_axis(form):
        return [np.r_[r, np.zeros(form.dimension - 1)] for r in radii]

    candidates = [("SingularPower", lambda: singular_form(params))]
    candidates.append(("Bubble", lambda: bubble_form(params)))
    candidates.append(("CylinderLift", lambda: cylinder_lift(bubble_form(params))))
    for name, make in candidates:
        row = {"form": name}
        try:
            form = make()
            row["amplitude"] = form.amplitude
            row.update(_max_residuals(form, on_axis(form)))
        except EmdenError as exc:
            row["error"] = _error_text(exc)
        rows.append(row)
    summary = {"command": "verify-forms", "n": params.n, "p": params.p,
               "grid": str(cfg.grid), "forms": rows}
    if cfg.out:
        atomic_write(cfg.out, dumps(summary) + "\n")
        summary["files"] = [cfg.out]
    return summary


def _identity_target(cfg):
    """The bubble for critical ``p`` without ``--a``; otherwise a profile."""
    params = cfg.params
    if cfg.a is None and same_threshold(params.p, params.critical):
        form = bubble_form(params, t=bubble_scale_for_center_value(params))
        return form, profile_from_closed_form(form, cfg.grid.points())
    a = 1.0 if cfg.a is None else cfg.a
    prof = integrate(params, a, r_max=cfg.r_max, tol=cfg.tol)
    return prof, prof


def cmd_identities(cfg):
    params = cfg.params
    target, prof = _identity_target(cfg)
    reports = {}
    checks = {
        "energy": lambda: energy_identity(target, grid=cfg.grid.points()).to_dict(),
        "pohozaev_entire": lambda: pohozaev_entire(target, grid=cfg.grid.points()).to_dict(),
    }
    if prof.outcome.tag is OutcomeTag.BOTH_VANISHED:
        def ball():
            rep, admissible = pohozaev_ball(prof)
            return {**rep.to_dict(), "admissible": admissible}
        checks = {"energy": checks["energy"], "pohozaev_ball": ball}
    for name, run in checks.items():
        try:
            reports[name] = run()
        except EmdenError as exc:
            reports[name] = {"error": _error_text(exc), "exit_status": exc.exit_status}
    return {
        "command": "identities",
        "n": params.n,
        "p": params.p,
        "Q": pohozaev_q(params.n, params.p),
        "target": "Bubble" if prof is not target else "profile",
        **_outcome_record(prof.outcome),
        "reports": reports,
    }


def cmd_decay(cfg):
    params = cfg.params
    if cfg.a is None:
        _require_shooting(params)
        prof = find_threshold(params, bisect_tol=cfg.bisect_tol, r_max=cfg.r_max, tol=cfg.tol).profile_at_star
    else:
        prof = integrate(params, cfg.a, r_max=cfg.r_max, tol=cfg.tol)
    fit = decay_fit(prof)
    summary = {
        "command": "decay",
        "n": params.n,
        "p": params.p,
        "a": prof.a,
        "rate": fit.rate,
        "window": list(fit.window),
        "amplitude_band": list(fit.amplitude_band),
        "regression_residual": fit.regression_residual,
        "slow_rate": params.slow_rate,
        "fast_rate": params.fast_rate,
        "relative_error_slow": abs(fit.rate - params.slow_rate) / params.slow_rate,
        "relative_error_fast": abs(fit.rate - params.fast_rate) / params.fast_rate,
        **_outcome_record(prof.outcome),
    }
    _write_profile(cfg, prof, summary)
    return summary


def cmd_bootstrap(cfg):
    trace = bootstrap(cfg.params, cfg.j_max)
    last = trace.j0 if trace.j0 is not None else len(trace.a_seq) - 1
    rows = [{"j": j, "a_j": trace.a_seq[j], "b_j": trace.b_seq[j]} for j in range(last + 1)]
    text = table_text(rows, ["j", "a_j", "b_j"], cfg.format)
    if cfg.out:
        atomic_write(cfg.out, text)
        return {"command": "bootstrap", "j0": trace.j0, "files": [cfg.out]}
    return text


def cmd_potential(cfg):
    params = cfg.params
    target, prof = _identity_target(cfg)
    report = verify_ie(prof)
    summary = {"command": "potential", "n": params.n, "p": params.p, "report": report.to_dict()}
    if cfg.out:
        rec = reconstruct_ie(prof)
        rows = [
            {"r": float(r), "U": float(u), "U_ie": float(ui), "V": float(v), "V_ie": float(vi)}
            for r, u, ui, v, vi in zip(rec.grid, rec.U, rec.u_reconstructed, rec.V, rec.v_reconstructed)
        ]
        atomic_write(cfg.out, table_text(rows, ["r", "U", "U_ie", "V", "V_ie"], cfg.format))
        summary["files"] = [cfg.out]
    return summary


HANDLERS = {
    "shoot": cmd_shoot,
    "classify": cmd_classify,
    "sweep": cmd_sweep,
    "verify-forms": cmd_verify_forms,
    "identities": cmd_identities,
    "decay": cmd_decay,
    "bootstrap": cmd_bootstrap,
    "potential": cmd_potential,
}


def run(cfg):
    """Execute a :class:`RunConfig`; returns a JSON-ready dict or table text."""
    return HANDLERS[cfg.command](cfg)


def build_parser():
    parser = argparse.ArgumentParser(prog="emden", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", help="JSON run configuration; flags override it")
        sp.add_argument("--n", type=int)
        sp.add_argument("--p", type=float)
        sp.add_argument("--a", type=float)
        sp.add_argument("--rmax", type=float, dest="r_max")
        sp.add_argument("--tol", type=float)
        sp.add_argument("--bisect-tol", type=float, dest="bisect_tol")
        sp.add_argument("--grid", help="lo:hi:count")
        sp.add_argument("--spacing", choices=["log", "linear"])
        sp.add_argument("--out")
        sp.add_argument("--format", choices=["csv", "json"])
        sp.add_argument("--save-config", help="write the effective configuration here")
        if name == "sweep":
            sp.add_argument("--over", choices=["a", "p"])
        if name == "bootstrap":
            sp.add_argument("--jmax", type=int, dest="j_max")
    return parser


def config_from_args(args):
    base = RunConfig.load(args.config).to_dict() if args.config else {}
    base["command"] = args.command
    for key in ("n", "p", "a", "r_max", "tol", "bisect_tol", "out", "format", "over", "j_max"):
        value = getattr(args, key, None)
        if value is not None:
            base[key] = value
    if "n" not in base or "p" not in base:
        raise GridError("--n and --p are required")
    grid = base.get("grid")
    spacing = args.spacing
    if spacing is None:
        spacing = grid["spacing"] if grid else ("linear" if base.get("over") == "p" else "log")
    if args.grid is not None:
        base["grid"] = GridSpec.parse(args.grid, spacing)
    elif grid:
        base["grid"] = GridSpec(**{**grid, "spacing": spacing})
    elif args.spacing is not None:
        base["grid"] = GridSpec(spacing=spacing)
    return RunConfig.from_dict(base)


def _error_record(kind, message, status):
    return json.dumps(
        {"error": kind, "message": message, "exit_status": status}, sort_keys=True, ensure_ascii=False
    )


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = config_from_args(args)
        if args.save_config:
            cfg.save(args.save_config)
        result = run(cfg)
    except EmdenError as exc:
        print(_error_record(exc.kind, str(exc), exc.exit_status), file=sys.stderr)
        return exc.exit_status
    except Exception as exc:  # noqa: BLE001 - reported as a structured record
        print(_error_record(type(exc).__name__, str(exc), 1), file=sys.stderr)
        return 1
    if isinstance(result, str):
        sys.stdout.write(result)
    else:
        sys.stdout.write(dumps({"schema": 1, **result}) + "\n")
    return 0


if __name__ == "__main__":
    sys.exit(main())
