"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Every check runs at its stated tolerance.  A criterion that fails is
reported as such; the line lists which of its clauses failed.
"""

import json
import math
import os
import subprocess
import sys
import time
from fractions import Fraction

import numpy as np
import pytest
from scipy.interpolate import CubicHermiteSpline

from emden import (
    OutcomeTag,
    SystemParams,
    bootstrap,
    bubble_form,
    classify,
    decay_fit,
    energy_identity,
    epsilon0,
    eval_closed_form,
    find_threshold,
    ie_constants,
    integrate,
    pohozaev_entire,
    pohozaev_q,
    profile_from_closed_form,
    radial_newton,
    residual_closed_form,
    singular_form,
    verify_ie,
)
from emden.potentials import RadialField, default_grid
from oracles import cartesian_laplacian, log_radial_laplacian, rk4_trajectory


@pytest.fixture
def verdict(capsys):
    def report(number, title, checks, details, elapsed, budget):
        checks = dict(checks)
        checks[f"runtime {elapsed:.2f} s < {budget:g} s"] = elapsed < budget
        failed = [name for name, ok in checks.items() if not ok]
        line = f"[{'FAIL' if failed else 'PASS'}] criterion {number}: {title} | {details} | {elapsed:.2f} s"
        if failed:
            line += " | failed: " + "; ".join(failed)
        with capsys.disabled():
            print("\n" + line)
        assert not failed, line

    return report


def _on_axis(r, n):
    return np.r_[r, np.zeros(n - 1)]


def test_criterion_1_closed_form_residuals(verdict):
    start = time.perf_counter()
    radii = np.geomspace(1e-2, 1e2, 200)
    sing = singular_form(SystemParams(4, 4.0))
    worst_sing = max(max(residual_closed_form(sing, _on_axis(r, 4))) for r in radii)
    # analytic power Laplacian: Δ(c r^-t) = c t(t+2-n) r^(-t-2)
    c, t = sing.amplitude, sing.exponent
    oracle_sing = np.max(np.abs(c * t * (t + 2 - 4) * radii ** (-t - 2) + 2 * (c * radii**-t) ** 4))
    worst_bubble, oracle_bubble = {}, {}
    for n, p in ((3, 5.0), (4, 3.0)):
        form = bubble_form(SystemParams(n, p))
        worst_bubble[n, p] = max(max(residual_closed_form(form, _on_axis(r, n))) for r in radii)
        u = lambda x: eval_closed_form(form, x)[0]
        oracle_bubble[n, p] = max(
            abs(cartesian_laplacian(u, _on_axis(r, n), h=2e-3) + math.sqrt(p) * u(_on_axis(r, n)) ** p)
            for r in radii[::10]
        )
    elapsed = time.perf_counter() - start
    checks = {
        "singular residual < 1e-10": worst_sing < 1e-10,
        "singular power-Laplacian oracle < 1e-10": oracle_sing < 1e-10,
        "bubble residuals < 1e-8": max(worst_bubble.values()) < 1e-8,
        "bubble finite-difference oracle < 1e-8": max(oracle_bubble.values()) < 1e-8,
    }
    details = (
        f"singular {worst_sing:.2e} (oracle {oracle_sing:.2e}); "
        + ", ".join(f"bubble{k} {v:.2e} (oracle {oracle_bubble[k]:.2e})" for k, v in worst_bubble.items())
    )
    verdict(1, "closed-form residuals", checks, details, elapsed, 1.0)


def test_criterion_2_shooting_threshold(verdict):
    start = time.perf_counter()
    checks, parts = {}, []
    for n, p in ((4, 4.0), (5, 3.0)):
        params = SystemParams(n, p)
        res = find_threshold(params, bisect_tol=1e-11, r_max=1e3)
        prof = res.profile_at_star
        lo, hi = res.bracket
        recheck = tuple(classify(params, a, r_max=res.horizon) for a in res.bracket)
        certified = (
            lo < res.a_star <= hi
            and hi - lo <= 1e-11
            and recheck == res.bracket_outcomes
            and recheck[0].tag is OutcomeTag.V_VANISHED
            and recheck[1].tag is not OutcomeTag.V_VANISHED
        )
        # independent fixed-step RK4 at a = 1 from r = 0
        code, _, _, rows = rk4_trajectory(n, p, 1.0, 1e-4, 10**7, 10**4)
        spline = CubicHermiteSpline(prof.r, prof.U, prof.dU)
        mask = rows[:, 0] >= prof.r[0]
        overlay = float(np.max(np.abs(spline(rows[mask, 0]) / rows[mask, 1] - 1)))
        sync = prof.sync_deviation()
        checks[f"({n},{p:g}) |a*-1| < 1e-6"] = abs(res.a_star - 1) < 1e-6
        checks[f"({n},{p:g}) bracket certified"] = certified
        checks[f"({n},{p:g}) sync < 1e-8"] = sync < 1e-8
        checks[f"({n},{p:g}) EntirePositive to 1e3"] = (
            prof.outcome.tag is OutcomeTag.ENTIRE_POSITIVE and prof.r_max == 1e3
        )
        checks[f"({n},{p:g}) RK4 positive to 1e3 and overlays within 1e-6"] = code == 0 and overlay < 1e-6
        parts.append(f"({n},{p:g}) a*-1={res.a_star - 1:.1e} sync={sync:.1e} rk4={overlay:.1e}")
    elapsed = time.perf_counter() - start
    verdict(2, "shooting threshold", checks, "; ".join(parts), elapsed, 30.0)


def test_criterion_3_decay_dichotomy(verdict):
    start = time.perf_counter()
    checks, parts = {}, []
    horizons = (1e2, 1e3, 1e4)
    for n, p in ((4, 4.0), (5, 3.0)):
        params = SystemParams(n, p)
        k = params.slow_rate
        a_star = find_threshold(params, r_max=1e3).a_star
        errs = [abs(decay_fit(integrate(params, a_star, r_max=rm)).rate - k) / k for rm in horizons]
        checks[f"({n},{p:g}) slow rate within 5% at 1e3"] = errs[1] < 0.05
        checks[f"({n},{p:g}) monotone tightening"] = errs[0] > errs[1] > errs[2]
        parts.append(f"({n},{p:g}) slow err " + "/".join(f"{e:.2%}" for e in errs))
    for n, p in ((3, 5.0), (4, 3.0)):
        form = bubble_form(SystemParams(n, p))
        errs = []
        for rm in horizons:
            prof = profile_from_closed_form(form, np.geomspace(1e-4, rm, 2048))
            errs.append(abs(decay_fit(prof).rate - (n - 2)) / (n - 2))
        checks[f"({n},{p:g}) fast rate within 2% at 1e3"] = errs[1] < 0.02
        checks[f"({n},{p:g}) bubble monotone tightening"] = errs[0] > errs[1] > errs[2]
        parts.append(f"({n},{p:g}) fast err " + "/".join(f"{e:.2%}" for e in errs))
    elapsed = time.perf_counter() - start
    verdict(3, "decay dichotomy", checks, "; ".join(parts), elapsed, 60.0)


def test_criterion_4_epsilon0_regime(verdict):
    start = time.perf_counter()
    checks, parts = {}, []
    for n, p in ((3, 5.0), (4, 4.0), (5, 3.0)):
        params = SystemParams(n, p)
        a = 0.9 / (n * 2 ** (1 + p) * math.sqrt(p))
        assert a == pytest.approx(0.9 * epsilon0(params), rel=1e-15)
        out = classify(params, a)
        checks[f"({n},{p:g}) VVanished with R <= 1"] = out.tag is OutcomeTag.V_VANISHED and out.radius <= 1
        parts.append(f"({n},{p:g}) {out.tag.value} R={out.radius:.4f}")
    elapsed = time.perf_counter() - start
    verdict(4, "epsilon0 regime", checks, "; ".join(parts), elapsed, 5.0)


def test_criterion_5_pohozaev_obstruction(verdict):
    start = time.perf_counter()
    mismatches = 0
    for n in (3, 4, 5, 6):
        crit = Fraction(n + 2, n - 2)
        for p in np.linspace(1.1, 3 * float(crit), 50):
            exact_negative = (n - 2) * Fraction(p) < n + 2
            mismatches += (pohozaev_q(n, p) < 0) != exact_negative
    ball = integrate(SystemParams(3, 2.0), 1.0, r_max=50)
    energy = energy_identity(ball)
    params = SystemParams(4, 4.0)
    eps = epsilon0(params)
    tags = [classify(params, a).tag for a in np.geomspace(eps / 2, 4, 40)]
    elapsed = time.perf_counter() - start
    checks = {
        "Q sign matches on 50x4 grid": mismatches == 0,
        "(3,2) a=1 is BothVanished": ball.outcome.tag is OutcomeTag.BOTH_VANISHED,
        "(3,2) ball energy residual < 1e-4": energy.residual < 1e-4,
        "(4,4) sweep has no Dirichlet profile": OutcomeTag.BOTH_VANISHED not in tags,
    }
    details = (
        f"Q mismatches {mismatches}/200; (3,2) R={ball.outcome.radius:.6f} energy {energy.residual:.1e}; "
        f"(4,4) sweep outcomes {sorted({t.value for t in tags})}"
    )
    verdict(5, "Pohozaev sign obstruction", checks, details, elapsed, 60.0)


def test_criterion_6_entire_identities(verdict):
    start = time.perf_counter()
    checks, parts = {}, []
    for n, p in ((3, 5.0), (4, 3.0)):
        form = bubble_form(SystemParams(n, p))
        energy = energy_identity(form)
        poho = pohozaev_entire(form)
        p_implied = poho.components["p_implied"]
        perturbed = energy_identity(profile_from_closed_form(form, default_grid()).scaled(1.01))
        checks[f"({n},{p:g}) energy < 1e-4"] = energy.residual < 1e-4
        checks[f"({n},{p:g}) pohozaev < 1e-4"] = poho.residual < 1e-4
        checks[f"({n},{p:g}) p_implied rounds to {p:g}"] = round(p_implied, 6) == p
        checks[f"({n},{p:g}) perturbed residual > 1e-3"] = perturbed.residual > 1e-3
        parts.append(
            f"({n},{p:g}) energy {energy.residual:.1e} pohozaev {poho.residual:.1e} "
            f"p_implied {p_implied:.9f} perturbed {perturbed.residual:.1e}"
        )
    elapsed = time.perf_counter() - start
    verdict(6, "entire-space identities on the bubble", checks, "; ".join(parts), elapsed, 5.0)


def test_criterion_7_integral_system(verdict):
    start = time.perf_counter()
    form = bubble_form(SystemParams(3, 5.0))
    reports = {m: verify_ie(profile_from_closed_form(form, default_grid(m))) for m in (2048, 4096)}
    coarse, fine = reports[2048], reports[4096]
    order = math.log2(coarse.residual / fine.residual)
    inversion = {}
    for n, p in ((3, 5.0), (4, 3.0)):
        r = np.geomspace(1e-4, 10, 4001)
        f = np.where(r < 1, (1 - r**2) ** 8, 0.0)
        _, c2 = ie_constants(SystemParams(n, p))
        lap = log_radial_laplacian(c2 * radial_newton(RadialField(r, f), n).values, r, n)
        inside = (r > 0.05) & (r < 5)
        inversion[n] = float(np.max(np.abs(-lap[inside] - math.sqrt(p) * f[inside])))
    elapsed = time.perf_counter() - start
    checks = {
        "u deviation < 1e-4": coarse.components["u_deviation"] < 1e-4,
        "v deviation < 1e-4": coarse.components["v_deviation"] < 1e-4,
        "order >= 4 under doubling": order >= 4,
        "Laplacian inversion n=3 within 1e-6": inversion[3] < 1e-6,
        "Laplacian inversion n=4 within 1e-6": inversion[4] < 1e-6,
    }
    details = (
        f"deviation 2048 {coarse.residual:.2e}, 4096 {fine.residual:.2e}, order {order:.3f}; "
        f"inversion n=3 {inversion[3]:.1e}, n=4 {inversion[4]:.1e}"
    )
    verdict(7, "integral-system verification", checks, details, elapsed, 30.0)


def test_criterion_8_bootstrap(verdict):
    start = time.perf_counter()
    rng = np.random.default_rng(20261015)
    worst, dichotomy_ok = 0.0, True
    for _ in range(20):
        n = int(rng.integers(3, 9))
        p = float(rng.uniform(1.05, 6.0))
        params = SystemParams(n, p)
        worst = max(worst, bootstrap(params, j_max=30).closed_form_discrepancy())
        exists = bootstrap(params, j_max=400).j0 is not None
        dichotomy_ok &= exists == (p < params.serrin)
    j0 = bootstrap(SystemParams(3, 2.0)).j0
    elapsed = time.perf_counter() - start
    checks = {
        "closed form within 1e-9": worst < 1e-9,
        "j0 exists iff p < n/(n-2)": dichotomy_ok,
        "(3,2) j0 = 1": j0 == 1,
    }
    verdict(8, "bootstrap recurrence", checks, f"max discrepancy {worst:.1e}; (3,2) j0={j0}", elapsed, 1.0)


def test_criterion_9_cli_determinism(verdict, tmp_path):
    start = time.perf_counter()
    env = {**os.environ, "EMDEN_SEED_DETERMINISTIC": "1"}
    outputs = []
    for name in ("first.csv", "second.csv"):
        path = tmp_path / name
        proc = subprocess.run(
            [sys.executable, "-m", "emden", "shoot", "--n", "4", "--p", "4", "--out", str(path)],
            capture_output=True, text=True, env=env,
        )
        outputs.append((proc.returncode, path.read_bytes() if path.exists() else None, proc.stdout))
    gate = subprocess.run(
        [sys.executable, "-m", "emden", "shoot", "--n", "3", "--p", "2"],
        capture_output=True, text=True, env=env,
    )
    elapsed = time.perf_counter() - start
    record = json.loads(gate.stderr) if gate.stderr.strip() else {}
    # the summaries differ only in the output path they name
    summaries = [
        {k: v for k, v in json.loads(o[2]).items() if k != "files"} for o in outputs if o[0] == 0
    ]
    checks = {
        "both runs succeed": all(o[0] == 0 for o in outputs),
        "CSV bitwise identical": outputs[0][1] is not None and outputs[0][1] == outputs[1][1],
        "summaries identical": len(summaries) == 2 and summaries[0] == summaries[1],
        "regime gate exits 2": gate.returncode == 2,
        "gate message": record.get("message") == "regime not shooting-admissible (p < 2*−1 = 5)",
    }
    size = len(outputs[0][1] or b"")
    details = f"CSV {size} bytes; gate exit {gate.returncode}: {record.get('message')}"
    verdict(9, "CLI determinism and regime gate", checks, details, elapsed, 30.0)
