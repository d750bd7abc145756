"""Acceptance criteria 1-9, each run at its stated size and tolerance.

Every criterion reuses the named checks of the validation suites (a subset
run reproduces the statistics of a full run) and compares each statistic
with the stated tolerance rather than the suite's own, possibly stricter one.
One PASS/FAIL line per criterion is printed in the terminal summary.
"""

import os
import subprocess
import sys
import time

import pytest

from conftest import ACCEPTANCE_RESULTS
from fptlab.validation import run_suite

SEED = 0

# criterion -> (title, suite, {check: stated tolerance, range, or None for informational}, runtime limit)
CRITERIA = {
    1: ("affine exactness", "density", {"affine_exactness": 1e-10}, 1.0),
    2: ("operator algebra", "algebra", {
        "sigma_involution": 1e-8,
        "s_closed_form_vs_sigma_pi_sigma": 1e-8,
        "compose_params_pointwise": 1e-10,
        "tau_change_of_variables": 1e-9,
    }, 10.0),
    3: ("ODE bridge", "ode", {
        "power_law_residual": 1e-10,
        "solve_nonlinear_residual": 1e-6,
        "sigma_of_sl_solution": 1e-6,
        "s_image_residual": 1e-6,
    }, 30.0),
    4: ("Airy", "density", {
        "airy_at_zero": 1e-12,
        "airy_first_zero": 1e-10,
        "airy_integral_representation": 1e-9,
        "airy_ode_residual": 1e-9,
    }, 5.0),
    5: ("parabola vs Monte Carlo", "all", {
        "groeneboom_vs_mc_ks": 0.015,
        "shifted_quadratic_girsanov_vs_mc": 0.02,
        "h_kappa_over_girsanov_at_t1": None,
        "shifted_quadratic_h_kappa_vs_mc": None,
        "shifted_quadratic_girsanov_vs_pde": None,
    }, 300.0),
    6: ("transform of an empirical density", "density", {
        "transform_of_empirical_density_ks": 0.02,
    }, 300.0),
    7: ("Gauss-Markov", "gm", {
        "martingale_bm_1_-1": 3.0,
        "martingale_beta_zero": 3.0,
        "martingale_exp_2_1": 3.0,
        "time_change_sqrt_boundary_ks": 0.02,
        "time_change_constant_ks": 0.02,
        "ht_relation_beta_zero": 3.0,
        "ht_relation_bm": 3.0,
        "ht_relation_ou": 3.0,
    }, 300.0),
    8: ("heat equation", "pde", {
        "pde_density_constant": 1e-3,
        "symmetry_constant": 2e-3,
        "symmetry_affine": 2e-3,
        "kernel_fixed_point": 1e-12,
        "residual_convergence_rate": (3.5, 4.5),
    }, 600.0),
}


def _within(stat, tol):
    if isinstance(tol, tuple):
        return tol[0] <= stat <= tol[1]
    return stat <= tol


def _record(number, title, ok, detail):
    ACCEPTANCE_RESULTS.append((f"criterion {number} ({title})", ok, detail))


@pytest.mark.acceptance
@pytest.mark.parametrize("number", sorted(CRITERIA))
def test_criterion(number):
    title, suite, tolerances, limit = CRITERIA[number]
    start = time.perf_counter()
    report = run_suite(suite, seed=SEED, only=set(tolerances))
    elapsed = time.perf_counter() - start
    found = {c.name: c for c in report.checks}
    assert set(found) == set(tolerances), "a named check is missing from the suite"

    failures, parts = [], []
    for name, tol in tolerances.items():
        c = found[name]
        if tol is None:
            parts.append(f"{name}={c.statistic:.4g} (informational)")
            continue
        ok = _within(c.statistic, tol)
        parts.append(f"{name}={c.statistic:.4g}")
        if not ok:
            failures.append(f"{name}: {c.statistic!r} vs {tol} {c.detail}".strip())
    if elapsed > limit:
        failures.append(f"runtime {elapsed:.1f}s above {limit:.0f}s")
    detail = f"{'; '.join(parts)}; {elapsed:.1f}s"
    _record(number, title, not failures, detail)
    assert not failures, failures


def _validate_json(threads, tmp_path, tag):
    path = tmp_path / f"report_{tag}.json"
    env = dict(os.environ)
    env.pop("FPT_LAB_THREADS", None)
    res = subprocess.run(
        [sys.executable, "-m", "fptlab", "--threads", str(threads), "validate", "all",
         "--seed", "7", "--budget", "0.02", "--format", "json", "--json", str(path)],
        capture_output=True, env=env, check=False)
    assert res.returncode in (0, 5), res.stderr.decode()
    return res.stdout, path.read_bytes()


@pytest.mark.acceptance
def test_criterion_9_determinism(tmp_path):
    start = time.perf_counter()
    out1, file1 = _validate_json(1, tmp_path, "a")
    out4, file4 = _validate_json(4, tmp_path, "b")
    ok = out1 == out4 == file1 == file4
    _record(9, "determinism", ok,
            f"validate all --seed 7 with 1 and 4 threads, {len(out1)} bytes, "
            f"{'identical' if ok else 'different'}; {time.perf_counter() - start:.1f}s")
    assert ok
