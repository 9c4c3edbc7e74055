"""Acceptance suite: eight end-to-end criteria at their stated tolerances.

Each check returns ``(ok, detail)``; the pytest wrappers print one
PASS/FAIL line per criterion (visible even with output capture on) and then
assert. ``python tests/test_acceptance.py`` runs the same checks standalone.
"""

import csv
import math
import sys
import time
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from conftest import quadratic_min_root  # noqa: E402
from nkcert.cli import main as cli_main  # noqa: E402
from nkcert.criteria import (  # noqa: E402
    EARLIER_ARGYROS_THRESHOLD,
    check_argyros,
    check_kantorovich,
    check_new_general,
    check_new_lipschitz,
    compare_criteria,
)
from nkcert.driver import TraceStatus, run_certified  # noqa: E402
from nkcert.majorant import (  # noqa: E402
    MajorantModel,
    argyros_map,
    majorant_sequence,
    majorant_values,
    omega_bound,
    omega_majorant,
    psi,
    rheinboldt_sequence,
)
from nkcert.modulus import (  # noqa: E402
    LinearModulus,
    LipschitzPair,
    PiecewiseLinearModulus,
    PowerModulus,
)
from nkcert.problem import eta_of, load_builtin  # noqa: E402

SQRT2 = math.sqrt(2.0)
NEW_EXPECTED = 0.17157287525381
RATIO_EXPECTED = 0.34314575050762
EARLIER_ARGYROS_EXPECTED = 0.13397459621556
SEED = 20240611


def criterion_1():
    """Threshold constants for the new condition and the critical ratio."""
    worst = 0.0
    for l0 in (0.01, 0.5, 1.0, 7.0, 250.0):
        cert = check_new_lipschitz(LipschitzPair(l0, l0), 0.01 / l0, 10.0 / l0)
        worst = max(worst, abs(cert.eta_max * l0 - (3 - 2 * SQRT2)),
                    abs(cert.eta_max * l0 - NEW_EXPECTED))
    verdict, _ = compare_criteria(LipschitzPair(0.3, 1.0), 0.1, 1.0)
    ratio_err = max(abs(verdict.critical_ratio - (6 - 4 * SQRT2)),
                    abs(verdict.critical_ratio - RATIO_EXPECTED))
    ok = worst <= 1e-12 and ratio_err <= 1e-12
    return ok, f"eta_max*l0 err {worst:.1e}, critical ratio {verdict.critical_ratio:.14f} err {ratio_err:.1e}"


def criterion_2():
    """Kantorovich passes exactly for l*eta <= 1/2 on a 1000-point grid."""
    rng = np.random.default_rng(SEED)
    letas = list(np.linspace(0.0, 1.0, 996)) + [0.5, 0.5 + 5e-16, 0.5 + 1e-14, 0.5 - 1e-15]
    mismatches = 0
    for leta in letas:
        l = 10 ** rng.uniform(-2, 2)
        # l = 1 keeps l*eta exact at the boundary; the scaled copy covers other l away from it
        cert = check_kantorovich(LipschitzPair(1.0, 1.0), float(leta))
        scaled = check_kantorovich(LipschitzPair(l, l), float(leta) / l)
        expected = leta <= 0.5 + 1e-15
        if cert.passed != expected:
            mismatches += 1
        if abs(leta - 0.5) > 1e-12 and scaled.passed != expected:
            mismatches += 1
    return mismatches == 0, f"{len(letas)} grid points, {mismatches} mismatches"


def criterion_3():
    """Argyros passes iff l0*eta <= 0.1 (+1e-12) on a 1000-point grid."""
    rng = np.random.default_rng(SEED)
    grid = [0.0002 * k for k in range(997)] + [0.1, 0.1 + 1e-13, 0.1 + 1e-9]
    mismatches = []
    for lam in grid:
        l0 = 10 ** rng.uniform(-1, 1)
        cert = check_argyros(MajorantModel(LinearModulus(l0), lam / l0, 0.5 / l0), with_eta_max=False)
        if cert.passed != (lam <= 0.1 + 1e-12):
            mismatches.append(lam)
    const_err = abs(EARLIER_ARGYROS_THRESHOLD - EARLIER_ARGYROS_EXPECTED)
    ok = not mismatches and const_err <= 1e-12
    return ok, (f"{len(grid)} grid points, mismatches {mismatches[:3]}; "
                f"(2-sqrt(3))/2 = {EARLIER_ARGYROS_THRESHOLD:.14f}")


def criterion_4():
    """General iterate-and-bisect path reproduces the closed-form v*."""
    rng = np.random.default_rng(SEED)
    worst = 0.0
    failures = 0
    for _ in range(1000):
        l0 = 10 ** rng.uniform(-1, 1)
        eta = rng.uniform(0.0, 0.17) / l0
        R = rng.uniform(0.3, 0.99) / l0
        closed = check_new_lipschitz(LipschitzPair(l0, l0), eta, R)
        general = check_new_general(MajorantModel(LinearModulus(l0), eta, R), with_eta_max=False)
        if not (closed.passed and general.passed):
            failures += 1
            continue
        oracle = quadratic_min_root(l0, eta)
        err = max(abs(general.v_star - closed.v_star), abs(closed.v_star - oracle))
        worst = max(worst, err / max(1.0, closed.v_star))
    return failures == 0 and worst <= 1e-10, f"1000 cases, {failures} not certified, max |dv*| {worst:.1e}"


def _certified_instances():
    yield "scalar-sqrt2@1.4", load_builtin("scalar-sqrt2", x0=1.4)
    yield "scalar-sqrt2@1.3", load_builtin("scalar-sqrt2", x0=1.3)
    yield "scalar-sqrt2@1.6", load_builtin("scalar-sqrt2", x0=1.6)
    yield "scalar-exp", load_builtin("scalar-exp")
    yield "2d-quadratic", load_builtin("2d-quadratic")
    yield "affine", load_builtin("affine")


def criterion_5():
    """All audits pass on every builtin instance with a passing certificate."""
    bad = []
    count = 0
    for label, problem in _certified_instances():
        sys_ = problem.system
        model = MajorantModel(problem.analytic_modulus, eta_of(sys_), sys_.R)
        if not check_new_general(model, with_eta_max=False).passed:
            continue
        count += 1
        trace = run_certified(sys_, model)
        ok = (trace.status is TraceStatus.CONVERGED and trace.audits_passed
              and trace.final_residual <= 1e-12 and trace.iterations <= 100
              and all(a.ball_ok for a in trace.audits)
              and all(a.step_bound_ok for a in trace.audits[:-1]))
        if not ok:
            bad.append(label)
    return count >= 4 and not bad, f"{count} certified instances, failing: {bad or 'none'}"


DOMINATION_MODULI = {
    "linear": LinearModulus(0.9),
    "power": PowerModulus(0.8, 0.5),
    "table": PiecewiseLinearModulus(((0.0, 0.0), (0.1, 0.02), (0.4, 0.15), (0.7, 0.4), (1.0, 0.6))),
}


def criterion_6():
    """Omega <= Omega_bar, Omega_bar telescopes to psi, and f >= psi."""
    R, eta = 0.9, 0.05
    worst_dom = worst_tel = worst_f = -math.inf
    strict_ok = True
    for modulus in DOMINATION_MODULI.values():
        model = MajorantModel(modulus, eta, R)
        for r in np.linspace(0.0, R, 50):
            for t in np.linspace(0.0, R - r, 50):
                lower = omega_bound(model, t, r + t, r)
                upper = omega_majorant(model, t, r + t, r)
                worst_dom = max(worst_dom, lower - upper)
                worst_tel = max(worst_tel, abs(upper - (psi(model, r + t) - psi(model, r))))
        for v in np.linspace(0.0, R, 50):
            worst_f = max(worst_f, psi(model, v) - argyros_map(model, v))
        if modulus.strictly_increasing:
            for v in np.linspace(0.0, R, 12)[1:-1]:
                strict_ok &= argyros_map(model, v) > psi(model, v)
    ok = worst_dom <= 1e-12 and worst_tel <= 1e-12 and worst_f <= 1e-12 and strict_ok
    return ok, (f"max(Omega-Omega_bar) {worst_dom:.1e}, telescoping err {worst_tel:.1e}, "
                f"max(psi-f) {worst_f:.1e}, strict at interior points {strict_ok}")


def criterion_7():
    """Rheinboldt increments are dominated by the majorizing increments."""
    rng = np.random.default_rng(SEED)
    models = 0
    worst_inc = worst_val = -math.inf
    while models < 100:
        # R is where omega0 reaches 0.95
        if models % 2 == 0:
            modulus = LinearModulus(10 ** rng.uniform(-1, 1))
            R = 0.95 / modulus.l0
        else:
            modulus = PowerModulus(10 ** rng.uniform(-1, 0.5), rng.uniform(0.2, 1.0))
            R = (0.95 / modulus.c) ** (1.0 / modulus.p)
        eta = rng.uniform(0.0, 0.3) * R
        model = MajorantModel(modulus, eta, R)
        seq = majorant_sequence(model)
        if not seq.converged or eta == 0:
            continue
        models += 1
        u = rheinboldt_sequence(model).values
        v = majorant_values(model, len(u) - 1, seq.v_star)
        for k in range(1, len(u)):
            worst_inc = max(worst_inc, (u[k] - u[k - 1]) - (v[k] - v[k - 1]))
            worst_val = max(worst_val, u[k] - v[k])
    ok = worst_inc <= 1e-12 and worst_val <= 1e-12
    return ok, f"{models} certified models, max increment excess {worst_inc:.1e}, max u-v {worst_val:.1e}"


def criterion_8(tmp_dir: Path):
    """Sweep at l*eta = 0.5 brackets 6 - 4 sqrt 2 within one grid cell."""
    out = tmp_dir / "sweep.csv"
    code = cli_main(["sweep", "--ratio", "0.3400:0.3460:0.0001", "--leta", "0.5", "--out", str(out)])
    with open(out, newline="") as fh:
        rows = list(csv.DictReader(fh))
    ratios = [float(r["ratio"]) for r in rows]
    new = [r["new"] == "true" for r in rows]
    kant = all(r["kantorovich"] == "true" for r in rows)
    flips = [i for i in range(len(new) - 1) if new[i] != new[i + 1]]
    critical = 6 - 4 * SQRT2
    ok = (code == 0 and kant and len(flips) == 1 and new[0] and not new[-1]
          and ratios[flips[0]] <= critical < ratios[flips[0] + 1]
          and ratios[flips[0] + 1] - ratios[flips[0]] <= 1e-4 + 1e-12)
    bracket = (ratios[flips[0]], ratios[flips[0] + 1]) if flips else None
    return ok, f"{len(rows)} cells, crossover bracket {bracket} around {critical:.10f}"


CRITERIA = [
    (1, criterion_1, 1.0),
    (2, criterion_2, 1.0),
    (3, criterion_3, 5.0),
    (4, criterion_4, 10.0),
    (5, criterion_5, 1.0),
    (6, criterion_6, 5.0),
    (7, criterion_7, 5.0),
    (8, criterion_8, 10.0),
]


def _run(number, check, budget, *args):
    start = time.perf_counter()
    ok, detail = check(*args)
    elapsed = time.perf_counter() - start
    timely = elapsed <= budget
    status = "PASS" if ok and timely else "FAIL"
    line = f"criterion {number}: {status} ({elapsed:.2f}s of {budget:.0f}s) {detail}"
    return ok and timely, line


@pytest.mark.acceptance
@pytest.mark.parametrize("number,check,budget", CRITERIA, ids=[f"criterion_{n}" for n, _, _ in CRITERIA])
def test_acceptance(number, check, budget, capsys, tmp_path):
    args = (tmp_path,) if number == 8 else ()
    ok, line = _run(number, check, budget, *args)
    with capsys.disabled():
        print("\n" + line)
    assert ok, line


if __name__ == "__main__":
    import tempfile

    results = []
    with tempfile.TemporaryDirectory() as tmp:
        for number, check, budget in CRITERIA:
            args = (Path(tmp),) if number == 8 else ()
            ok, line = _run(number, check, budget, *args)
            print(line)
            results.append(ok)
    sys.exit(0 if all(results) else 1)
