"""Acceptance criteria 1-10, one PASS/FAIL line each.

Run with ``pytest tests/test_acceptance.py -v`` or directly with
``python tests/test_acceptance.py``.
"""

import math
import shutil
import sys
import tempfile
from pathlib import Path

import numpy as np
import pytest

from levinson2d import cli, specfun
from levinson2d import potential as pot
from levinson2d import radial, scattering, spectrum

sys.path.insert(0, str(Path(__file__).resolve().parent))
import oracles  # noqa: E402
from cases import random_step_stacks  # noqa: E402

PI = math.pi
X0_GRID = (0.5, 1.0, 1.5, 2.0, 3.0, 3.5, 4.5, 5.0, 6.0)


def report(number, ok, detail):
    line = f"ACCEPTANCE {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
    capman = getattr(report, "capsys", None)
    if capman is not None:
        with capman.disabled():
            print("\n" + line)
    else:
        print(line)
    assert ok, line


@pytest.fixture(autouse=True)
def _uncaptured(capsys):
    report.capsys = capsys
    yield
    report.capsys = None


def _excluded(x0, m):
    order = abs(m - 1)
    return any(abs(x0 - z) <= 0.1 for z in oracles.j_zeros(order, 10.0))


def test_criterion_01_levinson_cutoff():
    worst = 0.0
    cases = 0
    for x0 in X0_GRID:
        p = pot.SquareWell.from_x0(x0)
        for m in range(4):
            if _excluded(x0, m):
                continue
            n = oracles.matching_root_count(x0, m)
            lim = scattering.zero_momentum_limit(p, m)
            worst = max(worst, abs(lim.raw - n * PI), abs(scattering.zero_momentum_phase(p, m) - n * PI))
            cases += 1
    report(1, worst <= 0.05 * PI, f"{cases} channels, max |eta0 - n pi| = {worst / PI:.2e} pi")


def test_criterion_02_half_bound_p():
    p = pot.SquareWell.from_x0(2.404825557695773)
    cls = spectrum.classify_threshold(p, 1)
    n = spectrum.find_bound_states(p, 1).count
    eta = scattering.zero_momentum_limit(p, 1).eta0
    ok = cls == "half_bound_p" and n == 0 and 0.9 * PI <= eta <= 1.1 * PI
    report(2, ok, f"class={cls}, n_1={n}, eta_1(0)={eta / PI:.6f} pi")


def test_criterion_03_half_bound_s():
    p = pot.SquareWell.from_x0(3.831705970207512)
    cls = spectrum.classify_threshold(p, 0)
    n = spectrum.find_bound_states(p, 0).count
    eta = scattering.zero_momentum_limit(p, 0).eta0
    ok = cls == "half_bound_s" and n == 1 and 0.9 * PI <= eta <= 1.1 * PI
    report(3, ok, f"class={cls}, n_0={n}, eta_0(0)={eta / PI:.6f} pi")


def test_criterion_04_zero_energy_bound():
    p = pot.SquareWell.from_x0(3.831705970207512)
    cls = spectrum.classify_threshold(p, 2)
    n = spectrum.find_bound_states(p, 2).count
    eta = scattering.zero_momentum_limit(p, 2).eta0
    ok = cls == "zero_energy_bound" and n == 1 and 0.9 * PI <= eta <= 1.1 * PI
    report(4, ok, f"class={cls}, n_2={n}, eta_2(0)={eta / PI:.6f} pi")


def test_criterion_05_oracle_equivalence():
    worst_A = 0.0
    worst_eta = 0.0
    for x0 in (1.0, 3.0, 6.0):
        p = pot.SquareWell.from_x0(x0)
        for m in range(4):
            for E in np.linspace(-x0 * x0 + 0.1, 4.0, 12):
                q = math.sqrt(E + x0 * x0)
                if abs(oracles.j_series(m, q)) < 1e-3:
                    continue
                ref = oracles.square_well_interior_A(x0, m, E)
                got = radial.integrate_interior(p, float(m), E).A
                worst_A = max(worst_A, abs(got - ref) / max(1.0, abs(ref)))
            eta = scattering.phase_by_lambda_continuation(p, m, 0.5)
            ref = math.atan(oracles.square_well_tan_phase(x0, m, 0.5))
            worst_eta = max(worst_eta, abs((eta - ref + PI / 2) % PI - PI / 2))
    ok = worst_A <= 1e-8 and worst_eta <= 1e-6
    report(5, ok, f"max A error {worst_A:.1e}, max phase error {worst_eta:.1e} rad")


def test_criterion_06_monotonicity():
    rng = np.random.default_rng(6)
    bad = 0
    for _ in range(50):
        kind = rng.integers(0, 3)
        if kind == 0:
            p = pot.SquareWell.from_x0(rng.uniform(0.5, 7.0), r0=rng.uniform(0.5, 2.0))
        elif kind == 1:
            p = pot.truncated_gaussian(-rng.uniform(1, 40), rng.uniform(0.2, 1.0), rng.uniform(0.8, 2.0))
        else:
            p = random_step_stacks(1, seed=int(rng.integers(1 << 30)))[0][0]
        nu = float(rng.integers(0, 4))
        V_min = -float(np.min(pot.eval(p, np.linspace(1e-3, p.r0, 400), 1.0)))
        E = -rng.uniform(0.01, max(V_min, 1.0) * 1.2)
        h = 1e-6 * max(1.0, abs(E))
        lo, hi = radial.integrate_interior(p, nu, E - h), radial.integrate_interior(p, nu, E + h)
        if lo.nodes == hi.nodes and not (hi.A < lo.A):
            bad += 1
        ext = scattering.exterior_log_derivative(nu, E + h, p.r0) - scattering.exterior_log_derivative(nu, E - h, p.r0)
        if not ext > 0:
            bad += 1
    lam_bad = 0
    for x0 in (2.0, 4.0, 6.5):
        for m in (0, 1, 2):
            for k in (0.05, 0.5):
                _, tr = scattering.phase_with_trace(pot.SquareWell.from_x0(x0), m, k)
                lam_bad += int(np.any(np.diff(tr.phases) < -1e-9))
    report(6, bad == 0 and lam_bad == 0, f"{bad} energy violations in 50 samples, {lam_bad} lambda violations in 18 paths")


def test_criterion_07_counting_equivalence():
    stacks = random_step_stacks(20, seed=7)
    mismatches = 0
    for p, m in stacks:
        if spectrum.count_via_nodes(p, m) != spectrum.find_bound_states(p, m).count:
            mismatches += 1
    counts = [spectrum.count_via_nodes(p, m) for p, m in stacks]
    report(7, mismatches == 0, f"20 step stacks, counts {counts}, {mismatches} mismatches")


def test_criterion_08_tails():
    core = pot.SquareWell.from_x0(3.0)
    worst2 = 0.0
    parts = []
    for b in (0.5, 1.25, 3.0):
        p = pot.core_plus_inverse_square(core, b)
        nu = math.sqrt(1.0 + b)
        n = spectrum.find_bound_states(p, 1).count
        eta = scattering.zero_momentum_limit(p, 1).raw
        res = abs(eta - (1 - nu) * PI / 2 - n * PI)
        worst2 = max(worst2, res)
        parts.append(f"b={b}: n={n}")
    p4 = pot.inverse_power_tail(core, 1.0, 4.0)
    worst4 = 0.0
    for m in range(4):
        n = spectrum.find_bound_states(p4, m).count
        worst4 = max(worst4, abs(scattering.zero_momentum_limit(p4, m).raw - n * PI))
    ok = worst2 <= 0.08 * PI and worst4 <= 0.05 * PI
    report(8, ok, f"n=2 tails ({', '.join(parts)}) max {worst2 / PI:.1e} pi; n=4 tail max {worst4 / PI:.1e} pi")


def test_criterion_09_wronskians():
    worst = 0.0
    for nu in (0.0, 0.5, 1.0, 1.118, 2.0, 3.0):
        for x in np.geomspace(1e-4, 50.0, 200):
            j, y = specfun.bessel_j(nu, x), specfun.bessel_y(nu, x)
            i, k = specfun.bessel_i(nu, x), specfun.bessel_k(nu, x)
            w1 = (j.value * y.derivative - j.derivative * y.value) * PI * x / 2 - 1.0
            w2 = (i.value * k.derivative - i.derivative * k.value) * x + 1.0
            worst = max(worst, abs(w1), abs(w2))
    report(9, worst <= 1e-10, f"max relative Wronskian error {worst:.1e}")


def test_criterion_10_reproducible_json():
    tmp = Path(tempfile.mkdtemp())
    try:
        configs = []
        for x0 in X0_GRID:
            configs.append((f"x{x0}", f"[potential]\nshape = square_well\nx0 = {x0!r}\n[run]\nchannels = 0,1,2,3\n"))
        configs.append(("p", "[potential]\nshape = square_well\nx0 = 2.404825557695773\n[run]\nchannels = 1\n"))
        configs.append(("s", "[potential]\nshape = square_well\nx0 = 3.831705970207512\n[run]\nchannels = 0,2\n"))
        differing = 0
        files = 0
        for name, text in configs:
            cfg = tmp / f"{name}.ini"
            cfg.write_text(text)
            for run in ("a", "b"):
                cli.main(["levinson", "--config", str(cfg), "--out", str(tmp / run / name), "--format", "json"])
            for f in sorted((tmp / "a" / name).glob("*.json")):
                files += 1
                differing += f.read_bytes() != (tmp / "b" / name / f.name).read_bytes()
        report(10, files > 0 and differing == 0, f"{files} JSON reports, {differing} differ between runs")
    finally:
        shutil.rmtree(tmp)


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q"]))
