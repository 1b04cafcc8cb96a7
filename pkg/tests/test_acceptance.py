"""Acceptance criteria, each run at its stated tolerance.

Every test records one ``criterion N: PASS|FAIL ...`` line, printed as it
runs and again in the terminal summary.
"""

import itertools
import json
import math
import subprocess
import sys

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES, random_params
from kswave import cli
from kswave.heteroclinic import (CONVERGED, extract_profile, profile_distance, search_min_speed,
                                 shoot, shoot_fkpp)
from kswave.model import ConstantChi, ModelParams
from kswave.pde import (Grid1D, comoving_drift, comoving_residual, constant_profile,
                        estimate_speed, simulate, step_initial)
from kswave.regions import face_flux_report, verify_surface
from kswave.spectra import (ALL_REAL_NEGATIVE, COMPLEX_PRESENT, min_wave_speed,
                            origin_spectrum, surface_value)

SEED = 20240601
BISECTION_TOL = 1e-3
BRACKET = (0.25, 2.5)  # multiples of the closed-form speed


def record(capsys, n, ok, detail):
    line = f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES.append(line)
    with capsys.disabled():
        print("\n" + line)


def draws(n, seed=SEED):
    rng = np.random.default_rng(seed)
    return [random_params(rng) for _ in range(n)], rng


def empirical(p):
    cs = min_wave_speed(p).c_star
    return search_min_speed(p, (BRACKET[0] * cs, BRACKET[1] * cs), BISECTION_TOL).c_star


@pytest.fixture(scope="module")
def logistic_grid():
    out = {}
    for mu, beta, frac in itertools.product((0.25, 1.0, 4.0), (0.5, 1.0, 2.0), (0.0, 0.5, 1.0)):
        out[(mu, beta, frac)] = empirical(ModelParams(mu, beta, 0.0, ConstantChi(frac * mu)))
    return out


def test_criterion_01_min_speed_without_diffusion(logistic_grid, capsys):
    errs = {k: abs(v - 2 * math.sqrt(k[0])) / (2 * math.sqrt(k[0])) for k, v in logistic_grid.items()}
    worst = max(errs, key=errs.get)
    ok = len(errs) == 27 and errs[worst] < 0.01
    record(capsys, 1, ok, f"27 cells, worst relative error {errs[worst]:.2e} at "
                          f"(mu, beta, chi/mu) = {worst}")
    assert ok


def test_criterion_02_min_speed_with_diffusion(capsys):
    bad = []
    worst = 0.0
    for d, mu, beta in itertools.product((0.25, 1.0), (1.0, 4.0), (1.0, 4.0)):
        p = ModelParams(mu, beta, d, ConstantChi(mu))
        closed = 2 * max(math.sqrt(mu), math.sqrt(d * beta))
        err = abs(empirical(p) - closed) / closed
        worst = max(worst, err)
        if err >= 0.02:
            bad.append(f"(D={d:g}, mu={mu:g}, beta={beta:g}): rel err {err:.3f}")
    ok = not bad
    record(capsys, 2, ok, f"8 cells, worst relative error {worst:.3e}"
                          + ("" if ok else "; outside 2%: " + ", ".join(bad)))
    assert ok


def test_criterion_03_chi_independence(logistic_grid, capsys):
    spreads = {}
    for mu, beta in itertools.product((0.25, 1.0, 4.0), (0.5, 1.0, 2.0)):
        vals = [logistic_grid[(mu, beta, f)] for f in (0.0, 0.5, 1.0)]
        spreads[(mu, beta)] = max(vals) - min(vals)
    worst = max(spreads, key=spreads.get)
    ok = spreads[worst] < 2 * BISECTION_TOL
    record(capsys, 3, ok, f"largest spread across chi {spreads[worst]:.2e} at (mu, beta) = {worst}"
                          f", limit {2 * BISECTION_TOL:g}")
    assert ok


def _closed_roots(p, c):
    def quad(a, b, k):
        s = complex(b * b - 4 * a * k) ** 0.5
        return [(-b + s) / (2 * a), (-b - s) / (2 * a)]
    roots = quad(1.0, c, p.mu) + ([-p.beta / c] if p.diff == 0 else quad(p.diff, c, p.beta))
    return sorted(roots, key=lambda z: (z.real, z.imag))


def test_criterion_04_spectral_classification(capsys):
    params, _ = draws(20, SEED + 4)
    failures, worst = [], 0.0
    for p in params:
        cs = min_wave_speed(p).c_star
        for c, want in ((cs * (1 - 1e-3), COMPLEX_PRESENT), (cs * (1 + 1e-3), ALL_REAL_NEGATIVE)):
            rep = origin_spectrum(p, c)
            err = max(abs(a - b) for a, b in zip(rep.eigenvalues, _closed_roots(p, c)))
            worst = max(worst, err)
            if rep.classification != want or err > 1e-10:
                failures.append((p, c, rep.classification, err))
    ok = not failures
    record(capsys, 4, ok, f"20 draws x 2 speeds, worst eigenvalue error {worst:.1e}, "
                          f"{len(failures)} failures")
    assert ok


def test_criterion_05_trapping_faces(capsys):
    params, rng = draws(20, SEED + 5)
    bad = []
    for p in params:
        cs = min_wave_speed(p).c_star
        c = float(rng.uniform(cs, 3 * cs))
        for rep in face_flux_report(p, c, 10_000):
            if rep.face != "W0" and rep.worst_margin < -1e-12:
                bad.append(f"mu={p.mu:.3f} beta={p.beta:.3f} D={p.diff:.3f} "
                           f"chi={p.chi.kappa:.3f} c/c*={c / cs:.3f} {rep.face} "
                           f"margin {rep.worst_margin:.3e}")
    ok = not bad
    record(capsys, 5, ok, "20 draws, all non-W0 faces inward" if ok else
           f"{len(bad)} inward-flux violations: " + "; ".join(bad))
    assert ok


def test_criterion_06_surface_condition(capsys):
    cells = [ModelParams(mu, beta, 0.0, ConstantChi(f * mu))
             for mu, beta, f in itertools.product((0.25, 1.0, 4.0), (0.5, 1.0, 2.0), (0.0, 0.5, 1.0))]
    cells += [ModelParams(mu, beta, d, ConstantChi(mu))
              for d, mu, beta in itertools.product((0.25, 1.0), (1.0, 4.0), (1.0, 4.0))]
    worst, bad = -math.inf, []
    for p in cells:
        cs = min_wave_speed(p).c_star
        for c in (cs, 1.5 * cs, 3 * cs):
            chk = verify_surface(p, c, c / 2, 200, 50)
            worst = max(worst, chk.worst_value)
            if not (chk.holds and chk.worst_value <= 1e-12):
                bad.append((p, c, chk.worst_value))
    val = surface_value((0.0, 0.0), ModelParams(1.0, 1.0, 0.0), 2.0, 5 * 2.0 / 8)
    ok = not bad and abs(val - 0.0625) <= 1e-12
    record(capsys, 6, ok, f"{len(cells)} parameter sets x 3 speeds, max surface value {worst:.2e}; "
                          f"eta = 5c/8 at the origin gives {val!r}")
    assert ok


@pytest.fixture(scope="module")
def orbit_draws():
    params, _ = draws(10, SEED)
    out = []
    for p in params:
        c = min_wave_speed(p).c_star + 0.5
        out.append((p, c, shoot(p, c)))
    return out


def test_criterion_07_orbit_properties(orbit_draws, capsys):
    bad, worst_order, worst_mono = [], 0.0, 0.0
    for p, c, o in orbit_draws:
        if o.kind != CONVERGED:
            bad.append(f"{p.to_dict()} c={c:.3f}: {o.kind}")
            continue
        prof = extract_profile(o)
        for U, V in ((o.trajectory.states[:, 0], o.trajectory.states[:, 1]), (prof.U, prof.V)):
            t = p.beta * V
            order = float(np.max(np.concatenate([-U, U - t, t - 1.0])))
            mono = float(max(np.max(np.diff(U)), np.max(np.diff(V))))
            worst_order, worst_mono = max(worst_order, order), max(worst_mono, mono)
            if order > 1e-6 or mono > 1e-6:
                bad.append(f"{p.to_dict()} c={c:.3f}: ordering {order:.1e}, increase {mono:.1e}")
    ok = not bad
    record(capsys, 7, ok, f"10 draws at c*+0.5, worst ordering excess {worst_order:.1e}, "
                          f"worst increase {worst_mono:.1e}" + ("" if ok else "; " + "; ".join(bad)))
    assert ok


def test_criterion_08_wave_residual(orbit_draws, capsys):
    kpp = ModelParams(1.0, 1.0, 0.0, ConstantChi(0.0))
    profiles = [(kpp, extract_profile(shoot(kpp, 2.5)))]
    profiles += [(p, extract_profile(o)) for p, _, o in orbit_draws if o.kind == CONVERGED]
    res = [comoving_residual(prof, p) for p, prof in profiles]
    flat = max(comoving_residual(constant_profile(1.0, 1.0 / p.beta, c), p)
               for p, c, _ in orbit_draws)
    ok = all(r < 1e-4 for r in res) and all(prof.xi.size == 2048 for _, prof in profiles) \
        and flat < 1e-12
    record(capsys, 8, ok, f"{len(res)} profiles, max residual {max(res):.2e}; "
                          f"constant profile residual {flat:.1e}")
    assert ok


def test_criterion_09_fisher_kpp_cross_check(capsys):
    gaps = []
    for c in (2.1, 2.5, 3.0, 5.0):
        a = extract_profile(shoot(ModelParams(1.0, 1.0, 0.0, ConstantChi(0.0)), c))
        b = extract_profile(shoot_fkpp(1.0, c), beta=1.0)
        lo, hi = max(a.xi[0], b.xi[0]), min(a.xi[-1], b.xi[-1])
        xs = np.linspace(lo, hi, 4001)
        sa, sb = a.at(xs), b.at(xs)
        gaps.append(max(profile_distance(a, b, (0,)), float(np.max(np.abs(sa[:, 2] - sb[:, 1])))))
    p = ModelParams(1.0, 1.0, 0.0, ConstantChi(0.0))
    g = Grid1D(300.0, 3000)
    sol = simulate(p, g, step_initial(g, p, 20.0), 60.0)
    speed, err = estimate_speed(sol.front_series, (30.0, 60.0))
    ok = max(gaps) < 1e-6 and 1.90 <= speed <= 2.02
    record(capsys, 9, ok, f"2D vs 3D (U, W) gap {max(gaps):.1e}; lab-frame speed "
                          f"{speed:.4f} +/- {err:.1e}")
    assert ok


def test_criterion_10_comoving_stationarity(capsys):
    p = ModelParams(1.0, 1.0, 0.0, ConstantChi(0.0))
    prof = extract_profile(shoot(p, 2.5))
    # the left edge sits at xi = -35, where the zero-flux condition matches the profile slope to
    # ~1e-6; closer in, the boundary layer sets a grid-independent floor that v amplifies by e^t
    drifts = []
    for n in (2000, 4000, 8000):
        du, dv, _ = comoving_drift(p, prof, Grid1D(80.0, n), 35.0, 10.0)
        drifts.append(max(du, dv))
    orders = [math.log2(drifts[i] / drifts[i + 1]) for i in range(2)]
    ok = drifts[-1] < 1e-2 and all(q >= 1.5 for q in orders)
    record(capsys, 10, ok, "drift at dx = 0.04, 0.02, 0.01: "
                           + ", ".join(f"{d:.2e}" for d in drifts)
                           + "; observed orders " + ", ".join(f"{q:.2f}" for q in orders))
    assert ok


def test_criterion_11_determinism(tmp_path, capsys):
    cmd = [sys.executable, "-m", "kswave.cli", "speed", "--mu", "1", "--beta", "4", "--D", "1",
           "--chi", "const:mu", "--json"]
    outs = [subprocess.run(cmd, capture_output=True, check=True).stdout for _ in range(3)]
    same_speed = outs[0] == outs[1] == outs[2] and json.loads(outs[0])["c_star"] == 4.0
    csvs = []
    for k in range(2):
        root = tmp_path / f"run{k}"
        code = cli.main(["sweep", "--mu", "1", "0.25", "--beta", "1", "2", "--D", "0",
                         "--chi", "const:0", "const:mu/2", "--tol", "1e-2", "--out", str(root)])
        assert code == 0
        (d,) = list(root.iterdir())
        csvs.append((d / "sweep.csv").read_text())
    header = csvs[0].splitlines()[0]
    keys = [tuple(line.split(",")[:4]) for line in csvs[0].splitlines()[1:]]
    expected = [(repr(m), repr(b), "0.0", ch) for m, b, ch in
                itertools.product((1.0, 0.25), (1.0, 2.0), ("const:0", "const:mu/2"))]
    ok = (same_speed and csvs[0] == csvs[1]
          and header == "mu,beta,D,chi_id,c_star_closed,c_star_empirical,abs_err,outcome_counts"
          and keys == expected)
    record(capsys, 11, ok, f"speed JSON identical over 3 runs: {same_speed}; sweep CSV identical "
                           f"over 2 runs: {csvs[0] == csvs[1]}; header and row order as expected: "
                           f"{keys == expected}")
    assert ok
