"""Exit criteria for the build, one test per criterion.

Each test appends a PASS/FAIL line that is printed in the pytest terminal
summary under "acceptance criteria".
"""

import json
import math
import time

import numpy as np
import pytest

from conftest import report, symmetric_setup
from eraser_sim.cli import main
from eraser_sim.engine import FLUX_QUANTUM, FieldGeometry, delta_phi_from_geometry, detector_overlap_nu, evolve
from eraser_sim.observables import closed_form_p_alpha, duality_check, joint_probabilities
from eraser_sim.oracle import oracle_state, random_setup
from eraser_sim.stochastic import (
    DephasingModel,
    SweepSpec,
    dephased_duality,
    estimate_probabilities,
    fit_fringe,
    measure_distinguishability_protocol,
    sample_shots,
    sweep,
)

pytestmark = pytest.mark.acceptance

PAIRS = [("alpha", "gamma"), ("alpha", "delta"), ("beta", "gamma"), ("beta", "delta")]
GRID_64 = np.linspace(0.0, 2.0 * math.pi, 64, endpoint=False)
GRID_16 = np.linspace(0.0, 2.0 * math.pi, 16, endpoint=False)


def test_ac01_oracle_equivalence():
    rng = np.random.default_rng(101)
    setups = [random_setup(rng, geometry=("setup1", "setup2")[k % 2]) for k in range(1000)]
    t0 = time.perf_counter()
    worst = max(float(np.max(np.abs(evolve(s).amp - oracle_state(s)))) for s in setups)
    elapsed = time.perf_counter() - t0
    ok = report("AC1 oracle equivalence", worst <= 1e-12 and elapsed < 5.0,
                f"max |evolve - oracle| = {worst:.2e} (tol 1e-12), {elapsed:.2f} s (limit 5 s)")
    assert ok


def test_ac02_fringe_law():
    rng = np.random.default_rng(202)
    worst_p = worst_amp = 0.0
    for k in range(100):
        base = random_setup(rng, geometry=("setup1", "setup2")[k % 2], R_range=(0.02, 0.98),
                            random_inputs=False)
        rows = sweep(SweepSpec("phi", GRID_64, base))
        for row in rows:
            worst_p = max(worst_p, abs(closed_form_p_alpha(row.setup) - row.single.p_alpha))
        fit = fit_fringe(rows, "alpha")
        nu = detector_overlap_nu(base.S3, base.delta_phi)
        law = 2 * nu.magnitude * math.sqrt(base.S1.R * base.S1.T * base.S2.R * base.S2.T)
        worst_amp = max(worst_amp, abs(fit.amplitude - law))
    ok = report("AC2 single-lead fringe law", worst_p <= 1e-12 and worst_amp <= 1e-9,
                f"closed form vs state {worst_p:.2e} (tol 1e-12); fitted amplitude vs 2|nu|sqrt(R1T1R2T2) "
                f"{worst_amp:.2e} (tol 1e-9)")
    assert ok


def test_ac03_which_path_destruction():
    base = symmetric_setup(math.pi)
    nu = detector_overlap_nu(base.S3, math.pi).magnitude
    dev = max(abs(r.single.p_alpha - 0.5) for r in sweep(SweepSpec("phi", GRID_64, base)))
    ok = report("AC3 which-path destruction", nu <= 1e-12 and dev <= 1e-12,
                f"|nu| = {nu:.2e} (tol 1e-12), max |P_alpha - 1/2| = {dev:.2e} (tol 1e-12)")
    assert ok


def test_ac04_erasure_by_joint_detection():
    worst = worst_vis = 0.0
    for R3 in (0.5, 0.3):
        T3 = 1 - R3
        for dphi in np.linspace(0.0, 2 * math.pi, 13):
            rows = sweep(SweepSpec("phi", GRID_64, symmetric_setup(float(dphi), R3=R3)))
            for r in rows:
                phi = r.value
                expected = {
                    ("alpha", "gamma"): R3 * (1 + math.cos(phi)) / 2,
                    ("alpha", "delta"): T3 * (1 + math.cos(phi + dphi)) / 2,
                    ("beta", "gamma"): R3 * (1 - math.cos(phi)) / 2,
                    ("beta", "delta"): T3 * (1 - math.cos(phi + dphi)) / 2,
                }
                worst = max(worst, max(abs(r.joint[p] - v) for p, v in expected.items()))
            for pair in PAIRS:
                worst_vis = max(worst_vis, abs(fit_fringe(rows, pair).visibility - 1.0))
    ok = report("AC4 erasure in joint detection", worst <= 1e-12 and worst_vis <= 1e-9,
                f"joint fringes vs closed forms {worst:.2e} (tol 1e-12); fitted joint visibility "
                f"max |V - 1| = {worst_vis:.2e} (tol 1e-9)")
    assert ok


def test_ac05_duality_identity():
    rng = np.random.default_rng(505)
    worst = 0.0
    for _ in range(1000):
        s = random_setup(rng, R_range=(0.01, 0.99))
        worst = max(worst, abs(duality_check(s).sum_of_squares - 1.0))
    marked = duality_check(symmetric_setup(math.pi, setup2=True, phi_d=0.0))
    erased = duality_check(symmetric_setup(1.3))
    dm = max(abs(marked.visibility - 0), abs(marked.distinguishability - 1))
    de = max(abs(erased.visibility - 1), abs(erased.distinguishability - 0))
    ok = report("AC5 duality identity", worst <= 1e-12 and dm <= 1e-12 and de <= 1e-12,
                f"max |V^2+D^2-1| = {worst:.2e}; marked (V,D)=({marked.visibility:.1e},"
                f"{marked.distinguishability:.12f}); erased (V,D)=({erased.visibility:.12f},"
                f"{erased.distinguishability:.1e}) (tol 1e-12)")
    assert ok


def test_ac06_protocol_consistency():
    rng = np.random.default_rng(606)
    hits = 0
    for trial in range(100):
        s = random_setup(rng, geometry="setup2", R_range=(0.1, 0.9), random_inputs=False)
        est = measure_distinguishability_protocol(s, 10**6, seed=trial)
        hits += abs(est.distinguishability - duality_check(s).distinguishability) < 0.01
    ok = report("AC6 distinguishability protocol", hits >= 95,
                f"{hits}/100 trials with |D_hat - D| < 0.01 at 1e6 shots (need >= 95)")
    assert ok


def test_ac07_monte_carlo_statistics():
    rng = np.random.default_rng(707)
    n = 10**6
    inside = cells = 0
    for run in range(100):
        s = random_setup(rng, R_range=(0.05, 0.95))
        p = joint_probabilities(evolve(s)).as_array()
        est = estimate_probabilities(sample_shots(s, n, seed=run)).joint.as_array()
        se = np.sqrt(p * (1 - p) / n)
        inside += int(np.sum(np.abs(est - p) <= 3 * se))
        cells += 4
    frac = inside / cells

    base = symmetric_setup(math.pi)
    rows = sweep(SweepSpec("phi", GRID_16, base, shots=n, seed=77))
    misses = []
    for r in rows:
        value, se = r.est_cross[("alpha", "gamma")]
        if not abs(value - math.cos(r.value) / 4) <= 3 * se:
            misses.append(round(r.value, 3))
    ok = report("AC7 Monte Carlo statistics", frac >= 0.99 and not misses,
                f"{inside}/{cells} cells within 3 SE ({frac:.2%}, need >= 99%); "
                f"S_alpha_gamma vs cos(phi)/4 outside 3 sigma at {len(misses)}/16 points")
    assert ok


def test_ac08_dephasing_inequality():
    s = symmetric_setup(math.pi / 2, setup2=True, phi_d=0.0)
    jittered, _ = dephased_duality(s, DephasingModel(1.0, 10**4, seed=8))
    pure, _ = dephased_duality(s, DephasingModel(0.0, 10**4, seed=8))
    ok = report("AC8 dephasing inequality",
                jittered.sum_of_squares < 1 and abs(pure.sum_of_squares - 1) <= 1e-9,
                f"sigma=1: V^2+D^2 = {jittered.sum_of_squares:.6f} (< 1); sigma=0: "
                f"|V^2+D^2-1| = {abs(pure.sum_of_squares - 1):.2e} (tol 1e-9)")
    assert ok


def test_ac09_unit_conversion():
    got = delta_phi_from_geometry(FieldGeometry(1.0, FLUX_QUANTUM / 2))
    got2 = delta_phi_from_geometry(FieldGeometry(2.0, FLUX_QUANTUM / 4))
    ok = report("AC9 flux to phase", got == math.pi and got2 == math.pi,
                f"H*dA = Phi0/2 gives {got!r} and {got2!r} (expected {math.pi!r})")
    assert ok


def test_ac10_determinism(tmp_path, monkeypatch):
    cfg = {
        "setup": {"S1": {"R": 0.4, "phase_t": 0.3}, "S2": {"R": 0.5}, "S3": {"R": 0.5},
                  "S4": {"R": 0.6, "phase_r": 1.0}, "delta_phi": 2.0},
        "sweep": {"parameter": "phi", "start": 0, "stop": 6.283185307179586, "points": 16, "shots": 50000},
        "sample": {"shots": 0, "seed": 2024},
    }
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg))
    outs = []
    for k, threads in enumerate(("1", "1", "4")):
        monkeypatch.setenv("ERASER_SIM_THREADS", threads)
        out = tmp_path / f"run{k}.csv"
        assert main(["sweep", str(path), "--out", str(out)]) == 0
        outs.append(out.read_bytes())
    same = outs[0] == outs[1] == outs[2]
    ok = report("AC10 determinism", same,
                f"three runs (1, 1, 4 threads) byte-identical: {same} ({len(outs[0])} bytes)")
    assert ok
