"""End-to-end acceptance checks at the stated tolerances.

Each test records one pass/fail line, printed in the terminal summary.
"""

import itertools
import math

import numpy as np
import pytest

from nfswarm import geometry, sensing, simulation as sim, snr_analysis as sa, tensorops, validation
from nfswarm import wavefront as wf
from nfswarm.config import RunConfig
from nfswarm.estimation import (NelderMeadOptions, nelder_mead, omp, sd_omp_offgrid, sd_omp_ongrid,
                                sd_projection_flops, tensor_omp_offgrid,
                                tensor_omp_ongrid, tensor_projection_flops)
from nfswarm.geometry import ArrayConfig, reference_config

THETA, PHI = math.radians(30), math.radians(45)


@pytest.fixture(scope="module")
def ref_grid():
    cfg = reference_config()
    return cfg, sensing.build_grid(cfg)


def test_rayleigh_distance(acceptance):
    r_ref = geometry.rayleigh_distance(reference_config())
    r_intro = geometry.rayleigh_distance(ArrayConfig(m_x=2, m_y=2))
    ok = abs(r_ref - 444.63) <= 0.01 and r_intro > 110
    assert acceptance(1, ok, f"R = {r_ref:.4f} m (reference config), {r_intro:.2f} m (2x2 swarm)")


def test_pwm_law(acceptance):
    base = reference_config()
    ref = sa.SnrScenario(base, 0.0, 0.0, 50.0)
    expected = ref.p_bar * ref.beta0 * base.num_elements / ref.range ** 2
    worst_closed, worst_vec = 0.0, 0.0
    lattice = itertools.product(np.linspace(0.1, 3.0, 5), np.linspace(-1.2, 1.2, 5), np.linspace(10, 100, 5))
    for theta, phi, dfac in lattice:
        cfg = base.replace(dx_factor=dfac, dy_factor=dfac)
        s = sa.SnrScenario(cfg, theta, phi, 50.0)
        worst_closed = max(worst_closed, abs(sa.snr_pwm(s) - expected))
        g = wf.steering_pwm(cfg, theta, phi, 50.0)
        worst_vec = max(worst_vec, abs(sa.snr_mrc(g) / expected - 1))
    # the closed form is bit-identical across the lattice; the response vectors
    # agree up to rounding in |exp(jx)|^2
    ok = worst_closed == 0.0 and worst_vec <= 1e-12
    assert acceptance(2, ok, f"closed-form spread {worst_closed:.1e}, vector energy rel. err. {worst_vec:.1e}")


def test_model_agreement(acceptance):
    scn = sa.SnrScenario(reference_config(), THETA, PHI, 50.0)
    sweeps = {"uav_spacing": [10.0 * k for k in range(1, 11)], "element_count": list(range(1, 17))}
    hs_worst, pwm_at_largest = 0.0, {}
    for axis, grid in sweeps.items():
        rows = sa.snr_sweep(scn, axis, grid)
        hs_worst = max(hs_worst, max(abs(r.gamma_hspwm - r.gamma_swm) / r.gamma_swm for r in rows))
        ap = [geometry.apertures(sa.sweep_scenario(scn, axis, v).cfg)[2] for v in grid]
        r = rows[int(np.argmax(ap))]
        pwm_at_largest[axis] = abs(r.gamma_pwm - r.gamma_swm) / r.gamma_swm
    ok = hs_worst < 0.02 and all(v > 0.05 for v in pwm_at_largest.values())
    detail = (f"max HSPWM gap {hs_worst:.2%}; PWM gap at largest aperture "
              f"{pwm_at_largest['uav_spacing']:.2%} (spacing), {pwm_at_largest['element_count']:.2%} (elements)")
    assert acceptance(3, ok, detail)


def test_propositions(acceptance):
    cfg = reference_config()
    checks = validation.check_ula_closed_forms(cfg, 30.0)
    worst_ula = max(c.value for c in checks)
    planar = [sa.SnrScenario(cfg, THETA, PHI, r) for r in validation.LADDER_RANGES]
    worst_upa = max(abs(sa.snr_swm_prop1(s) / sa.snr_swm_sum(s) - 1) for s in planar)
    ok = worst_ula < 0.01 and worst_upa < 0.01
    assert acceptance(4, ok, f"linear-swarm forms worst {worst_ula:.2e}; planar quadrature worst {worst_upa:.2e}")


def test_tensor_flat_equivalence(acceptance, ref_grid):
    cfg, grid = ref_grid
    worst_gain, mismatches, count = 0.0, 0, 0
    for q in (6, 12):
        w = sensing.make_measurement(cfg, q, q, seed=[q])
        td = sensing.build_tensor_dictionary(cfg, grid, w)
        flat = td.flatten()
        for inst in range(25):
            rng = np.random.default_rng([q, inst])
            sparsity = 1 + inst % 2
            h = np.zeros(cfg.num_elements, complex)
            for _ in range(sparsity):
                ct, sp = rng.uniform(-0.75, 0.75, 2)
                h += (rng.standard_normal() + 1j * rng.standard_normal()) * \
                    wf.steering_swm(cfg, math.acos(ct), math.asin(sp), rng.uniform(50, 80))
            y = w.sense(h)
            y = y + 0.1 * np.linalg.norm(y) / math.sqrt(y.size) * (
                rng.standard_normal(y.size) + 1j * rng.standard_normal(y.size))
            res = tensor_omp_ongrid(tensorops.devec(y, (q, q, cfg.num_uavs)), td, sparsity)
            idx, gains, *_ = omp(y, flat, sparsity)
            count += 1
            if list(res.indices) != idx:
                mismatches += 1
                continue
            worst_gain = max(worst_gain, float(np.abs(res.gains - gains).max()))
    ok = mismatches == 0 and worst_gain <= 1e-10
    assert acceptance(5, ok, f"{count} instances, {mismatches} support mismatches, max gain diff {worst_gain:.1e}")


def test_exact_recovery(acceptance, ref_grid):
    cfg, grid = ref_grid
    w = sensing.make_measurement(cfg, cfg.n_x, cfg.n_y, seed=[0])
    sd = sensing.build_sd_dictionary(cfg, grid)
    sensed = sd.sensed(w)
    td = sensing.build_tensor_dictionary(cfg, grid, w)
    plants = {1: [grid.flat_index(3, 5, 7)], 2: [grid.flat_index(1, 2, 3), grid.flat_index(6, 4, 20)]}
    gains = {1: np.array([0.8 - 0.6j]), 2: np.array([1.0, 0.4 + 0.3j])}
    worst = {}
    for sparsity, ks in plants.items():
        z = gains[sparsity]
        # spherical-wave plant for the SD family and the tensor off-grid stage
        h_swm = sd.columns[:, ks] @ z
        y = w.sense(h_swm)
        on = sd_omp_ongrid(y, w, sd, sparsity, sensed=sensed)
        off = sd_omp_offgrid(on, y, w, cfg)
        yt = tensorops.devec(y, (cfg.n_y, cfg.n_x, cfg.num_uavs))
        toff = tensor_omp_offgrid(tensor_omp_ongrid(yt, td, sparsity), yt, w, cfg)
        # hybrid-model plant for tensor on-grid, whose atoms are hybrid responses
        h_hs = sum(g * td.atom(k) for g, k in zip(z, ks))
        ton = tensor_omp_ongrid(tensorops.devec(w.sense(h_hs), (cfg.n_y, cfg.n_x, cfg.num_uavs)), td, sparsity)
        for name, est, truth in (("sd_ongrid", on, h_swm), ("sd_offgrid", off, h_swm),
                                 ("tensor_ongrid", ton, h_hs), ("tensor_offgrid", toff, h_swm)):
            worst[name] = max(worst.get(name, 0.0), sim.nmse(truth, est.channel_estimate))
    ok = all(v < 1e-12 for v in worst.values())
    assert acceptance(6, ok, "worst NMSE " + ", ".join(f"{k} {v:.1e}" for k, v in worst.items()))


@pytest.fixture(scope="module")
def ref_sweep():
    spec = RunConfig().experiment
    return sim.run_experiment(spec)


@pytest.mark.slow
def test_nmse_sweep(acceptance, ref_sweep):
    res = ref_sweep
    snrs = res.spec.snr_grid_db
    table = res.table()
    inv = {e: sim.count_inversions(res, e) for e in table}
    raw = {e: sim.count_inversions(res, e, z=None) for e in table}
    high = [i for i, s in enumerate(snrs) if s >= 10]
    a = all(v <= 1 for v in inv.values())
    b = all(table[f"{f}_offgrid"][i] <= table[f"{f}_ongrid"][i] for f in ("sd", "tensor") for i in high)
    c = all(table["sd_farfield"][i] > table["sd_offgrid"][i] for i in high)
    i20 = snrs.index(20.0)
    gap_db = 10 * math.log10(table["tensor_offgrid"][i20] / table["sd_offgrid"][i20])
    d = abs(gap_db) <= 3.0
    for e, v in table.items():
        print(f"  {e:15s} " + " ".join(f"{x:.3f}" for x in v) + f"  inversions {inv[e]} (raw {raw[e]})")
    detail = (f"(a) {'ok' if a else 'FAIL'} max significant inversions {max(inv.values())}, raw {max(raw.values())}; "
              f"(b) {'ok' if b else 'FAIL'}; (c) {'ok' if c else 'FAIL'}; (d) {'ok' if d else 'FAIL'} gap {gap_db:+.2f} dB")
    assert acceptance(7, a and b and c and d, detail)


def test_complexity(acceptance, ref_grid):
    cfg, grid = ref_grid
    w = sensing.make_measurement(cfg, 12, 12, seed=[0])
    sd = sensing.build_sd_dictionary(cfg, grid)
    sensed = sd.sensed(w)
    td = sensing.build_tensor_dictionary(cfg, grid, w)
    flop_ratio = sd_projection_flops(sensed) / tensor_projection_flops(td)
    rng = np.random.default_rng(8)
    t_sd, t_tensor = [], []
    for _ in range(30):
        y = rng.standard_normal(sensed.shape[0]) + 1j * rng.standard_normal(sensed.shape[0])
        t_sd.append(sd_omp_ongrid(y, w, sd, 1, sensed=sensed).projection_seconds)
        t_tensor.append(tensor_omp_ongrid(tensorops.devec(y, (12, 12, cfg.num_uavs)), td, 1).projection_seconds)
    time_ratio = float(np.median(t_sd) / np.median(t_tensor))
    ok = flop_ratio >= 5 and time_ratio >= 3
    assert acceptance(8, ok, f"counter ratio {flop_ratio:.1f}x, wall-clock ratio {time_ratio:.1f}x "
                             f"({np.median(t_sd) * 1e3:.2f} ms vs {np.median(t_tensor) * 1e3:.2f} ms)")


def test_numerical_hygiene(acceptance, ref_grid):
    cfg, _ = ref_grid
    step = 1e-4
    fd = max(abs((sa.h_function(x + step) - sa.h_function(x - step)) / (2 * step) - math.atan(x))
             for x in np.linspace(-20, 20, 81))
    c = np.array([0.3, -0.7])
    quad = nelder_mead(lambda x: float(np.sum((x - c) ** 2)), np.zeros(2), NelderMeadOptions(tol=1e-16))
    rosen = nelder_mead(lambda x: float(100 * (x[1] - x[0] ** 2) ** 2 + (1 - x[0]) ** 2),
                        np.array([-1.2, 1.0]), NelderMeadOptions(max_iter=2000, tol=1e-14))
    quad_err = float(np.abs(quad.x - c).max())
    rosen_err = float(np.abs(rosen.x - 1).max())
    kron = validation.check_flattening(cfg, seed=1)[1].value
    ok = fd <= 1e-6 and quad_err <= 1e-6 and rosen_err <= 1e-4 and kron <= 1e-12
    assert acceptance(9, ok, f"h' vs FD {fd:.1e}; NM quadratic {quad_err:.1e}, Rosenbrock {rosen_err:.1e}; "
                             f"Kronecker identity {kron:.1e}")
