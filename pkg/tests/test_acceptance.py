"""Acceptance criteria 1-12; each test records one PASS/FAIL line (shown in the terminal summary)."""

import time

import numpy as np
import pytest

from vrs_sim.analysis import (
    central_dip,
    cui_raymer_splittings,
    find_peaks,
    fit_doublet,
    fit_polarization,
    g2_zero,
    lorentzian_voigt,
    peak_separation,
    polarization_curve,
)
from vrs_sim.cli import main
from vrs_sim.detection import (
    DetectionParams,
    channel_spectra_for_sign,
    detected_spectrum,
    projection_sweep,
)
from vrs_sim.linalg import HilbertSpace, build_operators, dagger
from vrs_sim.model import QedParams, build_liouvillian
from vrs_sim.spectra import (
    FrequencyGrid,
    RawSpectrum,
    correlation_spectra,
    correlation_spectrum_time_domain,
)
from vrs_sim.steadystate import solve_steady

from conftest import random_params

GRID = FrequencyGrid.centered(0.0)  # +-250 ueV, 2001 points


def rel_l2(x, y):
    return float(np.linalg.norm(x - y) / np.linalg.norm(y))


def test_c01_cui_raymer(criterion):
    with criterion("1", "closed-form splittings 67.4 +- 0.5 and 76.4 +- 1.5 ueV in < 1 ms") as note:
        t0 = time.perf_counter()
        cav, em = cui_raymer_splittings(41, 66, 0.28)
        elapsed = time.perf_counter() - t0
        note(f"cavity {cav:.3f}, emitter {em:.3f}, {elapsed * 1e6:.0f} us")
        assert abs(cav - 67.4) <= 0.5
        assert abs(em - 76.4) <= 1.5
        assert elapsed < 1e-3


def test_c02_splitting_consistency(criterion):
    with criterion("2", "unconvolved peak separations within 3 ueV of the closed forms") as note:
        t0 = time.perf_counter()
        q = QedParams(gamma_ph=0.0, p_a=0.01)
        cav, em = cui_raymer_splittings(41, q.kappa, q.gamma)
        s0, s90 = projection_sweep(q, DetectionParams(), [0.0, 90.0], GRID)
        sep0 = peak_separation(s0.spectrum("total"))
        sep90 = peak_separation(s90.spectrum("total"))
        elapsed = time.perf_counter() - t0
        note(f"theta=0: {sep0:.2f} vs {cav:.2f}; theta=90: {sep90:.2f} vs {em:.2f}; {elapsed:.2f} s")
        assert abs(sep0 - cav) <= 3.0
        assert abs(sep90 - em) <= 3.0
        assert elapsed < 10.0


def test_c03_oracle_equivalence(criterion):
    with criterion("3", "resolvent and time-domain spectra agree to 1e-6 (10 random sets)") as note:
        t0 = time.perf_counter()
        rng = np.random.default_rng(3)
        grid = GRID
        space = HilbertSpace(3)
        a, s = build_operators(space)
        pairs = [(dagger(a), a), (dagger(s), s), (dagger(s), a), (dagger(a), s)]
        worst = 0.0
        for _ in range(10):
            q = random_params(rng, low=0.1, high=100.0, p_c=float(np.exp(rng.uniform(np.log(0.1), np.log(100)))))
            liou = build_liouvillian(q, space)
            rho = solve_steady(liou)
            resolvent = correlation_spectra(liou, rho, pairs, grid)
            for (left, right), f in zip(pairs, resolvent):
                td = correlation_spectrum_time_domain(liou, rho, left, right, grid)
                worst = max(worst, rel_l2(td, f))
        elapsed = time.perf_counter() - t0
        note(f"worst relative L2 {worst:.2e}; {elapsed:.1f} s")
        assert worst <= 1e-6
        assert elapsed < 120.0


def test_c04_steady_state_invariants(criterion):
    with criterion("4", "steady-state invariants on 50 random sets; two-level population") as note:
        rng = np.random.default_rng(4)
        space = HilbertSpace(3)
        worst = [0.0, 0.0, 0.0]
        for _ in range(50):
            q = random_params(rng, p_c=float(rng.uniform(0, 20)))
            rho = solve_steady(build_liouvillian(q, space))
            worst[0] = max(worst[0], rho.trace_defect)
            worst[1] = max(worst[1], rho.hermiticity_defect)
            worst[2] = min(worst[2], rho.min_eigenvalue)
        _, s = build_operators(space)
        q = QedParams(g_tilde=0.0, p_a=0.065, gamma=0.28)
        pop = solve_steady(build_liouvillian(q, space)).expect(dagger(s) @ s).real
        err = abs(pop - 0.065 / (0.065 + 0.28))
        note(f"trace {worst[0]:.1e}, hermiticity {worst[1]:.1e}, min eig {worst[2]:.1e}, population error {err:.1e}")
        assert worst[0] < 1e-10
        assert worst[1] < 1e-10
        assert worst[2] > -1e-8
        assert err < 1e-8


def test_c05_truncation_convergence(criterion):
    with criterion("5", "total spectrum changes < 1e-6 between n_max = 3 and 4") as note:
        worst = 0.0
        for theta in (0.0, 45.0, 90.0):
            det = DetectionParams(theta_proj=theta)
            s3 = detected_spectrum(QedParams(), det, GRID, n_max=3).total
            s4 = detected_spectrum(QedParams(), det, GRID, n_max=4).total
            worst = max(worst, rel_l2(s3, s4))
        note(f"worst relative L2 {worst:.2e} over theta = 0, 45, 90")
        assert worst < 1e-6


def test_c06_parity(criterion):
    with criterion("6", "per-sign channel parities under theta -> 180 - theta within 1e-10") as note:
        q = QedParams()
        worst = 0.0
        for sign in (1, -1):
            for theta in (10.0, 45.0, 84.0, 96.0):
                a = channel_spectra_for_sign(q, DetectionParams(theta_proj=theta), GRID, sign)
                b = channel_spectra_for_sign(q, DetectionParams(theta_proj=180.0 - theta), GRID, sign)
                worst = max(
                    worst,
                    np.abs(a.s_c - b.s_c).max(),
                    np.abs(a.s_i1 - b.s_i1).max(),
                    np.abs(a.s_i2 + b.s_i2).max(),
                )
        note(f"max elementwise deviation {worst:.1e}")
        assert worst <= 1e-10


def test_c07_asymmetry_flip(criterion):
    with criterion("7", "doublet area asymmetry changes sign between theta = 84 and 96") as note:
        s84, s96 = projection_sweep(QedParams(), DetectionParams(), [84.0, 96.0], GRID)
        a84 = fit_doublet(s84.convolved.spectrum("total"), 13.5).asymmetry
        a96 = fit_doublet(s96.convolved.spectrum("total"), 13.5).asymmetry
        note(f"asymmetry {a84:+.3f} at 84, {a96:+.3f} at 96")
        assert a84 * a96 < 0


def test_c08_intensity_contrast(criterion):
    with criterion("8", "peak intensity ratio total(0)/total(90) > 20") as note:
        s0, s90 = projection_sweep(QedParams(), DetectionParams(), [0.0, 90.0], GRID)
        ratio = s0.total.max() / s90.total.max()
        note(f"ratio {ratio:.1f}")
        assert ratio > 20


def test_c09_complementarity(criterion):
    with criterion("9", "cavity drive narrows the emitter-channel splitting and its dip") as note:
        det = DetectionParams(theta_proj=90.0)
        emitter = detected_spectrum(QedParams(), det, GRID).spectrum("s_a")
        cavity = detected_spectrum(QedParams(p_a=0.0, p_c=0.065), det, GRID).spectrum("s_a")
        sep_e, sep_c = peak_separation(emitter), peak_separation(cavity)
        dip_e, dip_c = central_dip(emitter), central_dip(cavity)
        note(f"separation {sep_e:.2f} -> {sep_c:.2f}; dip {dip_e:.3f} -> {dip_c:.3f}")
        assert sep_c < sep_e
        assert dip_c < dip_e


def test_c10_fit_round_trips(criterion):
    with criterion("10", "doublet and polarization fits recover synthetic parameters") as note:
        x = GRID.omega
        y = lorentzian_voigt(x, -32.0, 40.0, 1.0, 13.5) + lorentzian_voigt(x, 32.0, 40.0, 1.0, 13.5)
        fit = fit_doublet(RawSpectrum(GRID, y), 13.5)
        center_err = np.abs(np.array(fit.peak_energies) - [-32.0, 32.0]).max()
        width_err = np.abs(np.array(fit.linewidths) / 40.0 - 1).max()
        alpha = np.linspace(0, 180, 37)
        clean = polarization_curve(alpha, 42.6, 80.8, 1000.0)
        noisy = clean * (1 + 0.01 * np.random.default_rng(10).normal(size=alpha.size))
        pol = fit_polarization(np.column_stack([alpha, noisy]))
        note(
            f"center err {center_err:.1e}, width err {width_err:.1e}, "
            f"theta_a {pol.theta_a:.2f}, phi_qd {pol.phi_qd:.2f}"
        )
        assert fit.n_peaks == 2 and center_err <= 0.5 and width_err <= 0.02
        assert abs(pol.theta_a - 42.6) <= 1.0 and abs(pol.phi_qd - 80.8) <= 1.0


def test_c11_g2(criterion):
    with criterion("11", "g2(0): emitter 0, thermal cavity 2, coupled cavity < 1") as note:
        liou = build_liouvillian(QedParams(), HilbertSpace(3))
        rho = solve_steady(liou)
        em = g2_zero(liou, rho, "emitter")
        cav = g2_zero(liou, rho, "cavity")
        thermal_l = build_liouvillian(QedParams(g_tilde=0.0, p_a=0.0, p_c=0.5, gamma=1.0), HilbertSpace(10))
        thermal = g2_zero(thermal_l, solve_steady(thermal_l), "cavity")
        note(f"emitter {em}, thermal {thermal:.9f}, coupled cavity {cav:.3f}")
        assert em == 0.0
        assert abs(thermal - 2.0) <= 1e-6
        assert 0.0 < cav < 1.0


def test_c12_cli_determinism(criterion, tmp_path):
    with criterion("12", "identical config gives byte-identical CSV") as note:
        cfg = tmp_path / "run.ini"
        cfg.write_text("[detection]\ntheta_proj = 90\n[run]\nmode = resonance\n")
        assert main([str(cfg), "--out", str(tmp_path / "a")]) == 0
        assert main([str(cfg), "--out", str(tmp_path / "b")]) == 0
        same = all(
            (tmp_path / "a" / n).read_bytes() == (tmp_path / "b" / n).read_bytes()
            for n in ("spectra.csv", "summary.csv")
        )
        note("spectra.csv and summary.csv compared")
        assert same
