import numpy as np
import pytest

from catscar import circuits as cc
from catscar import protocols as pr
from catscar import qstate as qs
from catscar.qstate import SpinPattern


def line_prep(n, pattern=None):
    pattern = pattern if pattern is not None else SpinPattern.antiferromagnetic(n)
    lay = cc.Layout2D.line(n)
    targets = [(0, c) for c in range(n)]
    return cc.compile_circuit(cc.generate_ghz_circuit(lay, targets, pattern)), pattern


def test_mqc_ideal_cosine():
    prep, pattern = line_prep(6)
    trace = pr.mqc_run(prep, pattern, "sparse")
    ideal = 0.5 * (1 + np.cos(6 * trace.phis))
    assert np.max(np.abs(trace.values - ideal)) < 1e-12
    assert trace.values[0] == pytest.approx(1.0)  # phi = 0
    assert trace.n_samples == 2 * 6 + 2


def test_mqc_fourier_peaks():
    prep, pattern = line_prep(6)
    spectrum = pr.mqc_fourier(pr.mqc_run(prep, pattern, "sparse"))
    assert spectrum.peak(6) == pytest.approx(0.25, abs=1e-9)
    assert spectrum.peak(-6) == pytest.approx(0.25, abs=1e-9)
    assert spectrum.peak(0) == pytest.approx(0.5, abs=1e-9)
    dense = pr.mqc_fourier(pr.mqc_run(prep, pattern, "dense"))
    assert abs(spectrum.peak(6) - dense.peak(6)) < 1e-9


def test_mqc_constant_trace():
    trace = pr.MqcTrace(4, pr.sparse_phase_grid(4), np.ones(10))
    spectrum = pr.mqc_fourier(trace)
    assert spectrum.peak(0) == pytest.approx(1.0)
    for q in range(1, 5):
        assert spectrum.peak(q) == pytest.approx(0.0, abs=1e-12)


def test_mqc_fourier_matches_direct_sum():
    rng = np.random.default_rng(0)
    phis = pr.sparse_phase_grid(4)
    trace = pr.MqcTrace(4, phis, rng.uniform(0, 1, len(phis)))
    fast = pr.mqc_fourier(trace)
    direct = pr.mqc_fourier_direct(trace)
    assert np.max(np.abs(fast.amplitudes - direct.amplitudes)) < 1e-12


def test_mqc_symmetry_and_custom_grid():
    prep, pattern = line_prep(4)
    trace = pr.mqc_run(prep, pattern, np.linspace(0, 2 * np.pi, 40, endpoint=False))
    spec = pr.mqc_fourier(trace)
    # K(phi) real: K_f(q) = K_f(-q)
    assert np.allclose(spec.amplitudes, spec.amplitudes[::-1], atol=1e-12)
    with pytest.raises(ValueError):
        pr.mqc_run(prep, pattern, np.array([]))


def test_mqc_peak_equals_doublet_coherence():
    # pure states made by a few driving cycles: K_f(N) = (|<s|psi>||<psi|sbar>|)^2
    n = 6
    prep, pattern = line_prep(n)
    drive = cc.build_floquet_circuit(cc.FloquetSpec.experimental(n))
    evolved = cc.Circuit(n)
    for layer in prep.layers:
        evolved.append_layer(layer)
    for _ in range(2):
        for layer in drive.layers:
            evolved.append_layer(layer)
    state = cc.run(evolved)
    expect = pr.doublet_coherence(state, pattern) ** 2
    spectrum = pr.mqc_fourier(pr.mqc_run(evolved, pattern, "sparse"))
    assert spectrum.peak(n) == pytest.approx(expect, abs=1e-10)


def test_parity_ideal_ghz():
    p4 = SpinPattern.antiferromagnetic(4)
    gammas = pr.parity_gamma_grid(4)
    vals = pr.parity_scan(qs.init_ghz(p4), p4, gammas)
    assert np.max(np.abs(vals - np.cos(4 * gammas))) < 1e-12
    amp, phase = pr.fit_parity_amplitude(gammas, vals, 4)
    assert amp == pytest.approx(1.0, abs=1e-9)
    assert phase == pytest.approx(0.0, abs=1e-9)


def test_parity_nonzero_phase():
    p4 = SpinPattern.antiferromagnetic(4)
    gammas = pr.parity_gamma_grid(4)
    vals = pr.parity_scan(qs.init_ghz(p4, phi=0.7), p4, gammas)
    amp, phase = pr.fit_parity_amplitude(gammas, vals, 4)
    assert amp == pytest.approx(1.0, abs=1e-9)
    assert abs(abs(phase) - 0.7) < 1e-9


def test_parity_mixed_and_bell():
    # diagonal ensemble average: no coherence, flat parity
    p4 = SpinPattern.antiferromagnetic(4)
    gammas = pr.parity_gamma_grid(4)
    total = np.zeros(len(gammas))
    for idx in range(16):
        amps = np.zeros(16, dtype=complex)
        amps[idx] = 1.0
        total += pr.parity_scan(qs.StateVector(4, amps), p4, gammas) / 16
    assert np.max(np.abs(total)) < 1e-12
    p2 = SpinPattern.antiferromagnetic(2)
    amp, _ = pr.fit_parity_amplitude(
        pr.parity_gamma_grid(2), pr.parity_scan(qs.init_ghz(p2), p2,
                                                pr.parity_gamma_grid(2)), 2)
    assert amp == pytest.approx(1.0, abs=1e-9)


def test_parity_amplitude_cross_validates_coherence():
    # fitted amplitude / 2 equals |<s|psi><psi|sbar>| for pure states
    n = 4
    prep, pattern = line_prep(n)
    drive = cc.build_floquet_circuit(cc.FloquetSpec.experimental(n, lambda1=0.3, lambda2=0.2))
    state = cc.run(prep)
    for _ in range(3):
        cc.run(drive, state)
    gammas = pr.parity_gamma_grid(n)
    amp, _ = pr.fit_parity_amplitude(gammas, pr.parity_scan(state, pattern, gammas), n)
    assert amp / 2 == pytest.approx(pr.doublet_coherence(state, pattern), abs=1e-6)


def test_parity_rejects_odd_n():
    p = SpinPattern.from_string("010")
    state = qs.init_ghz(p)
    with pytest.raises(ValueError):
        pr.parity_scan(state, p, pr.parity_gamma_grid(3))


def test_ghz_fidelity_assembly():
    prep, pattern = line_prep(4)
    spectrum = pr.mqc_fourier(pr.mqc_run(prep, pattern, "sparse"))
    report = pr.ghz_fidelity((0.5, 0.5), spectrum, 4)
    assert report.fidelity == pytest.approx(1.0, abs=1e-9)
    assert report.offdiag == pytest.approx(0.5, abs=1e-9)
    # bare Fock state: populations only
    empty = pr.MqcSpectrum(np.arange(-4, 5), np.zeros(9))
    report = pr.ghz_fidelity((1.0, 0.0), empty, 4)
    assert report.fidelity == pytest.approx(0.5)


def test_interferometry_unperturbed_alternation():
    for n, cycles in ((6, 8), (12, 4)):
        prep, pattern = line_prep(n)
        spec = cc.FloquetSpec.experimental(n, lambda1=0.0, lambda2=0.0)
        trace = pr.cat_interferometry(prep, pattern, spec, cycles=cycles, m=8)
        assert np.allclose(trace.fourier[::2], 0.25, atol=1e-9)
        assert np.max(trace.fourier[1::2]) < 1e-9
        assert np.all(trace.values >= -1e-12) and np.all(trace.values <= 1 + 1e-12)


def test_interferometry_t0_reduces_to_doubled_mqc():
    n = 4
    prep, pattern = line_prep(n)
    spec = cc.FloquetSpec.experimental(n)
    trace = pr.cat_interferometry(prep, pattern, spec, cycles=0, m=12)
    ideal = 0.5 * (1 + np.cos(2 * n * trace.phis))
    assert np.max(np.abs(trace.values[0] - ideal)) < 1e-12


def test_interferometry_default_grid_and_errors():
    n = 4
    prep, pattern = line_prep(n)
    spec = cc.FloquetSpec.experimental(n)
    trace = pr.cat_interferometry(prep, pattern, spec, cycles=1)
    assert len(trace.phis) == 2 * n + 2
    assert trace.phis[0] == pytest.approx(-np.pi / n)
    with pytest.raises(ValueError):
        pr.cat_interferometry(prep, pattern, spec, cycles=-1)
    with pytest.raises(ValueError):
        pr.cat_interferometry(prep, pattern, spec, cycles=1, m=1)
    with pytest.raises(ValueError):
        pr.cat_interferometry(prep, pattern, cc.FloquetSpec.experimental(6), 1)


def test_interferometry_thermal_flattening():
    # strong perturbations erase the phi oscillation within a couple of cycles
    n = 10
    prep, pattern = line_prep(n)
    spec = cc.FloquetSpec.experimental(n, lambda1=0.3, lambda2=0.4)
    trace = pr.cat_interferometry(prep, pattern, spec, cycles=2, m=22)
    dev0 = np.abs(trace.values[0] - trace.values[0].mean()).max()
    dev2 = np.abs(trace.values[2] - trace.values[2].mean()).max()
    assert dev0 > 0.4               # full oscillation initially
    assert dev2 < 0.021             # flat to within ~0.02 by the second cycle


def test_interferometry_pattern_switch_keeps_plateau():
    # switching state and protection together preserves the even-cycle response
    n = 6
    prep, pattern = line_prep(n)
    spec = cc.FloquetSpec.experimental(n)
    flip_sites = (1, 2)
    new_pattern = pattern.flipped(*flip_sites)
    compat = cc.edit_pattern(spec, new_pattern)
    tr = pr.cat_interferometry(prep, pattern, spec, cycles=10, m=8,
                               switch=(4, flip_sites, compat))
    ratios = tr.fourier[::2] / tr.fourier[0]
    assert np.all(ratios > 0.85)
    assert np.max(tr.fourier[1::2]) < 0.05
    # and the switch is exactly transparent at zero perturbation
    spec0 = cc.FloquetSpec.experimental(n, lambda1=0.0, lambda2=0.0)
    compat0 = cc.edit_pattern(spec0, new_pattern)
    tr0 = pr.cat_interferometry(prep, pattern, spec0, cycles=10, m=8,
                                switch=(4, flip_sites, compat0))
    assert np.allclose(tr0.fourier[::2], 0.25, atol=1e-9)


def test_csv_emitters(tmp_path):
    prep, pattern = line_prep(4)
    trace = pr.mqc_run(prep, pattern, "sparse")
    spectrum = pr.mqc_fourier(trace)
    pr.write_trace_csv(tmp_path / "t.csv", trace, seed=7)
    pr.write_spectrum_csv(tmp_path / "s.csv", spectrum, 4, "sparse", seed=7)
    text = (tmp_path / "t.csv").read_text()
    assert text.startswith("# N=4 grid=sparse seed=7")
    assert "phi,K" in text
    itrace = pr.cat_interferometry(prep, pattern,
                                   cc.FloquetSpec.experimental(4), cycles=2, m=8)
    pr.write_interferometry_csv(tmp_path / "i.csv", itrace, seed=7)
    lines = (tmp_path / "i.csv").read_text().strip().splitlines()
    assert lines[1] == "t,Kf2N"
    assert len(lines) == 2 + 3
