import numpy as np
import pytest

from catscar import analytics as an
from catscar import circuits as cc
from catscar import obs
from catscar import qstate as qs
from catscar import spectral as sp
from catscar.qstate import SpinPattern


def test_connected_correlations_examples():
    p = SpinPattern.antiferromagnetic(4)
    g = obs.connected_correlations(qs.init_ghz(p)).g
    assert np.allclose(g + np.eye(4), 1.0)
    assert np.allclose(g, g.T)
    assert np.abs(obs.connected_correlations(qs.init_fock(p)).g).max() == 0.0
    # Bell pair with a disentangled third qubit
    bell = qs.init_ghz(SpinPattern.antiferromagnetic(2))
    amps = np.kron(np.array([1, 0]), bell.amplitudes)
    g3 = obs.connected_correlations(qs.StateVector(3, amps)).g
    assert g3[0, 1] == pytest.approx(1.0)
    assert g3[0, 2] == pytest.approx(0.0, abs=1e-12)
    assert g3[1, 2] == pytest.approx(0.0, abs=1e-12)


def test_correlations_consistent_with_marginals():
    # cross-check the vectorized map against probability-marginal sums
    rng = np.random.default_rng(0)
    amps = rng.standard_normal(32) + 1j * rng.standard_normal(32)
    amps /= np.linalg.norm(amps)
    state = qs.StateVector(5, amps)
    g = obs.connected_correlations(state).g
    probs = qs.basis_probabilities(state)
    z = qs.z_sign_table(5)
    for j in range(5):
        for k in range(5):
            if j == k:
                continue
            zz = float(probs @ (z[:, j] * z[:, k]))
            mj, mk = float(probs @ z[:, j]), float(probs @ z[:, k])
            assert g[j, k] == pytest.approx(abs(zz - mj * mk), abs=1e-10)


def test_site_averaged():
    p = SpinPattern.antiferromagnetic(4)
    gmap = obs.connected_correlations(qs.init_ghz(p))
    assert np.allclose(obs.site_averaged(gmap), 1.0)
    zero = obs.CorrelationMap(0, np.zeros((4, 4)))
    assert np.allclose(obs.site_averaged(zero), 0.0)
    rng = np.random.default_rng(1)
    g = rng.uniform(0, 1, (6, 6))
    g = (g + g.T) / 2
    np.fill_diagonal(g, 0.0)
    means = obs.site_averaged(obs.CorrelationMap(0, g))
    for j in range(6):
        assert means[j] == pytest.approx(
            sum(g[j, k] for k in range(6) if k != j) / 5)


def test_domain_walls():
    assert obs.domain_walls(SpinPattern.antiferromagnetic(8)) == 8
    assert obs.domain_walls(SpinPattern.from_string("0000")) == 0
    assert obs.domain_walls(SpinPattern.from_string("00110011")) == 4
    assert obs.domain_walls(SpinPattern.from_string("0011"), ring=False) == 1
    assert obs.domain_walls(SpinPattern.from_string("0011"), ring=True) == 2


def test_domain_walls_conserved_unperturbed():
    spec = cc.FloquetSpec.experimental(8, lambda1=0.0, lambda2=0.0)
    circ = cc.build_floquet_circuit(spec)
    pattern = SpinPattern.from_string("00110110")
    state = qs.init_fock(pattern)
    walls = obs.domain_walls(pattern)
    for _ in range(6):
        cc.run(circ, state)
        probs = qs.basis_probabilities(state)
        support = np.flatnonzero(probs > 1e-12)
        for idx in support:
            bits = SpinPattern(tuple((int(idx) >> j) & 1 for j in range(8)))
            assert obs.domain_walls(bits) == walls


def test_flippable_sites_rules():
    n = 8
    uniform = (1,) * n
    # segment 01110 around sites 2..6: the anti-parallel-neighbor sites flip
    pattern = SpinPattern.from_string("00111000")
    flippable = obs.flippable_sites(pattern, uniform)
    assert 2 in flippable and 4 in flippable  # edges of the 111 block
    assert 3 not in flippable                 # parallel neighbors
    # alternating pattern is inert
    assert obs.flippable_sites(SpinPattern.antiferromagnetic(n), uniform) == set()
    # sign editing relocates the inert neighborhoods
    flipped = SpinPattern.antiferromagnetic(n).flipped(4)
    assert obs.flippable_sites(flipped, uniform) == {3, 5}
    compat = cc.edit_pattern(cc.FloquetSpec.experimental(n), flipped)
    assert obs.flippable_sites(flipped, compat.j_signs) == set()


def test_flippable_empty_iff_scar_pattern():
    n = 6
    rng = np.random.default_rng(2)
    for _ in range(20):
        signs = tuple(int(s) for s in rng.choice([-1, 1], n))
        if np.prod(signs) == -1:
            continue
        pairs = sp.scar_patterns(signs)
        scar_set = {p.to_string() for pair in pairs for p in pair}
        for idx in range(1 << n):
            bits = SpinPattern(tuple((idx >> j) & 1 for j in range(n)))
            empty = obs.flippable_sites(bits, signs) == set()
            assert empty == (bits.to_string() in scar_set)


def test_lightcone_incompatible_vs_compatible():
    n = 12
    flipped = SpinPattern.antiferromagnetic(n).flipped(5)
    spec = cc.FloquetSpec.experimental(n)
    rep = obs.lightcone_scan(flipped, spec, cycles=20, center=(5,))
    vb = an.butterfly_velocity(spec.lambda1, spec.lambda2, spec.phi1, spec.phi2).vb
    assert all(rep.radius[t] <= vb * t + 2 + 1e-9 for t in rep.times)
    # ignition neighbors melt while distant sites stay correlated
    assert rep.g_series[20, 4] < 0.65 and rep.g_series[20, 6] < 0.65
    assert rep.g_series[20, 11] > 0.85
    # default ignition detection: the kinetically active neighbors of the flip
    auto = obs.lightcone_scan(flipped, spec, cycles=0)
    assert tuple(auto.center) == (4, 6)
    compat = cc.edit_pattern(spec, flipped)
    rep2 = obs.lightcone_scan(flipped, compat, cycles=20, center=(5,))
    assert rep2.radius.max() <= 1
    assert np.abs(rep2.g_series - rep2.g_series[0]).max() <= 0.1


def test_lightcone_zero_perturbation_no_spread():
    n = 8
    flipped = SpinPattern.antiferromagnetic(n).flipped(3)
    spec = cc.FloquetSpec.experimental(n, lambda1=0.0, lambda2=0.0)
    rep = obs.lightcone_scan(flipped, spec, cycles=10)
    assert rep.radius.max() == 0.0
    assert np.abs(rep.g_series - 1.0).max() < 1e-9
    assert rep.velocity == 0.0


def test_lightcone_csv(tmp_path):
    n = 6
    spec = cc.FloquetSpec.experimental(n)
    rep = obs.lightcone_scan(SpinPattern.antiferromagnetic(n).flipped(2),
                             spec, cycles=2, center=(2,))
    obs.write_lightcone_csv(tmp_path / "lc.csv", rep, seed=3)
    lines = (tmp_path / "lc.csv").read_text().strip().splitlines()
    assert lines[1] == "t,j,Gj"
    assert len(lines) == 2 + 3 * n
    cmap = obs.connected_correlations(qs.init_ghz(SpinPattern.antiferromagnetic(4)))
    obs.write_correlation_csv(tmp_path / "g.csv", cmap)
    assert len((tmp_path / "g.csv").read_text().strip().splitlines()) == 2 + 16
