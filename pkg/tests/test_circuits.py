import numpy as np
import pytest

from catscar import circuits as cc
from catscar import qstate as qs
from catscar.qstate import SpinPattern


def checkerboard(targets):
    return SpinPattern(tuple((r + c) % 2 for (r, c) in targets))


def grid_case(rows, cols):
    lay = cc.Layout2D.grid(rows, cols)
    targets = sorted(lay.active)
    return lay, targets, checkerboard(targets)


def test_layout_invariants():
    lay = cc.Layout2D.grid(3, 4)
    assert len(lay.active) == 12
    for pair in lay.couplers:
        a, b = sorted(pair)
        assert abs(a[0] - b[0]) + abs(a[1] - b[1]) == 1
        assert a in lay.active and b in lay.active


def test_bell_construction():
    lay = cc.Layout2D.line(2)
    circ = cc.generate_ghz_circuit(lay, [(0, 0), (0, 1)], SpinPattern.from_string("01"))
    assert circ.n_layers == 2  # one single-qubit layer + one CNOT layer
    state = cc.run(circ)
    expect = qs.init_ghz(SpinPattern.from_string("01"))
    assert abs(qs.overlap(expect, state)) ** 2 == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("rows,cols,cnot_layers", [
    (2, 2, 2), (2, 4, 3), (4, 4, 5), (4, 5, 6), (6, 6, 7),
])
def test_radial_generator_fidelity_and_depth(rows, cols, cnot_layers):
    lay, targets, pattern = grid_case(rows, cols)
    circ = cc.generate_ghz_circuit(lay, targets, pattern)
    assert circ.n_layers - 1 == cnot_layers
    fid = cc.ghz_state_fidelity(circ, pattern, sparse=len(targets) > 20)
    assert fid == pytest.approx(1.0, abs=1e-10)


def test_generator_handles_nontrivial_patterns():
    # patterns whose parents carry 1-bits exercise the differential X placement
    lay = cc.Layout2D.line(5)
    targets = [(0, c) for c in range(5)]
    for bits in ("11010", "10000", "01111", "11111"):
        pattern = SpinPattern.from_string(bits)
        circ = cc.generate_ghz_circuit(lay, targets, pattern)
        assert cc.ghz_state_fidelity(circ, pattern, sparse=False) == pytest.approx(1.0, abs=1e-12)


def test_cnot_layer_count_at_least_eccentricity():
    # lower bound: information must reach the farthest site
    lay, targets, pattern = grid_case(6, 6)
    root, second = cc.select_root_pair(lay, targets)
    dist = cc._pair_bfs_dist(lay, targets, (root, second))
    ecc = max(dist.values())
    circ = cc.generate_ghz_circuit(lay, targets, pattern)
    assert circ.n_layers - 1 >= ecc


def test_generator_rejects_bad_input():
    lay = cc.Layout2D.grid(2, 2, active={(0, 0), (0, 1), (1, 1)})
    disconnected = cc.Layout2D.grid(1, 3, active={(0, 0), (0, 2)})
    with pytest.raises(ValueError):
        cc.generate_ghz_circuit(disconnected, [(0, 0), (0, 2)],
                                SpinPattern.from_string("01"))
    with pytest.raises(ValueError):
        cc.generate_ghz_circuit(lay, sorted(lay.active), SpinPattern.from_string("01"))


def test_compile_single_cnot_is_h_cz_h():
    circ = cc.Circuit(2)
    circ.append_layer([cc.gate_cnot(0, 1)])
    compiled = cc.compile_circuit(circ)
    assert [g.name for layer in compiled.layers for g in layer] == ["U3", "CZ", "U3"]
    for basis in range(4):
        amps = np.zeros(4, dtype=complex)
        amps[basis] = 1.0
        a = cc.run(circ, qs.StateVector(2, amps.copy())).amplitudes
        b = cc.run(compiled, qs.StateVector(2, amps.copy())).amplitudes
        assert np.max(np.abs(a - b)) < 1e-12  # H = U3(pi/2,pi/2,pi) exactly


@pytest.mark.parametrize("rows,cols,total", [(6, 6, 15)])
def test_compiled_layer_counts_36(rows, cols, total):
    lay, targets, pattern = grid_case(rows, cols)
    compiled = cc.compile_circuit(cc.generate_ghz_circuit(lay, targets, pattern))
    assert compiled.n_layers == total
    kinds = [{g.name for g in layer} for layer in compiled.layers]
    assert sum(1 for k in kinds if k == {"CZ"}) == 7
    assert sum(1 for k in kinds if k == {"U3"}) == 8


def test_compiled_layer_count_60q():
    lay = cc.Layout2D.grid(11, 11)
    region = cc.sixty_qubit_region()
    assert len(region) == 60
    pattern = checkerboard(region)
    raw = cc.generate_ghz_circuit(lay, region, pattern)
    assert raw.n_layers - 1 == 9
    compiled = cc.compile_circuit(raw)
    assert compiled.n_layers == 19
    assert cc.ghz_state_fidelity(compiled, pattern) == pytest.approx(1.0, abs=1e-10)


def test_compile_preserves_unitary_on_random_states():
    lay, targets, pattern = grid_case(2, 3)
    circ = cc.generate_ghz_circuit(lay, targets, pattern)
    compiled = cc.compile_circuit(circ)
    rng = np.random.default_rng(1)
    for _ in range(5):
        amps = rng.standard_normal(64) + 1j * rng.standard_normal(64)
        amps /= np.linalg.norm(amps)
        a = cc.run(circ, qs.StateVector(6, amps.copy())).amplitudes
        b = cc.run(compiled, qs.StateVector(6, amps.copy())).amplitudes
        assert np.max(np.abs(a - b)) < 1e-10


def test_compile_rejects_foreign_gates():
    circ = cc.Circuit(2)
    circ.append_layer([cc.gate_zz(0, 1, -4.0)])
    with pytest.raises(ValueError):
        cc.compile_circuit(circ)


def test_floquet_spec_invariants():
    spec = cc.FloquetSpec.experimental(6, x_flags=(1, 0, 1, 1, 0, 1))
    x = spec.flags
    for j in range(6):
        assert spec.j_signs[j] == (2 * x[j] - 1) * (2 * x[(j + 1) % 6] - 1)
    with pytest.raises(ValueError):
        cc.FloquetSpec(n=4, x_flags=(1, 0, 1))
    with pytest.raises(ValueError):
        cc.build_floquet_circuit(cc.FloquetSpec(n=5))


def test_edit_pattern_examples():
    n = 36
    spec = cc.FloquetSpec.experimental(n)
    # flip only one qubit: both adjacent bond signs turn negative
    target = SpinPattern((1,) * n).flipped(18)
    edited = cc.edit_pattern(spec, target)
    signs = edited.j_signs
    assert signs[17] == -1 and signs[18] == -1
    assert all(signs[j] == 1 for j in range(n) if j not in (17, 18))
    # period-4 pattern: alternating sign pairs
    bits = tuple([1, 0, 0, 1] * (n // 4))
    edited = cc.edit_pattern(spec, SpinPattern(bits))
    for m in range(n // 4):
        assert edited.j_signs[4 * m] == -1
        assert edited.j_signs[4 * m + 1] == 1
        assert edited.j_signs[4 * m + 2] == -1
        assert edited.j_signs[4 * m + 3] == 1
    # all-ones target: identity edit
    edited = cc.edit_pattern(spec, SpinPattern((1,) * n))
    assert all(s == 1 for s in edited.j_signs)


def test_floquet_unperturbed_flips_pattern():
    spec = cc.FloquetSpec(n=4, lambda1=0.0, lambda2=0.0, phi1=0.0, phi2=0.0)
    circ = cc.build_floquet_circuit(spec)
    state = cc.run(circ, qs.init_fock(SpinPattern.from_string("0101")))
    probs = qs.basis_probabilities(state)
    assert probs[SpinPattern.from_string("1010").basis_index()] == pytest.approx(1.0, abs=1e-12)


def test_floquet_zz_gates_dressed_cphase():
    spec = cc.FloquetSpec.experimental(4)
    circ = cc.build_floquet_circuit(spec)
    zz_gates = [g for layer in circ.layers for g in layer if g.name == "ZZ"]
    assert len(zz_gates) == 4
    assert all(g.params == (-4.0,) for g in zz_gates)
    # ZZ(-4) = e^{-i phi/4} Z(2) x Z(2) . CPHASE(-4)
    dressed = np.kron(qs.zphase(2.0), qs.zphase(2.0)) @ qs.cphase_matrix(-4.0)
    assert np.max(np.abs(np.exp(1j) * qs.zz_matrix(-4.0) - dressed)) < 1e-12


def test_floquet_circuit_matches_matrix():
    from catscar import spectral as sp
    spec = cc.FloquetSpec.experimental(4)
    u_circ = cc.unitary(cc.build_floquet_circuit(spec))
    u_mat = sp.build_floquet_matrix(spec).entries
    assert qs.states_equal_up_to_phase(u_circ.ravel(), u_mat.ravel(), tol=1e-9)
    # edited landscape too
    spec2 = cc.edit_pattern(spec, SpinPattern.from_string("1001"))
    u_circ = cc.unitary(cc.build_floquet_circuit(spec2))
    u_mat = sp.build_floquet_matrix(spec2).entries
    assert qs.states_equal_up_to_phase(u_circ.ravel(), u_mat.ravel(), tol=1e-9)


def test_doublet_invariant_at_zero_perturbation():
    n = 8
    for target in (SpinPattern.antiferromagnetic(n),
                   SpinPattern.from_string("10011010")):
        spec = cc.edit_pattern(
            cc.FloquetSpec.experimental(n, lambda1=0.0, lambda2=0.0), target)
        state = qs.init_ghz(target)
        circ = cc.build_floquet_circuit(spec)
        for _ in range(10):
            cc.run(circ, state)
        probs = qs.basis_probabilities(state)
        inside = probs[target.basis_index()] + probs[target.complement().basis_index()]
        assert 1.0 - inside < 1e-12


def test_reduced_frame_euler_mapping():
    # closed forms for the gauge-fixed single-qubit layers match their matrices
    rng = np.random.default_rng(7)
    for _ in range(50):
        l1, l2 = rng.uniform(0.02, 1.2, 2)
        phip = rng.uniform(-np.pi, np.pi)
        target = (qs.ry(l2) @ qs.rz(phip)
                  @ qs.u3_matrix(np.pi - l1, 0.0, 0.0))  # ry(l2) rz(phi') rx(pi - l1)
        a, b, t = cc.reduced_frame_u3_angles(l1, l2, phip)
        assert qs.states_equal_up_to_phase(qs.u3_matrix(a, b, t).ravel(),
                                           target.ravel(), tol=1e-9)
        phi = rng.uniform(-np.pi, np.pi)
        target2 = np.diag([np.exp(1j * phi / 2), np.exp(-1j * phi / 2)]) @ qs.ry(l2)
        a, b, t = cc.reduced_frame_u3prime_angles(l2, phi)
        assert qs.states_equal_up_to_phase(qs.u3_matrix(a, b, t).ravel(),
                                           target2.ravel(), tol=1e-9)


def test_circuit_inverse_restores_identity():
    lay, targets, pattern = grid_case(2, 3)
    circ = cc.compile_circuit(cc.generate_ghz_circuit(lay, targets, pattern))
    state = cc.run(circ)
    cc.run(circ.inverse(), state)
    expect = np.zeros(64)
    expect[0] = 1.0
    assert np.max(np.abs(np.abs(state.amplitudes) - expect)) < 1e-12


def test_serialization_roundtrip():
    lay, targets, pattern = grid_case(2, 3)
    for circ in (cc.generate_ghz_circuit(lay, targets, pattern),
                 cc.compile_circuit(cc.generate_ghz_circuit(lay, targets, pattern)),
                 cc.build_floquet_circuit(cc.FloquetSpec.experimental(6))):
        text = cc.circuit_to_text(circ)
        back = cc.circuit_from_text(text)
        assert back.n_qubits == circ.n_qubits
        assert back.n_layers == circ.n_layers
        # round trip preserves the state up to per-gate global phases
        a = cc.run(circ).amplitudes
        b = cc.run(back).amplitudes
        assert qs.states_equal_up_to_phase(a, b, tol=1e-9)


def test_serialization_tokens():
    circ = cc.Circuit(3)
    circ.append_layer([cc.gate_x(0), cc.gate_h(1)])
    circ.append_layer([cc.gate_zz(0, 1, -4.0)])
    circ.append_layer([cc.gate_cz(1, 2)])
    text = cc.circuit_to_text(circ)
    assert "X(0; pi)" in text
    assert "ZZ(0,1; -4)" in text
    assert "CZ(1,2)" in text
