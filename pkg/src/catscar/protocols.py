"""Coherence measurement protocols over simulated runs.

All protocols are literal gate-level simulations: prepare, imprint collective
phases with virtual Z rotations, optionally evolve, echo, reverse the
preparation, and read the ground-state probability.  Fourier analysis of the
phase response isolates the far-off-diagonal doublet coherence.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from . import circuits as cc
from . import qstate as qs
from .circuits import Circuit, FloquetSpec
from .qstate import SpinPattern, StateVector


def sparse_phase_grid(n: int) -> np.ndarray:
    """phi_j = pi j / (N + 1), j = 0..2N+1: the 2N+2-point uniform grid on [0, 2pi)."""
    return np.pi * np.arange(2 * n + 2) / (n + 1)


def dense_phase_grid(n: int) -> np.ndarray:
    """8N+2 uniform points on [0, 2pi)."""
    return np.pi * np.arange(8 * n + 2) / (4 * n + 1)


def phase_layer(pattern: SpinPattern, phi: float) -> list[cc.Gate]:
    """Z((-1)^{s_j} phi) on every qubit: +phi on 0-bits, -phi on 1-bits."""
    return [cc.gate_z(j, phi if b == 0 else -phi) for j, b in enumerate(pattern.bits)]


def echo_layer(n: int) -> list[cc.Gate]:
    return [cc.gate_x(j) for j in range(n)]


@dataclass
class MqcTrace:
    n_qubits: int
    phis: np.ndarray
    values: np.ndarray
    grid: str = "sparse"

    def __post_init__(self):
        if len(self.phis) == 0:
            raise ValueError("empty phase grid")
        if np.any(self.values < -1e-12) or np.any(self.values > 1 + 1e-12):
            raise ValueError("ground-state probabilities must lie in [0, 1]")

    @property
    def n_samples(self) -> int:
        return len(self.phis)


@dataclass
class MqcSpectrum:
    q: np.ndarray
    amplitudes: np.ndarray

    def peak(self, q: int) -> float:
        return float(self.amplitudes[np.flatnonzero(self.q == q)[0]])


@dataclass
class GhzFidelityReport:
    p_s: float
    p_sbar: float
    offdiag: float  # |a2| = sqrt(Kf(N))
    fidelity: float


@dataclass
class InterferometryTrace:
    n_qubits: int
    times: np.ndarray    # cycle indices t/T
    phis: np.ndarray
    values: np.ndarray   # K'(phi, t), shape (n_times, n_phis)
    fourier: np.ndarray  # K'_f(2N, t), shape (n_times,)


def _ground_probability(state: StateVector) -> float:
    return float(abs(state.amplitudes[0]) ** 2)


def mqc_run(prep: Circuit, pattern: SpinPattern, sampling="sparse") -> MqcTrace:
    """Collective-phase response K(phi) of the state prepared by ``prep``.

    For each phi: run prep, apply the X(pi) echo layer, the staggered phase
    layer, then the exact gate-by-gate reversal of prep, and record the
    probability of returning to |0...0>.  An ideal doublet state gives
    K(phi) = [1 + cos(N phi)] / 2.
    """
    n = prep.n_qubits
    if isinstance(sampling, str):
        if sampling == "sparse":
            phis = sparse_phase_grid(n)
        elif sampling == "dense":
            phis = dense_phase_grid(n)
        else:
            raise ValueError("sampling must be 'sparse', 'dense' or an angle array")
    else:
        phis = np.asarray(sampling, dtype=float)
        if phis.size == 0:
            raise ValueError("empty phase grid")
    base = cc.run(prep)
    for j in range(n):
        qs.apply_1q(base, j, qs.X_PI)
    reverse = prep.inverse()
    values = np.empty(len(phis))
    for i, phi in enumerate(phis):
        state = base.copy()
        for g in phase_layer(pattern, phi):
            qs.apply_1q(state, g.qubits[0], g.matrix)
        cc.run(reverse, state)
        values[i] = _ground_probability(state)
    grid = sampling if isinstance(sampling, str) else "custom"
    return MqcTrace(n, phis, values, grid)


def mqc_fourier(trace: MqcTrace) -> MqcSpectrum:
    """K_f(q) = |sum_k e^{i q phi_k} K(phi_k)| / N_s for q in [-N, N]."""
    qorders = np.arange(-trace.n_qubits, trace.n_qubits + 1)
    phases = np.exp(1j * np.outer(qorders, trace.phis))
    amps = np.abs(phases @ trace.values) / trace.n_samples
    return MqcSpectrum(qorders, amps)


def mqc_fourier_direct(trace: MqcTrace) -> MqcSpectrum:
    """Reference DFT by explicit summation (cross-check oracle)."""
    qorders = np.arange(-trace.n_qubits, trace.n_qubits + 1)
    amps = np.empty(len(qorders))
    for i, q in enumerate(qorders):
        acc = 0.0 + 0.0j
        for phi, val in zip(trace.phis, trace.values):
            acc += np.exp(1j * q * phi) * val
        amps[i] = abs(acc) / trace.n_samples
    return MqcSpectrum(qorders, amps)


def doublet_coherence(state: StateVector, pattern: SpinPattern) -> float:
    """|<s|psi><psi|sbar>| directly from amplitudes (the quantity sqrt(K_f(N)))."""
    a = state.amplitudes[pattern.basis_index()]
    b = state.amplitudes[pattern.complement().basis_index()]
    return float(abs(a) * abs(b))


def parity_operator_layer(pattern: SpinPattern, gamma: float) -> list[np.ndarray]:
    """Per-qubit factors of the staggered parity observable at angle gamma.

    Qubit j contributes (-1)^(j+1) [cos(g_j) sigma_y + sin(g_j) sigma_x] with
    g_j = -(-1)^{s_j} gamma; for the alternating pattern this is the usual
    staggered-rotation parity operator.
    """
    ops = []
    for j, b in enumerate(pattern.bits):
        g = -gamma if b == 0 else gamma
        m = np.cos(g) * qs.SIGMA_Y + np.sin(g) * qs.SIGMA_X
        if (j + 1) % 2:  # sites numbered from 1: odd sites carry the -1
            m = -m
        ops.append(m)
    return ops


def parity_scan(state: StateVector, pattern: SpinPattern, gammas) -> np.ndarray:
    """<P(gamma)> evaluated exactly from amplitudes; even N only."""
    n = state.n_qubits
    if n % 2:
        raise ValueError("staggered parity needs even N")
    if len(pattern) != n:
        raise ValueError("pattern length mismatch")
    out = np.empty(len(gammas))
    for i, gamma in enumerate(gammas):
        rotated = state.copy()
        for j, m in enumerate(parity_operator_layer(pattern, float(gamma))):
            qs.apply_1q(rotated, j, m)
        val = qs.overlap(state, rotated)
        out[i] = val.real
    return out


def parity_gamma_grid(n: int, m: int | None = None) -> np.ndarray:
    """Uniform gamma grid resolving the N-periodic parity oscillation."""
    m = m if m is not None else max(4 * n, 16)
    return 2 * np.pi * np.arange(m) / m


def fit_parity_amplitude(gammas, values, n: int) -> tuple[float, float]:
    """Least-squares fit of A cos(N gamma + C) with the frequency held at N."""
    gammas = np.asarray(gammas, dtype=float)
    design = np.stack([np.cos(n * gammas), -np.sin(n * gammas)], axis=1)
    coef, *_ = np.linalg.lstsq(design, np.asarray(values, dtype=float), rcond=None)
    a = float(np.hypot(*coef))
    c = float(np.arctan2(coef[1], coef[0]))
    return a, c


def ghz_fidelity(populations: tuple[float, float], spectrum: MqcSpectrum,
                 n: int) -> GhzFidelityReport:
    """F = (P_s + P_sbar)/2 + sqrt(K_f(N))."""
    p_s, p_sbar = populations
    offdiag = float(np.sqrt(spectrum.peak(n)))
    f = (p_s + p_sbar) / 2 + offdiag
    if not -1e-9 <= f <= 1 + 1e-9:
        raise ValueError(f"fidelity {f} outside [0, 1]")
    return GhzFidelityReport(p_s, p_sbar, offdiag, f)


def interferometry_phase_grid(n: int, m: int) -> np.ndarray:
    """phi(k) = -pi/N + 2 pi k / (N M), k = 0..M-1."""
    return -np.pi / n + 2 * np.pi * np.arange(m) / (n * m)


def _interferometry_fourier(values: np.ndarray, phis: np.ndarray, n: int) -> np.ndarray:
    weights = np.exp(2j * n * phis)
    return np.abs(values @ weights) / len(phis)


def cat_interferometry(prep: Circuit, pattern: SpinPattern, dtc: FloquetSpec,
                       cycles: int, m: int | None = None, noise=None,
                       n_traj: int = 1, seed: int | None = None,
                       switch=None) -> InterferometryTrace:
    """Phase-doubling interferometry of a doublet state through driving cycles.

    For each phase sample and cycle count: prep, staggered Z(+phi) layer, t
    driving cycles, X(pi) echo layer, staggered Z(-phi) layer, reversed prep,
    ground-state probability.  The Fourier peak K'_f(2N, t) isolates the
    doubled collective phase; an ideal doublet in an unperturbed cycle gives
    0.25 at even t and 0 at odd t.  ``pattern`` is the doublet the prep circuit
    produced (it also fixes the staggering of the phase layers).

    ``switch=(t_switch, flip_sites, new_spec)`` flips the given qubits right
    after cycle t_switch and continues under ``new_spec`` (or the old spec if
    None): in-flight switching of the state pattern and of its protection.
    With a NoiseModel, trajectories are averaged before the Fourier step.
    """
    if cycles < 0:
        raise ValueError("cycles must be nonnegative")
    n = prep.n_qubits
    if dtc.n != n or len(pattern) != n:
        raise ValueError("spec and pattern size must match the preparation circuit")
    m = m if m is not None else 2 * n + 2
    if m < 2:
        raise ValueError("need at least two phase samples")
    phis = interferometry_phase_grid(n, m)

    if noise is not None:
        from . import noise as noisemod
        return noisemod.noisy_interferometry(
            prep, pattern, dtc, cycles, phis, noise, n_traj, seed, switch)

    reverse = prep.inverse()
    cycle_circuit = cc.build_floquet_circuit(dtc)
    switch_at, flip_sites, new_spec = switch if switch is not None else (None, (), None)
    cycle_after = cc.build_floquet_circuit(new_spec) if new_spec is not None else cycle_circuit

    base = cc.run(prep)
    values = np.zeros((cycles + 1, m))
    for k, phi in enumerate(phis):
        state = base.copy()
        for g in phase_layer(pattern, float(phi)):
            qs.apply_1q(state, g.qubits[0], g.matrix)
        for t in range(cycles + 1):
            switched = switch_at is not None and t > switch_at
            meas_pattern = pattern.flipped(*flip_sites) if switched else pattern
            meas = state.copy()
            for j in range(n):
                qs.apply_1q(meas, j, qs.X_PI)
            for g in phase_layer(meas_pattern, -float(phi)):
                qs.apply_1q(meas, g.qubits[0], g.matrix)
            if switched:  # undo the pattern switch before the reversal circuit
                for site in flip_sites:
                    qs.apply_1q(meas, site, qs.X_PI)
            cc.run(reverse, meas)
            values[t, k] = _ground_probability(meas)
            if t < cycles:
                if switch_at is not None and t == switch_at:
                    for site in flip_sites:
                        qs.apply_1q(state, site, qs.X_PI)
                cc.run(cycle_after if switched or t == switch_at else cycle_circuit, state)
    fourier = _interferometry_fourier(values, phis, n)
    return InterferometryTrace(n, np.arange(cycles + 1), phis, values, fourier)


# ---------------------------------------------------------------------------
# CSV emitters
# ---------------------------------------------------------------------------

def write_trace_csv(path, trace: MqcTrace, seed=None) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow([f"# N={trace.n_qubits} grid={trace.grid} seed={seed}"])
        w.writerow(["phi", "K"])
        for phi, val in zip(trace.phis, trace.values):
            w.writerow([f"{phi:.12g}", f"{val:.12g}"])


def write_spectrum_csv(path, spectrum: MqcSpectrum, n: int, grid="sparse", seed=None) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow([f"# N={n} grid={grid} seed={seed}"])
        w.writerow(["q", "Kf"])
        for q, val in zip(spectrum.q, spectrum.amplitudes):
            w.writerow([int(q), f"{val:.12g}"])


def write_interferometry_csv(path, trace: InterferometryTrace, seed=None) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow([f"# N={trace.n_qubits} grid=interferometry seed={seed}"])
        w.writerow(["t", "Kf2N"])
        for t, val in zip(trace.times, trace.fourier):
            w.writerow([int(t), f"{val:.12g}"])
