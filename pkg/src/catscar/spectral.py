"""Exact Floquet spectral analysis.

Builds the cycle unitary as a dense matrix, diagonalizes it (complex Schur, so
eigenvectors stay orthonormal through exact degeneracies), and evaluates
Fock-space localization diagnostics: inverse participation ratio, the
Edwards-Anderson parameter, quasienergy pairing and doublet overlaps.
"""
from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from . import qstate as qs
from .circuits import FloquetSpec
from .qstate import SpinPattern

DENSE_CAP_DEFAULT = 12  # 2^(2N) * 16 bytes: N=12 is ~268 MB per matrix


@dataclass
class FloquetMatrix:
    n: int
    entries: np.ndarray

    def unitarity_defect(self) -> float:
        d = self.entries.conj().T @ self.entries - np.eye(self.entries.shape[0])
        return float(np.abs(d).max())


def _apply_1q_rows(m: np.ndarray, qubit: int, g: np.ndarray) -> np.ndarray:
    """Left-multiply a (2^n, k) matrix by a single-qubit gate on the row index."""
    cols = m.shape[1]
    view = m.reshape(-1, 2, (1 << qubit) * cols)
    out = np.empty_like(view)
    out[:, 0, :] = g[0, 0] * view[:, 0, :] + g[0, 1] * view[:, 1, :]
    out[:, 1, :] = g[1, 0] * view[:, 0, :] + g[1, 1] * view[:, 1, :]
    return out.reshape(m.shape)


def ising_phase_diagonal(n: int, bonds: tuple[float, ...], t: float = 1.0) -> np.ndarray:
    """Diagonal of exp(-i T sum_j J_j z_j z_{j+1}) over the ring."""
    z = qs.z_sign_table(n)
    energy = np.zeros(1 << n)
    for b, jb in enumerate(bonds):
        energy += jb * z[:, b] * z[:, (b + 1) % n]
    return np.exp(-1j * t * energy)


def build_floquet_matrix(spec: FloquetSpec, cap: int = DENSE_CAP_DEFAULT) -> FloquetMatrix:
    """Dense cycle unitary U2(lambda2) . U1(lambda1).

    U1 is a product of identical single-qubit factors (longitudinal fields,
    y-tilt, spin-flip pulse); U2 is the Ising phase diagonal conjugated by the
    uniform y-rotation tilting sigma_z by lambda2.  Assembled by per-qubit
    contractions, never by 2^N x 2^N matmuls.
    """
    n = spec.n
    if n > cap:
        raise ValueError(
            f"N={n} exceeds the dense cap {cap} "
            f"(needs {(1 << (2 * n)) * 16 / 1e9:.1f} GB per matrix); raise cap explicitly to proceed")
    w1 = qs.rz(spec.phi1) @ qs.ry(spec.lambda1) @ qs.rz(spec.phi2) @ qs.rx(np.pi)
    ry2 = qs.ry(spec.lambda2)

    diag = ising_phase_diagonal(n, spec.bond_strengths, spec.t)
    u = np.diag(diag).astype(complex)
    for q in range(n):  # left factor: the tilt rotation
        u = _apply_1q_rows(u, q, ry2)
    # right factors act on the column index: transpose, left-apply g^T, undo
    u = np.ascontiguousarray(u.T)
    ry2d = ry2.conj().T
    for q in range(n):
        u = _apply_1q_rows(u, q, ry2d.T)
    for q in range(n):
        u = _apply_1q_rows(u, q, w1.T)
    return FloquetMatrix(n, np.ascontiguousarray(u.T))


@dataclass
class SpectrumReport:
    """Eigenpairs plus per-eigenstate localization diagnostics."""

    n: int
    eigenphases: np.ndarray            # in (-pi, pi]
    eigenvectors: np.ndarray           # orthonormal columns
    ipr: np.ndarray
    ea: np.ndarray
    overlaps: np.ndarray | None = None  # |<e|s>|^2 + |<e|sbar>|^2 for the target
    max_residual: float = 0.0

    def scar_index(self) -> int:
        """Max-overlap eigenstate; ties broken by larger IPR."""
        if self.overlaps is None:
            raise ValueError("report was built without a target pattern")
        best = np.flatnonzero(self.overlaps > self.overlaps.max() - 1e-12)
        return int(best[np.argmax(self.ipr[best])])


def ipr(vec: np.ndarray) -> float:
    """Sum of fourth powers of amplitude magnitudes; 1/2 for an ideal doublet cat."""
    p = np.abs(np.asarray(vec)) ** 2
    return float(np.sum(p * p))


def _pair_products(n: int) -> np.ndarray:
    """(2^n, n(n-1)/2) table of z_j z_k over all unordered site pairs."""
    z = qs.z_sign_table(n)
    cols = [z[:, j] * z[:, k] for j in range(n) for k in range(j + 1, n)]
    return np.stack(cols, axis=1)


def _ea_batch(probs: np.ndarray, n: int, pair_table: np.ndarray) -> np.ndarray:
    zz = probs.T @ pair_table  # (n_vec, n_pairs)
    return 2.0 * np.sum(zz * zz, axis=1) / (n - 1)


def edwards_anderson(vec: np.ndarray, n: int) -> float:
    """chi = (1/(N-1)) sum_{j != k} <zz>^2;  N for ideal cats, ~0 when ergodic."""
    p = np.abs(np.asarray(vec)) ** 2
    return float(_ea_batch(p[:, None], n, _pair_products(n))[0])


def diagonalize(m: FloquetMatrix, target: SpinPattern | None = None,
                residual_tol: float = 1e-8) -> SpectrumReport:
    """Schur-based eigendecomposition of a unitary (normal) matrix.

    For a normal matrix the Schur form is diagonal up to roundoff, so the Schur
    basis is an orthonormal eigenbasis; the largest off-diagonal magnitude
    bounds every eigenpair residual ||U v - e^{i eps} v||.
    """
    t, v = scipy.linalg.schur(m.entries, output="complex")
    dim = t.shape[0]
    resid = float(np.abs(t - np.diag(np.diag(t))).max()) if dim > 1 else 0.0
    if resid > residual_tol:
        raise ArithmeticError(
            f"Schur form not diagonal: residual {resid:.2e} exceeds {residual_tol:.0e}; "
            "input may not be unitary")
    phases = np.angle(np.diag(t))
    probs = np.abs(v) ** 2
    ipr_all = np.sum(probs * probs, axis=0)
    ea_all = _ea_batch(probs, m.n, _pair_products(m.n))
    overlaps = None
    if target is not None:
        overlaps = probs[target.basis_index(), :] + probs[target.complement().basis_index(), :]
    return SpectrumReport(m.n, phases, v, ipr_all, ea_all, overlaps, resid)


@dataclass(frozen=True)
class ScarPair:
    patterns: tuple[SpinPattern, SpinPattern]
    eigenphases: tuple[float, float]
    gap: float                # |eps_- - eps_+| folded into [0, pi]
    iprs: tuple[float, float]


def scar_pair(report: SpectrumReport, pattern: SpinPattern) -> ScarPair:
    """The two eigenstates of largest overlap with {s, sbar} and their gap."""
    if report.overlaps is None:
        raise ValueError("need a report built with the target pattern")
    order = np.argsort(report.overlaps)[::-1][:2]
    e = tuple(float(report.eigenphases[i]) for i in order)
    gap = abs(e[0] - e[1]) % (2 * np.pi)
    gap = min(gap, 2 * np.pi - gap)
    return ScarPair((pattern, pattern.complement()), e, float(gap),
                    tuple(float(report.ipr[i]) for i in order))


def scar_patterns(j_signs) -> tuple[
        tuple[SpinPattern, SpinPattern], tuple[SpinPattern, SpinPattern]]:
    """The two protected doublets of a bond-sign landscape on an even ring.

    The second returned pair solves the bond-sign equation
    (2 s_j - 1)(2 s_{j+1} - 1) = sign_j exactly; the first is its staggered
    overlay (every second site flipped), which satisfies the negated signs and
    spans the opposite extreme of the Ising spectrum.  The order matches the
    uniform-coupling case: alternating pair first, uniform pair second.
    """
    signs = list(j_signs)
    n = len(signs)
    if n % 2:
        raise ValueError("ring pattern solving needs even N")
    if any(s not in (-1, 1) for s in signs):
        raise ValueError("bond signs must be +-1")
    prod = 1
    for s in signs:
        prod *= s
    if prod == -1:
        raise ValueError("frustrated ring: product of bond signs is -1, no exact doublet")
    m = [1]
    for b in range(n - 1):
        m.append(m[-1] * signs[b])
    direct = SpinPattern(tuple((v + 1) // 2 for v in m))
    staggered = direct.flipped(*range(1, n, 2))
    return ((staggered, staggered.complement()), (direct, direct.complement()))


@dataclass(frozen=True)
class DisorderEnsemble:
    """Uniform bond disorder J_j in [J - W/2, J + W/2] on the ring."""

    j_mean: float = np.pi / 4
    w: float = np.pi / 4
    n_samples: int = 100
    seed: int = 0

    def draw(self, n_bonds: int) -> tuple[np.ndarray, list[int]]:
        """(n_samples, n_bonds) couplings plus per-sample child seed entropy."""
        ss = np.random.SeedSequence(self.seed)
        children = ss.spawn(self.n_samples)
        lo, hi = self.j_mean - self.w / 2, self.j_mean + self.w / 2
        draws = np.stack([
            np.random.default_rng(c).uniform(lo, hi, n_bonds) for c in children])
        return draws, [c.entropy for c in children]


def mbl_ensemble_scan(ens: DisorderEnsemble, target: SpinPattern,
                      lambdas, n: int, cap: int = DENSE_CAP_DEFAULT) -> dict:
    """Target-doublet IPR of the max-overlap eigenstate per (lambda, sample).

    Returns the raw (n_lambda, n_samples) IPR array plus mean and top/bottom
    decile means per lambda, with seeds recorded for replay.
    """
    couplings, seeds = ens.draw(n)
    out = np.zeros((len(lambdas), ens.n_samples))
    for s in range(ens.n_samples):
        jc = tuple(float(x) for x in couplings[s])
        for i, lam in enumerate(lambdas):
            spec = FloquetSpec.experimental(n, lambda1=lam, lambda2=lam, j_couplings=jc)
            report = diagonalize(build_floquet_matrix(spec, cap), target)
            out[i, s] = report.ipr[report.scar_index()]
    k = max(1, ens.n_samples // 10)
    srt = np.sort(out, axis=1)
    return {
        "lambdas": list(lambdas),
        "ipr": out,
        "mean": out.mean(axis=1),
        "bottom_decile_mean": srt[:, :k].mean(axis=1),
        "top_decile_mean": srt[:, -k:].mean(axis=1),
        "seeds": seeds,
    }


# ---------------------------------------------------------------------------
# Edwards-Anderson crossing scan
# ---------------------------------------------------------------------------

def _chi_one_sample(args) -> float:
    kind, lam, n, seed, single, lam1_sign = args
    rng = np.random.default_rng(seed)
    lam1 = lam1_sign * lam
    if kind == "scar":
        bits = tuple(int(b) for b in rng.integers(0, 2, n))
        target = SpinPattern(bits)
        spec = FloquetSpec.experimental(n, lambda1=lam1, lambda2=lam, x_flags=bits)
    else:
        jc = tuple(rng.uniform(np.pi / 8, 3 * np.pi / 8, n))
        spec = FloquetSpec.experimental(n, lambda1=lam1, lambda2=lam, j_couplings=jc)
    entries = build_floquet_matrix(spec).entries
    if single:
        entries = entries.astype(np.complex64)
    _, v = scipy.linalg.schur(entries, output="complex")
    probs = (np.abs(v) ** 2).astype(np.float64)
    table = _pair_products(n)
    if kind == "scar":
        overlaps = probs[target.basis_index(), :] + probs[target.complement().basis_index(), :]
        best = int(np.argmax(overlaps))
        return float(_ea_batch(probs[:, [best]], n, table)[0])
    return float(_ea_batch(probs, n, table).mean())


def _limit_blas_threads():
    for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        os.environ[var] = "1"


def ea_crossing_scan(kind: str, lambdas, sizes, n_samples: int, seed: int = 0,
                     n_workers: int | None = None, single_precision: bool = True,
                     mirror_drive: bool = True) -> dict:
    """Sample-averaged chi(lambda, N) for locating the order-to-ergodic crossing.

    kind="scar": each sample draws a random target pattern with compatible bond
    signs and records chi of the relevant scar.  kind="mbl": each sample draws
    random couplings in [pi/8, 3pi/8] and averages chi over all eigenstates.
    ``mirror_drive`` (default) runs on the mirrored drive branch
    (lambda1 = -lambda), the family the reference crossing values belong to.
    Single precision is plenty for the O(1) crossing estimate and roughly
    halves the Schur cost.
    """
    if kind not in ("scar", "mbl"):
        raise ValueError("kind must be 'scar' or 'mbl'")
    lam1_sign = -1.0 if mirror_drive else 1.0
    ss = np.random.SeedSequence(seed)
    jobs = []
    for i, n in enumerate(sizes):
        for j, lam in enumerate(lambdas):
            for child in ss.spawn(n_samples):
                jobs.append(((i, j), (kind, float(lam), int(n), child,
                                      single_precision, lam1_sign)))
    if n_workers and n_workers > 1:
        with ProcessPoolExecutor(max_workers=n_workers,
                                 initializer=_limit_blas_threads) as pool:
            results = list(pool.map(_chi_one_sample, [a for _, a in jobs], chunksize=4))
    else:
        results = [_chi_one_sample(a) for _, a in jobs]
    chi = np.zeros((len(sizes), len(lambdas)))
    for ((i, j), _), val in zip(jobs, results):
        chi[i, j] += val
    chi /= n_samples
    return {"kind": kind, "sizes": list(sizes), "lambdas": list(lambdas),
            "chi": chi, "seed": seed, "n_samples": n_samples}


def crossing_point(lambdas, chi_a, chi_b) -> float:
    """Interpolated lambda where two chi(lambda) curves cross."""
    lambdas = np.asarray(lambdas, dtype=float)
    d = np.asarray(chi_a, dtype=float) - np.asarray(chi_b, dtype=float)
    sign_change = np.flatnonzero(np.sign(d[:-1]) * np.sign(d[1:]) < 0)
    if len(sign_change) == 0:
        raise ValueError("curves do not cross on the sampled grid")
    i = int(sign_change[0])
    x0, x1 = lambdas[i], lambdas[i + 1]
    return float(x0 + (x1 - x0) * d[i] / (d[i] - d[i + 1]))
