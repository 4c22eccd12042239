"""Dense statevector kernels and the elementary gate set.

Conventions used throughout the package:

- Qubit ``j`` (0-based) maps to bit ``j`` of the basis index, i.e. qubit 0 is
  the least significant bit.  A bit pattern ``s`` occupies basis index
  ``sum(s[j] << j)``.
- ``sigma_z`` eigenvalues: ``|0> -> +1``, ``|1> -> -1``.
- Amplitudes are complex128; gates are applied in place on strided views,
  never by materializing a ``2^N x 2^N`` unitary.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

NORM_TOL = 1e-10

# Pauli matrices, |0> = sigma_z eigenvalue +1.
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
IDENTITY_2 = np.eye(2, dtype=complex)

PAULIS_1Q = (SIGMA_X, SIGMA_Y, SIGMA_Z)


@dataclass(frozen=True)
class SpinPattern:
    """Classical bit pattern s over {0,1}^N; houses targets for GHZ doublets."""

    bits: tuple[int, ...]

    def __post_init__(self):
        if not self.bits or any(b not in (0, 1) for b in self.bits):
            raise ValueError("pattern bits must be a nonempty sequence over {0,1}")

    @classmethod
    def from_string(cls, s: str) -> "SpinPattern":
        return cls(tuple(int(c) for c in s))

    @classmethod
    def antiferromagnetic(cls, n: int) -> "SpinPattern":
        return cls(tuple(j % 2 for j in range(n)))

    @classmethod
    def ferromagnetic(cls, n: int, bit: int = 0) -> "SpinPattern":
        return cls((bit,) * n)

    def __len__(self) -> int:
        return len(self.bits)

    @property
    def n(self) -> int:
        return len(self.bits)

    def complement(self) -> "SpinPattern":
        return SpinPattern(tuple(1 - b for b in self.bits))

    def basis_index(self) -> int:
        # qubit j = bit j of the index
        return sum(b << j for j, b in enumerate(self.bits))

    def flipped(self, *sites: int) -> "SpinPattern":
        bits = list(self.bits)
        for j in sites:
            bits[j] = 1 - bits[j]
        return SpinPattern(tuple(bits))

    def to_string(self) -> str:
        return "".join(str(b) for b in self.bits)


@dataclass
class StateVector:
    """Dense amplitudes over the 2^N Fock basis."""

    n_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self):
        self.amplitudes = np.asarray(self.amplitudes, dtype=complex)
        if self.amplitudes.shape != (1 << self.n_qubits,):
            raise ValueError("amplitude array length must be 2^n_qubits")

    @classmethod
    def zero(cls, n: int) -> "StateVector":
        amps = np.zeros(1 << n, dtype=complex)
        amps[0] = 1.0
        return cls(n, amps)

    def copy(self) -> "StateVector":
        return StateVector(self.n_qubits, self.amplitudes.copy())

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))


def init_fock(pattern: SpinPattern) -> StateVector:
    """Basis state |s> with amplitude 1 on the index encoding the pattern."""
    state = StateVector(pattern.n, np.zeros(1 << pattern.n, dtype=complex))
    state.amplitudes[pattern.basis_index()] = 1.0
    return state


def init_ghz(pattern: SpinPattern, phi: float = 0.0) -> StateVector:
    """(|s> + e^{-i phi} |sbar>)/sqrt(2)."""
    state = StateVector(pattern.n, np.zeros(1 << pattern.n, dtype=complex))
    state.amplitudes[pattern.basis_index()] = 1 / np.sqrt(2)
    state.amplitudes[pattern.complement().basis_index()] = np.exp(-1j * phi) / np.sqrt(2)
    return state


# ---------------------------------------------------------------------------
# Gate matrices
# ---------------------------------------------------------------------------

def u3_matrix(alpha: float, beta: float, theta: float) -> np.ndarray:
    """Single-qubit rotation with three Euler angles.

    Rotation by ``alpha`` about the axis at angle ``beta - theta`` in the xy
    plane, followed by the phase gate ``Z(theta) = diag(1, e^{i theta})``.
    """
    c, s = np.cos(alpha / 2), np.sin(alpha / 2)
    return np.array(
        [[c, -1j * np.exp(-1j * beta) * np.exp(1j * theta) * s],
         [-1j * np.exp(1j * beta) * s, np.exp(1j * theta) * c]]
    )


def u3_angles(m: np.ndarray) -> tuple[float, float, float, float]:
    """Decompose a 2x2 unitary as e^{i delta} * u3_matrix(alpha, beta, theta).

    Returns (alpha, beta, theta, delta).  The decomposition puts the upper-left
    entry on the nonnegative real axis.
    """
    m = np.asarray(m, dtype=complex)
    a00, a01, a10, a11 = m[0, 0], m[0, 1], m[1, 0], m[1, 1]
    r00 = abs(a00)
    alpha = 2 * np.arctan2(abs(a10), r00)
    if r00 > 1e-12:
        delta = np.angle(a00)
        theta = np.angle(a11) - delta
        if abs(a10) > 1e-12:
            beta = np.angle(a10) - delta + np.pi / 2
        else:
            beta = 0.0
    else:
        # pure off-diagonal: fix beta from the lower-left entry, theta from det
        delta = np.angle(a10) + np.pi / 2  # choose beta = 0
        beta = 0.0
        theta = np.angle(-a01 * a10) - 2 * delta
    return float(alpha), float(beta), float(theta), float(delta)


def rx(theta: float) -> np.ndarray:
    """exp(-i theta sigma_x / 2)"""
    return u3_matrix(theta, 0.0, 0.0)


def ry(theta: float) -> np.ndarray:
    """exp(-i theta sigma_y / 2)"""
    return u3_matrix(theta, np.pi / 2, 0.0)


def rz(theta: float) -> np.ndarray:
    """exp(-i theta sigma_z / 2)"""
    return np.array([[np.exp(-1j * theta / 2), 0], [0, np.exp(1j * theta / 2)]])


def zphase(theta: float) -> np.ndarray:
    """Virtual phase gate Z(theta) = diag(1, e^{i theta})."""
    return np.array([[1, 0], [0, np.exp(1j * theta)]], dtype=complex)


HADAMARD = u3_matrix(np.pi / 2, np.pi / 2, np.pi)  # exactly (X+Z)/sqrt(2)
X_PI = u3_matrix(np.pi, 0.0, 0.0)  # -i sigma_x


def cphase_matrix(phi: float) -> np.ndarray:
    return np.diag([1, 1, 1, np.exp(1j * phi)]).astype(complex)


CZ_MATRIX = cphase_matrix(np.pi).real.astype(complex)

# basis order |q_a q_b> with q_a the first qubit argument: index = 2*b_a + b_b
CNOT_MATRIX = np.array(
    [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex
)


def zz_matrix(phi: float) -> np.ndarray:
    """exp(i phi/4 sigma_z sigma_z): diagonal (e^{i phi/4}, e^{-i phi/4}, ..same.., e^{i phi/4})."""
    p, q = np.exp(1j * phi / 4), np.exp(-1j * phi / 4)
    return np.diag([p, q, q, p])


def fsim_matrix(theta: float, phi: float, delta_plus: float = 0.0,
                delta_minus: float = 0.0, delta_minus_off: float = 0.0) -> np.ndarray:
    """Two-qubit fermionic-simulation gate; reduces to CPHASE(phi) at theta=0."""
    c, s = np.cos(theta), np.sin(theta)
    return np.array([
        [1, 0, 0, 0],
        [0, np.exp(1j * (delta_plus + delta_minus)) * c,
         -1j * np.exp(1j * (delta_plus - delta_minus_off)) * s, 0],
        [0, -1j * np.exp(1j * (delta_plus + delta_minus_off)) * s,
         np.exp(1j * (delta_plus - delta_minus)) * c, 0],
        [0, 0, 0, np.exp(1j * (2 * delta_plus + phi))],
    ])


@dataclass(frozen=True)
class GateU3:
    alpha: float
    beta: float
    theta: float

    @property
    def matrix(self) -> np.ndarray:
        return u3_matrix(self.alpha, self.beta, self.theta)


@dataclass(frozen=True)
class GateTwoQubit:
    """Two-qubit gate by kind: CPHASE, ZZ, CZ, CNOT or FSIM."""

    kind: str
    params: tuple[float, ...] = field(default=())

    _BUILDERS = {
        "CPHASE": lambda p: cphase_matrix(p[0]),
        "ZZ": lambda p: zz_matrix(p[0]),
        "CZ": lambda p: CZ_MATRIX,
        "CNOT": lambda p: CNOT_MATRIX,
        "FSIM": lambda p: fsim_matrix(*p),
    }

    def __post_init__(self):
        if self.kind not in self._BUILDERS:
            raise ValueError(f"unknown two-qubit gate kind {self.kind!r}")

    @property
    def matrix(self) -> np.ndarray:
        return self._BUILDERS[self.kind](self.params)


# ---------------------------------------------------------------------------
# Gate application kernels
# ---------------------------------------------------------------------------

def apply_1q(state: StateVector, qubit: int, m: np.ndarray) -> StateVector:
    """Apply a 2x2 matrix to one qubit, in place over amplitude strides."""
    n = state.n_qubits
    if not 0 <= qubit < n:
        raise IndexError(f"qubit {qubit} out of range for {n} qubits")
    psi = state.amplitudes.reshape(-1, 2, 1 << qubit)
    a0 = psi[:, 0, :].copy()
    a1 = psi[:, 1, :]
    psi[:, 0, :] = m[0, 0] * a0 + m[0, 1] * a1
    psi[:, 1, :] = m[1, 0] * a0 + m[1, 1] * a1
    return state


def apply_2q(state: StateVector, j: int, k: int, m: np.ndarray) -> StateVector:
    """Apply a 4x4 matrix on qubits (j, k); row index is 2*bit_j + bit_k."""
    n = state.n_qubits
    if j == k:
        raise ValueError("two-qubit gate needs distinct qubits")
    if not (0 <= j < n and 0 <= k < n):
        raise IndexError(f"qubits ({j},{k}) out of range for {n} qubits")
    hi, lo = max(j, k), min(j, k)
    psi = state.amplitudes.reshape(-1, 2, 1 << (hi - lo - 1), 2, 1 << lo)

    def block(bj, bk):
        bhi, blo = (bj, bk) if j > k else (bk, bj)
        return psi[:, bhi, :, blo, :]

    old = [block(b >> 1, b & 1).copy() for b in range(4)]
    for b in range(4):
        block(b >> 1, b & 1)[...] = sum(m[b, c] * old[c] for c in range(4))
    return state


def apply_diag_2q(state: StateVector, j: int, k: int, diag: np.ndarray) -> StateVector:
    """Fast path for diagonal two-qubit gates (CZ, CPHASE, ZZ)."""
    n = state.n_qubits
    hi, lo = max(j, k), min(j, k)
    psi = state.amplitudes.reshape(-1, 2, 1 << (hi - lo - 1), 2, 1 << lo)
    for b in range(4):
        bj, bk = b >> 1, b & 1
        bhi, blo = (bj, bk) if j > k else (bk, bj)
        if diag[b] != 1:
            psi[:, bhi, :, blo, :] *= diag[b]
    return state


def apply_u3(state: StateVector, qubit: int, g: GateU3) -> StateVector:
    return apply_1q(state, qubit, g.matrix)


def apply_two_qubit(state: StateVector, j: int, k: int, g: GateTwoQubit) -> StateVector:
    m = g.matrix
    if g.kind in ("CPHASE", "ZZ", "CZ"):
        return apply_diag_2q(state, j, k, np.diag(m))
    return apply_2q(state, j, k, m)


def overlap(a: StateVector, b: StateVector) -> complex:
    """<a|b>."""
    if a.n_qubits != b.n_qubits:
        raise ValueError("states must have equal qubit counts")
    return complex(np.vdot(a.amplitudes, b.amplitudes))


def basis_probabilities(state: StateVector) -> np.ndarray:
    return np.abs(state.amplitudes) ** 2


def expectation_z(state: StateVector, qubit: int) -> float:
    """<sigma_z> on one qubit."""
    p = basis_probabilities(state).reshape(-1, 2, 1 << qubit)
    return float(p[:, 0, :].sum() - p[:, 1, :].sum())


def z_sign_table(n: int) -> np.ndarray:
    """(2^n, n) array of sigma_z eigenvalues per basis state and qubit."""
    idx = np.arange(1 << n)
    return 1.0 - 2.0 * ((idx[:, None] >> np.arange(n)[None, :]) & 1)


def states_equal_up_to_phase(a: np.ndarray, b: np.ndarray, tol: float = 1e-10) -> bool:
    """Elementwise equality after aligning the phase of the largest amplitude."""
    a = np.asarray(a).ravel()
    b = np.asarray(b).ravel()
    if a.shape != b.shape:
        return False
    i = int(np.argmax(np.abs(a)))
    if abs(a[i]) < tol or abs(b[i]) < tol:
        return bool(np.allclose(a, b, atol=tol))
    phase = (b[i] / abs(b[i])) / (a[i] / abs(a[i]))
    return bool(np.max(np.abs(a * phase - b)) < tol)


# ---------------------------------------------------------------------------
# Sparse branch state: exact simulation of circuits whose intermediate states
# touch only a few Fock branches (GHZ generation at N beyond dense reach).
# ---------------------------------------------------------------------------

class SparseState:
    """Amplitudes as {basis index: amplitude}, pruned below an absolute cutoff."""

    def __init__(self, n_qubits: int, amps: dict[int, complex] | None = None,
                 prune: float = 1e-14):
        self.n_qubits = n_qubits
        self.amps = dict(amps) if amps else {0: 1.0 + 0j}
        self.prune = prune

    def apply_1q(self, qubit: int, m: np.ndarray) -> "SparseState":
        bit = 1 << qubit
        out: dict[int, complex] = {}
        for idx, a in self.amps.items():
            b = (idx & bit) >> qubit
            for nb in (0, 1):
                coeff = m[nb, b]
                if coeff == 0:
                    continue
                nidx = (idx & ~bit) | (nb << qubit)
                out[nidx] = out.get(nidx, 0.0) + coeff * a
        self.amps = {i: a for i, a in out.items() if abs(a) > self.prune}
        return self

    def apply_diag_2q(self, j: int, k: int, diag: np.ndarray) -> "SparseState":
        for idx in self.amps:
            b = (((idx >> j) & 1) << 1) | ((idx >> k) & 1)
            self.amps[idx] *= diag[b]
        return self

    def apply_2q(self, j: int, k: int, m: np.ndarray) -> "SparseState":
        out: dict[int, complex] = {}
        mask = ~((1 << j) | (1 << k))
        for idx, a in self.amps.items():
            b = (((idx >> j) & 1) << 1) | ((idx >> k) & 1)
            for nb in range(4):
                coeff = m[nb, b]
                if coeff == 0:
                    continue
                nidx = (idx & mask) | ((nb >> 1) << j) | ((nb & 1) << k)
                out[nidx] = out.get(nidx, 0.0) + coeff * a
        self.amps = {i: a for i, a in out.items() if abs(a) > self.prune}
        return self

    def norm(self) -> float:
        return float(np.sqrt(sum(abs(a) ** 2 for a in self.amps.values())))

    def amplitude(self, index: int) -> complex:
        return self.amps.get(index, 0.0 + 0j)
