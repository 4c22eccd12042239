"""Circuit IR, radial-path GHZ generation, CZ compilation, Floquet-cycle builder.

A circuit is an ordered list of layers; a layer is a list of gates acting on
disjoint qubits.  Gates carry an exact matrix (authoritative for simulation)
plus a name and parameters for the text serialization.  Serializing a merged
single-qubit gate drops its global phase (documented; all equality contracts
in this package are fidelity-based or up-to-global-phase).
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from . import qstate as qs
from .qstate import SpinPattern, StateVector


@dataclass(frozen=True)
class Gate:
    name: str
    qubits: tuple[int, ...]
    params: tuple[float, ...] = ()
    _matrix: np.ndarray | None = field(default=None, repr=False, compare=False)

    @property
    def matrix(self) -> np.ndarray:
        if self._matrix is not None:
            return self._matrix
        return _matrix_from_name(self.name, self.params)

    def dagger(self) -> "Gate":
        m = self.matrix.conj().T
        if len(self.qubits) == 1:
            a, b, t, _ = qs.u3_angles(m)
            return Gate("U3", self.qubits, (a, b, t), m)
        name, params = _name_2q_inverse(self.name, self.params)
        return Gate(name, self.qubits, params, m)


def _matrix_from_name(name: str, params: tuple[float, ...]) -> np.ndarray:
    if name == "U3":
        return qs.u3_matrix(*params)
    if name == "H":
        return qs.HADAMARD
    if name == "X":
        return qs.X_PI if not params else qs.rx(params[0])
    if name == "Z":
        return qs.zphase(params[0])
    return qs.GateTwoQubit(name, params).matrix


def _name_2q_inverse(name: str, params: tuple[float, ...]) -> tuple[str, tuple[float, ...]]:
    if name in ("CZ", "CNOT"):
        return name, params
    if name in ("CPHASE", "ZZ"):
        return name, (-params[0],)
    raise ValueError(f"cannot invert gate {name!r} by name")


def gate_u3(q: int, alpha: float, beta: float, theta: float) -> Gate:
    return Gate("U3", (q,), (alpha, beta, theta))


def gate_h(q: int) -> Gate:
    return Gate("H", (q,))


def gate_x(q: int) -> Gate:
    return Gate("X", (q,))


def gate_z(q: int, theta: float) -> Gate:
    return Gate("Z", (q,), (theta,))


def gate_cnot(control: int, target: int) -> Gate:
    return Gate("CNOT", (control, target))


def gate_cz(a: int, b: int) -> Gate:
    return Gate("CZ", (a, b))


def gate_zz(a: int, b: int, phi: float) -> Gate:
    return Gate("ZZ", (a, b), (phi,))


@dataclass
class Circuit:
    n_qubits: int
    layers: list[list[Gate]] = field(default_factory=list)

    def append_layer(self, gates: list[Gate]) -> None:
        seen: set[int] = set()
        for g in gates:
            for q in g.qubits:
                if q in seen:
                    raise ValueError(f"qubit {q} appears twice in one layer")
                if not 0 <= q < self.n_qubits:
                    raise IndexError(f"qubit {q} out of range")
                seen.add(q)
        self.layers.append(list(gates))

    @property
    def n_layers(self) -> int:
        return len(self.layers)

    def gate_count(self) -> int:
        return sum(len(layer) for layer in self.layers)

    def inverse(self) -> "Circuit":
        inv = Circuit(self.n_qubits)
        for layer in reversed(self.layers):
            inv.append_layer([g.dagger() for g in layer])
        return inv


def run(circuit: Circuit, state: StateVector | None = None) -> StateVector:
    """Execute on a dense statevector (|0...0> by default)."""
    state = state if state is not None else StateVector.zero(circuit.n_qubits)
    for layer in circuit.layers:
        for g in layer:
            if len(g.qubits) == 1:
                qs.apply_1q(state, g.qubits[0], g.matrix)
            elif g.name in ("CZ", "CPHASE", "ZZ"):
                qs.apply_diag_2q(state, g.qubits[0], g.qubits[1], np.diag(g.matrix))
            else:
                qs.apply_2q(state, g.qubits[0], g.qubits[1], g.matrix)
    return state


def run_sparse(circuit: Circuit, state: qs.SparseState | None = None) -> qs.SparseState:
    """Execute on a sparse branch state; exact for few-branch circuits at large N."""
    state = state if state is not None else qs.SparseState(circuit.n_qubits)
    for layer in circuit.layers:
        for g in layer:
            if len(g.qubits) == 1:
                state.apply_1q(g.qubits[0], g.matrix)
            elif g.name in ("CZ", "CPHASE", "ZZ"):
                state.apply_diag_2q(g.qubits[0], g.qubits[1], np.diag(g.matrix))
            else:
                state.apply_2q(g.qubits[0], g.qubits[1], g.matrix)
    return state


def unitary(circuit: Circuit) -> np.ndarray:
    """Dense circuit unitary by column application; N <= 12."""
    n = circuit.n_qubits
    if n > 12:
        raise ValueError("dense unitary limited to 12 qubits")
    dim = 1 << n
    cols = np.eye(dim, dtype=complex)
    for k in range(dim):
        state = StateVector(n, cols[:, k].copy())
        cols[:, k] = run(circuit, state).amplitudes
    return cols


# ---------------------------------------------------------------------------
# 2D layouts and the radial GHZ generator
# ---------------------------------------------------------------------------

Coord = tuple[int, int]


@dataclass(frozen=True)
class Layout2D:
    rows: int
    cols: int
    active: frozenset[Coord]
    couplers: frozenset[frozenset[Coord]]

    @classmethod
    def grid(cls, rows: int, cols: int, active: set[Coord] | None = None) -> "Layout2D":
        active = set(active) if active is not None else {(r, c) for r in range(rows) for c in range(cols)}
        for (r, c) in active:
            if not (0 <= r < rows and 0 <= c < cols):
                raise ValueError(f"site {(r, c)} outside {rows}x{cols} grid")
        couplers = set()
        for (r, c) in active:
            for (dr, dc) in ((0, 1), (1, 0)):
                nb = (r + dr, c + dc)
                if nb in active:
                    couplers.add(frozenset(((r, c), nb)))
        return cls(rows, cols, frozenset(active), frozenset(couplers))

    @classmethod
    def line(cls, n: int) -> "Layout2D":
        return cls.grid(1, n)

    def neighbors(self, site: Coord) -> list[Coord]:
        out = []
        for (dr, dc) in ((0, 1), (0, -1), (1, 0), (-1, 0)):
            nb = (site[0] + dr, site[1] + dc)
            if frozenset((site, nb)) in self.couplers:
                out.append(nb)
        return sorted(out)


def sixty_qubit_region() -> list[Coord]:
    """A fixed connected 60-qubit selection of the 11x11 grid.

    A centered 6x10 block with two sites clipped from the left corners and two
    added on the right edge; chosen so the radial generator needs 9 CNOT layers.
    """
    sites = {(r, c) for r in range(3, 9) for c in range(0, 10)}
    sites -= {(3, 0), (8, 0), (3, 1), (8, 1)}
    sites |= {(5, 10), (6, 10), (4, 10), (7, 10)}
    return sorted(sites)


def _pair_bfs_dist(layout: Layout2D, targets: list[Coord], sources: tuple[Coord, ...]) -> dict[Coord, int]:
    tset = set(targets)
    dist = {s: 0 for s in sources}
    frontier = list(sources)
    while frontier:
        nxt = []
        for site in frontier:
            for nb in layout.neighbors(site):
                if nb in tset and nb not in dist:
                    dist[nb] = dist[site] + 1
                    nxt.append(nb)
        frontier = nxt
    return dist


def select_root_pair(layout: Layout2D, targets: list[Coord]) -> tuple[Coord, Coord]:
    """Adjacent target pair minimizing the maximum BFS distance to all targets."""
    tset = set(targets)
    best = None
    for pair in sorted(layout.couplers, key=lambda p: sorted(p)):
        a, b = sorted(pair)
        if a not in tset or b not in tset:
            continue
        dist = _pair_bfs_dist(layout, targets, (a, b))
        if len(dist) != len(targets):
            continue
        ecc = max(dist.values())
        key = (ecc, a, b)
        if best is None or key < best[0]:
            best = (key, (a, b))
    if best is None:
        raise ValueError("targets are not connected in the coupler graph")
    return best[1]


def _cnot_schedule(layout: Layout2D, targets: list[Coord], root: Coord,
                   second: Coord) -> list[list[tuple[Coord, Coord]]]:
    """Rounds of (control, target) pairs entangling every target site.

    Entanglement spreads radially: a site at BFS distance d from the root is
    wired from a neighbor at distance d-1 (the second root-pair qubit being the
    first CNOT target).  Each entangled site drives at most one CNOT per
    round; a parent with several children serves them over consecutive rounds,
    children with the taller remaining subtree first.
    """
    dist = _pair_bfs_dist(layout, targets, (root,))
    children: dict[Coord, list[Coord]] = {s: [] for s in targets}
    for site in sorted(targets):
        if site in (root, second):
            continue
        parents = [nb for nb in layout.neighbors(site)
                   if nb in dist and dist[nb] == dist[site] - 1]
        children[min(parents)].append(site)
    children[root].append(second)

    # broadcast time of each subtree: children served in decreasing-time order
    btime: dict[Coord, int] = {}

    def compute_btime(site: Coord) -> int:
        if site in btime:
            return btime[site]
        ts = sorted((compute_btime(c) for c in children[site]), reverse=True)
        btime[site] = max((i + 1 + t for i, t in enumerate(ts)), default=0)
        return btime[site]

    order: dict[Coord, list[Coord]] = {}
    for site in targets:
        compute_btime(site)
        order[site] = sorted(children[site], key=lambda c: (-btime[c], c))

    ready = {root: 0}  # first round in which a site may control a CNOT
    rounds: list[list[tuple[Coord, Coord]]] = []
    remaining = {s: list(order[s]) for s in targets}
    done = {root}
    r = 0
    while len(done) < len(targets):
        layer = []
        for site in sorted(done):
            if ready[site] > r or not remaining[site]:
                continue
            child = remaining[site].pop(0)
            layer.append((site, child))
        if not layer:
            raise RuntimeError("schedule stalled; coupler graph inconsistent")
        for ctrl, child in layer:
            done.add(child)
            ready[child] = r + 1
        rounds.append(layer)
        r += 1
    return rounds


def generate_ghz_circuit(layout: Layout2D, targets: list[Coord],
                         pattern: SpinPattern) -> Circuit:
    """Radial GHZ generator over {H, X(pi), CNOT}.

    Qubit index = position in ``targets``.  The first layer is a Hadamard on
    the root plus X(pi) on every site whose pattern bit differs from its
    parent's in the spreading tree; the CNOT rounds then build up
    (|s> + |sbar>)/sqrt(2) exactly.
    """
    if len(pattern) != len(targets):
        raise ValueError("pattern length must match target count")
    if len(set(targets)) != len(targets):
        raise ValueError("duplicate target sites")
    root, second = select_root_pair(layout, list(targets))
    rounds = _cnot_schedule(layout, list(targets), root, second)

    index = {site: i for i, site in enumerate(targets)}
    bit = {site: pattern.bits[index[site]] for site in targets}
    circuit = Circuit(len(targets))

    parent: dict[Coord, Coord] = {}
    for rnd in rounds:
        for ctrl, child in rnd:
            parent[child] = ctrl
    first = [gate_h(index[root])]
    first += [gate_x(index[site]) for site in targets
              if site != root and bit[site] != bit[parent[site]]]
    circuit.append_layer(first)

    for rnd in rounds:
        circuit.append_layer([gate_cnot(index[c], index[t]) for c, t in rnd])
    return circuit


def compile_circuit(circuit: Circuit) -> Circuit:
    """Rewrite an {H, X(pi), CNOT} circuit over {U3, CZ}.

    Each CNOT layer becomes H(targets) CZ H(targets); adjacent single-qubit
    layers are merged by matrix multiplication, so an L-layer CNOT cascade
    compiles to L CZ layers interleaved with L+1 single-qubit layers.
    """
    pending: dict[int, np.ndarray] = {}

    def push(q: int, m: np.ndarray) -> None:
        pending[q] = m @ pending.get(q, np.eye(2, dtype=complex))

    out = Circuit(circuit.n_qubits)

    def flush() -> None:
        if not pending:
            return
        layer = []
        for q in sorted(pending):
            a, b, t, _ = qs.u3_angles(pending[q])
            layer.append(Gate("U3", (q,), (a, b, t), pending[q]))
        out.append_layer(layer)
        pending.clear()

    for layer in circuit.layers:
        cz_gates = []
        post_h = []
        for g in layer:
            if g.name == "H":
                push(g.qubits[0], qs.HADAMARD)
            elif g.name == "X" and not g.params:
                push(g.qubits[0], qs.X_PI)
            elif g.name == "U3":
                push(g.qubits[0], g.matrix)
            elif g.name == "CNOT":
                ctrl, tgt = g.qubits
                push(tgt, qs.HADAMARD)
                cz_gates.append(gate_cz(ctrl, tgt))
                post_h.append(tgt)
            elif g.name == "CZ":
                cz_gates.append(g)
            else:
                raise ValueError(f"unsupported gate kind {g.name!r} in compile input")
        if cz_gates:
            flush()
            out.append_layer(cz_gates)
            for q in post_h:
                push(q, qs.HADAMARD)
    flush()
    return out


def ghz_state_fidelity(circuit: Circuit, pattern: SpinPattern,
                       sparse: bool | None = None) -> float:
    """|<GHZ(0, s)|C|0...0>|^2, via the sparse branch simulator at large N."""
    n = circuit.n_qubits
    if sparse is None:
        sparse = n > 20
    if sparse:
        st = run_sparse(circuit)
        a = st.amplitude(pattern.basis_index())
        b = st.amplitude(pattern.complement().basis_index())
        return abs((a + b) / np.sqrt(2)) ** 2
    state = run(circuit)
    return abs(qs.overlap(qs.init_ghz(pattern), state)) ** 2


# ---------------------------------------------------------------------------
# Floquet driving cycle
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FloquetSpec:
    """Parameters of one driving cycle of the kicked-Ising ring.

    ``x_flags[j] = 0`` marks a qubit whose ZZ gates are sandwiched by a pair of
    X(pi) gates; the effective bond signs are then
    ``j_signs[j] = (2 x[j] - 1)(2 x[j+1] - 1)``.  ``j_couplings`` (optional)
    overrides the bond strengths with arbitrary reals (disorder studies); the
    circuit then uses per-bond ZZ angles instead of X(pi) dressing.
    """

    n: int
    j: float = 1.0
    t: float = 1.0
    lambda1: float = 0.0
    lambda2: float = 0.0
    phi1: float = 0.0
    phi2: float = 0.0
    x_flags: tuple[int, ...] | None = None
    j_couplings: tuple[float, ...] | None = None

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("need at least 2 qubits")
        if self.x_flags is not None and len(self.x_flags) != self.n:
            raise ValueError("x_flags length must equal n")
        if self.j_couplings is not None and len(self.j_couplings) != self.n:
            raise ValueError("j_couplings needs one value per ring bond")

    @classmethod
    def experimental(cls, n: int, lambda1: float = 0.05, lambda2: float = 0.05,
                     **kw) -> "FloquetSpec":
        """The canonical driving point: strong detuning from single-spin echoes.

        With the package's uniform rotation convention this parameter set
        reproduces the reference scar IPRs of the hardware analysis chain
        (0.481725 at N=8); ``lambda1=-0.05`` selects the mirrored drive branch
        whose scar IPRs match the cross-mechanism comparison tables (0.4721 at
        N=8).  The two branches are related by reversing one drive direction
        and are otherwise equivalent.
        """
        kw.setdefault("j", 1.0)
        kw.setdefault("t", 1.0)
        return cls(n=n, lambda1=lambda1, lambda2=lambda2,
                   phi1=-np.pi / 2, phi2=np.pi / 2 - 0.6, **kw)

    @property
    def flags(self) -> tuple[int, ...]:
        return self.x_flags if self.x_flags is not None else (1,) * self.n

    @property
    def j_signs(self) -> tuple[int, ...]:
        x = self.flags
        return tuple((2 * x[j] - 1) * (2 * x[(j + 1) % self.n] - 1) for j in range(self.n))

    @property
    def bond_strengths(self) -> tuple[float, ...]:
        if self.j_couplings is not None:
            return self.j_couplings
        return tuple(self.j * s for s in self.j_signs)


def edit_pattern(spec: FloquetSpec, target: SpinPattern) -> FloquetSpec:
    """Re-point the protected doublet at ``target`` by setting x_flags = bits."""
    if len(target) != spec.n:
        raise ValueError("target pattern length must equal n")
    return replace(spec, x_flags=tuple(target.bits), j_couplings=None)


def single_qubit_cycle_matrices(spec: FloquetSpec) -> tuple[np.ndarray, np.ndarray]:
    """Exact per-qubit 2x2 matrices of the opening and closing layers.

    Opening layer: ry(-lambda2) rz(phi1) ry(lambda1) rz(phi2) rx(pi) -- the
    spin-flip pulse dressed by the longitudinal fields and the single-qubit
    drive, pre-rotated into the frame of the tilted Ising axis.  Closing
    layer: ry(lambda2).  All angles use the e^{-i theta sigma/2} convention.
    """
    w1 = (qs.ry(-spec.lambda2) @ qs.rz(spec.phi1) @ qs.ry(spec.lambda1)
          @ qs.rz(spec.phi2) @ qs.rx(np.pi))
    w2 = qs.ry(spec.lambda2)
    return w1, w2


def floquet_u3_angles(spec: FloquetSpec) -> tuple[float, float, float]:
    """U3 Euler angles of the opening single-qubit layer (global phase dropped)."""
    w1, _ = single_qubit_cycle_matrices(spec)
    a, b, t, _ = qs.u3_angles(w1)
    return a, b, t


def reduced_frame_u3_angles(lambda1: float, lambda2: float,
                            phi_prime: float) -> tuple[float, float, float]:
    """Closed-form Euler angles of ry(lambda2) rz(phi') rx(pi - lambda1).

    This is the single-qubit block of the gauge-fixed driving cycle (tilt,
    longitudinal field, spin flip combined with the drive).  With
    A = arg(1 - i e^{i phi'} cot(l2/2) cot(l1/2)) and
    B = arg(1 + i e^{i phi'} tan(l2/2) cot(l1/2)):

        alpha = 2 arccos sqrt[(1 - cos l2 cos l1 - sin l2 sin l1 sin phi')/2]
        beta  = pi/2 + A - B
        theta = phi' - 2B

    Generic-parameter form; singular at lambda1 = 0 or lambda2 = 0 where the
    cotangents diverge (use the matrix decomposition there).
    """
    alpha = 2 * np.arccos(np.sqrt(np.clip(
        (1 - np.cos(lambda2) * np.cos(lambda1)
         - np.sin(lambda2) * np.sin(lambda1) * np.sin(phi_prime)) / 2, 0.0, 1.0)))
    cot = lambda x: np.cos(x) / np.sin(x)
    a_arg = np.angle(1 - 1j * np.exp(1j * phi_prime)
                     * cot(lambda2 / 2) * cot(lambda1 / 2))
    b_arg = np.angle(1 + 1j * np.exp(1j * phi_prime)
                     * np.tan(lambda2 / 2) * cot(lambda1 / 2))
    beta = np.pi / 2 + a_arg - b_arg
    theta = phi_prime - 2 * b_arg
    return float(alpha), float(beta), float(theta)


def reduced_frame_u3prime_angles(lambda2: float, phi: float) -> tuple[float, float, float]:
    """Closed-form Euler angles of e^{i phi sz/2} e^{-i lambda2 sy/2}."""
    return float(lambda2), float(np.pi / 2 - phi), float(-phi)


def build_floquet_circuit(spec: FloquetSpec) -> Circuit:
    """One driving cycle; executing it equals the cycle unitary up to global phase.

    Layers: opening U3 layer, [X(pi) on x_flags=0 qubits], even-bond ZZ(-4JT),
    odd-bond ZZ(-4JT), [X(pi) again], closing U3 layer.  The two-sublattice ZZ
    scheduling on a ring needs even N.
    """
    n = spec.n
    if n % 2:
        raise ValueError("two-sublattice ZZ scheduling on a ring needs even N")
    w1, w2 = single_qubit_cycle_matrices(spec)
    a1, b1, t1, _ = qs.u3_angles(w1)
    a2, b2, t2, _ = qs.u3_angles(w2)

    circuit = Circuit(n)
    circuit.append_layer([Gate("U3", (q,), (a1, b1, t1), w1) for q in range(n)])

    sandwich = [q for q in range(n) if spec.flags[q] == 0] if spec.j_couplings is None else []
    if sandwich:
        circuit.append_layer([gate_x(q) for q in sandwich])

    strengths = ((spec.j,) * n if spec.j_couplings is None else spec.j_couplings)
    for parity in (0, 1):
        layer = []
        for b in range(parity, n, 2):
            phi = -4.0 * strengths[b] * spec.t
            layer.append(gate_zz(b, (b + 1) % n, phi))
        if layer:
            circuit.append_layer(layer)

    if sandwich:
        circuit.append_layer([gate_x(q) for q in sandwich])

    circuit.append_layer([Gate("U3", (q,), (a2, b2, t2), w2) for q in range(n)])
    return circuit


def run_cycles(spec: FloquetSpec, state: StateVector, cycles: int) -> StateVector:
    """Apply the driving cycle repeatedly (helper for dynamics studies)."""
    cycle = build_floquet_circuit(spec)
    for _ in range(cycles):
        run(cycle, state)
    return state


# ---------------------------------------------------------------------------
# Text serialization: one layer per line
# ---------------------------------------------------------------------------

def _fmt(x: float) -> str:
    if abs(x - np.pi) < 1e-15:
        return "pi"
    return f"{x:.12g}"


def gate_to_text(g: Gate) -> str:
    qubits = ",".join(str(q) for q in g.qubits)
    if g.name == "X" and not g.params:
        return f"X({qubits}; pi)"
    if not g.params:
        return f"{g.name}({qubits})"
    params = ",".join(_fmt(p) for p in g.params)
    return f"{g.name}({qubits}; {params})"


def circuit_to_text(circuit: Circuit) -> str:
    """Line-oriented format: one layer per line, gates space-separated.

    Tokens: ``U3(q; a,b,t)``, ``CZ(q1,q2)``, ``CPHASE(q1,q2; phi)``,
    ``ZZ(q1,q2; phi)``, ``X(q; pi)``; plus ``H(q)``, ``Z(q; theta)`` and
    ``CNOT(c,t)`` for uncompiled circuits.  Global phases of merged gates are
    not represented.
    """
    lines = [f"# qubits {circuit.n_qubits}"]
    for layer in circuit.layers:
        lines.append(" ".join(gate_to_text(g) for g in layer))
    return "\n".join(lines) + "\n"


def circuit_from_text(text: str) -> Circuit:
    import re

    lines = [ln.strip() for ln in text.strip().splitlines()]
    if not lines or not lines[0].startswith("# qubits"):
        raise ValueError("missing '# qubits N' header")
    circuit = Circuit(int(lines[0].split()[-1]))
    for ln in lines[1:]:
        if not ln or ln.startswith("#"):
            continue
        layer = []
        for name, rest in re.findall(r"([A-Z][A-Z0-9]*)\(([^)]*)\)", ln):
            if ";" in rest:
                qpart, ppart = rest.split(";")
                params = tuple(np.pi if p.strip() == "pi" else float(p)
                               for p in ppart.split(","))
            else:
                qpart, params = rest, ()
            qubits = tuple(int(q) for q in qpart.split(","))
            if name == "X" and params == (np.pi,):
                layer.append(Gate("X", qubits))
            else:
                layer.append(Gate(name, qubits, params))
        circuit.append_layer(layer)
    return circuit
