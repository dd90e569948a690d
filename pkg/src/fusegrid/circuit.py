# Circuit ingestion, benchmark generators, and lowering to the {J, CZ}
# target set. J(a) is the normalized H*RZ(a); every supported single-qubit
# gate expands to at most three J's.

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

TWO_PI = 2.0 * math.pi
ANGLE_TOL = 1e-12

SINGLE_QUBIT_KINDS = {"J", "H", "X", "Z", "S", "T", "RZ"}
TWO_QUBIT_KINDS = {"CZ", "CNOT"}
ANGLED_KINDS = {"J", "RZ"}


class CircuitError(Exception):
    pass


def canonical_angle(angle: float) -> float:
    """Reduce to [0, 2pi); values within tolerance of the boundary snap to 0."""
    if not math.isfinite(angle):
        raise CircuitError(f"non-finite angle {angle!r}")
    a = math.fmod(angle, TWO_PI)
    if a < 0:
        a += TWO_PI
    if a >= TWO_PI - ANGLE_TOL:
        a = 0.0
    return a


def is_clifford_angle(angle: float) -> bool:
    """Multiples of pi/2 within tolerance."""
    a = canonical_angle(angle)
    k = round(a / (math.pi / 2))
    return abs(a - k * (math.pi / 2)) <= ANGLE_TOL


@dataclass(frozen=True)
class Gate:
    kind: str
    targets: tuple[int, ...]
    angle: float | None = None

    def __post_init__(self):
        if self.kind in TWO_QUBIT_KINDS:
            if len(self.targets) != 2 or self.targets[0] == self.targets[1]:
                raise CircuitError(f"{self.kind} needs two distinct targets, got {self.targets}")
        elif self.kind in SINGLE_QUBIT_KINDS:
            if len(self.targets) != 1:
                raise CircuitError(f"{self.kind} needs one target, got {self.targets}")
        else:
            raise CircuitError(f"unknown gate kind {self.kind!r}")
        if self.kind in ANGLED_KINDS:
            if self.angle is None:
                raise CircuitError(f"{self.kind} requires an angle")
            object.__setattr__(self, "angle", canonical_angle(self.angle))
        elif self.angle is not None:
            raise CircuitError(f"{self.kind} does not take an angle")


@dataclass
class Circuit:
    num_qubits: int
    gates: list[Gate] = field(default_factory=list)
    name: str = "circuit"

    def __post_init__(self):
        if self.num_qubits < 1:
            raise CircuitError("num_qubits must be positive")
        for g in self.gates:
            self._check_targets(g)

    def _check_targets(self, gate: Gate) -> None:
        for t in gate.targets:
            if not 0 <= t < self.num_qubits:
                raise CircuitError(f"target {t} out of range for {self.num_qubits} qubits")

    def add(self, gate: Gate) -> None:
        self._check_targets(gate)
        self.gates.append(gate)

    @property
    def is_jcz(self) -> bool:
        return all(g.kind in ("J", "CZ") for g in self.gates)


# -- text format --------------------------------------------------------------

_MNEMONICS = {
    "j": "J", "cz": "CZ", "h": "H", "x": "X", "z": "Z",
    "s": "S", "t": "T", "rz": "RZ", "cnot": "CNOT",
}
_ARITY = {"J": 1, "CZ": 2, "H": 1, "X": 1, "Z": 1, "S": 1, "T": 1, "RZ": 1, "CNOT": 2}


def parse_circuit(text: str, name: str = "circuit") -> Circuit:
    """Parse the line-oriented format: `qubits N` header, one gate per line
    (`mnemonic targets... [angle]`), `#` comments."""
    circuit = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if circuit is None:
            if parts[0] != "qubits" or len(parts) != 2:
                raise CircuitError(f"line {lineno}: expected 'qubits N' header, got {line!r}")
            try:
                n = int(parts[1])
            except ValueError:
                raise CircuitError(f"line {lineno}: bad qubit count {parts[1]!r}") from None
            if n < 1:
                raise CircuitError(f"line {lineno}: qubit count must be positive")
            circuit = Circuit(num_qubits=n, name=name)
            continue
        mnemonic = parts[0].lower()
        if mnemonic not in _MNEMONICS:
            raise CircuitError(f"line {lineno}: unknown gate {parts[0]!r}")
        kind = _MNEMONICS[mnemonic]
        arity = _ARITY[kind]
        needs_angle = kind in ANGLED_KINDS
        expect = 1 + arity + (1 if needs_angle else 0)
        if len(parts) != expect:
            raise CircuitError(f"line {lineno}: {kind} expects {expect - 1} arguments")
        try:
            targets = tuple(int(p) for p in parts[1 : 1 + arity])
        except ValueError:
            raise CircuitError(f"line {lineno}: bad qubit index in {line!r}") from None
        angle = None
        if needs_angle:
            try:
                angle = float(parts[1 + arity])
            except ValueError:
                raise CircuitError(f"line {lineno}: bad angle in {line!r}") from None
        gate = Gate(kind, targets, angle)
        for t in targets:
            if not 0 <= t < circuit.num_qubits:
                raise CircuitError(f"line {lineno}: qubit index {t} out of range")
        circuit.add(gate)
    if circuit is None:
        raise CircuitError("empty circuit source (missing 'qubits N' header)")
    return circuit


def render_circuit(c: Circuit) -> str:
    """Canonical text form; parse(render(c)) round-trips."""
    lines = [f"qubits {c.num_qubits}"]
    for g in c.gates:
        parts = [g.kind.lower()] + [str(t) for t in g.targets]
        if g.angle is not None:
            parts.append(repr(float(g.angle)))
        lines.append(" ".join(parts))
    return "\n".join(lines) + "\n"


# -- lowering to {J, CZ} -------------------------------------------------------

def _expand(gate: Gate) -> list[Gate]:
    q = gate.targets[0] if gate.targets else None
    if gate.kind in ("J", "CZ"):
        return [gate]
    if gate.kind == "H":
        return [Gate("J", (q,), 0.0)]
    if gate.kind == "RZ":
        return [Gate("J", (q,), gate.angle), Gate("J", (q,), 0.0)]
    if gate.kind == "X":
        return [Gate("J", (q,), 0.0), Gate("J", (q,), math.pi)]
    if gate.kind == "Z":
        return [Gate("J", (q,), math.pi), Gate("J", (q,), 0.0)]
    if gate.kind == "S":
        return [Gate("J", (q,), math.pi / 2), Gate("J", (q,), 0.0)]
    if gate.kind == "T":
        return [Gate("J", (q,), math.pi / 4), Gate("J", (q,), 0.0)]
    if gate.kind == "CNOT":
        ctrl, tgt = gate.targets
        return [
            Gate("J", (tgt,), 0.0),
            Gate("CZ", (ctrl, tgt)),
            Gate("J", (tgt,), 0.0),
        ]
    raise CircuitError(f"cannot lower {gate.kind}")


def normalize_to_jcz(c: Circuit) -> Circuit:
    """Rewrite to J/CZ only; unitary-equivalent up to global phase."""
    out = Circuit(c.num_qubits, name=c.name)
    for gate in c.gates:
        for g in _expand(gate):
            out.add(g)
    return out


# -- dense matrices (verification oracle for small circuits) ------------------

def j_matrix(angle: float) -> np.ndarray:
    return np.array([[1.0, np.exp(1j * angle)], [1.0, -np.exp(1j * angle)]], dtype=complex) / math.sqrt(2)


_GATE_MATRICES = {
    "H": np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
    "S": np.array([[1, 0], [0, 1j]], dtype=complex),
    "T": np.array([[1, 0], [0, np.exp(1j * math.pi / 4)]], dtype=complex),
}


def circuit_unitary(c: Circuit) -> np.ndarray:
    """Dense unitary of the circuit (qubit 0 = most significant). Small n only."""
    n = c.num_qubits
    if n > 10:
        raise CircuitError("dense unitary capped at 10 qubits")
    dim = 2**n
    u = np.eye(dim, dtype=complex)
    idx = np.arange(dim)
    for gate in c.gates:
        if gate.kind == "CZ":
            a, b = gate.targets
            mask = ((idx >> (n - 1 - a)) & 1) & ((idx >> (n - 1 - b)) & 1)
            diag = np.where(mask, -1.0, 1.0).astype(complex)
            u = diag[:, None] * u
            continue
        if gate.kind == "CNOT":
            ctrl, tgt = gate.targets
            cbit = (idx >> (n - 1 - ctrl)) & 1
            flipped = np.where(cbit, idx ^ (1 << (n - 1 - tgt)), idx)
            u = u[flipped, :]
            continue
        q = gate.targets[0]
        if gate.kind == "J":
            m = j_matrix(gate.angle)
        elif gate.kind == "RZ":
            m = np.array([[np.exp(-1j * gate.angle / 2), 0], [0, np.exp(1j * gate.angle / 2)]], dtype=complex)
        else:
            m = _GATE_MATRICES[gate.kind]
        bit = (idx >> (n - 1 - q)) & 1
        partner = idx ^ (1 << (n - 1 - q))
        new = np.empty_like(u)
        # rows with bit 0 take m[0,0]*row0 + m[0,1]*row1, etc.
        new[bit == 0] = m[0, 0] * u[bit == 0] + m[0, 1] * u[partner[bit == 0]]
        new[bit == 1] = m[1, 1] * u[bit == 1] + m[1, 0] * u[partner[bit == 1]]
        u = new
    return u


def unitary_distance(u: np.ndarray, v: np.ndarray) -> float:
    """Frobenius distance minimized over global phase."""
    inner = np.trace(u.conj().T @ v)
    phase = inner / abs(inner) if abs(inner) > 1e-300 else 1.0
    return float(np.linalg.norm(u * phase - v))


# -- benchmark generators ------------------------------------------------------

def gen_benchmark(family: str, num_qubits: int, seed: int = 0) -> Circuit:
    """QFT / QAOA / BV generators at the granularity used for reporting."""
    family = family.upper()
    if num_qubits < 2:
        raise CircuitError("benchmarks need at least 2 qubits")
    if family == "QFT":
        return _gen_qft(num_qubits)
    if family == "QAOA":
        return _gen_qaoa(num_qubits, seed)
    if family == "BV":
        return _gen_bv(num_qubits, seed)
    raise CircuitError(f"unsupported benchmark family {family!r}")


def _cphase(circ: Circuit, theta: float, a: int, b: int) -> None:
    # CP(theta) = RZ_a(t/2) RZ_b(t/2) CNOT RZ_b(-t/2) CNOT (up to phase)
    circ.add(Gate("RZ", (a,), theta / 2))
    circ.add(Gate("RZ", (b,), theta / 2))
    circ.add(Gate("CNOT", (a, b)))
    circ.add(Gate("RZ", (b,), canonical_angle(-theta / 2)))
    circ.add(Gate("CNOT", (a, b)))


def _gen_qft(n: int) -> Circuit:
    circ = Circuit(n, name=f"qft-{n}")
    for i in range(n):
        circ.add(Gate("H", (i,)))
        for j in range(i + 1, n):
            _cphase(circ, math.pi / (2 ** (j - i)), j, i)
    for i in range(n // 2):
        a, b = i, n - 1 - i
        circ.add(Gate("CNOT", (a, b)))
        circ.add(Gate("CNOT", (b, a)))
        circ.add(Gate("CNOT", (a, b)))
    return circ


def _maxcut_graph(n: int, seed: int) -> list[tuple[int, int]]:
    """Random near-3-regular graph: 3-regular when n is even, else one
    vertex of degree 2."""
    rng = np.random.default_rng(seed)
    while True:
        stubs = []
        for v in range(n):
            stubs.extend([v] * 3)
        if len(stubs) % 2:
            stubs.pop()  # odd n: drop one stub, leaving a degree-2 vertex
        rng.shuffle(stubs)
        edges = set()
        ok = True
        for i in range(0, len(stubs), 2):
            a, b = stubs[i], stubs[i + 1]
            if a == b or (min(a, b), max(a, b)) in edges:
                ok = False
                break
            edges.add((min(a, b), max(a, b)))
        if ok:
            return sorted(edges)


def _gen_qaoa(n: int, seed: int) -> Circuit:
    circ = Circuit(n, name=f"qaoa-{n}")
    rng = np.random.default_rng(seed + 1)
    gamma = canonical_angle(float(rng.uniform(0.1, math.pi)))
    beta = canonical_angle(float(rng.uniform(0.1, math.pi)))
    for q in range(n):
        circ.add(Gate("H", (q,)))
    for a, b in _maxcut_graph(n, seed):
        # exp(-i gamma Z_a Z_b) = CNOT RZ(2 gamma) CNOT
        circ.add(Gate("CNOT", (a, b)))
        circ.add(Gate("RZ", (b,), canonical_angle(2 * gamma)))
        circ.add(Gate("CNOT", (a, b)))
    for q in range(n):
        # RX(2 beta) = H RZ(2 beta) H
        circ.add(Gate("H", (q,)))
        circ.add(Gate("RZ", (q,), canonical_angle(2 * beta)))
        circ.add(Gate("H", (q,)))
    return circ


def _gen_bv(n: int, seed: int) -> Circuit:
    """Bernstein-Vazirani on n data qubits plus one ancilla (qubit n)."""
    rng = np.random.default_rng(seed)
    secret = rng.integers(0, 2, size=n)
    circ = Circuit(n + 1, name=f"bv-{n}")
    circ.add(Gate("X", (n,)))
    for q in range(n + 1):
        circ.add(Gate("H", (q,)))
    for q in range(n):
        if secret[q]:
            circ.add(Gate("CNOT", (q, n)))
    for q in range(n):
        circ.add(Gate("H", (q,)))
    return circ
