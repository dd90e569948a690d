# Stabilizer-tableau simulator used as ground truth for graph-state
# synthesis and fusion semantics. Generators-only tableau (no
# destabilizers); deterministic measurement outcomes are recovered by a
# GF(2) solve against the generator matrix.

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

DESK_SCALE_CAP = 12


class OracleError(Exception):
    pass


def _g_phase(x1, z1, x2, z2):
    """Exponent of i picked up per qubit when multiplying Pauli (x1,z1)*(x2,z2).

    Standard CHP bookkeeping: I contributes 0, Y*P cycles through z2-x2, etc.
    Inputs are uint8 arrays; returns int array.
    """
    x1 = x1.astype(np.int64)
    z1 = z1.astype(np.int64)
    x2 = x2.astype(np.int64)
    z2 = z2.astype(np.int64)
    out = np.zeros_like(x1)
    # (x1,z1) == (1,1) -> Y: contributes z2 - x2
    y_mask = (x1 == 1) & (z1 == 1)
    out[y_mask] = (z2 - x2)[y_mask]
    # (1,0) -> X: contributes z2*(2*x2 - 1)
    x_mask = (x1 == 1) & (z1 == 0)
    out[x_mask] = (z2 * (2 * x2 - 1))[x_mask]
    # (0,1) -> Z: contributes x2*(1 - 2*z2)
    z_mask = (x1 == 0) & (z1 == 1)
    out[z_mask] = (x2 * (1 - 2 * z2))[z_mask]
    return out


@dataclass
class PauliFrame:
    """Pending single-qubit X/Z corrections; composition is bitwise XOR."""

    x: dict[int, int] = field(default_factory=dict)
    z: dict[int, int] = field(default_factory=dict)

    def flip_x(self, qubit: int) -> None:
        self.x[qubit] = self.x.get(qubit, 0) ^ 1

    def flip_z(self, qubit: int) -> None:
        self.z[qubit] = self.z.get(qubit, 0) ^ 1

    def compose(self, other: "PauliFrame") -> "PauliFrame":
        out = PauliFrame(dict(self.x), dict(self.z))
        for q, b in other.x.items():
            if b:
                out.flip_x(q)
        for q, b in other.z.items():
            if b:
                out.flip_z(q)
        out.x = {q: b for q, b in out.x.items() if b}
        out.z = {q: b for q, b in out.z.items() if b}
        return out

    def is_identity(self) -> bool:
        return not any(self.x.values()) and not any(self.z.values())


class StabilizerState:
    """n-qubit stabilizer state given by n signed Pauli generators.

    x[i, j], z[i, j] are the X/Z bits of generator i on qubit j; r[i] is the
    exponent of i in the sign (kept in {0, 2}: +1 or -1).
    """

    def __init__(self, n: int):
        if n < 0:
            raise OracleError("negative qubit count")
        self.n = n
        self.x = np.zeros((n, n), dtype=np.uint8)
        self.z = np.zeros((n, n), dtype=np.uint8)
        self.r = np.zeros(n, dtype=np.uint8)

    def copy(self) -> "StabilizerState":
        out = StabilizerState(self.n)
        out.x = self.x.copy()
        out.z = self.z.copy()
        out.r = self.r.copy()
        return out

    # -- row operations ---------------------------------------------------

    def _rowmult(self, h: int, i: int) -> None:
        """Generator h <- generator i * generator h (phase-tracked)."""
        phase = int(np.sum(_g_phase(self.x[i], self.z[i], self.x[h], self.z[h])))
        self.r[h] = (int(self.r[h]) + int(self.r[i]) + phase) % 4
        self.x[h] ^= self.x[i]
        self.z[h] ^= self.z[i]

    def generator_strings(self) -> list[str]:
        chars = {(0, 0): "I", (1, 0): "X", (0, 1): "Z", (1, 1): "Y"}
        out = []
        for i in range(self.n):
            sign = {0: "+", 2: "-"}[int(self.r[i])]
            out.append(sign + "".join(chars[(int(self.x[i, j]), int(self.z[i, j]))] for j in range(self.n)))
        return out

    def __repr__(self) -> str:  # pragma: no cover
        return "\n".join(self.generator_strings())

    # -- measurement -------------------------------------------------------

    def measure_operator(self, px: np.ndarray, pz: np.ndarray, forced: int | None = None,
                         rng: np.random.Generator | None = None) -> int:
        """Measure the Pauli operator with X/Z bit vectors px, pz (sign +1).

        Returns the outcome bit (0 for +1 eigenvalue). Forced bits select the
        branch on random outcomes; forcing an impossible deterministic
        outcome raises.
        """
        px = np.asarray(px, dtype=np.uint8)
        pz = np.asarray(pz, dtype=np.uint8)
        anti = ((self.x @ pz.astype(np.int64)) + (self.z @ px.astype(np.int64))) % 2
        rows = np.nonzero(anti)[0]
        if rows.size:
            p = int(rows[0])
            for h in rows[1:]:
                self._rowmult(int(h), p)
            if forced is None:
                outcome = int(rng.integers(0, 2)) if rng is not None else 0
            else:
                outcome = int(forced) & 1
            self.x[p] = px
            self.z[p] = pz
            self.r[p] = 2 * outcome
            return outcome
        # Deterministic: express the operator over the generators.
        sel = _gf2_solve(np.concatenate([self.x, self.z], axis=1).astype(np.uint8),
                         np.concatenate([px, pz]).astype(np.uint8))
        if sel is None:
            raise OracleError("operator neither commutes into nor out of the group")
        acc_x = np.zeros(self.n, dtype=np.uint8)
        acc_z = np.zeros(self.n, dtype=np.uint8)
        acc_r = 0
        for i in np.nonzero(sel)[0]:
            acc_r = (acc_r + int(self.r[i]) + int(np.sum(_g_phase(acc_x, acc_z, self.x[i], self.z[i])))) % 4
            acc_x ^= self.x[i]
            acc_z ^= self.z[i]
        outcome = 0 if acc_r == 0 else 1
        if forced is not None and forced != outcome:
            raise OracleError(f"forced outcome {forced} impossible (deterministic {outcome})")
        return outcome

    def measure_pauli(self, qubit: int, basis: str, forced: int | None = None,
                      rng: np.random.Generator | None = None) -> int:
        """Single-qubit X/Y/Z measurement; projects the state in place."""
        if not 0 <= qubit < self.n:
            raise OracleError(f"qubit {qubit} out of range")
        px = np.zeros(self.n, dtype=np.uint8)
        pz = np.zeros(self.n, dtype=np.uint8)
        if basis == "X":
            px[qubit] = 1
        elif basis == "Z":
            pz[qubit] = 1
        elif basis == "Y":
            px[qubit] = 1
            pz[qubit] = 1
        else:
            raise OracleError(f"unknown basis {basis!r}")
        return self.measure_operator(px, pz, forced=forced, rng=rng)

    def apply_pauli(self, qubit: int, pauli: str) -> None:
        """Apply a Pauli gate: flips generator signs that anticommute with it."""
        fx = 1 if pauli in ("X", "Y") else 0
        fz = 1 if pauli in ("Z", "Y") else 0
        anti = (self.x[:, qubit] * fz + self.z[:, qubit] * fx) % 2
        self.r = (self.r + 2 * anti) % 4

    # -- register surgery ---------------------------------------------------

    def discard_qubits(self, qubits: list[int]) -> "StabilizerState":
        """Drop qubits that are unentangled with the rest of the register.

        Row-reduces so the dropped qubits' support is confined to |qubits|
        pivot rows, then keeps the remaining rows. Raises if the qubits are
        still entangled with the survivors.
        """
        qubits = sorted(set(qubits))
        used = np.zeros(self.n, dtype=bool)
        for q in qubits:
            for col in (self.x[:, q], self.z[:, q]):
                rows = [i for i in np.nonzero(col)[0] if not used[i]]
                if not rows:
                    continue
                p = rows[0]
                for h in np.nonzero(col)[0]:
                    if h != p:
                        self._rowmult(int(h), p)
                used[p] = True
        keep_rows = [i for i in range(self.n) if not used[i]]
        keep_cols = [j for j in range(self.n) if j not in qubits]
        if len(keep_rows) != len(keep_cols):
            raise OracleError("discarded qubits are still entangled")
        if any(self.x[i, q] or self.z[i, q] for i in keep_rows for q in qubits):
            raise OracleError("discarded qubits are still entangled")
        out = StabilizerState(len(keep_cols))
        out.x = self.x[np.ix_(keep_rows, keep_cols)].copy()
        out.z = self.z[np.ix_(keep_rows, keep_cols)].copy()
        out.r = self.r[keep_rows].copy()
        return out

    def rank(self) -> int:
        return _gf2_rank(np.concatenate([self.x, self.z], axis=1))


def tensor(a: StabilizerState, b: StabilizerState) -> StabilizerState:
    """Combine two disjoint registers (a's qubits first)."""
    out = StabilizerState(a.n + b.n)
    out.x[: a.n, : a.n] = a.x
    out.z[: a.n, : a.n] = a.z
    out.r[: a.n] = a.r
    out.x[a.n :, a.n :] = b.x
    out.z[a.n :, a.n :] = b.z
    out.r[a.n :] = b.r
    return out


def graph_to_stabilizer(edges: list[tuple[int, int]], n: int) -> StabilizerState:
    """Canonical graph-state generators K_a = X_a prod_{b~a} Z_b."""
    if n > DESK_SCALE_CAP:
        raise OracleError(f"graph_to_stabilizer capped at {DESK_SCALE_CAP} qubits, got {n}")
    s = StabilizerState(n)
    for a in range(n):
        s.x[a, a] = 1
    for a, b in edges:
        if a == b or not (0 <= a < n and 0 <= b < n):
            raise OracleError(f"bad edge ({a}, {b})")
        s.z[a, b] ^= 1
        s.z[b, a] ^= 1
    return s


def ghz3() -> StabilizerState:
    """3-qubit GHZ resource state as a star graph: root 0, leaves 1, 2."""
    s = StabilizerState(3)
    s.x[0, 0] = 1
    s.x[1, 1] = 1
    s.x[2, 2] = 1
    s.z[0, 1] = s.z[0, 2] = 1
    s.z[1, 0] = 1
    s.z[2, 0] = 1
    return s


def fuse(state: StabilizerState, c: int, d: int, forced: tuple[int, int] | None = None,
         rng: np.random.Generator | None = None) -> tuple[StabilizerState, tuple[int, int]]:
    """XZ,ZX fusion: measure X_c Z_d and Z_c X_d, then discard qubits c and d.

    Returns the surviving (n-2)-qubit state and the two outcome bits
    (m_xz, m_zx). Survivor indices shift down past the removed pair.
    """
    if c == d:
        raise OracleError("fusion qubits must differ")
    if not (0 <= c < state.n and 0 <= d < state.n):
        raise OracleError("fusion qubit out of range")
    px = np.zeros(state.n, dtype=np.uint8)
    pz = np.zeros(state.n, dtype=np.uint8)
    px[c] = 1
    pz[d] = 1
    m_xz = state.measure_operator(px, pz, forced=None if forced is None else forced[0], rng=rng)
    px2 = np.zeros(state.n, dtype=np.uint8)
    pz2 = np.zeros(state.n, dtype=np.uint8)
    pz2[c] = 1
    px2[d] = 1
    m_zx = state.measure_operator(px2, pz2, forced=None if forced is None else forced[1], rng=rng)
    survivor = state.discard_qubits([c, d])
    return survivor, (m_xz, m_zx)


def fusion_correction(neighbors_c: list[int], neighbors_d: list[int],
                      outcomes: tuple[int, int]) -> PauliFrame:
    """Local Z frame relating the post-fusion state to the canonical join.

    For graph states, outcome of Z_c X_d flags Z on N(c) and outcome of
    X_c Z_d flags Z on N(d); indices refer to the surviving register.
    """
    m_xz, m_zx = outcomes
    frame = PauliFrame()
    if m_zx:
        for q in neighbors_c:
            frame.flip_z(q)
    if m_xz:
        for q in neighbors_d:
            frame.flip_z(q)
    return frame


def equivalent_up_to_local_paulis(a: StabilizerState, b: StabilizerState) -> bool:
    """True iff the stabilizer groups match up to signs fixable by one
    single-qubit X/Z frame."""
    frame = local_pauli_frame(a, b)
    return frame is not None


def local_pauli_frame(a: StabilizerState, b: StabilizerState) -> PauliFrame | None:
    """Frame F with F a F = b (as stabilizer groups), or None."""
    if a.n != b.n:
        raise OracleError("qubit count mismatch")
    n = a.n
    mat_a = np.concatenate([a.x, a.z], axis=1).astype(np.uint8)
    mat_b = np.concatenate([b.x, b.z], axis=1).astype(np.uint8)
    if _gf2_rank(mat_a) != n or _gf2_rank(mat_b) != n:
        raise OracleError("degenerate tableau")
    if _gf2_rank(np.concatenate([mat_a, mat_b], axis=0)) != n:
        return None
    # For each generator of b, find the matching product in a and compare signs.
    deltas = np.zeros(n, dtype=np.uint8)
    for i in range(n):
        sel = _gf2_solve(mat_a, mat_b[i])
        if sel is None:
            return None
        acc_x = np.zeros(n, dtype=np.uint8)
        acc_z = np.zeros(n, dtype=np.uint8)
        acc_r = 0
        for j in np.nonzero(sel)[0]:
            acc_r = (acc_r + int(a.r[j]) + int(np.sum(_g_phase(acc_x, acc_z, a.x[j], a.z[j])))) % 4
            acc_x ^= a.x[j]
            acc_z ^= a.z[j]
        diff = (int(b.r[i]) - acc_r) % 4
        if diff == 2:
            deltas[i] = 1
        elif diff != 0:
            return None
    # Solve for frame bits: generator i flips sign iff it anticommutes with
    # the frame: sum_j fx_j*z_ij + fz_j*x_ij = delta_i over GF(2).
    coeff = np.concatenate([b.z, b.x], axis=1).astype(np.uint8)
    sol = _gf2_solve_system(coeff, deltas)
    if sol is None:
        return None
    frame = PauliFrame()
    for q in range(n):
        if sol[q]:
            frame.flip_x(q)
        if sol[n + q]:
            frame.flip_z(q)
    return frame


# -- GF(2) linear algebra ---------------------------------------------------


def _gf2_rank(mat: np.ndarray) -> int:
    m = mat.copy().astype(np.uint8) % 2
    rank = 0
    rows, cols = m.shape
    for col in range(cols):
        pivot = None
        for r in range(rank, rows):
            if m[r, col]:
                pivot = r
                break
        if pivot is None:
            continue
        m[[rank, pivot]] = m[[pivot, rank]]
        for r in range(rows):
            if r != rank and m[r, col]:
                m[r] ^= m[rank]
        rank += 1
        if rank == rows:
            break
    return rank


def _gf2_solve(basis_rows: np.ndarray, target: np.ndarray) -> np.ndarray | None:
    """Selector s with s @ basis_rows == target over GF(2), or None."""
    rows, cols = basis_rows.shape
    aug = np.concatenate([basis_rows.T % 2, (target % 2).reshape(-1, 1)], axis=1).astype(np.uint8)
    # Solve basis_rows.T @ s = target by elimination on the augmented matrix.
    pivots = []
    rank = 0
    for col in range(rows):
        pivot = None
        for r in range(rank, cols):
            if aug[r, col]:
                pivot = r
                break
        if pivot is None:
            continue
        aug[[rank, pivot]] = aug[[pivot, rank]]
        for r in range(cols):
            if r != rank and aug[r, col]:
                aug[r] ^= aug[rank]
        pivots.append(col)
        rank += 1
    for r in range(rank, cols):
        if aug[r, -1]:
            return None
    sol = np.zeros(rows, dtype=np.uint8)
    for i, col in enumerate(pivots):
        sol[col] = aug[i, -1]
    return sol


def _gf2_solve_system(coeff: np.ndarray, rhs: np.ndarray) -> np.ndarray | None:
    """Any solution of coeff @ x = rhs over GF(2), or None."""
    rows, cols = coeff.shape
    aug = np.concatenate([coeff % 2, (rhs % 2).reshape(-1, 1)], axis=1).astype(np.uint8)
    pivots = []
    rank = 0
    for col in range(cols):
        pivot = None
        for r in range(rank, rows):
            if aug[r, col]:
                pivot = r
                break
        if pivot is None:
            continue
        aug[[rank, pivot]] = aug[[pivot, rank]]
        for r in range(rows):
            if r != rank and aug[r, col]:
                aug[r] ^= aug[rank]
        pivots.append(col)
        rank += 1
    for r in range(rank, rows):
        if aug[r, -1]:
            return None
    sol = np.zeros(cols, dtype=np.uint8)
    for i, col in enumerate(pivots):
        sol[col] = aug[i, -1]
    return sol
