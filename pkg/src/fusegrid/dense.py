# Dense statevector reference used to cross-check the stabilizer tableau.
# Capped at ~10 qubits; everything here is brute force on purpose.

from __future__ import annotations

import numpy as np

from .oracle import StabilizerState

_PAULI = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def graph_state_vector(edges: list[tuple[int, int]], n: int) -> np.ndarray:
    """|+>^n with CZ applied along each edge. Qubit 0 is the most significant bit."""
    vec = np.full(2**n, 2 ** (-n / 2), dtype=complex)
    for a, b in edges:
        idx = np.arange(2**n)
        mask = ((idx >> (n - 1 - a)) & 1) & ((idx >> (n - 1 - b)) & 1)
        vec = vec * np.where(mask, -1.0, 1.0)
    return vec


def apply_pauli_string(vec: np.ndarray, n: int, px: np.ndarray, pz: np.ndarray,
                       phase_exp: int = 0) -> np.ndarray:
    """Apply i^phase_exp * prod_j X_j^px Z_j^pz (Z applied first per qubit)."""
    out = vec.copy()
    idx = np.arange(2**n)
    for j in range(n):
        bit = (idx >> (n - 1 - j)) & 1
        if pz[j]:
            out = out * np.where(bit, -1.0, 1.0)
        if px[j]:
            out = out.reshape([2] * n)
            out = np.flip(out, axis=j).reshape(-1)
        if px[j] and pz[j]:
            out = out * 1j  # XZ = -iY; normalize convention to Y
    return out * (1j**phase_exp)


def measure_pauli_dense(vec: np.ndarray, n: int, px: np.ndarray, pz: np.ndarray,
                        outcome: int) -> np.ndarray:
    """Project onto the (-1)^outcome eigenspace and renormalize."""
    pv = apply_pauli_string(vec, n, px, pz)
    proj = (vec + (1 - 2 * outcome) * pv) / 2.0
    norm = np.linalg.norm(proj)
    if norm < 1e-12:
        raise ValueError("projection onto impossible outcome")
    return proj / norm


def stabilized_by(vec: np.ndarray, state: StabilizerState, atol: float = 1e-9) -> bool:
    """True iff every tableau generator fixes the dense vector (+1 eigenvalue)."""
    n = state.n
    if vec.shape[0] != 2**n:
        raise ValueError("dimension mismatch")
    for i in range(n):
        gv = apply_pauli_string(vec, n, state.x[i], state.z[i], int(state.r[i]))
        # Our tableau keeps Y as XZ times stored phase; recompute sign convention:
        # apply_pauli_string already folds the i per Y, so r holds the rest.
        if np.max(np.abs(gv - vec)) > atol:
            return False
    return True
