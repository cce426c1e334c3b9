"""Dense vectors and density matrices.

Dense arrays are only used as an independent oracle for the sparse engine and
for mixed-state comparisons, so everything here is capped at
``TOL.dense_max_width`` qubits.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from ..config import TOL
from ..errors import CapacityError, StructuralError
from .layout import RegisterLayout
from .sparse import SparseState

_H = np.array([[1.0, 1.0], [1.0, -1.0]]) / np.sqrt(2.0)


@dataclass(frozen=True)
class DensityMatrix:
    entries: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.entries, dtype=complex)
        object.__setattr__(self, "entries", m)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise StructuralError(f"density matrix must be square, got {m.shape}")
        dim = m.shape[0]
        if dim & (dim - 1) or dim == 0:
            raise StructuralError(f"dimension {dim} is not a power of two")
        if dim > 1 << TOL.dense_max_width:
            raise CapacityError(f"dimension {dim} exceeds 2^{TOL.dense_max_width}")

    @property
    def dimension(self) -> int:
        return self.entries.shape[0]

    @property
    def num_qubits(self) -> int:
        return self.dimension.bit_length() - 1

    def validate(self) -> None:
        m = self.entries
        if np.max(np.abs(m - m.conj().T)) > TOL.hermitian:
            raise StructuralError("density matrix not Hermitian")
        if abs(np.trace(m) - 1.0) > TOL.trace:
            raise StructuralError(f"trace {np.trace(m)} != 1")
        if np.min(np.linalg.eigvalsh((m + m.conj().T) / 2)) < -TOL.psd:
            raise StructuralError("density matrix not positive semidefinite")

    @classmethod
    def from_vector(cls, vec: np.ndarray) -> "DensityMatrix":
        v = np.asarray(vec, dtype=complex).reshape(-1)
        return cls(np.outer(v, v.conj()))

    @classmethod
    def mixture(cls, parts: Iterable[tuple[float, "DensityMatrix"]]) -> "DensityMatrix":
        total = None
        for p, rho in parts:
            total = p * rho.entries if total is None else total + p * rho.entries
        if total is None:
            raise StructuralError("empty mixture")
        return cls(total)

    def conjugate_by(self, unitary: np.ndarray) -> "DensityMatrix":
        return DensityMatrix(unitary @ self.entries @ unitary.conj().T)

    def reduced(self, keep: Sequence[int]) -> "DensityMatrix":
        """Partial trace keeping the listed qubit positions (0 = most significant)."""
        n = self.num_qubits
        keep = list(keep)
        drop = [q for q in range(n) if q not in keep]
        t = self.entries.reshape([2] * (2 * n))
        perm = keep + drop + [n + q for q in keep] + [n + q for q in drop]
        t = t.transpose(perm)
        dk, dd = 1 << len(keep), 1 << len(drop)
        t = t.reshape(dk, dd, dk, dd)
        return DensityMatrix(np.einsum("ajbj->ab", t))


def trace_distance(a: DensityMatrix, b: DensityMatrix) -> float:
    """Half the trace norm of ``a - b``."""
    if a.dimension != b.dimension:
        raise StructuralError(f"dimension mismatch {a.dimension} vs {b.dimension}")
    diff = a.entries - b.entries
    diff = (diff + diff.conj().T) / 2
    return float(0.5 * np.sum(np.abs(np.linalg.eigvalsh(diff))))


def to_density_matrix(state: SparseState, keep_registers: Sequence[str]) -> DensityMatrix:
    """Reduced density matrix on ``keep_registers`` (in the order given)."""
    lay = state.layout
    widths = [lay.width(n) for n in keep_registers]
    if len(set(keep_registers)) != len(keep_registers):
        raise StructuralError("register listed twice")
    kept = sum(widths)
    if kept > TOL.dense_max_width:
        raise CapacityError(f"kept width {kept} > {TOL.dense_max_width}")
    keep_mask = 0
    for n in keep_registers:
        keep_mask |= lay.mask(n)
    # group amplitudes by the traced-out part; each group is a vector on the kept part
    groups: dict[int, dict[int, complex]] = {}
    for b, a in state.items():
        idx = 0
        for n, w in zip(keep_registers, widths):
            idx = (idx << w) | lay.get(b, n)
        groups.setdefault(b & ~keep_mask, {})[idx] = a
    dim = 1 << kept
    rho = np.zeros((dim, dim), dtype=complex)
    for vec in groups.values():
        idx = np.fromiter(vec.keys(), dtype=np.int64)
        amps = np.fromiter(vec.values(), dtype=complex)
        rho[np.ix_(idx, idx)] += np.outer(amps, amps.conj())
    return DensityMatrix(rho)


# -- dense state-vector oracle --------------------------------------------


def to_vector(state: SparseState) -> np.ndarray:
    width = state.layout.total_width
    if width > TOL.dense_max_width:
        raise CapacityError(f"width {width} > {TOL.dense_max_width}")
    vec = np.zeros(1 << width, dtype=complex)
    for b, a in state.items():
        vec[b] = a
    return vec


def from_vector(layout: RegisterLayout, vec: np.ndarray) -> SparseState:
    return SparseState(layout, {i: complex(a) for i, a in enumerate(vec) if abs(a) > 0})


def dense_single_qubit(vec: np.ndarray, width: int, shift: int, gate: np.ndarray) -> np.ndarray:
    """Apply a 2x2 gate to the qubit at packed-int bit ``shift``."""
    t = vec.reshape([2] * width)
    axis = width - 1 - shift
    t = np.moveaxis(np.tensordot(gate, t, axes=([1], [axis])), 0, axis)
    return t.reshape(-1)


def dense_hadamard_register(vec: np.ndarray, layout: RegisterLayout, register: str) -> np.ndarray:
    width = layout.total_width
    for i in range(1, layout.width(register) + 1):
        vec = dense_single_qubit(vec, width, layout.bit_shift(register, i), _H)
    return vec


def dense_register_distribution(vec: np.ndarray, layout: RegisterLayout, register: str) -> dict[int, float]:
    probs: dict[int, float] = {}
    for idx, amp in enumerate(vec):
        p = abs(amp) ** 2
        if p > 0:
            v = layout.get(idx, register)
            probs[v] = probs.get(v, 0.0) + p
    return probs


def dense_project(vec: np.ndarray, layout: RegisterLayout, register: str, value: int) -> np.ndarray:
    out = np.array([a if layout.get(i, register) == value else 0.0 for i, a in enumerate(vec)],
                   dtype=complex)
    nrm = np.linalg.norm(out)
    return out / nrm


def pure_density(vec: np.ndarray) -> DensityMatrix:
    return DensityMatrix.from_vector(vec)
