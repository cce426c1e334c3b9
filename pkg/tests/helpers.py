"""Independent dense oracle: full 2^n state vectors built with Kronecker products
and bit strings, sharing no code with the sparse engine."""

from __future__ import annotations

import numpy as np

from qotlab.qsim import (
    RegisterLayout,
    SparseState,
    add_register,
    apply_classical_oracle,
    apply_h,
    apply_x,
    apply_z,
    computational_distribution,
    hadamard_distribution,
    measure_computational,
    measure_hadamard_register,
)

I2 = np.eye(2)
H = np.array([[1, 1], [1, -1]]) / np.sqrt(2)
X = np.array([[0, 1], [1, 0]])
Z = np.diag([1, -1])


def position(regs, name, bit):
    """0-based qubit position from the left (most significant) of the packed string."""
    off = 0
    for n, w in regs:
        if n == name:
            return off + bit - 1
        off += w
    raise KeyError(name)


def full_op(width, pos, gate):
    op = np.array([[1.0]])
    for q in range(width):
        op = np.kron(op, gate if q == pos else I2)
    return op


def reg_value(regs, idx, name):
    width = sum(w for _, w in regs)
    s = format(idx, f"0{width}b")
    off = 0
    for n, w in regs:
        if n == name:
            return int(s[off:off + w], 2)
        off += w
    raise KeyError(name)


def with_value(regs, idx, name, value):
    width = sum(w for _, w in regs)
    s = list(format(idx, f"0{width}b"))
    off = 0
    for n, w in regs:
        if n == name:
            s[off:off + w] = format(value, f"0{w}b")
        off += w
    return int("".join(s), 2)


def dense_vec(state: SparseState) -> np.ndarray:
    vec = np.zeros(1 << state.layout.total_width, dtype=complex)
    for b, a in state.items():
        vec[b] = a
    return vec


def dense_distribution(vec, regs, name):
    out = {}
    for i, a in enumerate(vec):
        p = abs(a) ** 2
        if p > 1e-15:
            v = reg_value(regs, i, name)
            out[v] = out.get(v, 0.0) + p
    return out


def dense_project(vec, regs, name, value):
    out = np.array([a if reg_value(regs, i, name) == value else 0 for i, a in enumerate(vec)], dtype=complex)
    return out / np.linalg.norm(out)


def dense_h_register(vec, regs, name):
    width = sum(w for _, w in regs)
    wreg = dict(regs)[name]
    for bit in range(1, wreg + 1):
        vec = full_op(width, position(regs, name, bit), H) @ vec
    return vec


def phase_aligned_gap(a: np.ndarray, b: np.ndarray) -> float:
    """max |a - e^{i t} b| with t fixed by the largest entry of a."""
    k = int(np.argmax(np.abs(a)))
    if abs(b[k]) < 1e-15:
        return float(np.max(np.abs(a - b)))
    ph = a[k] / b[k]
    ph /= abs(ph)
    return float(np.max(np.abs(a - ph * b)))


def random_state(rng, regs, support=None) -> SparseState:
    width = sum(w for _, w in regs)
    dim = 1 << width
    k = dim if support is None else min(support, dim)
    idx = rng.choice(dim, size=k, replace=False)
    amps = rng.normal(size=k) + 1j * rng.normal(size=k)
    amps /= np.linalg.norm(amps)
    return SparseState(RegisterLayout(tuple(regs)), {int(i): complex(a) for i, a in zip(idx, amps)})


def random_layout(rng, max_width=6):
    regs = []
    total = 0
    n_regs = int(rng.integers(1, 4))
    for j in range(n_regs):
        room = max_width - total - (n_regs - j - 1)
        if room < 1:
            break
        w = int(rng.integers(1, min(3, room) + 1))
        regs.append((f"R{j}", w))
        total += w
    return regs


def run_random_program(rng, steps=6, max_width=6):
    """Run one random program on both engines.

    Returns ``(max amplitude gap, max distribution gap)`` over all steps.
    """
    regs = random_layout(rng, max_width - 1)
    state = random_state(rng, regs, support=int(rng.integers(1, 5)))
    vec = dense_vec(state)
    amp_gap = dist_gap = 0.0
    for _ in range(steps):
        width = sum(w for _, w in regs)
        op = rng.choice(["x", "z", "h", "oracle", "measure", "hmeasure"])
        name, w = regs[int(rng.integers(len(regs)))]
        bit = int(rng.integers(1, w + 1))
        if op in ("x", "z", "h"):
            gate = {"x": X, "z": Z, "h": H}[op]
            state = apply_h(state, name, bit) if op == "h" else \
                {"x": apply_x, "z": apply_z}[op](state, name, bit, 1)
            vec = full_op(width, position(regs, name, bit), gate) @ vec
        elif op == "oracle":
            if width >= max_width:
                continue
            out = f"O{len(regs)}"
            table = rng.integers(0, 2, size=1 << w)
            state = add_register(state, out, 1)
            state = apply_classical_oracle(state, [name], out, lambda v: int(table[v]))
            new_regs = regs + [(out, 1)]
            new_vec = np.zeros(1 << (width + 1), dtype=complex)
            for i, a in enumerate(vec):
                j = i << 1  # appended qubit starts at 0
                j = with_value(new_regs, j, out, int(table[reg_value(regs, i, name)]))
                new_vec[j] += a
            regs, vec = new_regs, new_vec
        elif op == "measure":
            sd = computational_distribution(state, name)
            dd = dense_distribution(vec, regs, name)
            dist_gap = max(dist_gap, _dist_gap(sd, dd))
            rec, state = measure_computational(state, name, rng)
            vec = dense_project(vec, regs, name, rec.outcome)
        else:
            sd = {s: p for s, p in hadamard_distribution(state, name).items() if p > 1e-15}
            hv = dense_h_register(vec, regs, name)
            dd = dense_distribution(hv, regs, name)
            dist_gap = max(dist_gap, _dist_gap(sd, dd))
            rec, state = measure_hadamard_register(state, name, rng)
            dist_gap = max(dist_gap, abs(rec.probability - dd.get(rec.outcome, 0.0)))
            # the register is left holding |s>, as after H and a computational read
            vec = dense_project(hv, regs, name, rec.outcome)
        amp_gap = max(amp_gap, phase_aligned_gap(dense_vec(state), vec))
    return amp_gap, dist_gap


def _dist_gap(a: dict, b: dict) -> float:
    keys = set(a) | set(b)
    return max((abs(a.get(k, 0.0) - b.get(k, 0.0)) for k in keys), default=0.0)
