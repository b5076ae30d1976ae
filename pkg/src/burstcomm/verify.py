"""Small-scale semantic oracle.

Dense unitaries and batched state vectors (qubit 0 is the most significant
axis), deferred-measurement conversion of protocol circuits, and a
fixed-branch simulator that runs measurements, classical corrections and
resets exactly as the hardware would for one chosen outcome string.
"""
from __future__ import annotations

import cmath
import math
from typing import Callable, Iterable, Sequence

import numpy as np

from .ir import Circuit, CircuitError, Gate
from .protocol import ProtocolCircuit

MAX_DENSE_QUBITS = 12
MAX_SIM_QUBITS = 16


class VerificationError(ValueError):
    pass


_S2 = 1 / math.sqrt(2)
_FIXED = {
    "h": np.array([[_S2, _S2], [_S2, -_S2]], dtype=complex),
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "z": np.diag([1, -1]).astype(complex),
    "s": np.diag([1, 1j]),
    "sdg": np.diag([1, -1j]),
    "t": np.diag([1, cmath.exp(1j * math.pi / 4)]),
    "tdg": np.diag([1, cmath.exp(-1j * math.pi / 4)]),
    "cx": np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex),
    "cz": np.diag([1, 1, 1, -1]).astype(complex),
    "swap": np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex),
}


def _u3(theta, phi, lam):
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    return np.array([[c, -cmath.exp(1j * lam) * s],
                     [cmath.exp(1j * phi) * s, cmath.exp(1j * (phi + lam)) * c]])


def _rz(t):
    return np.diag([cmath.exp(-0.5j * t), cmath.exp(0.5j * t)])


def gate_matrix(g: Gate) -> np.ndarray:
    n, p = g.name, g.params
    if n in _FIXED:
        return _FIXED[n]
    if n == "rx":
        c, s = math.cos(p[0] / 2), math.sin(p[0] / 2)
        return np.array([[c, -1j * s], [-1j * s, c]])
    if n == "ry":
        c, s = math.cos(p[0] / 2), math.sin(p[0] / 2)
        return np.array([[c, -s], [s, c]], dtype=complex)
    if n == "rz":
        return _rz(p[0])
    if n == "u1":
        return np.diag([1, cmath.exp(1j * p[0])])
    if n == "u2":
        return _u3(math.pi / 2, p[0], p[1])
    if n == "u3":
        return _u3(*p)
    if n == "crz":
        m = np.eye(4, dtype=complex)
        m[2:, 2:] = _rz(p[0])
        return m
    raise VerificationError(f"no matrix for {n}")


def _apply_general(state: np.ndarray, m: np.ndarray, qubits: Sequence[int]) -> np.ndarray:
    k = len(qubits)
    st = np.moveaxis(state, list(qubits), list(range(k)))
    shape = st.shape
    st = (m @ st.reshape(2 ** k, -1)).reshape(shape)
    return np.moveaxis(st, list(range(k)), list(qubits))


def apply_matrix(state: np.ndarray, m: np.ndarray, qubits: Sequence[int], inplace: bool = False) -> np.ndarray:
    """Apply ``m`` to ``qubits`` of a batched state of shape (2,)*n + (batch,)."""
    shape = state.shape
    if len(qubits) == 1:
        q = qubits[0]
        st = state.reshape(2 ** q, 2, -1)
        if not inplace:
            st = st.copy()
        a, b = st[:, 0], st[:, 1]
        if m[0, 1] == 0 and m[1, 0] == 0:
            if m[0, 0] != 1:
                a *= m[0, 0]
            if m[1, 1] != 1:
                b *= m[1, 1]
        elif m[0, 0] == 0 and m[1, 1] == 0:
            tmp = a.copy()
            np.multiply(b, m[0, 1], out=a)
            np.multiply(tmp, m[1, 0], out=b)
        else:
            tmp = m[0, 0] * a + m[0, 1] * b
            b *= m[1, 1]
            b += m[1, 0] * a
            a[...] = tmp
        return st.reshape(shape)
    if len(qubits) == 2 and (m is _FIXED["cx"] or m is _FIXED["cz"]):
        c, t = qubits
        lo, hi = min(c, t), max(c, t)
        st = state.reshape(2 ** lo, 2, 2 ** (hi - lo - 1), 2, -1)
        if not inplace:
            st = st.copy()
        if m is _FIXED["cz"]:
            st[:, 1, :, 1] *= -1
        elif c < t:
            tmp = st[:, 1, :, 0].copy()
            st[:, 1, :, 0] = st[:, 1, :, 1]
            st[:, 1, :, 1] = tmp
        else:
            tmp = st[:, 0, :, 1].copy()
            st[:, 0, :, 1] = st[:, 1, :, 1]
            st[:, 1, :, 1] = tmp
        return st.reshape(shape)
    return _apply_general(state, m, qubits)


def basis_batch(n: int, data: Sequence[int]) -> np.ndarray:
    """All computational basis inputs on ``data`` wires, other wires |0>."""
    d = len(data)
    state = np.zeros((2,) * n + (2 ** d,), dtype=complex)
    for col in range(2 ** d):
        idx = [0] * n
        for j, q in enumerate(data):
            idx[q] = (col >> (d - 1 - j)) & 1
        state[tuple(idx) + (col,)] = 1
    return state


def _apply_circuit(state: np.ndarray, c: Circuit) -> np.ndarray:
    for g in c.gates:
        if g.name == "barrier":
            continue
        if g.name == "measure":
            raise VerificationError("measurement present; defer it first")
        state = apply_matrix(state, gate_matrix(g), g.qubits)
    return state


def unitary_of(c: Circuit) -> np.ndarray:
    if c.num_qubits > MAX_DENSE_QUBITS:
        raise VerificationError(f"{c.num_qubits} qubits exceeds the dense cap of {MAX_DENSE_QUBITS}")
    n = c.num_qubits
    state = basis_batch(n, list(range(n)))
    state = _apply_circuit(state, c)
    return state.reshape(2 ** n, 2 ** n)


def restricted_action(c: Circuit, data: Sequence[int]) -> np.ndarray:
    """Tensor of shape (2**ancillas, 2**d, 2**d): ancilla-out x data-out x data-in."""
    n = c.num_qubits
    if n > MAX_SIM_QUBITS:
        raise VerificationError(f"{n} qubits exceeds the simulation cap of {MAX_SIM_QUBITS}")
    anc = [q for q in range(n) if q not in data]
    state = _apply_circuit(basis_batch(n, data), c)
    state = np.moveaxis(state, list(anc) + list(data), list(range(n)))
    return state.reshape(2 ** len(anc), 2 ** len(data), 2 ** len(data))


def _data_operator(m: np.ndarray, tol: float) -> np.ndarray | None:
    """Factor ancilla-out x operator; return the data operator scaled to unitary norm."""
    flat = m.reshape(m.shape[0], -1)
    norms = np.linalg.norm(flat, axis=1)
    r = int(np.argmax(norms))
    if norms[r] < tol:
        return None
    u = flat[r] / norms[r]
    phi = flat @ u.conj()
    if np.max(np.abs(flat - np.outer(phi, u))) > tol:
        return None  # ancillas stay entangled with the data
    d = m.shape[1]
    return (u * math.sqrt(d)).reshape(d, d)


def same_up_to_phase(a: np.ndarray, b: np.ndarray, tol: float = 1e-9) -> bool:
    if a.shape != b.shape:
        return False
    k = np.unravel_index(np.argmax(np.abs(a)), a.shape)
    if abs(b[k]) < 1e-12:
        return False
    phase = a[k] / b[k]
    phase /= abs(phase)
    return float(np.max(np.abs(a - phase * b))) < tol


def equivalent(a: Circuit, b: Circuit, data_qubits: Sequence[int] | None = None, tol: float = 1e-9) -> bool:
    """Do ``a`` and ``b`` act identically on the data wires up to a global phase?

    Non-data wires start in |0>. They may end in any state, provided it does
    not depend on the data input (which is what deferred measurement leaves
    behind on measured communication qubits).
    """
    if data_qubits is None:
        if a.num_qubits != b.num_qubits:
            raise VerificationError("dimension mismatch; pass data_qubits")
        data_qubits = list(range(a.num_qubits))
    if max(data_qubits, default=-1) >= min(a.num_qubits, b.num_qubits):
        raise VerificationError("data qubit outside one of the circuits")
    ua = _data_operator(restricted_action(a, data_qubits), tol)
    ub = _data_operator(restricted_action(b, data_qubits), tol)
    if ua is None or ub is None:
        return False
    return same_up_to_phase(ua, ub, tol)


def defer_measurements(pc: ProtocolCircuit) -> Circuit:
    """Coherent version of a protocol circuit.

    Measurements become controls from the measured wire; a reset moves the
    logical wire onto a fresh |0> ancilla. Data ends on its original wires.
    """
    wires = list(range(pc.num_wires))
    next_free = pc.num_wires
    bit_wire: dict[int, int] = {}
    consumed: set[int] = set()
    gates: list[Gate] = []
    for ev in pc.events:
        if ev.kind == "epr":
            a, b = (wires[q] for q in ev.qubits)
            gates += [Gate("h", (a,)), Gate("cx", (a, b))]
        elif ev.kind == "gate":
            gates.append(Gate(ev.gate.name, tuple(wires[q] for q in ev.qubits), ev.gate.params))
        elif ev.kind == "measure":
            if ev.bit in bit_wire:
                raise VerificationError(f"classical bit {ev.bit} produced twice")
            bit_wire[ev.bit] = wires[ev.qubits[0]]
        elif ev.kind == "cond":
            if ev.bit not in bit_wire:
                raise VerificationError(f"classical bit {ev.bit} used before it was measured")
            ctrl = bit_wire[ev.bit]
            tgt = wires[ev.qubits[0]]
            if ctrl == tgt:
                raise VerificationError("conditioned gate on its own measured wire")
            name = {"x": "cx", "z": "cz"}.get(ev.gate.name)
            if name is None:
                raise VerificationError(f"only X/Z corrections can be deferred, got {ev.gate.name}")
            gates.append(Gate(name, (ctrl, tgt)))
            consumed.add(ev.bit)
        elif ev.kind == "reset":
            wires[ev.qubits[0]] = next_free
            next_free += 1
        elif ev.kind == "send":
            if ev.bit not in bit_wire:
                raise VerificationError(f"sending unmeasured bit {ev.bit}")
        else:
            raise VerificationError(f"unknown event {ev.kind}")
    for q in range(pc.num_data):
        if wires[q] != q:
            gates.append(Gate("swap", (q, wires[q])))
    return Circuit.build(next_free, gates)


MAX_LIVE_WIRES = 18


def deferred_equivalent(pc: ProtocolCircuit, reference: Circuit, tol: float = 1e-9) -> bool:
    """Exact check of the measurement-deferred protocol against ``reference``.

    The deferred circuit gets a fresh wire per reset, so it is simulated with
    wires allocated on first use and released after their last gate. A
    released wire must factor off the rest of the state (data inputs
    included); nothing touches it afterwards, so this is the same condition
    as checking all ancillas at the end.
    """
    d = pc.num_data
    if reference.num_qubits != d:
        raise VerificationError("reference must act on exactly the protocol's data wires")
    c = defer_measurements(pc)
    last: dict[int, int] = {}
    for i, g in enumerate(c.gates):
        for q in g.qubits:
            last[q] = i
    state = basis_batch(d, range(d))
    axes = list(range(d))
    for i, g in enumerate(c.gates):
        for q in g.qubits:
            if q not in axes:
                state = np.stack([state, np.zeros_like(state)], axis=len(axes))
                axes.append(q)
                if len(axes) > MAX_LIVE_WIRES:
                    raise VerificationError(f"more than {MAX_LIVE_WIRES} live wires")
        state = apply_matrix(state, gate_matrix(g), [axes.index(q) for q in g.qubits])
        for q in g.qubits:
            if q < d or last[q] != i:
                continue
            st = np.moveaxis(state, axes.index(q), 0)
            flat = st.reshape(2, -1)
            r = int(np.argmax(np.linalg.norm(flat, axis=1)))
            u = flat[r] / np.linalg.norm(flat[r])
            phi = flat @ u.conj()
            if np.max(np.abs(flat - np.outer(phi, u))) > tol:
                return False  # the released wire still carries data
            state = (u * np.linalg.norm(phi)).reshape(st.shape[1:])
            axes.remove(q)
    state = np.moveaxis(state, [axes.index(q) for q in range(d)], list(range(d)))
    op = state.reshape(2 ** d, 2 ** d)
    op = op * math.sqrt(2 ** d) / np.linalg.norm(op)
    return same_up_to_phase(op, unitary_of(reference), tol)


def _outcomes_from(seed: int) -> Callable[[int], int]:
    rng = np.random.default_rng(seed)
    cache: dict[int, int] = {}

    def pick(bit: int) -> int:
        if bit not in cache:
            cache[bit] = int(rng.integers(2))
        return cache[bit]
    return pick


def run_branch(pc: ProtocolCircuit, state: np.ndarray, outcome: Callable[[int], int]) -> tuple[np.ndarray, dict[int, int]]:
    """Run one measurement branch on a batched state; returns the unnormalised result and bits."""
    bits: dict[int, int] = {}
    last: dict[int, int] = {}
    n = pc.num_wires
    state = np.ascontiguousarray(state).copy()
    for ev in pc.events:
        if ev.kind == "epr":
            a, b = ev.qubits
            state = apply_matrix(state, _FIXED["h"], (a,), True)
            state = apply_matrix(state, _FIXED["cx"], (a, b), True)
        elif ev.kind == "gate":
            state = apply_matrix(state, gate_matrix(ev.gate), ev.qubits, True)
        elif ev.kind == "measure":
            q = ev.qubits[0]
            m = outcome(ev.bit)
            idx = [slice(None)] * (n + 1)
            idx[q] = 1 - m
            state[tuple(idx)] = 0
            bits[ev.bit] = m
            last[q] = m
        elif ev.kind == "cond":
            if bits[ev.bit]:
                state = apply_matrix(state, gate_matrix(ev.gate), ev.qubits, True)
        elif ev.kind == "reset":
            q = ev.qubits[0]
            if q not in last:
                raise VerificationError(f"reset of wire {q} without a prior measurement")
            if last.pop(q):
                state = apply_matrix(state, _FIXED["x"], (q,), True)
    return state, bits


def protocol_branch_operator(pc: ProtocolCircuit, seed: int = 0, outcome=None) -> np.ndarray | None:
    """Data operator realised by one measurement branch (communication wires must end in |0>)."""
    if pc.num_wires > MAX_SIM_QUBITS:
        raise VerificationError(f"{pc.num_wires} wires exceeds the simulation cap of {MAX_SIM_QUBITS}")
    data = list(range(pc.num_data))
    state = basis_batch(pc.num_wires, data)
    state, _ = run_branch(pc, state, outcome or _outcomes_from(seed))
    anc = [q for q in range(pc.num_wires) if q >= pc.num_data]
    state = np.moveaxis(state, anc + data, list(range(pc.num_wires)))
    d = 2 ** len(data)
    m = state.reshape(2 ** len(anc), d, d)
    if np.max(np.abs(m[1:])) > 1e-9:
        return None  # a communication wire was left dirty
    op = m[0]
    norm = np.linalg.norm(op)
    if norm < 1e-12:
        return None
    return op * math.sqrt(d) / norm


def protocol_equivalent(pc: ProtocolCircuit, reference: Circuit, seeds: Iterable[int] = (0,),
                        tol: float = 1e-9, all_zero: bool = True, all_one: bool = True) -> bool:
    """Check several measurement branches of ``pc`` against ``reference`` on the data wires."""
    if reference.num_qubits != pc.num_data:
        raise VerificationError("reference must act on exactly the protocol's data wires")
    target = unitary_of(reference) if reference.num_qubits <= MAX_DENSE_QUBITS else None
    if target is None:
        raise VerificationError("reference too large")
    policies = [_outcomes_from(s) for s in seeds]
    if all_zero:
        policies.append(lambda bit: 0)
    if all_one:
        policies.append(lambda bit: 1)
    for pol in policies:
        op = protocol_branch_operator(pc, outcome=pol)
        if op is None or not same_up_to_phase(op, target, tol):
            return False
    return True


def random_product_state(n: int, rng: np.random.Generator) -> np.ndarray:
    vec = np.array([1.0 + 0j])
    for _ in range(n):
        v = rng.normal(size=2) + 1j * rng.normal(size=2)
        vec = np.kron(vec, v / np.linalg.norm(v))
    return vec


def branch_states(pc: ProtocolCircuit, data_state: np.ndarray) -> list[tuple[float, np.ndarray]]:
    """Every measurement branch for one data input: (probability, normalised data state)."""
    nbits = sorted({ev.bit for ev in pc.events if ev.kind == "measure"})
    if len(nbits) > 12:
        raise VerificationError("too many measurements to enumerate branches")
    n = pc.num_wires
    full = np.zeros((2,) * n + (1,), dtype=complex)
    data_part = data_state.reshape((2,) * pc.num_data)
    idx = (slice(None),) * pc.num_data + (0,) * (n - pc.num_data) + (0,)
    full[idx] = data_part
    out = []
    for mask in range(2 ** len(nbits)):
        choice = {b: (mask >> i) & 1 for i, b in enumerate(nbits)}
        st, _ = run_branch(pc, full, lambda bit: choice[bit])
        flat = st.reshape(2 ** pc.num_data, 2 ** (n - pc.num_data))
        prob = float(np.vdot(flat, flat).real)
        if prob < 1e-12:
            continue
        out.append((prob, flat[:, 0] / math.sqrt(prob)))
    return out
