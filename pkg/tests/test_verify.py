import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from burstcomm.aggregate import CommBlock
from burstcomm.assign import Scheme
from burstcomm.expand import expand
from burstcomm.ir import Circuit, Gate
from burstcomm.protocol import ProtocolCircuit
from burstcomm.verify import (MAX_DENSE_QUBITS, VerificationError, apply_matrix, branch_states,
                              defer_measurements, deferred_equivalent, equivalent, gate_matrix, protocol_equivalent,
                              random_product_state, unitary_of)

NODE_OF = (0, 0, 1, 1)
I2 = np.eye(2)
X = np.array([[0, 1], [1, 0]])
Z = np.diag([1, -1])
H = np.array([[1, 1], [1, -1]]) / math.sqrt(2)


def kron_apply(n, m, qubits):
    """Full-space operator for ``m`` on ``qubits`` (qubit 0 most significant), via permutation."""
    k = len(qubits)
    rest = [q for q in range(n) if q not in qubits]
    full = np.kron(m, np.eye(2 ** (n - k)))
    order = list(qubits) + rest
    perm = np.argsort(order)
    t = full.reshape((2,) * (2 * n))
    t = t.transpose(list(perm) + [n + p for p in perm])
    return t.reshape(2 ** n, 2 ** n)


def test_gate_matrices():
    assert np.allclose(gate_matrix(Gate("h", (0,))), H)
    assert np.allclose(gate_matrix(Gate("t", (0,))), np.diag([1, np.exp(1j * math.pi / 4)]))
    th = 0.37
    assert np.allclose(gate_matrix(Gate("rx", (0,), (th,))),
                       math.cos(th / 2) * I2 - 1j * math.sin(th / 2) * X)
    assert np.allclose(gate_matrix(Gate("rz", (0,), (th,))), np.diag([np.exp(-0.5j * th), np.exp(0.5j * th)]))
    cx = np.eye(4)[[0, 1, 3, 2]]
    assert np.allclose(gate_matrix(Gate("cx", (0, 1))), cx)
    assert np.allclose(gate_matrix(Gate("crz", (0, 1), (th,))),
                       np.diag([1, 1, np.exp(-0.5j * th), np.exp(0.5j * th)]))
    a, b, c = 0.3, 1.1, -0.4
    u3 = np.array([[math.cos(a / 2), -np.exp(1j * c) * math.sin(a / 2)],
                   [np.exp(1j * b) * math.sin(a / 2), np.exp(1j * (b + c)) * math.cos(a / 2)]])
    assert np.allclose(gate_matrix(Gate("u3", (0,), (a, b, c))), u3)


MATS = [X, Z, H, np.diag([1, 1j]), np.array([[0, 1j], [1j, 0]]),
        np.eye(4)[[0, 1, 3, 2]], np.diag([1, 1, 1, -1])]


@settings(max_examples=80, deadline=None)
@given(st.integers(2, 5), st.integers(0, len(MATS) - 1), st.data())
def test_apply_matrix_matches_kron(n, mi, data):
    m = MATS[mi]
    k = 1 if m.shape[0] == 2 else 2
    qubits = tuple(data.draw(st.permutations(range(n)))[:k])
    rng = np.random.default_rng(data.draw(st.integers(0, 1000)))
    v = rng.normal(size=2 ** n) + 1j * rng.normal(size=2 ** n)
    state = v.reshape((2,) * n + (1,))
    if m.shape == (4, 4) and np.allclose(m, np.eye(4)[[0, 1, 3, 2]]):
        m = gate_matrix(Gate("cx", (0, 1)))
    got = apply_matrix(state, m, qubits).reshape(-1)
    assert np.allclose(got, kron_apply(n, m, qubits) @ v)


def test_equivalence_up_to_global_phase():
    a = Circuit.build(1, [("z", (0,))])
    b = Circuit.build(1, [("rz", (0,), (math.pi,))])
    assert equivalent(a, b)
    assert not equivalent(a, Circuit.build(1, [("s", (0,))]))
    # ancilla left entangled with the data is not equivalent
    c = Circuit.build(2, [("cx", (0, 1))])
    assert not equivalent(Circuit.build(2, []), c, data_qubits=[0])
    # ancilla left in a data-independent state is fine
    d = Circuit.build(2, [("x", (1,))])
    assert equivalent(Circuit.build(2, []), d, data_qubits=[0])


def test_caps():
    with pytest.raises(VerificationError):
        unitary_of(Circuit.build(MAX_DENSE_QUBITS + 1, []))


def cat_protocol():
    c = Circuit.build(4, [("cx", (0, 2)), ("cx", (0, 3))])
    pc = expand(CommBlock(0, 1, (0, 1), (0, 1)), Scheme.CAT, c, NODE_OF)
    return c, pc


def test_deferred_and_branch_oracles_agree():
    c, pc = cat_protocol()
    deferred = defer_measurements(pc)
    assert equivalent(c, deferred, data_qubits=range(4))
    assert protocol_equivalent(pc, c)
    wrong = Circuit.build(4, [("cx", (0, 2))])
    assert not equivalent(wrong, deferred, data_qubits=range(4))
    assert not protocol_equivalent(pc, wrong)


def test_missing_correction_detected():
    c, pc = cat_protocol()
    broken = ProtocolCircuit(pc.num_data, pc.num_nodes)
    dropped = False
    for ev in pc.events:
        if ev.kind == "cond" and not dropped:
            dropped = True
            continue
        broken.events.append(ev)
    broken.num_bits = pc.num_bits
    assert not equivalent(c, defer_measurements(broken), data_qubits=range(4))
    assert not protocol_equivalent(broken, c, seeds=(0, 1, 2, 3))
    assert not deferred_equivalent(broken, c)


def test_streamed_deferral_matches_full_width():
    c, pc = cat_protocol()
    assert deferred_equivalent(pc, c)
    assert not deferred_equivalent(pc, Circuit.build(4, [("cx", (0, 2))]))
    c3 = Circuit.build(4, [("cx", (0, 2)), ("h", (0,)), ("cx", (3, 0))])
    ms = (0, 2)
    tp = expand(CommBlock(0, 1, ms, ms), Scheme.TP, c3, NODE_OF)
    full = defer_measurements(tp)
    assert full.num_qubits > tp.num_wires
    assert deferred_equivalent(tp, c3) == equivalent(c3, full, data_qubits=range(4)) is True


def test_branches_all_agree():
    c, pc = cat_protocol()
    rng = np.random.default_rng(5)
    psi = random_product_state(4, rng)
    expected = unitary_of(c) @ psi
    branches = branch_states(pc, psi)
    assert sum(p for p, _ in branches) == pytest.approx(1.0)
    for _, out in branches:
        assert abs(abs(np.vdot(expected, out)) - 1) < 1e-9
