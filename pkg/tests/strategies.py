"""Hypothesis strategies for random basis circuits with partitions."""
from hypothesis import strategies as st

from burstcomm.ir import Circuit
from burstcomm.partition import Partition

ONE_Q = ["h", "x", "z", "s", "t", "tdg", "rz", "rx", "ry", "u3"]
NPARAM = {"rz": 1, "rx": 1, "ry": 1, "u3": 3}


@st.composite
def partitioned_circuits(draw, min_qubits=2, max_qubits=6, max_gates=24, cx_weight=3, measure=False):
    n = draw(st.integers(min_qubits, max_qubits))
    k = draw(st.integers(2, min(3, n)))
    t = -(-n // k)
    node_of = draw(st.permutations([i // t for i in range(n)]))
    names = ONE_Q + ["cx"] * cx_weight + (["measure"] if measure else [])
    ops = []
    for _ in range(draw(st.integers(1, max_gates))):
        name = draw(st.sampled_from(names))
        if name == "cx":
            a, b = draw(st.permutations(range(n)))[:2]
            ops.append(("cx", (a, b)))
        else:
            q = draw(st.integers(0, n - 1))
            angles = [draw(st.sampled_from([0.3, -1.1, 2.5, 0.7])) for _ in range(NPARAM.get(name, 0))]
            ops.append((name, (q,), angles))
    return Circuit.build(n, ops), Partition(tuple(node_of), k, t)
