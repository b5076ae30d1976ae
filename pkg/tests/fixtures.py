"""Hand-built circuits shared by the test modules."""
from burstcomm.benchmarks import BenchmarkSpec, canonical_bv_secret, generate
from burstcomm.ir import Circuit
from burstcomm.partition import Partition, contiguous
from burstcomm.qasm import parse_qasm

A, B, C = 0, 1, 2

# arithmetic snippet on nodes A = {q0,q1,q2}, B = {q3,q4}, C = {q5,q6,q7}
EXAMPLE_QASM = """
OPENQASM 2.0;
include "qelib1.inc";
qreg q[8];
cx q[3],q[1];
t q[3];
cx q[3],q[2];
cx q[5],q[3];
cx q[3],q[5];
cx q[3],q[1];
h q[3];
cx q[1],q[3];
cx q[3],q[2];
cx q[6],q[2];
tdg q[2];
cx q[7],q[2];
cx q[0],q[5];
cx q[6],q[0];
cx q[4],q[0];
cx q[4],q[1];
cx q[1],q[5];
cx q[1],q[7];
"""

EXAMPLE_PARTITION = Partition((A, A, A, B, B, C, C, C), 3, 3)


def example() -> tuple[Circuit, Partition]:
    return parse_qasm(EXAMPLE_QASM), EXAMPLE_PARTITION


def canonical_bv() -> tuple[Circuit, Partition]:
    return generate(BenchmarkSpec("BV", 100, secret=canonical_bv_secret())), contiguous(100, 10, 10)


def qaoa_ring() -> tuple[Circuit, Partition]:
    """8-cycle on two nodes of four, ordered so six ring edges cross the cut."""
    ring = [0, 4, 1, 5, 6, 2, 7, 3]
    edges = tuple((ring[i], ring[(i + 1) % 8]) for i in range(8))
    return generate(BenchmarkSpec("QAOA", 8, edges=edges, layers=1)), contiguous(8, 2, 4)


def small_fixtures() -> dict[str, tuple[Circuit, Partition]]:
    """Every bundled program with at most eight qubits."""
    out = {"example": example()}
    for n in range(4, 9):
        out[f"qft{n}"] = (generate(BenchmarkSpec("QFT", n)), contiguous(n, 2, (n + 1) // 2))
    for n in range(4, 9):
        secret = "".join("1" if i % 3 != 2 else "0" for i in range(n - 1))
        out[f"bv{n}"] = (generate(BenchmarkSpec("BV", n, secret=secret)), contiguous(n, 2, (n + 1) // 2))
    tri = ((0, 1), (1, 2), (0, 2))
    out["qaoa3"] = (generate(BenchmarkSpec("QAOA", 3, edges=tri)), contiguous(3, 2, 2))
    out["rca4"] = (generate(BenchmarkSpec("RCA", 4)), contiguous(4, 2, 2))
    return out


def _regular_edges(n: int, d: int, seed: int) -> tuple[tuple[int, int], ...]:
    import networkx as nx
    return tuple(sorted(tuple(sorted(e)) for e in nx.random_regular_graph(d, n, seed=seed).edges))


def bundled() -> dict[str, tuple[Circuit, Partition]]:
    """Desk-scale benchmark set: the small fixtures plus larger instances of every family."""
    out = small_fixtures()
    out["qaoa_ring"] = qaoa_ring()
    out["qft12"] = (generate(BenchmarkSpec("QFT", 12)), contiguous(12, 3, 4))
    out["qft16"] = (generate(BenchmarkSpec("QFT", 16)), contiguous(16, 4, 4))
    out["qft20"] = (generate(BenchmarkSpec("QFT", 20)), contiguous(20, 4, 5))
    out["bv100"] = canonical_bv()
    out["bv24"] = (generate(BenchmarkSpec("BV", 24, secret="10110111" * 2 + "1101011")), contiguous(24, 4, 6))
    out["qaoa16"] = (generate(BenchmarkSpec("QAOA", 16, edges=_regular_edges(16, 3, 7), layers=2)),
                     contiguous(16, 4, 4))
    out["rca12"] = (generate(BenchmarkSpec("RCA", 12)), contiguous(12, 3, 4))
    out["mctr11"] = (generate(BenchmarkSpec("MCTR", 11, controls=6)), contiguous(11, 3, 4))
    return out


BODY = 14   # member CX per constructed TP block; longer than one EPR preparation


# chain A1-A2, A2-A3, A3-A4 with pivots homed on A2, A3, A3: every shared node is a pivot home,
# so without alignment the blocks run back to back with each EPR prepared in the shadow of the last
ALIGN_CHAIN = ((1, 0), (2, 1), (2, 3))


def alignment_fixture(n: int):
    """First n blocks of ALIGN_CHAIN as commutable TP blocks of BODY member CX each."""
    from burstcomm.aggregate import CommBlock
    ops, blocks, node_of = [], [], []
    for home, dest in ALIGN_CHAIN[:n]:
        piv = len(node_of)
        node_of += [home, dest]
        start = len(ops)
        ops += [("cx", (piv, piv + 1))] * BODY
        blocks.append(CommBlock(piv, dest, tuple(range(start, start + BODY)), (start, start + BODY - 1)))
    return Circuit.build(len(node_of), ops), blocks, tuple(node_of)


def fusion_fixture(targets: tuple[int, ...]):
    """Consecutive TP blocks of pivot q0 (node 0) towards the listed nodes."""
    from burstcomm.aggregate import CommBlock
    k = max(targets) + 1
    ops, blocks = [], []
    for node in targets:
        start = len(ops)
        ops += [("cx", (0, node))] * BODY
        blocks.append(CommBlock(0, node, tuple(range(start, start + BODY)), (start, start + BODY - 1)))
    node_of = tuple(range(k))
    return Circuit.build(k, ops), blocks, node_of
