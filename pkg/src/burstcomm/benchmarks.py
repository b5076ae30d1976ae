"""Generators for the benchmark families: QFT, QAOA, BV, RCA and MCTR."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

from .ir import Circuit, CircuitError

FAMILIES = ("QFT", "QAOA", "BV", "RCA", "MCTR")


@dataclass(frozen=True)
class BenchmarkSpec:
    family: str
    num_qubits: int
    edges: tuple[tuple[int, int], ...] = ()
    layers: int = 1
    secret: str = ""
    controls: int = 0
    gamma: float = 0.7
    beta: float = 0.3
    extra: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise CircuitError(f"unknown family {self.family!r}")
        if self.num_qubits < 2:
            raise CircuitError("num_qubits must be at least 2")
        if self.family == "QAOA":
            if self.layers < 1:
                raise CircuitError("QAOA needs at least one layer")
            for a, b in self.edges:
                if a == b or not (0 <= a < self.num_qubits and 0 <= b < self.num_qubits):
                    raise CircuitError(f"bad QAOA edge ({a}, {b})")
        if self.family == "BV":
            if len(self.secret) != self.num_qubits - 1 or set(self.secret) - {"0", "1"}:
                raise CircuitError("BV secret must be a bitstring of length num_qubits - 1")
        if self.family == "RCA" and self.num_qubits < 4:
            raise CircuitError("RCA needs at least 4 qubits")
        if self.family == "MCTR":
            c = self.controls or (self.num_qubits + 1) // 2
            if c < 2 or 2 * c - 1 > self.num_qubits:
                raise CircuitError(f"MCTR with {c} controls needs {2 * c - 1} qubits")


def toffoli(a: int, b: int, c: int) -> list[tuple]:
    """CCX(a, b -> c) with six CX and H/T/Tdg."""
    return [("h", (c,)), ("cx", (b, c)), ("tdg", (c,)), ("cx", (a, c)), ("t", (c,)),
            ("cx", (b, c)), ("tdg", (c,)), ("cx", (a, c)), ("t", (b,)), ("t", (c,)),
            ("h", (c,)), ("cx", (a, b)), ("t", (a,)), ("tdg", (b,)), ("cx", (a, b))]


_AS_U3 = {"h": (math.pi / 2, 0.0, math.pi), "t": (0.0, 0.0, math.pi / 4),
          "tdg": (0.0, 0.0, -math.pi / 4)}


def _to_u3(ops: list[tuple]) -> list[tuple]:
    return [("u3", op[1], _AS_U3[op[0]]) if op[0] in _AS_U3 else op for op in ops]


def qft(n: int) -> list[tuple]:
    ops: list[tuple] = []
    for i in range(n):
        ops.append(("h", (i,)))
        for j in range(i + 1, n):
            ops.append(("crz", (j, i), (math.pi / 2 ** (j - i),)))
    return ops


def qaoa(n: int, edges, layers: int, gamma: float, beta: float) -> list[tuple]:
    ops: list[tuple] = [("h", (q,)) for q in range(n)]
    for _ in range(layers):
        for a, b in edges:
            ops += [("cx", (a, b)), ("rz", (b,), (2 * gamma,)), ("cx", (a, b))]
        ops += [("rx", (q,), (2 * beta,)) for q in range(n)]
    return ops


def bv(secret: str) -> list[tuple]:
    n = len(secret) + 1
    anc = n - 1
    ops: list[tuple] = [("x", (anc,))]
    ops += [("h", (q,)) for q in range(n)]
    ops += [("cx", (i, anc)) for i, bit in enumerate(secret) if bit == "1"]
    ops += [("h", (q,)) for q in range(n)]
    return ops


def rca(n: int) -> list[tuple]:
    """Ripple-carry adder on layout cin, b0, a0, b1, a1, ..., z (unused qubits left idle)."""
    m = (n - 2) // 2
    cin, z = 0, 2 * m + 1
    b = [1 + 2 * i for i in range(m)]
    a = [2 + 2 * i for i in range(m)]

    def maj(x, y, w):
        return [("cx", (w, y)), ("cx", (w, x))] + toffoli(x, y, w)

    def uma(x, y, w):
        return toffoli(x, y, w) + [("cx", (w, x)), ("cx", (x, y))]

    ops: list[tuple] = []
    carries = [cin] + a[:-1]
    for i in range(m):
        ops += maj(carries[i], b[i], a[i])
    ops.append(("cx", (a[-1], z)))
    for i in reversed(range(m)):
        ops += uma(carries[i], b[i], a[i])
    return ops


def mctr(n: int, controls: int = 0) -> list[tuple]:
    """Multi-controlled X via a V-chain: controls, then c-2 ancillas, then the target."""
    c = controls or (n + 1) // 2
    ctl = list(range(c))
    anc = list(range(c, 2 * c - 2))
    tgt = 2 * c - 2
    chain = [(ctl[0], ctl[1], anc[0] if anc else tgt)]
    for i in range(2, c):
        chain.append((ctl[i], anc[i - 2], anc[i - 1] if i < c - 1 else tgt))
    ops: list[tuple] = []
    for t in chain:
        ops += toffoli(*t)
    for t in reversed(chain[:-1]):
        ops += toffoli(*t)
    return _to_u3(ops)


def canonical_bv_secret() -> str:
    """Secret for BV over 10 nodes of 10 (ancilla last): 8 ones on node 0, 6 on nodes 1-8, 9 on node 9."""
    bits = ["0"] * 99
    for q in range(8):
        bits[q] = "1"
    for node in range(1, 9):
        for j in range(6):
            bits[10 * node + j] = "1"
    for q in range(90, 99):
        bits[q] = "1"
    return "".join(bits)


def generate(spec: BenchmarkSpec) -> Circuit:
    n = spec.num_qubits
    if spec.family == "QFT":
        ops = qft(n)
    elif spec.family == "QAOA":
        ops = qaoa(n, spec.edges, spec.layers, spec.gamma, spec.beta)
    elif spec.family == "BV":
        ops = bv(spec.secret)
    elif spec.family == "RCA":
        ops = rca(n)
    else:
        ops = mctr(n, spec.controls)
    return Circuit.build(n, ops)
