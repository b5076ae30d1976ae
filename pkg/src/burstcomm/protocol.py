"""Primitive protocol circuits over data and communication wires."""
from __future__ import annotations

from dataclasses import dataclass, field

from .ir import Gate

COMM_PER_NODE = 2


@dataclass(frozen=True)
class Event:
    """One protocol primitive.

    kind is one of ``epr`` (qubits = the two halves, nodes = endpoints),
    ``gate``, ``measure`` (into ``bit``), ``cond`` (gate applied when ``bit``
    is 1), ``send`` (``bit`` travels nodes[0] -> nodes[1]) and ``reset``.
    """
    kind: str
    qubits: tuple[int, ...] = ()
    gate: Gate | None = None
    bit: int = -1
    nodes: tuple[int, ...] = ()


@dataclass
class ProtocolCircuit:
    num_data: int
    num_nodes: int
    events: list[Event] = field(default_factory=list)
    num_bits: int = 0

    @property
    def num_wires(self) -> int:
        return self.num_data + COMM_PER_NODE * self.num_nodes

    def comm(self, node: int, slot: int) -> int:
        return self.num_data + COMM_PER_NODE * node + slot

    def wire_label(self, w: int) -> str:
        if w < self.num_data:
            return f"q[{w}]"
        node, slot = divmod(w - self.num_data, COMM_PER_NODE)
        return f"comm{node}[{slot}]"

    def new_bit(self) -> int:
        self.num_bits += 1
        return self.num_bits - 1

    # builders
    def gate(self, name: str, qubits, params=()) -> None:
        qubits = tuple(qubits)
        self.events.append(Event("gate", qubits, Gate(name, qubits, tuple(params))))

    def epr(self, a: int, b: int, na: int, nb: int) -> None:
        self.events.append(Event("epr", (a, b), nodes=(na, nb)))

    def measure(self, q: int) -> int:
        bit = self.new_bit()
        self.events.append(Event("measure", (q,), bit=bit))
        return bit

    def send(self, bit: int, src: int, dst: int) -> None:
        if src != dst:
            self.events.append(Event("send", bit=bit, nodes=(src, dst)))

    def cond(self, name: str, q: int, bit: int) -> None:
        self.events.append(Event("cond", (q,), Gate(name, (q,)), bit=bit))

    def reset(self, q: int) -> None:
        self.events.append(Event("reset", (q,)))

    def epr_count(self) -> int:
        return sum(1 for e in self.events if e.kind == "epr")

    def to_qasm(self) -> str:
        """Extended QASM for inspection: adds ``epr``, ``send`` and ``reset`` pseudo-instructions."""
        lines = ["OPENQASM 2.0;", 'include "qelib1.inc";',
                 f"qreg q[{self.num_data}];"]
        for n in range(self.num_nodes):
            lines.append(f"qreg comm{n}[{COMM_PER_NODE}];")
        if self.num_bits:
            lines.append(f"creg c[{self.num_bits}];")
        lab = self.wire_label
        for e in self.events:
            if e.kind == "epr":
                lines.append(f"epr {lab(e.qubits[0])},{lab(e.qubits[1])};")
            elif e.kind == "gate":
                p = f"({','.join(repr(x) for x in e.gate.params)})" if e.gate.params else ""
                lines.append(f"{e.gate.name}{p} " + ",".join(lab(q) for q in e.qubits) + ";")
            elif e.kind == "measure":
                lines.append(f"measure {lab(e.qubits[0])} -> c[{e.bit}];")
            elif e.kind == "cond":
                lines.append(f"if(c[{e.bit}]==1) {e.gate.name} {lab(e.qubits[0])};")
            elif e.kind == "send":
                lines.append(f"send c[{e.bit}] node{e.nodes[0]} -> node{e.nodes[1]};")
            elif e.kind == "reset":
                lines.append(f"reset {lab(e.qubits[0])};")
        return "\n".join(lines) + "\n"
