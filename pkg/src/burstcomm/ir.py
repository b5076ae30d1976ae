"""Circuit IR: gates, circuits, the rule-table commutation engine and basis decomposition."""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence


class CircuitError(ValueError):
    """Malformed gate or circuit, or a gate outside the supported set."""


# name -> (arity, parameter count)
GATE_SPECS: dict[str, tuple[int, int]] = {
    "h": (1, 0), "x": (1, 0), "y": (1, 0), "z": (1, 0),
    "s": (1, 0), "sdg": (1, 0), "t": (1, 0), "tdg": (1, 0),
    "rx": (1, 1), "ry": (1, 1), "rz": (1, 1),
    "u1": (1, 1), "u2": (1, 2), "u3": (1, 3),
    "cx": (2, 0), "cz": (2, 0), "crz": (2, 1), "swap": (2, 0),
    "measure": (1, 0),
}

# Z-diagonal single-qubit gates ("phase gates")
DIAGONAL_1Q = frozenset({"z", "s", "sdg", "t", "tdg", "rz", "u1"})
# X-axis single-qubit gates
XAXIS_1Q = frozenset({"x", "rx"})
YAXIS_1Q = frozenset({"y", "ry"})
# two-qubit gates that are diagonal in the computational basis
DIAGONAL_2Q = frozenset({"cz", "crz"})


@dataclass(frozen=True)
class Gate:
    name: str
    qubits: tuple[int, ...]
    params: tuple[float, ...] = ()
    id: int = -1

    def __post_init__(self):
        if self.name == "barrier":
            if not self.qubits:
                raise CircuitError("barrier needs at least one qubit")
        else:
            if self.name not in GATE_SPECS:
                raise CircuitError(f"unsupported gate {self.name!r} (id {self.id})")
            arity, nparams = GATE_SPECS[self.name]
            if len(self.qubits) != arity:
                raise CircuitError(f"{self.name} expects {arity} qubits, got {len(self.qubits)}")
            if len(self.params) != nparams:
                raise CircuitError(f"{self.name} expects {nparams} params, got {len(self.params)}")
        if len(set(self.qubits)) != len(self.qubits):
            raise CircuitError(f"repeated operand in {self.name} {self.qubits}")
        if not all(math.isfinite(p) for p in self.params):
            raise CircuitError(f"non-finite angle in {self.name}")

    @property
    def is_two_qubit(self) -> bool:
        return self.name in ("cx", "cz", "crz", "swap")

    @property
    def is_single_qubit(self) -> bool:
        return len(self.qubits) == 1 and self.name != "measure" and self.name != "barrier"

    def same_op(self, other: "Gate") -> bool:
        return self.name == other.name and self.qubits == other.qubits and self.params == other.params

    def __str__(self):
        p = f"({','.join(repr(x) for x in self.params)})" if self.params else ""
        return f"{self.name}{p} " + ",".join(f"q{q}" for q in self.qubits)


@dataclass(frozen=True)
class Circuit:
    num_qubits: int
    gates: tuple[Gate, ...] = ()
    qubit_names: tuple[str, ...] = field(default=())

    def __post_init__(self):
        if not self.qubit_names:
            object.__setattr__(self, "qubit_names", tuple(f"q[{i}]" for i in range(self.num_qubits)))
        if len(self.qubit_names) != self.num_qubits:
            raise CircuitError("qubit_names length mismatch")
        last = -1
        for g in self.gates:
            if any(q < 0 or q >= self.num_qubits for q in g.qubits):
                raise CircuitError(f"gate {g.id} ({g}) addresses a qubit outside 0..{self.num_qubits - 1}")
            if g.id <= last:
                raise CircuitError(f"gate ids must be unique and increasing (got {g.id} after {last})")
            last = g.id

    @classmethod
    def build(cls, num_qubits: int, ops: Iterable, qubit_names: Sequence[str] = ()) -> "Circuit":
        """Make a circuit from ``(name, qubits[, params])`` tuples or Gates, numbering gates 0..n-1."""
        gates = []
        for i, op in enumerate(ops):
            if isinstance(op, Gate):
                gates.append(replace(op, id=i))
            else:
                name, qubits, *rest = op
                params = tuple(float(p) for p in rest[0]) if rest else ()
                gates.append(Gate(name, tuple(qubits), params, i))
        return cls(num_qubits, tuple(gates), tuple(qubit_names))

    def renumbered(self, gates: Iterable[Gate] | None = None) -> "Circuit":
        return Circuit.build(self.num_qubits, self.gates if gates is None else gates, self.qubit_names)

    def __len__(self):
        return len(self.gates)

    def count(self, name: str) -> int:
        return sum(1 for g in self.gates if g.name == name)


def _shared(a: Gate, b: Gate) -> set[int]:
    return set(a.qubits) & set(b.qubits)


def _role_ok_1q(g: Gate, two: Gate) -> bool:
    """Does single-qubit ``g`` commute with two-qubit ``two`` on their shared qubit?"""
    q = g.qubits[0]
    if two.name in DIAGONAL_2Q:
        return g.name in DIAGONAL_1Q
    if two.name == "cx":
        if q == two.qubits[0]:
            return g.name in DIAGONAL_1Q
        return g.name in XAXIS_1Q
    return False  # swap


def commutes(a: Gate, b: Gate) -> bool:
    """Rule-table commutation of two gates (sound, not complete)."""
    if a.name == "barrier" or b.name == "barrier":
        return False
    shared = _shared(a, b)
    if not shared:
        return True
    if a.name == "measure" or b.name == "measure":
        return False
    if a.same_op(b):
        return True
    if a.is_single_qubit and b.is_single_qubit:
        for family in (DIAGONAL_1Q, XAXIS_1Q, YAXIS_1Q):
            if a.name in family and b.name in family:
                return True
        return False
    if a.is_single_qubit:
        return _role_ok_1q(a, b)
    if b.is_single_qubit:
        return _role_ok_1q(b, a)
    # both two-qubit
    if a.name == "swap" or b.name == "swap":
        return False
    if a.name in DIAGONAL_2Q and b.name in DIAGONAL_2Q:
        return True
    if a.name == "cx" and b.name == "cx":
        (c1, t1), (c2, t2) = a.qubits, b.qubits
        return c1 != t2 and c2 != t1
    cx, diag = (a, b) if a.name == "cx" else (b, a)
    # a diagonal gate commutes with a CX unless it touches the CX target
    return cx.qubits[1] not in diag.qubits


def commutes_with_set(g: Gate, gs: Iterable[Gate]) -> bool:
    return all(commutes(g, h) for h in gs)


def _decompose_gate(g: Gate) -> list[Gate]:
    if g.name == "crz":
        c, t = g.qubits
        th = g.params[0]
        return [Gate("rz", (t,), (th / 2,)), Gate("cx", (c, t)),
                Gate("rz", (t,), (-th / 2,)), Gate("cx", (c, t))]
    if g.name == "cz":
        c, t = g.qubits
        return [Gate("h", (t,)), Gate("cx", (c, t)), Gate("h", (t,))]
    if g.name == "swap":
        a, b = g.qubits
        return [Gate("cx", (a, b)), Gate("cx", (b, a)), Gate("cx", (a, b))]
    return [g]


def decompose_to_basis(c: Circuit) -> Circuit:
    """Rewrite CRZ, CZ and SWAP into CX plus single-qubit gates."""
    if all(g.name not in ("crz", "cz", "swap") for g in c.gates):
        return c
    out: list[Gate] = []
    for g in c.gates:
        out.extend(_decompose_gate(g))
    return c.renumbered(out)


def in_basis(c: Circuit) -> bool:
    return all(g.name not in ("crz", "cz", "swap") for g in c.gates)
