"""Latency constants and primitive-sequence timing (all durations in CX units)."""
from __future__ import annotations

from dataclasses import dataclass, fields
from typing import Hashable, Iterable, Sequence

from .ir import Gate


@dataclass(frozen=True)
class LatencyModel:
    t_1q: float = 0.1
    t_2q: float = 1.0
    t_ms: float = 5.0
    t_ep: float = 12.0
    t_cb: float = 1.0

    def __post_init__(self):
        for f in fields(self):
            if getattr(self, f.name) < 0:
                raise ValueError(f"{f.name} must be non-negative")

    def scaled(self, k: float) -> "LatencyModel":
        return LatencyModel(*(getattr(self, f.name) * k for f in fields(self)))

    def gate_time(self, g: Gate) -> float:
        if g.name == "barrier":
            return 0.0
        if g.name == "measure":
            return self.t_ms
        if g.name == "swap":
            return 3 * self.t_2q
        if g.is_two_qubit:
            return self.t_2q
        return self.t_1q


# primitive ops: ("g", wires, duration) | ("m", wire, bit) | ("send", bit) | ("c", wire, bit)
def critical_path(ops: Iterable[tuple], lm: LatencyModel) -> float:
    """Length of a primitive sequence when disjoint operations overlap."""
    ready: dict[Hashable, float] = {}
    bits: dict[Hashable, float] = {}
    end = 0.0
    for op in ops:
        kind = op[0]
        if kind == "g":
            ws, d = op[1], op[2]
            t = max((ready.get(w, 0.0) for w in ws), default=0.0) + d
            for w in ws:
                ready[w] = t
        elif kind == "m":
            t = ready.get(op[1], 0.0) + lm.t_ms
            ready[op[1]] = t
            bits[op[2]] = t
        elif kind == "send":
            t = bits[op[1]] + lm.t_cb
            bits[op[1]] = t
        else:
            t = max(ready.get(op[1], 0.0), bits[op[2]]) + lm.t_1q
            ready[op[1]] = t
        end = max(end, t)
    return end


def teleport_ops(lm: LatencyModel) -> list[tuple]:
    return [("g", ("src", "e"), lm.t_2q), ("g", ("src",), lm.t_1q),
            ("m", "src", 1), ("m", "e", 2), ("send", 1), ("send", 2),
            ("c", "dst", 2), ("c", "dst", 1)]


def teleport_time(lm: LatencyModel) -> float:
    return critical_path(teleport_ops(lm), lm)


def entangler_time(lm: LatencyModel) -> float:
    return critical_path([("g", ("p", "a"), lm.t_2q), ("m", "a", 1), ("send", 1), ("c", "r", 1)], lm)


def disentangler_time(lm: LatencyModel) -> float:
    return critical_path([("g", ("r",), lm.t_1q), ("m", "r", 1), ("send", 1), ("c", "p", 1)], lm)


def body_time(gates: Sequence[Gate], lm: LatencyModel, rename: dict | None = None) -> float:
    """Critical path of local gates; ``rename`` maps gate id to the wires it really uses."""
    rename = rename or {}
    ops = [("g", rename.get(g.id, g.qubits), lm.gate_time(g)) for g in gates]
    return critical_path(ops, lm)
