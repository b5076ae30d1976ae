"""Expansion of assigned blocks into EPR / measure / feed-forward protocol circuits."""
from __future__ import annotations

from typing import Sequence

from .aggregate import CommBlock
from .assign import Scheme
from .ir import Circuit, Gate
from .protocol import COMM_PER_NODE, ProtocolCircuit


class ExpansionError(RuntimeError):
    """Protocol bookkeeping failed (no free communication qubit, or a gate left non-local)."""


class Emitter:
    """Tracks where each logical qubit lives while protocol events are emitted."""

    def __init__(self, num_data: int, node_of: Sequence[int], num_nodes: int):
        self.pc = ProtocolCircuit(num_data, num_nodes)
        self.node_of = list(node_of)
        self.where = list(range(num_data))
        self.busy = [[False] * COMM_PER_NODE for _ in range(num_nodes)]

    def node(self, w: int) -> int:
        if w < self.pc.num_data:
            return self.node_of[w]
        return (w - self.pc.num_data) // COMM_PER_NODE

    def alloc(self, node: int) -> int:
        for s in range(COMM_PER_NODE):
            if not self.busy[node][s]:
                self.busy[node][s] = True
                return self.pc.comm(node, s)
        raise ExpansionError(f"no free communication qubit on node {node}")

    def free(self, w: int) -> None:
        if w >= self.pc.num_data:
            node, s = divmod(w - self.pc.num_data, COMM_PER_NODE)
            self.busy[node][s] = False

    def gate(self, g: Gate) -> None:
        if g.name == "barrier":
            return
        ws = tuple(self.where[q] for q in g.qubits)
        if g.name == "measure":
            self.pc.measure(ws[0])
            return
        if len(ws) == 2 and self.node(ws[0]) != self.node(ws[1]):
            raise ExpansionError(f"gate {g} would act across nodes")
        self.pc.gate(g.name, ws, g.params)

    def teleport(self, q: int, dst: int) -> None:
        src = self.where[q]
        ns, nd = self.node(src), self.node(dst)
        e = self.alloc(ns)
        self.pc.epr(e, dst, ns, nd)
        self.pc.gate("cx", (src, e))
        self.pc.gate("h", (src,))
        m1 = self.pc.measure(src)
        m2 = self.pc.measure(e)
        self.pc.send(m1, ns, nd)
        self.pc.send(m2, ns, nd)
        self.pc.cond("x", dst, m2)
        self.pc.cond("z", dst, m1)
        self.pc.reset(e)
        self.free(e)
        self.pc.reset(src)
        self.free(src)
        self.where[q] = dst

    def move(self, q: int, node: int) -> None:
        """Teleport logical ``q`` onto ``node`` (its own data slot when returning home)."""
        if self.node(self.where[q]) == node:
            return
        dst = q if node == self.node_of[q] else self.alloc(node)
        self.teleport(q, dst)

    def cat(self, b: CommBlock, gates: Sequence[Gate]) -> None:
        p = self.where[b.pivot]
        home = self.node(p)
        a, r = self.alloc(home), self.alloc(b.node)
        self.pc.epr(a, r, home, b.node)
        self.pc.gate("cx", (p, a))
        m = self.pc.measure(a)
        self.pc.send(m, home, b.node)
        self.pc.cond("x", r, m)
        self.pc.reset(a)
        self.free(a)
        members = set(b.members)
        for g in gates:
            if g.id in members:
                x = g.qubits[1]
                self.pc.gate("cx", (r, self.where[x]))
            else:
                self.gate(g)
        self.pc.gate("h", (r,))
        m = self.pc.measure(r)
        self.pc.send(m, b.node, home)
        self.pc.cond("z", p, m)
        self.pc.reset(r)
        self.free(r)

    def tp(self, b: CommBlock, gates: Sequence[Gate], go: bool = True, back: bool = True) -> None:
        if go:
            self.move(b.pivot, b.node)
        for g in gates:
            self.gate(g)
        if back:
            self.move(b.pivot, self.node_of[b.pivot])

    def return_all(self) -> None:
        for q in range(self.pc.num_data):
            self.move(q, self.node_of[q])


def expand(b: CommBlock, s: Scheme, c: Circuit, node_of: Sequence[int], num_nodes: int | None = None) -> ProtocolCircuit:
    """Protocol circuit for one block, acting on all of ``c``'s data qubits."""
    em = Emitter(c.num_qubits, node_of, num_nodes or max(node_of) + 1)
    gates = c.gates[b.span[0]:b.span[1] + 1]
    if s is Scheme.CAT:
        em.cat(b, gates)
    else:
        em.tp(b, gates)
    return em.pc


def expand_program(c: Circuit, blocks: Sequence[CommBlock], schemes: Sequence[Scheme],
                   node_of: Sequence[int], num_nodes: int | None = None,
                   chains: Sequence[Sequence[int]] = ()) -> ProtocolCircuit:
    """Whole-program protocol; ``chains`` lists fused same-pivot TP block indices in order."""
    em = Emitter(c.num_qubits, node_of, num_nodes or max(node_of) + 1)
    starts = {b.span[0]: i for i, b in enumerate(blocks)}
    go = {i: True for i in range(len(blocks))}
    back = dict(go)
    for ch in chains:
        for a, b in zip(ch, ch[1:]):
            back[a] = False
            go[b] = True
    i = 0
    while i < len(c.gates):
        k = starts.get(i)
        if k is None:
            em.gate(c.gates[i])
            i += 1
            continue
        b = blocks[k]
        gates = c.gates[b.span[0]:b.span[1] + 1]
        if schemes[k] is Scheme.CAT:
            em.cat(b, gates)
        else:
            em.tp(b, gates, go[k], back[k])
        i = b.span[1] + 1
    em.return_all()
    return em.pc
