"""Reference compilers: per-gate Cat-Comm and teleport-to-localize (GP-TP)."""
from __future__ import annotations

from collections import deque

import networkx as nx

from .aggregate import CommBlock
from .assign import Scheme
from .expand import Emitter
from .ir import Circuit, Gate, decompose_to_basis
from .latency import LatencyModel, teleport_time
from .partition import Partition, remote_cx_count
from .pipeline import Compiled, Metrics, block_metrics
from .protocol import ProtocolCircuit
from .schedule import BlockDag, Claim, Phase, Task, build_block_dag, gate_task, schedule

LOOKAHEAD = 20
VISITORS_PER_NODE = 1       # the second communication qubit stays free for EPR halves


def baseline_cat(c: Circuit, p: Partition, lm: LatencyModel | None = None) -> Compiled:
    """Every remote two-qubit gate gets its own Cat-Comm, control as pivot."""
    lm = lm or LatencyModel()
    base = decompose_to_basis(c)
    blocks = [CommBlock(g.qubits[0], p.node_of[g.qubits[1]], (i,), (i, i))
              for i, g in enumerate(base.gates) if g.is_two_qubit and p.is_remote(*g.qubits)]
    schemes = [Scheme.CAT] * len(blocks)
    dag = build_block_dag(base, blocks, schemes, p.node_of, lm)
    tl = schedule(dag, lm)
    m = block_metrics(base, p, blocks, schemes, dag, tl)
    return Compiled("baseline-cat", c, base, p, tl, m, blocks, schemes, [], dag)


def _plan(c: Circuit, p: Partition, lookahead: int = LOOKAHEAD) -> list[tuple]:
    """Gate and move sequence; a move is ("move", qubit, node)."""
    home = p.node_of
    loc = list(home)
    visitors: list[deque] = [deque() for _ in range(p.num_nodes)]
    ops: list[tuple] = []

    def go(q: int, dst: int):
        if loc[q] == dst:
            return
        if loc[q] != home[q]:
            visitors[loc[q]].remove(q)
        if dst != home[q]:
            while len(visitors[dst]) >= VISITORS_PER_NODE:
                v = visitors[dst].popleft()
                ops.append(("move", v, home[v]))
                loc[v] = home[v]
            visitors[dst].append(q)
        ops.append(("move", q, dst))
        loc[q] = dst

    def feasible(q: int, dst: int, partner: int) -> bool:
        return dst == home[q] or partner not in visitors[dst]

    gates = c.gates
    for i, g in enumerate(gates):
        if g.is_two_qubit and loc[g.qubits[0]] != loc[g.qubits[1]]:
            a, b = g.qubits
            window = [h for h in gates[i + 1:i + 1 + lookahead] if h.is_two_qubit]
            ca = sum(1 for h in window if a in h.qubits and any(loc[x] == loc[b] for x in h.qubits if x != a))
            cb = sum(1 for h in window if b in h.qubits and any(loc[x] == loc[a] for x in h.qubits if x != b))
            m, o = (a, b) if ca >= cb else (b, a)
            if not feasible(m, loc[o], o):
                m, o = o, m
            if not feasible(m, loc[o], o):
                go(o, home[o])          # both are visitors blocking each other
            go(m, loc[o])
        ops.append(("gate", g))
    return ops


def _move_task(q: int, src: int, dst: int, home: int, seq: int, lm: LatencyModel, serial: dict) -> Task:
    phases = [Phase("epr", lm.t_ep, (), (src, dst), consumer=1),
              Phase("tele", teleport_time(lm), (q,), (src, dst))]
    claims = [Claim(src, 0, 1)]
    closes = []
    if src != home:
        closes.append((("visit", q, serial[q]), 1))
    if dst != home:
        serial[q] = serial.get(q, 0) + 1
        claims.append(Claim(dst, 0, -1, ("visit", q, serial[q])))
    return Task("move", seq, (), phases, claims, closes=closes, pivot=q, nodes=(src, dst), epr=1,
                label=f"move q{q} n{src}->n{dst}")


def gp_tp(c: Circuit, p: Partition, lm: LatencyModel | None = None) -> Compiled:
    lm = lm or LatencyModel()
    base = decompose_to_basis(c)
    ops = _plan(base, p)
    tasks: dict[int, Task] = {}
    graph = nx.DiGraph()
    last: dict[int, int] = {}
    loc = list(p.node_of)
    serial: dict = {}
    for seq, op in enumerate(ops):
        if op[0] == "gate":
            t = gate_task(op[1], lm)
            t.order = seq
            qs = op[1].qubits
        else:
            _, q, dst = op
            t = _move_task(q, loc[q], dst, p.node_of[q], seq, lm, serial)
            loc[q] = dst
            qs = (q,)
        tasks[seq] = t
        graph.add_node(seq)
        for q in qs:
            if q in last:
                graph.add_edge(last[q], seq, kind="hard")
            last[q] = seq
    dag = BlockDag(graph, tasks, p.node_of, lm)
    tl = schedule(dag, lm)
    # one EPR per teleport; visitors still away at the end are not sent home
    tele = dag.epr_total()
    m = Metrics(tele, tele, 0.0, tl.makespan, remote_cx_count(base, p))
    return Compiled("gp-tp", c, base, p, tl, m, dag=dag, plan=ops)


def gp_tp_protocol(r: Compiled) -> ProtocolCircuit:
    em = Emitter(r.circuit.num_qubits, r.partition.node_of, r.partition.num_nodes)
    for op in r.plan:
        if op[0] == "gate":
            em.gate(op[1])
        else:
            em.move(op[1], op[2])
    em.return_all()
    return em.pc
