"""Block dependency DAG, TP alignment and fusion, and resource-constrained list scheduling."""
from __future__ import annotations

import bisect
import heapq
import json
import math
from dataclasses import dataclass, field
from typing import Sequence

import networkx as nx

from .aggregate import CommBlock
from .assign import Scheme
from .ir import DIAGONAL_1Q, DIAGONAL_2Q, XAXIS_1Q, Circuit, Gate
from .latency import (LatencyModel, body_time, disentangler_time, entangler_time,
                      teleport_time)
from .protocol import COMM_PER_NODE


class ScheduleError(RuntimeError):
    pass


@dataclass
class Phase:
    kind: str                       # epr, tele, ent, dis, body, gate
    dur: float
    qubits: tuple[int, ...] = ()
    nodes: tuple[int, ...] = ()
    consumer: int = -1              # epr: phase that uses the pair
    after: int = -1                 # epr: phase whose end bounds the start
    soft: bool = False              # waits for 'serial' predecessors


@dataclass
class Claim:
    node: int
    first: int                      # phase whose start opens the claim
    last: int                       # phase whose end closes it; -1 keeps it open
    key: object = None              # open claims are closed later by key


@dataclass
class Task:
    kind: str                       # gate, cat, tp, chain, move
    order: int                      # tie-break: first gate position
    gates: tuple[Gate, ...]
    phases: list[Phase]
    claims: list[Claim] = field(default_factory=list)
    holds: list[tuple[int, int, int]] = field(default_factory=list)
    closes: list[tuple[object, int]] = field(default_factory=list)
    pivot: int = -1
    nodes: tuple[int, ...] = ()
    blocks: tuple[int, ...] = ()
    epr: int = 0
    label: str = ""

    @property
    def qubits(self) -> set[int]:
        qs = {q for g in self.gates for q in g.qubits}
        if self.pivot >= 0:
            qs.add(self.pivot)
        return qs


@dataclass
class BlockDag:
    graph: nx.DiGraph
    tasks: dict[int, Task]
    node_of: tuple[int, ...]
    lm: LatencyModel
    elided: int = 0

    def copy(self) -> "BlockDag":
        return BlockDag(self.graph.copy(), dict(self.tasks), self.node_of, self.lm, self.elided)

    def epr_total(self) -> int:
        return sum(t.epr for t in self.tasks.values())

    def chains(self) -> list[tuple[int, ...]]:
        return [t.blocks for t in self.tasks.values() if t.kind == "chain"]


# task construction

def gate_task(g: Gate, lm: LatencyModel) -> Task:
    return Task("gate", g.id, (g,), [Phase("gate", lm.gate_time(g), g.qubits)], label=str(g))


def cat_task(b: CommBlock, gates: Sequence[Gate], home: int, lm: LatencyModel, index: int = -1) -> Task:
    p = b.pivot
    members = set(b.members)
    rename = {g.id: ("r", g.qubits[1]) for g in gates if g.id in members}
    body_q = tuple(sorted({q for g in gates for q in g.qubits if g.id not in members}
                          | {g.qubits[1] for g in gates if g.id in members}))
    t_ent, t_dis = entangler_time(lm), disentangler_time(lm)
    phases = [
        Phase("epr", lm.t_ep, (), (home, b.node), consumer=1),
        Phase("ent", lm.t_2q, (p,), (home,)),
        Phase("ent", t_ent - lm.t_2q, (), (home, b.node)),
        Phase("body", body_time(gates, lm, rename), body_q, (b.node, home)),
        Phase("dis", t_dis - lm.t_1q, (), (b.node, home)),
        Phase("dis", lm.t_1q, (p,), (home,)),
    ]
    claims = [Claim(home, 0, 2), Claim(b.node, 0, 5)]
    return Task("cat", b.span[0], tuple(gates), phases, claims, pivot=p, nodes=(home, b.node),
                blocks=(index,), epr=1, label=f"cat q{p}->n{b.node}")


def _hops(pivot: int, home: int, parts: Sequence[tuple[int, Sequence[Gate]]], lm: LatencyModel):
    """Phases and claims for a teleport chain home -> nodes... -> home with bodies in between."""
    tt = teleport_time(lm)
    phases: list[Phase] = []
    claims: list[Claim] = []
    loc = home
    first_tele = -1
    holder_claim = None             # claim index of the comm qubit holding the pivot
    hops = 0

    def hop(dst: int):
        nonlocal loc, first_tele, holder_claim, hops
        e = len(phases)
        phases.append(Phase("epr", lm.t_ep, (), (loc, dst), consumer=e + 1,
                            after=first_tele if dst == home else -1))
        phases.append(Phase("tele", tt, (pivot,), (loc, dst), soft=first_tele < 0))
        claims.append(Claim(loc, e, e + 1))                 # sender half
        if holder_claim is not None:
            claims[holder_claim].last = e + 1
        holder_claim = None
        if dst != home:
            claims.append(Claim(dst, e, -1))
            holder_claim = len(claims) - 1
        if first_tele < 0:
            first_tele = e + 1
        loc = dst
        hops += 1

    for node, gates in parts:
        if node != loc:
            hop(node)
        qs = tuple(sorted({q for g in gates for q in g.qubits} - {pivot}))
        phases.append(Phase("body", body_time(gates, lm), qs, (node,)))
    hop(home)
    return phases, claims, hops


def tp_task(b: CommBlock, gates: Sequence[Gate], home: int, lm: LatencyModel, index: int = -1) -> Task:
    phases, claims, hops = _hops(b.pivot, home, [(b.node, gates)], lm)
    return Task("tp", b.span[0], tuple(gates), phases, claims, holds=[(b.pivot, 1, len(phases) - 1)],
                pivot=b.pivot, nodes=(home, b.node), blocks=(index,), epr=hops,
                label=f"tp q{b.pivot}->n{b.node}")


def chain_task(tasks: Sequence[Task], home: int, lm: LatencyModel) -> Task:
    pivot = tasks[0].pivot
    parts = [(t.nodes[1], t.gates) for t in tasks]
    phases, claims, hops = _hops(pivot, home, parts, lm)
    gates = tuple(g for t in tasks for g in t.gates)
    route = "->".join(f"n{n}" for n, _ in parts)
    return Task("chain", min(t.order for t in tasks), gates, phases, claims,
                holds=[(pivot, 1, len(phases) - 1)], pivot=pivot,
                nodes=(home,) + tuple(n for n, _ in parts),
                blocks=tuple(b for t in tasks for b in t.blocks), epr=hops,
                label=f"tp-chain q{pivot}:{route}")


# commutation at task level: per shared qubit, both diagonal ("z") or both X-like ("x")

def _qubit_class(g: Gate, q: int) -> str:
    if g.name == "barrier" or g.name == "measure":
        return "o"
    if g.is_single_qubit:
        return "z" if g.name in DIAGONAL_1Q else "x" if g.name in XAXIS_1Q else "o"
    if g.name in DIAGONAL_2Q:
        return "z"
    if g.name == "cx":
        return "z" if g.qubits[0] == q else "x"
    return "o"


def _task_classes(t: Task) -> dict[int, str]:
    out: dict[int, str] = {}
    for g in t.gates:
        for q in g.qubits:
            c = _qubit_class(g, q)
            out[q] = c if out.get(q, c) == c else "o"
    return out


def _add_hard_edges(graph: nx.DiGraph, order: list[int], tasks: dict[int, Task]) -> None:
    per_qubit: dict[int, list[tuple[int, str]]] = {}
    for k in order:
        for q, cls in _task_classes(tasks[k]).items():
            hist = per_qubit.setdefault(q, [])
            i = len(hist) - 1
            if cls != "o":
                while i >= 0 and hist[i][1] == cls:
                    i -= 1
            if i >= 0:
                run = hist[i][1]
                while i >= 0 and hist[i][1] == run:
                    graph.add_edge(hist[i][0], k, kind="hard")
                    if run == "o":
                        break
                    i -= 1
            hist.append((k, cls))


def build_block_dag(c: Circuit, blocks: Sequence[CommBlock], schemes: Sequence[Scheme],
                    node_of: Sequence[int], lm: LatencyModel | None = None) -> BlockDag:
    lm = lm or LatencyModel()
    node_of = tuple(node_of)
    tasks: dict[int, Task] = {}
    starts = {b.span[0]: i for i, b in enumerate(blocks)}
    i = 0
    while i < len(c.gates):
        k = starts.get(i)
        if k is None:
            tasks[len(tasks)] = gate_task(c.gates[i], lm)
            i += 1
            continue
        b = blocks[k]
        gates = c.gates[b.span[0]:b.span[1] + 1]
        make = cat_task if schemes[k] is Scheme.CAT else tp_task
        tasks[len(tasks)] = make(b, gates, node_of[b.pivot], lm, k)
        i = b.span[1] + 1
    graph = nx.DiGraph()
    graph.add_nodes_from(tasks)
    _add_hard_edges(graph, list(tasks), tasks)
    # without alignment, TP blocks sharing a node complete in program order
    tps = [k for k, t in tasks.items() if t.kind == "tp"]
    for x in range(len(tps)):
        for y in range(x + 1, len(tps)):
            a, b = tps[x], tps[y]
            if set(tasks[a].nodes) & set(tasks[b].nodes) and not graph.has_edge(a, b):
                graph.add_edge(a, b, kind="serial")
    return BlockDag(graph, tasks, node_of, lm)


def align_tp(dag: BlockDag) -> BlockDag:
    out = dag.copy()
    out.graph.remove_edges_from([(u, v) for u, v, k in out.graph.edges(data="kind") if k == "serial"])
    return out


def _add_edge(g: nx.DiGraph, u: int, v: int, kind: str) -> None:
    if u == v:
        return
    if g.has_edge(u, v) and g.edges[u, v]["kind"] == "hard":
        return
    g.add_edge(u, v, kind=kind)


def fuse_tp(dag: BlockDag) -> BlockDag:
    """Chain consecutive same-pivot TP blocks so the pivot hops node to node before returning."""
    out = dag.copy()
    g = out.graph
    by_pivot: dict[int, list[int]] = {}
    for k in sorted(out.tasks, key=lambda k: out.tasks[k].order):
        if out.tasks[k].kind == "tp":
            by_pivot.setdefault(out.tasks[k].pivot, []).append(k)
    for pivot, ks in by_pivot.items():
        groups: list[list[int]] = [[ks[0]]]
        for k in ks[1:]:
            rep = groups[-1][0]
            data = g.get_edge_data(rep, k)
            if data is not None:
                g.remove_edge(rep, k)
            independent = not nx.has_path(g, rep, k) and not nx.has_path(g, k, rep)
            if data is not None:
                g.add_edge(rep, k, **data)
            if not independent:
                groups.append([k])
                continue
            groups[-1].append(k)
            # contract k into the chain node so later path checks see the merge
            for u in list(g.predecessors(k)):
                _add_edge(g, u, rep, g.edges[u, k]["kind"])
            for v in list(g.successors(k)):
                _add_edge(g, rep, v, g.edges[k, v]["kind"])
            g.remove_node(k)
        for grp in groups:
            if len(grp) < 2:
                continue
            members = [out.tasks[k] for k in grp]
            chain = chain_task(members, out.node_of[pivot], out.lm)
            out.elided += sum(t.epr for t in members) - chain.epr
            out.tasks[grp[0]] = chain
            for k in grp[1:]:
                del out.tasks[k]
    if not nx.is_directed_acyclic_graph(g):
        raise ScheduleError("fusion produced a cyclic dependency graph")
    return out


# calendars

class _QubitCalendar:
    def __init__(self):
        self.busy: dict[int, list[tuple[float, float]]] = {}

    def conflict(self, q: int, s: float, e: float) -> float | None:
        """End of the first busy interval overlapping [s, e), or None."""
        iv = self.busy.get(q)
        if not iv or e <= s:
            return None
        i = max(bisect.bisect_right(iv, (s, math.inf)) - 1, 0)
        while i < len(iv) and iv[i][0] < e:
            if iv[i][1] > s:
                return iv[i][1]
            i += 1
        return None

    def earliest(self, qs, t: float, dur: float) -> float:
        moved = True
        while moved:
            moved = False
            for q in qs:
                end = self.conflict(q, t, t + dur)
                if end is not None:
                    t, moved = end, True
        return t

    def add(self, q: int, s: float, e: float) -> None:
        if e > s:
            bisect.insort(self.busy.setdefault(q, []), (s, e))


class _CommCalendar:
    def __init__(self, cap: int):
        self.cap = cap
        self.claims: dict[int, list[list]] = {}
        self.open: dict[object, list] = {}

    def saturated_until(self, node: int, s: float, e: float, extra=()) -> float | None:
        """None if one more claim fits on [s, e); else the end of the last full stretch inside it.

        ``extra`` holds (start, end) claims of the task being placed.
        """
        pts = []
        for a, b, *_ in list(self.claims.get(node, ())) + list(extra):
            if a < e and b > s:
                pts += [(max(a, s), 1), (min(b, e), -1)]
        if len(pts) < 2 * self.cap:
            return None
        pts.sort()
        use, last = 0, None
        for i, (t, d) in enumerate(pts):
            use += d
            nxt = pts[i + 1][0] if i + 1 < len(pts) else e
            if use >= self.cap and nxt > t:
                last = nxt
        return last

    def add(self, node: int, s: float, e: float, key=None) -> list:
        rec = [s, e, key]
        self.claims.setdefault(node, []).append(rec)
        if key is not None:
            self.open[key] = rec
        return rec


@dataclass(frozen=True)
class Event:
    start: float
    duration: float
    kind: str
    nodes: tuple[int, ...]
    qubits: tuple[int, ...]
    task: int
    label: str = ""

    @property
    def end(self) -> float:
        return self.start + self.duration


@dataclass(frozen=True)
class ClaimRecord:
    node: int
    start: float
    end: float
    task: int


@dataclass
class Timeline:
    events: list[Event]
    claims: list[ClaimRecord]
    makespan: float
    num_nodes: int
    epr_pairs: int = 0

    def to_dict(self) -> dict:
        return {
            "makespan": self.makespan,
            "num_nodes": self.num_nodes,
            "epr_pairs": self.epr_pairs,
            "events": [{"start": e.start, "duration": e.duration, "kind": e.kind,
                        "nodes": list(e.nodes), "qubits": list(e.qubits), "task": e.task,
                        "label": e.label} for e in self.events],
            "claims": [{"node": c.node, "start": c.start, "end": c.end, "task": c.task}
                       for c in self.claims],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1)


def _layout(t: Task, hard: float, soft: float, lbs: dict[int, float], qcal: _QubitCalendar):
    """Phase times for one task; EPR pairs are prefetched to land when their consumer is ready."""
    n = len(t.phases)
    starts, ends = [0.0] * n, [0.0] * n
    feeds: dict[int, list[int]] = {}
    for i, ph in enumerate(t.phases):
        if ph.kind == "epr":
            feeds.setdefault(ph.consumer, []).append(i)
    cursor = hard
    for i, ph in enumerate(t.phases):
        if ph.kind == "epr":
            continue
        s = max(cursor, lbs.get(i, 0.0), soft if ph.soft else 0.0)
        for e in feeds.get(i, ()):
            ep = t.phases[e]
            es = max(0.0, s - ep.dur, lbs.get(e, 0.0), ends[ep.after] if ep.after >= 0 else 0.0)
            starts[e], ends[e] = es, es + ep.dur
            s = max(s, ends[e])
        s = qcal.earliest(ph.qubits, s, ph.dur)
        starts[i], ends[i] = s, s + ph.dur
        cursor = ends[i]
    return starts, ends


def _place(t: Task, hard: float, soft: float, qcal: _QubitCalendar, ccal: _CommCalendar):
    lbs: dict[int, float] = {}
    for _ in range(100000):
        starts, ends = _layout(t, hard, soft, lbs, qcal)
        bumped = False
        for q, a, b in t.holds:
            end = qcal.conflict(q, starts[a], ends[b])
            if end is not None:
                lbs[a] = max(lbs.get(a, 0.0), end)
                bumped = True
                break
        if bumped:
            continue
        own: dict[int, list[tuple[float, float]]] = {}
        for cl in t.claims:
            s = starts[cl.first]
            e = ends[cl.last] if cl.last >= 0 else math.inf
            clear = ccal.saturated_until(cl.node, s, e, own.get(cl.node, ()))
            own.setdefault(cl.node, []).append((s, e))
            if clear is not None:
                if clear == math.inf:
                    raise ScheduleError(f"node {cl.node} never frees a communication qubit")
                lbs[cl.first] = max(lbs.get(cl.first, 0.0), clear)
                bumped = True
                break
        if not bumped:
            return starts, ends
    raise ScheduleError("placement did not converge")


def _topo(dag: BlockDag) -> list[int]:
    g = dag.graph
    indeg = {k: g.in_degree(k) for k in g.nodes}
    heap = [(dag.tasks[k].order, k) for k, d in indeg.items() if d == 0]
    heapq.heapify(heap)
    out = []
    while heap:
        _, k = heapq.heappop(heap)
        out.append(k)
        for v in g.successors(k):
            indeg[v] -= 1
            if indeg[v] == 0:
                heapq.heappush(heap, (dag.tasks[v].order, v))
    if len(out) != g.number_of_nodes():
        raise ScheduleError("dependency graph has a cycle")
    return out


def schedule(dag: BlockDag, lm: LatencyModel | None = None, comm_capacity: int = COMM_PER_NODE) -> Timeline:
    lm = lm or dag.lm
    if lm != dag.lm:
        raise ScheduleError("dag was built for a different latency model")
    qcal, ccal = _QubitCalendar(), _CommCalendar(comm_capacity)
    finish: dict[int, float] = {}
    events: list[Event] = []
    claim_recs: list[tuple[int, int, list]] = []
    num_nodes = max(dag.node_of, default=-1) + 1
    for k in _topo(dag):
        t = dag.tasks[k]
        hard = soft = 0.0
        for u in dag.graph.predecessors(k):
            if dag.graph.edges[u, k]["kind"] == "hard":
                hard = max(hard, finish[u])
            else:
                soft = max(soft, finish[u])
        starts, ends = _place(t, hard, soft, qcal, ccal)
        # a teleported pivot is unavailable from its departure until it is back
        held = {q: (starts[a], ends[b]) for q, a, b in t.holds}
        for q, (s0, e0) in held.items():
            qcal.add(q, s0, e0)
        for i, ph in enumerate(t.phases):
            for q in ph.qubits:
                if q not in held:
                    qcal.add(q, starts[i], ends[i])
            events.append(Event(starts[i], ph.dur, ph.kind, ph.nodes, ph.qubits, k, t.label))
        for cl in t.claims:
            e = ends[cl.last] if cl.last >= 0 else math.inf
            key = cl.key if cl.last < 0 else None
            claim_recs.append((k, cl.node, ccal.add(cl.node, starts[cl.first], e, key)))
        for key, i in t.closes:
            rec = ccal.open.pop(key, None)
            if rec is None:
                raise ScheduleError(f"closing unknown claim {key!r}")
            rec[1] = ends[i]
        finish[k] = max(ends, default=hard)
    makespan = max((e.end for e in events), default=0.0)
    # visitors that never leave hold their communication qubit to the end
    for rec in ccal.open.values():
        rec[1] = max(makespan, rec[0])
    claims = [ClaimRecord(node, rec[0], rec[1], k) for k, node, rec in claim_recs]
    events.sort(key=lambda e: (e.start, e.task))
    return Timeline(events, claims, makespan, num_nodes, dag.epr_total())


def check_timeline(tl: Timeline, cap: int = COMM_PER_NODE, eps: float = 1e-9) -> None:
    """Raise ScheduleError if qubit exclusivity or communication capacity is violated."""
    per_q: dict[int, list[tuple[float, float]]] = {}
    for e in tl.events:
        if e.duration > 0:
            for q in e.qubits:
                per_q.setdefault(q, []).append((e.start, e.end))
    for q, iv in per_q.items():
        iv.sort()
        for (s0, e0), (s1, _) in zip(iv, iv[1:]):
            if s1 < e0 - eps:
                raise ScheduleError(f"qubit {q} double-booked at {s1}")
    per_n: dict[int, list[tuple[float, int]]] = {}
    for c in tl.claims:
        if c.end > c.start:
            per_n.setdefault(c.node, []).extend([(c.start, 1), (c.end, -1)])
    for node, pts in per_n.items():
        pts.sort(key=lambda x: (x[0], x[1]))
        use = 0
        for t, d in pts:
            use += d
            if use > cap:
                raise ScheduleError(f"node {node} uses {use} communication qubits at {t}")
