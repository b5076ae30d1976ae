"""End-to-end compilation: aggregate, assign, schedule, and the metrics derived from it."""
from __future__ import annotations

from dataclasses import dataclass, field

from .aggregate import BurstStats, CommBlock, aggregate, burst_stats
from .assign import Pattern, Scheme, assign_all, cat_only_cost
from .expand import expand_program
from .ir import Circuit, decompose_to_basis
from .latency import LatencyModel
from .partition import Partition, remote_cx_count
from .protocol import ProtocolCircuit
from .schedule import BlockDag, Timeline, align_tp, build_block_dag, fuse_tp, schedule


@dataclass
class Metrics:
    tot_comm: int
    tp_comm: int
    peak_rem_cx: float
    latency: float
    remote_cx: int
    improv_factor: float | None = None
    lat_dec_factor: float | None = None

    def compare_to(self, base: "Metrics") -> "Metrics":
        self.improv_factor = base.tot_comm / self.tot_comm if self.tot_comm else 1.0
        self.lat_dec_factor = base.latency / self.latency if self.latency else 1.0
        return self

    def to_dict(self) -> dict:
        return {"tot_comm": self.tot_comm, "tp_comm": self.tp_comm, "peak_rem_cx": self.peak_rem_cx,
                "latency": round(self.latency, 9), "remote_cx": self.remote_cx,
                "improv_factor": self.improv_factor, "lat_dec_factor": self.lat_dec_factor}


@dataclass
class Compiled:
    strategy: str
    source: Circuit
    circuit: Circuit
    partition: Partition
    timeline: Timeline
    metrics: Metrics
    blocks: list[CommBlock] = field(default_factory=list)
    schemes: list[Scheme] = field(default_factory=list)
    patterns: list[Pattern] = field(default_factory=list)
    dag: BlockDag | None = None
    plan: list = field(default_factory=list)

    def protocol(self) -> ProtocolCircuit:
        if self.strategy == "gp-tp":
            from .baselines import gp_tp_protocol
            return gp_tp_protocol(self)
        chains = self.dag.chains() if self.dag is not None else ()
        return expand_program(self.circuit, self.blocks, self.schemes, self.partition.node_of,
                              self.partition.num_nodes, chains)

    def burst_stats(self) -> BurstStats:
        return burst_stats(self.blocks, [s.value for s in self.schemes])


def block_metrics(c: Circuit, p: Partition, blocks, schemes, dag: BlockDag, tl: Timeline) -> Metrics:
    tp_epr = sum(t.epr for t in dag.tasks.values() if t.kind in ("tp", "chain"))
    loads = [len(b) / 2 if s is Scheme.TP else float(len(b)) for b, s in zip(blocks, schemes)]
    return Metrics(dag.epr_total(), tp_epr, max(loads, default=0.0), tl.makespan, remote_cx_count(c, p))


def compile_autocomm(c: Circuit, p: Partition, lm: LatencyModel | None = None,
                     align: bool = True, fuse: bool = True) -> Compiled:
    lm = lm or LatencyModel()
    base = decompose_to_basis(c)
    rewritten, blocks = aggregate(base, p)
    a = assign_all(rewritten, blocks, p.node_of)
    dag = build_block_dag(a.circuit, a.blocks, a.schemes, p.node_of, lm)
    if fuse:
        dag = fuse_tp(dag)
    if align:
        dag = align_tp(dag)
    tl = schedule(dag, lm)
    m = block_metrics(base, p, a.blocks, a.schemes, dag, tl)
    return Compiled("autocomm", c, a.circuit, p, tl, m, a.blocks, a.schemes, a.patterns, dag)


def cat_only_comm(c: Circuit, p: Partition) -> int:
    """Tot Comm of the same block cover when only Cat-Comm is available."""
    rewritten, blocks = aggregate(decompose_to_basis(c), p)
    return sum(cat_only_cost(b, rewritten) for b in blocks)
