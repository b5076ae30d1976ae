"""Qubit-to-node partitioning."""
from __future__ import annotations

import json
import math
from collections import Counter
from dataclasses import dataclass

import numpy as np

from .ir import Circuit


class PartitionError(ValueError):
    pass


@dataclass(frozen=True)
class InteractionGraph:
    num_qubits: int
    weights: dict[tuple[int, int], int]

    def weight(self, u: int, v: int) -> int:
        return self.weights.get((min(u, v), max(u, v)), 0)

    def matrix(self) -> np.ndarray:
        w = np.zeros((self.num_qubits, self.num_qubits), dtype=np.int64)
        for (u, v), x in self.weights.items():
            w[u, v] = w[v, u] = x
        return w


@dataclass(frozen=True)
class Partition:
    node_of: tuple[int, ...]
    num_nodes: int
    capacity: int

    def __post_init__(self):
        if any(not 0 <= n < self.num_nodes for n in self.node_of):
            raise PartitionError("node id out of range")
        load = Counter(self.node_of)
        if load and max(load.values()) > self.capacity:
            raise PartitionError("node over capacity")

    @property
    def num_qubits(self) -> int:
        return len(self.node_of)

    def qubits_on(self, node: int) -> list[int]:
        return [q for q, n in enumerate(self.node_of) if n == node]

    def is_remote(self, a: int, b: int) -> bool:
        return self.node_of[a] != self.node_of[b]

    def to_json(self) -> str:
        return json.dumps({"num_nodes": self.num_nodes, "capacity": self.capacity,
                           "node_of": list(self.node_of)})

    @classmethod
    def from_json(cls, text: str) -> "Partition":
        d = json.loads(text)
        try:
            return cls(tuple(int(x) for x in d["node_of"]), int(d["num_nodes"]), int(d["capacity"]))
        except (KeyError, TypeError) as e:
            raise PartitionError(f"bad partition JSON: {e}") from None


def interaction_graph(c: Circuit) -> InteractionGraph:
    w: Counter = Counter()
    for g in c.gates:
        if g.is_two_qubit:
            a, b = g.qubits
            w[(min(a, b), max(a, b))] += 1
    return InteractionGraph(c.num_qubits, dict(w))


def cut_weight(g: InteractionGraph, p: Partition) -> int:
    return sum(x for (u, v), x in g.weights.items() if p.node_of[u] != p.node_of[v])


def remote_cx_count(c: Circuit, p: Partition) -> int:
    return sum(1 for g in c.gates if g.is_two_qubit and p.is_remote(*g.qubits))


def _check(n: int, k: int, t: int) -> None:
    if k < 1 or t < 1 or k * t < n:
        raise PartitionError(f"{n} qubits do not fit on {k} nodes of capacity {t}")


def contiguous(n: int, k: int, t: int) -> Partition:
    _check(n, k, t)
    return Partition(tuple(i // t for i in range(n)), k, t)


def round_robin(n: int, k: int, t: int) -> Partition:
    _check(n, k, t)
    if math.ceil(n / k) > t:
        raise PartitionError("round-robin exceeds capacity")
    return Partition(tuple(i % k for i in range(n)), k, t)


_NEVER = np.iinfo(np.int64).min


def static_oee(g: InteractionGraph, k: int, t: int) -> Partition:
    """Contiguous start, then greedy best pair exchange or single move until no gain."""
    n = g.num_qubits
    _check(n, k, t)
    node = np.array([i // t for i in range(n)])
    if k == 1 or not g.weights:
        return Partition(tuple(int(x) for x in node), k, t)
    w = g.matrix()
    while True:
        onehot = np.zeros((n, k), dtype=np.int64)
        onehot[np.arange(n), node] = 1
        d = w @ onehot                                # d[q, j]: weight from q into node j
        own = d[np.arange(n), node]
        # swap gain of q <-> r: d[q,node r] - own[q] + d[r,node q] - own[r] - 2 w[q,r]
        dq_r = d[:, node]                             # [q, r] -> d[q, node[r]]
        swap = dq_r + dq_r.T - own[:, None] - own[None, :] - 2 * w
        swap[node[:, None] == node[None, :]] = _NEVER
        swap[np.tril_indices(n)] = _NEVER
        best_swap = swap.max()
        load = np.bincount(node, minlength=k)
        move = d - own[:, None]
        move[:, load >= t] = _NEVER
        move[np.arange(n), node] = _NEVER
        best_move = move.max()
        if max(best_swap, best_move) <= 0:
            break
        if best_swap >= best_move:
            q, r = np.unravel_index(int(np.argmax(swap)), swap.shape)
            node[q], node[r] = node[r], node[q]
        else:
            q, j = np.unravel_index(int(np.argmax(move)), move.shape)
            node[q] = j
    return Partition(tuple(int(x) for x in node), k, t)


STRATEGIES = ("static-oee", "contiguous", "round-robin")


def partition(g: InteractionGraph, k: int, t: int, strategy: str = "static-oee") -> Partition:
    if strategy == "static-oee":
        return static_oee(g, k, t)
    if strategy == "contiguous":
        return contiguous(g.num_qubits, k, t)
    if strategy == "round-robin":
        return round_robin(g.num_qubits, k, t)
    raise PartitionError(f"unknown partition strategy {strategy!r}")
