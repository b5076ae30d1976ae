"""Burst block discovery: pair ranking, preprocessing, linear merge and iterative refinement."""
from __future__ import annotations

import logging
import math
from collections import Counter, defaultdict
from dataclasses import dataclass

from .ir import Circuit, CircuitError, Gate, commutes, in_basis
from .partition import Partition

log = logging.getLogger(__name__)

MAX_SWEEPS = 10


@dataclass(frozen=True)
class CommBlock:
    pivot: int
    node: int
    members: tuple[int, ...]
    span: tuple[int, int]

    def __len__(self):
        return len(self.members)

    def to_dict(self) -> dict:
        return {"pivot": self.pivot, "node": self.node, "members": list(self.members),
                "span": list(self.span)}


@dataclass
class _Blk:
    pivot: int
    node: int
    members: list[int]


class _State:
    """Mutable gate order plus block ownership, keyed by original gate ids."""

    def __init__(self, c: Circuit, p: Partition):
        if not in_basis(c):
            raise CircuitError("aggregate expects a CX + single-qubit circuit")
        if p.num_qubits != c.num_qubits:
            raise CircuitError("partition does not match circuit width")
        self.c = c
        self.node_of = p.node_of
        self.order: list[Gate] = list(c.gates)
        self.pos = {g.id: i for i, g in enumerate(self.order)}
        self.owner: dict[int, int] = {}
        self.blocks: dict[int, _Blk] = {}
        self._next = 0

    def remote(self, g: Gate) -> bool:
        return g.is_two_qubit and self.node_of[g.qubits[0]] != self.node_of[g.qubits[1]]

    def pair_gate(self, g: Gate, q: int, node: int) -> bool:
        if not self.remote(g) or q not in g.qubits:
            return False
        other = g.qubits[1] if g.qubits[0] == q else g.qubits[0]
        return self.node_of[other] == node

    def add_block(self, q: int, node: int, members: list[int]) -> int:
        k = self._next
        self._next += 1
        self.blocks[k] = _Blk(q, node, members)
        for m in members:
            self.owner[m] = k
        return k

    def drop_block(self, k: int) -> None:
        for m in self.blocks.pop(k).members:
            del self.owner[m]

    def span(self, k: int) -> tuple[int, int]:
        b = self.blocks[k]
        return self.pos[b.members[0]], self.pos[b.members[-1]]

    def pair_blocks(self, q: int, node: int) -> list[int]:
        ks = [k for k, b in self.blocks.items() if b.pivot == q and b.node == node]
        return sorted(ks, key=lambda k: self.pos[self.blocks[k].members[0]])

    # preprocessing
    def runs(self, q: int, node: int) -> list[list[int]]:
        """Maximal runs of unclaimed pair gates, broken by foreign remote gates and pivot traffic."""
        runs: list[list[int]] = []
        cur: list[int] | None = None
        for g in self.order:
            if g.id not in self.owner and self.pair_gate(g, q, node):
                if cur is None:
                    cur = []
                    runs.append(cur)
                cur.append(g.id)
            elif g.name == "barrier" or q in g.qubits or self.remote(g):
                cur = None
        return runs

    # merging
    def _units(self, lo: int, hi: int, skip: tuple[int, int]) -> list[tuple[list[Gate], bool]] | None:
        """Split order[lo:hi] into movable units; foreign blocks move whole. Returns (gates, hard)."""
        pivot = self.blocks[skip[0]].pivot
        units = []
        i = lo
        while i < hi:
            g = self.order[i]
            k = self.owner.get(g.id)
            if k is not None and k not in skip:
                j = self.pos[self.blocks[k].members[-1]]
                if j >= hi:
                    return None
                units.append((self.order[i:j + 1], True))
                i = j + 1
                continue
            hard = (g.name in ("measure", "barrier") or self.remote(g)
                    or (g.is_two_qubit and pivot in g.qubits))
            units.append(([g], hard))
            i += 1
        return units

    @staticmethod
    def _commutes_all(gates: list[Gate], idx: dict[int, list[Gate]]) -> bool:
        for g in gates:
            for q in g.qubits:
                for h in idx.get(q, ()):
                    if not commutes(g, h):
                        return False
        return True

    @staticmethod
    def _index(idx: dict[int, list[Gate]], gates: list[Gate]) -> None:
        for g in gates:
            for q in g.qubits:
                idx[q].append(g)

    def try_merge(self, kx: int, ky: int) -> bool:
        s1, e1 = self.span(kx)
        s2, e2 = self.span(ky)
        a, b = self.order[s1:e1 + 1], self.order[s2:e2 + 1]
        units = self._units(e1 + 1, s2, (kx, ky))
        if units is None:
            return False
        # forward: hoist what commutes with the block and everything kept so far
        left: list[Gate] = []
        kept: list[tuple[list[Gate], bool]] = []
        idx: dict[int, list[Gate]] = defaultdict(list)
        self._index(idx, a)
        for u in units:
            if self._commutes_all(u[0], idx):
                left += u[0]
            else:
                kept.append(u)
                self._index(idx, u[0])
        right: list[Gate] = []
        if any(hard for _, hard in kept):
            # reverse: push the stuck units past the next block
            stay: list[tuple[list[Gate], bool]] = []
            idx = defaultdict(list)
            self._index(idx, b)
            for u in reversed(kept):
                if self._commutes_all(u[0], idx):
                    right = u[0] + right
                else:
                    stay.insert(0, u)
                    self._index(idx, u[0])
            if any(hard for _, hard in stay):
                return False
            kept = stay
        middle = [g for u in kept for g in u[0]]
        new = left + a + middle + b + right
        self.order[s1:e2 + 1] = new
        for i, g in enumerate(new, s1):
            self.pos[g.id] = i
        by, bx = self.blocks[ky], self.blocks[kx]
        members = bx.members + by.members
        self.drop_block(ky)
        bx.members = members
        for m in by.members:
            self.owner[m] = kx
        return True

    def linear_merge(self, ks: list[int]) -> list[int]:
        out = [ks[0]] if ks else []
        for k in ks[1:]:
            if not self.try_merge(out[-1], k):
                out.append(k)
        return out

    def measure(self) -> tuple[int, int]:
        total = 0
        for k in self.blocks:
            s, e = self.span(k)
            total += e - s + 1
        return len(self.blocks), total


def _pair_counts(st: _State, unclaimed_only: bool) -> Counter:
    cnt: Counter = Counter()
    for g in st.order:
        if st.remote(g) and not (unclaimed_only and g.id in st.owner):
            a, b = g.qubits
            cnt[(a, st.node_of[b])] += 1
            cnt[(b, st.node_of[a])] += 1
    return cnt


def rank_pairs(c: Circuit, p: Partition) -> list[tuple[int, int, int]]:
    """(qubit, node, remote CX count), most remote gates first."""
    cnt = _pair_counts(_State(c, p), False)
    return [(q, n, k) for (q, n), k in sorted(cnt.items(), key=lambda kv: (-kv[1], kv[0]))]


def _export(st: _State, keys=None) -> tuple[Circuit, list[CommBlock]]:
    c = st.c.renumbered(st.order)
    blocks = []
    for k in (st.blocks if keys is None else keys):
        b = st.blocks[k]
        mem = tuple(sorted(st.pos[m] for m in b.members))
        blocks.append(CommBlock(b.pivot, b.node, mem, (mem[0], mem[-1])))
    blocks.sort(key=lambda b: b.span)
    return c, blocks


def preprocess(c: Circuit, p: Partition, pair: tuple[int, int]) -> list[CommBlock]:
    st = _State(c, p)
    q, node = pair
    return [CommBlock(q, node, tuple(r), (r[0], r[-1])) for r in st.runs(q, node)]


def linear_merge(blocks: list[CommBlock], c: Circuit, p: Partition) -> tuple[Circuit, list[CommBlock]]:
    """Merge position-ordered blocks of one pair; returns the reordered circuit and the merged blocks."""
    st = _State(c, p)
    ks = [st.add_block(b.pivot, b.node, list(b.members)) for b in blocks]
    return _export(st, st.linear_merge(ks))


def aggregate(c: Circuit, p: Partition, refine: int = MAX_SWEEPS) -> tuple[Circuit, list[CommBlock]]:
    """Block cover of all remote CX; ``refine`` caps the refinement sweeps after the first pass."""
    st = _State(c, p)
    # first sweep: pairs in order of unclaimed remote gates
    while True:
        cnt = _pair_counts(st, True)
        if not cnt:
            break
        (q, node), _ = min(cnt.items(), key=lambda kv: (-kv[1], kv[0]))
        ks = [st.add_block(q, node, r) for r in st.runs(q, node)]
        st.linear_merge(ks)
    before = st.measure()
    for sweep in range(refine):
        pairs = Counter()
        for b in st.blocks.values():
            pairs[(b.pivot, b.node)] += len(b.members)
        for (q, node), _ in sorted(pairs.items(), key=lambda kv: (-kv[1], kv[0])):
            ks = st.pair_blocks(q, node)
            if len(ks) > 1:
                st.linear_merge(ks)
        after = st.measure()
        if after == before:
            break
        before = after
    else:
        if refine:
            log.warning("block refinement did not converge after %d sweeps", refine)
    return _export(st)


@dataclass(frozen=True)
class BurstStats:
    loads: tuple[float, ...]
    histogram: dict[float, int]
    tail: tuple[float, ...]          # tail[x - 1] = Pr[load >= x]

    def pr_at_least(self, x: float) -> float:
        if not self.loads:
            return 0.0
        return sum(1 for v in self.loads if v >= x) / len(self.loads)


def burst_stats(blocks: list[CommBlock], schemes) -> BurstStats:
    """Remote CX carried per communication; a TP block's load is split over its two teleports."""
    loads: list[float] = []
    for b, s in zip(blocks, schemes):
        if s == "tp":
            loads += [len(b) / 2] * 2
        else:
            loads.append(float(len(b)))
    hist = dict(sorted(Counter(loads).items()))
    top = math.ceil(max(loads)) if loads else 0
    n = len(loads)
    tail = tuple(sum(1 for v in loads if v >= x) / n for x in range(1, top + 1))
    return BurstStats(tuple(loads), hist, tail)
