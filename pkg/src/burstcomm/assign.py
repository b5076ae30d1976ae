"""Pattern classification, Hadamard transform and Cat/TP scheme assignment."""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .aggregate import CommBlock
from .ir import DIAGONAL_1Q, XAXIS_1Q, Circuit, CircuitError, Gate, commutes


class Pattern(str, Enum):
    UNI_CONTROL_CLEAN = "UniControlClean"
    UNI_CONTROL_DIRTY = "UniControlDirty"
    UNI_TARGET = "UniTarget"
    BIDIRECTIONAL = "Bidirectional"


class Scheme(str, Enum):
    CAT = "cat"
    TP = "tp"

    @property
    def epr_cost(self) -> int:
        return 1 if self is Scheme.CAT else 2


class BlockError(ValueError):
    pass


def span_gates(b: CommBlock, c: Circuit) -> list[Gate]:
    return list(c.gates[b.span[0]:b.span[1] + 1])


def check_block(b: CommBlock, c: Circuit, node_of=None) -> None:
    """Raise BlockError unless ``b`` is a well-formed block of ``c``."""
    if not b.members:
        raise BlockError("empty block")
    if b.span != (b.members[0], b.members[-1]) or list(b.members) != sorted(b.members):
        raise BlockError(f"block span {b.span} does not match members")
    ids = set(b.members)
    for g in span_gates(b, c):
        if g.id in ids:
            if g.name != "cx" or b.pivot not in g.qubits:
                raise BlockError(f"member {g} is not a CX on pivot q{b.pivot}")
            if node_of is not None:
                other = g.qubits[1] if g.qubits[0] == b.pivot else g.qubits[0]
                if node_of[other] != b.node or node_of[b.pivot] == b.node:
                    raise BlockError(f"member {g} does not link q{b.pivot} to node {b.node}")
        elif b.pivot in g.qubits and not g.is_single_qubit:
            raise BlockError(f"non-member {g} on the pivot inside the block")
        elif node_of is not None and g.is_two_qubit and node_of[g.qubits[0]] != node_of[g.qubits[1]]:
            raise BlockError(f"foreign remote gate {g} inside the block")


def _roles(b: CommBlock, c: Circuit) -> list[str]:
    return ["control" if c.gates[m].qubits[0] == b.pivot else "target" for m in b.members]


def classify(b: CommBlock, c: Circuit) -> Pattern:
    check_block(b, c)
    roles = set(_roles(b, c))
    if roles == {"target"}:
        return Pattern.UNI_TARGET
    if roles != {"control"}:
        return Pattern.BIDIRECTIONAL
    members = [c.gates[m] for m in b.members]
    for g in span_gates(b, c):
        if g.id not in b.members and b.pivot in g.qubits:
            if not all(commutes(g, m) for m in members):
                return Pattern.UNI_CONTROL_DIRTY
    return Pattern.UNI_CONTROL_CLEAN


# H g H for pivot gates that have a one-gate image
_CONJ = {"x": "z", "z": "x", "rx": "rz", "rz": "rx", "h": "h"}


def _conjugate(g: Gate) -> list[Gate]:
    q = g.qubits
    if g.name in _CONJ:
        return [Gate(_CONJ[g.name], q, g.params)]
    if g.name == "y":
        return [g]
    if g.name == "ry":
        return [Gate("ry", q, (-g.params[0],))]
    return [Gate("h", q), g, Gate("h", q)]


def _cancel_h(gates: list[Gate]) -> list[Gate]:
    """Drop adjacent H pairs on the same qubit."""
    live = [True] * len(gates)
    stack: dict[int, list[int]] = {}
    for i, g in enumerate(gates):
        if g.name == "h":
            q = g.qubits[0]
            st = stack.setdefault(q, [])
            if st and gates[st[-1]].name == "h":
                live[st.pop()] = False
                live[i] = False
                continue
        for q in g.qubits:
            stack.setdefault(q, []).append(i)
    return [g for g, ok in zip(gates, live) if ok]


def transform_targets(c: Circuit, blocks: list[CommBlock]) -> tuple[Circuit, list[CommBlock]]:
    """Rewrite every UniTarget block so its pivot becomes the control; other blocks are carried over."""
    plan = {b.span[0]: b for b in blocks if classify(b, c) is Pattern.UNI_TARGET}
    starts = {b.span[0]: b for b in blocks}
    out: list[Gate] = []
    marks: list[tuple[CommBlock, list[int]]] = []   # block -> output indices of members
    i = 0
    n = len(c.gates)
    while i < n:
        b = starts.get(i)
        if b is None:
            out.append(c.gates[i])
            i += 1
            continue
        members = set(b.members)
        p = b.pivot
        if b.span[0] in plan:
            seg: list[Gate] = [Gate("h", (p,))]
            for g in c.gates[b.span[0]:b.span[1] + 1]:
                if g.id in members:
                    x = g.qubits[0]
                    seg += [Gate("h", (x,)), Gate("cx", (p, x), id=-2), Gate("h", (x,))]
                elif p in g.qubits:
                    seg += _conjugate(g)
                else:
                    seg.append(g)
            seg.append(Gate("h", (p,)))
            seg = _cancel_h(seg)
            idx = [len(out) + k for k, g in enumerate(seg) if g.id == -2]
        else:
            seg = list(c.gates[b.span[0]:b.span[1] + 1])
            idx = [len(out) + k for k, g in enumerate(seg) if g.id in members]
        marks.append((b, idx))
        out += seg
        i = b.span[1] + 1
    nc = c.renumbered(out)
    nb = [CommBlock(b.pivot, b.node, tuple(ix), (ix[0], ix[-1])) for b, ix in marks]
    nb.sort(key=lambda b: b.span)
    return nc, nb


def transform_target(b: CommBlock, c: Circuit) -> tuple[Circuit, CommBlock]:
    if classify(b, c) is not Pattern.UNI_TARGET:
        raise BlockError("transform_target needs a UniTarget block")
    nc, (nb,) = transform_targets(c, [b])
    return nc, nb


def assign(blocks: list[CommBlock], c: Circuit) -> list[Scheme]:
    out = []
    for b in blocks:
        pat = classify(b, c)
        if pat is Pattern.UNI_TARGET:
            raise BlockError("transform UniTarget blocks before assignment")
        out.append(Scheme.CAT if pat is Pattern.UNI_CONTROL_CLEAN else Scheme.TP)
    return out


def cat_only_cost(b: CommBlock, c: Circuit) -> int:
    """EPR pairs a Cat-only compiler spends on ``b``: one per unidirectional clean segment."""
    members = set(b.members)
    segs, role, broken = 0, None, False
    for g in span_gates(b, c):
        if g.id in members:
            r = "control" if g.qubits[0] == b.pivot else "target"
            if r != role or broken:
                segs += 1
                role, broken = r, False
        elif b.pivot in g.qubits and role is not None:
            ok = DIAGONAL_1Q if role == "control" else XAXIS_1Q
            if g.name not in ok:
                broken = True
    return segs


@dataclass(frozen=True)
class Assignment:
    circuit: Circuit
    blocks: list[CommBlock]
    schemes: list[Scheme]
    patterns: list[Pattern]          # before the Hadamard transform


def assign_all(c: Circuit, blocks: list[CommBlock], node_of=None) -> Assignment:
    for b in blocks:
        check_block(b, c, node_of)
    patterns = [classify(b, c) for b in blocks]
    nc, nb = transform_targets(c, blocks)
    return Assignment(nc, nb, assign(nb, nc), patterns)
