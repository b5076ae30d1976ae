"""OpenQASM 2.0 subset reader and writer."""
from __future__ import annotations

import ast
import math
import operator
import re

from .ir import GATE_SPECS, Circuit, Gate


class QasmError(ValueError):
    def __init__(self, msg: str, line: int = 0, col: int = 0):
        self.line, self.col = line, col
        super().__init__(f"{msg} (line {line}, column {col})" if line else msg)


class QasmSyntaxError(QasmError):
    pass


class UnsupportedStatement(QasmError):
    pass


class QubitRangeError(QasmError):
    pass


_BINOPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul,
           ast.Div: operator.truediv, ast.Pow: operator.pow}


def _eval_angle(expr: str) -> float:
    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            return float(node.value)
        if isinstance(node, ast.Name) and node.id == "pi":
            return math.pi
        if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            return _BINOPS[type(node.op)](ev(node.left), ev(node.right))
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            v = ev(node.operand)
            return -v if isinstance(node.op, ast.USub) else v
        raise ValueError(expr)
    return ev(ast.parse(expr.strip().replace("^", "**"), mode="eval"))


_COMMENT = re.compile(r"//[^\n]*")
_HEADER = re.compile(r"OPENQASM\s+(\d+)\.(\d+)$")
_INCLUDE = re.compile(r'include\s+"([^"]+)"$')
_REG = re.compile(r"(qreg|creg)\s+([A-Za-z_]\w*)\s*\[\s*(\d+)\s*\]$")
_MEASURE = re.compile(r"measure\s+(.+?)\s*->\s*(.+)$")
_GATE = re.compile(r"([A-Za-z_]\w*)\s*(?:\(([^)]*)\))?\s*(.*)$", re.S)
_ARG = re.compile(r"([A-Za-z_]\w*)\s*(?:\[\s*(\d+)\s*\])?$")


def _statements(text: str):
    """Yield (statement, line, col) for each ';'-terminated statement."""
    text = _COMMENT.sub(lambda m: " " * len(m.group()), text)
    start = 0
    for i, ch in enumerate(text):
        if ch == ";":
            raw = text[start:i]
            stripped = raw.lstrip()
            off = start + len(raw) - len(stripped)
            if stripped.strip():
                line = text.count("\n", 0, off) + 1
                col = off - (text.rfind("\n", 0, off) + 1) + 1
                yield " ".join(stripped.split()), line, col
            start = i + 1
    rest = text[start:]
    if rest.strip():
        off = start + len(rest) - len(rest.lstrip())
        line = text.count("\n", 0, off) + 1
        col = off - (text.rfind("\n", 0, off) + 1) + 1
        raise QasmSyntaxError("missing ';'", line, col)


def parse_qasm(text: str) -> Circuit:
    qregs: dict[str, tuple[int, int]] = {}
    cregs: dict[str, int] = {}
    names: list[str] = []
    ops: list[tuple] = []

    def resolve(arg: str, line: int, col: int) -> list[int]:
        m = _ARG.match(arg.strip())
        if not m:
            raise QasmSyntaxError(f"bad operand {arg!r}", line, col)
        reg, idx = m.group(1), m.group(2)
        if reg not in qregs:
            raise QasmSyntaxError(f"unknown quantum register {reg!r}", line, col)
        base, size = qregs[reg]
        if idx is None:
            return [base + i for i in range(size)]
        if int(idx) >= size:
            raise QubitRangeError(f"{reg}[{idx}] out of range for size {size}", line, col)
        return [base + int(idx)]

    for stmt, line, col in _statements(text):
        if _HEADER.match(stmt):
            if not stmt.endswith("2.0") and _HEADER.match(stmt).group(1) != "2":
                raise UnsupportedStatement(f"unsupported version in {stmt!r}", line, col)
            continue
        if _INCLUDE.match(stmt):
            continue
        m = _REG.match(stmt)
        if m:
            kind, reg, size = m.group(1), m.group(2), int(m.group(3))
            if reg in qregs or reg in cregs:
                raise QasmSyntaxError(f"register {reg!r} redeclared", line, col)
            if kind == "qreg":
                qregs[reg] = (len(names), size)
                names += [f"{reg}[{i}]" for i in range(size)]
            else:
                cregs[reg] = size
            continue
        m = _MEASURE.match(stmt)
        if m:
            qs = resolve(m.group(1), line, col)
            cm = _ARG.match(m.group(2).strip())
            if not cm or cm.group(1) not in cregs:
                raise QasmSyntaxError(f"bad measurement target {m.group(2)!r}", line, col)
            if cm.group(2) is not None and int(cm.group(2)) >= cregs[cm.group(1)]:
                raise QubitRangeError(f"classical bit {m.group(2)} out of range", line, col)
            ops += [("measure", (q,)) for q in qs]
            continue
        m = _GATE.match(stmt)
        if not m:
            raise QasmSyntaxError(f"cannot parse {stmt!r}", line, col)
        name, params, args = m.group(1), m.group(2), m.group(3)
        if name in ("gate", "opaque", "if", "reset", "OPENQASM", "include"):
            raise UnsupportedStatement(f"unsupported statement {name!r}", line, col)
        if name != "barrier" and name not in GATE_SPECS:
            raise UnsupportedStatement(f"unsupported gate {name!r}", line, col)
        angles: tuple[float, ...] = ()
        if params is not None and params.strip():
            try:
                angles = tuple(_eval_angle(p) for p in params.split(","))
            except (ValueError, SyntaxError, ZeroDivisionError):
                raise QasmSyntaxError(f"bad parameter list ({params})", line, col) from None
        if not args.strip():
            raise QasmSyntaxError(f"{name} without operands", line, col)
        operands = [resolve(a, line, col) for a in args.split(",")]
        if name == "barrier":
            ops.append(("barrier", tuple(q for grp in operands for q in grp)))
            continue
        arity, nparams = GATE_SPECS[name]
        if len(angles) != nparams:
            raise QasmSyntaxError(f"{name} takes {nparams} parameters, got {len(angles)}", line, col)
        if len(operands) != arity:
            raise QasmSyntaxError(f"{name} takes {arity} operands, got {len(operands)}", line, col)
        width = max(len(o) for o in operands)
        if any(len(o) not in (1, width) for o in operands):
            raise QasmSyntaxError("register size mismatch in broadcast", line, col)
        for k in range(width):
            qs = tuple(o[k] if len(o) > 1 else o[0] for o in operands)
            if len(set(qs)) != len(qs):
                raise QasmSyntaxError(f"repeated operand in {name}", line, col)
            ops.append((name, qs, angles))
    if not qregs:
        raise QasmSyntaxError("no qreg declared")
    return Circuit.build(len(names), ops, names)


def _registers(c: Circuit) -> list[tuple[str, int]]:
    regs: list[tuple[str, int]] = []
    for i, nm in enumerate(c.qubit_names):
        m = re.fullmatch(r"([A-Za-z_]\w*)\[(\d+)\]", nm)
        if not m:
            return [("q", c.num_qubits)]
        reg, idx = m.group(1), int(m.group(2))
        if regs and regs[-1][0] == reg and regs[-1][1] == idx:
            regs[-1] = (reg, idx + 1)
        elif idx == 0 and all(r != reg for r, _ in regs):
            regs.append((reg, 1))
        else:
            return [("q", c.num_qubits)]
    return regs


def emit_qasm(c: Circuit) -> str:
    """Write ``c`` as OpenQASM 2.0, one statement per line."""
    regs = _registers(c)
    if regs == [("q", c.num_qubits)] and c.qubit_names != tuple(f"q[{i}]" for i in range(c.num_qubits)):
        names = [f"q[{i}]" for i in range(c.num_qubits)]
    else:
        names = list(c.qubit_names)
    lines = ["OPENQASM 2.0;", 'include "qelib1.inc";']
    lines += [f"qreg {r}[{n}];" for r, n in regs]
    if any(g.name == "measure" for g in c.gates):
        lines.append(f"creg c[{c.num_qubits}];")
    for g in c.gates:
        if g.name == "measure":
            q = g.qubits[0]
            lines.append(f"measure {names[q]} -> c[{q}];")
            continue
        p = f"({','.join(repr(x) for x in g.params)})" if g.params else ""
        lines.append(f"{g.name}{p} " + ",".join(names[q] for q in g.qubits) + ";")
    return "\n".join(lines) + "\n"
