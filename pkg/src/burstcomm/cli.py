"""Command-line driver: ``burstcomm compile`` and ``burstcomm bench``."""
from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from concurrent.futures import ProcessPoolExecutor

from .baselines import baseline_cat, gp_tp
from .benchmarks import FAMILIES, BenchmarkSpec, canonical_bv_secret, generate
from .gantt import write_svg
from .ir import Circuit, CircuitError
from .latency import LatencyModel
from .partition import Partition, PartitionError, interaction_graph, partition
from .pipeline import Compiled, compile_autocomm
from .qasm import QasmError, parse_qasm
from .schedule import ScheduleError

log = logging.getLogger("burstcomm")

EXIT_USAGE, EXIT_PARSE, EXIT_INFEASIBLE, EXIT_VERIFY = 2, 3, 4, 5
STRATEGIES = ("autocomm", "baseline-cat", "gp-tp")
PARTITIONERS = ("static-oee", "contiguous", "round-robin")
VERIFY_MAX_QUBITS = 8


class UsageError(Exception):
    pass


def _edges(text: str) -> tuple[tuple[int, int], ...]:
    try:
        return tuple(tuple(int(x) for x in e.split("-")) for e in text.split(",") if e)
    except ValueError:
        raise UsageError(f"bad edge list {text!r}; expected e.g. 0-1,1-2") from None


def bench_spec(family: str, n: int, secret: str | None = None, edges: str | None = None,
               layers: int = 1, controls: int = 0) -> BenchmarkSpec:
    if family == "BV":
        if secret == "canonical":
            if n != 100:
                raise UsageError("the canonical BV secret needs --n 100")
            secret = canonical_bv_secret()
        secret = secret if secret is not None else "1" * (n - 1)
    es = _edges(edges) if edges else tuple((i, (i + 1) % n) for i in range(n))
    try:
        return BenchmarkSpec(family, n, edges=es if family == "QAOA" else (), layers=layers,
                             secret=secret or "", controls=controls)
    except CircuitError as e:
        raise UsageError(str(e)) from None


def load_latency_model(path: str | None) -> LatencyModel:
    if path is None:
        return LatencyModel()
    try:
        with open(path) as f:
            d = json.load(f)
        return LatencyModel(**{k: float(v) for k, v in d.items()})
    except (OSError, json.JSONDecodeError, TypeError, ValueError, AttributeError) as e:
        raise UsageError(f"bad latency model {path}: {e}") from None


def run_strategy(strategy: str, c: Circuit, p: Partition, lm: LatencyModel) -> Compiled:
    if strategy == "autocomm":
        return compile_autocomm(c, p, lm)
    if strategy == "baseline-cat":
        return baseline_cat(c, p, lm)
    return gp_tp(c, p, lm)


def report(r: Compiled, source: dict) -> dict:
    bs = r.burst_stats()
    blocks = []
    for i, b in enumerate(r.blocks):
        d = b.to_dict()
        d["scheme"] = r.schemes[i].value if i < len(r.schemes) else None
        d["pattern"] = r.patterns[i].value if i < len(r.patterns) else None
        blocks.append(d)
    return {
        "input": source,
        "partition": json.loads(r.partition.to_json()),
        "strategy": r.strategy,
        "metrics": r.metrics.to_dict(),
        "blocks": blocks,
        "timeline": r.timeline.to_dict()["events"],
        "burst_stats": {"loads": list(bs.loads),
                        "histogram": {repr(k): v for k, v in bs.histogram.items()},
                        "tail": list(bs.tail)},
    }


def dumps(d: dict) -> str:
    """Canonical report text: sorted keys, fixed indentation, trailing newline."""
    return json.dumps(d, sort_keys=True, indent=2) + "\n"


def _load(args) -> tuple[Circuit, dict]:
    if args.input:
        try:
            with open(args.input) as f:
                text = f.read()
        except OSError as e:
            raise UsageError(str(e)) from None
        c = parse_qasm(text)
        return c, {"kind": "qasm", "path": args.input, "num_qubits": c.num_qubits, "num_gates": len(c)}
    spec = bench_spec(args.bench, args.n, args.secret, args.edges, args.layers, args.controls)
    c = generate(spec)
    src = {"kind": "bench", "family": spec.family, "num_qubits": c.num_qubits, "num_gates": len(c)}
    if spec.family == "QAOA":
        src["edges"] = [list(e) for e in spec.edges]
        src["layers"] = spec.layers
    if spec.family == "BV":
        src["secret"] = spec.secret
    if spec.family == "MCTR":
        src["controls"] = spec.controls
    return c, src


def cmd_compile(args) -> int:
    if bool(args.input) == bool(args.bench):
        raise UsageError("give exactly one of --input or --bench")
    if args.bench and args.n is None:
        raise UsageError("--bench needs --n")
    lm = load_latency_model(args.latency_model)
    c, src = _load(args)
    cap = args.capacity or math.ceil(c.num_qubits / args.nodes)
    p = partition(interaction_graph(c), args.nodes, cap, args.partition)
    r = run_strategy(args.strategy, c, p, lm)
    if args.compare:
        base = r if args.strategy == "baseline-cat" else baseline_cat(c, p, lm)
        r.metrics.compare_to(base.metrics)
    if args.verify:
        if c.num_qubits > VERIFY_MAX_QUBITS:
            log.warning("skipping verification: %d qubits exceeds %d", c.num_qubits, VERIFY_MAX_QUBITS)
        else:
            from .verify import deferred_equivalent
            if not deferred_equivalent(r.protocol(), c):
                print("verification failed: compiled protocol differs from the input", file=sys.stderr)
                return EXIT_VERIFY
    with open(args.report, "w") as f:
        f.write(dumps(report(r, src)))
    if args.gantt:
        write_svg(r.timeline, args.gantt)
    m = r.metrics
    print(f"{r.strategy}: tot_comm={m.tot_comm} tp_comm={m.tp_comm} peak_rem_cx={m.peak_rem_cx:g} "
          f"latency={m.latency:g}" + (f" improv={m.improv_factor:.4g} lat_dec={m.lat_dec_factor:.4g}"
                                      if m.improv_factor is not None else ""))
    return 0


def _bench_one(item: tuple) -> dict:
    family, n, k, strategy, part = item
    c = generate(bench_spec(family, n))
    p = partition(interaction_graph(c), k, math.ceil(n / k), part)
    r = run_strategy(strategy, c, p, LatencyModel())
    r.metrics.compare_to(baseline_cat(c, p).metrics)
    return {"family": family, "n": n, "nodes": k, "strategy": strategy, "metrics": r.metrics.to_dict()}


def _instance(text: str) -> tuple[str, int, int]:
    try:
        fam, n, k = text.split(":")
        return fam.upper(), int(n), int(k)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected FAMILY:N:K, got {text!r}") from None


def cmd_bench(args) -> int:
    items = [(f, n, k, args.strategy, args.partition) for f, n, k in args.instances]
    if args.jobs > 1:
        with ProcessPoolExecutor(args.jobs) as ex:
            rows = list(ex.map(_bench_one, items))
    else:
        rows = [_bench_one(i) for i in items]
    sys.stdout.write(dumps({"results": rows}))
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="burstcomm", description="Burst-communication compiler for distributed quantum programs.")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    c = sub.add_parser("compile", help="compile one program")
    c.add_argument("--input", help="OpenQASM 2.0 file")
    c.add_argument("--bench", choices=FAMILIES, help="generate a benchmark instead of reading a file")
    c.add_argument("--n", type=int, help="benchmark qubit count")
    c.add_argument("--secret", help="BV secret bitstring, or 'canonical' (n=100)")
    c.add_argument("--edges", help="QAOA edges as 0-1,1-2,... (default: ring)")
    c.add_argument("--layers", type=int, default=1)
    c.add_argument("--controls", type=int, default=0, help="MCTR control count")
    c.add_argument("--nodes", type=int, required=True)
    c.add_argument("--capacity", type=int)
    c.add_argument("--partition", choices=PARTITIONERS, default="static-oee")
    c.add_argument("--strategy", choices=STRATEGIES, default="autocomm")
    c.add_argument("--compare", action="store_true", help="fill relative factors against baseline-cat")
    c.add_argument("--verify", action="store_true", help="simulate and check equivalence (<= 8 qubits)")
    c.add_argument("--latency-model", help="JSON file with t_1q, t_2q, t_ms, t_ep, t_cb")
    c.add_argument("--report", required=True)
    c.add_argument("--gantt")
    c.set_defaults(func=cmd_compile)

    b = sub.add_parser("bench", help="run several generated instances, optionally in parallel")
    b.add_argument("instances", nargs="+", type=_instance, metavar="FAMILY:N:K")
    b.add_argument("--strategy", choices=STRATEGIES, default="autocomm")
    b.add_argument("--partition", choices=PARTITIONERS, default="static-oee")
    b.add_argument("--jobs", type=int, default=1)
    b.set_defaults(func=cmd_bench)
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except UsageError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except QasmError as e:
        print(f"parse error: {e}", file=sys.stderr)
        return EXIT_PARSE
    except (PartitionError, ScheduleError) as e:
        print(f"infeasible: {e}", file=sys.stderr)
        return EXIT_INFEASIBLE


if __name__ == "__main__":
    sys.exit(main())
