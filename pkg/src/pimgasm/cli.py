"""Command-line surface: assemble reads, generate workloads, sweep, verify.

Exit codes: 0 success, 1 self-check failure, 2 parse error, 3 capacity
error, 4 configuration error.
"""

from __future__ import annotations

import argparse
import logging
import random
import sys
from dataclasses import dataclass, replace

from . import perf, seqio
from .assembly import Assembler
from .errors import (
    CapacityError,
    ConfigError,
    ConsistencyError,
    ParseError,
    ShapeError,
    SimError,
    SizeError,
    StateError,
)
from .fabric import AND3_CFG, MAJ_CFG, OR3_CFG, XOR3_CFG, RowLayout, SubArray
from .trace import OpTrace

log = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_SELFCHECK = 1
EXIT_PARSE = 2
EXIT_CAPACITY = 3
EXIT_CONFIG = 4


@dataclass(frozen=True)
class RunSpec:
    """One reproducible run: inputs, geometry, knobs, and output prefix."""

    input: str | None
    k: int
    rows: int
    cols: int
    pd: int
    cost_config: str | None
    seed: int
    simplify: bool
    out: str

    def __post_init__(self):
        if not 2 <= self.k <= 128:
            raise ConfigError(f"k must lie in [2, 128], got {self.k}")
        if self.pd < 1:
            raise ConfigError(f"parallelism degree must be >= 1, got {self.pd}")
        if self.rows < 16 or self.cols < 8:
            raise ConfigError("sub-array geometry too small to be useful")


def _spec_from_args(args) -> RunSpec:
    return RunSpec(
        input=getattr(args, "input", None),
        k=args.k,
        rows=args.rows,
        cols=args.cols,
        pd=args.pd,
        cost_config=args.cost_config,
        seed=args.seed,
        simplify=args.simplify,
        out=args.out,
    )


def _load_cost_config(spec: RunSpec) -> perf.CostConfig:
    if spec.cost_config:
        return perf.CostConfig.from_json(spec.cost_config)
    return perf.calibrated_config()


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--cost-config", default=None, help="JSON cost table (default: packaged calibration)")
    p.add_argument("--rows", type=int, default=1024, help="sub-array rows")
    p.add_argument("--cols", type=int, default=256, help="sub-array bit-line columns")
    p.add_argument("--pd", type=int, default=1, help="parallelism degree for reporting")
    p.add_argument("--k", type=int, default=25, help="k-mer length")
    p.add_argument("--seed", type=int, default=0, help="RNG / hash seed")
    p.add_argument("--simplify", action="store_true", help="merge unbranched graph chains")
    p.add_argument("--out", default="pimgasm", help="output path prefix")


def cmd_assemble(args) -> int:
    spec = _spec_from_args(args)
    cfg = _load_cost_config(spec)
    records = seqio.read_sequences(spec.input)
    reads, dropped = seqio.encode_records(records)
    if dropped:
        log.warning("dropped %d non-ACGT symbols (reads split at each)", dropped)
    asm = Assembler(
        rows=spec.rows, cols=spec.cols, seed=spec.seed, simplify=spec.simplify
    )
    result = asm.assemble(reads, spec.k)
    for w in result.warnings:
        print(f"warning: {w}", file=sys.stderr)
    contigs = [(f"contig_{i}", c.to_str()) for i, c in enumerate(result.contigs)]
    seqio.write_fasta(f"{spec.out}.contigs.fasta", contigs)
    report = replace(perf.account(asm.trace, cfg), pd=spec.pd)
    report.to_json(f"{spec.out}.report.json")
    asm.trace.write_csv(f"{spec.out}.trace.csv")
    if args.dump_kmers:
        result.table.dump_tsv(args.dump_kmers)
    if args.dump_graph:
        result.graph.dump_tsv(args.dump_graph)
    print(
        f"{len(contigs)} contig(s), {sum(len(c) for _, c in contigs)} bases, "
        f"modeled {report.total_latency_ns:.0f} ns"
    )
    return EXIT_OK


def cmd_gen(args) -> int:
    if args.length < args.read_len:
        raise ConfigError("genome length must be >= read length")
    rng = random.Random(args.seed)
    if args.distinct_window:
        genome = seqio.distinct_window_genome(args.length, args.distinct_window, rng)
    else:
        genome = seqio.random_genome(args.length, rng)
    if args.coverage is not None:
        reads = seqio.sample_reads(genome, args.read_len, args.coverage, rng)
    else:
        reads = seqio.tile_reads(genome, args.read_len, args.stride)
    seqio.write_fasta(f"{args.out}.genome.fasta", [("genome", genome)])
    seqio.write_fasta(
        f"{args.out}.reads.fasta",
        [(f"read_{i}", r) for i, r in enumerate(reads)],
    )
    print(f"{len(reads)} reads of {args.read_len} bases over a {args.length}-base genome")
    return EXIT_OK


def _int_list(text: str) -> list[int]:
    try:
        vals = [int(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise ConfigError(f"expected comma-separated integers, got {text!r}") from exc
    if not vals:
        raise ConfigError("empty list")
    return vals


def cmd_sweep(args) -> int:
    spec = _spec_from_args(args)
    cfg = _load_cost_config(spec)
    pd_list = _int_list(args.pd_list)
    k_list = _int_list(args.k_list) if args.k_list else [spec.k]
    records = seqio.read_sequences(spec.input)
    reads, _ = seqio.encode_records(records)
    lines = ["k,pd,runtime_ns,avg_power_w,energy_nj"]
    for k in k_list:
        asm = Assembler(
            rows=spec.rows, cols=spec.cols, seed=spec.seed, simplify=spec.simplify
        )
        asm.assemble(reads, k)
        res = perf.sweep_pd(asm.trace, cfg, pd_list)
        for p in res.points:
            lines.append(f"{k},{p.pd},{p.runtime_ns!r},{p.avg_power_w!r},{p.energy_nj!r}")
    path = f"{spec.out}.sweep.csv"
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
    print(f"wrote {len(lines) - 1} sweep rows to {path}")
    return EXIT_OK


def cmd_truthtable(args) -> int:
    """Print every compute sense config against all 3-bit inputs.

    The printed outputs come from actual array activations; each row is
    checked against the arithmetic definition (cell-count thresholds and
    parity), and any disagreement fails the command.
    """
    layout = RowLayout.default(16)
    sub = SubArray(
        rows=16, cols=8, layout=layout, op_trace=OpTrace(), subarray_id=0,
        threshold_fault=args.inject_fault,
    )
    configs = [
        ("AND3", AND3_CFG),
        ("MAJ", MAJ_CFG),
        ("OR3", OR3_CFG),
        ("XOR3", XOR3_CFG),
    ]
    fields = ("or3", "maj", "and3", "xor3", "nor3", "min3", "nand3")
    print("config a b c " + " ".join(fields))
    bad = 0
    for name, cfg in configs:
        for pattern in range(8):
            a, b, c = (pattern >> 2) & 1, (pattern >> 1) & 1, pattern & 1
            sub.write_cell(0, 0, a)
            sub.write_cell(1, 0, b)
            sub.write_cell(2, 0, c)
            out = sub.activate((0, 1, 2), cfg)
            got = {f: out.bit(f, 0) for f in fields}
            s = a + b + c
            want = {
                "or3": int(s >= 1), "maj": int(s >= 2), "and3": int(s == 3),
                "xor3": s & 1, "nor3": int(s < 1), "min3": int(s < 2),
                "nand3": int(s != 3),
            }
            mark = ""
            if got != want:
                bad += 1
                mark = "  MISMATCH"
            print(
                f"{name} {a} {b} {c} " + " ".join(str(got[f]) for f in fields) + mark
            )
    if bad:
        print(f"self-check: FAILED ({bad} mismatching rows)", file=sys.stderr)
        return EXIT_SELFCHECK
    print("self-check: OK (32 rows)")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="pimgasm",
        description="In-memory genome assembly simulator and cost model",
    )
    ap.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("assemble", help="assemble reads into contigs")
    p.add_argument("input", help="FASTA/FASTQ reads")
    _add_common(p)
    p.add_argument("--dump-kmers", default=None, help="write the k-mer table as TSV")
    p.add_argument("--dump-graph", default=None, help="write the edge list as TSV")
    p.set_defaults(func=cmd_assemble)

    p = sub.add_parser("gen", help="generate a synthetic genome and reads")
    _add_common(p)
    p.add_argument("--length", type=int, default=10_000, help="genome length")
    p.add_argument("--read-len", type=int, default=100, help="read length")
    mode = p.add_mutually_exclusive_group()
    mode.add_argument("--stride", type=int, default=1, help="tiling stride")
    mode.add_argument("--coverage", type=float, default=None, help="random coverage depth")
    p.add_argument(
        "--distinct-window", type=int, default=None,
        help="require all substrings of this length to be distinct",
    )
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("sweep", help="price a workload across k and parallelism degree")
    p.add_argument("input", help="FASTA/FASTQ reads")
    _add_common(p)
    p.add_argument("--pd-list", default="1,2,3,4,5,6,7,8", help="comma-separated degrees")
    p.add_argument("--k-list", default=None, help="comma-separated k values")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("truthtable", help="dump and self-check the sense logic")
    _add_common(p)
    p.add_argument("--inject-fault", action="store_true", help=argparse.SUPPRESS)
    p.set_defaults(func=cmd_truthtable)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        return args.func(args)
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except CapacityError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CAPACITY
    except (ConfigError, SizeError, ShapeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (ConsistencyError, StateError, SimError) as exc:
        print(f"self-check failure: {exc}", file=sys.stderr)
        return EXIT_SELFCHECK


if __name__ == "__main__":
    sys.exit(main())
