"""Placement planning: where keys, counters, and vertical words live.

Everything here is stateless arithmetic. The hash-table layout packs one
key per row with an attached vertical counter; counters sit in stripes of
`value_width` rows, and the key in row r owns the counter at stripe
r // cols, column r % cols, which is injective because r = stripe*cols+col.

Graph partitioning hashes vertices into M intervals per chip; an edge (u,v)
lands in block (interval(u), interval(v)), giving M^2 blocks assigned to
sub-array groups round-robin. Hashes are seedable and multiplicative, never
Python's randomized hash(), so runs reproduce byte for byte.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import CapacityError, ConfigError, SizeError
from .fabric import RowLayout
from .isa import VerticalWordRef

_M64 = (1 << 64) - 1


def _mix(x: int) -> int:
    x &= _M64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _M64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _M64
    return x ^ (x >> 31)


def stable_hash(bits: int, length: int = 0, seed: int = 0) -> int:
    """Deterministic 64-bit hash of a packed bit string of known length."""
    h = _mix(seed ^ 0x9E3779B97F4A7C15)
    v = bits
    while True:
        h = _mix(h ^ (v & _M64))
        v >>= 64
        if not v:
            break
    return _mix(h ^ (length * 0xD6E8FEB86659FD93))


@dataclass(frozen=True)
class HashLayout:
    """Row map of one hash-table sub-array."""

    rows: int
    cols: int
    k: int
    kmer_rows: range
    value_rows: range
    stripes: int
    value_width: int
    row_layout: RowLayout

    def __post_init__(self) -> None:
        regions = list(self.kmer_rows) + list(self.value_rows) + list(
            self.row_layout.special_rows()
        )
        if len(regions) != len(set(regions)):
            raise ConfigError("hash layout regions overlap")
        if len(regions) != self.rows:
            raise ConfigError("hash layout does not cover the sub-array")
        if self.capacity > self.stripes * self.cols:
            raise ConfigError("more keys than counter slots")

    @property
    def capacity(self) -> int:
        """Keys storable in this sub-array (one per row)."""
        return len(self.kmer_rows)

    def counter_location(self, kmer_row: int) -> tuple[int, int]:
        """(lsb value row, column) of the counter owned by a key row."""
        if kmer_row not in self.kmer_rows:
            raise SizeError(f"row {kmer_row} is not a key row")
        idx = kmer_row - self.kmer_rows.start
        stripe, col = divmod(idx, self.cols)
        return self.value_rows.start + stripe * self.value_width, col


def layout_hash(dims: tuple[int, int], k: int, value_width: int = 8) -> HashLayout:
    """Plan a hash-table sub-array for length-k keys at 2 bits per base.

    Twelve rows are reserved (2 temp, 2 init, 2 carry, 6 spare); counter
    stripes are sized so every key row gets a slot; the rest hold keys. For
    the default 1024 x 256 geometry that is 980 key rows and 4 stripes of
    8 value rows. Keys wider than one row are rejected.
    """
    rows, cols = dims
    if k < 2:
        raise ConfigError("k must be at least 2")
    if 2 * k > cols:
        raise CapacityError(
            f"k={k} needs {2 * k} columns but the row has {cols}; "
            "multi-row keys are not supported"
        )
    special = 12
    stripes = math.ceil(max(rows - special, 0) / (cols + value_width))
    n_keys = rows - special - stripes * value_width
    if stripes < 1 or n_keys < 1:
        raise CapacityError(f"geometry {dims} too small for a hash sub-array")
    kmer_rows = range(0, n_keys)
    value_rows = range(n_keys, n_keys + stripes * value_width)
    base = value_rows.stop
    row_layout = RowLayout(
        init0_row=base + 2,
        init1_row=base + 3,
        carry_rows=(base + 4, base + 5),
        temp_rows=(base, base + 1),
        resv_rows=tuple(range(base + 6, base + 12)),
        data_region=range(0, base),
    )
    return HashLayout(
        rows=rows,
        cols=cols,
        k=k,
        kmer_rows=kmer_rows,
        value_rows=value_rows,
        stripes=stripes,
        value_width=value_width,
        row_layout=row_layout,
    )


@dataclass(frozen=True)
class PartitionPlan:
    """Vertex intervals, edge blocks, and their sub-array-group assignment."""

    M: int
    vertex_interval: tuple[int, ...]          # dense node id -> interval
    blocks: dict[tuple[int, int], tuple[int, ...]]  # (iu, iv) -> edge ids
    chip_assignment: dict[tuple[int, int], int]
    f: int                                     # words per sub-array
    word_width: int = 8
    word_lsb: int = 0


def partition_graph(
    graph,
    M: int,
    seed: int = 0,
    dims: tuple[int, int] = (1024, 256),
    n_groups: int | None = None,
) -> PartitionPlan:
    """Partition a sparse edge-list graph into M x M blocks.

    `graph` needs `nodes` (packed labels), `edge_src` and `edge_dst`
    (dense node ids per edge). Every edge lands in exactly one block, so
    the blocks are a partition of the edge list.
    """
    if M < 1:
        raise ConfigError("M must be at least 1")
    if n_groups is None:
        n_groups = M
    intervals = tuple(
        stable_hash(lab.bits, lab.length, seed) % M for lab in graph.nodes
    )
    blocks: dict[tuple[int, int], list[int]] = {}
    for e, (u, v) in enumerate(zip(graph.edge_src, graph.edge_dst)):
        blocks.setdefault((intervals[u], intervals[v]), []).append(e)
    frozen = {key: tuple(ids) for key, ids in sorted(blocks.items())}
    assignment = {key: i % n_groups for i, key in enumerate(frozen)}
    return PartitionPlan(
        M=M,
        vertex_interval=intervals,
        blocks=frozen,
        chip_assignment=assignment,
        f=min(dims),
    )


def subarrays_needed(n_items: int, f: int) -> int:
    """Sub-arrays holding n_items at f vertical words per sub-array."""
    if n_items < 0 or f < 1:
        raise SizeError("need n_items >= 0 and f >= 1")
    return math.ceil(n_items / f)


def place_vertical_word(plan: PartitionPlan, node: int) -> VerticalWordRef:
    """Deterministic (sub-array, column) slot of a node's counter word.

    Nodes fill sub-arrays in dense-id order, f words per sub-array; the
    sub-array index is relative to whatever region base the caller maps it
    onto. Overflow simply continues in the next sub-array.
    """
    if node < 0:
        raise SizeError("node id must be non-negative")
    sub, col = divmod(node, plan.f)
    return VerticalWordRef(
        subarray_id=sub, col=col, lsb_row=plan.word_lsb, width=plan.word_width
    )


@dataclass(frozen=True)
class CapacityPlan:
    """Whole-genome hash-table sizing at a given geometry."""

    genome_size: int
    k: int
    hash_bits: int
    table_bytes: int
    subarrays: int
    dims: tuple[int, int] = (1024, 256)

    @property
    def gibibytes(self) -> float:
        return self.table_bytes / 2**30


def capacity_plan(
    genome_size: int, k: int, dims: tuple[int, int] = (1024, 256)
) -> CapacityPlan:
    """Hash-table footprint for a genome: key plus counter per distinct k-mer.

    Each of ~G distinct keys needs 2k bits of key and 2 bits-per-base worth
    of counter (one base-equivalent), i.e. 2 * G * (k + 1) bits in total.
    """
    if genome_size < 1 or k < 1:
        raise SizeError("genome size and k must be positive")
    bits = 2 * genome_size * (k + 1)
    rows, cols = dims
    return CapacityPlan(
        genome_size=genome_size,
        k=k,
        hash_bits=bits,
        table_bytes=math.ceil(bits / 8),
        subarrays=math.ceil(bits / (rows * cols)),
        dims=dims,
    )
