"""De Bruijn graph assembly driven by the memory-side instruction set.

Stage 1 counts k-mers in an associative hash store: each query is written
to a temp row and compared against the occupied key rows of its hash bucket
(one XNOR-compare cycle plus one AND-reduce per row); a hit increments the
key's vertical counter in place, a miss appends the key and starts its
counter at one. Stage 2 walks the table and emits one edge per distinct
k-mer (prefix node, suffix node, multiplicity = frequency) into an edge
store. Stage 3 accumulates vertical degree counters column-parallel, picks
the start vertex with a bit-plane compare of out against in+1, and walks an
Euler path bridge-aware, decrementing multiplicities in memory as it goes.

The host keeps mirror bookkeeping (a dict index into the hash store, the
edge lists, remaining-multiplicity maps) so the simulation runs in sensible
time, but every datum also lives in fabric bits: keys and counters are
physically written, counters are incremented by real add cycles, and the
mirrors are cross-checked against fabric contents at every stage boundary,
raising ConsistencyError on any divergence. Scan-cost events that the
mirror makes redundant are emitted in bulk with identical counts; a naive
probe mode that executes every comparison physically is kept for
equivalence testing.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

from . import mapping
from . import trace as tr
from .encoding import EncodedSeq, extract_kmers
from .errors import (
    CapacityError,
    ConsistencyError,
    DisconnectedGraphError,
    NonEulerianError,
    SizeError,
)
from .isa import Machine, MemAddress, VerticalWordRef

log = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# result types


@dataclass
class DegreeTable:
    """Multiplicity-weighted degrees plus the chosen walk start."""

    out_degree: list[int]
    in_degree: list[int]
    edge_cnt: int
    start: int


@dataclass
class EulerPath:
    node_ids: list[int]
    vertices: list[EncodedSeq]


@dataclass
class AssemblyResult:
    contigs: list[EncodedSeq]
    table: "KmerTable"
    graph: "SparseGraph"
    paths: list[EulerPath]
    warnings: list[str]


class SparseGraph:
    """Directed multigraph as three aligned edge lists plus a node index.

    Nodes are interned packed labels with dense ids in first-appearance
    order; edges keep insertion order. `k` records the k-mer size the node
    labels came from (labels are (k-1)-mers then); synthetic graphs leave
    it None and label overlap checks degrade gracefully.
    """

    def __init__(self, k: int | None = None):
        self.k = k
        self.nodes: list[EncodedSeq] = []
        self._ids: dict[EncodedSeq, int] = {}
        self.edge_src: list[int] = []
        self.edge_dst: list[int] = []
        self.mult: list[int] = []
        # set on views derived from a materialized parent graph
        self._parent: SparseGraph | None = None
        self._parent_edges: list[int] | None = None
        self._unit_mult = False
        self._store = None

    # -- construction --

    def node_id(self, label: EncodedSeq) -> int:
        nid = self._ids.get(label)
        if nid is None:
            nid = len(self.nodes)
            self._ids[label] = nid
            self.nodes.append(label)
        return nid

    def add_edge(self, u: EncodedSeq, v: EncodedSeq, mult: int = 1) -> int:
        if mult < 1:
            raise SizeError("edge multiplicity must be >= 1")
        self.edge_src.append(self.node_id(u))
        self.edge_dst.append(self.node_id(v))
        self.mult.append(mult)
        return len(self.mult) - 1

    # -- views --

    @property
    def node1(self) -> list[EncodedSeq]:
        return [self.nodes[i] for i in self.edge_src]

    @property
    def node2(self) -> list[EncodedSeq]:
        return [self.nodes[i] for i in self.edge_dst]

    @property
    def edge_count(self) -> int:
        return len(self.mult)

    def total_multiplicity(self) -> int:
        return sum(self.mult)

    def degrees(self) -> tuple[list[int], list[int]]:
        """Host-side multiplicity-weighted (out, in) degree lists."""
        out = [0] * len(self.nodes)
        inn = [0] * len(self.nodes)
        for u, v, m in zip(self.edge_src, self.edge_dst, self.mult):
            out[u] += m
            inn[v] += m
        return out, inn

    def subgraph(self, node_ids: list[int]) -> "SparseGraph":
        """Edge-induced subgraph on a node subset, keeping edge order."""
        keep = set(node_ids)
        sub = SparseGraph(k=self.k)
        for nid in sorted(node_ids):
            sub.node_id(self.nodes[nid])
        edge_ids = []
        for e, (u, v) in enumerate(zip(self.edge_src, self.edge_dst)):
            if u in keep:
                sub.add_edge(self.nodes[u], self.nodes[v], self.mult[e])
                edge_ids.append(e)
        sub._parent = self
        sub._parent_edges = edge_ids
        return sub

    def collapsed(self) -> "SparseGraph":
        """Same topology with every multiplicity forced to one."""
        c = SparseGraph(k=self.k)
        for lab in self.nodes:
            c.node_id(lab)
        for u, v in zip(self.edge_src, self.edge_dst):
            c.add_edge(self.nodes[u], self.nodes[v], 1)
        c._parent = self
        c._parent_edges = list(range(self.edge_count))
        c._unit_mult = True
        return c

    def dump_tsv(self, path) -> None:
        with open(path, "w") as fh:
            fh.write("node1\tnode2\tmult\n")
            for u, v, m in zip(self.edge_src, self.edge_dst, self.mult):
                fh.write(f"{self.nodes[u].to_str()}\t{self.nodes[v].to_str()}\t{m}\n")


def weakly_connected_components(g: SparseGraph) -> list[list[int]]:
    """Node id lists of the weak components, ordered by smallest member."""
    und: dict[int, list[int]] = {i: [] for i in range(len(g.nodes))}
    for u, v in zip(g.edge_src, g.edge_dst):
        und[u].append(v)
        und[v].append(u)
    seen: set[int] = set()
    comps = []
    for start in range(len(g.nodes)):
        if start in seen:
            continue
        comp = [start]
        seen.add(start)
        stack = [start]
        while stack:
            u = stack.pop()
            for v in und[u]:
                if v not in seen:
                    seen.add(v)
                    comp.append(v)
                    stack.append(v)
        comps.append(sorted(comp))
    return comps


def contig_from_path(vertices: list[EncodedSeq], k: int) -> EncodedSeq:
    """Merge consecutive path labels that overlap by k-2 bases.

    The first label is taken whole; each subsequent label contributes
    everything past the overlap. Raises ConsistencyError when neighbours
    do not actually overlap.
    """
    if not vertices:
        raise SizeError("empty path")
    ov = max(k - 2, 0)
    out = vertices[0]
    prev = vertices[0]
    for lab in vertices[1:]:
        if len(prev) < ov or len(lab) < ov:
            raise ConsistencyError("path label shorter than the overlap")
        if prev.suffix(ov).bits != lab.prefix(ov).bits:
            raise ConsistencyError(
                f"adjacent path labels lack the {ov}-base overlap"
            )
        out = out.concat(lab.window(ov, len(lab) - ov))
        prev = lab
    return out


# ---------------------------------------------------------------------------
# fabric-side stores


class KmerTable:
    """Hash-store handle: ordered keys, their slots, and counter access."""

    def __init__(self, k: int, layout: mapping.HashLayout, machine: Machine):
        self.k = k
        self.layout = layout
        self.machine = machine
        self.keys: list[EncodedSeq] = []
        self.slots: list[tuple[int, int]] = []  # (sub-array id, key row)
        self.host_counts: dict[int, int] = {}   # packed key -> exact count
        self.total_kmers = 0
        self.saturated_keys = 0

    @property
    def value_width(self) -> int:
        return self.layout.value_width

    def distinct(self) -> int:
        return len(self.keys)

    def _counter_ref(self, slot: tuple[int, int]) -> VerticalWordRef:
        sid, row = slot
        lsb, col = self.layout.counter_location(row)
        return VerticalWordRef(sid, col, lsb, self.layout.value_width)

    def frequencies(self) -> dict[EncodedSeq, int]:
        """Counter values decoded from fabric bits (reads the value rows)."""
        cache: dict[int, list[int]] = {}
        lay = self.layout
        out: dict[EncodedSeq, int] = {}
        for key, (sid, row) in zip(self.keys, self.slots):
            planes = cache.get(sid)
            if planes is None:
                sub = self.machine.subarray(sid)
                planes = [sub.read_row(r) for r in lay.value_rows]
                cache[sid] = planes
            lsb, col = lay.counter_location(row)
            base = lsb - lay.value_rows.start
            v = 0
            for i in range(lay.value_width):
                v |= ((planes[base + i] >> col) & 1) << i
            out[key] = v
        return out

    def items(self):
        freqs = self.frequencies()
        for key in self.keys:
            yield key, freqs[key]

    def dump_tsv(self, path) -> None:
        freqs = self.frequencies()
        with open(path, "w") as fh:
            fh.write("kmer\tfrequency\n")
            for key in self.keys:
                fh.write(f"{key.to_str()}\t{freqs[key]}\n")


class _Bucket:
    __slots__ = ("chain", "fills")

    def __init__(self):
        self.chain: list[int] = []
        self.fills: list[int] = []


class _RowBank:
    """Sequential row allocator over plain store sub-arrays."""

    def __init__(self, machine: Machine):
        self.machine = machine
        self.sids: list[int] = []
        self._next = 0
        self._sid = -1
        from .fabric import RowLayout

        self._layout = RowLayout.default(machine.rows)
        self._cap = len(self._layout.data_region)

    def alloc(self, nrows: int) -> tuple[int, int]:
        if nrows > self._cap:
            raise CapacityError("entry taller than a sub-array data region")
        if self._sid < 0 or self._next + nrows > self._cap:
            self._sid = self.machine.new_subarray(self._layout)
            self.sids.append(self._sid)
            self._next = 0
        row = self._layout.data_region.start + self._next
        self._next += nrows
        return self._sid, row


class _CounterBank:
    """Vertical-word slots packed in stripes across store sub-arrays."""

    def __init__(self, machine: Machine, width: int):
        from .fabric import RowLayout

        self.machine = machine
        self.width = width
        self._layout = RowLayout.default(machine.rows)
        stripes = len(self._layout.data_region) // width
        if stripes < 1:
            raise CapacityError("sub-array too short for counters")
        self._per_sub = stripes * machine.cols
        self._n = 0
        self.sids: list[int] = []

    def alloc(self) -> VerticalWordRef:
        local = self._n % self._per_sub
        if local == 0:
            self.sids.append(self.machine.new_subarray(self._layout))
        sid = self.sids[-1]
        stripe, col = divmod(local, self.machine.cols)
        self._n += 1
        return VerticalWordRef(
            sid, col, self._layout.data_region.start + stripe * self.width, self.width
        )


@dataclass
class _DegreeRegion:
    sids: list[int]
    w_deg: int
    w_ec: int
    spacing: int          # row pitch between the four word planes
    base: int             # first data row
    cols: int
    ec_index: int         # flat slot index of the edge-count word

    def node_slot(self, nid: int) -> tuple[int, int]:
        sub, col = divmod(nid, self.cols)
        return self.sids[sub], col

    def out_ref(self, nid: int) -> VerticalWordRef:
        sid, col = self.node_slot(nid)
        return VerticalWordRef(sid, col, self.base, self.w_deg)

    def ec_ref(self) -> VerticalWordRef:
        sub, col = divmod(self.ec_index, self.cols)
        return VerticalWordRef(self.sids[sub], col, self.base, self.w_ec)


class _GraphStore:
    """Fabric placement of one graph: label rows and multiplicity words."""

    def __init__(self):
        self.label_refs: list[tuple[MemAddress, MemAddress]] = []
        self.mult_refs: list[VerticalWordRef] = []
        self.mult_seen: list[bool] = []   # first staging reads fabric, later ones recharge
        self.degree: _DegreeRegion | None = None


# ---------------------------------------------------------------------------
# assembler


class Assembler:
    """Runs the counting, graph build, and walk stages on one machine.

    probe_mode selects how hash-store lookups are costed: "indexed" uses the
    host mirror to emit the scan events in bulk and executes only the final
    compare physically; "naive" executes every row compare in fabric. Both
    modes produce identical traces and results; naive is O(rows) per query
    and only suitable for small inputs.
    """

    def __init__(
        self,
        machine: Machine | None = None,
        *,
        rows: int = 1024,
        cols: int = 256,
        value_width: int = 8,
        simplify: bool = False,
        seed: int = 0,
        probe_mode: str = "indexed",
        max_subarrays: int = 200_000,
    ):
        if probe_mode not in ("indexed", "naive"):
            raise ValueError(f"unknown probe mode {probe_mode!r}")
        self.machine = machine if machine is not None else Machine(rows=rows, cols=cols)
        self.rows = self.machine.rows
        self.cols = self.machine.cols
        self.value_width = value_width
        self.simplify = simplify
        self.seed = seed
        self.probe_mode = probe_mode
        self.max_subarrays = max_subarrays

    @property
    def trace(self) -> tr.OpTrace:
        return self.machine.trace

    # -- stage 1: k-mer counting --

    def build_kmer_table(self, reads: list[EncodedSeq], k: int) -> KmerTable:
        layout = mapping.layout_hash((self.rows, self.cols), k, self.value_width)
        table = KmerTable(k, layout, self.machine)
        with self.machine.stage_scope(tr.STAGE_HASHMAP):
            # host pre-scan sizes the bucket directory so sub-arrays fill
            # densely instead of fragmenting across half-empty chains
            distinct = len({w.bits for r in reads for w in extract_kmers(r, k)})
            if distinct == 0:
                raise SizeError(f"no k-mers: every read is shorter than k={k}")
            n_buckets = max(1, math.ceil(distinct / layout.capacity))
            buckets = [_Bucket() for _ in range(n_buckets)]
            index: dict[int, tuple[int, int, int, int]] = {}
            for read in reads:
                for kmer in extract_kmers(read, k):
                    self._observe(table, buckets, index, n_buckets, kmer)
        log.info(
            "k-mer table: %d queries, %d distinct, %d buckets, %d sub-arrays",
            table.total_kmers, table.distinct(), n_buckets,
            sum(len(b.chain) for b in buckets),
        )
        return table

    def _observe(self, table, buckets, index, n_buckets, kmer: EncodedSeq) -> None:
        m = self.machine
        trace = m.trace
        lay = table.layout
        bits = kmer.bits
        width = 2 * table.k
        temp_row = lay.row_layout.temp_rows[0]
        cap = (1 << lay.value_width) - 1
        table.total_kmers += 1

        hit = index.get(bits)
        if hit is not None:
            bucket_i, member_i, row_i, scan_pos = hit
            bucket = buckets[bucket_i]
            sid = bucket.chain[member_i]
            if self.probe_mode == "naive":
                found = self._scan_naive(bucket, bits, width, temp_row, lay)
                if found != (member_i, row_i):
                    raise ConsistencyError("fabric scan disagrees with the index")
            else:
                # chain members before the hit: temp write plus full scan
                if member_i:
                    trace.emit(tr.W, member_i)
                if scan_pos:
                    trace.emit(tr.C_ADD, scan_pos)
                    trace.emit(tr.DPU, scan_pos)
                m.subarray(sid).write_bits(temp_row, 0, width, bits)
                res = m.cmp(
                    MemAddress(sid, temp_row, 0, width),
                    MemAddress(sid, lay.kmer_rows.start + row_i, 0, width),
                )
                if not res.equal:
                    raise ConsistencyError("stored key does not match its index entry")
            count = table.host_counts[bits]
            if count < cap:
                lsb, col = lay.counter_location(lay.kmer_rows.start + row_i)
                m.add_const_cols(sid, lsb, lay.value_width, [col], 1)
            elif count == cap:
                table.saturated_keys += 1
            table.host_counts[bits] = count + 1
            return

        # miss: scan the whole bucket, then append the key
        bucket_i = mapping.stable_hash(bits, width, self.seed) % n_buckets
        bucket = buckets[bucket_i]
        temp_sid = None
        if self.probe_mode == "naive":
            found = self._scan_naive(bucket, bits, width, temp_row, lay)
            if found is not None:
                raise ConsistencyError("fabric holds a key the index does not")
            if bucket.chain:
                temp_sid = bucket.chain[-1]
        else:
            members = len(bucket.chain)
            scanned = sum(bucket.fills)
            if members:
                if members > 1:
                    trace.emit(tr.W, members - 1)
                if scanned > 1:
                    trace.emit(tr.C_ADD, scanned - 1)
                    trace.emit(tr.DPU, scanned - 1)
                # the final mismatching compare runs for real
                temp_sid = bucket.chain[-1]
                m.subarray(temp_sid).write_bits(temp_row, 0, width, bits)
                last_row = lay.kmer_rows.start + bucket.fills[-1] - 1
                res = m.cmp(
                    MemAddress(temp_sid, temp_row, 0, width),
                    MemAddress(temp_sid, last_row, 0, width),
                )
                if res.equal:
                    raise ConsistencyError("fabric holds a key the index does not")

        if not bucket.chain or bucket.fills[-1] >= lay.capacity:
            if m.subarray_count >= self.max_subarrays:
                raise CapacityError(
                    f"hash store exceeds the {self.max_subarrays} sub-array budget"
                )
            bucket.chain.append(m.new_subarray(lay.row_layout))
            bucket.fills.append(0)
        target = bucket.chain[-1]
        if target != temp_sid:
            m.subarray(target).write_bits(temp_row, 0, width, bits)
        row_i = bucket.fills[-1]
        key_row = lay.kmer_rows.start + row_i
        m.mem_insert(
            MemAddress(target, key_row, 0, width),
            MemAddress(target, temp_row, 0, width),
        )
        sub = m.subarray(target)
        if sub.cells[key_row] & ((1 << width) - 1) != bits:
            raise ConsistencyError("inserted key bits corrupted")
        lsb, col = lay.counter_location(key_row)
        sub.write_cell(lsb, col, 1)
        scan_pos = sum(bucket.fills[:-1]) + row_i
        index[bits] = (bucket_i, len(bucket.chain) - 1, row_i, scan_pos)
        bucket.fills[-1] += 1
        table.host_counts[bits] = 1
        table.keys.append(kmer)
        table.slots.append((target, key_row))

    def _scan_naive(self, bucket, bits, width, temp_row, lay):
        """Physically compare the query against every occupied key row."""
        m = self.machine
        for member_i, sid in enumerate(bucket.chain):
            m.subarray(sid).write_bits(temp_row, 0, width, bits)
            src = MemAddress(sid, temp_row, 0, width)
            for row_i in range(bucket.fills[member_i]):
                res = m.cmp(src, MemAddress(sid, lay.kmer_rows.start + row_i, 0, width))
                if res.equal:
                    return member_i, row_i
        return None

    # -- stage 2: graph construction --

    def build_graph(self, table: KmerTable) -> SparseGraph:
        k = table.k
        m = self.machine
        width = 2 * (k - 1)
        cap = (1 << table.value_width) - 1
        with m.stage_scope(tr.STAGE_GRAPH):
            g = SparseGraph(k=k)
            store = _GraphStore()
            labels = _RowBank(m)
            counters = _CounterBank(m, table.value_width)
            fab_freq = table.frequencies()
            for key, slot in zip(table.keys, table.slots):
                expect = min(table.host_counts[key.bits], cap)
                if fab_freq[key] != expect:
                    raise ConsistencyError(
                        f"counter for {key.to_str()} reads {fab_freq[key]}, expected {expect}"
                    )
                sid, row = slot
                p_sid, p_row = labels.alloc(1)
                s_sid, s_row = labels.alloc(1)
                dst_p = MemAddress(p_sid, p_row, 0, width)
                dst_s = MemAddress(s_sid, s_row, 0, width)
                m.mem_insert(dst_p, MemAddress(sid, row, 0, width))
                m.mem_insert(dst_s, MemAddress(sid, row, 2, width))
                prefix = key.prefix(k - 1)
                suffix = key.suffix(k - 1)
                mask = (1 << width) - 1
                if m.subarray(p_sid).cells[p_row] & mask != prefix.bits:
                    raise ConsistencyError("prefix label bits corrupted")
                if (m.subarray(s_sid).cells[s_row] >> 0) & mask != suffix.bits:
                    raise ConsistencyError("suffix label bits corrupted")
                ref = counters.alloc()
                m.write_vword(ref, expect)
                g.add_edge(prefix, suffix, expect)
                store.label_refs.append((dst_p, dst_s))
                store.mult_refs.append(ref)
                store.mult_seen.append(False)
            g._store = store
        log.info("graph: %d nodes, %d edges", len(g.nodes), g.edge_count)
        return g

    def _ensure_store(self, g: SparseGraph) -> _GraphStore:
        if g._store is not None:
            return g._store
        m = self.machine
        st = _GraphStore()
        if g._parent is not None and g._parent._store is not None:
            ps = g._parent._store
            ids = g._parent_edges
            st.label_refs = [ps.label_refs[e] for e in ids]
            if g._unit_mult:
                bank = _CounterBank(m, 8)
                for _ in ids:
                    ref = bank.alloc()
                    m.write_vword(ref, 1)
                    st.mult_refs.append(ref)
            else:
                st.mult_refs = [ps.mult_refs[e] for e in ids]
            st.mult_seen = [False] * len(ids)
        else:
            # injected graph: host writes labels and multiplicities in
            node_addr: list[MemAddress] = []
            bank = _RowBank(m)
            for lab in g.nodes:
                nrows = max(1, math.ceil(lab.bit_length / m.cols))
                sid, row = bank.alloc(nrows)
                addr = MemAddress(sid, row, 0, max(1, lab.bit_length))
                if lab.bit_length:
                    m.mem_insert(addr, lab.bits)
                node_addr.append(addr)
            w_mult = max(8, max(g.mult, default=1).bit_length())
            counters = _CounterBank(m, w_mult)
            for e, (u, v) in enumerate(zip(g.edge_src, g.edge_dst)):
                st.label_refs.append((node_addr[u], node_addr[v]))
                ref = counters.alloc()
                m.write_vword(ref, g.mult[e])
                st.mult_refs.append(ref)
                st.mult_seen.append(False)
        g._store = st
        return st

    # -- optional stage 2.5: chain merging --

    def simplify_graph(self, g: SparseGraph) -> SparseGraph:
        """Merge unbranched chains into single nodes.

        An edge u->v is contractible when it is u's only outgoing edge
        entry and v's only incoming one (and u != v); a multi-edge counts
        as a single adjacency here, so coverage depth never blocks a
        merge. Contractible edges form disjoint paths and cycles; each
        path becomes one node with the overlap-merged label, each cycle
        one node with a self-loop.
        """
        m = self.machine
        with m.stage_scope(tr.STAGE_GRAPH):
            n = len(g.nodes)
            out_slots = [0] * n
            in_slots = [0] * n
            for u, v in zip(g.edge_src, g.edge_dst):
                out_slots[u] += 1
                in_slots[v] += 1
            nxt: dict[int, tuple[int, int]] = {}
            for e, (u, v) in enumerate(zip(g.edge_src, g.edge_dst)):
                if u != v and out_slots[u] == 1 and in_slots[v] == 1:
                    nxt[u] = (v, e)
            has_prev = {v for v, _ in nxt.values()}
            consumed: set[int] = set()
            chains: list[list[int]] = []
            visited: set[int] = set()
            for u in range(n):
                if u in visited or u in has_prev:
                    continue
                chain = [u]
                visited.add(u)
                while chain[-1] in nxt:
                    v, e = nxt[chain[-1]]
                    if v in visited:
                        break
                    chain.append(v)
                    visited.add(v)
                    consumed.add(e)
                chains.append(chain)
            for u in range(n):
                # leftovers are pure contractible cycles
                if u in visited:
                    continue
                chain = [u]
                visited.add(u)
                while True:
                    v, e = nxt[chain[-1]]
                    if v == u:
                        break  # closing edge survives as a self-loop
                    chain.append(v)
                    visited.add(v)
                    consumed.add(e)
                chains.append(chain)

            ov = max(g.k - 2, 0) if g.k else 0
            new = SparseGraph(k=g.k)
            node_map: dict[int, int] = {}
            rows_read = 0
            for chain in chains:
                label = g.nodes[chain[0]]
                for nid in chain[1:]:
                    lab = g.nodes[nid]
                    if label.suffix(ov).bits != lab.prefix(ov).bits:
                        raise ConsistencyError("chain labels lack the expected overlap")
                    label = label.concat(lab.window(ov, len(lab) - ov))
                if len(chain) > 1:
                    rows_read += len(chain)
                mid = new.node_id(label)
                for nid in chain:
                    node_map[nid] = mid
            for e, (u, v) in enumerate(zip(g.edge_src, g.edge_dst)):
                if e in consumed:
                    continue
                new.add_edge(new.nodes[node_map[u]], new.nodes[node_map[v]], g.mult[e])
            # merge scan: label reads for merged members, controller pass
            if rows_read:
                m.trace.emit(tr.R, rows_read)
            m.dpu_charge(n + g.edge_count)
        log.info(
            "simplify: %d -> %d nodes, %d -> %d edges",
            n, len(new.nodes), g.edge_count, new.edge_count,
        )
        return new

    # -- stage 3: degree accumulation and start pick --

    def _mult_value(self, store: _GraphStore, g: SparseGraph, e: int) -> int:
        """Multiplicity of edge e, read from fabric on first touch."""
        m = self.machine
        ref = store.mult_refs[e]
        if store.mult_seen[e]:
            m.trace.emit(tr.R, ref.width)
            return g.mult[e]
        val = m.read_vword(ref)
        if val != g.mult[e]:
            raise ConsistencyError(
                f"multiplicity word of edge {e} reads {val}, expected {g.mult[e]}"
            )
        store.mult_seen[e] = True
        return val

    def find_start(self, g: SparseGraph) -> DegreeTable:
        """Accumulate degrees column-parallel and pick the walk start.

        Each node owns one column; multiplicities are staged into a scratch
        word plane and added into the out/in counter words one occupancy
        rank at a time, so a whole sub-array row of nodes advances per add.
        The start test compares out against in+1 across all columns with
        one compare cycle per bit plane. Raises NonEulerianError when more
        than one node has an outgoing surplus or any imbalance exceeds one.
        """
        from .fabric import RowLayout

        m = self.machine
        with m.stage_scope(tr.STAGE_TRAVERSE):
            store = self._ensure_store(g)
            n = len(g.nodes)
            host_out, host_in = g.degrees()
            total = sum(g.mult)
            maxdeg = max(max(host_out, default=0), max(host_in, default=0))
            w_deg = max(8, (maxdeg + 1).bit_length() + 1)
            w_ec = max(8, (total + 1).bit_length())
            spacing = max(w_deg, w_ec)
            lay = RowLayout.default(m.rows)
            if 4 * spacing > len(lay.data_region):
                raise CapacityError("degree counters taller than the data region")
            n_sub = mapping.subarrays_needed(n + 1, m.cols)
            sids = [m.new_subarray(lay) for _ in range(n_sub)]
            base = lay.data_region.start
            out_base = base
            in_base = base + spacing
            tmp_base = base + 2 * spacing
            stg_base = base + 3 * spacing

            for ends, word_base in ((g.edge_src, out_base), (g.edge_dst, in_base)):
                per: dict[int, dict[int, list[int]]] = {}
                for e, nid in enumerate(ends):
                    sub_i, col = divmod(nid, m.cols)
                    per.setdefault(sub_i, {}).setdefault(col, []).append(e)
                for sub_i in sorted(per):
                    sub = m.subarray(sids[sub_i])
                    colmap = per[sub_i]
                    rank = 0
                    while True:
                        wave = [(c, ids[rank]) for c, ids in colmap.items() if len(ids) > rank]
                        if not wave:
                            break
                        colmask = 0
                        planes = [0] * w_deg
                        for col, e in wave:
                            v = self._mult_value(store, g, e)
                            colmask |= 1 << col
                            for i in range(v.bit_length()):
                                if (v >> i) & 1:
                                    planes[i] |= 1 << col
                        for i in range(w_deg):
                            sub.write_masked(stg_base + i, planes[i], colmask)
                        over = m.add_cols(
                            sids[sub_i], stg_base, word_base, word_base, w_deg,
                            [c for c, _ in wave],
                        )
                        if any(over.values()):
                            raise ConsistencyError("degree counter overflow")
                        rank += 1

            # global edge-unit counter in the column after the last node
            ec_sub_i, ec_col = divmod(n, m.cols)
            ec_sid = sids[ec_sub_i]
            ec_sub = m.subarray(ec_sid)
            ec_mask = 1 << ec_col
            for e in range(g.edge_count):
                v = self._mult_value(store, g, e)
                for i in range(w_ec):
                    ec_sub.write_masked(stg_base + i, ((v >> i) & 1) << ec_col, ec_mask)
                over = m.add_cols(ec_sid, stg_base, out_base, out_base, w_ec, [ec_col])
                if over[ec_col]:
                    raise ConsistencyError("edge counter overflow")

            region = _DegreeRegion(sids, w_deg, w_ec, spacing, base, m.cols, n)

            # read the counter planes back; the mirror must agree exactly
            fab_out = [0] * n
            fab_in = [0] * n
            candidates: list[int] = []
            for sub_i, sid in enumerate(sids):
                lo = sub_i * m.cols
                hi = min(n, lo + m.cols)
                if hi <= lo:
                    continue
                sub = m.subarray(sid)
                out_planes = [sub.read_row(out_base + i) for i in range(w_deg)]
                in_planes = [sub.read_row(in_base + i) for i in range(w_deg)]
                for nid in range(lo, hi):
                    col = nid - lo
                    fab_out[nid] = sum(
                        ((out_planes[i] >> col) & 1) << i for i in range(w_deg)
                    )
                    fab_in[nid] = sum(
                        ((in_planes[i] >> col) & 1) << i for i in range(w_deg)
                    )
                # start probe: tmp = in + 1, then plane-compare against out
                node_cols = list(range(hi - lo))
                for i in range(w_deg):
                    m.mem_insert(
                        MemAddress(sid, tmp_base + i, 0, m.cols),
                        MemAddress(sid, in_base + i, 0, m.cols),
                    )
                m.add_const_cols(sid, tmp_base, w_deg, node_cols, 1)
                agree = ~0
                for i in range(w_deg):
                    res = m.cmp(
                        MemAddress(sid, out_base + i, 0, m.cols),
                        MemAddress(sid, tmp_base + i, 0, m.cols),
                    )
                    agree &= res.mask
                m.dpu_charge(1)
                for nid in range(lo, hi):
                    if (agree >> (nid - lo)) & 1:
                        candidates.append(nid)

            if fab_out != host_out or fab_in != host_in:
                raise ConsistencyError("degree planes disagree with the edge lists")
            if m.read_vword(region.ec_ref()) != total:
                raise ConsistencyError("edge counter disagrees with the edge lists")
            if candidates != [i for i in range(n) if host_out[i] == host_in[i] + 1]:
                raise ConsistencyError("start probe disagrees with the degree mirror")

            store.degree = region
            for i in range(n):
                d = host_out[i] - host_in[i]
                if d >= 2 or d <= -2:
                    raise NonEulerianError(
                        f"node {i} has degree imbalance {d}"
                    )
            if len(candidates) > 1:
                raise NonEulerianError(
                    f"{len(candidates)} nodes have an outgoing surplus"
                )
            start = candidates[0] if candidates else 0
        return DegreeTable(list(host_out), list(host_in), total, start)

    # -- stage 4: Euler walk --

    def _reach(self, und: list[dict[int, int]], src: int) -> int:
        """Size of the undirected reachable set; one controller op per visit."""
        seen = {src}
        stack = [src]
        while stack:
            x = stack.pop()
            for y, c in und[x].items():
                if c and y not in seen:
                    seen.add(y)
                    stack.append(y)
        self.machine.dpu_charge(len(seen))
        return len(seen)

    def _is_bridge(self, und: list[dict[int, int]], u: int, v: int) -> bool:
        before = self._reach(und, u)
        und[u][v] -= 1
        und[v][u] -= 1
        after = self._reach(und, u)
        und[u][v] += 1
        und[v][u] += 1
        return after < before

    def fleury(
        self,
        g: SparseGraph,
        degrees: DegreeTable | None = None,
        *,
        start: int | None = None,
        strict: bool = True,
    ) -> EulerPath:
        """Walk an Euler path, preferring non-bridge edges.

        Neighbours are tried in ascending node id; a candidate is taken if
        removing one unit of the edge keeps the rest reachable, and the
        lowest neighbour is the fallback when every choice burns a bridge.
        Every traversed unit decrements its multiplicity word, the source's
        out-degree word, and the global edge counter in fabric. With
        strict=False a stranded walk returns the partial path instead of
        raising DisconnectedGraphError.
        """
        with self.machine.stage_scope(tr.STAGE_TRAVERSE):
            store = self._ensure_store(g)
        if degrees is None and (store.degree is None or start is None):
            degrees = self.find_start(g)
        if start is None:
            start = degrees.start
        region = store.degree
        m = self.machine
        with m.stage_scope(tr.STAGE_TRAVERSE):
            n = len(g.nodes)
            adj: list[dict[int, int]] = [dict() for _ in range(n)]
            und: list[dict[int, int]] = [dict() for _ in range(n)]
            pair_edges: dict[tuple[int, int], list[int]] = {}
            rem = list(g.mult)
            for e, (u, v) in enumerate(zip(g.edge_src, g.edge_dst)):
                mu = g.mult[e]
                adj[u][v] = adj[u].get(v, 0) + mu
                und[u][v] = und[u].get(v, 0) + mu
                und[v][u] = und[v].get(u, 0) + mu
                pair_edges.setdefault((u, v), []).append(e)
            total = sum(rem)
            u = start
            path = [u]
            while True:
                m.dpu_scalar("compare_eq", min(total, 1), 0)
                if total == 0:
                    break
                nbrs = sorted(v for v, c in adj[u].items() if c > 0)
                if not nbrs:
                    if strict:
                        raise DisconnectedGraphError(
                            f"walk stranded at node {u} with {total} edge units left"
                        )
                    break
                if len(nbrs) == 1:
                    v = nbrs[0]
                else:
                    v = None
                    for cand in nbrs:
                        if not self._is_bridge(und, u, cand):
                            v = cand
                            break
                    if v is None:
                        v = nbrs[0]
                e = next(eid for eid in pair_edges[(u, v)] if rem[eid] > 0)
                m.add_const(store.mult_refs[e], -1)
                m.add_const(region.out_ref(u), -1)
                m.add_const(region.ec_ref(), -1)
                rem[e] -= 1
                adj[u][v] -= 1
                und[u][v] -= 1
                und[v][u] -= 1
                total -= 1
                u = v
                path.append(v)
            if total == 0 and m.read_vword(region.ec_ref()) != 0:
                raise ConsistencyError("edge counter nonzero after a complete walk")
        return EulerPath(path, [g.nodes[i] for i in path])

    # -- full pipeline --

    def _walk_component(self, sub: SparseGraph, warnings: list[str]) -> EulerPath:
        if sub.edge_count == 0:
            return EulerPath([0], [sub.nodes[0]])
        try:
            return self.fleury(sub, self.find_start(sub))
        except NonEulerianError as exc:
            warnings.append(
                f"component is not Eulerian under multiplicities ({exc}); "
                "retrying with unit multiplicities"
            )
        flat = sub.collapsed()
        try:
            return self.fleury(flat, self.find_start(flat))
        except NonEulerianError as exc:
            warnings.append(
                f"component has no Euler path even with unit multiplicities "
                f"({exc}); emitting a best-effort walk"
            )
        out_d, in_d = flat.degrees()
        start = max(range(len(flat.nodes)), key=lambda i: (out_d[i] - in_d[i], -i))
        return self.fleury(flat, None, start=start, strict=False)

    def assemble(
        self, reads: list[EncodedSeq], k: int, *, simplify: bool | None = None
    ) -> AssemblyResult:
        """Reads to contigs: count, build, optionally simplify, walk, merge.

        Components that fail the Euler-degree screen are retried with all
        multiplicities collapsed to one, and as a last resort walked
        best-effort; each downgrade appends a warning instead of failing.
        """
        if simplify is None:
            simplify = self.simplify
        m = self.machine
        warnings: list[str] = []
        usable = [r for r in reads if len(r) >= k]
        if len(usable) < len(reads):
            warnings.append(
                f"skipped {len(reads) - len(usable)} reads shorter than k={k}"
            )
        if not usable:
            layout = mapping.layout_hash((self.rows, self.cols), k, self.value_width)
            empty = KmerTable(k, layout, m)
            return AssemblyResult([], empty, SparseGraph(k=k), [], warnings)
        with m.stage_scope(tr.STAGE_IO):
            m.xfer(sum((r.bit_length + 7) // 8 for r in usable))
        table = self.build_kmer_table(usable, k)
        if table.saturated_keys:
            warnings.append(
                f"{table.saturated_keys} k-mer counters saturated at "
                f"{(1 << table.value_width) - 1}"
            )
        g = self.build_graph(table)
        work = self.simplify_graph(g) if simplify else g
        with m.stage_scope(tr.STAGE_TRAVERSE):
            m.dpu_charge(len(work.nodes) + work.edge_count)
            comps = weakly_connected_components(work)
        contigs = []
        paths = []
        for comp in comps:
            sub = work.subgraph(comp) if len(comps) > 1 else work
            path = self._walk_component(sub, warnings)
            paths.append(path)
            contigs.append(contig_from_path(path.vertices, work.k or 2))
        with m.stage_scope(tr.STAGE_IO):
            m.xfer(sum((c.bit_length + 7) // 8 for c in contigs))
        for w in warnings:
            log.warning(w)
        return AssemblyResult(contigs, table, work, paths, warnings)
