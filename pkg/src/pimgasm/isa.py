"""Instruction layer over the sub-array fabric.

A Machine owns a set of sub-arrays (created on demand, shared trace) plus
the scalar digital unit of the controller. The memory-side instruction set
is deliberately tiny:

  mem_insert  read-then-write copy of a bit region (or an immediate)
  cmp         bulk equality: per-row XNOR triple plus an AND reduction
  add         bit-serial addition of vertical words, LSB at the lowest row

Vertical words put bit i of a value in row lsb_row + i of one column, so a
width-w add ripples through w full-add cycles. Because sensing covers every
column, the same w cycles add up to `cols` word pairs when callers batch by
column; cost is identical for 1 or cols columns.

Cost contract (pinned by tests):
  mem_insert: ceil(size/row_span) R (memory source only) + the same W
  cmp:        ceil(size/row_span) C_ADD + 1 DPU
  add/const:  w C_ADD + 2w W   (w sum writes, w-1 carry writes, 1 zero
              write that restores the carry row)
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from . import trace as tr
from .errors import (
    AddressError,
    PlacementError,
    ShapeError,
    SizeError,
    StateError,
)
from .fabric import XOR3_CFG, RowLayout, SubArray, ones


@dataclass(frozen=True)
class MemAddress:
    """Bit region inside one sub-array: row, starting column, bit length.

    Regions wider than one row must start at column 0 and continue on the
    following rows, one full row per chunk.
    """

    subarray_id: int
    row: int
    col_start: int
    bit_len: int

    def __post_init__(self) -> None:
        if self.bit_len < 1:
            raise SizeError("bit_len must be positive")
        if self.row < 0 or self.col_start < 0:
            raise AddressError("negative address")


@dataclass(frozen=True)
class VerticalWordRef:
    """A width-bit integer stored vertically in one column, LSB lowest row."""

    subarray_id: int
    col: int
    lsb_row: int
    width: int

    def __post_init__(self) -> None:
        if self.width < 1:
            raise ShapeError("word width must be positive")
        if self.col < 0 or self.lsb_row < 0:
            raise AddressError("negative address")

    @property
    def rows(self) -> range:
        return range(self.lsb_row, self.lsb_row + self.width)


@dataclass(frozen=True)
class CmpResult:
    equal: bool
    mask: int    # bit i set iff operand bits i matched
    width: int


class Machine:
    """Sub-array pool plus controller-side scalar unit, one shared trace."""

    def __init__(self, rows: int = 1024, cols: int = 256) -> None:
        self.rows = rows
        self.cols = cols
        self.trace = tr.OpTrace()
        self._subarrays: dict[int, SubArray] = {}
        self._next_id = 0

    # ---- sub-array pool ----------------------------------------------

    def new_subarray(self, layout: RowLayout | None = None) -> int:
        sid = self._next_id
        self._next_id += 1
        self._subarrays[sid] = SubArray(
            self.rows, self.cols, layout=layout, op_trace=self.trace, subarray_id=sid
        )
        return sid

    def subarray(self, sid: int) -> SubArray:
        try:
            return self._subarrays[sid]
        except KeyError:
            raise AddressError(f"sub-array {sid} was never allocated") from None

    @property
    def subarray_count(self) -> int:
        return self._next_id

    def stage_scope(self, stage: str):
        return self.trace.stage_scope(stage)

    # ---- mem_insert ----------------------------------------------------

    def _chunks(self, addr: MemAddress, size: int) -> list[tuple[int, int, int]]:
        """(row, col_start, span) chunks covering `size` bits from addr."""
        if addr.col_start + size <= self.cols:
            return [(addr.row, addr.col_start, size)]
        if addr.col_start != 0:
            raise SizeError("multi-row region must start at column 0")
        out = []
        row, left = addr.row, size
        while left > 0:
            span = min(left, self.cols)
            out.append((row, 0, span))
            row += 1
            left -= span
        return out

    def mem_insert(
        self, dst: MemAddress, src: MemAddress | int, size: int | None = None
    ) -> None:
        """Copy `size` bits into dst from memory or from an immediate.

        A memory source is read row-chunk by row-chunk (R each) and written
        back through the write drivers (W each); an immediate skips the
        reads. Copying a region onto itself is a legal no-op on the data
        but still costs the cycles.
        """
        if size is None:
            size = dst.bit_len
        if size < 1:
            raise SizeError("size must be positive")
        if size > dst.bit_len:
            raise SizeError("size exceeds destination region")
        dsub = self.subarray(dst.subarray_id)
        dst_chunks = self._chunks(dst, size)

        if isinstance(src, MemAddress):
            if size > src.bit_len:
                raise SizeError("size exceeds source region")
            ssub = self.subarray(src.subarray_id)
            src_chunks = self._chunks(src, size)
            vals = [ssub.read_bits(r, c, span) for r, c, span in src_chunks]
        else:
            if src < 0 or src >> size:
                raise SizeError("immediate does not fit size")
            vals, off = [], 0
            for _, _, span in dst_chunks:
                vals.append((src >> off) & ones(span))
                off += span

        for (r, c, span), v in zip(dst_chunks, vals):
            dsub.write_bits(r, c, span, v)

    # ---- cmp -----------------------------------------------------------

    def cmp(self, src1: MemAddress, src2: MemAddress, size: int | None = None) -> CmpResult:
        """Bulk equality of two row-aligned regions of one sub-array.

        Each row chunk is one XNOR triple (operand rows plus the all-ones
        init row under the parity configuration); the controller AND-reduces
        the concatenated match mask in one DPU step.
        """
        if src1.subarray_id != src2.subarray_id:
            raise PlacementError("cmp operands must share a sub-array")
        if src1.col_start != src2.col_start:
            raise PlacementError("cmp operands must share a column span")
        if size is None:
            size = min(src1.bit_len, src2.bit_len)
        if size > src1.bit_len or size > src2.bit_len:
            raise SizeError("size exceeds an operand region")
        sub = self.subarray(src1.subarray_id)
        init1 = sub.layout.init1_row
        mask = 0
        off = 0
        for (r1, c, span), (r2, _, _) in zip(
            self._chunks(src1, size), self._chunks(src2, size)
        ):
            out = sub.activate((r1, r2, init1), XOR3_CFG)
            # xor3 with the constant-1 row is XNOR2: bit set iff cells match
            mask |= ((out.xor3 >> c) & ones(span)) << off
            off += span
        equal = self.dpu_and_reduce(mask, size)
        return CmpResult(equal, mask, size)

    # ---- add -----------------------------------------------------------

    def _add_planes(
        self,
        sub: SubArray,
        a_rows: Sequence[int],
        b_rows: Sequence[int],
        out_lsb: int,
        width: int,
        colmask: int,
    ) -> int:
        """Shared ripple core: returns the final carry plane (overflow bits).

        a_rows/b_rows give the operand row per bit (so constants can point
        bits at the init rows). Writes are masked to the batched columns;
        the final carry write stores zeros, which both hands the overflow
        to the controller and re-arms the carry row.
        """
        carry = sub.layout.carry_rows[0]
        if sub.cells[carry] & colmask:
            raise StateError("carry row not zeroed for the addressed columns")
        out_rows = range(out_lsb, out_lsb + width)
        for i in range(width):
            trip = (a_rows[i], b_rows[i], carry)
            if len(set(trip)) != 3:
                raise AddressError("operand bit rows collide within an activation")
        cy_plane = 0
        for i in range(width):
            s, cy = sub.full_add_cycle((a_rows[i], b_rows[i], carry))
            sub.write_masked(out_rows[i], s, colmask)
            if i + 1 < width:
                sub.write_masked(carry, cy, colmask)
            else:
                sub.write_masked(carry, 0, colmask)
                cy_plane = cy
        return cy_plane & colmask

    @staticmethod
    def _check_word_overlap(out: range, a: range, b: range) -> None:
        """out must alias an operand exactly or stay clear of both."""
        for op in (a, b):
            if out == op:
                continue
            if out.start < op.stop and op.start < out.stop:
                raise AddressError("output rows partially overlap an operand")

    def add_cols(
        self,
        sid: int,
        a_lsb: int,
        b_lsb: int,
        out_lsb: int,
        width: int,
        cols: Iterable[int],
    ) -> dict[int, int]:
        """Column-batched vertical add: out = a + b in every listed column.

        All words share the row structure; returns {col: overflow bit}.
        """
        cols = list(cols)
        if not cols or len(set(cols)) != len(cols):
            raise ShapeError("batch needs a non-empty set of distinct columns")
        sub = self.subarray(sid)
        for c in cols:
            sub._check_col(c)
        if a_lsb == b_lsb:
            raise AddressError("operands occupy the same rows")
        self._check_word_overlap(
            range(out_lsb, out_lsb + width),
            range(a_lsb, a_lsb + width),
            range(b_lsb, b_lsb + width),
        )
        colmask = 0
        for c in cols:
            colmask |= 1 << c
        a_rows = range(a_lsb, a_lsb + width)
        b_rows = range(b_lsb, b_lsb + width)
        cy = self._add_planes(sub, a_rows, b_rows, out_lsb, width, colmask)
        return {c: (cy >> c) & 1 for c in cols}

    def add(self, a: VerticalWordRef, b: VerticalWordRef, out: VerticalWordRef) -> int:
        """Single-column vertical add, out = a + b mod 2**w; returns overflow."""
        if not (a.subarray_id == b.subarray_id == out.subarray_id):
            raise PlacementError("add operands must share a sub-array")
        if not (a.width == b.width == out.width):
            raise ShapeError("add operands must share a width")
        if not (a.col == b.col == out.col):
            raise ShapeError("vertical operands must share a bit-line (column)")
        return self.add_cols(a.subarray_id, a.lsb_row, b.lsb_row, out.lsb_row, a.width, [a.col])[a.col]

    def add_const_cols(
        self, sid: int, lsb: int, width: int, cols: Iterable[int], constant: int
    ) -> dict[int, int]:
        """In-place ctr += constant for every listed column.

        The constant operand is synthesized from the init rows: bit i of the
        constant selects the all-ones or all-zeros row, so the same value is
        present on every bit-line without a dedicated operand column.
        constant is taken mod 2**width (so -1 increments by the all-ones
        word, i.e. subtracts 1 in two's complement).
        """
        cols = list(cols)
        if not cols or len(set(cols)) != len(cols):
            raise ShapeError("batch needs a non-empty set of distinct columns")
        sub = self.subarray(sid)
        const = constant & ones(width)
        layout = sub.layout
        b_rows = [
            layout.init1_row if (const >> i) & 1 else layout.init0_row
            for i in range(width)
        ]
        colmask = 0
        for c in cols:
            sub._check_col(c)
            colmask |= 1 << c
        a_rows = range(lsb, lsb + width)
        cy = self._add_planes(sub, a_rows, b_rows, lsb, width, colmask)
        return {c: (cy >> c) & 1 for c in cols}

    def add_const(self, ctr: VerticalWordRef, constant: int) -> int:
        return self.add_const_cols(
            ctr.subarray_id, ctr.lsb_row, ctr.width, [ctr.col], constant
        )[ctr.col]

    def increment(self, ctr: VerticalWordRef) -> int:
        """ctr += 1; returns the overflow bit (wraps modulo 2**width)."""
        return self.add_const(ctr, 1)

    def decrement(self, ctr: VerticalWordRef) -> int:
        return self.add_const(ctr, -1)

    # ---- vertical word helpers -----------------------------------------

    def write_vword(self, ref: VerticalWordRef, value: int) -> None:
        if value < 0 or value >> ref.width:
            raise SizeError("value does not fit word width")
        sub = self.subarray(ref.subarray_id)
        for i, row in enumerate(ref.rows):
            sub.write_cell(row, ref.col, (value >> i) & 1)

    def read_vword(self, ref: VerticalWordRef) -> int:
        sub = self.subarray(ref.subarray_id)
        v = 0
        for i, row in enumerate(ref.rows):
            v |= ((sub.read_row(row) >> ref.col) & 1) << i
        return v

    # ---- controller scalar unit ----------------------------------------

    def dpu_and_reduce(self, mask: int, width: int) -> bool:
        """True iff every one of `width` mask bits is set. One DPU step."""
        if width < 1:
            raise ShapeError("empty reduction")
        if mask < 0 or mask >> width:
            raise ShapeError("mask wider than declared width")
        self.trace.emit(tr.DPU, 1)
        return mask == ones(width)

    def dpu_scalar(self, op: str, x: int, y: int):
        """Small scalar op in the controller (compare/add). One DPU step."""
        lim = 1 << 32
        if not (-lim <= x < lim and -lim <= y < lim):
            raise ShapeError("dpu scalar operands must fit 32 bits")
        self.trace.emit(tr.DPU, 1)
        if op == "compare_eq":
            return x == y
        if op == "compare_gt":
            return x > y
        if op == "add_small":
            return x + y
        raise ShapeError(f"unknown dpu op {op!r}")

    def dpu_charge(self, n: int) -> None:
        """Account n controller steps for host-assisted work (e.g. DFS)."""
        self.trace.emit(tr.DPU, n)

    # ---- host transfers --------------------------------------------------

    def xfer(self, nbytes: int) -> None:
        """Host<->fabric movement of nbytes over the external link."""
        if nbytes < 0:
            raise SizeError("negative transfer")
        self.trace.emit(tr.XFER, nbytes)
