"""2-bit nucleotide packing.

A = 00, C = 01, G = 10, T = 11. Base i of a sequence occupies bit positions
2i (low code bit) and 2i+1, so a k-mer written to a row starting at column 0
spans columns [0, 2k). Sequences are immutable and hashable.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import ShapeError, SizeError

_CODE = {"A": 0, "C": 1, "G": 2, "T": 3}
_BASE = "ACGT"


@dataclass(frozen=True)
class EncodedSeq:
    """A DNA string packed two bits per base into one int."""

    bits: int
    length: int

    def __post_init__(self) -> None:
        if self.length < 0:
            raise SizeError("negative sequence length")
        if self.bits < 0 or self.bits >> (2 * self.length):
            raise ShapeError("packed bits exceed declared length")

    @classmethod
    def from_str(cls, s: str) -> "EncodedSeq":
        bits = 0
        for i, ch in enumerate(s):
            try:
                code = _CODE[ch]
            except KeyError:
                raise ShapeError(f"non-ACGT symbol {ch!r} at position {i}") from None
            bits |= code << (2 * i)
        return cls(bits, len(s))

    def to_str(self) -> str:
        return "".join(
            _BASE[(self.bits >> (2 * i)) & 3] for i in range(self.length)
        )

    def __len__(self) -> int:
        return self.length

    @property
    def bit_length(self) -> int:
        return 2 * self.length

    def window(self, start: int, n: int) -> "EncodedSeq":
        if start < 0 or n < 0 or start + n > self.length:
            raise SizeError("window outside sequence")
        return EncodedSeq((self.bits >> (2 * start)) & ((1 << (2 * n)) - 1), n)

    def prefix(self, n: int) -> "EncodedSeq":
        return self.window(0, n)

    def suffix(self, n: int) -> "EncodedSeq":
        return self.window(self.length - n, n)

    def concat(self, other: "EncodedSeq") -> "EncodedSeq":
        return EncodedSeq(
            self.bits | (other.bits << (2 * self.length)),
            self.length + other.length,
        )

    def __repr__(self) -> str:
        if self.length <= 32:
            return f"EncodedSeq({self.to_str()!r})"
        return f"EncodedSeq(len={self.length})"


def clean_segments(raw: str) -> tuple[list[str], int]:
    """Split a raw read at non-ACGT symbols.

    Returns the ACGT-only segments plus the number of symbols dropped.
    Lowercase input is accepted and upper-cased.
    """
    s = raw.upper()
    segments: list[str] = []
    cur: list[str] = []
    dropped = 0
    for ch in s:
        if ch in _CODE:
            cur.append(ch)
        else:
            dropped += 1
            if cur:
                segments.append("".join(cur))
                cur = []
    if cur:
        segments.append("".join(cur))
    return segments, dropped


def extract_kmers(seq: EncodedSeq, k: int) -> list[EncodedSeq]:
    """All length-k windows of seq in order; empty when the read is short."""
    if k < 1:
        raise SizeError("k must be positive")
    n = seq.length - k + 1
    if n <= 0:
        return []
    mask = (1 << (2 * k)) - 1
    bits = seq.bits
    return [EncodedSeq((bits >> (2 * i)) & mask, k) for i in range(n)]
