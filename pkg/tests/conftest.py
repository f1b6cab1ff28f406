"""Session fixtures: the canonical 10,000-base round-trip workload.

Several acceptance checks (round trip, stage breakdown, parallelism
calibration, memory-wall metrics) share one seeded workload; assembling it
once per session keeps the suite fast without weakening any check.
"""

import random
import time

import pytest

from pimgasm.assembly import Assembler
from pimgasm.encoding import EncodedSeq
from pimgasm.seqio import distinct_window_genome, tile_reads

CANONICAL_LENGTH = 10_000
CANONICAL_K = 25
CANONICAL_READ_LEN = 100
CANONICAL_SEED = 0


@pytest.fixture(scope="session")
def canonical_genome():
    return distinct_window_genome(
        CANONICAL_LENGTH, CANONICAL_K - 1, random.Random(CANONICAL_SEED)
    )


@pytest.fixture(scope="session")
def canonical_reads(canonical_genome):
    return [
        EncodedSeq.from_str(s)
        for s in tile_reads(canonical_genome, CANONICAL_READ_LEN, 1)
    ]


@pytest.fixture(scope="session")
def canonical_run(canonical_reads):
    """Simplify-off assembly of the canonical workload, with wall time."""
    asm = Assembler()
    t0 = time.perf_counter()
    result = asm.assemble(canonical_reads, CANONICAL_K)
    elapsed = time.perf_counter() - t0
    return {"asm": asm, "result": result, "elapsed_s": elapsed}
