"""Bit-accurate simulator of an in-memory genome assembly fabric.

Multi-row activation logic, a three-instruction memory ISA, a de Bruijn
assembler running entirely on those instructions, and a trace-driven
latency/energy/power model.
"""

from .assembly import (
    Assembler,
    AssemblyResult,
    DegreeTable,
    EulerPath,
    KmerTable,
    SparseGraph,
    contig_from_path,
    weakly_connected_components,
)
from .encoding import EncodedSeq, clean_segments, extract_kmers
from .errors import (
    AddressError,
    CapacityError,
    ConfigError,
    ConsistencyError,
    DisconnectedGraphError,
    NonEulerianError,
    ParseError,
    PlacementError,
    ProtectionError,
    ShapeError,
    SimError,
    SizeError,
    StateError,
)
from .fabric import (
    AND3_CFG,
    MAJ_CFG,
    OR3_CFG,
    READ_CFG,
    XOR3_CFG,
    RowLayout,
    SenseConfig,
    SenseOutput,
    SubArray,
)
from .isa import CmpResult, Machine, MemAddress, VerticalWordRef
from .mapping import (
    CapacityPlan,
    HashLayout,
    PartitionPlan,
    capacity_plan,
    layout_hash,
    partition_graph,
    place_vertical_word,
    stable_hash,
    subarrays_needed,
)
from .perf import (
    ClassCost,
    CostConfig,
    StageReport,
    SweepResult,
    account,
    calibrated_config,
    comparison_table,
    fit_pd_calibration,
    memory_wall_metrics,
    sweep_pd,
)
from .trace import OpTrace

__version__ = "0.1.0"

__all__ = [
    "AND3_CFG",
    "AddressError",
    "Assembler",
    "AssemblyResult",
    "CapacityError",
    "CapacityPlan",
    "ClassCost",
    "CmpResult",
    "ConfigError",
    "ConsistencyError",
    "CostConfig",
    "DegreeTable",
    "DisconnectedGraphError",
    "EncodedSeq",
    "EulerPath",
    "HashLayout",
    "KmerTable",
    "MAJ_CFG",
    "Machine",
    "MemAddress",
    "NonEulerianError",
    "OR3_CFG",
    "OpTrace",
    "ParseError",
    "PartitionPlan",
    "PlacementError",
    "ProtectionError",
    "READ_CFG",
    "RowLayout",
    "SenseConfig",
    "SenseOutput",
    "ShapeError",
    "SimError",
    "SizeError",
    "SparseGraph",
    "StageReport",
    "StateError",
    "SubArray",
    "SweepResult",
    "VerticalWordRef",
    "XOR3_CFG",
    "account",
    "calibrated_config",
    "capacity_plan",
    "clean_segments",
    "comparison_table",
    "contig_from_path",
    "extract_kmers",
    "fit_pd_calibration",
    "layout_hash",
    "memory_wall_metrics",
    "partition_graph",
    "place_vertical_word",
    "stable_hash",
    "subarrays_needed",
    "sweep_pd",
    "weakly_connected_components",
]
