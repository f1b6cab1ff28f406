"""Latency, energy, and power accounting over operation traces.

Every trace event class carries a (latency ns, energy nJ) cost; a report
sums them per pipeline stage, adds leakage (power x time), and derives the
transfer-bound and compute-utilization ratios. Parallelism is modeled as
an Amdahl split: a configurable fraction of the single-group runtime
shrinks with the group count while leakage power grows linearly with it.
All math is plain float arithmetic on aggregated counts, so identical
traces and configs produce bit-identical reports.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field, replace

from . import trace as tr
from .errors import ConfigError

SCHEMA_VERSION = 1

# compute-busy classes for the utilization ratio; R/W are array accesses
# and XFER is host traffic, so the three pools never overlap
_COMPUTE_KINDS = (tr.C_AND3, tr.C_ADD, tr.DPU)


@dataclass(frozen=True)
class ClassCost:
    latency_ns: float
    energy_nj: float

    def __post_init__(self):
        if self.latency_ns < 0 or self.energy_nj < 0:
            raise ConfigError("event costs must be non-negative")


# flat JSON key -> (event class, field) for the per-class costs
_CLASS_KEYS = {
    "r": tr.R,
    "w": tr.W,
    "c_and3": tr.C_AND3,
    "c_add": tr.C_ADD,
    "dpu": tr.DPU,
    "xfer": tr.XFER,
}


@dataclass(frozen=True)
class CostConfig:
    """Per-class costs plus leakage, parallelism, and reporting knobs.

    XFER costs are per byte; the stock values price a 64-byte burst at
    1 ns and 0.1 nJ. leakage_base_mw burns whenever the chip is on;
    leakage_per_group_mw is added per active sub-array group.
    penalty_factor inflates reported time and dynamic energy by 1+p
    (a fairness handicap knob; 0 disables it).
    """

    classes: dict[str, ClassCost] = field(default_factory=lambda: {
        tr.R: ClassCost(3.91, 0.78),
        tr.W: ClassCost(4.59, 0.69),
        tr.C_AND3: ClassCost(3.91, 0.85),
        tr.C_ADD: ClassCost(3.91, 1.93),
        tr.DPU: ClassCost(0.05, 0.01),
        tr.XFER: ClassCost(1.0 / 64.0, 0.1 / 64.0),
    })
    leakage_base_mw: float = 586.0
    leakage_per_group_mw: float = 0.0
    parallel_fraction: float = 16.0 / 21.0
    area_mm2: float = 9.3
    penalty_factor: float = 0.0

    def __post_init__(self):
        missing = [k for k in tr.KINDS if k not in self.classes]
        if missing:
            raise ConfigError(f"missing cost classes: {missing}")
        if not 0.0 <= self.parallel_fraction <= 1.0:
            raise ConfigError("parallel_fraction must lie in [0, 1]")
        if self.leakage_base_mw < 0 or self.leakage_per_group_mw < 0:
            raise ConfigError("leakage must be non-negative")
        if self.penalty_factor < 0:
            raise ConfigError("penalty_factor must be non-negative")

    def cost(self, kind: str) -> ClassCost:
        try:
            return self.classes[kind]
        except KeyError:
            raise ConfigError(f"unknown event class {kind!r}") from None

    def leakage_w(self, groups: int = 1) -> float:
        return (self.leakage_base_mw + self.leakage_per_group_mw * groups) / 1000.0

    def to_dict(self) -> dict:
        d = {}
        for key, kind in _CLASS_KEYS.items():
            c = self.classes[kind]
            d[f"{key}_latency_ns"] = c.latency_ns
            d[f"{key}_energy_nj"] = c.energy_nj
        d["leakage_base_mw"] = self.leakage_base_mw
        d["leakage_per_group_mw"] = self.leakage_per_group_mw
        d["parallel_fraction"] = self.parallel_fraction
        d["area_mm2"] = self.area_mm2
        d["penalty_factor"] = self.penalty_factor
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "CostConfig":
        base = cls()
        classes = dict(base.classes)
        scalars = {
            "leakage_base_mw": base.leakage_base_mw,
            "leakage_per_group_mw": base.leakage_per_group_mw,
            "parallel_fraction": base.parallel_fraction,
            "area_mm2": base.area_mm2,
            "penalty_factor": base.penalty_factor,
        }
        staged: dict[str, dict[str, float]] = {k: {} for k in _CLASS_KEYS}
        for key, val in d.items():
            if not isinstance(val, (int, float)) or isinstance(val, bool):
                raise ConfigError(f"{key} must be a number")
            if key in scalars:
                scalars[key] = float(val)
            elif key.endswith("_latency_ns") and key[:-11] in _CLASS_KEYS:
                staged[key[:-11]]["latency_ns"] = float(val)
            elif key.endswith("_energy_nj") and key[:-10] in _CLASS_KEYS:
                staged[key[:-10]]["energy_nj"] = float(val)
            else:
                raise ConfigError(f"unknown cost-config key {key!r}")
        for stem, parts in staged.items():
            if parts:
                kind = _CLASS_KEYS[stem]
                old = classes[kind]
                classes[kind] = ClassCost(
                    parts.get("latency_ns", old.latency_ns),
                    parts.get("energy_nj", old.energy_nj),
                )
        return cls(classes=classes, **scalars)

    def to_json(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")

    @classmethod
    def from_json(cls, path) -> "CostConfig":
        with open(path) as fh:
            d = json.load(fh)
        if not isinstance(d, dict):
            raise ConfigError("cost config must be a JSON object")
        return cls.from_dict(d)


@dataclass(frozen=True)
class StageRow:
    stage: str
    cycles: dict[str, int]
    latency_ns: float
    energy_nj: float
    avg_power_w: float


@dataclass(frozen=True)
class StageReport:
    rows: list[StageRow]
    total_latency_ns: float
    dynamic_energy_nj: float
    leakage_energy_nj: float
    total_energy_nj: float
    avg_power_w: float
    mbr: float
    rur: float
    pd: int = 1
    schema_version: int = SCHEMA_VERSION

    def stage_fraction(self, stage: str) -> float:
        if self.total_latency_ns == 0:
            return 0.0
        return sum(r.latency_ns for r in self.rows if r.stage == stage) / self.total_latency_ns

    def to_dict(self) -> dict:
        return {
            "schema_version": self.schema_version,
            "pd": self.pd,
            "stages": [
                {
                    "stage": r.stage,
                    "cycles": dict(sorted(r.cycles.items())),
                    "latency_ns": r.latency_ns,
                    "energy_nj": r.energy_nj,
                    "avg_power_w": r.avg_power_w,
                }
                for r in self.rows
            ],
            "total_latency_ns": self.total_latency_ns,
            "dynamic_energy_nj": self.dynamic_energy_nj,
            "leakage_energy_nj": self.leakage_energy_nj,
            "total_energy_nj": self.total_energy_nj,
            "avg_power_w": self.avg_power_w,
            "mbr": self.mbr,
            "rur": self.rur,
        }

    def to_json(self, path=None) -> str:
        text = json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"
        if path is not None:
            with open(path, "w") as fh:
                fh.write(text)
        return text

    def to_csv(self, path=None) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["stage", "latency_ns", "energy_nj", "avg_power_w"])
        for r in self.rows:
            w.writerow([r.stage, repr(r.latency_ns), repr(r.energy_nj), repr(r.avg_power_w)])
        w.writerow(["total", repr(self.total_latency_ns), repr(self.total_energy_nj),
                    repr(self.avg_power_w)])
        text = buf.getvalue()
        if path is not None:
            with open(path, "w") as fh:
                fh.write(text)
        return text


def account(trace: tr.OpTrace, cfg: CostConfig) -> StageReport:
    """Serialized single-group pricing of a trace, stage by stage.

    Latency is the straight sum of event count x class latency; dynamic
    energy likewise; leakage is the single-group leakage power times the
    total latency. A nonzero penalty factor scales every row's time and
    energy by 1+p. Unknown event classes raise ConfigError.
    """
    scale = 1.0 + cfg.penalty_factor
    leak_w = cfg.leakage_w(1)
    per_stage: dict[str, dict[str, int]] = {}
    for stage, kind, count in trace.records():
        per_stage.setdefault(stage, {})[kind] = count
    rows = []
    total_ns = 0.0
    total_nj = 0.0
    xfer_ns = 0.0
    busy_ns = 0.0
    for stage, cycles in per_stage.items():
        ns = 0.0
        nj = 0.0
        for kind, count in cycles.items():
            c = cfg.cost(kind)
            k_ns = count * c.latency_ns * scale
            ns += k_ns
            nj += count * c.energy_nj * scale
            if kind == tr.XFER:
                xfer_ns += k_ns
            elif kind in _COMPUTE_KINDS:
                busy_ns += k_ns
        power = (nj / ns if ns else 0.0) + leak_w
        rows.append(StageRow(stage, dict(cycles), ns, nj, power))
        total_ns += ns
        total_nj += nj
    leak_nj = leak_w * total_ns
    total_energy = total_nj + leak_nj
    return StageReport(
        rows=rows,
        total_latency_ns=total_ns,
        dynamic_energy_nj=total_nj,
        leakage_energy_nj=leak_nj,
        total_energy_nj=total_energy,
        avg_power_w=(total_energy / total_ns if total_ns else 0.0),
        mbr=(xfer_ns / total_ns if total_ns else 0.0),
        rur=(busy_ns / total_ns if total_ns else 0.0),
    )


def memory_wall_metrics(trace: tr.OpTrace, cfg: CostConfig) -> dict[str, float]:
    rep = account(trace, cfg)
    return {"MBR": rep.mbr, "RUR": rep.rur}


@dataclass(frozen=True)
class SweepPoint:
    pd: int
    runtime_ns: float
    avg_power_w: float
    energy_nj: float


@dataclass(frozen=True)
class SweepResult:
    points: list[SweepPoint]

    def to_csv(self, path=None) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["pd", "runtime_ns", "avg_power_w", "energy_nj"])
        for p in self.points:
            w.writerow([p.pd, repr(p.runtime_ns), repr(p.avg_power_w), repr(p.energy_nj)])
        text = buf.getvalue()
        if path is not None:
            with open(path, "w") as fh:
                fh.write(text)
        return text


def amdahl_runtime(total_ns: float, parallel_fraction: float, pd: int) -> float:
    par = parallel_fraction * total_ns
    return (total_ns - par) + par / pd


def sweep_pd(trace: tr.OpTrace, cfg: CostConfig, pd_list: list[int]) -> SweepResult:
    """Runtime/power/energy across group counts, from one serial pricing.

    The parallel fraction of the single-group runtime divides by the
    group count; dynamic energy is conserved; leakage power rises by one
    per-group increment per extra group.
    """
    if not pd_list:
        raise ConfigError("pd list must be nonempty")
    base = account(trace, cfg)
    points = []
    for pd in pd_list:
        if int(pd) != pd or pd < 1:
            raise ConfigError(f"parallelism degree must be an integer >= 1, got {pd}")
        pd = int(pd)
        rt = amdahl_runtime(base.total_latency_ns, cfg.parallel_fraction, pd)
        leak_w = cfg.leakage_w(pd)
        dyn_w = base.dynamic_energy_nj / rt if rt else 0.0
        power = dyn_w + leak_w
        energy = base.dynamic_energy_nj + leak_w * rt
        points.append(SweepPoint(pd, rt, power, energy))
    return SweepResult(points)


def fit_pd_calibration(
    trace: tr.OpTrace,
    cfg: CostConfig,
    *,
    pd_hi: int = 8,
    time_ratio: float = 3.0,
    power_ratio: float = 7.0,
) -> CostConfig:
    """Fit the two free parallelism knobs to target sweep ratios.

    Solves parallel_fraction so runtime(1)/runtime(pd_hi) = time_ratio,
    then leakage_per_group so power(pd_hi)/power(1) = power_ratio on the
    given workload. Infeasible targets raise ConfigError.
    """
    if pd_hi < 2:
        raise ConfigError("pd_hi must be at least 2")
    if not 1.0 < time_ratio <= pd_hi:
        raise ConfigError("time ratio must lie in (1, pd_hi]")
    frac = (1.0 - 1.0 / time_ratio) / (1.0 - 1.0 / pd_hi)
    base = account(trace, cfg)
    if base.total_latency_ns == 0:
        raise ConfigError("cannot calibrate on an empty workload")
    x = base.dynamic_energy_nj / base.total_latency_ns  # dynamic power, W
    l0 = cfg.leakage_base_mw / 1000.0
    denom = pd_hi - power_ratio
    if denom <= 0:
        raise ConfigError("power ratio must be below pd_hi")
    lg = ((power_ratio - time_ratio) * x + (power_ratio - 1.0) * l0) / denom
    if lg < 0:
        raise ConfigError("targets imply negative per-group leakage")
    return replace(
        cfg, parallel_fraction=frac, leakage_per_group_mw=lg * 1000.0
    )


def calibrated_config() -> CostConfig:
    """Stock config with the committed parallelism calibration applied."""
    from importlib.resources import files

    d = json.loads(files("pimgasm.data").joinpath("pd_calibration.json").read_text())
    return CostConfig.from_dict(d)


def comparison_table(reports: list[StageReport], labels: list[str]) -> list[dict]:
    """One summary row per labeled report, with stage time percentages."""
    if len(reports) != len(labels):
        raise ConfigError("need exactly one label per report")
    rows = []
    for label, rep in zip(labels, reports):
        row = {
            "label": label,
            "total_latency_ns": rep.total_latency_ns,
            "avg_power_w": rep.avg_power_w,
            "total_energy_nj": rep.total_energy_nj,
        }
        for r in rep.rows:
            row[f"pct_{r.stage}"] = 100.0 * rep.stage_fraction(r.stage)
        rows.append(row)
    return rows


def table_to_csv(rows: list[dict], path=None) -> str:
    cols: list[str] = []
    for row in rows:
        for key in row:
            if key not in cols:
                cols.append(key)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(cols)
    for row in rows:
        w.writerow([
            row.get(c, "") if isinstance(row.get(c, ""), str) else repr(row.get(c, 0.0))
            for c in cols
        ])
    text = buf.getvalue()
    if path is not None:
        with open(path, "w") as fh:
            fh.write(text)
    return text


def table_to_json(rows: list[dict], path=None) -> str:
    text = json.dumps(rows, indent=2, sort_keys=True) + "\n"
    if path is not None:
        with open(path, "w") as fh:
            fh.write(text)
    return text
