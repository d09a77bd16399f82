"""Mission evaluation measures and batch aggregation.

Success for a trial means: at least 90 % of in-zone cells mapped, every
survivor found, zero constraint violations and completion within the time
limit.  Coverage and found-rate are reported for all trials, including
failures.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from itertools import combinations

from .errors import RangeError
from .simcore import WorldState

TLX_DIMENSIONS = ("MD", "PD", "TD", "Perf", "Eff", "Frus")
MAPPED_SUCCESS_FRACTION = 0.9


@dataclass(frozen=True)
class MissionResult:
    success: bool
    failure_cause: str | None
    coverage_pct: float
    found_pct: float
    mission_time: float
    seed: int
    method: str
    policy: str
    mapped_pct: float = 0.0
    errored: bool = False
    error: str | None = None

    def to_dict(self) -> dict:
        return {
            "schema_version": 1,
            "success": self.success,
            "failure_cause": self.failure_cause,
            "coverage_pct": self.coverage_pct,
            "found_pct": self.found_pct,
            "mapped_pct": self.mapped_pct,
            "mission_time": self.mission_time,
            "seed": self.seed,
            "method": self.method,
            "policy": self.policy,
            "errored": self.errored,
            "error": self.error,
        }


def result_from_dict(d: dict) -> MissionResult:
    return MissionResult(
        success=bool(d["success"]),
        failure_cause=d.get("failure_cause"),
        coverage_pct=float(d["coverage_pct"]),
        found_pct=float(d["found_pct"]),
        mission_time=float(d["mission_time"]),
        seed=int(d["seed"]),
        method=str(d["method"]),
        policy=str(d["policy"]),
        mapped_pct=float(d.get("mapped_pct", 0.0)),
        errored=bool(d.get("errored", False)),
        error=d.get("error"),
    )


def coverage(world_final: WorldState) -> float:
    """Percent of in-zone cells searched by the searcher's footprint."""
    return world_final.grid.searched_zone_fraction() * 100.0


def mapped_coverage(world_final: WorldState) -> float:
    return world_final.grid.mapped_zone_fraction() * 100.0


def found_rate(world_final: WorldState) -> float:
    """Percent of survivors detected at least once."""
    total = len(world_final.scene.survivors)
    if total == 0:
        raise RangeError("found_rate requires at least one survivor")
    return 100.0 * len(world_final.detected_ids()) / total


def msr(results: list[MissionResult]) -> float:
    """Mission success rate in percent over non-errored trials."""
    usable = [r for r in results if not r.errored]
    if not usable:
        raise RangeError("msr requires at least one result")
    return 100.0 * sum(1 for r in usable if r.success) / len(usable)


@dataclass(frozen=True)
class TlxInput:
    """Six 0-100 ratings plus the 15 pairwise choices that weight them."""

    ratings: dict[str, float]
    pairwise_choices: tuple[tuple[str, str, str], ...] = field(default_factory=tuple)
    # each choice is (dim_a, dim_b, winner)

    def weights(self) -> dict[str, int]:
        validate_tlx(self)
        w = {d: 0 for d in TLX_DIMENSIONS}
        for _, _, winner in self.pairwise_choices:
            w[winner] += 1
        return w


def validate_tlx(inp: TlxInput, quantized: bool = False) -> None:
    """Check ratings and pairwise choices; with ``quantized``, ratings must
    also sit on the 21-level grid (multiples of 5) used by paper forms."""
    for d in TLX_DIMENSIONS:
        if d not in inp.ratings:
            raise RangeError(f"missing rating for {d}")
        r = inp.ratings[d]
        if not 0.0 <= r <= 100.0:
            raise RangeError(f"rating {d}={r} outside [0, 100]")
        if quantized and abs(r / 5.0 - round(r / 5.0)) > 1e-9:
            raise RangeError(f"rating {d}={r} not on the 21-level grid")
    expected = {frozenset(p) for p in combinations(TLX_DIMENSIONS, 2)}
    seen = set()
    for a, b, winner in inp.pairwise_choices:
        pair = frozenset((a, b))
        if pair not in expected:
            raise RangeError(f"invalid dimension pair ({a}, {b})")
        if pair in seen:
            raise RangeError(f"duplicate pair ({a}, {b})")
        if winner not in (a, b):
            raise RangeError(f"winner {winner} not in pair ({a}, {b})")
        seen.add(pair)
    if seen != expected:
        missing = expected - seen
        raise RangeError(f"pairwise choices must cover all 15 pairs; missing {len(missing)}")


def tlx_score(inp: TlxInput) -> float:
    """Weighted workload score: (1/15) * sum of rating * pairwise win count."""
    w = inp.weights()
    return sum(inp.ratings[d] * w[d] for d in TLX_DIMENSIONS) / 15.0


def aggregate(results: list[MissionResult]) -> dict:
    """Per-method MSR plus mean/std of coverage, found rate and mission time."""
    groups: dict[str, list[MissionResult]] = {}
    for r in results:
        groups.setdefault(r.method, []).append(r)

    table: dict[str, dict] = {}
    warnings: list[str] = []
    for method in sorted(groups):
        rows = [r for r in groups[method] if not r.errored]
        errored = len(groups[method]) - len(rows)
        if not rows:
            warnings.append(f"method {method}: no usable results (all errored); excluded")
            continue
        table[method] = {
            "trials": len(rows),
            "errored": errored,
            "msr_pct": msr(rows),
            "coverage_pct": _mean_std([r.coverage_pct for r in rows]),
            "found_pct": _mean_std([r.found_pct for r in rows]),
            "mission_time_s": _mean_std([r.mission_time for r in rows]),
        }
    return {"schema_version": 1, "methods": table, "warnings": warnings}


def _mean_std(values: list[float]) -> dict:
    n = len(values)
    mean = sum(values) / n
    std = math.sqrt(sum((v - mean) ** 2 for v in values) / (n - 1)) if n > 1 else 0.0
    return {"mean": mean, "std": std}


def _pm(cell: dict) -> str:
    return f"{cell['mean']:.1f} ± {cell['std']:.1f}"


def render_table(agg: dict) -> str:
    """Aligned text rendering of an aggregate table."""
    headers = ["method", "trials", "MSR %", "coverage %", "found %", "TMT s"]
    rows = []
    for method, m in agg["methods"].items():
        rows.append(
            [
                method,
                str(m["trials"]),
                f"{m['msr_pct']:.1f}",
                _pm(m["coverage_pct"]),
                _pm(m["found_pct"]),
                _pm(m["mission_time_s"]),
            ]
        )
    widths = [max(len(h), *(len(r[i]) for r in rows)) if rows else len(h) for i, h in enumerate(headers)]
    lines = ["  ".join(h.ljust(widths[i]) for i, h in enumerate(headers))]
    lines.append("  ".join("-" * w for w in widths))
    for r in rows:
        lines.append("  ".join(r[i].ljust(widths[i]) for i in range(len(headers))))
    for w in agg.get("warnings", []):
        lines.append(f"! {w}")
    return "\n".join(lines)


def write_results_jsonl(results: list[MissionResult], path: str) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for r in results:
            f.write(json.dumps(r.to_dict()) + "\n")


def read_results_jsonl(path: str) -> list[MissionResult]:
    out = []
    with open(path, encoding="utf-8") as f:
        for line in f:
            line = line.strip()
            if line:
                out.append(result_from_dict(json.loads(line)))
    return out
