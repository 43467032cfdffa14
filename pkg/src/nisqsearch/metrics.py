"""Benchmark metrics: success probability, expected depth, selectivity and circuit fidelity."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .state import OutcomeDistribution

CSV_FIELDS = ("circuit", "eps1", "eps2", "graph", "depth", "p_success", "expected_depth",
              "selectivity", "fidelity", "batches", "shots")


def _check_width(dist: OutcomeDistribution, target: str) -> None:
    if len(target) != dist.width:
        raise ValueError(f"target width {len(target)} != measured width {dist.width}")


def success_probability(dist: OutcomeDistribution, target: str) -> float:
    _check_width(dist, target)
    return float(dist[target])


def combined_success(stage_probs: Sequence[float]) -> float:
    """Two-stage success is the product of the stage probabilities."""
    return float(np.prod(stage_probs))


def expected_depth(depth: float, p: float) -> float:
    """Depth per found target; +inf when the target is never found."""
    if depth < 0:
        raise ValueError("depth must be non-negative")
    if not 0.0 <= p <= 1.0 + 1e-12:
        raise ValueError(f"probability {p} outside [0, 1]")
    return math.inf if p == 0 else depth / p


def selectivity(dist: OutcomeDistribution, target: str) -> float:
    """ln(P_t / max P_nt): +inf when no other outcome occurs, -inf when the target never does."""
    _check_width(dist, target)
    p_t = dist[target]
    others = [p for bits, p in dist.probs.items() if bits != target]
    p_nt = max(others, default=0.0)
    if p_nt == 0.0:
        if p_t == 0.0:
            raise ValueError("empty distribution")
        return math.inf
    if p_t == 0.0:
        return -math.inf
    return math.log(p_t / p_nt)


def overlap(p1: OutcomeDistribution, p2: OutcomeDistribution) -> float:
    """f(P1, P2) = (sum_j sqrt(P1(j) P2(j)))^2."""
    if p1.width != p2.width:
        raise ValueError("distributions over different widths")
    v1, v2 = p1.vector(), p2.vector()
    return float(np.sum(np.sqrt(v1 * v2)) ** 2)


def circuit_fidelity(out: OutcomeDistribution, ideal: OutcomeDistribution) -> float:
    """Overlap with the ideal distribution, rescaled so uniform output scores 0 and ideal scores 1."""
    f_uni = overlap(OutcomeDistribution.uniform(ideal.width), ideal)
    if abs(1.0 - f_uni) < 1e-15:
        raise ValueError("fidelity undefined: the ideal distribution is uniform")
    if out is ideal or out.probs == ideal.probs:
        return 1.0
    if all(abs(p - 2.0**-out.width) < 1e-15 for p in out.vector()):
        return 0.0
    return (overlap(out, ideal) - f_uni) / (1.0 - f_uni)


@dataclass
class MetricValue:
    """Mean and sample standard deviation over batches (std 0 for exact evaluations)."""

    mean: float
    std: float = 0.0

    @classmethod
    def of(cls, values: Sequence[float]) -> "MetricValue":
        values = [float(v) for v in values]
        if len(values) == 1:
            return cls(values[0], 0.0)
        mean = float(np.mean(values))
        if any(math.isinf(v) for v in values):
            # a spread is meaningless once any batch is infinite
            return cls(mean, 0.0 if all(v == values[0] for v in values) else math.nan)
        return cls(mean, float(np.std(values, ddof=1)))

    @property
    def flag(self) -> str:
        if math.isinf(self.mean):
            return "+inf" if self.mean > 0 else "-inf"
        return "finite"


def _num(x: float) -> "float | str":
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return x


@dataclass
class BenchmarkReport:
    """All four metrics for one circuit (or one stage of a two-stage circuit)."""

    circuit: str
    graph: str
    eps1: float
    eps2: float
    depth: int
    success_probability: MetricValue
    expected_depth: MetricValue
    selectivity: MetricValue
    fidelity: MetricValue
    batches: int = 1
    shots: int | None = None
    stages: list["BenchmarkReport"] = field(default_factory=list)

    def to_dict(self) -> dict:
        out = {
            "circuit": self.circuit, "graph": self.graph, "eps1": self.eps1, "eps2": self.eps2,
            "depth": self.depth, "batches": self.batches, "shots": self.shots,
        }
        for name in ("success_probability", "expected_depth", "selectivity", "fidelity"):
            mv: MetricValue = getattr(self, name)
            out[name] = {"mean": _num(mv.mean), "std": _num(mv.std), "flag": mv.flag}
        if self.stages:
            out["stages"] = [s.to_dict() for s in self.stages]
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    def csv_row(self) -> dict:
        return {
            "circuit": self.circuit, "eps1": f"{self.eps1:.6g}", "eps2": f"{self.eps2:.6g}",
            "graph": self.graph, "depth": self.depth,
            "p_success": _fmt(self.success_probability.mean),
            "expected_depth": _fmt(self.expected_depth.mean),
            "selectivity": _fmt(self.selectivity.mean), "fidelity": _fmt(self.fidelity.mean),
            "batches": self.batches, "shots": "" if self.shots is None else self.shots,
        }


def _fmt(x: float) -> str:
    v = _num(x)
    return v if isinstance(v, str) else f"{v:.10g}"


def reports_to_csv(reports: Sequence[BenchmarkReport]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=CSV_FIELDS, lineterminator="\n")
    writer.writeheader()
    for r in reports:
        writer.writerow(r.csv_row())
    return buf.getvalue()


def stage_report(name: str, graph: str, eps1: float, eps2: float, depth: int,
                 samples: Sequence[OutcomeDistribution], ideal: OutcomeDistribution, target: str,
                 scale: float = 1.0, shots: int | None = None) -> BenchmarkReport:
    """Metrics of one stage from one exact distribution or several sampled batches."""
    ps = [scale * success_probability(d, target) for d in samples]
    return BenchmarkReport(
        circuit=name, graph=graph, eps1=eps1, eps2=eps2, depth=depth,
        success_probability=MetricValue.of(ps),
        expected_depth=MetricValue.of([expected_depth(depth, p) for p in ps]),
        selectivity=MetricValue.of([selectivity(d, target) for d in samples]),
        fidelity=MetricValue.of([circuit_fidelity(d, ideal) for d in samples]),
        batches=len(samples), shots=shots,
    )


def combine_stages(name: str, stages: Sequence[BenchmarkReport]) -> BenchmarkReport:
    """Two-stage summary: depths add, probabilities multiply, the weaker selectivity and fidelity count."""
    first = stages[0]
    depth = sum(s.depth for s in stages)
    p = combined_success([s.success_probability.mean for s in stages])
    n_b = first.batches
    # batch-wise propagation would need paired batches; report the delta-method spread instead
    rel = math.sqrt(sum((s.success_probability.std / s.success_probability.mean) ** 2
                        for s in stages if s.success_probability.mean > 0))
    return BenchmarkReport(
        circuit=name, graph=first.graph, eps1=first.eps1, eps2=first.eps2, depth=depth,
        success_probability=MetricValue(p, p * rel),
        expected_depth=MetricValue(expected_depth(depth, p), expected_depth(depth, p) * rel if p else math.nan),
        selectivity=MetricValue(min(s.selectivity.mean for s in stages),
                                min(stages, key=lambda s: s.selectivity.mean).selectivity.std),
        fidelity=MetricValue(min(s.fidelity.mean for s in stages),
                             min(stages, key=lambda s: s.fidelity.mean).fidelity.std),
        batches=n_b, shots=first.shots, stages=list(stages),
    )
