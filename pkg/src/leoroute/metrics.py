"""Aggregate routing performance metrics and the empirical CVaR estimator.

The load-balancing constraint is judged per packet on its total accumulated
queuing delay: a packet violates when that total exceeds the configured
budget, and dropped packets always count as violations. The violation
magnitude (the mean excess over the budget) is reported over delivered
violators only.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from .netsim import NS_PER_S, Simulator

CVAR_LEVEL = 0.25
HISTOGRAM_BINS = 40


def empirical_cvar(samples, eps: float) -> Optional[float]:
    """Mean of the ceil(eps * n) largest samples; None on empty input."""
    if not 0.0 < eps <= 1.0:
        raise ValueError("eps must lie in (0, 1]")
    arr = np.asarray(samples, dtype=float)
    if arr.size == 0:
        return None
    k = math.ceil(eps * arr.size)
    tail = np.partition(arr, arr.size - k)[arr.size - k:]
    return float(tail.mean())


@dataclass
class MetricsReport:
    throughput_bps: float = 0.0
    drop_rate: float = 0.0
    e2e_mean_s: float = 0.0
    e2e_std_s: float = 0.0
    queuing_mean_s: float = 0.0
    queuing_std_s: float = 0.0
    queuing_cvar_s: float = 0.0               # empirical CVaR at CVAR_LEVEL
    violation_rate: float = 0.0
    violation_magnitude_mean_s: float = 0.0   # excess over budget, delivered only
    violation_magnitude_std_s: float = 0.0
    generated: int = 0
    delivered: int = 0
    dropped: int = 0
    paused: int = 0
    drop_by_cause: dict = field(default_factory=dict)
    delay_components_s: dict = field(default_factory=dict)   # prop/tx/queue means
    histograms: dict = field(default_factory=dict)
    epoch_s: float = 0.0
    dqmax_s: float = 0.01
    scenario_hash: str = ""
    seed: Optional[int] = None

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict) -> "MetricsReport":
        return cls(**d)


def _histogram(values: np.ndarray, upper: float) -> dict:
    counts, edges = np.histogram(values, bins=HISTOGRAM_BINS, range=(0.0, upper))
    return {"edges": edges.tolist(), "counts": counts.tolist()}


def report_from_sim(sim: Simulator, dqmax_s: float = 0.01,
                    scenario_hash: str = "", seed: Optional[int] = None) -> MetricsReport:
    """Aggregate one finished run into a MetricsReport. Delay statistics are
    over delivered packets; the violation rate also counts every drop."""
    report = MetricsReport(generated=sim.generated, delivered=sim.delivered,
                           dropped=sim.dropped, paused=sim.paused,
                           drop_by_cause=dict(sim.drop_by_cause),
                           epoch_s=sim.epoch_s, dqmax_s=dqmax_s,
                           scenario_hash=scenario_hash, seed=seed)
    if sim.generated > 0:
        report.drop_rate = sim.dropped / sim.generated
    if not sim.delivered_records:
        return report
    rec = np.array([r[1:] for r in sim.delivered_records], dtype=float)
    e2e = rec[:, 1] / NS_PER_S
    queue = rec[:, 2] / NS_PER_S
    prop = rec[:, 3] / NS_PER_S
    tx = rec[:, 4] / NS_PER_S
    bits = rec[:, 5]
    report.throughput_bps = float(bits.sum() / sim.epoch_s)
    report.e2e_mean_s = float(e2e.mean())
    report.e2e_std_s = float(e2e.std())
    report.queuing_mean_s = float(queue.mean())
    report.queuing_std_s = float(queue.std())
    report.queuing_cvar_s = empirical_cvar(queue, CVAR_LEVEL)
    violators = queue > dqmax_s
    if sim.generated > 0:
        report.violation_rate = (int(violators.sum()) + sim.dropped) / sim.generated
    if violators.any():
        excess = queue[violators] - dqmax_s
        report.violation_magnitude_mean_s = float(excess.mean())
        report.violation_magnitude_std_s = float(excess.std())
    report.delay_components_s = {
        "propagation": float(prop.mean()),
        "transmission": float(tx.mean()),
        "queuing": float(queue.mean()),
    }
    upper = float(max(e2e.max(), 1e-6))
    report.histograms = {
        "e2e": _histogram(e2e, upper),
        "queuing": _histogram(queue, float(max(queue.max(), 1e-6))),
    }
    return report


def aggregate_reports(reports: list[MetricsReport]) -> MetricsReport:
    """Mean over per-seed evaluation reports (counts are summed, rates and
    delays averaged)."""
    if not reports:
        raise ValueError("no reports to aggregate")
    if len(reports) == 1:
        return reports[0]
    out = MetricsReport(
        generated=sum(r.generated for r in reports),
        delivered=sum(r.delivered for r in reports),
        dropped=sum(r.dropped for r in reports),
        paused=sum(r.paused for r in reports),
        epoch_s=reports[0].epoch_s,
        dqmax_s=reports[0].dqmax_s,
        scenario_hash=reports[0].scenario_hash,
    )
    for name in ("throughput_bps", "drop_rate", "e2e_mean_s", "e2e_std_s",
                 "queuing_mean_s", "queuing_std_s", "queuing_cvar_s",
                 "violation_rate", "violation_magnitude_mean_s",
                 "violation_magnitude_std_s"):
        vals = [getattr(r, name) for r in reports if getattr(r, name) is not None]
        setattr(out, name, float(np.mean(vals)) if vals else 0.0)
    keys = reports[0].delay_components_s.keys()
    out.delay_components_s = {
        k: float(np.mean([r.delay_components_s.get(k, 0.0) for r in reports]))
        for k in keys}
    return out
