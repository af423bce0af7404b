"""Score histograms and the Jensen-Shannon divergence between them."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

SMOOTHING = 1e-12


@dataclass(frozen=True)
class ScoreDistribution:
    bin_edges: np.ndarray
    probabilities: np.ndarray
    n_samples: int
    raw_scores: tuple[float, ...] = field(repr=False, default=())

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["bin_lo", "bin_hi", "mass"])
        for lo, hi, m in zip(self.bin_edges[:-1], self.bin_edges[1:], self.probabilities):
            writer.writerow([repr(float(lo)), repr(float(hi)), repr(float(m))])
        return buf.getvalue()


def build_distribution(
    scores: Sequence[float],
    bins: int = 100,
    range: tuple[float, float] = (0.0, 1.0),
    smoothing: float = SMOOTHING,
) -> ScoreDistribution:
    """Normalized histogram; out-of-range scores clamp into the end bins."""
    x = np.asarray(scores, dtype=np.float64).ravel()
    if x.size == 0:
        raise ValueError("cannot build a distribution from zero scores")
    lo, hi = range
    if not hi > lo or bins < 1:
        raise ValueError(f"invalid binning: {bins} bins on [{lo}, {hi}]")
    counts, edges = np.histogram(np.clip(x, lo, hi), bins=bins, range=(lo, hi))
    p = counts / x.size + smoothing
    return ScoreDistribution(edges, p / p.sum(), int(x.size), tuple(float(v) for v in x))


@dataclass(frozen=True)
class DivergenceResult:
    js: float
    metric_name: str = ""
    degradation_labels: tuple[str, ...] = ()


def _kl_to_mixture(p: np.ndarray, q: np.ndarray, base: float) -> float:
    """KL(p || (p + q) / 2), written so that subnormal masses cannot underflow."""
    mask = p > 0
    s = p[mask] + q[mask]
    return float(np.sum(p[mask] * np.log(2.0 * p[mask] / s)) / math.log(base))


def js_probabilities(p, q, base: float = 2.0) -> float:
    """JS divergence of two probability vectors (base-2 by default, so in [0, 1])."""
    p = np.asarray(p, dtype=np.float64)
    q = np.asarray(q, dtype=np.float64)
    if p.shape != q.shape:
        raise ValueError(f"distribution lengths differ: {p.shape} vs {q.shape}")
    js = 0.5 * _kl_to_mixture(p, q, base) + 0.5 * _kl_to_mixture(q, p, base)
    # Rounding can leave a tiny negative for identical inputs.
    return max(js, 0.0)


def js_divergence(
    p: ScoreDistribution,
    q: ScoreDistribution,
    metric_name: str = "",
    labels: tuple[str, ...] = (),
    base: float = 2.0,
) -> DivergenceResult:
    if p.bin_edges.shape != q.bin_edges.shape or not np.array_equal(p.bin_edges, q.bin_edges):
        raise ValueError("distributions use different binning")
    return DivergenceResult(js_probabilities(p.probabilities, q.probabilities, base), metric_name, tuple(labels))


class Summary(NamedTuple):
    mean: float
    std: float
    std_defined: bool


def summarize(scores: Sequence[float]) -> Summary:
    """Mean and sample (n-1) standard deviation; std is 0 and flagged when n < 2."""
    x = np.asarray(scores, dtype=np.float64)
    if x.size == 0:
        raise ValueError("cannot summarize zero scores")
    if x.size < 2:
        return Summary(float(x[0]), 0.0, False)
    return Summary(float(x.mean()), float(x.std(ddof=1)), True)
