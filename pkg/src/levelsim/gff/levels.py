"""Level sets and exceedance exponents of the zero-boundary field.

Sites where the field reaches 2*gamma*eta*log N, with gamma = sqrt(2/pi),
form the eta-level set; its cardinality grows like N**(2(1 - eta**2)). The
coarse-tail probe estimates the chance that some box at scale zeta carries a
coarse value above 2*gamma*b*log N, which decays like
N**(-2(b**2/(1-zeta) - (1-zeta))). Both are slow-convergence exponents, so
estimators report per-size values and trends rather than a single number.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np
from scipy import stats as _stats

from .. import mc
from .decompose import harmonic_at
from .green import GreenOperator
from .grid import Box, flat_partition
from .sample import sample_fields

__all__ = [
    "GAMMA",
    "level_threshold",
    "LevelSet",
    "level_set",
    "expected_level_count",
    "DaviaudPoint",
    "DaviaudEstimate",
    "estimate_daviaud_exponent",
    "ProbeRefusedError",
    "CoarseTailProbe",
    "coarse_exceedance_probe",
]

# Kept in closed form; exponent measurements are sensitive to the threshold
# constant, so it is never truncated to a decimal literal.
GAMMA = math.sqrt(2.0 / math.pi)


def level_threshold(grid_n: int, level: float) -> float:
    """Threshold 2*gamma*level*log N shared by level sets (level = eta) and
    coarse exceedance events (level = b)."""
    if grid_n < 4:
        raise ValueError(f"grid side must be >= 4, got {grid_n}")
    if level <= 0:
        raise ValueError(f"level fraction must be positive, got {level}")
    return 2.0 * GAMMA * level * math.log(grid_n)


@dataclass(frozen=True)
class LevelSet:
    """Sites at or above the eta threshold on one field."""

    eta: float
    threshold: float
    count: int
    sites: np.ndarray


def level_set(field: np.ndarray, eta: float) -> LevelSet:
    """Exact threshold count and site list; frame sites never qualify."""
    if not 0.0 < eta < 1.0:
        raise ValueError(f"eta must lie in (0, 1), got {eta}")
    grid_n = field.shape[0]
    if field.shape != (grid_n, grid_n):
        raise ValueError(f"field must be square, got shape {field.shape}")
    thr = level_threshold(grid_n, eta)
    mask = field >= thr
    sites = np.argwhere(mask).astype(np.int64)
    return LevelSet(eta, thr, int(mask.sum()), sites)


def expected_level_count(grid_n: int, eta: float) -> float:
    """Exact mean level-set size: each site contributes the upper Gaussian
    tail of threshold / sqrt(G(x, x)), summed over the interior."""
    thr = level_threshold(grid_n, eta)
    variances = GreenOperator(grid_n).diagonal()
    # Boundary sites have variance 0; thr/0 = inf gives them tail mass 0.
    with np.errstate(divide="ignore"):
        return float(_stats.norm.sf(thr / np.sqrt(variances)).sum())


@dataclass(frozen=True)
class DaviaudPoint:
    """Level-set statistics at one grid size."""

    grid_n: int
    counts: mc.Estimate
    exponent: mc.Estimate | None
    dropped: int

    def as_dict(self) -> dict:
        exp = self.exponent
        return {
            "grid_n": self.grid_n,
            "mean_count": self.counts.mean,
            "count_stderr": self.counts.stderr,
            "exponent": None if exp is None else exp.mean,
            "exponent_stderr": None if exp is None else exp.stderr,
            "replicas": self.counts.replicas,
            "dropped_zero_counts": self.dropped,
        }


@dataclass(frozen=True)
class DaviaudEstimate:
    """Per-size exponents plus the cross-size regression."""

    eta: float
    limit: float
    points: tuple[DaviaudPoint, ...]
    fit: mc.ExponentFit

    def exponents(self) -> list[float]:
        return [p.exponent.mean for p in self.points if p.exponent is not None]


def _replicas_for(replicas: int | Mapping[int, int], grid_n: int) -> int:
    if isinstance(replicas, Mapping):
        count = int(replicas[grid_n])
    else:
        count = int(replicas)
    if count < 1:
        raise ValueError(f"replicas must be >= 1, got {count} for N={grid_n}")
    return count


def estimate_daviaud_exponent(
    grid_sizes: Sequence[int],
    eta: float,
    replicas: int | Mapping[int, int],
    seed: int,
    backend: str = "spectral",
    max_concurrency: int = 1,
) -> DaviaudEstimate:
    """Measure log(#level set)/log N across grid sizes.

    Zero-count replicas cannot contribute a log and are dropped from the
    exponent average; the drop count is reported per size. The regression
    slope is fitted to log mean counts against log N.
    """
    if not 0.0 < eta < 1.0:
        raise ValueError(f"eta must lie in (0, 1), got {eta}")
    sizes = [int(n) for n in grid_sizes]
    if len(sizes) == 0:
        raise ValueError("need at least one grid size")
    if any(b <= a for a, b in zip(sizes, sizes[1:])):
        raise ValueError(f"grid sizes must be strictly increasing, got {sizes}")

    points = []
    for grid_n in sizes:
        thr = level_threshold(grid_n, eta)

        def task(rng, grid_n=grid_n, thr=thr):
            field = sample_fields(grid_n, 1, rng, backend=backend)[0]
            return int((field >= thr).sum())

        plan = mc.ReplicaPlan(
            _replicas_for(replicas, grid_n),
            mc.derive_seed(seed, grid_n),
            max_concurrency=max_concurrency,
        )
        counts = np.asarray(mc.parallel_map(plan, task), dtype=float)
        count_est = mc.summarize(counts)
        nonzero = counts[counts > 0]
        exponent = None
        if nonzero.size > 0:
            exponent = mc.summarize(np.log(nonzero) / math.log(grid_n))
        points.append(DaviaudPoint(grid_n, count_est, exponent, int((counts == 0).sum())))

    usable = [(p.grid_n, p.counts.mean) for p in points if p.counts.mean > 0]
    if len(usable) >= 2:
        fit = mc.fit_exponent(
            [math.log(n) for n, _ in usable], [math.log(m) for _, m in usable]
        )
    else:
        fit = mc.ExponentFit(float("nan"), float("nan"), float("nan"), ())
    limit = 2.0 * (1.0 - eta * eta)
    return DaviaudEstimate(eta, limit, tuple(points), fit)


class ProbeRefusedError(ValueError):
    """Raised when the predicted event probability is too small to estimate
    at the requested replica budget."""

    def __init__(self, predicted_probability: float, replicas: int):
        self.predicted_probability = predicted_probability
        self.replicas = replicas
        super().__init__(
            f"predicted exceedance probability {predicted_probability:.3g} is below "
            f"10/replicas = {10.0 / replicas:.3g}; increase replicas or lower b"
        )


@dataclass(frozen=True)
class CoarseTailProbe:
    """One-size estimate of the coarse exceedance probability."""

    grid_n: int
    zeta: float
    b: float
    threshold: float
    estimate: mc.Estimate
    exponent: float | None
    predicted_exponent: float
    predicted_probability: float

    def as_dict(self) -> dict:
        return {
            "grid_n": self.grid_n,
            "zeta": self.zeta,
            "b": self.b,
            "threshold": self.threshold,
            "p_hat": self.estimate.mean,
            "stderr": self.estimate.stderr,
            "replicas": self.estimate.replicas,
            "exponent": self.exponent,
            "predicted_exponent": self.predicted_exponent,
        }


def coarse_exceedance_probe(
    grid_n: int,
    zeta: float,
    b: float,
    replicas: int,
    seed: int,
    backend: str = "spectral",
    max_concurrency: int = 1,
) -> CoarseTailProbe:
    """Estimate P(some scale-zeta box has coarse value >= 2*gamma*b*log N).

    zeta = 0 reduces to the maximum of the field. The decay exponent
    -log(p)/log N tends to 2(b**2/(1-zeta) - (1-zeta)) for b > 1-zeta; the
    probe refuses to run when that prediction puts fewer than 10 expected
    successes in the replica budget.
    """
    if not 0.0 <= zeta < 1.0:
        raise ValueError(f"zeta must lie in [0, 1), got {zeta}")
    if b <= 0.0:
        raise ValueError(f"b must be positive, got {b}")
    if replicas < 1:
        raise ValueError(f"replicas must be >= 1, got {replicas}")
    predicted_exponent = 2.0 * (b * b / (1.0 - zeta) - (1.0 - zeta))
    predicted_probability = min(1.0, grid_n ** (-predicted_exponent))
    if predicted_probability < 10.0 / replicas:
        raise ProbeRefusedError(predicted_probability, replicas)

    thr = level_threshold(grid_n, b)
    if zeta == 0.0:
        boxes: tuple[Box, ...] | None = None
    else:
        side = max(1, round(grid_n**zeta))
        boxes = flat_partition(Box(0, 0, grid_n, grid_n), side)

    def task(rng) -> bool:
        field = sample_fields(grid_n, 1, rng, backend=backend)[0]
        if boxes is None:
            return bool(field.max() >= thr)
        return any(harmonic_at(field, box, box.center()) >= thr for box in boxes)

    plan = mc.ReplicaPlan(replicas, seed, max_concurrency=max_concurrency)
    hits = mc.parallel_map(plan, task)
    estimate = mc.binomial_estimate(sum(bool(h) for h in hits), replicas)
    exponent = None
    if estimate.mean > 0:
        exponent = -math.log(estimate.mean) / math.log(grid_n)
    return CoarseTailProbe(
        grid_n,
        zeta,
        b,
        thr,
        estimate,
        exponent,
        predicted_exponent,
        predicted_probability,
    )
