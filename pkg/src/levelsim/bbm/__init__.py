"""Branching Brownian motion: exact event-driven simulation, capped-system
coupling, level counting with closed-form oracles, and the lattice
coarse-graining of ancestral paths."""

from .engine import (
    DEFAULT_PARTICLE_CAP,
    BbmPopulation,
    BbmRunConfig,
    BbmTree,
    Lineage,
    NbbmSnapshot,
    NbbmTrajectory,
    PopulationCapError,
    extract_lineage,
    sample_positions,
    simulate_bbm,
    simulate_nbbm,
)
from .estimators import (
    DominanceSweep,
    LevelCount,
    LevelExponent,
    MaxTail,
    NoDataError,
    check_nbbm_dominance,
    count_level,
    estimate_level_exponent,
    estimate_max_tail,
    expected_count_oracle,
)
from .paths import (
    DiscretizationPlan,
    EventReport,
    GoodnessReport,
    LatticePath,
    check_events,
    classify_path,
    default_cutoff,
    discretize_lineage,
    e2_failure_bound,
)

__all__ = [
    "BbmPopulation",
    "BbmRunConfig",
    "BbmTree",
    "DEFAULT_PARTICLE_CAP",
    "DiscretizationPlan",
    "DominanceSweep",
    "EventReport",
    "GoodnessReport",
    "LatticePath",
    "LevelCount",
    "LevelExponent",
    "Lineage",
    "MaxTail",
    "NbbmSnapshot",
    "NbbmTrajectory",
    "NoDataError",
    "PopulationCapError",
    "check_events",
    "check_nbbm_dominance",
    "classify_path",
    "count_level",
    "default_cutoff",
    "discretize_lineage",
    "e2_failure_bound",
    "estimate_level_exponent",
    "estimate_max_tail",
    "expected_count_oracle",
    "extract_lineage",
    "sample_positions",
    "simulate_bbm",
    "simulate_nbbm",
]
