"""Zero-boundary Gaussian field on the square grid: exact samplers, the
killed-walk Green's function, harmonic decomposition over boxes, multiscale
starred partitions with shift covers, level sets and exceedance probes."""

from .decompose import (
    HarmonicDecomposition,
    coarse_field,
    coarse_increments,
    coarse_values,
    decompose,
    harmonic_at,
    increment_samples,
)
from .fieldio import (
    MAGIC,
    level_set_report,
    read_field_binary,
    read_field_csv,
    write_field_binary,
    write_field_csv,
    write_level_set_json,
)
from .green import GreenOperator, clear_caches, dirichlet_extend, interior_laplacian
from .grid import (
    Box,
    CoverConstructionError,
    NestedPartitions,
    Schedule,
    ShiftCover,
    core_region,
    counting_check,
    flat_partition,
    nested_partitions,
    shift_cover,
    uniform_schedule,
)
from .levels import (
    GAMMA,
    CoarseTailProbe,
    DaviaudEstimate,
    DaviaudPoint,
    LevelSet,
    ProbeRefusedError,
    coarse_exceedance_probe,
    estimate_daviaud_exponent,
    expected_level_count,
    level_set,
    level_threshold,
)
from .sample import sample_field, sample_fields, spectral_scale

__all__ = [
    "Box",
    "CoarseTailProbe",
    "CoverConstructionError",
    "DaviaudEstimate",
    "DaviaudPoint",
    "GAMMA",
    "GreenOperator",
    "HarmonicDecomposition",
    "LevelSet",
    "MAGIC",
    "NestedPartitions",
    "ProbeRefusedError",
    "Schedule",
    "ShiftCover",
    "clear_caches",
    "coarse_exceedance_probe",
    "coarse_field",
    "coarse_increments",
    "coarse_values",
    "core_region",
    "counting_check",
    "decompose",
    "dirichlet_extend",
    "estimate_daviaud_exponent",
    "expected_level_count",
    "flat_partition",
    "harmonic_at",
    "increment_samples",
    "interior_laplacian",
    "level_set",
    "level_set_report",
    "level_threshold",
    "nested_partitions",
    "read_field_binary",
    "read_field_csv",
    "sample_field",
    "sample_fields",
    "shift_cover",
    "spectral_scale",
    "uniform_schedule",
    "write_field_binary",
    "write_field_csv",
    "write_level_set_json",
]
