from dataclasses import dataclass


@dataclass(frozen=True)
class Tolerances:
    """Decision thresholds of the complex backend (relative to coordinate scale)"""

    membership: float = 1e-10
    rank: float = 1e-8
    cluster_radius: float = 1e-7
    root_residual: float = 1e-9
    resultant_zero: float = 1e-8
    conic_fit: float = 1e-9
    finite_difference: float = 1e-6


@dataclass(frozen=True)
class RetryPolicy:
    """Attempt limits of the seeded resampling loops"""

    setups: int = 32
    slices: int = 16
    rank: int = 8
    coordinate_changes: int = 3
    rational_resamples: int = 64


DEFAULT_TOLERANCES = Tolerances()
DEFAULT_RETRIES = RetryPolicy()
