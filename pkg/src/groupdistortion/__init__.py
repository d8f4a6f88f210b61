"""Distortion of metric voting mechanisms under group-fair cost objectives."""

from .core import (
    Grouping,
    Instance,
    InstanceError,
    InstanceFormatError,
    GroupingError,
    Objective,
    OrdinalProfile,
    ValidationResult,
    is_consistent,
    load_instance,
    ordinal_profile_from_instance,
    save_instance,
    validate_instance,
)
from .mechanisms import MECHANISMS, Mechanism, get_mechanism
from .objectives import DistortionReport, avg_of_max, cost, distortion, max_of_avg, optimal_alternative

__version__ = "0.1.0"

__all__ = [
    "Grouping",
    "Instance",
    "InstanceError",
    "InstanceFormatError",
    "GroupingError",
    "Objective",
    "OrdinalProfile",
    "ValidationResult",
    "is_consistent",
    "load_instance",
    "ordinal_profile_from_instance",
    "save_instance",
    "validate_instance",
    "MECHANISMS",
    "Mechanism",
    "get_mechanism",
    "DistortionReport",
    "avg_of_max",
    "cost",
    "distortion",
    "max_of_avg",
    "optimal_alternative",
]
