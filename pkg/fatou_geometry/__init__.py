"""Fatou Geometry - numerical John, Hölder and local-connectivity experiments for rational maps"""

from .errors import FatouGeometryError, NumericalError, ValidationError
from .grid import GridSpec, classify_and_label, distance_field, julia_sample
from .orbits import detect_cycles, semi_hyperbolicity_verdict
from .ratmap import RationalMap, parse_map, preset_map

__all__ = [
    "FatouGeometryError",
    "NumericalError",
    "ValidationError",
    "GridSpec",
    "classify_and_label",
    "distance_field",
    "julia_sample",
    "detect_cycles",
    "semi_hyperbolicity_verdict",
    "RationalMap",
    "parse_map",
    "preset_map",
]
