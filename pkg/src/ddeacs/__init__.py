"""Stability of x' = A x(t) + B x(t - tau) as the delay grows.

Asymptotic continuous spectrum, delay-induced crossings, critical-delay
sequences, universality classes and an exact characteristic-root oracle.
"""

from .acs import ACSBranch, Crossing, Direction, find_crossings, sample_branches
from .classify import ClassTag, UniversalityClass, classify
from .core import LinearDDE, delay_independent_roots, eval_char, generating_polynomial, generating_roots
from .delays import (DelaySequence, critical_delays, crossing_direction_rate, delay_sequences,
                     double_hopf_search, locate_double_hopf, unstable_dimension,
                     unstable_dimension_scalar)
from .oracle import compute_spectrum, count_unstable, discretized_spectrum, newton_refine
from .stuart_landau import SLParams, sl_branches, sl_hopf_sequence, sl_simulate

__version__ = "0.1.0"

__all__ = [
    "ACSBranch", "ClassTag", "Crossing", "DelaySequence", "Direction", "LinearDDE", "SLParams",
    "UniversalityClass", "classify", "compute_spectrum", "count_unstable", "critical_delays",
    "crossing_direction_rate", "delay_independent_roots", "delay_sequences", "discretized_spectrum",
    "double_hopf_search", "eval_char", "find_crossings", "generating_polynomial",
    "generating_roots", "locate_double_hopf", "newton_refine", "sample_branches", "sl_branches", "sl_hopf_sequence",
    "sl_simulate", "unstable_dimension", "unstable_dimension_scalar",
]
