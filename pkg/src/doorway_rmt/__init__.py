"""Coupling-coefficient distributions for a doorway state in a random background.

Monte Carlo samplers and exact closed forms for the overlap between a
distinct level coupled to N background levels (regular or chaotic, real
or complex coupling) and the eigenstates of the full Hamiltonian.
"""

__version__ = "0.1.0"

from .analytic import AnalyticDistribution, Family
from .doorway import (
    DoorwayModel,
    OverlapSample,
    Route,
    SampleSet,
    fidelity_values,
    fidelity_values_multi,
    full_spectrum,
    max_overlap_values,
    overlap_sq,
    sample_fidelity,
    sample_max_overlap,
)
from .ensembles import (
    Background,
    BackgroundDraw,
    CouplingDraw,
    EnsembleSpec,
    Interaction,
    a_factor,
    mean_spacing,
    sample_background,
    sample_coupling,
    substream,
)
from .oracles import FiniteNContext
from .stats import (
    EmpiricalDistribution,
    Histogram,
    histogram,
    ks_distance,
    ks_null_quantile,
    ks_two_sample,
)

__all__ = [
    "AnalyticDistribution",
    "Background",
    "BackgroundDraw",
    "CouplingDraw",
    "DoorwayModel",
    "EmpiricalDistribution",
    "EnsembleSpec",
    "Family",
    "FiniteNContext",
    "Histogram",
    "Interaction",
    "OverlapSample",
    "Route",
    "SampleSet",
    "a_factor",
    "fidelity_values",
    "fidelity_values_multi",
    "full_spectrum",
    "histogram",
    "ks_distance",
    "ks_null_quantile",
    "ks_two_sample",
    "max_overlap_values",
    "mean_spacing",
    "overlap_sq",
    "sample_background",
    "sample_coupling",
    "sample_fidelity",
    "sample_max_overlap",
    "substream",
]
