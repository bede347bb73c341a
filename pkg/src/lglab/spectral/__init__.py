"""Numerical harness for the twisted Laplacian on a truncated plane.

Submodules: grid (sampling domain), forms (mixed-type discrete forms),
operators (difference/spectral operators and their exact adjoints),
analysis (spectra, Hodge decomposition, splitting series, homotopy and
de Rham comparisons, norm probes, exports).
"""

from .analysis import (
    CutoffHomotopy,
    HodgeSplit,
    SpectralContext,
    SpectralResult,
    SplittingSeries,
    derham_compare,
    eigensolve_lowest,
    hodge_decompose,
    homotopy_identity_check,
    norm_probe,
    pairing_series,
    smooth_cutoff,
    splitting_map,
    write_eigenvalues_csv,
    write_harmonic_profile_csv,
)
from .forms import DiscreteForm, inner, norm, wedge_pairing
from .grid import Grid, build_grid, refine
from .operators import Operators

__all__ = [
    "Grid",
    "build_grid",
    "refine",
    "DiscreteForm",
    "inner",
    "norm",
    "wedge_pairing",
    "Operators",
    "SpectralContext",
    "SpectralResult",
    "HodgeSplit",
    "SplittingSeries",
    "CutoffHomotopy",
    "eigensolve_lowest",
    "hodge_decompose",
    "splitting_map",
    "pairing_series",
    "smooth_cutoff",
    "homotopy_identity_check",
    "derham_compare",
    "norm_probe",
    "write_eigenvalues_csv",
    "write_harmonic_profile_csv",
]
