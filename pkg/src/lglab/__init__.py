"""Exact computer algebra for isolated polynomial singularities plus a
numerical spectral harness for the associated twisted Laplacians.

Subpackages and modules:

- ``poly``        sparse exact (Laurent) polynomial arithmetic
- ``groebner``    Groebner bases, Milnor ring data, normal forms
- ``ellipticity`` gradient-growth / nondegeneracy certification
- ``brieskorn``   polyvector fields, u-deformed lattice, residue pairings
- ``frobenius``   miniversal deformation, flat coordinates, potential
- ``spectral``    finite-difference / Fourier twisted Hodge theory
- ``cli``         command line entry points (``lg ...``)
"""

__version__ = "0.1.0"

from .poly import Polynomial, parse_polynomial, infer_weights, WeightSystem  # noqa: F401
