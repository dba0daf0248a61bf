"""Information propagation in the disordered XY chain.

Free-fermion dynamics, eigenstate localization, logarithmic light-cone
diagnostics, block entanglement and signalling bounds, all cross-checked
against a dense many-body oracle.
"""

__version__ = "0.1.0"

from ._accel import NUMBA_AVAILABLE, USE_NUMBA, backend_name
from .chain import (
    ChainSpec,
    DisorderRealization,
    HoppingMatrix,
    build_hopping_matrix,
    cauchy,
    fixed,
    sample_realization,
    uniform,
)
from .spectral import Propagator, SpectralDecomposition, eigendecompose, evolve_mode, propagator

__all__ = [
    "__version__",
    "NUMBA_AVAILABLE",
    "USE_NUMBA",
    "backend_name",
    "ChainSpec",
    "DisorderRealization",
    "HoppingMatrix",
    "build_hopping_matrix",
    "cauchy",
    "fixed",
    "uniform",
    "sample_realization",
    "Propagator",
    "SpectralDecomposition",
    "eigendecompose",
    "evolve_mode",
    "propagator",
]
