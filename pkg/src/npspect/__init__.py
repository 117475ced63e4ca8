"""Spectra of the elastostatic Neumann-Poincaré operator on closed surfaces and curves."""

from .assembly import (AssemblyError, CacheError, MatrixKind, OperatorMatrix, assemble_np, assemble_single_layer,
                       cache_load, cache_store, modified_np, symmetrize)
from .geometry import QuadratureGrid, Surface, build_grid, make_ellipsoid, make_sphere, two_spheres
from .kernels import double_layer_kernel, kelvin, np_kernel, traction
from .material import (EssSpecPrediction, LameField, LameParams, constant_field, kappa0, kelvin_constants,
                       modulated_field, per_component_field, predict_essential_spectrum, validate_convexity)
from .oracle import match_spectrum_to_oracle, sphere_eigenvalues
from .spectral import (SpectrumResult, decay_fit, detect_essential_spectrum, eigenvalues,
                       predicted_decay_exponent)
from .symbol import lame_symbol, lame_symbol_inverse, np_symbol, single_layer_symbol, symbol_essential_spectrum

__version__ = "0.1.0"

__all__ = [
    "AssemblyError", "CacheError", "MatrixKind", "OperatorMatrix",
    "assemble_np", "assemble_single_layer", "cache_load", "cache_store", "modified_np", "symmetrize",
    "QuadratureGrid", "Surface", "build_grid", "make_ellipsoid", "make_sphere", "two_spheres",
    "double_layer_kernel", "kelvin", "np_kernel", "traction",
    "EssSpecPrediction", "LameField", "LameParams", "constant_field", "kappa0", "kelvin_constants",
    "modulated_field", "per_component_field", "predict_essential_spectrum", "validate_convexity",
    "match_spectrum_to_oracle", "sphere_eigenvalues",
    "SpectrumResult", "decay_fit", "detect_essential_spectrum", "eigenvalues", "predicted_decay_exponent",
    "lame_symbol", "lame_symbol_inverse", "np_symbol", "single_layer_symbol", "symbol_essential_spectrum",
]
