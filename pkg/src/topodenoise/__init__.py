"""Kernel-field point-cloud de-noising with a persistent-homology
verification pipeline and kNN-density thresholding baselines."""

from ._backend import available_backends, get_backend, set_backend
from .density import DensityEstimate, knn_density, threshold_top
from .denoise import (DenoiseParams, DenoiseState, DenoiseTrace, compute_m,
                      denoise_run, denoise_step)
from .errors import ComplexSizeError, DegenerateFieldError, ValidationError
from .geometry import (PointCloud, distance_matrix, max_interpoint_distance,
                       random_subset, read_csv, write_csv)
from .homology import (Barcode, BarcodeStats, FilteredComplex, Interval,
                       LandmarkSet, barcode_stats, betti_at,
                       lazy_witness_complex, persistence, rips_complex,
                       select_landmarks)
from .kernelfield import FieldParams, batch_grad_F, eval_F, eval_f, grad_F
from .patches import (DNormSpec, PatchCloudSpec, build_patch_cloud,
                      default_basis, preprocess_patch,
                      synthetic_gradient_patches)
from .synth import (NoisyShapeSpec, density_circle, density_point,
                    density_sphere, rejection_sample)

__version__ = "0.1.0"

__all__ = [
    "available_backends", "get_backend", "set_backend",
    "DensityEstimate", "knn_density", "threshold_top",
    "DenoiseParams", "DenoiseState", "DenoiseTrace",
    "compute_m", "denoise_run", "denoise_step",
    "ComplexSizeError", "DegenerateFieldError", "ValidationError",
    "PointCloud", "distance_matrix", "max_interpoint_distance",
    "random_subset", "read_csv", "write_csv",
    "Barcode", "BarcodeStats", "FilteredComplex", "Interval", "LandmarkSet",
    "barcode_stats", "betti_at", "lazy_witness_complex", "persistence",
    "rips_complex", "select_landmarks",
    "FieldParams", "batch_grad_F", "eval_F", "eval_f", "grad_F",
    "DNormSpec", "PatchCloudSpec", "build_patch_cloud", "default_basis",
    "preprocess_patch", "synthetic_gradient_patches",
    "NoisyShapeSpec", "density_circle", "density_point", "density_sphere",
    "rejection_sample",
    "__version__",
]
