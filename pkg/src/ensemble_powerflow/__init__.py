"""Ensemble linear power flow models and data-driven convex OPF"""

__version__ = "0.1.0"

from .pipeline import ExperimentRunner, RunManifest  # noqa: E402

__all__ = ["ExperimentRunner", "RunManifest", "__version__"]
