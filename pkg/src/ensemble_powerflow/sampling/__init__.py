"""Monte Carlo generation of voltage/power datasets"""

from .dataset import Dataset, DatasetMeta, LabelFamily, load_dataset, save_dataset
from .sampler import (
    PUBLISHED_SAMPLE_SIZES,
    SamplerConfig,
    generate,
    minimum_samples,
    split,
)

__all__ = [
    "Dataset",
    "DatasetMeta",
    "LabelFamily",
    "SamplerConfig",
    "PUBLISHED_SAMPLE_SIZES",
    "generate",
    "load_dataset",
    "minimum_samples",
    "save_dataset",
    "split",
]
