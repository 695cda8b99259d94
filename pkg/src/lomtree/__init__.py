"""Logarithmic-depth online multiclass label trees."""

from .baselines import OAAModel, RandomLabelTree, build_rtree
from .data import Example, SparseVector, parse_line, split_dataset, stream_passes
from .linreg import LinearRegressor
from .tree import LOMTree, TrainConfig

__all__ = [
    "Example", "LOMTree", "LinearRegressor", "OAAModel", "RandomLabelTree",
    "SparseVector", "TrainConfig", "build_rtree", "parse_line", "split_dataset",
    "stream_passes",
]
__version__ = "0.1.0"
