"""Python access to the oceannet library."""

import json

from ._core import (
    Checkpoint,
    ConfigError,
    DimensionError,
    Error,
    IoError,
    NumericError,
    UndefinedMetricError,
    extract_contour,
    fft2,
    forecast,
    hausdorff,
    ifft2,
    mhd,
    param_count,
    pearson_cc,
    read_dataset,
    rmse,
    run_cli,
    spectral_conv,
    zonal_spectrum,
)
from . import _core


def gen_dataset(**config):
    """Generate a dataset in memory; keyword arguments override the generator defaults."""
    return _core.gen_dataset(json.dumps(config))


def train(data_path, **config):
    """Train on a dataset file. Returns (epoch log, best checkpoint, last checkpoint)."""
    return _core.train(str(data_path), json.dumps(config))


__all__ = [name for name in dir() if not name.startswith("_") and name != "json"]
