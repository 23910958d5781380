"""Shooting S-estimation for regression data with cellwise outliers."""

from ._cellshot import (
    CellshotError,
    calibrate,
    diagnose,
    fit,
    generate,
    mscale,
    run_cli,
    simulate,
)

__all__ = [
    "CellshotError",
    "calibrate",
    "diagnose",
    "fit",
    "generate",
    "mscale",
    "run_cli",
    "simulate",
]
