"""Stereo codec evaluation metrics and dataset curation."""

from ._core import (
    EarmetricsError,
    a_weighting,
    ccpc,
    composite_objective,
    curate_file,
    evaluate,
    icpc,
    integrated_lufs,
    istft,
    k_weighting,
    load_wav,
    resample,
    save_wav,
    si_sdr,
    stft,
    true_peak_dbtp,
)

__all__ = [
    "EarmetricsError",
    "a_weighting",
    "ccpc",
    "composite_objective",
    "curate_file",
    "evaluate",
    "icpc",
    "integrated_lufs",
    "istft",
    "k_weighting",
    "load_wav",
    "resample",
    "save_wav",
    "si_sdr",
    "stft",
    "true_peak_dbtp",
]
