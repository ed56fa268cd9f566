"""Noise-based key distribution laboratory.

Thin wrapper around the compiled core: a wave-faithful transmission-line
simulator of the KLJN protocol and its noiseless variant, the eavesdropping
attacks against them, plug-in information estimators, and Maurer-style
advantage distillation on the three-observer lumped circuit.
"""

from ._core import (
    BOLTZMANN,
    __version__,
    advantage_distill,
    binary_entropy,
    binned_cmi,
    ck_rate,
    classify_msv,
    gaussian_cmi_surrogate,
    johnson_sigma,
    key_rate_pipeline,
    normal_upper_tail,
    reflection_coefficient,
    repetition_error,
    run_experiment,
    run_kljn,
    run_noiseless,
    shunt_scatter,
    wave_decompose,
)

__all__ = [
    "BOLTZMANN",
    "__version__",
    "advantage_distill",
    "binary_entropy",
    "binned_cmi",
    "ck_rate",
    "classify_msv",
    "gaussian_cmi_surrogate",
    "johnson_sigma",
    "key_rate_pipeline",
    "normal_upper_tail",
    "reflection_coefficient",
    "repetition_error",
    "run_experiment",
    "run_kljn",
    "run_noiseless",
    "shunt_scatter",
    "wave_decompose",
]
