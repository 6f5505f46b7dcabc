"""Distribution-gap analyses: divergence-frontier (MAUVE) scoring, the linear
probe separating two embedding sets, and back-translation quality aggregation.
"""

from .backtrans import BacktransReport, backtranslation_quality
from .frontier import DivergenceCurve, MauveConfig, mauve, mauve_repeated
from .probe import LinearProbe, ProbeConfig, probe_accuracy, train_probe

__all__ = [
    "BacktransReport",
    "backtranslation_quality",
    "DivergenceCurve",
    "MauveConfig",
    "mauve",
    "mauve_repeated",
    "LinearProbe",
    "ProbeConfig",
    "probe_accuracy",
    "train_probe",
]
