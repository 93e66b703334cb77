"""LFP contrast response function tuning: preprocessing, models, estimators, evaluation."""

__version__ = "0.1.0"
