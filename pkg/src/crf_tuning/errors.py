"""Exception hierarchy shared by every stage of the pipeline."""


class CRFError(Exception):
    """Base class for all errors raised by crf_tuning."""


class ConfigError(CRFError, ValueError):
    """A configuration value or precondition is invalid."""


class DataError(CRFError, ValueError):
    """Input data is malformed or non-finite."""


class DegenerateWindowError(CRFError, ValueError):
    """An analysis window is empty or a band contains no FFT bin."""


class DegenerateBaselineError(CRFError, ZeroDivisionError):
    """Baseline band power is zero, so the SNR ratio is undefined."""


class IncompleteRecordingError(CRFError, ValueError):
    """A recording lacks trials for one of the configured contrasts."""


class DegenerateRangeError(CRFError, ValueError):
    """Normalization range has zero width."""


class DegenerateMembershipError(CRFError, FloatingPointError):
    """All fuzzy membership weights vanished at the evaluation point."""


class DegenerateVarianceError(CRFError, ZeroDivisionError):
    """Targets have zero variance, so R^2 is undefined."""


class DegenerateMeanError(CRFError, ZeroDivisionError):
    """Product of target and prediction means is zero, so NMSE is undefined."""


class FlatCurveError(CRFError, ValueError):
    """Peak response equals the zero-contrast response; MI is undefined."""


class StepFailureError(CRFError, ArithmeticError):
    """Levenberg-Marquardt could not find a cost-decreasing step."""


class DivergenceError(CRFError, ArithmeticError):
    """The training cost became non-finite."""


class SynthSpecError(CRFError, ValueError):
    """A synthetic-data specification cannot be realised."""
