"""Exception types shared across the toolkit.

Every pipeline failure raises a named subclass of CogloadError so callers
(and the CLI) can map failures to machine-readable records without string
matching.  Exceptions that point at a location in the input carry it as an
attribute (frame, window, row, ...).
"""

from __future__ import annotations


class CogloadError(Exception):
    """Base class for all toolkit errors."""


# --- signal containers and windowing -------------------------------------

class ZeroLengthWindow(CogloadError):
    """Window or hop length rounds to zero samples at the series rate."""


class TooShort(CogloadError):
    """Input has too few samples for the requested operation."""


class UnknownChannel(CogloadError):
    """A requested channel label is absent (or ambiguous) in the series."""


# --- spectral kernels -----------------------------------------------------

class NyquistViolation(CogloadError):
    """A band edge reaches or exceeds the Nyquist frequency."""


class BandOutOfRange(CogloadError):
    """No spectrogram bin falls inside the requested band."""


class NoAlphaPeak(CogloadError):
    """Eyes-closed minus eyes-open spectrum has no positive peak in the search band."""


class SingularNoise(CogloadError):
    """Flank covariance is singular even after shrinkage regularization."""


# --- EEG pipelines ----------------------------------------------------------

class ZeroBaseline(CogloadError):
    """Baseline power course has non-positive mean; normalization undefined."""


class ZeroAlphaFrame(CogloadError):
    """Alpha power is zero in a frame; theta/alpha ratio undefined there."""

    def __init__(self, frame: int):
        super().__init__(f"alpha power is zero at frame {frame}")
        self.frame = frame


class MissingChannel(CogloadError):
    """A channel required by the pipeline (e.g. Fp1/Fp2) is absent."""


# --- gaze and pupil pipelines ----------------------------------------------

class GeometryOverflow(CogloadError):
    """Requested trajectory geometry does not fit on the screen."""


class LengthMismatch(CogloadError):
    """Paired sequences differ in length or sample rate."""


class EmptyAfterTrim(CogloadError):
    """Dropping the head of the trace leaves nothing to process."""


class NoValidSamples(CogloadError):
    """A pupil window contains no valid samples."""

    def __init__(self, window: int):
        super().__init__(f"no valid samples in window {window}")
        self.window = window


# --- learning and evaluation -------------------------------------------------

class SingleClass(CogloadError):
    """Training data contains fewer than two classes."""


class DimensionMismatch(CogloadError):
    """Feature dimensionality is inconsistent with the model or dataset."""


class SinglePerson(CogloadError):
    """Too few distinct persons for a person-level split."""


class DegenerateFold(CogloadError):
    """A training fold lost all instances of some class."""


class TooFewRepetitions(CogloadError):
    """A person has fewer repetitions than the requested fold count."""


class ConstantPredictor(CogloadError):
    """Regression predictor has zero variance."""


class TooFewPoints(CogloadError):
    """Too few points to fit the regression."""


class EmptyConfusion(CogloadError):
    """Confusion matrix has zero total count."""


# --- synthesis ---------------------------------------------------------------

class InfeasibleRate(CogloadError):
    """Requested match rate cannot be realized for the given n and length."""


# --- streaming ---------------------------------------------------------------

class ChannelMismatch(CogloadError):
    """Pushed samples do not match the session channel layout."""


class BufferOverflow(CogloadError):
    """Session buffer capacity would be exceeded."""

    def __init__(self, capacity: int):
        super().__init__(f"stream buffer capacity of {capacity} samples exceeded")
        self.capacity = capacity


# --- recording files -----------------------------------------------------------

class ParseError(CogloadError):
    """A recording file line cannot be parsed."""

    def __init__(self, line: int, reason: str):
        super().__init__(f"line {line}: {reason}")
        self.line = line
        self.reason = reason


class RateJitter(CogloadError):
    """Timestamps deviate from the declared rate by more than half a sample."""

    def __init__(self, row: int, message: str = ""):
        super().__init__(message or f"timestamp jitter beyond half a sample at data row {row}")
        self.row = row


class UnknownUnitWarning(UserWarning):
    """A channel declares a unit outside the documented set (uV, mm, px)."""
