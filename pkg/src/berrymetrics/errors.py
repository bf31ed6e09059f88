"""Exception hierarchy shared across the package."""


class BerrymetricsError(Exception):
    """Base class for all package errors."""


# --- imaging ---

class ImagingError(BerrymetricsError):
    pass


class NoForeground(ImagingError):
    """Largest non-backdrop component is below the minimum pixel count."""


class DegenerateAxis(ImagingError):
    """Principal axes too close to equal to orient the berry."""


class EmptySides(ImagingError):
    """No mask pixels on either side of the axis."""


class AllDesaturated(ImagingError):
    """Every mask pixel fell below the saturation floor."""


class LayoutOverflow(ImagingError):
    """Synthetic achene layout could not be placed without overlap."""


class StageError(ImagingError):
    """Pipeline failure tagged with the stage that raised it."""

    def __init__(self, stage, cause):
        super().__init__(f"stage '{stage}': {cause}")
        self.stage = stage
        self.cause = cause


# --- dataset ---

class DatasetError(BerrymetricsError):
    pass


class SchemaError(DatasetError):
    """CSV header does not match the documented schema."""


class RowError(DatasetError):
    """A CSV row failed validation."""

    def __init__(self, row, field, message):
        super().__init__(f"row {row}, field '{field}': {message}")
        self.row = row
        self.field = field


class OutOfRange(DatasetError):
    pass


class EmptyGroup(DatasetError):
    """A treatment group has no records."""

    def __init__(self, treatment):
        super().__init__(f"no records for treatment '{treatment}'")
        self.treatment = treatment


class JoinError(DatasetError):
    """Metric rows could not be joined to field records."""

    def __init__(self, unmatched):
        super().__init__(f"unmatched berry_ids: {sorted(unmatched)}")
        self.unmatched = sorted(unmatched)


# --- mixed models ---

class ModelError(BerrymetricsError):
    pass


class UnknownFactor(ModelError):
    pass


class SingleLevelFactor(ModelError):
    pass


class RankDeficientX(ModelError):
    pass


class NonConvergence(ModelError):
    """REML iteration cap reached; carries the best iterate."""

    def __init__(self, message, fit=None):
        super().__init__(message)
        self.fit = fit


class NotConverged(ModelError):
    """Downstream operation called on an unconverged fit."""
