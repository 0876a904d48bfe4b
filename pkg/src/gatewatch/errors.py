"""Exception hierarchy shared by all gatewatch modules."""


class GatewatchError(Exception):
    """Base class for all gatewatch errors."""


# --- ingestion -------------------------------------------------------------

class IoFailure(GatewatchError):
    pass


class MissingColumn(GatewatchError):
    pass


class MalformedHeader(GatewatchError):
    pass


class TimestampParseError(GatewatchError):
    pass


# --- time series -----------------------------------------------------------

class EmptyInput(GatewatchError):
    pass


class DegenerateSplit(GatewatchError):
    pass


class SeriesTooShort(GatewatchError):
    pass


class MissingValuesPresent(GatewatchError):
    pass


class AllMissing(GatewatchError):
    pass


# --- models ----------------------------------------------------------------

class NonFiniteLoss(GatewatchError):
    pass


class LengthMismatch(GatewatchError):
    pass


class AllTargetsZero(GatewatchError):
    pass


# --- detection -------------------------------------------------------------

class UnsupportedConfidence(GatewatchError):
    pass


# --- classification / streaming --------------------------------------------

class SchemaMismatch(GatewatchError):
    pass


class EmptyTrainingSet(GatewatchError):
    pass


class WidthMismatch(GatewatchError):
    pass


# --- simulation ------------------------------------------------------------

class InvalidScript(GatewatchError):
    pass


class TimeBaseMismatch(GatewatchError):
    pass
