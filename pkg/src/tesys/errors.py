"""Exception hierarchy shared by every module of the package."""


class TesError(Exception):
    """Base class for all errors raised by tesys."""


class NonMonotoneTime(TesError):
    def __init__(self, index):
        super().__init__(f"timestamp at position {index} does not strictly increase")
        self.index = index


class ExplosionLimit(TesError):
    def __init__(self, limit, what="states"):
        super().__init__(f"exploration exceeded the limit of {limit} {what}")
        self.limit = limit


class DecompositionLimit(TesError):
    pass


class TimeMismatch(TesError):
    pass


class ModeMismatch(TesError):
    pass


class RuntimeDeadlock(TesError):
    """No composable joint transition is enabled in the current system state."""

    def __init__(self, state=None):
        super().__init__("no enabled joint transition")
        self.state = state


class IdentifierOrder(TesError):
    pass


class InvalidInit(TesError):
    pass


class MissingComponent(TesError):
    pass


class SpecError(TesError):
    """Malformed system spec file; carries a line/column when known."""

    def __init__(self, message, line=None, column=None):
        where = f" (line {line}, column {column})" if line is not None else ""
        super().__init__(message + where)
        self.line = line
        self.column = column
