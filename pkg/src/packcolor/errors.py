"""Exception hierarchy shared by every packcolor module."""


class PackColorError(Exception):
    """Base class for all errors raised by packcolor."""


class InputError(PackColorError, ValueError):
    """Malformed or out-of-range input (bad cell, bad plant, ragged grid file)."""


class RefusalError(PackColorError):
    """The request exceeds a size guard of an exhaustive routine."""


class ParseError(PackColorError, ValueError):
    """Solver output or DIMACS text could not be interpreted."""


class DecodeError(PackColorError):
    """A model is inconsistent with the variable map it is decoded against."""


class IntegrityError(PackColorError):
    """A solver answer failed independent re-checking."""


class SolverEnvironmentError(PackColorError, OSError):
    """The external solver could not be launched."""
