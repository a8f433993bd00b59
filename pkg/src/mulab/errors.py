"""Shared exception types. The CLI maps these onto exit codes."""


class LabError(Exception):
    pass


class WindowTooShortError(LabError, ValueError):
    """A difference/block operation was asked for more data than the window holds."""


class ResourceBudgetError(LabError, RuntimeError):
    """An enumeration or memory budget would be exceeded."""


class PrecisionError(LabError, ArithmeticError):
    """A certified error bound cannot be met at the requested argument."""


class ParseError(LabError, ValueError):
    """A phase / weight / config description failed to parse."""


class InvariantError(LabError, RuntimeError):
    """An internal consistency check failed; indicates a bug, not bad input."""


class CacheFormatError(LabError, OSError):
    pass


class CacheMagicError(CacheFormatError):
    pass


class CacheVersionError(CacheFormatError):
    pass


class CacheChecksumError(CacheFormatError):
    pass
