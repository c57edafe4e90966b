"""Exception hierarchy.

Every error carries a stable ``kind`` string and the CLI exit code it maps to.
"""

from __future__ import annotations


class MvrefError(Exception):
    kind = "Error"
    exit_code = 1

    def to_dict(self) -> dict:
        return {"kind": self.kind, "message": str(self)}


class ConfigError(MvrefError, ValueError):
    kind = "ConfigError"
    exit_code = 2


class ParseError(MvrefError, ValueError):
    kind = "ParseError"
    exit_code = 2


class DataError(MvrefError, ValueError):
    kind = "DataError"
    exit_code = 3


class DuplicatePeriod(DataError):
    kind = "DuplicatePeriod"


class EmptySeries(DataError):
    kind = "EmptySeries"


class InsufficientOverlap(DataError):
    kind = "InsufficientOverlap"


class TooFewSecurities(DataError):
    kind = "TooFewSecurities"


class LengthMismatch(DataError):
    kind = "LengthMismatch"


class DegenerateError(MvrefError, ArithmeticError):
    kind = "DegenerateError"
    exit_code = 4


class SingularSystem(DegenerateError):
    kind = "SingularSystem"


class DegenerateCovariance(DegenerateError):
    kind = "DegenerateCovariance"


class ResidualTooLarge(DegenerateError):
    kind = "ResidualTooLarge"


class ZeroVariance(DegenerateError):
    kind = "ZeroVariance"


class NotPositiveDefinite(DegenerateError):
    kind = "NotPositiveDefinite"
