"""Exception hierarchy.

Errors split into two families so the CLI can map them onto exit codes:
``ConfigError`` (bad input, exit 2) and ``MethodError`` (the requested
computation does not apply, exit 3).
"""


class MixedRobustError(Exception):
    pass


class ConfigError(MixedRobustError):
    pass


class MethodError(MixedRobustError):
    pass


class ZeroPolynomial(MixedRobustError, ValueError):
    pass


class ExprSyntaxError(ConfigError):
    def __init__(self, message, text="", offset=0):
        super().__init__(f"{message} at offset {offset} in {text!r}")
        self.text = text
        self.offset = offset


class UnknownVariable(ConfigError):
    def __init__(self, name, text="", offset=0):
        super().__init__(f"unknown variable {name!r} at offset {offset} in {text!r}")
        self.name = name
        self.text = text
        self.offset = offset


class DivisionByZero(MixedRobustError, ZeroDivisionError):
    def __init__(self, subexpr):
        super().__init__(f"division by zero in sub-expression {subexpr!r}")
        self.subexpr = subexpr


class InvalidParams(ConfigError):
    pass


class DimensionMismatch(ConfigError):
    pass


class InvalidProblem(ConfigError):
    pass


class EmptySet(MixedRobustError):
    pass


class DegeneratePolygon(MixedRobustError, ValueError):
    pass


class DomainError(MixedRobustError, ValueError):
    pass


class MethodInapplicable(MethodError):
    pass


class DimensionTooHigh(MethodError):
    pass


class NotDiscrete(MethodError):
    pass


class UnboundedSupport(MethodError):
    pass
